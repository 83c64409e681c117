//! Seeded generators of zero-sum instances.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` and consumes
//! uniform `f64`s in `[0, 1)` (53-bit, `rand`'s `StandardUniform`), so a seed
//! determines the output on every platform. Batches derive one seed per
//! instance with [`derive_seed`].

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{span_of, vector_sum, Instance, PlanarVector, WeightedInstance};

pub const DEFAULT_MAX_RETRY: usize = 100;
pub const SECTOR_PROJECTION_ROUNDS: usize = 100;

pub type GenRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th item of a batch: `splitmix64(splitmix64(seed) + index)`.
///
/// Hashing the base seed first keeps batches with nearby seeds from sharing
/// item seeds (a plain `seed ^ index` maps (3, 2) and (1, 0) together).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed).wrapping_add(index))
}

/// Uniform point of the closed unit disk, by rejection from the square.
pub fn uniform_disk(rng: &mut impl Rng) -> PlanarVector {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        if x * x + y * y <= 1.0 {
            return PlanarVector::raw(x, y);
        }
    }
}

/// `pairs` disk samples, each followed by its exact negation.
pub fn gen_antipodal(pairs: usize, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let mut vectors = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let v = uniform_disk(&mut rng);
        vectors.push(v);
        vectors.push(-v);
    }
    Instance::new(vectors)
}

/// `n - 1` disk samples closed by their negated sum; redrawn while that
/// closing vector leaves the disk, at most `max_retry` times.
pub fn gen_closure(n: usize, seed: u64, max_retry: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::arg(format!("closure needs n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..=max_retry {
        let mut vectors: Vec<PlanarVector> = (0..n - 1).map(|_| uniform_disk(&mut rng)).collect();
        let closing = -vector_sum(&vectors);
        if closing.norm() <= 1.0 {
            vectors.push(closing);
            return Ok(Instance::new(vectors));
        }
    }
    Err(Error::Generation(format!(
        "closure of {n} vectors left the unit disk on all {} attempts",
        max_retry + 1
    )))
}

/// Subtracts the mean, then shrinks everything if some modulus exceeds 1.
/// An all-equal input collapses to exact zeros.
pub(crate) fn center_and_cap(vectors: &mut [PlanarVector]) {
    center(vectors);
    let max = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        vectors.fill(PlanarVector::ZERO);
    } else if max > 1.0 {
        for v in vectors.iter_mut() {
            *v = *v * (1.0 / max);
        }
    }
}

pub(crate) fn center(vectors: &mut [PlanarVector]) {
    if vectors.is_empty() {
        return;
    }
    let s = vector_sum(vectors);
    let mean = PlanarVector::raw(s.x() / vectors.len() as f64, s.y() / vectors.len() as f64);
    for v in vectors.iter_mut() {
        *v = *v - mean;
    }
}

/// `n` disk samples, centered and shrunk into the cap.
pub fn gen_centered(n: usize, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::arg(format!("centered needs n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut vectors: Vec<PlanarVector> = (0..n).map(|_| uniform_disk(&mut rng)).collect();
    center_and_cap(&mut vectors);
    Ok(Instance::new(vectors))
}

/// `pairs` opposite pairs of equal weight `u_k / (2 Σu)`, with `u_k` in `(0, 1]`.
pub fn gen_weighted_pairs(pairs: usize, seed: u64) -> Result<WeightedInstance> {
    if pairs == 0 {
        return Err(Error::arg("weighted pairs needs at least one pair"));
    }
    let mut rng = rng_from_seed(seed);
    let draws: Vec<(f64, f64)> = (0..pairs)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            let theta = TAU * rng.random::<f64>();
            (u, theta)
        })
        .collect();
    let total: f64 = draws.iter().map(|d| d.0).sum();
    let mut weights = Vec::with_capacity(2 * pairs);
    let mut angles = Vec::with_capacity(2 * pairs);
    for (u, theta) in draws {
        let w = u / (2.0 * total);
        weights.extend([w, w]);
        angles.extend([theta, theta + PI]);
    }
    WeightedInstance::new(weights, angles)
}

/// Vectors with arguments in `[-alpha/2, alpha/2]`, projected to zero sum.
///
/// Each round subtracts the mean, clamps arguments that left the sector onto
/// the nearer boundary ray (modulus kept) and shrinks into the cap. A sector
/// narrower than a half-turn cannot hold a nonzero zero-sum family, so such
/// widths are refused.
pub fn gen_sector(n: usize, alpha: f64, seed: u64) -> Result<Instance> {
    if !alpha.is_finite() || alpha > TAU {
        return Err(Error::arg(format!("sector width {alpha} outside [π, 2π]")));
    }
    if alpha < PI {
        return Err(Error::arg(format!(
            "sector width {alpha} < π: every nonzero vector would have a positive component \
             along the bisector, so no nonzero family in it sums to zero"
        )));
    }
    if n < 2 {
        return Err(Error::arg(format!("sector needs n >= 2, got {n}")));
    }
    let half = alpha / 2.0;
    let mut rng = rng_from_seed(seed);
    let mut vectors: Vec<PlanarVector> = (0..n)
        .map(|_| {
            let theta = -half + alpha * rng.random::<f64>();
            let r = rng.random::<f64>();
            PlanarVector::raw(r * theta.cos(), r * theta.sin())
        })
        .collect();

    let allowed = 1e-9 * n as f64;
    for _ in 0..SECTOR_PROJECTION_ROUNDS {
        center(&mut vectors);
        for v in vectors.iter_mut() {
            let a = v.arg();
            if a.abs() > half && !v.is_zero() {
                *v = PlanarVector::raw(v.norm() * half.cos(), v.norm() * half.sin().copysign(a));
            }
        }
        let max = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max > 1.0 {
            for v in vectors.iter_mut() {
                *v = *v * (1.0 / max);
            }
        }
        if vector_sum(&vectors).norm() <= allowed && span_of(&vectors) <= alpha + 1e-9 {
            return Ok(Instance::new(vectors));
        }
    }
    Err(Error::Generation(format!(
        "sector projection (n = {n}, alpha = {alpha}) did not reach zero sum in {SECTOR_PROJECTION_ROUNDS} rounds"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Antipodal,
    Closure,
    Centered,
    Sector,
    WeightedPairs,
}

/// One batch request. `n` counts vectors, or pairs for the paired kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub kind: GenKind,
    #[serde(alias = "pairs", alias = "n_or_pairs")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub seed: u64,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "default_retry")]
    pub max_retry: usize,
}

fn one() -> usize {
    1
}

fn default_retry() -> usize {
    DEFAULT_MAX_RETRY
}

/// Serialized untagged: the fields of whichever instance it holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generated {
    Plain(Instance),
    Weighted(WeightedInstance),
}

impl Generated {
    pub fn len(&self) -> usize {
        match self {
            Generated::Plain(i) => i.len(),
            Generated::Weighted(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Generated::Plain(i) => i.validate().is_valid(),
            Generated::Weighted(w) => w.validate().is_valid(),
        }
    }
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            alpha: None,
            seed,
            count: 1,
            max_retry: DEFAULT_MAX_RETRY,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    /// Checks the kind's parameter domain without drawing anything.
    pub fn check(&self) -> Result<()> {
        let need = |min: usize, what: &str| {
            if self.n < min {
                Err(Error::arg(format!("{:?} needs {what} >= {min}, got {}", self.kind, self.n)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            GenKind::Antipodal => need(0, "pairs"),
            GenKind::Closure | GenKind::Centered => need(2, "n"),
            GenKind::WeightedPairs => need(1, "pairs"),
            GenKind::Sector => {
                need(2, "n")?;
                match self.alpha {
                    Some(a) if (PI..=TAU).contains(&a) => Ok(()),
                    Some(a) => Err(Error::arg(format!(
                        "sector width {a} outside [π, 2π] (narrower sectors hold no nonzero zero-sum family)"
                    ))),
                    None => Err(Error::arg("sector kind requires alpha")),
                }
            }
        }?;
        if self.alpha.is_some() && self.kind != GenKind::Sector {
            return Err(Error::arg("alpha is only meaningful for the sector kind"));
        }
        Ok(())
    }

    /// Draws the instance with the given seed.
    pub fn generate_with_seed(&self, seed: u64) -> Result<Generated> {
        self.check()?;
        Ok(match self.kind {
            GenKind::Antipodal => Generated::Plain(gen_antipodal(self.n, seed)),
            GenKind::Closure => Generated::Plain(gen_closure(self.n, seed, self.max_retry)?),
            GenKind::Centered => Generated::Plain(gen_centered(self.n, seed)?),
            GenKind::Sector => Generated::Plain(gen_sector(self.n, self.alpha.unwrap_or(TAU), seed)?),
            GenKind::WeightedPairs => Generated::Weighted(gen_weighted_pairs(self.n, seed)?),
        })
    }

    /// The `index`-th instance of the batch, drawn with `derive_seed(seed, index)`.
    pub fn generate_item(&self, index: usize) -> Result<(u64, Generated)> {
        let seed = derive_seed(self.seed, index as u64);
        Ok((seed, self.generate_with_seed(seed)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the SplitMix64 stream seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn antipodal_cases() {
        assert!(gen_antipodal(0, 1).is_empty());
        let inst = gen_antipodal(50, 17);
        assert_eq!(inst.len(), 100);
        assert!(inst.validate().is_valid());
        let s = inst.sum();
        assert_eq!((s.x(), s.y()), (0.0, 0.0));
        assert_eq!(gen_antipodal(3, 5), gen_antipodal(3, 5));
    }

    #[test]
    fn closure_cases() {
        let inst = gen_closure(2, 3, 0).unwrap();
        assert_eq!(inst.vectors()[1], -inst.vectors()[0]);
        for seed in 0..50 {
            let inst = gen_closure(3, seed, 1000).unwrap();
            assert!(inst.validate().is_valid());
        }
        assert!(matches!(gen_closure(200, 1, 0), Err(Error::Generation(_))));
        assert!(gen_closure(1, 1, 10).is_err());
    }

    #[test]
    fn centered_cases() {
        let inst = gen_centered(2, 9).unwrap();
        let [a, b] = [inst.vectors()[0], inst.vectors()[1]];
        assert!((a + b).norm() < 1e-15);
        for seed in 0..20 {
            let inst = gen_centered(100, seed).unwrap();
            assert!(inst.validate().is_valid(), "{}", inst.validate());
            assert!(inst.sum().norm() <= 1e-12 * 100.0);
        }
        let mut equal = vec![PlanarVector::raw(0.25, -0.5); 4];
        center_and_cap(&mut equal);
        assert!(equal.iter().all(|v| v.is_zero()));
        assert!(gen_centered(1, 0).is_err());
    }

    #[test]
    fn weighted_cases() {
        let w = gen_weighted_pairs(1, 4).unwrap();
        assert_eq!(w.weights(), &[0.5, 0.5]);
        assert!((w.angles()[1] - w.angles()[0] - PI).abs() < 1e-15);
        assert!(w.validate().is_valid());
        let w = gen_weighted_pairs(10, 4).unwrap();
        assert!(w.validate().is_valid());
        assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w, gen_weighted_pairs(10, 4).unwrap());
        assert!(gen_weighted_pairs(0, 4).is_err());
    }

    #[test]
    fn sector_cases() {
        let inst = gen_sector(20, TAU, 8).unwrap();
        assert!(inst.validate().is_valid());

        let inst = gen_sector(2, PI, 8).unwrap();
        assert!(inst.validate().is_valid());
        for v in inst.vectors() {
            assert!(v.x().abs() < 1e-8, "{v} not on the boundary line");
        }
        assert!(crate::geometry::angular_span(&inst) <= PI + 1e-9);

        let err = gen_sector(10, PI / 2.0, 8).unwrap_err();
        assert!(err.to_string().contains("sums to zero"));
        assert!(gen_sector(10, 7.0, 8).is_err());
    }

    #[test]
    fn spec_json_and_check() {
        let spec: GenSpec =
            serde_json::from_str(r#"{"kind":"antipodal","pairs":2,"seed":7}"#).unwrap();
        assert_eq!(spec, GenSpec::new(GenKind::Antipodal, 2, 7));
        let (_, g) = spec.generate_item(0).unwrap();
        assert_eq!(g.len(), 4);

        let bad = GenSpec::new(GenKind::Sector, 10, 1).with_alpha(1.0);
        assert!(bad.check().is_err());
        assert!(GenSpec::new(GenKind::Sector, 10, 1).check().is_err());
        assert!(GenSpec::new(GenKind::Centered, 10, 1).with_alpha(4.0).check().is_err());
        assert!(serde_json::from_str::<GenSpec>(r#"{"kind":"antipodal","n":2,"seed":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn seed_independence() {
        let spec = GenSpec::new(GenKind::Centered, 5, 123);
        let draws: Vec<Generated> = (0..100).map(|i| spec.generate_item(i).unwrap().1).collect();
        let distinct = draws.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(distinct >= 99);
    }
}
