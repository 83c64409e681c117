//! The four rearrangement constructions.
//!
//! Each construction returns the permutation it built, the bound it claims
//! and the radius it actually achieved on the original instance. Claimed
//! bounds are reported, never assumed: the harness compares the two.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::balance::{balance_signed, BalanceResult};
use crate::error::{Error, Result};
use crate::geometry::{
    angular_span, partial_sums_of, Instance, Permutation, PlanarVector, WeightedInstance,
    MODULUS_SLACK,
};
use crate::subset::{sweep, SubsetResult};

/// Slack on the admissibility test `<S_p, v> <= 0`.
pub const ADMISSIBLE_SLACK: f64 = 1e-12;
/// `|S_P|` at or below this makes the interleaving construction degenerate.
pub const DEGENERATE_SUBSET_SUM: f64 = 1e-12;
/// `sin(α/2)` at or below this makes the sector bound unbounded.
pub const SECTOR_SIN_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmTag {
    Sqrt5,
    Steinitz2,
    Sector,
    Weighted,
}

impl AlgorithmTag {
    pub const ALL: [AlgorithmTag; 4] = [
        AlgorithmTag::Sqrt5,
        AlgorithmTag::Steinitz2,
        AlgorithmTag::Sector,
        AlgorithmTag::Weighted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmTag::Sqrt5 => "sqrt5",
            AlgorithmTag::Steinitz2 => "steinitz2",
            AlgorithmTag::Sector => "sector",
            AlgorithmTag::Weighted => "weighted",
        }
    }

    /// Whether the construction takes weighted instances.
    pub fn is_weighted(self) -> bool {
        self == AlgorithmTag::Weighted
    }
}

impl fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AlgorithmTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| Error::arg(format!("unknown algorithm tag {s:?}")))
    }
}

/// A bound as claimed by a construction; serialized as a number or `"unbounded"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClaimedBound {
    Finite(f64),
    Unbounded,
}

impl ClaimedBound {
    pub fn value(self) -> f64 {
        match self {
            ClaimedBound::Finite(b) => b,
            ClaimedBound::Unbounded => f64::INFINITY,
        }
    }

    /// `radius <= bound + slack`.
    pub fn admits(self, radius: f64, slack: f64) -> bool {
        match self {
            ClaimedBound::Finite(b) => radius <= b + slack,
            ClaimedBound::Unbounded => true,
        }
    }

    fn scaled(self, s: f64) -> Self {
        match self {
            ClaimedBound::Finite(b) => ClaimedBound::Finite(b * s),
            ClaimedBound::Unbounded => ClaimedBound::Unbounded,
        }
    }
}

impl fmt::Display for ClaimedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClaimedBound::Finite(b) => write!(f, "{b}"),
            ClaimedBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl Serialize for ClaimedBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ClaimedBound::Finite(b) => s.serialize_f64(*b),
            ClaimedBound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for ClaimedBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(b) => Ok(ClaimedBound::Finite(b)),
            Repr::Str(s) if s == "unbounded" => Ok(ClaimedBound::Unbounded),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad bound {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RearrangeOutcome {
    pub algorithm: AlgorithmTag,
    pub perm: Permutation,
    pub claimed_bound: ClaimedBound,
    pub achieved_radius: f64,
    /// Steps (0-based positions in `perm`) where no admissible vector was
    /// found within tolerance and the least-bad one was taken instead.
    pub fallback_steps: Vec<usize>,
}

impl RearrangeOutcome {
    pub fn fallback_flag(&self) -> bool {
        !self.fallback_steps.is_empty()
    }

    pub fn bound_satisfied(&self, slack: f64) -> bool {
        self.claimed_bound.admits(self.achieved_radius, slack)
    }

    fn new(
        algorithm: AlgorithmTag,
        vectors: &[PlanarVector],
        order: Vec<usize>,
        claimed_bound: ClaimedBound,
        fallback_steps: Vec<usize>,
    ) -> Self {
        let perm = Permutation::from_order_unchecked(order);
        let achieved_radius = partial_sums_of(vectors, &perm)
            .expect("construction emits a full permutation")
            .max_radius;
        Self {
            algorithm,
            perm,
            claimed_bound,
            achieved_radius,
            fallback_steps,
        }
    }
}

/// Intermediate state of the interleaving construction, exposed so its
/// sign-separation and per-block prefix properties can be checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Sqrt5Blocks {
    pub subset: SubsetResult,
    /// Angle applied to the working copy, `-arg(S_P)`.
    pub rotation: f64,
    pub rotated: Vec<PlanarVector>,
    /// `P` in balanced order (original indices).
    pub p_order: Vec<usize>,
    /// Nonzero complement `Q` in balanced order.
    pub q_order: Vec<usize>,
    pub zeros: Vec<usize>,
    pub p_prefix_bound: f64,
    pub q_prefix_bound: f64,
    pub degenerate: bool,
}

impl Sqrt5Blocks {
    /// Sum of imaginary parts (rotated frame) over a block.
    pub fn block_im_sum(&self, block: &[usize]) -> f64 {
        block.iter().map(|&i| self.rotated[i].y()).sum()
    }

    /// `i_1, j_1, i_2, j_2, …`, then the longer block's tail, then zeros.
    pub fn interleaved(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.rotated.len());
        let (p, q) = (&self.p_order, &self.q_order);
        for k in 0..p.len().max(q.len()) {
            if let Some(&i) = p.get(k) {
                order.push(i);
            }
            if let Some(&j) = q.get(k) {
                order.push(j);
            }
        }
        order.extend_from_slice(&self.zeros);
        order
    }
}

fn require_valid(instance: &Instance) -> Result<()> {
    instance.validate().into_result()
}

pub fn sqrt5_blocks(instance: &Instance) -> Result<Sqrt5Blocks> {
    require_valid(instance)?;
    let vectors = instance.vectors();
    let subset = sweep(vectors);
    let zeros: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].is_zero()).collect();

    if subset.magnitude <= DEGENERATE_SUBSET_SUM {
        return Ok(Sqrt5Blocks {
            subset,
            rotation: 0.0,
            rotated: vectors.to_vec(),
            p_order: Vec::new(),
            q_order: Vec::new(),
            zeros,
            p_prefix_bound: 0.0,
            q_prefix_bound: 0.0,
            degenerate: true,
        });
    }

    let rotation = -subset.subset_sum.arg();
    let (s, c) = rotation.sin_cos();
    let rotated: Vec<PlanarVector> = vectors.iter().map(|v| v.rotated_by(c, s)).collect();
    let cap = instance.modulus_cap() + MODULUS_SLACK;

    let p = subset.members.clone();
    let q = subset.complement(vectors);
    let balance = |block: &[usize]| -> Result<(Vec<usize>, f64)> {
        let ims: Vec<f64> = block.iter().map(|&i| rotated[i].y()).collect();
        let BalanceResult {
            perm,
            prefix_bound_achieved,
        } = balance_signed(&ims, cap)?;
        Ok((
            perm.as_slice().iter().map(|&k| block[k]).collect(),
            prefix_bound_achieved,
        ))
    };
    let (p_order, p_prefix_bound) = balance(&p)?;
    let (q_order, q_prefix_bound) = balance(&q)?;

    Ok(Sqrt5Blocks {
        subset,
        rotation,
        rotated,
        p_order,
        q_order,
        zeros,
        p_prefix_bound,
        q_prefix_bound,
        degenerate: false,
    })
}

/// Interleaves the two sign-separated half-plane blocks; claims `√5·cap`.
pub fn rearrange_sqrt5(instance: &Instance) -> Result<RearrangeOutcome> {
    let blocks = sqrt5_blocks(instance)?;
    let order = if blocks.degenerate {
        (0..instance.len()).collect()
    } else {
        blocks.interleaved()
    };
    Ok(RearrangeOutcome::new(
        AlgorithmTag::Sqrt5,
        instance.vectors(),
        order,
        ClaimedBound::Finite(5f64.sqrt() * instance.modulus_cap()),
        Vec::new(),
    ))
}

/// Repeatedly takes a remaining vector with `<S_p, v> <= 0`, the one giving
/// the smallest `|S_p + v|`. Zero vectors go last.
fn obtuse_greedy(vectors: &[PlanarVector]) -> (Vec<usize>, Vec<usize>) {
    let mut remaining: Vec<usize> = (0..vectors.len()).filter(|&i| !vectors[i].is_zero()).collect();
    let mut order = Vec::with_capacity(vectors.len());
    let mut fallback_steps = Vec::new();
    let mut s = PlanarVector::ZERO;

    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None; // (|S+v|², index, slot)
        for (slot, &i) in remaining.iter().enumerate() {
            let v = vectors[i];
            if s.dot(v) > ADMISSIBLE_SLACK {
                continue;
            }
            let key = (s + v).norm_sq();
            if best.is_none_or(|(k, j, _)| key < k || (key == k && i < j)) {
                best = Some((key, i, slot));
            }
        }
        let slot = match best {
            Some((_, _, slot)) => slot,
            None => {
                fallback_steps.push(order.len());
                least_dot(vectors, &remaining, s)
            }
        };
        let i = remaining.swap_remove(slot);
        s += vectors[i];
        order.push(i);
    }
    order.extend((0..vectors.len()).filter(|&i| vectors[i].is_zero()));
    (order, fallback_steps)
}

/// Slot of the remaining vector minimizing `<S, v>`, lowest index on ties.
fn least_dot(vectors: &[PlanarVector], remaining: &[usize], s: PlanarVector) -> usize {
    let mut best: Option<(f64, usize, usize)> = None;
    for (slot, &i) in remaining.iter().enumerate() {
        let key = s.dot(vectors[i]);
        if best.is_none_or(|(k, j, _)| key < k || (key == k && i < j)) {
            best = Some((key, i, slot));
        }
    }
    best.expect("remaining is nonempty").2
}

/// Obtuse-step greedy; claims `2·cap`.
pub fn rearrange_steinitz(instance: &Instance) -> Result<RearrangeOutcome> {
    require_valid(instance)?;
    let (order, fallback_steps) = obtuse_greedy(instance.vectors());
    Ok(RearrangeOutcome::new(
        AlgorithmTag::Steinitz2,
        instance.vectors(),
        order,
        ClaimedBound::Finite(2.0 * instance.modulus_cap()),
        fallback_steps,
    ))
}

/// `1 / sin(α/2)`, or unbounded when `sin(α/2)` vanishes.
pub fn sector_bound(alpha: f64) -> Result<ClaimedBound> {
    if !(0.0..=TAU).contains(&alpha) {
        return Err(Error::arg(format!("sector width {alpha} outside [0, 2π]")));
    }
    let s = (alpha / 2.0).sin();
    if s <= SECTOR_SIN_FLOOR {
        Ok(ClaimedBound::Unbounded)
    } else {
        Ok(ClaimedBound::Finite(1.0 / s))
    }
}

/// Most-obtuse greedy: always takes the remaining vector minimizing
/// `Re(S_p · conj z)`. Claims `cap / sin(α/2)` for the measured span α.
pub fn rearrange_sector(instance: &Instance) -> Result<RearrangeOutcome> {
    require_valid(instance)?;
    let vectors = instance.vectors();
    let alpha = angular_span(instance);
    let claimed = sector_bound(alpha)?.scaled(instance.modulus_cap());

    let mut remaining: Vec<usize> = (0..vectors.len()).filter(|&i| !vectors[i].is_zero()).collect();
    let mut order = Vec::with_capacity(vectors.len());
    let mut s = PlanarVector::ZERO;
    while !remaining.is_empty() {
        let slot = if s.is_zero() {
            (0..remaining.len()).min_by_key(|&k| remaining[k]).unwrap()
        } else {
            least_dot(vectors, &remaining, s)
        };
        let i = remaining.swap_remove(slot);
        s += vectors[i];
        order.push(i);
    }
    order.extend((0..vectors.len()).filter(|&i| vectors[i].is_zero()));

    Ok(RearrangeOutcome::new(AlgorithmTag::Sector, vectors, order, claimed, Vec::new()))
}

/// Obtuse-step greedy on `a_i e^{iθ_i}`; claims 1.
pub fn rearrange_weighted(instance: &WeightedInstance) -> Result<RearrangeOutcome> {
    instance.validate().into_result()?;
    let (order, fallback_steps) = obtuse_greedy(instance.vectors());
    Ok(RearrangeOutcome::new(
        AlgorithmTag::Weighted,
        instance.vectors(),
        order,
        ClaimedBound::Finite(1.0),
        fallback_steps,
    ))
}

/// Runs an unweighted construction by tag.
pub fn rearrange(tag: AlgorithmTag, instance: &Instance) -> Result<RearrangeOutcome> {
    match tag {
        AlgorithmTag::Sqrt5 => rearrange_sqrt5(instance),
        AlgorithmTag::Steinitz2 => rearrange_steinitz(instance),
        AlgorithmTag::Sector => rearrange_sector(instance),
        AlgorithmTag::Weighted => Err(Error::arg("the weighted construction needs a weighted instance")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn cross4() -> Instance {
        Instance::from_xy(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]).unwrap()
    }

    fn pair() -> Instance {
        Instance::from_xy(&[(1.0, 0.0), (-1.0, 0.0)]).unwrap()
    }

    #[test]
    fn tags_round_trip_through_strings() {
        for t in AlgorithmTag::ALL {
            assert_eq!(t.as_str().parse::<AlgorithmTag>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.as_str()));
        }
        assert!("sqrt2".parse::<AlgorithmTag>().is_err());
    }

    #[test]
    fn claimed_bound_json() {
        assert_eq!(serde_json::to_string(&ClaimedBound::Unbounded).unwrap(), "\"unbounded\"");
        assert_eq!(serde_json::to_string(&ClaimedBound::Finite(2.0)).unwrap(), "2.0");
        let b: ClaimedBound = serde_json::from_str("\"unbounded\"").unwrap();
        assert_eq!(b, ClaimedBound::Unbounded);
        assert!(serde_json::from_str::<ClaimedBound>("\"big\"").is_err());
    }

    #[test]
    fn sqrt5_pair() {
        let o = rearrange_sqrt5(&pair()).unwrap();
        assert_eq!(o.achieved_radius, 1.0);
        assert_eq!(o.claimed_bound, ClaimedBound::Finite(5f64.sqrt()));
    }

    #[test]
    fn sqrt5_cross() {
        let blocks = sqrt5_blocks(&cross4()).unwrap();
        assert_eq!(blocks.subset.members, vec![0, 1]);
        assert!((blocks.rotation + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        // Rotated frame: z0 -> (h, -h), z1 -> (h, h), z2 -> (-h, h), z3 -> (-h, -h).
        for (v, (x, y)) in blocks.rotated.iter().zip([
            (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
            (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        ]) {
            assert!((v.x() - x).abs() < 1e-15 && (v.y() - y).abs() < 1e-15);
        }
        let o = rearrange_sqrt5(&cross4()).unwrap();
        assert!(o.achieved_radius <= 5f64.sqrt());
        // Rounding of the π/4 rotation makes |Im z1| > |Im z0| and
        // |Im z3| > |Im z2|, so each block opens with its odd index. The
        // first P/Q pair is antipodal: sums i, 0, 1, 0.
        assert_eq!(o.perm.as_slice(), &[1, 3, 0, 2]);
        assert_eq!(o.achieved_radius, 1.0);
    }

    #[test]
    fn sqrt5_empty_and_zero() {
        let o = rearrange_sqrt5(&Instance::new(vec![])).unwrap();
        assert!(o.perm.is_empty());
        assert_eq!(o.achieved_radius, 0.0);
        let zeros = Instance::from_xy(&[(0.0, 0.0); 3]).unwrap();
        let o = rearrange_sqrt5(&zeros).unwrap();
        assert_eq!(o.perm, Permutation::identity(3));
        assert!(sqrt5_blocks(&zeros).unwrap().degenerate);
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let bad = Instance::from_xy(&[(1.0, 0.0)]).unwrap();
        assert!(rearrange_sqrt5(&bad).is_err());
        assert!(rearrange_steinitz(&bad).is_err());
        assert!(rearrange_sector(&bad).is_err());
        let big = Instance::from_xy(&[(2.0, 0.0), (-2.0, 0.0)]).unwrap();
        assert!(rearrange_steinitz(&big).is_err());
        assert!(rearrange(AlgorithmTag::Weighted, &pair()).is_err());
    }

    #[test]
    fn steinitz_cross_order() {
        let o = rearrange_steinitz(&cross4()).unwrap();
        assert_eq!(o.perm.as_slice(), &[0, 2, 1, 3]);
        assert_eq!(o.achieved_radius, 1.0);
        assert!(!o.fallback_flag());
        assert_eq!(o.claimed_bound, ClaimedBound::Finite(2.0));
    }

    #[test]
    fn steinitz_small_cases() {
        assert_eq!(rearrange_steinitz(&pair()).unwrap().achieved_radius, 1.0);
        let zeros = Instance::from_xy(&[(0.0, 0.0); 5]).unwrap();
        let o = rearrange_steinitz(&zeros).unwrap();
        assert_eq!(o.achieved_radius, 0.0);
        assert_eq!(o.perm, Permutation::identity(5));
    }

    #[test]
    fn zero_vectors_are_emitted_last() {
        let inst = Instance::from_xy(&[(0.0, 0.0), (0.5, 0.0), (0.0, 0.0), (-0.5, 0.0)]).unwrap();
        for o in [
            rearrange_steinitz(&inst).unwrap(),
            rearrange_sector(&inst).unwrap(),
            rearrange_sqrt5(&inst).unwrap(),
        ] {
            assert_eq!(&o.perm.as_slice()[2..], &[0, 2], "{:?}", o.algorithm);
        }
    }

    #[test]
    fn sector_bound_values() {
        assert_eq!(sector_bound(PI).unwrap(), ClaimedBound::Finite(1.0));
        let b = sector_bound(2.0 * PI / 3.0).unwrap().value();
        assert!((b - 2.0 / 3f64.sqrt()).abs() <= 1e-15);
        assert_eq!(sector_bound(2.0 * PI).unwrap(), ClaimedBound::Unbounded);
        assert_eq!(sector_bound(0.0).unwrap(), ClaimedBound::Unbounded);
        assert!(sector_bound(-0.1).is_err());
        assert!(sector_bound(7.0).is_err());
        assert!(sector_bound(f64::NAN).is_err());
    }

    #[test]
    fn sector_examples() {
        let o = rearrange_sector(&pair()).unwrap();
        assert_eq!(o.claimed_bound, ClaimedBound::Finite(1.0));
        assert_eq!(o.achieved_radius, 1.0);

        let o = rearrange_sector(&cross4()).unwrap();
        assert!((o.claimed_bound.value() - SQRT_2).abs() < 1e-15);
        assert_eq!(o.achieved_radius, 1.0);
        assert_eq!(o.perm.as_slice(), &[0, 2, 1, 3]);

        let o = rearrange_sector(&Instance::new(vec![])).unwrap();
        assert_eq!(o.achieved_radius, 0.0);
        assert_eq!(o.claimed_bound, ClaimedBound::Unbounded);
    }

    #[test]
    fn weighted_examples() {
        let w = WeightedInstance::new(vec![0.5, 0.25, 0.25], vec![0.0, PI, PI]).unwrap();
        let o = rearrange_weighted(&w).unwrap();
        assert_eq!(o.perm.as_slice(), &[1, 0, 2]);
        let t = partial_sums_of(w.vectors(), &o.perm).unwrap();
        for (s, x) in t.sums[1..].iter().zip([-0.25, 0.25, 0.0]) {
            assert!((s.x() - x).abs() < 1e-15 && s.y().abs() < 1e-15);
        }
        assert!((o.achieved_radius - 0.25).abs() < 1e-15);
        assert_eq!(o.claimed_bound, ClaimedBound::Finite(1.0));

        let w = WeightedInstance::new(vec![0.5, 0.5], vec![0.0, PI]).unwrap();
        assert_eq!(rearrange_weighted(&w).unwrap().achieved_radius, 0.5);

        let w = WeightedInstance::new(vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(rearrange_weighted(&w), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn steinitz_fallback_on_starved_tolerance() {
        // Sum is (0.1, 0) within a loose tolerance: after taking the first
        // vector nothing obtuse remains.
        let inst = Instance::from_xy(&[(0.1, 0.0), (0.05, 0.0)])
            .unwrap()
            .with_sum_tolerance(1.0)
            .unwrap();
        let o = rearrange_steinitz(&inst).unwrap();
        assert_eq!(o.fallback_steps, vec![1]);
    }
}
