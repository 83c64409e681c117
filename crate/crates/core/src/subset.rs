//! Subsets of an instance with maximal subset-sum modulus.
//!
//! A maximizing subset `P` with sum `S_P` contains exactly the vectors with a
//! strictly positive component along `S_P`: adding a vector with a
//! nonnegative component, or dropping one with a nonpositive component,
//! would not decrease `|S_P|`. So `P` is the open half-plane set of some
//! direction, and those sets only change when the direction crosses the
//! normal of an instance vector. The sweep visits each such normal and takes
//! the sets just before and just after it.

use crate::error::{Error, Result};
use crate::geometry::{Instance, PlanarVector};

pub const BRUTE_FORCE_MAX_N: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetResult {
    /// Member indices, ascending.
    pub members: Vec<usize>,
    pub subset_sum: PlanarVector,
    pub magnitude: f64,
}

impl SubsetResult {
    fn empty() -> Self {
        Self {
            members: Vec::new(),
            subset_sum: PlanarVector::ZERO,
            magnitude: 0.0,
        }
    }

    fn from_members(vectors: &[PlanarVector], members: Vec<usize>) -> Self {
        let mut s = PlanarVector::ZERO;
        for &i in &members {
            s += vectors[i];
        }
        Self {
            members,
            subset_sum: s,
            magnitude: s.norm(),
        }
    }

    /// Best by magnitude, then lexicographically smaller member list.
    fn beats(&self, other: &SubsetResult) -> bool {
        self.magnitude > other.magnitude
            || (self.magnitude == other.magnitude && self.members < other.members)
    }

    /// Complement of `members` among the nonzero vectors.
    pub fn complement(&self, vectors: &[PlanarVector]) -> Vec<usize> {
        let mut in_p = vec![false; vectors.len()];
        for &i in &self.members {
            in_p[i] = true;
        }
        (0..vectors.len())
            .filter(|&j| !in_p[j] && !vectors[j].is_zero())
            .collect()
    }
}

/// Exact maximizer by half-plane sweep, `O(n²)`.
pub fn max_subset_sweep(instance: &Instance) -> SubsetResult {
    sweep(instance.vectors())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Inside,
    Outside,
    Along,
    Against,
}

pub(crate) fn sweep(vectors: &[PlanarVector]) -> SubsetResult {
    let mut best = SubsetResult::empty();
    let nonzero: Vec<usize> = (0..vectors.len()).filter(|&i| !vectors[i].is_zero()).collect();

    for &i in &nonzero {
        let z = vectors[i];
        // The two normals of z are +/- (-y, x); the component of w along
        // (-y, x) is cross(z, w).
        for side in [1.0f64, -1.0] {
            let class: Vec<Side> = nonzero
                .iter()
                .map(|&j| {
                    let c = side * z.cross(vectors[j]);
                    if c > 0.0 {
                        Side::Inside
                    } else if c < 0.0 {
                        Side::Outside
                    } else if z.dot(vectors[j]) > 0.0 {
                        Side::Along
                    } else {
                        Side::Against
                    }
                })
                .collect();
            for boundary in [Side::Along, Side::Against] {
                let members = nonzero
                    .iter()
                    .zip(&class)
                    .filter(|(_, &c)| c == Side::Inside || c == boundary)
                    .map(|(&j, _)| j)
                    .collect();
                let candidate = SubsetResult::from_members(vectors, members);
                if candidate.beats(&best) {
                    best = candidate;
                }
            }
        }
    }
    best
}

/// Exact maximum over all `2^n` subsets, ties to the lexicographically smallest set.
pub fn max_subset_bruteforce(instance: &Instance) -> Result<SubsetResult> {
    let vectors = instance.vectors();
    let n = vectors.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit {
            what: "subset brute force",
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut best = SubsetResult::empty();
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        members.clear();
        members.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let mut s = PlanarVector::ZERO;
        for &i in &members {
            s += vectors[i];
        }
        let magnitude = s.norm();
        if magnitude > best.magnitude
            || (magnitude == best.magnitude && magnitude > 0.0 && members < best.members)
        {
            best = SubsetResult {
                members: members.clone(),
                subset_sum: s,
                magnitude,
            };
        }
    }
    Ok(best)
}
