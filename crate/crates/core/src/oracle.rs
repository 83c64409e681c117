//! Exact optimal confinement radius: the minimum over all orders of the
//! largest partial-sum modulus.
//!
//! Both searches accumulate sums left to right exactly as
//! [`partial_sums`](crate::geometry::partial_sums) does, so the radius they
//! report is the floating-point minimum over all permutations and the two
//! methods agree bit for bit whenever branch-and-bound completes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{radius_of, Instance, Permutation, PlanarVector};

pub const EXHAUSTIVE_MAX_N: usize = 9;
/// Largest size the harness and search hand to branch-and-bound.
pub const BNB_MAX_N: usize = 12;
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Exhaustive,
    BranchAndBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub radius: f64,
    pub best_perm: Permutation,
    pub nodes_explored: u64,
    pub method: OracleMethod,
    /// False when branch-and-bound ran out of budget; `radius` is then only
    /// an upper bound.
    pub complete: bool,
}

/// Minimum over all `n!` orders; ties go to the lexicographically smallest order.
pub fn optimal_radius_exhaustive(instance: &Instance) -> Result<OracleResult> {
    let vectors = instance.vectors();
    let n = vectors.len();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::SizeLimit {
            what: "exhaustive oracle",
            n,
            max: EXHAUSTIVE_MAX_N,
        });
    }
    let mut search = Exhaustive {
        vectors,
        used: vec![false; n],
        order: Vec::with_capacity(n),
        best: f64::INFINITY,
        best_order: Vec::new(),
        nodes: 0,
    };
    search.descend(PlanarVector::ZERO, 0.0);
    let best_perm = Permutation::from_order_unchecked(search.best_order);
    Ok(OracleResult {
        radius: radius_of(vectors, best_perm.as_slice()),
        best_perm,
        nodes_explored: search.nodes,
        method: OracleMethod::Exhaustive,
        complete: true,
    })
}

struct Exhaustive<'a> {
    vectors: &'a [PlanarVector],
    used: Vec<bool>,
    order: Vec<usize>,
    best: f64,
    best_order: Vec<usize>,
    nodes: u64,
}

impl Exhaustive<'_> {
    // Children in ascending index order, strict improvement only: the first
    // optimal leaf reached is the lexicographically smallest.
    fn descend(&mut self, s: PlanarVector, running_max: f64) {
        if self.order.len() == self.vectors.len() {
            if running_max < self.best {
                self.best = running_max;
                self.best_order.clone_from(&self.order);
            }
            return;
        }
        for i in 0..self.vectors.len() {
            if self.used[i] {
                continue;
            }
            self.nodes += 1;
            let next = s + self.vectors[i];
            self.used[i] = true;
            self.order.push(i);
            self.descend(next, running_max.max(next.norm()));
            self.order.pop();
            self.used[i] = false;
        }
    }
}

/// Depth-first branch-and-bound over prefixes.
///
/// Children are tried in ascending `|S_p + v|`; a child is cut as soon as its
/// running max reaches the incumbent, which also cuts every later sibling.
/// Bitwise-identical remaining vectors are expanded once.
pub fn optimal_radius_bnb(instance: &Instance, limit: u64) -> Result<OracleResult> {
    if limit == 0 {
        return Err(Error::arg("node budget must be at least 1"));
    }
    let vectors = instance.vectors();
    let n = vectors.len();
    let class: Vec<usize> = (0..n)
        .map(|i| {
            (0..i)
                .find(|&j| same_bits(vectors[i], vectors[j]))
                .unwrap_or(i)
        })
        .collect();
    let mut search = Bnb {
        vectors,
        class,
        used: vec![false; n],
        order: Vec::with_capacity(n),
        best: f64::INFINITY,
        best_order: None,
        nodes: 0,
        limit,
        aborted: false,
    };
    search.descend(PlanarVector::ZERO, 0.0);

    let complete = !search.aborted;
    let best_order = search.best_order.unwrap_or_else(|| (0..n).collect());
    let best_perm = Permutation::from_order_unchecked(best_order);
    Ok(OracleResult {
        radius: radius_of(vectors, best_perm.as_slice()),
        best_perm,
        nodes_explored: search.nodes,
        method: OracleMethod::BranchAndBound,
        complete,
    })
}

fn same_bits(a: PlanarVector, b: PlanarVector) -> bool {
    a.x().to_bits() == b.x().to_bits() && a.y().to_bits() == b.y().to_bits()
}

struct Bnb<'a> {
    vectors: &'a [PlanarVector],
    /// Lowest index holding the same bits.
    class: Vec<usize>,
    used: Vec<bool>,
    order: Vec<usize>,
    best: f64,
    best_order: Option<Vec<usize>>,
    nodes: u64,
    limit: u64,
    aborted: bool,
}

impl Bnb<'_> {
    fn descend(&mut self, s: PlanarVector, running_max: f64) {
        let n = self.vectors.len();
        if self.order.len() == n {
            if running_max < self.best {
                self.best = running_max;
                self.best_order = Some(self.order.clone());
            }
            return;
        }

        let mut class_taken = vec![false; n];
        let mut children: Vec<(f64, usize)> = Vec::with_capacity(n - self.order.len());
        for i in 0..n {
            if self.used[i] || std::mem::replace(&mut class_taken[self.class[i]], true) {
                continue;
            }
            children.push(((s + self.vectors[i]).norm(), i));
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        for (r, i) in children {
            let child_max = running_max.max(r);
            if child_max >= self.best {
                break;
            }
            if self.nodes >= self.limit {
                self.aborted = true;
                return;
            }
            self.nodes += 1;
            self.used[i] = true;
            self.order.push(i);
            self.descend(s + self.vectors[i], child_max);
            self.order.pop();
            self.used[i] = false;
            if self.aborted {
                return;
            }
        }
    }
}

/// Exact radius for `n <= BNB_MAX_N` within the default budget, else `None`.
pub fn optimal_radius(instance: &Instance) -> Option<OracleResult> {
    if instance.len() > BNB_MAX_N {
        return None;
    }
    optimal_radius_bnb(instance, DEFAULT_NODE_BUDGET)
        .ok()
        .filter(|r| r.complete)
}
