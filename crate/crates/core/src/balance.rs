//! Greedy ordering of bounded reals with small prefix sums.
//!
//! The running sum is steered back toward zero by always taking a remaining
//! value of the opposite sign, largest magnitude first. When the total of the
//! values is itself within the magnitude cap the prefix sums never leave
//! `[-cap, cap]`; without that hypothesis no order can help (think `[1, 1, 1]`),
//! so the achieved bound is reported rather than promised.

use crate::error::{Error, Result};
use crate::geometry::{Permutation, MODULUS_SLACK};

/// A running sum within this distance of zero counts as zero.
pub const ZERO_SUM_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceResult {
    pub perm: Permutation,
    /// Largest `|prefix sum|` over the reordered values.
    pub prefix_bound_achieved: f64,
}

/// Remaining indices of one sign class, largest magnitude first, lowest index on ties.
struct SignClass {
    order: Vec<usize>,
    next: usize,
}

impl SignClass {
    fn new(values: &[f64], keep: impl Fn(f64) -> bool) -> Self {
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| keep(values[i])).collect();
        order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
        Self { order, next: 0 }
    }

    fn peek(&self) -> Option<usize> {
        self.order.get(self.next).copied()
    }

    fn pop(&mut self) -> Option<usize> {
        let i = self.peek()?;
        self.next += 1;
        Some(i)
    }
}

pub fn balance_signed(values: &[f64], magnitude_cap: f64) -> Result<BalanceResult> {
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.abs() <= magnitude_cap + MODULUS_SLACK))
    {
        return Err(Error::arg(format!(
            "value {i} = {v} exceeds magnitude cap {magnitude_cap}"
        )));
    }

    let mut pos = SignClass::new(values, |v| v > 0.0);
    let mut neg = SignClass::new(values, |v| v < 0.0);
    let mut zero = SignClass::new(values, |v| v == 0.0);

    let mut order = Vec::with_capacity(values.len());
    let mut sum = 0.0f64;
    let mut bound = 0.0f64;
    while order.len() < values.len() {
        let opposite = if sum > ZERO_SUM_SLACK {
            neg.pop()
        } else if sum < -ZERO_SUM_SLACK {
            pos.pop()
        } else {
            None
        };
        let i = match opposite {
            Some(i) => i,
            None => largest_remaining(values, [&mut pos, &mut neg, &mut zero]),
        };
        sum += values[i];
        bound = bound.max(sum.abs());
        order.push(i);
    }

    Ok(BalanceResult {
        perm: Permutation::from_order_unchecked(order),
        prefix_bound_achieved: bound,
    })
}

fn largest_remaining(values: &[f64], classes: [&mut SignClass; 3]) -> usize {
    let mut best: Option<&mut SignClass> = None;
    for class in classes {
        let Some(i) = class.peek() else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                let j = b.peek().unwrap();
                values[i].abs() > values[j].abs() || (values[i].abs() == values[j].abs() && i < j)
            }
        };
        if better {
            best = Some(class);
        }
    }
    best.and_then(SignClass::pop)
        .expect("called with at least one remaining value")
}
