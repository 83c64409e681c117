//! Instance matrices shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use confine::generators::{derive_seed, gen_antipodal, gen_centered, gen_closure, gen_sector, rng_from_seed};
use confine::Instance;
use rand::Rng;

/// Instance `index` of the mixed matrix: antipodal, closure, centered or
/// sector (α in [1.2π, 2π]) with `n` drawn from `n_range` (at least 2 except
/// for antipodal pairs).
pub fn mixed_instance(seed: u64, index: u64, n_range: std::ops::RangeInclusive<usize>) -> Instance {
    let s = derive_seed(seed, index);
    let mut rng = rng_from_seed(s);
    let n = rng.random_range(n_range);
    let kind = index % 4;
    if kind == 0 {
        return gen_antipodal(n.div_ceil(2), s);
    }
    let n = n.max(2);
    match kind {
        1 => gen_closure(n, s, 100).unwrap_or_else(|_| gen_centered(n, s).unwrap()),
        2 => gen_centered(n, s).unwrap(),
        _ => {
            let alpha = rng.random_range(1.2 * PI..=2.0 * PI);
            gen_sector(n, alpha, s).unwrap()
        }
    }
}

pub fn cross() -> Instance {
    Instance::from_xy(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]).unwrap()
}
