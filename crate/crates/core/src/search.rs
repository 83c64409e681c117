//! Adversarial hill climbing over instances: maximize the confinement radius
//! to obtain empirical lower bounds on the universal constant.
//!
//! Only [`Objective::OracleRadius`] runs produce lower bounds on the optimal
//! constant; an algorithm radius only measures how badly one construction
//! does.

use std::f64::consts::SQRT_2;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{rearrange, AlgorithmTag};
use crate::error::{Error, Result};
use crate::generators::{center, derive_seed, gen_centered, rng_from_seed, splitmix64};
use crate::geometry::{Instance, PlanarVector};
use crate::oracle::{optimal_radius, optimal_radius_exhaustive, BNB_MAX_N, EXHAUSTIVE_MAX_N};

/// Rounds of center-then-rescale before a perturbed instance is rejected.
pub const PROJECTION_ROUNDS: usize = 3;
/// Floor and ceiling of the adaptive step scale, relative to `step_scale`.
const SCALE_FLOOR: f64 = 1e-12;
const SCALE_CEIL: f64 = 1.0;
const GROW: f64 = 1.5;
const SHRINK: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Exact optimal radius via branch-and-bound (`n <= 12`).
    OracleRadius,
    /// Radius achieved by one unweighted construction.
    AlgorithmRadius(AlgorithmTag),
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::OracleRadius => f.write_str("oracle_radius"),
            Objective::AlgorithmRadius(t) => write!(f, "algorithm_radius:{t}"),
        }
    }
}

impl Objective {
    /// Radius of `instance` under this objective; `None` when it cannot be
    /// evaluated (construction refused the instance, oracle out of budget).
    pub fn evaluate(self, instance: &Instance) -> Option<f64> {
        match self {
            Objective::OracleRadius => optimal_radius(instance).map(|r| r.radius),
            Objective::AlgorithmRadius(tag) => rearrange(tag, instance).ok().map(|o| o.achieved_radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub n: usize,
    pub objective: Objective,
    pub restarts: usize,
    pub steps_per_restart: usize,
    pub step_scale: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::arg(format!("search needs n >= 2, got {}", self.n)));
        }
        match self.objective {
            Objective::OracleRadius if self.n > BNB_MAX_N => {
                return Err(Error::SizeLimit {
                    what: "oracle-radius search",
                    n: self.n,
                    max: BNB_MAX_N,
                })
            }
            Objective::AlgorithmRadius(AlgorithmTag::Weighted) => {
                return Err(Error::arg("the weighted construction cannot be a search objective"))
            }
            _ => {}
        }
        if self.restarts == 0 {
            return Err(Error::arg("restarts must be at least 1"));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return Err(Error::arg(format!("step_scale must be positive, got {}", self.step_scale)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub restart: usize,
    /// Step within the restart; 0 is the starting draw.
    pub iteration: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Which objective produced `best_radius`.
    pub objective_label: String,
    pub best_instance: Instance,
    pub best_radius: f64,
    pub best_restart: usize,
    pub accepted_steps: usize,
    pub infeasible_steps: usize,
    /// Incumbent radius at the start of each restart and after every accepted step.
    pub history: Vec<HistoryPoint>,
    /// Oracle run whose best radius exceeds √2.
    pub conjecture_candidate: bool,
    /// Exhaustive re-evaluation of a candidate, when `n` allows it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_radius: Option<f64>,
}

impl SearchReport {
    /// Runs the objective again on the stored best instance.
    pub fn reevaluate(&self) -> Option<f64> {
        self.config.objective.evaluate(&self.best_instance)
    }

    /// History as `restart,iteration,radius` CSV.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("restart,iteration,radius\n");
        for h in &self.history {
            out.push_str(&format!("{},{},{}\n", h.restart, h.iteration, h.radius));
        }
        out
    }
}

struct RestartOutcome {
    instance: Instance,
    radius: f64,
    accepted: usize,
    infeasible: usize,
    history: Vec<HistoryPoint>,
}

/// Center, rescale so the largest modulus is exactly the cap, and recheck;
/// `None` if still infeasible after [`PROJECTION_ROUNDS`]. Every objective is
/// scale-covariant, so pinning the scale loses nothing and keeps maximal
/// vectors on the cap.
fn project(mut vectors: Vec<PlanarVector>) -> Option<Instance> {
    for _ in 0..PROJECTION_ROUNDS {
        center(&mut vectors);
        let max = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !max.is_finite() || max == 0.0 {
            return None;
        }
        if max != 1.0 {
            for v in vectors.iter_mut() {
                *v = *v * (1.0 / max);
            }
        }
        let inst = Instance::new(vectors);
        if inst.validate().is_valid() {
            return Some(inst);
        }
        vectors = inst.vectors().to_vec();
    }
    None
}

fn run_restart(config: &SearchConfig, restart: usize) -> RestartOutcome {
    let restart_seed = derive_seed(config.seed, restart as u64);
    let mut current = gen_centered(config.n, restart_seed).expect("n >= 2 was checked");
    let mut radius = config.objective.evaluate(&current).unwrap_or(f64::NEG_INFINITY);
    let mut rng = rng_from_seed(splitmix64(restart_seed));
    let mut scale = config.step_scale;
    let mut history = vec![HistoryPoint {
        restart,
        iteration: 0,
        radius,
    }];
    let (mut accepted, mut infeasible) = (0, 0);

    for step in 1..=config.steps_per_restart {
        let k = rng.random_range(0..config.n);
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        let mut vectors = current.vectors().to_vec();
        vectors[k] += PlanarVector::raw(gx * scale, gy * scale);

        let candidate = project(vectors).and_then(|inst| {
            let r = config.objective.evaluate(&inst)?;
            Some((inst, r))
        });
        match candidate {
            Some((inst, r)) if r > radius => {
                current = inst;
                radius = r;
                accepted += 1;
                scale = (scale * GROW).min(config.step_scale * SCALE_CEIL);
                history.push(HistoryPoint {
                    restart,
                    iteration: step,
                    radius,
                });
            }
            Some(_) => scale = (scale * SHRINK).max(config.step_scale * SCALE_FLOOR),
            None => {
                infeasible += 1;
                scale = (scale * SHRINK).max(config.step_scale * SCALE_FLOOR);
            }
        }
    }
    RestartOutcome {
        instance: current,
        radius,
        accepted,
        infeasible,
        history,
    }
}

/// Hill climbing with random restarts; deterministic given `config.seed`.
///
/// Each step moves one vector by a Gaussian offset, re-projects onto the
/// constraints and keeps the move iff the objective strictly increased. The
/// offset scale starts at `step_scale`, grows by 1.5 after an accepted move
/// and shrinks by 0.9 after a rejected one, so a restart can settle onto a
/// ridge of the nonsmooth objective.
pub fn adversarial_search(config: &SearchConfig) -> Result<SearchReport> {
    config.check()?;
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(config, r))
        .collect();

    // Max radius, lowest restart index on ties.
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.radius > outcomes[best].radius {
            best = r;
        }
    }
    let best_radius = outcomes[best].radius;
    let conjecture_candidate = config.objective == Objective::OracleRadius && best_radius > SQRT_2;
    let exhaustive_radius = if conjecture_candidate && config.n <= EXHAUSTIVE_MAX_N {
        optimal_radius_exhaustive(&outcomes[best].instance)
            .ok()
            .map(|r| r.radius)
    } else {
        None
    };
    if conjecture_candidate {
        log::warn!(
            "oracle radius {best_radius} > sqrt(2) at n = {}: conjecture-refuting candidate",
            config.n
        );
    }

    Ok(SearchReport {
        config: config.clone(),
        objective_label: config.objective.to_string(),
        best_instance: outcomes[best].instance.clone(),
        best_radius,
        best_restart: best,
        accepted_steps: outcomes.iter().map(|o| o.accepted).sum(),
        infeasible_steps: outcomes.iter().map(|o| o.infeasible).sum(),
        history: outcomes.into_iter().flat_map(|o| o.history).collect(),
        conjecture_candidate,
        exhaustive_radius,
    })
}
