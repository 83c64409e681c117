use std::time::Instant;

use rayon::prelude::*;
use serde_json::Value;

use super::records::{InstanceRecord, RunRecord};
use super::{HarnessError, HarnessResult};
use crate::constructions::{rearrange, rearrange_weighted, AlgorithmTag, RearrangeOutcome};
use crate::generators::{derive_seed, GenSpec, Generated};
use crate::oracle::{optimal_radius, BNB_MAX_N};
use crate::Instance;

use super::report::BOUND_SLACK;

/// A generation request file holds one spec object or an array of them.
pub fn parse_gen_specs(text: &str) -> HarnessResult<Vec<GenSpec>> {
    let value: Value = serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("spec: {e}")))?;
    let items = match value {
        Value::Array(items) => items,
        single => vec![single],
    };
    items
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let spec: GenSpec =
                serde_json::from_value(v).map_err(|e| HarnessError::Config(format!("spec #{k}: {e}")))?;
            spec.check()
                .map_err(|e| HarnessError::Config(format!("spec #{k}: {e}")))?;
            Ok(spec)
        })
        .collect()
}

/// Expands specs into instance records.
///
/// Items are numbered consecutively across all specs; item `index` of a spec
/// with seed `s` is drawn with `derive_seed(s, index)` and gets id
/// `gen-<s>-<index>`. `seed` replaces every spec's seed when given.
/// Nothing is returned unless every item generates.
pub fn generate(specs: &[GenSpec], seed: Option<u64>) -> HarnessResult<Vec<InstanceRecord>> {
    let mut jobs = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let mut spec = spec.clone();
        if let Some(s) = seed {
            spec.seed = s;
        }
        spec.check()
            .map_err(|e| HarnessError::Config(format!("spec #{k}: {e}")))?;
        for _ in 0..spec.count {
            jobs.push((k, spec.clone()));
        }
    }
    let records: Vec<InstanceRecord> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(index, (k, spec))| {
            let item_seed = derive_seed(spec.seed, index as u64);
            let instance = spec
                .generate_with_seed(item_seed)
                .map_err(|e| HarnessError::Config(format!("spec #{k}, item {index}: {e}")))?;
            Ok(InstanceRecord::new(format!("gen-{}-{index}", spec.seed), Some(item_seed), instance))
        })
        .collect::<HarnessResult<_>>()?;

    let mut ids = std::collections::HashSet::new();
    if let Some(dup) = records.iter().find(|r| !ids.insert(&r.id)) {
        return Err(HarnessError::Config(format!("duplicate instance id {:?}", dup.id)));
    }
    Ok(records)
}

/// Comma-separated algorithm tags, or `all`; duplicates collapse.
pub fn parse_algorithms(list: &str) -> HarnessResult<Vec<AlgorithmTag>> {
    let mut tags = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            tags.extend(AlgorithmTag::ALL);
        } else {
            tags.push(part.parse().map_err(|e: crate::Error| HarnessError::Config(e.to_string()))?);
        }
    }
    if tags.is_empty() {
        return Err(HarnessError::Config("no algorithms selected".into()));
    }
    tags.sort_by_key(|t| t.as_str());
    tags.dedup();
    Ok(tags)
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub algorithms: Vec<AlgorithmTag>,
    pub oracle: bool,
    pub embed_perms: bool,
    /// Worker threads; 0 lets rayon choose.
    pub workers: usize,
    /// Record wall-clock time per run. Off by default so output stays reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            algorithms: AlgorithmTag::ALL.to_vec(),
            oracle: false,
            embed_perms: false,
            workers: 0,
            timing: false,
        }
    }
}

/// One record per (instance, algorithm), sorted by `(instance_id, algorithm_tag)`.
pub fn run_instances(instances: &[InstanceRecord], opts: &RunOptions) -> HarnessResult<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    let mut records: Vec<RunRecord> = pool.install(|| {
        instances
            .par_iter()
            .flat_map_iter(|rec| run_one(rec, opts))
            .collect()
    });
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}

fn run_one(rec: &InstanceRecord, opts: &RunOptions) -> Vec<RunRecord> {
    let n = rec.instance.len();
    let oracle_radius = if opts.oracle {
        oracle_for(rec)
    } else {
        None
    };
    opts.algorithms
        .iter()
        .map(|&tag| {
            let blank = RunRecord {
                instance_id: rec.id.clone(),
                n,
                algorithm_tag: tag,
                claimed_bound: None,
                achieved_radius: None,
                bound_satisfied: true,
                oracle_radius: None,
                fallback_flag: false,
                seed: rec.seed,
                runtime_ms: None,
                skipped: None,
                perm: None,
                instance: None,
            };
            let start = Instant::now();
            let outcome = match (&rec.instance, tag.is_weighted()) {
                (Generated::Plain(inst), false) => rearrange(tag, inst),
                (Generated::Weighted(w), true) => rearrange_weighted(w),
                (Generated::Plain(_), true) => {
                    return skip(blank, "weighted construction needs a weighted instance");
                }
                (Generated::Weighted(_), false) => {
                    return skip(blank, "weighted instances are routed to the weighted construction only");
                }
            };
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            match outcome {
                Ok(out) => finish(blank, out, oracle_radius, opts, rec, elapsed),
                Err(e) => {
                    log::warn!("{}: {tag} rejected the instance: {e}", rec.id);
                    skip(blank, &format!("rejected: {e}"))
                }
            }
        })
        .collect()
}

fn skip(mut r: RunRecord, reason: &str) -> RunRecord {
    r.skipped = Some(reason.to_string());
    r
}

fn finish(
    mut r: RunRecord,
    out: RearrangeOutcome,
    oracle_radius: Option<f64>,
    opts: &RunOptions,
    rec: &InstanceRecord,
    elapsed_ms: f64,
) -> RunRecord {
    r.bound_satisfied = out.bound_satisfied(BOUND_SLACK);
    r.fallback_flag = out.fallback_flag();
    r.claimed_bound = Some(out.claimed_bound);
    r.achieved_radius = Some(out.achieved_radius);
    r.oracle_radius = oracle_radius;
    if opts.timing {
        r.runtime_ms = Some(elapsed_ms);
    }
    if opts.embed_perms {
        r.perm = Some(out.perm);
        r.instance = Some(rec.instance.clone());
    }
    r
}

fn oracle_for(rec: &InstanceRecord) -> Option<f64> {
    let n = rec.instance.len();
    if n > BNB_MAX_N {
        log::warn!("{}: n = {n} exceeds the oracle limit {BNB_MAX_N}; oracle_radius omitted", rec.id);
        return None;
    }
    let owned;
    let inst: &Instance = match &rec.instance {
        Generated::Plain(i) => i,
        Generated::Weighted(w) => {
            owned = w.to_instance();
            &owned
        }
    };
    let result = optimal_radius(inst);
    if result.is_none() {
        log::warn!("{}: oracle node budget exhausted; oracle_radius omitted", rec.id);
    }
    result.map(|r| r.radius)
}
