use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constructions::{AlgorithmTag, ClaimedBound};
use crate::generators::Generated;
use crate::geometry::{Instance, Permutation, WeightedInstance};

/// One line of an instance file: an id, the generating seed if any, and
/// either `vectors`/`modulus_cap` or `weights`/`angles`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub instance: Generated,
}

impl InstanceRecord {
    pub fn new(id: impl Into<String>, seed: Option<u64>, instance: Generated) -> Self {
        Self {
            id: id.into(),
            seed,
            instance,
        }
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let Value::Object(map) = &value else {
            return Err("expected a JSON object".into());
        };
        let id = match map.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err("`id` must be a string".into()),
            None => return Err("missing `id`".into()),
        };
        let seed = match map.get("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or("`seed` must be an unsigned integer")?),
        };
        let instance = if map.contains_key("weights") {
            Generated::Weighted(WeightedInstance::deserialize(&value).map_err(|e| e.to_string())?)
        } else if map.contains_key("vectors") {
            Generated::Plain(Instance::deserialize(&value).map_err(|e| e.to_string())?)
        } else {
            return Err("expected `vectors` or `weights`".into());
        };
        Ok(Self { id, seed, instance })
    }
}

/// Outcome of one construction on one instance.
///
/// `claimed_bound` and `achieved_radius` are null on skipped records.
/// `perm` and `instance` are present only when the run embedded them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub n: usize,
    pub algorithm_tag: AlgorithmTag,
    pub claimed_bound: Option<ClaimedBound>,
    pub achieved_radius: Option<f64>,
    pub bound_satisfied: bool,
    pub oracle_radius: Option<f64>,
    pub fallback_flag: bool,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Generated>,
}

impl RunRecord {
    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }

    pub fn is_violation(&self) -> bool {
        !self.is_skipped() && !self.bound_satisfied
    }

    /// `achieved / claimed` for finite claims.
    pub fn ratio(&self) -> Option<f64> {
        match (self.achieved_radius, self.claimed_bound) {
            (Some(r), Some(ClaimedBound::Finite(b))) if b > 0.0 => Some(r / b),
            _ => None,
        }
    }

    pub(crate) fn sort_key(&self) -> (&str, &'static str) {
        (&self.instance_id, self.algorithm_tag.as_str())
    }
}

pub const CSV_COLUMNS: [&str; 11] = [
    "instance_id",
    "n",
    "algorithm_tag",
    "claimed_bound",
    "achieved_radius",
    "bound_satisfied",
    "oracle_radius",
    "fallback_flag",
    "seed",
    "runtime_ms",
    "skipped",
];

/// The records' scalar fields as CSV; empty cells for absent values.
pub fn records_csv(records: &[RunRecord]) -> String {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.n.to_string(),
            r.algorithm_tag.to_string(),
            opt(r.claimed_bound),
            opt(r.achieved_radius),
            r.bound_satisfied.to_string(),
            opt(r.oracle_radius),
            r.fallback_flag.to_string(),
            opt(r.seed),
            opt(r.runtime_ms),
            r.skipped.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
