use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::records::RunRecord;
use crate::constructions::{sector_bound, AlgorithmTag, ClaimedBound};
use crate::generators::Generated;
use crate::geometry::{angular_span, partial_sums_of};

/// Slack in `bound_satisfied`: `achieved <= claimed + BOUND_SLACK`.
pub const BOUND_SLACK: f64 = 1e-9;
/// Largest accepted gap between a stored and a recomputed value.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-9;
/// Slack when checking that the oracle radius does not exceed a construction's.
const ORACLE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub runs: usize,
    pub skipped: usize,
    pub violations: usize,
    pub fallback_runs: usize,
    pub max_achieved_radius: Option<f64>,
    /// Largest `achieved / claimed` over finite claims.
    pub max_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub instance_id: String,
    pub algorithm_tag: AlgorithmTag,
    pub achieved_radius: f64,
    pub claimed_bound: ClaimedBound,
    /// Recomputed from the embedded instance and permutation.
    pub reverified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorNoteRow {
    pub alpha: String,
    pub formula_bound: f64,
    pub corollary_value: f64,
}

/// The sector formula `1/sin(α/2)` next to the corollary values usually
/// quoted with it, which the formula does not reproduce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorNote {
    pub rows: Vec<SectorNoteRow>,
    pub note: String,
}

impl SectorNote {
    pub fn new() -> Self {
        let row = |label: &str, alpha: f64, corollary: f64| SectorNoteRow {
            alpha: label.to_string(),
            formula_bound: sector_bound(alpha).expect("alpha in range").value(),
            corollary_value: corollary,
        };
        Self {
            rows: vec![row("2π/3", 2.0 * PI / 3.0, 3f64.sqrt()), row("π", PI, 2.0)],
            note: "the sector bound 1/sin(α/2) gives 2/√3 at α = 2π/3 and 1 at α = π; \
                   the corollary values √3 and 2 disagree with the formula. \
                   Claims and violation checks use the formula values."
                .to_string(),
        }
    }
}

impl Default for SectorNote {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub instance_id: String,
    pub algorithm_tag: AlgorithmTag,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Records whose radius and claim were recomputed from embedded data.
    pub recomputed: usize,
    pub mismatches: Vec<Mismatch>,
    /// Sorted, deduplicated ids of mismatching records.
    pub mismatched_ids: Vec<String>,
    pub passed: bool,
}

/// Aggregates of a record stream; derived from the records alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub records: usize,
    pub instances: usize,
    pub algorithms: BTreeMap<String, AlgorithmSummary>,
    pub violations: Vec<Violation>,
    /// Sorted, deduplicated ids with at least one violation.
    pub violating_ids: Vec<String>,
    pub embedded_records: usize,
    pub notes: Vec<String>,
    pub sector_note: SectorNote,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

pub fn summarize(records: &[RunRecord]) -> SummaryReport {
    let mut algorithms: BTreeMap<String, AlgorithmSummary> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut instances = std::collections::BTreeSet::new();
    let mut embedded = 0;
    for r in records {
        instances.insert(r.instance_id.as_str());
        let s = algorithms.entry(r.algorithm_tag.as_str().to_string()).or_default();
        s.runs += 1;
        if r.is_skipped() {
            s.skipped += 1;
            continue;
        }
        if r.perm.is_some() && r.instance.is_some() {
            embedded += 1;
        }
        if r.fallback_flag {
            s.fallback_runs += 1;
        }
        if let Some(a) = r.achieved_radius {
            s.max_achieved_radius = Some(s.max_achieved_radius.map_or(a, |m| m.max(a)));
        }
        if let Some(q) = r.ratio() {
            s.max_ratio = Some(s.max_ratio.map_or(q, |m| m.max(q)));
        }
        if r.is_violation() {
            s.violations += 1;
            violations.push(Violation {
                instance_id: r.instance_id.clone(),
                algorithm_tag: r.algorithm_tag,
                achieved_radius: r.achieved_radius.unwrap_or(f64::NAN),
                claimed_bound: r.claimed_bound.unwrap_or(ClaimedBound::Unbounded),
                reverified: false,
            });
        }
    }
    let mut violating_ids: Vec<String> = violations.iter().map(|v| v.instance_id.clone()).collect();
    violating_ids.sort();
    violating_ids.dedup();

    let run = records.iter().filter(|r| !r.is_skipped()).count();
    let mut notes = Vec::new();
    if embedded < run {
        notes.push(format!(
            "{} of {run} records carry no embedded instance/permutation; \
             verification of those is limited to internal consistency",
            run - embedded
        ));
    }
    SummaryReport {
        records: records.len(),
        instances: instances.len(),
        algorithms,
        violations,
        violating_ids,
        embedded_records: embedded,
        notes,
        sector_note: SectorNote::new(),
        verification: None,
    }
}

/// Summary plus consistency checks and, for embedded records, recomputation
/// of the radius and the claimed bound. Passes iff there are no violations
/// and no mismatches.
pub fn verify(records: &[RunRecord]) -> SummaryReport {
    let mut report = summarize(records);
    let mut v = Verification::default();
    let mut reverified = std::collections::HashSet::new();
    for r in records {
        let mut fail = |reason: String| {
            v.mismatches.push(Mismatch {
                instance_id: r.instance_id.clone(),
                algorithm_tag: r.algorithm_tag,
                reason,
            })
        };
        if r.is_skipped() {
            if r.achieved_radius.is_some() || r.perm.is_some() {
                fail("skipped record carries results".into());
            }
            continue;
        }
        let (Some(achieved), Some(claimed)) = (r.achieved_radius, r.claimed_bound) else {
            fail("missing achieved_radius or claimed_bound".into());
            continue;
        };
        if !achieved.is_finite() || achieved < 0.0 {
            fail(format!("achieved_radius {achieved} is not a radius"));
            continue;
        }
        if r.bound_satisfied != claimed.admits(achieved, BOUND_SLACK) {
            fail(format!(
                "bound_satisfied = {} but achieved {achieved} vs claimed {claimed}",
                r.bound_satisfied
            ));
        }
        if let Some(o) = r.oracle_radius {
            if o > achieved + ORACLE_SLACK {
                fail(format!("oracle_radius {o} exceeds achieved_radius {achieved}"));
            }
        }
        let (Some(perm), Some(inst)) = (&r.perm, &r.instance) else {
            continue;
        };
        v.recomputed += 1;
        let mut ok = true;
        let mut check = |ok_now: bool, reason: String| {
            if !ok_now {
                ok = false;
                fail(reason);
            }
        };
        if inst.len() != r.n {
            check(false, format!("n = {} but the embedded instance has {}", r.n, inst.len()));
            continue;
        }
        let vectors = match inst {
            Generated::Plain(i) => i.vectors(),
            Generated::Weighted(w) => w.vectors(),
        };
        match partial_sums_of(vectors, perm) {
            Ok(trace) => check(
                (trace.max_radius - achieved).abs() <= RECOMPUTE_TOLERANCE,
                format!("achieved_radius {achieved} but recomputed {}", trace.max_radius),
            ),
            Err(e) => check(false, format!("embedded permutation unusable: {e}")),
        }
        match expected_claim(r.algorithm_tag, inst) {
            Some(expected) => check(
                same_claim(expected, claimed),
                format!("claimed_bound {claimed} but the construction claims {expected}"),
            ),
            None => check(false, "algorithm does not apply to the embedded instance".into()),
        }
        if ok && r.is_violation() {
            reverified.insert((r.instance_id.as_str(), r.algorithm_tag));
        }
    }
    for viol in &mut report.violations {
        viol.reverified = reverified.contains(&(viol.instance_id.as_str(), viol.algorithm_tag));
    }
    let mut ids: Vec<String> = v.mismatches.iter().map(|m| m.instance_id.clone()).collect();
    ids.sort();
    ids.dedup();
    v.mismatched_ids = ids;
    v.passed = v.mismatches.is_empty() && report.violations.is_empty();
    report.verification = Some(v);
    report
}

fn expected_claim(tag: AlgorithmTag, inst: &Generated) -> Option<ClaimedBound> {
    match (tag, inst) {
        (AlgorithmTag::Weighted, Generated::Weighted(_)) => Some(ClaimedBound::Finite(1.0)),
        (AlgorithmTag::Weighted, _) | (_, Generated::Weighted(_)) => None,
        (AlgorithmTag::Sqrt5, Generated::Plain(i)) => Some(ClaimedBound::Finite(5f64.sqrt() * i.modulus_cap())),
        (AlgorithmTag::Steinitz2, Generated::Plain(i)) => Some(ClaimedBound::Finite(2.0 * i.modulus_cap())),
        (AlgorithmTag::Sector, Generated::Plain(i)) => match sector_bound(angular_span(i)).ok()? {
            ClaimedBound::Finite(b) => Some(ClaimedBound::Finite(b * i.modulus_cap())),
            ClaimedBound::Unbounded => Some(ClaimedBound::Unbounded),
        },
    }
}

fn same_claim(a: ClaimedBound, b: ClaimedBound) -> bool {
    match (a, b) {
        (ClaimedBound::Finite(x), ClaimedBound::Finite(y)) => (x - y).abs() <= RECOMPUTE_TOLERANCE,
        (ClaimedBound::Unbounded, ClaimedBound::Unbounded) => true,
        _ => false,
    }
}

impl SummaryReport {
    pub fn passed(&self) -> bool {
        match &self.verification {
            Some(v) => v.passed,
            None => self.violations.is_empty(),
        }
    }

    /// Human-readable digest for the terminal.
    pub fn text(&self) -> String {
        let mut out = format!("{} records over {} instances\n", self.records, self.instances);
        for (tag, s) in &self.algorithms {
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.12}"));
            out.push_str(&format!(
                "  {tag:<10} runs {:>6}  skipped {:>6}  violations {:>4}  fallback {:>4}  max radius {}  max ratio {}\n",
                s.runs,
                s.skipped,
                s.violations,
                s.fallback_runs,
                fmt(s.max_achieved_radius),
                fmt(s.max_ratio)
            ));
        }
        if !self.violating_ids.is_empty() {
            out.push_str(&format!("violating ids: {}\n", self.violating_ids.join(", ")));
        }
        out.push_str("sector bound 1/sin(α/2) vs corollary:\n");
        for row in &self.sector_note.rows {
            out.push_str(&format!(
                "  α = {:<5} formula {:.15}  corollary {:.15}\n",
                row.alpha, row.formula_bound, row.corollary_value
            ));
        }
        out.push_str(&format!("  note: {}\n", self.sector_note.note));
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        if let Some(v) = &self.verification {
            out.push_str(&format!("recomputed {} embedded records\n", v.recomputed));
            for m in &v.mismatches {
                out.push_str(&format!("mismatch {} {}: {}\n", m.instance_id, m.algorithm_tag, m.reason));
            }
            out.push_str(if v.passed { "verification passed\n" } else { "verification FAILED\n" });
        }
        out
    }
}
