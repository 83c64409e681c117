//! Planar vectors, instances, permutations and partial-sum evaluation.
//!
//! A planar vector stands for the complex number `x + iy`. All operations in
//! this module are pure; accumulation always runs left to right in
//! permutation order so that radii are bit-reproducible.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the modulus cap.
pub const MODULUS_SLACK: f64 = 1e-12;
/// Default zero-sum tolerance per element.
pub const DEFAULT_SUM_TOLERANCE: f64 = 1e-9;
/// Slack allowed on the weight total of a weighted instance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PlanarVector {
    x: f64,
    y: f64,
}

impl PlanarVector {
    pub const ZERO: PlanarVector = PlanarVector { x: 0.0, y: 0.0 };

    /// Builds a vector, rejecting NaN and infinite components.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::arg(format!("non-finite vector component ({x}, {y})")))
        }
    }

    // Arithmetic on finite values; overflow is caught later by `validate`.
    pub(crate) const fn raw(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(modulus: f64, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(modulus * c, modulus * s)
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.y
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Euclidean modulus. Every radius in the crate goes through this.
    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Argument in `(-π, π]`.
    #[inline]
    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Multiplication by the unit complex number `cos + i sin`.
    #[inline]
    pub fn rotated_by(self, cos: f64, sin: f64) -> Self {
        Self::raw(self.x * cos - self.y * sin, self.x * sin + self.y * cos)
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        self.rotated_by(c, s)
    }
}

impl Add for PlanarVector {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::raw(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for PlanarVector {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for PlanarVector {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::raw(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for PlanarVector {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::raw(-self.x, -self.y)
    }
}

impl Mul<f64> for PlanarVector {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::raw(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for PlanarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Serialize for PlanarVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PlanarVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(deserializer)?;
        PlanarVector::new(x, y).map_err(serde::de::Error::custom)
    }
}

/// Left-to-right sum of a slice of vectors.
pub fn vector_sum(vectors: &[PlanarVector]) -> PlanarVector {
    let mut s = PlanarVector::ZERO;
    for &v in vectors {
        s += v;
    }
    s
}

/// An ordered family of planar vectors together with its validation metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    vectors: Vec<PlanarVector>,
    modulus_cap: f64,
    sum_tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    vectors: Vec<PlanarVector>,
    #[serde(default = "default_cap")]
    modulus_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sum_tolerance: Option<f64>,
}

fn default_cap() -> f64 {
    1.0
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;
    fn try_from(r: InstanceRepr) -> Result<Self> {
        let mut inst = Instance::new(r.vectors).with_modulus_cap(r.modulus_cap)?;
        if let Some(tol) = r.sum_tolerance {
            inst = inst.with_sum_tolerance(tol)?;
        }
        Ok(inst)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(i: Instance) -> Self {
        let sum_tolerance = (i.sum_tolerance != DEFAULT_SUM_TOLERANCE).then_some(i.sum_tolerance);
        InstanceRepr {
            vectors: i.vectors,
            modulus_cap: i.modulus_cap,
            sum_tolerance,
        }
    }
}

impl Instance {
    /// Instance with cap 1 and the default per-element sum tolerance.
    pub fn new(vectors: Vec<PlanarVector>) -> Self {
        Self {
            vectors,
            modulus_cap: 1.0,
            sum_tolerance: DEFAULT_SUM_TOLERANCE,
        }
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        let vectors = points
            .iter()
            .map(|&(x, y)| PlanarVector::new(x, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(vectors))
    }

    pub fn with_modulus_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::arg(format!("modulus cap must be positive and finite, got {cap}")));
        }
        self.modulus_cap = cap;
        Ok(self)
    }

    pub fn with_sum_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::arg(format!("sum tolerance must be nonnegative and finite, got {tol}")));
        }
        self.sum_tolerance = tol;
        Ok(self)
    }

    pub fn vectors(&self) -> &[PlanarVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn modulus_cap(&self) -> f64 {
        self.modulus_cap
    }

    pub fn sum_tolerance(&self) -> f64 {
        self.sum_tolerance
    }

    /// Absolute bound on `|Σ z|` implied by the per-element tolerance.
    pub fn allowed_sum_modulus(&self) -> f64 {
        self.sum_tolerance * self.len().max(1) as f64
    }

    pub fn sum(&self) -> PlanarVector {
        vector_sum(&self.vectors)
    }

    /// Same metadata, different vectors.
    pub(crate) fn with_vectors(&self, vectors: Vec<PlanarVector>) -> Self {
        Self {
            vectors,
            modulus_cap: self.modulus_cap,
            sum_tolerance: self.sum_tolerance,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// Nonnegative weights on directions: `z_i = a_i e^{iθ_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightedRepr", into = "WeightedRepr")]
pub struct WeightedInstance {
    weights: Vec<f64>,
    angles: Vec<f64>,
    vectors: Vec<PlanarVector>,
    sum_tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct WeightedRepr {
    weights: Vec<f64>,
    angles: Vec<f64>,
}

impl TryFrom<WeightedRepr> for WeightedInstance {
    type Error = Error;
    fn try_from(r: WeightedRepr) -> Result<Self> {
        WeightedInstance::new(r.weights, r.angles)
    }
}

impl From<WeightedInstance> for WeightedRepr {
    fn from(w: WeightedInstance) -> Self {
        WeightedRepr {
            weights: w.weights,
            angles: w.angles,
        }
    }
}

impl WeightedInstance {
    pub fn new(weights: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if weights.len() != angles.len() {
            return Err(Error::arg(format!(
                "{} weights but {} angles",
                weights.len(),
                angles.len()
            )));
        }
        let vectors = weights
            .iter()
            .zip(&angles)
            .map(|(&a, &t)| PlanarVector::from_polar(a, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            angles,
            vectors,
            sum_tolerance: DEFAULT_SUM_TOLERANCE,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// The derived vectors `a_i e^{iθ_i}`.
    pub fn vectors(&self) -> &[PlanarVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The derived vectors as a plain instance with cap 1.
    pub fn to_instance(&self) -> Instance {
        Instance {
            vectors: self.vectors.clone(),
            modulus_cap: 1.0,
            sum_tolerance: self.sum_tolerance,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for (index, &a) in self.weights.iter().enumerate() {
            if !a.is_finite() {
                issues.push(ValidationIssue::NonFinite { index });
            } else if a < 0.0 {
                issues.push(ValidationIssue::NegativeWeight { index, weight: a });
            }
        }
        for (index, t) in self.angles.iter().enumerate() {
            if !t.is_finite() {
                issues.push(ValidationIssue::NonFinite { index });
            }
        }
        let total: f64 = self.weights.iter().sum();
        if !((total - 1.0).abs() <= WEIGHT_SUM_TOLERANCE) {
            issues.push(ValidationIssue::WeightTotal { total });
        }
        let sum_modulus = vector_sum(&self.vectors).norm();
        let allowed = self.sum_tolerance * self.len().max(1) as f64;
        if !(sum_modulus <= allowed) {
            issues.push(ValidationIssue::SumTolerance { sum_modulus, allowed });
        }
        ValidationReport { issues }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ValidationIssue {
    NonFinite { index: usize },
    ModulusExceeded { index: usize, modulus: f64, cap: f64 },
    SumTolerance { sum_modulus: f64, allowed: f64 },
    NegativeWeight { index: usize, weight: f64 },
    WeightTotal { total: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NonFinite { index } => write!(f, "entry {index} is not finite"),
            ValidationIssue::ModulusExceeded { index, modulus, cap } => {
                write!(f, "vector {index} has modulus {modulus} > cap {cap}")
            }
            ValidationIssue::SumTolerance { sum_modulus, allowed } => {
                write!(f, "|sum| = {sum_modulus} exceeds tolerance {allowed}")
            }
            ValidationIssue::NegativeWeight { index, weight } => {
                write!(f, "weight {index} is negative ({weight})")
            }
            ValidationIssue::WeightTotal { total } => write!(f, "weights sum to {total}, not 1"),
        }
    }
}

/// Every violated invariant of an instance; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    /// Indices flagged for exceeding the modulus cap.
    pub fn modulus_violations(&self) -> Vec<usize> {
        self.issues
            .iter()
            .filter_map(|i| match i {
                ValidationIssue::ModulusExceeded { index, .. } => Some(*index),
                _ => None,
            })
            .collect()
    }

    pub fn has_sum_violation(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::SumTolerance { .. }))
    }

    /// Converts a non-empty report into an argument error.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let msg = self
            .issues
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::arg(format!("invalid instance: {msg}")))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Reports every violated instance invariant. Never fails.
pub fn validate(instance: &Instance) -> ValidationReport {
    let mut issues = Vec::new();
    let cap = instance.modulus_cap;
    for (index, v) in instance.vectors.iter().enumerate() {
        if !v.is_finite() {
            issues.push(ValidationIssue::NonFinite { index });
            continue;
        }
        let modulus = v.norm();
        if modulus > cap + MODULUS_SLACK {
            issues.push(ValidationIssue::ModulusExceeded { index, modulus, cap });
        }
    }
    let sum_modulus = instance.sum().norm();
    let allowed = instance.allowed_sum_modulus();
    if !(sum_modulus <= allowed) {
        issues.push(ValidationIssue::SumTolerance { sum_modulus, allowed });
    }
    ValidationReport { issues }
}

/// A bijection on `{0, …, n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::arg(format!("{order:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(order.clone()).is_ok());
        Self(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// Running sums `S_0 = 0, S_1, …, S_n` under a permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSumTrace {
    pub sums: Vec<PlanarVector>,
    pub max_radius: f64,
}

impl PartialSumTrace {
    pub fn final_sum(&self) -> PlanarVector {
        *self.sums.last().expect("trace always holds S_0")
    }
}

pub fn partial_sums(instance: &Instance, perm: &Permutation) -> Result<PartialSumTrace> {
    partial_sums_of(instance.vectors(), perm)
}

pub fn partial_sums_of(vectors: &[PlanarVector], perm: &Permutation) -> Result<PartialSumTrace> {
    if perm.len() != vectors.len() {
        return Err(Error::arg(format!(
            "permutation of length {} for {} vectors",
            perm.len(),
            vectors.len()
        )));
    }
    let mut sums = Vec::with_capacity(vectors.len() + 1);
    let mut s = PlanarVector::ZERO;
    let mut max_radius = 0.0f64;
    sums.push(s);
    for &i in perm.as_slice() {
        s += vectors[i];
        max_radius = max_radius.max(s.norm());
        sums.push(s);
    }
    Ok(PartialSumTrace { sums, max_radius })
}

/// Confinement radius of `order` without materialising the trace.
///
/// Performs the same accumulation as [`partial_sums_of`], so the result is
/// bit-identical to its `max_radius`.
pub(crate) fn radius_of(vectors: &[PlanarVector], order: &[usize]) -> f64 {
    let mut s = PlanarVector::ZERO;
    let mut max_radius = 0.0f64;
    for &i in order {
        s += vectors[i];
        max_radius = max_radius.max(s.norm());
    }
    max_radius
}

/// Multiplies every vector by `e^{i·angle}`.
pub fn rotate(instance: &Instance, angle: f64) -> Result<Instance> {
    if !angle.is_finite() {
        return Err(Error::arg(format!("rotation angle must be finite, got {angle}")));
    }
    if angle == 0.0 {
        return Ok(instance.clone());
    }
    let (s, c) = angle.sin_cos();
    let vectors = instance.vectors.iter().map(|v| v.rotated_by(c, s)).collect();
    Ok(instance.with_vectors(vectors))
}

/// Length of the smallest arc containing the arguments of all nonzero vectors.
pub fn angular_span(instance: &Instance) -> f64 {
    span_of(instance.vectors())
}

pub(crate) fn span_of(vectors: &[PlanarVector]) -> f64 {
    let mut args: Vec<f64> = vectors
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.arg())
        .collect();
    if args.len() <= 1 {
        return 0.0;
    }
    args.sort_by(f64::total_cmp);
    let wrap = args[0] + TAU - args[args.len() - 1];
    let largest_gap = args
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap, f64::max);
    (TAU - largest_gap).clamp(0.0, TAU)
}
