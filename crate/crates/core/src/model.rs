//! Preference matrices, payoff matrices and policies.
//!
//! Every type here is immutable once constructed; constructors validate
//! their invariants so downstream code can index freely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::MappingSpec;

/// Absolute tolerance for `p[i][j] + p[j][i] = 1` and `p[i][i] = 1/2`.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;
/// Default minimum distance from 1/2 for an off-diagonal entry to count as a strict preference.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;
/// Default threshold above which a policy weight counts as supported.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-7;
/// Tolerance on `sum(w) = 1` for policies.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), n });
        }
    }
    Ok(n)
}

/// Pairwise preference probabilities `p[i][j] = P(y_i > y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPreferences", into = "RawPreferences")]
pub struct PreferenceMatrix {
    p: Vec<Vec<f64>>,
    no_tie: bool,
}

#[derive(Serialize, Deserialize)]
struct RawPreferences {
    n: usize,
    p: Vec<Vec<f64>>,
}

impl TryFrom<RawPreferences> for PreferenceMatrix {
    type Error = Error;

    fn try_from(raw: RawPreferences) -> Result<Self> {
        if raw.p.len() != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: raw.p.len() });
        }
        validate_preferences(raw.p, DEFAULT_TIE_TOLERANCE)
    }
}

impl From<PreferenceMatrix> for RawPreferences {
    fn from(m: PreferenceMatrix) -> Self {
        RawPreferences { n: m.n(), p: m.p }
    }
}

/// Checks a raw matrix against the preference invariants and records
/// whether any off-diagonal pair lies within `tie_tolerance` of 1/2.
///
/// Entries are kept exactly as given; nothing is renormalized.
pub fn validate_preferences(raw: Vec<Vec<f64>>, tie_tolerance: f64) -> Result<PreferenceMatrix> {
    let n = check_square(&raw)?;
    for (i, row) in raw.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { i, j });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::EntryOutOfRange { i, j, value });
            }
        }
    }
    let mut no_tie = true;
    for i in 0..n {
        let d = raw[i][i];
        if (d - 0.5).abs() > VALIDATION_TOLERANCE {
            return Err(Error::Diagonal { i, value: d });
        }
        for j in (i + 1)..n {
            let sum = raw[i][j] + raw[j][i];
            if (sum - 1.0).abs() > VALIDATION_TOLERANCE {
                return Err(Error::Antisymmetry { i, j, sum });
            }
            if (raw[i][j] - 0.5).abs() < tie_tolerance {
                no_tie = false;
            }
        }
    }
    Ok(PreferenceMatrix { p: raw, no_tie })
}

impl PreferenceMatrix {
    pub fn new(raw: Vec<Vec<f64>>) -> Result<Self> {
        validate_preferences(raw, DEFAULT_TIE_TOLERANCE)
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn no_tie(&self) -> bool {
        self.no_tie
    }

    /// `true` iff `y_i` beats `y_j` by strict majority.
    #[inline]
    pub fn beats(&self, i: usize, j: usize) -> bool {
        self.p[i][j] > 0.5
    }

    /// Relabels responses so that new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
        }
        let p = (0..n)
            .map(|a| (0..n).map(|b| self.p[perm[a]][perm[b]]).collect())
            .collect();
        Ok(PreferenceMatrix { p, no_tie: self.no_tie })
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.p
    }
}

/// Real-valued payoff matrix of the row player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPayoff", into = "RawPayoff")]
pub struct PayoffMatrix {
    a: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawPayoff {
    n: usize,
    a: Vec<Vec<f64>>,
}

impl TryFrom<RawPayoff> for PayoffMatrix {
    type Error = Error;

    fn try_from(raw: RawPayoff) -> Result<Self> {
        if raw.a.len() != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: raw.a.len() });
        }
        PayoffMatrix::new(raw.a)
    }
}

impl From<PayoffMatrix> for RawPayoff {
    fn from(m: PayoffMatrix) -> Self {
        RawPayoff { n: m.n(), a: m.a }
    }
}

impl PayoffMatrix {
    pub fn new(a: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&a)?;
        for (i, row) in a.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
        }
        Ok(PayoffMatrix { a })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| c)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.a
    }

    /// Expected payoff of each pure row against a column policy: `sum_j a[i][j] y[j]`.
    pub fn row_payoffs(&self, col: &Policy) -> Result<Vec<f64>> {
        self.check_dim(col)?;
        Ok(self
            .a
            .iter()
            .map(|row| row.iter().zip(col.weights()).map(|(a, y)| a * y).sum())
            .collect())
    }

    /// Expected payoff of a row policy against each pure column: `sum_i x[i] a[i][j]`.
    pub fn column_payoffs(&self, row: &Policy) -> Result<Vec<f64>> {
        self.check_dim(row)?;
        let n = self.n();
        let mut out = vec![0.0; n];
        for (i, x) in row.weights().iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += x * self.a[i][j];
            }
        }
        Ok(out)
    }

    /// The game seen from the column player: `-A^T`.
    pub fn negated_transpose(&self) -> PayoffMatrix {
        let n = self.n();
        PayoffMatrix { a: (0..n).map(|i| (0..n).map(|j| -self.a[j][i]).collect()).collect() }
    }

    /// `scale * A + shift`, entrywise.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<PayoffMatrix> {
        PayoffMatrix::new(
            self.a.iter().map(|r| r.iter().map(|v| scale * v + shift).collect()).collect(),
        )
    }

    pub fn min_entry(&self) -> f64 {
        self.a.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.a.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_dim(&self, p: &Policy) -> Result<()> {
        if p.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: p.n() });
        }
        Ok(())
    }
}

/// A probability vector over the `n` responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy", into = "RawPolicy")]
pub struct Policy {
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPolicy {
    n: usize,
    w: Vec<f64>,
}

impl TryFrom<RawPolicy> for Policy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        if raw.w.len() != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: raw.w.len() });
        }
        Policy::new(raw.w)
    }
}

impl From<Policy> for RawPolicy {
    fn from(p: Policy) -> Self {
        RawPolicy { n: p.n(), w: p.w }
    }
}

impl Policy {
    /// Accepts weights that are nonnegative and sum to one within [`SIMPLEX_TOLERANCE`].
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in w.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::NotOnSimplex { sum });
        }
        Ok(Policy { w })
    }

    /// Normalizes arbitrary nonnegative weights onto the simplex.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in w.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(Error::EmptySupport);
        }
        Ok(Policy { w: w.into_iter().map(|v| v / sum).collect() })
    }

    /// Cleans solver output: clips small negatives to zero and renormalizes.
    pub(crate) fn from_solver(w: Vec<f64>) -> Result<Self> {
        Self::from_weights(w.into_iter().map(|v| if v > 0.0 { v } else { 0.0 }).collect())
    }

    /// The pure policy `delta_i`.
    pub fn pure(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::DimensionMismatch { expected: n, found: i + 1 });
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Ok(Policy { w })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Policy { w: vec![1.0 / n as f64; n] })
    }

    /// `(delta_{i1} + ... + delta_{ik}) / k`.
    pub fn uniform_on(n: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut w = vec![0.0; n];
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch { expected: n, found: i + 1 });
            }
            w[i] = 1.0;
        }
        Self::from_weights(w)
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }

    /// Indices whose weight exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.w[i] > threshold).collect()
    }

    pub fn is_full_support(&self, threshold: f64) -> bool {
        self.w.iter().all(|&v| v > threshold)
    }

    /// Total-variation distance `1/2 * sum |w_i - w'_i|`.
    pub fn total_variation(&self, other: &Policy) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        Ok(0.5 * self.w.iter().zip(&other.w).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Largest coordinatewise difference.
    pub fn linf_distance(&self, other: &Policy) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        Ok(self.w.iter().zip(&other.w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `a * self + (1 - a) * other` for `a` in [0, 1].
    pub fn mix(&self, other: &Policy, a: f64) -> Result<Policy> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Precondition(format!("mixing weight {a} outside [0, 1]")));
        }
        Policy::from_weights(self.w.iter().zip(&other.w).map(|(x, y)| a * x + (1.0 - a) * y).collect())
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.w
    }
}

/// Builds `a[i][j] = psi(p[i][j])`.
pub fn apply_mapping(prefs: &PreferenceMatrix, psi: &MappingSpec) -> Result<PayoffMatrix> {
    let a = prefs
        .rows()
        .iter()
        .map(|row| row.iter().map(|&t| psi.eval(t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    PayoffMatrix::new(a)
}

/// Bilinear payoff `sum_i sum_j pi1[i] pi2[j] a[i][j]`.
pub fn total_payoff(a: &PayoffMatrix, pi1: &Policy, pi2: &Policy) -> Result<f64> {
    if pi1.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: pi1.n() });
    }
    let rows = a.row_payoffs(pi2)?;
    Ok(rows.iter().zip(pi1.weights()).map(|(r, x)| r * x).sum())
}
