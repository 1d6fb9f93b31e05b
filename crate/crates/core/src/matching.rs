//! Bradley-Terry-Luce preferences, the preference-matching (softmax)
//! policy, KKT certificates for full-support maximin strategies, and probes
//! of payoff designs that try to make a given policy the unique solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::mapping::MappingSpec;
use crate::model::{PayoffMatrix, Policy, PreferenceMatrix, DEFAULT_TIE_TOLERANCE};
use crate::model::validate_preferences;
use crate::solver::{self, solve_maximin, NashReport, SOLVER_TOLERANCE};

pub const KKT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtlModel {
    pub rewards: Vec<f64>,
}

impl BtlModel {
    pub fn new(rewards: Vec<f64>) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = rewards.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite { i, j: 0 });
        }
        Ok(BtlModel { rewards })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `p[i][j] = exp(r_i) / (exp(r_i) + exp(r_j)) = sigmoid(r_i - r_j)`.
pub fn btl_preferences(model: &BtlModel) -> Result<PreferenceMatrix> {
    let r = &model.rewards;
    let n = r.len();
    let p = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.5 } else { sigmoid(r[i] - r[j]) }).collect())
        .collect();
    validate_preferences(p, DEFAULT_TIE_TOLERANCE)
}

/// Softmax of the rewards, computed after subtracting the maximum.
pub fn pm_policy(model: &BtlModel) -> Result<Policy> {
    let top = model.rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Policy::from_weights(model.rewards.iter().map(|r| (r - top).exp()).collect())
}

fn positive_target(target: &Policy) -> Result<&[f64]> {
    match target.weights().iter().position(|&w| w <= 0.0) {
        Some(index) => Err(Error::ZeroMass { index }),
        None => Ok(target.weights()),
    }
}

/// `a[i][j] = pi_i + pi_j - delta_ij`.
pub fn construction_one(target: &Policy) -> Result<PayoffMatrix> {
    let w = positive_target(target)?;
    PayoffMatrix::from_fn(w.len(), |i, j| w[i] + w[j] - if i == j { 1.0 } else { 0.0 })
}

/// `a[i][j] = -pi_j / pi_i + n delta_ij`.
pub fn construction_two(target: &Policy) -> Result<PayoffMatrix> {
    let w = positive_target(target)?;
    let n = w.len() as f64;
    PayoffMatrix::from_fn(w.len(), |i, j| -w[j] / w[i] + if i == j { n } else { 0.0 })
}

/// Off-diagonal payoff as a function of the mass ratio `x = pi_i / pi_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioFunction {
    /// `x / (1 + x)`: the BTL preference of `y_i` over `y_j`.
    Logistic,
    /// `psi(x / (1 + x))`: a mapped BTL preference.
    Mapped { psi: MappingSpec },
    /// `c2 / x + c3`.
    InverseRatio { c2: f64, c3: f64 },
    Constant { value: f64 },
}

impl RatioFunction {
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Precondition(format!("ratio {x} must be positive and finite")));
        }
        let v = match self {
            RatioFunction::Logistic => x / (1.0 + x),
            RatioFunction::Mapped { psi } => psi.eval(x / (1.0 + x))?,
            RatioFunction::InverseRatio { c2, c3 } => c2 / x + c3,
            RatioFunction::Constant { value } => *value,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MappingEvaluation { t: x, reason: format!("ratio function gave {v}") })
        }
    }
}

/// Payoff design whose diagonal is the constant `diagonal_c` and whose
/// off-diagonal entries depend only on `pi_i / pi_j` through `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPayoffSpec {
    pub f: RatioFunction,
    pub diagonal_c: f64,
}

impl RatioPayoffSpec {
    /// `f(x) = c + c2 (1/x + n - 1)` with diagonal `c`: the only ratio
    /// design that equalizes every column, and it must know `n`.
    pub fn degenerate(c: f64, c2: f64, n: usize) -> Self {
        RatioPayoffSpec {
            f: RatioFunction::InverseRatio { c2, c3: c + c2 * (n as f64 - 1.0) },
            diagonal_c: c,
        }
    }
}

pub fn ratio_payoff(spec: &RatioPayoffSpec, target: &Policy) -> Result<PayoffMatrix> {
    let w = positive_target(target)?;
    let n = w.len();
    let mut a = vec![vec![spec.diagonal_c; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[i][j] = spec.f.eval(w[i] / w[j])?;
            }
        }
    }
    PayoffMatrix::new(a)
}

/// Witness (or refutation) that a full-support target is a maximin strategy.
///
/// For a target `pi > 0`, optimality is equivalent to the existence of
/// column weights `u` on the simplex and a value `t` with
/// `sum_i pi_i a[i][j] >= t` for all `j`, `u_j (sum_i pi_i a[i][j] - t) = 0`,
/// and `sum_j a[i][j] u_j = t` for all `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    #[serde(with = "solver::weights")]
    pub u: Policy,
    pub t: f64,
    /// `sum_i pi_i a[i][j] - t`; nonnegative by the choice of `t`.
    pub column_slacks: Vec<f64>,
    /// `max_j u_j |sum_i pi_i a[i][j] - t|`.
    pub complementarity_residual: f64,
    /// `max_i |sum_j a[i][j] u_j - t|`.
    pub stationarity_residual: f64,
    pub feasible: bool,
}

/// Decides whether `target` satisfies the KKT system of the maximin problem.
///
/// `t` is pinned to the smallest column payoff, `u` is restricted to the
/// columns within `tolerance` of it, and the remaining linear system is
/// solved as an LP minimizing the largest stationarity violation.
pub fn kkt_verify(a: &PayoffMatrix, target: &Policy, tolerance: f64) -> Result<KktCertificate> {
    let pi = positive_target(target)?;
    let n = a.n();
    if pi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pi.len() });
    }
    let columns = a.column_payoffs(target)?;
    let t = columns.iter().copied().fold(f64::INFINITY, f64::min);
    let column_slacks: Vec<f64> = columns.iter().map(|c| c - t).collect();
    let tight: Vec<usize> = (0..n).filter(|&j| column_slacks[j] <= tolerance).collect();

    // variables: u_j for tight j, then the residual bound s
    let k = tight.len();
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut lp = LinearProgram::minimize(objective);
    for i in 0..n {
        let row: Vec<f64> = tight.iter().map(|&j| a.get(i, j)).collect();
        let mut upper = row.clone();
        upper.push(-1.0);
        lp.add(upper, Relation::Le, t);
        let mut lower = row;
        lower.push(1.0);
        lp.add(lower, Relation::Ge, t);
    }
    let mut simplex = vec![1.0; k];
    simplex.push(0.0);
    lp.add(simplex, Relation::Eq, 1.0);
    let sol = lp.solve()?.optimal("kkt feasibility")?;

    let mut u = vec![0.0; n];
    for (&j, &v) in tight.iter().zip(&sol.x) {
        u[j] = v;
    }
    let u = Policy::from_solver(u)?;
    let stationarity_residual = a
        .row_payoffs(&u)?
        .into_iter()
        .map(|r| (r - t).abs())
        .fold(0.0, f64::max);
    let complementarity_residual = (0..n)
        .map(|j| u.get(j) * column_slacks[j].abs())
        .fold(0.0, f64::max);
    let feasible = stationarity_residual <= tolerance && complementarity_residual <= tolerance;
    Ok(KktCertificate {
        u,
        t,
        column_slacks,
        complementarity_residual,
        stationarity_residual,
        feasible,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmProbe {
    /// Total-variation distance between the solver's strategy and the target.
    pub gap: f64,
    /// Whether the target itself is an optimal strategy.
    pub kkt_feasible: bool,
    pub nash: NashReport,
    pub certificate: KktCertificate,
}

/// Solves the ratio-payoff game built for `target` and measures how far the
/// maximin strategy lands from it.
pub fn pm_gap(spec: &RatioPayoffSpec, target: &Policy) -> Result<PmProbe> {
    let a = ratio_payoff(spec, target)?;
    let nash = solve_maximin(&a, SOLVER_TOLERANCE)?;
    let gap = nash.row_strategy.total_variation(target)?;
    let certificate = kkt_verify(&a, target, KKT_TOLERANCE)?;
    Ok(PmProbe { gap, kkt_feasible: certificate.feasible, nash, certificate })
}
