//! Payoff mappings `psi: [0, 1] -> R` and grid-based checks of the
//! conditions that make a mapped preference game Condorcet consistent,
//! mixed, or Smith consistent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_RESOLUTION: usize = 10_001;
pub const DEFAULT_MARGIN: f64 = 1e-12;
pub const DEFAULT_LOG_ODDS_CLAMP: f64 = 1e-9;

/// Witnesses kept per failure reason in a [`ConditionReport`].
const MAX_WITNESSES_PER_REASON: usize = 8;

/// The functional form of a mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MappingKind {
    Identity,
    /// `log(t / (1 - t))`.
    LogOdds,
    /// `a * t + b`.
    Affine { a: f64, b: f64 },
    /// `t^k`.
    Power { k: f64 },
    /// `sum_m coefficients[m] * t^m`.
    Polynomial { coefficients: Vec<f64> },
    /// Linear interpolation through `(t, value)` breakpoints covering 0 and 1.
    PiecewiseLinear { points: Vec<(f64, f64)> },
    /// `m_minus` below 1/2, `mid` at exactly 1/2, `m_plus` above.
    PiecewiseConstant { m_minus: f64, mid: f64, m_plus: f64 },
    /// `base` on [0, 1/2], reflected as `2 base(1/2) - base(1 - t)` above.
    SymmetricExtension { base: Box<MappingSpec> },
}

/// A validated mapping together with its domain clamp.
///
/// When the clamp `eps` is positive, arguments are pulled into
/// `[eps, 1 - eps]` before evaluation. The clamp is applied to the distance
/// from the nearer endpoint so that `t` and `1 - t` are always clamped to
/// exact complements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMappingSpec", into = "RawMappingSpec")]
pub struct MappingSpec {
    kind: MappingKind,
    clamp_epsilon: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMappingSpec {
    #[serde(flatten)]
    kind: MappingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clamp_epsilon: Option<f64>,
}

impl TryFrom<RawMappingSpec> for MappingSpec {
    type Error = Error;

    fn try_from(raw: RawMappingSpec) -> Result<Self> {
        MappingSpec::new(raw.kind, raw.clamp_epsilon)
    }
}

impl From<MappingSpec> for RawMappingSpec {
    fn from(m: MappingSpec) -> Self {
        RawMappingSpec { kind: m.kind, clamp_epsilon: m.clamp_epsilon }
    }
}

impl MappingSpec {
    pub fn new(kind: MappingKind, clamp_epsilon: Option<f64>) -> Result<Self> {
        if let Some(eps) = clamp_epsilon {
            if !(0.0..0.5).contains(&eps) {
                return Err(Error::InvalidMapping(format!("clamp_epsilon {eps} outside [0, 0.5)")));
            }
        }
        match &kind {
            MappingKind::Identity | MappingKind::LogOdds => {}
            MappingKind::Affine { a, b } => finite("affine coefficient", &[*a, *b])?,
            MappingKind::Power { k } => {
                finite("power exponent", &[*k])?;
                if *k <= 0.0 {
                    return Err(Error::InvalidMapping(format!("power exponent {k} must be positive")));
                }
            }
            MappingKind::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidMapping("polynomial needs coefficients".into()));
                }
                finite("polynomial coefficient", coefficients)?;
            }
            MappingKind::PiecewiseLinear { points } => check_breakpoints(points)?,
            MappingKind::PiecewiseConstant { m_minus, mid, m_plus } => {
                finite("piecewise constant level", &[*m_minus, *mid, *m_plus])?
            }
            MappingKind::SymmetricExtension { base } => check_extension_base(base)?,
        }
        Ok(MappingSpec { kind, clamp_epsilon })
    }

    pub fn identity() -> Self {
        MappingSpec { kind: MappingKind::Identity, clamp_epsilon: None }
    }

    pub fn log_odds() -> Self {
        MappingSpec { kind: MappingKind::LogOdds, clamp_epsilon: None }
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(MappingKind::Affine { a, b }, None)
    }

    pub fn power(k: f64) -> Result<Self> {
        Self::new(MappingKind::Power { k }, None)
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(MappingKind::Polynomial { coefficients }, None)
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(MappingKind::PiecewiseLinear { points }, None)
    }

    pub fn piecewise_constant(m_minus: f64, mid: f64, m_plus: f64) -> Result<Self> {
        Self::new(MappingKind::PiecewiseConstant { m_minus, mid, m_plus }, None)
    }

    /// Returns a copy with an explicit clamp.
    pub fn with_clamp(self, eps: f64) -> Result<Self> {
        Self::new(self.kind, Some(eps))
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    /// The clamp in effect: the explicit one, else 1e-9 for log-odds and 0 otherwise.
    pub fn clamp_epsilon(&self) -> f64 {
        match (self.clamp_epsilon, &self.kind) {
            (Some(eps), _) => eps,
            (None, MappingKind::LogOdds) => DEFAULT_LOG_ODDS_CLAMP,
            (None, _) => 0.0,
        }
    }

    /// Evaluates `psi(t)`; fails on arguments outside [0, 1] and on non-finite results.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::MappingEvaluation { t, reason: "argument outside [0, 1]".into() });
        }
        let eps = self.clamp_epsilon();
        let value = match &self.kind {
            MappingKind::LogOdds => {
                let (d, upper) = if t <= 0.5 { (t.max(eps), false) } else { ((1.0 - t).max(eps), true) };
                let l = d.ln() - (-d).ln_1p();
                if upper {
                    -l
                } else {
                    l
                }
            }
            MappingKind::SymmetricExtension { base } => {
                let t = clamp_symmetric(t, eps);
                if t <= 0.5 {
                    base.eval(t)?
                } else {
                    2.0 * base.eval(0.5)? - base.eval(1.0 - t)?
                }
            }
            kind => eval_plain(kind, clamp_symmetric(t, eps)),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::MappingEvaluation { t, reason: format!("non-finite value {value}") })
        }
    }
}

fn eval_plain(kind: &MappingKind, t: f64) -> f64 {
    match kind {
        MappingKind::Identity => t,
        MappingKind::Affine { a, b } => a * t + b,
        MappingKind::Power { k } => t.powf(*k),
        MappingKind::Polynomial { coefficients } => {
            coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
        }
        MappingKind::PiecewiseLinear { points } => {
            // first breakpoint strictly right of t, kept inside the last segment
            let k = points.partition_point(|p| p.0 <= t).clamp(1, points.len() - 1);
            let (t0, v0) = points[k - 1];
            let (t1, v1) = points[k];
            v0 + (t - t0) / (t1 - t0) * (v1 - v0)
        }
        MappingKind::PiecewiseConstant { m_minus, mid, m_plus } => {
            if t < 0.5 {
                *m_minus
            } else if t > 0.5 {
                *m_plus
            } else {
                *mid
            }
        }
        MappingKind::LogOdds | MappingKind::SymmetricExtension { .. } => unreachable!(),
    }
}

fn clamp_symmetric(t: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        t
    } else if t <= 0.5 {
        t.max(eps)
    } else {
        1.0 - (1.0 - t).max(eps)
    }
}

fn finite(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidMapping(format!("{what} {v} is not finite"))),
        None => Ok(()),
    }
}

fn check_breakpoints(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InvalidMapping("piecewise_linear needs at least two breakpoints".into()));
    }
    for &(t, v) in points {
        finite("breakpoint", &[t, v])?;
    }
    if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
        return Err(Error::InvalidMapping("breakpoints must start at t = 0 and end at t = 1".into()));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidMapping("breakpoints must be strictly ascending in t".into()));
    }
    Ok(())
}

/// Grid points on [0, 1/2], snapped to multiples of 2^-53 so that `1 - t`
/// is exact and pairs `(t, 1 - t)` are exact complements. Always ends at 1/2.
fn lower_half_grid(resolution: usize) -> Vec<f64> {
    const LATTICE: f64 = 9_007_199_254_740_992.0; // 2^53
    let steps = (resolution - 1) as f64;
    let mut grid: Vec<f64> = (0..resolution)
        .map(|k| ((k as f64 / steps) * LATTICE).round() / LATTICE)
        .take_while(|&t| t < 0.5)
        .collect();
    grid.push(0.5);
    grid
}

fn check_extension_base(base: &MappingSpec) -> Result<()> {
    let mid = base.eval(0.5)?;
    for t in lower_half_grid(DEFAULT_GRID_RESOLUTION) {
        if t < 0.5 && !(base.eval(t)? < mid - DEFAULT_MARGIN) {
            return Err(Error::InvalidMapping(format!(
                "symmetric extension base must satisfy base(t) < base(1/2) for t < 1/2; fails at t = {t}"
            )));
        }
    }
    Ok(())
}

/// Builds the mapping equal to `base` on [0, 1/2] and to
/// `2 base(1/2) - base(1 - t)` on (1/2, 1].
///
/// The base must sit strictly below `base(1/2)` on the lower half (checked
/// on the default grid); the result then passes the Smith row of
/// [`check_conditions`].
pub fn symmetric_extension(base: MappingSpec) -> Result<MappingSpec> {
    MappingSpec::new(MappingKind::SymmetricExtension { base: Box::new(base) }, None)
}

pub fn eval_mapping(spec: &MappingSpec, t: f64) -> Result<f64> {
    spec.eval(t)
}

/// Why a grid point failed a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFailure {
    /// `psi(t) < psi(1/2)` for some `t >= 1/2`.
    UpperBelowHalf,
    /// `psi(t) >= psi(1/2) - margin` for some `t < 1/2`.
    LowerNotBelowHalf,
    /// `psi(t) + psi(1 - t) < 2 psi(1/2) - margin`.
    SumBelow,
    /// `psi(t) + psi(1 - t) > 2 psi(1/2) + margin`.
    SumAbove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub reason: ConditionFailure,
}

/// Grid verdicts for the three conditions on `psi`.
///
/// Verdicts hold on the sampled grid only. `jump_left`/`jump_right` give
/// `|psi(1/2 -+ h) - psi(1/2)|` at the grid step `h`, as a continuity hint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condorcet_ok: bool,
    pub mixed_ok: bool,
    pub smith_ok: bool,
    pub witnesses: Vec<Witness>,
    pub grid_resolution: usize,
    pub margin: f64,
    pub psi_half: f64,
    pub jump_left: f64,
    pub jump_right: f64,
}

/// Evaluates the Condorcet, mixed and Smith conditions on a uniform grid of
/// `grid_resolution` points (plus 1/2 when the grid misses it).
pub fn check_conditions(
    spec: &MappingSpec,
    grid_resolution: usize,
    margin: f64,
) -> Result<ConditionReport> {
    if grid_resolution < 3 {
        return Err(Error::InvalidConfig(format!("grid resolution {grid_resolution} < 3")));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidConfig(format!("margin {margin} must be nonnegative")));
    }
    let half = spec.eval(0.5)?;
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut counts = [0usize; 4];
    let mut record = |t: f64, reason: ConditionFailure| {
        let slot = reason as usize;
        if counts[slot] < MAX_WITNESSES_PER_REASON {
            witnesses.push(Witness { t, reason });
        }
        counts[slot] += 1;
    };

    for t in lower_half_grid(grid_resolution) {
        if t == 0.5 {
            continue;
        }
        let s = 1.0 - t;
        let low = spec.eval(t)?;
        let high = spec.eval(s)?;
        if high < half - margin {
            record(s, ConditionFailure::UpperBelowHalf);
        }
        if !(low < half - margin) {
            record(t, ConditionFailure::LowerNotBelowHalf);
        }
        let sum = low + high;
        if sum < 2.0 * half - margin {
            record(t, ConditionFailure::SumBelow);
        } else if sum > 2.0 * half + margin {
            record(t, ConditionFailure::SumAbove);
        }
    }

    let failed = |r: ConditionFailure| counts[r as usize] > 0;
    let condorcet_ok =
        !failed(ConditionFailure::UpperBelowHalf) && !failed(ConditionFailure::LowerNotBelowHalf);
    let mixed_ok = condorcet_ok && !failed(ConditionFailure::SumBelow);
    let smith_ok = !failed(ConditionFailure::LowerNotBelowHalf)
        && !failed(ConditionFailure::SumBelow)
        && !failed(ConditionFailure::SumAbove);

    let h = 1.0 / (grid_resolution - 1) as f64;
    Ok(ConditionReport {
        condorcet_ok,
        mixed_ok,
        smith_ok,
        witnesses,
        grid_resolution,
        margin,
        psi_half: half,
        jump_left: (spec.eval(0.5 - h)? - half).abs(),
        jump_right: (spec.eval(0.5 + h)? - half).abs(),
    })
}
