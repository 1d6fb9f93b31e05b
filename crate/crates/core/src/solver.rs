//! Maximin solutions of finite two-player zero-sum games.
//!
//! The row player maximizes `min_j sum_i pi_i a[i][j]`. Both players' linear
//! programs are solved in epigraph form; their values must agree, and the
//! difference is reported as the duality gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{total_payoff, PayoffMatrix, Policy, DEFAULT_SUPPORT_THRESHOLD};

pub const SOLVER_TOLERANCE: f64 = 1e-9;
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ENUMERATION: usize = 8;
/// Strategies closer than this in L-infinity are the same equilibrium.
pub const DEDUP_DISTANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    /// Maximin strategy of the row player.
    #[serde(with = "weights")]
    pub row_strategy: Policy,
    /// Minimax strategy of the column player (the dual weights).
    #[serde(with = "weights")]
    pub col_strategy: Policy,
    pub value: f64,
    pub duality_gap: f64,
    pub solver_iterations: usize,
}

/// Serializes a policy as a bare weight array.
pub(crate) mod weights {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::Policy;

    pub fn serialize<S: Serializer>(p: &Policy, s: S) -> Result<S::Ok, S::Error> {
        p.weights().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Policy, D::Error> {
        let w = Vec::<f64>::deserialize(d)?;
        Policy::new(w).map_err(serde::de::Error::custom)
    }
}

/// Maximizes the guaranteed payoff of a mixing player facing `a`
/// (rows = own actions). Returns `(strategy, value, iterations)`.
fn maximin_lp(a: &PayoffMatrix) -> Result<(Vec<f64>, f64, usize)> {
    let n = a.n();
    // variables: pi_1..pi_n, v+, v-
    let mut objective = vec![0.0; n + 2];
    objective[n] = 1.0;
    objective[n + 1] = -1.0;
    let mut lp = LinearProgram::maximize(objective);
    for j in 0..n {
        let mut row: Vec<f64> = (0..n).map(|i| -a.get(i, j)).collect();
        row.push(1.0);
        row.push(-1.0);
        lp.add(row, Relation::Le, 0.0);
    }
    let mut simplex = vec![1.0; n];
    simplex.extend([0.0, 0.0]);
    lp.add(simplex, Relation::Eq, 1.0);
    let sol = lp.solve()?.optimal("maximin")?;
    Ok((sol.x[..n].to_vec(), sol.x[n] - sol.x[n + 1], sol.iterations))
}

/// Solves `max_pi min_j sum_i pi_i a[i][j]` and the matching column problem.
///
/// With several optimal strategies, which vertex is returned is unspecified.
pub fn solve_maximin(a: &PayoffMatrix, tolerance: f64) -> Result<NashReport> {
    let (row, row_value, it_row) = maximin_lp(a)?;
    let (col, neg_col_value, it_col) = maximin_lp(&a.negated_transpose())?;
    let row_strategy = Policy::from_solver(row)?;
    let col_strategy = Policy::from_solver(col)?;
    let duality_gap = (row_value + neg_col_value).abs();
    if duality_gap > tolerance.max(SOLVER_TOLERANCE) * (1.0 + row_value.abs()) {
        return Err(Error::LpFailure(format!(
            "primal value {row_value} and dual value {} disagree",
            -neg_col_value
        )));
    }
    Ok(NashReport {
        row_strategy,
        col_strategy,
        value: row_value,
        duality_gap,
        solver_iterations: it_row + it_col,
    })
}

/// Sum of both players' incentives to deviate; zero exactly at a Nash equilibrium.
pub fn best_response_gap(a: &PayoffMatrix, pi1: &Policy, pi2: &Policy) -> Result<f64> {
    let v = total_payoff(a, pi1, pi2)?;
    let best_row = a.row_payoffs(pi2)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let best_col = a.column_payoffs(pi1)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok((best_row - v) + (v - best_col))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    #[serde(with = "weights")]
    pub row: Policy,
    #[serde(with = "weights")]
    pub col: Policy,
    pub value: f64,
}

/// Gaussian elimination with partial pivoting; `None` if numerically singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for c in 0..k {
        let p = (c..k).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..k {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for cc in c..k {
                    m[r][cc] -= f * m[c][cc];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = ((r + 1)..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// Equalizing strategy on `own` that makes every opponent action in `other`
/// yield the same payoff. `entry(i, j)` is the payoff for own action `i`
/// against opponent action `j`.
fn equalizer(
    own: &[usize],
    other: &[usize],
    entry: impl Fn(usize, usize) -> f64,
) -> Option<(Vec<f64>, f64)> {
    let k = own.len();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &j) in other.iter().enumerate() {
        for (c, &i) in own.iter().enumerate() {
            m[r][c] = entry(i, j);
        }
        m[r][k] = -1.0;
    }
    for c in 0..k {
        m[k][c] = 1.0;
    }
    b[k] = 1.0;
    let x = solve_dense(m, b)?;
    Some((x[..k].to_vec(), x[k]))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn embed(n: usize, support: &[usize], values: &[f64]) -> Option<Policy> {
    let mut w = vec![0.0; n];
    for (&i, &v) in support.iter().zip(values) {
        if v < -EQUILIBRIUM_TOLERANCE {
            return None;
        }
        w[i] = v.max(0.0);
    }
    Policy::from_weights(w).ok()
}

/// All vertex equilibria, found by enumerating equal-size support pairs
/// and solving the square equalizing systems on each.
pub fn enumerate_equilibria(a: &PayoffMatrix, max_n: usize) -> Result<Vec<Equilibrium>> {
    let n = a.n();
    if n > max_n {
        return Err(Error::TooLarge { n, max_n });
    }
    let mut found: Vec<Equilibrium> = Vec::new();
    for k in 1..=n {
        let sets = subsets(n, k);
        for rows in &sets {
            for cols in &sets {
                let Some((x, _)) = equalizer(rows, cols, |i, j| a.get(i, j)) else { continue };
                let Some(row) = embed(n, rows, &x) else { continue };
                let Some((y, _)) = equalizer(cols, rows, |j, i| a.get(i, j)) else { continue };
                let Some(col) = embed(n, cols, &y) else { continue };
                if best_response_gap(a, &row, &col)? > EQUILIBRIUM_TOLERANCE {
                    continue;
                }
                let duplicate = found.iter().any(|e| {
                    e.row.linf_distance(&row).unwrap_or(f64::INFINITY) <= DEDUP_DISTANCE
                        && e.col.linf_distance(&col).unwrap_or(f64::INFINITY) <= DEDUP_DISTANCE
                });
                if !duplicate {
                    let value = total_payoff(a, &row, &col)?;
                    found.push(Equilibrium { row, col, value });
                }
            }
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub unique: bool,
    /// `sum_i pi*_i a[i][j] - t*` for each column.
    pub column_slacks: Vec<f64>,
    /// Every dual weight exceeds the support threshold.
    pub dual_support_full: bool,
    /// `[min, max]` of each coordinate over the optimal-strategy polytope.
    pub coordinate_ranges: Vec<(f64, f64)>,
}

/// Examines the set of optimal row strategies around a solved game.
///
/// The optimal polytope is `{pi in simplex : sum_i pi_i a[i][j] >= t* - eps}`
/// with `eps = tolerance / 1000`; each coordinate is minimized and maximized
/// over it, and the game counts as uniquely solved when every range is at
/// most `tolerance` wide.
pub fn uniqueness_report(
    a: &PayoffMatrix,
    nash: &NashReport,
    tolerance: f64,
) -> Result<UniquenessReport> {
    let n = a.n();
    let column_slacks: Vec<f64> =
        a.column_payoffs(&nash.row_strategy)?.into_iter().map(|c| c - nash.value).collect();
    let relaxed = nash.value - tolerance * 1e-3 * (1.0 + nash.value.abs());

    let extreme = |i: usize, maximize: bool| -> Result<f64> {
        let mut objective = vec![0.0; n];
        objective[i] = 1.0;
        let mut lp = if maximize {
            LinearProgram::maximize(objective)
        } else {
            LinearProgram::minimize(objective)
        };
        for j in 0..n {
            lp.add((0..n).map(|r| a.get(r, j)).collect(), Relation::Ge, relaxed);
        }
        lp.add(vec![1.0; n], Relation::Eq, 1.0);
        let sol = lp.solve()?.optimal("optimal-polytope range")?;
        Ok(sol.x[i])
    };

    let mut coordinate_ranges = Vec::with_capacity(n);
    for i in 0..n {
        coordinate_ranges.push((extreme(i, false)?, extreme(i, true)?));
    }
    let unique = coordinate_ranges.iter().all(|(lo, hi)| hi - lo <= tolerance);
    Ok(UniquenessReport {
        unique,
        column_slacks,
        dual_support_full: nash.col_strategy.is_full_support(DEFAULT_SUPPORT_THRESHOLD),
        coordinate_ranges,
    })
}
