//! Seeded random tournaments and the fixed small games used to probe the
//! consistency conditions.
//!
//! Randomness comes from `ChaCha8Rng` (rand_chacha 0.3), seeded with
//! `seed_from_u64`. Independent trials use distinct ChaCha streams of one
//! master seed, see [`split_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::MappingSpec;
use crate::model::{apply_mapping, validate_preferences, PayoffMatrix, Policy, PreferenceMatrix};
use crate::model::DEFAULT_TIE_TOLERANCE;
use crate::social_choice::condorcet_winner;

pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_low")]
    pub strength_low: f64,
    #[serde(default = "default_high")]
    pub strength_high: f64,
    #[serde(default)]
    pub force_no_winner: bool,
}

fn default_low() -> f64 {
    0.55
}

fn default_high() -> f64 {
    0.95
}

impl GeneratorConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            seed,
            strength_low: default_low(),
            strength_high: default_high(),
            force_no_winner: false,
        }
    }

    pub fn no_winner(mut self) -> Self {
        self.force_no_winner = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Empty);
        }
        let (lo, hi) = (self.strength_low, self.strength_high);
        if !(0.5 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "strengths must satisfy 1/2 < low <= high < 1, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Generator for trial `index` under `master`: ChaCha stream `index`.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Seed of trial `index` under `master`: the first word of its stream.
pub fn split_seed(master: u64, index: u64) -> u64 {
    trial_rng(master, index).gen()
}

fn draw_tournament(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<PreferenceMatrix> {
    let n = cfg.n;
    let mut p = vec![vec![0.5; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let i_wins = rng.gen_bool(0.5);
            let s = rng.gen_range(cfg.strength_low..=cfg.strength_high);
            let (pij, pji) = if i_wins { (s, 1.0 - s) } else { (1.0 - s, s) };
            p[i][j] = pij;
            p[j][i] = pji;
        }
    }
    validate_preferences(p, DEFAULT_TIE_TOLERANCE)
}

/// Random tournament with uniform winners and uniform strengths.
///
/// With `force_no_winner`, draws repeat until no Condorcet winner exists.
pub fn random_tournament(cfg: &GeneratorConfig) -> Result<PreferenceMatrix> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if !cfg.force_no_winner {
        return draw_tournament(cfg, &mut rng);
    }
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let p = draw_tournament(cfg, &mut rng)?;
        if condorcet_winner(&p).is_none() {
            return Ok(p);
        }
    }
    Err(Error::RejectionCapExceeded { attempts: MAX_REJECTION_ATTEMPTS })
}

fn check_strength(name: &str, t: f64) -> Result<()> {
    if t > 0.5 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} = {t} must lie in (1/2, 1]")))
    }
}

/// Preferences whose mapped game is `[[psi(1/2), psi(t)], [psi(1-t), psi(1/2)]]`.
pub fn table_two_preferences(t: f64) -> Result<PreferenceMatrix> {
    check_strength("t", t)?;
    PreferenceMatrix::new(vec![vec![0.5, t], vec![1.0 - t, 0.5]])
}

/// Responses 0 > 1 > 2 > 0 with strength `t1`, each beating 3 with strength `t2`.
pub fn table_four_preferences(t1: f64, t2: f64) -> Result<PreferenceMatrix> {
    check_strength("t1", t1)?;
    check_strength("t2", t2)?;
    let mut p = vec![vec![0.5; 4]; 4];
    for i in 0..3 {
        let next = (i + 1) % 3;
        p[i][next] = t1;
        p[next][i] = 1.0 - t1;
        p[i][3] = t2;
        p[3][i] = 1.0 - t2;
    }
    PreferenceMatrix::new(p)
}

/// Two 3-cycles of strength `t1`; every member of {0,1,2} beats every member
/// of {3,4,5} with strength `t2`.
pub fn table_six_preferences(t1: f64, t2: f64) -> Result<PreferenceMatrix> {
    check_strength("t1", t1)?;
    check_strength("t2", t2)?;
    let mut p = vec![vec![0.5; 6]; 6];
    for block in [0, 3] {
        for k in 0..3 {
            let (i, j) = (block + k, block + (k + 1) % 3);
            p[i][j] = t1;
            p[j][i] = 1.0 - t1;
        }
    }
    for i in 0..3 {
        for j in 3..6 {
            p[i][j] = t2;
            p[j][i] = 1.0 - t2;
        }
    }
    PreferenceMatrix::new(p)
}

pub fn game_two(psi: &MappingSpec, t: f64) -> Result<PayoffMatrix> {
    apply_mapping(&table_two_preferences(t)?, psi)
}

pub fn game_four(psi: &MappingSpec, t1: f64, t2: f64) -> Result<PayoffMatrix> {
    apply_mapping(&table_four_preferences(t1, t2)?, psi)
}

pub fn game_six(psi: &MappingSpec, t1: f64, t2: f64) -> Result<PayoffMatrix> {
    apply_mapping(&table_six_preferences(t1, t2)?, psi)
}

/// Equalizing strategies `(mu, mu')` of [`game_six`], uniform inside each block.
///
/// With `S = psi(1/2) + psi(t1) + psi(1-t1)`, the block masses solve
/// `mu_1 (S - 3 psi(t2)) = mu_2 (S - 3 psi(1-t2))` for the row player and the
/// mirrored system for the column player. Both brackets must be positive.
pub fn mixture_weights(psi: &MappingSpec, t1: f64, t2: f64) -> Result<(Policy, Policy)> {
    check_strength("t1", t1)?;
    check_strength("t2", t2)?;
    let s = psi.eval(0.5)? + psi.eval(t1)? + psi.eval(1.0 - t1)?;
    let upper = s - 3.0 * psi.eval(t2)?;
    let lower = s - 3.0 * psi.eval(1.0 - t2)?;
    if !(upper > 0.0 && lower > 0.0) {
        return Err(Error::Precondition(format!(
            "no positive equalizer: S - 3 psi(t2) = {upper}, S - 3 psi(1-t2) = {lower}"
        )));
    }
    let total = upper + lower;
    let spread = |first: f64| {
        let w = [first / 3.0, (1.0 - first) / 3.0];
        Policy::new(vec![w[0], w[0], w[0], w[1], w[1], w[1]])
    };
    Ok((spread(lower / total)?, spread(upper / total)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::total_payoff;
    use crate::social_choice::smith_decomposition;
    use crate::solver::{best_response_gap, solve_maximin, SOLVER_TOLERANCE};

    fn quadratic() -> MappingSpec {
        // t + 4 (t - 1/2)^2 = 1 - 3t + 4t^2
        MappingSpec::polynomial(vec![1.0, -3.0, 4.0]).unwrap()
    }

    #[test]
    fn tournaments_are_deterministic_and_tie_free() {
        for seed in 0..20 {
            let cfg = GeneratorConfig::new(6, seed);
            let a = random_tournament(&cfg).unwrap();
            let b = random_tournament(&cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.no_tie());
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        let s = a.get(i, j).max(a.get(j, i));
                        assert!((0.55..=0.95).contains(&s));
                    }
                }
            }
        }
        assert_ne!(
            random_tournament(&GeneratorConfig::new(6, 1)).unwrap(),
            random_tournament(&GeneratorConfig::new(6, 2)).unwrap()
        );
    }

    #[test]
    fn forced_cycles() {
        for seed in 0..20 {
            let p = random_tournament(&GeneratorConfig::new(5, seed).no_winner()).unwrap();
            assert_eq!(condorcet_winner(&p), None);
        }
        assert_eq!(
            random_tournament(&GeneratorConfig::new(2, 0).no_winner()),
            Err(Error::RejectionCapExceeded { attempts: MAX_REJECTION_ATTEMPTS })
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = GeneratorConfig::new(3, 0);
        cfg.strength_low = 0.5;
        assert!(matches!(random_tournament(&cfg), Err(Error::InvalidConfig(_))));
        cfg.strength_low = 0.9;
        cfg.strength_high = 0.8;
        assert!(random_tournament(&cfg).is_err());
        let cfg: GeneratorConfig = serde_json::from_str(r#"{"n":4,"seed":7}"#).unwrap();
        assert_eq!(cfg, GeneratorConfig::new(4, 7));
    }

    #[test]
    fn split_seeds_differ() {
        let seeds: Vec<u64> = (0..50).map(|i| split_seed(42, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(split_seed(42, 3), split_seed(42, 3));
    }

    #[test]
    fn game_two_layouts() {
        let a = game_two(&MappingSpec::identity(), 0.7).unwrap();
        assert_eq!(a.rows(), &[vec![0.5, 0.7], vec![0.30000000000000004, 0.5]]);
        let step = MappingSpec::piecewise_constant(-1.0, 0.0, 1.0).unwrap();
        let a = game_two(&step, 0.9).unwrap();
        assert_eq!(a.rows(), &[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let a = game_two(&MappingSpec::log_odds(), 0.5 + 1e-9).unwrap();
        assert!(a.max_entry().abs() < 1e-8 && a.min_entry().abs() < 1e-8);
        assert!(game_two(&MappingSpec::identity(), 0.5).is_err());
    }

    #[test]
    fn game_four_layout() {
        let a = game_four(&MappingSpec::identity(), 0.6, 0.7).unwrap();
        for j in 0..3 {
            assert!((a.get(3, j) - 0.3).abs() < 1e-15);
            assert!((a.get(j, 3) - 0.7).abs() < 1e-15);
        }
        assert_eq!(a.get(3, 3), 0.5);
        assert_eq!(a.get(0, 1), 0.6);
        assert!((a.get(1, 0) - 0.4).abs() < 1e-15);
        let d = smith_decomposition(&table_four_preferences(0.6, 0.7).unwrap()).unwrap();
        assert_eq!(d.groups, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn game_four_loser_equilibrium() {
        // psi(t1)+psi(1-t1)+psi(1/2) <= 3 psi(1-t2) under a steep lower half
        let psi = MappingSpec::piecewise_linear(vec![(0.0, -4.5), (0.5, 0.5), (1.0, 1.0)]).unwrap();
        let a = game_four(&psi, 0.9, 0.55).unwrap();
        let gap = best_response_gap(
            &a,
            &Policy::pure(4, 3).unwrap(),
            &Policy::uniform_on(4, &[0, 1, 2]).unwrap(),
        )
        .unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn game_six_layout() {
        let a = game_six(&MappingSpec::identity(), 0.8, 0.65).unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(a.get(i, j), 0.65);
            }
        }
        let d = smith_decomposition(&table_six_preferences(0.8, 0.65).unwrap()).unwrap();
        assert_eq!(d.groups, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn mixture_example() {
        let (mu, mu_prime) = mixture_weights(&quadratic(), 0.9, 0.6).unwrap();
        let mu1: f64 = mu.weights()[..3].iter().sum();
        assert!((mu1 - 1.46 / 2.32).abs() < 1e-12);
        let mu1p: f64 = mu_prime.weights()[..3].iter().sum();
        assert!((mu1p - 0.86 / 2.32).abs() < 1e-12);
        let a = game_six(&quadratic(), 0.9, 0.6).unwrap();
        assert!(best_response_gap(&a, &mu, &mu_prime).unwrap() < 1e-12);
        // equalizing against every pure column
        let values: Vec<f64> = (0..6)
            .map(|j| total_payoff(&a, &mu, &Policy::pure(6, j).unwrap()).unwrap())
            .collect();
        assert!(values.iter().all(|v| (v - values[0]).abs() < 1e-12));
    }

    #[test]
    fn mixture_symmetric_case() {
        // identity-like mapping with psi(t2) = psi(1 - t2)
        let flat = MappingSpec::piecewise_linear(vec![(0.0, 0.0), (0.3, 0.3), (0.7, 0.3), (1.0, 1.0)]).unwrap();
        let (mu, mu_prime) = mixture_weights(&flat, 0.9, 0.6).unwrap();
        assert!((mu.get(0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((mu_prime.get(5) - 1.0 / 6.0).abs() < 1e-15);
        let steep = MappingSpec::power(0.01).unwrap();
        assert!(matches!(mixture_weights(&steep, 0.6, 0.99), Err(Error::Precondition(_))));
    }

    #[test]
    fn condorcet_games_pick_the_winner() {
        for psi in [MappingSpec::identity(), MappingSpec::log_odds()] {
            for t in [0.51, 0.7, 0.99, 1.0] {
                let nash = solve_maximin(&game_two(&psi, t).unwrap(), SOLVER_TOLERANCE).unwrap();
                assert!(nash.row_strategy.get(0) > 1.0 - 1e-6);
            }
        }
    }
}
