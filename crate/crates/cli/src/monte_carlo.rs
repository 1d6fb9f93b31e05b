//! Randomized consistency checks over many seeded tournaments.

use std::fs;
use std::path::Path;
use std::time::Instant;

use prefgame::generators::{random_tournament, trial_rng, GeneratorConfig};
use prefgame::mapping::MappingSpec;
use prefgame::model::{apply_mapping, PreferenceMatrix, DEFAULT_SUPPORT_THRESHOLD};
use prefgame::social_choice::{consistency_verdict, ConsistencyVerdict};
use prefgame::solver::{solve_maximin, NashReport};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub psi: MappingSpec,
    pub trials: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub force_no_winner: bool,
    pub strength_low: f64,
    pub strength_high: f64,
    pub tolerance: f64,
}

impl MonteCarloConfig {
    pub fn new(psi: MappingSpec, trials: u64, seed: u64) -> Self {
        MonteCarloConfig {
            psi,
            trials,
            n_min: 3,
            n_max: 8,
            seed,
            force_no_winner: false,
            strength_low: 0.55,
            strength_high: 0.95,
            tolerance: prefgame::solver::SOLVER_TOLERANCE,
        }
    }

    fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if !(2 <= self.n_min && self.n_min <= self.n_max && self.n_max <= MAX_N) {
            return Err(CliError::Usage(format!(
                "need 2 <= n-min <= n-max <= {MAX_N}, got [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        GeneratorConfig { n: self.n_min, seed: 0, strength_low: self.strength_low, strength_high: self.strength_high, force_no_winner: false }
            .validate()?;
        if self.force_no_winner && self.n_min < 3 {
            return Err(CliError::Usage("--no-winner needs n-min >= 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: u64,
    pub seed: u64,
    pub psi: MappingSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub force_no_winner: bool,
    pub strength_low: f64,
    pub strength_high: f64,
    pub violations_condorcet: u64,
    pub violations_smith: u64,
    pub violations_mixed: u64,
    pub worst_mass_outside_smith: f64,
    /// Omitted under `--no-timing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl MonteCarloSummary {
    pub fn violations(&self) -> u64 {
        self.violations_condorcet + self.violations_smith + self.violations_mixed
    }
}

/// Everything needed to replay one offending trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub n: usize,
    pub tournament_seed: u64,
    pub preferences: PreferenceMatrix,
    pub nash: NashReport,
    pub verdict: ConsistencyVerdict,
}

impl TrialRecord {
    pub fn condorcet_violation(&self) -> bool {
        self.verdict.condorcet_consistent == Some(false)
    }

    pub fn smith_violation(&self) -> bool {
        !self.verdict.smith_consistent
    }

    /// No Condorcet winner, yet a pure solution.
    pub fn mixed_violation(&self) -> bool {
        self.verdict.condorcet_winner.is_none() && !self.verdict.is_mixed
    }

    pub fn violates(&self) -> bool {
        self.condorcet_violation() || self.smith_violation() || self.mixed_violation()
    }
}

/// Runs trial `index`: its size and tournament seed come from ChaCha stream
/// `index` of the master seed, so results do not depend on scheduling.
pub fn run_trial(cfg: &MonteCarloConfig, index: u64) -> CliResult<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, index);
    let n = rng.gen_range(cfg.n_min..=cfg.n_max);
    let tournament_seed: u64 = rng.gen();
    let gen = GeneratorConfig {
        n,
        seed: tournament_seed,
        strength_low: cfg.strength_low,
        strength_high: cfg.strength_high,
        force_no_winner: cfg.force_no_winner,
    };
    let preferences = random_tournament(&gen)?;
    let payoff = apply_mapping(&preferences, &cfg.psi)?;
    let nash = solve_maximin(&payoff, cfg.tolerance)?;
    let verdict = consistency_verdict(&preferences, &nash, DEFAULT_SUPPORT_THRESHOLD)?;
    Ok(TrialRecord { index, n, tournament_seed, preferences, nash, verdict })
}

/// Runs every trial in parallel and folds the records in index order.
/// Returns the summary (without timing) and the violating trials.
pub fn monte_carlo(cfg: &MonteCarloConfig) -> CliResult<(MonteCarloSummary, Vec<TrialRecord>)> {
    cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<CliResult<_>>()?;

    let mut summary = MonteCarloSummary {
        trials: cfg.trials,
        seed: cfg.seed,
        psi: cfg.psi.clone(),
        n_min: cfg.n_min,
        n_max: cfg.n_max,
        force_no_winner: cfg.force_no_winner,
        strength_low: cfg.strength_low,
        strength_high: cfg.strength_high,
        violations_condorcet: 0,
        violations_smith: 0,
        violations_mixed: 0,
        worst_mass_outside_smith: 0.0,
        elapsed_ms: None,
    };
    let mut witnesses = Vec::new();
    for r in records {
        summary.violations_condorcet += r.condorcet_violation() as u64;
        summary.violations_smith += r.smith_violation() as u64;
        summary.violations_mixed += r.mixed_violation() as u64;
        summary.worst_mass_outside_smith = summary.worst_mass_outside_smith.max(r.verdict.mass_outside_smith);
        if r.violates() {
            witnesses.push(r);
        }
    }
    log::info!(
        "{} trials, {} with a violation",
        summary.trials,
        witnesses.len()
    );
    Ok((summary, witnesses))
}

/// Runs the harness and stamps the wall-clock time unless `timing` is off.
pub fn monte_carlo_timed(cfg: &MonteCarloConfig, timing: bool) -> CliResult<(MonteCarloSummary, Vec<TrialRecord>)> {
    let start = Instant::now();
    let (mut summary, witnesses) = monte_carlo(cfg)?;
    if timing {
        summary.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok((summary, witnesses))
}

/// Writes each record to `dir/trial_<index>.json`.
pub fn dump_witnesses(dir: &Path, records: &[TrialRecord]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    for r in records {
        let path = dir.join(format!("trial_{}.json", r.index));
        let text = serde_json::to_string_pretty(r)
            .map_err(|source| CliError::Json { what: path.display().to_string(), source })?;
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_violations() {
        let (s, w) = monte_carlo(&MonteCarloConfig::new(MappingSpec::identity(), 60, 42)).unwrap();
        assert_eq!(s.violations(), 0);
        assert!(w.is_empty());
        assert!(s.worst_mass_outside_smith <= 1e-6);
    }

    #[test]
    fn single_trial_bounds() {
        let (s, _) = monte_carlo(&MonteCarloConfig::new(MappingSpec::identity(), 1, 7)).unwrap();
        assert_eq!(s.trials, 1);
        assert!(s.violations_condorcet <= 1 && s.violations_smith <= 1 && s.violations_mixed <= 1);
    }

    #[test]
    fn trials_replay() {
        let cfg = MonteCarloConfig::new(MappingSpec::log_odds(), 5, 9);
        assert_eq!(run_trial(&cfg, 3).unwrap(), run_trial(&cfg, 3).unwrap());
        let (a, _) = monte_carlo(&cfg).unwrap();
        let (b, _) = monte_carlo(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut cfg = MonteCarloConfig::new(MappingSpec::identity(), 5, 0);
        cfg.n_max = 11;
        assert!(matches!(monte_carlo(&cfg), Err(CliError::Usage(_))));
        cfg.n_max = 4;
        cfg.n_min = 2;
        cfg.force_no_winner = true;
        assert!(matches!(monte_carlo(&cfg), Err(CliError::Usage(_))));
        cfg.trials = 0;
        assert!(monte_carlo(&cfg).is_err());
    }
}
