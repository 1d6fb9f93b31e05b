//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any failure.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use prefgame::generators::{
    game_four, game_six, mixture_weights, random_tournament, trial_rng, GeneratorConfig,
};
use prefgame::mapping::{symmetric_extension, MappingSpec};
use prefgame::matching::{
    construction_one, construction_two, kkt_verify, pm_gap, ratio_payoff, RatioFunction,
    RatioPayoffSpec, KKT_TOLERANCE,
};
use prefgame::model::{apply_mapping, PayoffMatrix, Policy, PreferenceMatrix, DEFAULT_SUPPORT_THRESHOLD};
use prefgame::social_choice::{condorcet_winner, consistency_verdict, smith_decomposition};
use prefgame::solver::{best_response_gap, enumerate_equilibria, solve_maximin, SOLVER_TOLERANCE};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>, ctx: &str) -> Result<T, String> {
    r.map_err(|e| format!("{ctx}: {e:?}"))
}

/// Symmetric extension of a random strictly increasing piecewise-linear base on [0, 1/2].
fn random_symmetric_mapping(rng: &mut ChaCha8Rng) -> MappingSpec {
    let k = rng.gen_range(2..=5);
    let mut points = vec![(0.0, rng.gen_range(-2.0..0.0))];
    for i in 1..=k {
        let y = points[i - 1].1 + rng.gen_range(0.05..1.5);
        points.push((0.5 * i as f64 / k as f64, y));
    }
    // only [0, 1/2] is used; the tail just completes the domain
    points.push((1.0, points[k].1 + 1.0));
    symmetric_extension(MappingSpec::piecewise_linear(points).unwrap()).unwrap()
}

fn mapping_set(seed: u64) -> Vec<(String, MappingSpec)> {
    let mut rng = trial_rng(seed, 0);
    vec![
        ("identity".into(), MappingSpec::identity()),
        ("log_odds".into(), MappingSpec::log_odds()),
        ("symmetric_extension".into(), random_symmetric_mapping(&mut rng)),
    ]
}

fn tournaments(count: usize, master: u64, n_lo: usize, n_hi: usize, want_winner: bool) -> Vec<PreferenceMatrix> {
    let mut out = Vec::new();
    let mut index = 0;
    while out.len() < count {
        let mut rng = trial_rng(master, index);
        index += 1;
        let n = rng.gen_range(n_lo..=n_hi);
        let mut cfg = GeneratorConfig::new(n, rng.gen());
        cfg.force_no_winner = !want_winner;
        let p = random_tournament(&cfg).unwrap();
        if condorcet_winner(&p).is_some() == want_winner {
            out.push(p);
        }
    }
    out
}

fn criterion_1() -> Check {
    let prefs = tournaments(500, 101, 2, 8, true);
    for (name, psi) in mapping_set(11) {
        for (trial, p) in prefs.iter().enumerate() {
            let w = condorcet_winner(p).unwrap();
            let nash = ok(solve_maximin(&ok(apply_mapping(p, &psi), name.as_str())?, SOLVER_TOLERANCE), "solve")?;
            let mass = nash.row_strategy.get(w);
            ensure(mass >= 1.0 - 1e-6, || format!("{name}, trial {trial}: winner mass {mass}"))?;
        }
    }
    Ok("500 tournaments x 3 mappings, winner mass >= 1 - 1e-6".into())
}

fn criterion_2() -> Check {
    let prefs = tournaments(500, 202, 3, 8, false);
    let mut set = mapping_set(22);
    set.push(("example2_step".into(), MappingSpec::piecewise_constant(-1.0, 0.0, 2.0).unwrap()));
    let mut worst: f64 = 0.0;
    for (name, psi) in &set {
        for (trial, p) in prefs.iter().enumerate() {
            let nash = ok(solve_maximin(&ok(apply_mapping(p, psi), name)?, SOLVER_TOLERANCE), "solve")?;
            let v = ok(consistency_verdict(p, &nash, DEFAULT_SUPPORT_THRESHOLD), "verdict")?;
            worst = worst.max(v.mass_outside_smith);
            ensure(v.mass_outside_smith <= 1e-6, || {
                format!("{name}, trial {trial}: mass outside S_1 {}", v.mass_outside_smith)
            })?;
            ensure(v.support.len() > 1, || format!("{name}, trial {trial}: pure solution {:?}", v.support))?;
        }
    }
    Ok(format!("500 cyclic tournaments x 4 mappings, worst mass outside S_1 {worst:.2e}, all mixed"))
}

fn criterion_3() -> Check {
    let psi = MappingSpec::piecewise_linear(vec![(0.0, -4.5), (0.5, 0.5), (1.0, 1.0)]).unwrap();
    let a = ok(game_four(&psi, 0.9, 0.55), "game")?;
    let nash = ok(solve_maximin(&a, SOLVER_TOLERANCE), "solve")?;
    let mass = nash.row_strategy.get(3);
    ensure(mass >= 1.0 - 1e-6, || format!("mass on response 4 is {mass}"))?;
    let delta4 = Policy::pure(4, 3).unwrap();
    let cycle = Policy::uniform_on(4, &[0, 1, 2]).unwrap();
    let gap = ok(best_response_gap(&a, &delta4, &cycle), "gap")?;
    ensure(gap <= 1e-8, || format!("best-response gap {gap}"))?;
    let equilibria = ok(enumerate_equilibria(&a, 8), "enumerate")?;
    ensure(!equilibria.is_empty(), || "enumeration found nothing".into())?;
    for e in &equilibria {
        ensure((e.value - nash.value).abs() <= 1e-8, || format!("value {} vs {}", e.value, nash.value))?;
        ensure(e.row.get(3) >= 1.0 - 1e-6, || format!("enumerated row strategy {:?}", e.row.weights()))?;
    }
    let d = ok(smith_decomposition(&prefgame::generators::table_four_preferences(0.9, 0.55).unwrap()), "smith")?;
    ensure(!d.smith_set().contains(&3), || "response 4 inside S_1".into())?;
    Ok(format!("mass {mass:.9} on response 4, gap {gap:.1e}, {} enumerated equilibria agree", equilibria.len()))
}

fn criterion_4() -> Check {
    let psi = MappingSpec::polynomial(vec![1.0, -3.0, 4.0]).unwrap();
    let f = |t: f64| t + 4.0 * (t - 0.5) * (t - 0.5);
    let s = f(0.5) + f(0.9) + f(0.1);
    // mu1 (S - 3 f(t2)) - mu2 (S - 3 f(1 - t2)) = 0, mu1 + mu2 = 1, by Cramer's rule
    let (a11, a12) = (s - 3.0 * f(0.6), -(s - 3.0 * f(0.4)));
    let det = a11 * 1.0 - a12 * 1.0;
    let oracle_mu1 = (0.0 * 1.0 - a12 * 1.0) / det;
    let (mu, mu_prime) = ok(mixture_weights(&psi, 0.9, 0.6), "mixture")?;
    let mu1: f64 = mu.weights()[..3].iter().sum();
    ensure((mu1 - oracle_mu1).abs() <= 1e-12, || format!("mu1 {mu1} vs oracle {oracle_mu1}"))?;
    ensure((mu1 - 0.62931).abs() <= 5e-6, || format!("mu1 {mu1}"))?;
    let a = ok(game_six(&psi, 0.9, 0.6), "game")?;
    let gap = ok(best_response_gap(&a, &mu, &mu_prime), "gap")?;
    ensure(gap <= 1e-8, || format!("gap {gap}"))?;
    Ok(format!("mu1 = {mu1:.6}, gap {gap:.1e}"))
}

fn random_target(rng: &mut ChaCha8Rng, n: usize) -> Policy {
    Policy::from_weights((0..n).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
}

fn criterion_5() -> Check {
    let mut worst: f64 = 0.0;
    for n in 2..=10 {
        let mut rng = trial_rng(505, n as u64);
        for trial in 0..100 {
            let target = random_target(&mut rng, n);
            let sq: f64 = target.weights().iter().map(|w| w * w).sum();
            for (label, a, expected) in [
                ("I", construction_one(&target).unwrap(), sq),
                ("II", construction_two(&target).unwrap(), 0.0),
            ] {
                let cert = ok(kkt_verify(&a, &target, KKT_TOLERANCE), "kkt")?;
                ensure(cert.feasible, || format!("construction {label}, n={n}, trial {trial}: KKT infeasible"))?;
                let value = ok(solve_maximin(&a, SOLVER_TOLERANCE), "solve")?.value;
                let err = (value - expected).abs();
                worst = worst.max(err);
                ensure(err <= 1e-8, || format!("construction {label}, n={n}, trial {trial}: value {value} vs {expected}"))?;
            }
        }
    }
    Ok(format!("900 targets x 2 constructions feasible, worst value error {worst:.1e}"))
}

fn criterion_6() -> Check {
    let spec = RatioPayoffSpec { f: RatioFunction::Logistic, diagonal_c: 0.5 };
    let target = Policy::new(vec![0.6, 0.3, 0.1]).unwrap();
    let probe = ok(pm_gap(&spec, &target), "probe")?;
    ensure((probe.gap - 0.4).abs() <= 1e-6, || format!("pm_gap {}", probe.gap))?;
    ensure(!probe.kkt_feasible, || "logistic design passed KKT".into())?;
    let mut rng = trial_rng(606, 0);
    for trial in 0..50 {
        let n = rng.gen_range(2..=10);
        let target = random_target(&mut rng, n);
        let spec = RatioPayoffSpec::degenerate(0.5, 1.0, n);
        let a = ok(ratio_payoff(&spec, &target), "payoff")?;
        let cert = ok(kkt_verify(&a, &target, KKT_TOLERANCE), "kkt")?;
        ensure(cert.feasible, || format!("degenerate design, trial {trial} (n={n}): KKT infeasible"))?;
    }
    Ok(format!("pm_gap {:.9}, KKT infeasible; 50 matched degenerate designs feasible", probe.gap))
}

fn criterion_7() -> Check {
    let mut rng = trial_rng(707, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = rng.gen_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
        let a = PayoffMatrix::new(rows).unwrap();
        let nash = ok(solve_maximin(&a, SOLVER_TOLERANCE), "solve")?;
        let equilibria = ok(enumerate_equilibria(&a, 6), "enumerate")?;
        let first = equilibria.first().ok_or_else(|| format!("trial {trial}: no equilibrium enumerated"))?;
        let diff = (nash.value - first.value).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-8, || format!("trial {trial}: LP {} vs enumeration {}", nash.value, first.value))?;
        // optimal row strategies are those guaranteeing the enumerated value
        let floor = a.column_payoffs(&nash.row_strategy).unwrap().into_iter().fold(f64::INFINITY, f64::min);
        ensure(floor >= first.value - 1e-8, || format!("trial {trial}: LP strategy guarantees {floor}"))?;
        let gap = ok(best_response_gap(&a, &nash.row_strategy, &first.col), "gap")?;
        ensure(gap <= 1e-8, || format!("trial {trial}: gap {gap}"))?;
    }
    Ok(format!("200 games, worst value difference {worst:.1e}"))
}

/// Smallest set whose members all beat every outsider.
fn brute_force_smith(p: &PreferenceMatrix) -> Vec<usize> {
    let n = p.n();
    let mut best: Option<Vec<usize>> = None;
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let dominant = members
            .iter()
            .all(|&i| (0..n).filter(|j| mask & (1 << j) == 0).all(|j| p.beats(i, j)));
        if dominant && best.as_ref().is_none_or(|b| members.len() < b.len()) {
            best = Some(members);
        }
    }
    best.unwrap()
}

fn criterion_8() -> Check {
    let mut rng = trial_rng(808, 0);
    for trial in 0..200 {
        let n = rng.gen_range(1..=7);
        let p = random_tournament(&GeneratorConfig::new(n, rng.gen())).unwrap();
        let d = ok(smith_decomposition(&p), "smith")?;
        let oracle = brute_force_smith(&p);
        ensure(d.smith_set() == oracle.as_slice(), || {
            format!("trial {trial}: {:?} vs brute force {:?}", d.smith_set(), oracle)
        })?;
    }
    Ok("200 tournaments match subset enumeration".into())
}

fn criterion_9() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_prefgame"))
            .args(["monte-carlo", "--seed", "42", "--trials", "100", "--no-timing"])
            .output()
            .map_err(|e| format!("spawn: {e}"))
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.code() == Some(0), || format!("exit {:?}: {}", a.status, String::from_utf8_lossy(&a.stderr)))?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("condorcet consistency", criterion_1),
        ("smith consistency and mixedness", criterion_2),
        ("necessity on the four-response game", criterion_3),
        ("six-response equalizer", criterion_4),
        ("KKT constructions", criterion_5),
        ("preference-matching impossibility probe", criterion_6),
        ("LP vs support enumeration", criterion_7),
        ("smith set minimality", criterion_8),
        ("monte-carlo determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
