//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line with
//! the measured numbers (visible with `--nocapture`).

use std::sync::OnceLock;
use std::time::Instant;

use lhedge::env::{EnvSpec, GameSpec, NormalFormGame};
use lhedge::harness::{run, run_with, Algorithm, ExperimentConfig, PredictorSpec, RunSummary};
use lhedge::vector::dot;
use lhedge::{Hedger, PhiKind, PhiRegret, Potential, PotentialSpec, Predictor, RoundRecord, StepsizeSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn report(id: &str, ok: bool, detail: String) {
    println!("criterion {id:<4} {}  {detail}", if ok { "PASS" } else { "FAIL" });
}

// ---------------------------------------------------------------- grid

const GRID_ROUNDS: usize = 10_000;

#[derive(Debug, Default)]
struct GridCheck {
    configs: usize,
    plus_configs: usize,
    rounds_checked: usize,
    blackwell_failures: Vec<String>,
    max_blackwell: f64,
    growth_failures: Vec<String>,
    monotone_failures: Vec<String>,
    regret_failures: Vec<String>,
    min_regret_slack: f64,
    seconds: f64,
}

fn grid_configs() -> Vec<ExperimentConfig> {
    let families = [
        PotentialSpec::Polynomial { p: 2.0 },
        PotentialSpec::Subquadratic { p: 1.5 },
        PotentialSpec::Exponential,
    ];
    let schedules = [
        StepsizeSchedule::Constant { eta: 1.0 },
        StepsizeSchedule::InverseSqrt { c: 1.0 },
        StepsizeSchedule::Adaptive { eta1: 0.1 },
    ];
    let predictors = [PredictorSpec::Zero, PredictorSpec::LastInstant, PredictorSpec::Average];
    let envs = [EnvSpec::AdversarialRandom { n: 3 }, EnvSpec::AdversarialWorstCaseSign { n: 3 }];
    let mut out = Vec::new();
    for family in families {
        for phi in [PhiKind::External, PhiKind::Internal, PhiKind::Swap] {
            for schedule in schedules {
                for predictor in predictors {
                    for env in &envs {
                        let mut algorithms = vec![Algorithm::PhiRegret];
                        if family.positive_invariant() {
                            algorithms.push(Algorithm::PhiRegretPlus);
                        }
                        for algorithm in algorithms {
                            let mut cfg = ExperimentConfig::new(env.clone(), family);
                            cfg.algorithm = algorithm;
                            cfg.phi_kind = phi;
                            cfg.schedule = schedule;
                            cfg.predictor = predictor;
                            cfg.rounds = GRID_ROUNDS;
                            cfg.seed = out.len() as u64;
                            out.push(cfg);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Checks every round of one config from its records alone; the measured
/// regret is recomputed from the summed instantaneous regret vectors.
fn check_config(cfg: &ExperimentConfig) -> GridCheck {
    let label = cfg.label();
    let mut c = GridCheck { max_blackwell: f64::NEG_INFINITY, min_regret_slack: f64::INFINITY, ..Default::default() };
    let mut cumulative: Vec<f64> = Vec::new();
    let mut prev_eta = None;
    let mut summed = |rec: &RoundRecord| {
        if cumulative.is_empty() {
            cumulative = vec![0.0; rec.instant_regret.len()];
        }
        for (a, b) in cumulative.iter_mut().zip(&rec.instant_regret) {
            *a += b;
        }
        cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let summary = run_with(cfg, None, |_, rec| {
        c.rounds_checked += 1;
        if !rec.fallback {
            c.max_blackwell = c.max_blackwell.max(rec.blackwell_ip);
            if rec.blackwell_ip > 1e-9 {
                c.blackwell_failures.push(format!("{label} t={} ip={:e}", rec.t, rec.blackwell_ip));
            }
        }
        let bound = rec.audit.potential_bound;
        if rec.potential_value > bound + 1e-9 * bound.abs().max(1.0) {
            c.growth_failures.push(format!("{label} t={} F={} bound={}", rec.t, rec.potential_value, bound));
        }
        if let Some(prev) = prev_eta {
            if rec.eta > prev + 1e-15 {
                c.monotone_failures.push(format!("{label} t={} eta increased", rec.t));
            }
        }
        prev_eta = Some(rec.eta);
        if !rec.audit.monotone_ok {
            c.monotone_failures.push(format!("{label} t={}", rec.t));
        }
        let regret = summed(rec);
        c.min_regret_slack = c.min_regret_slack.min(rec.audit.regret_bound - regret);
        if regret > rec.audit.regret_bound + 1e-6 || (regret - rec.measured_regret).abs() > 1e-9 * (1.0 + regret.abs()) {
            c.regret_failures.push(format!(
                "{label} t={} regret={regret} recorded={} bound={}",
                rec.t, rec.measured_regret, rec.audit.regret_bound
            ));
        }
    })
    .unwrap_or_else(|e| panic!("{label}: {e}"));
    c.configs = 1;
    c.plus_configs = usize::from(cfg.algorithm == Algorithm::PhiRegretPlus);
    if !summary.audit_passed {
        c.growth_failures.push(format!("{label}: auditor reported {} violations", summary.violations));
    }
    c
}

fn grid() -> &'static GridCheck {
    static GRID: OnceLock<GridCheck> = OnceLock::new();
    GRID.get_or_init(|| {
        let start = Instant::now();
        let mut total = grid_configs().par_iter().map(check_config).reduce(
            || GridCheck { max_blackwell: f64::NEG_INFINITY, min_regret_slack: f64::INFINITY, ..Default::default() },
            |mut a, b| {
                a.configs += b.configs;
                a.plus_configs += b.plus_configs;
                a.rounds_checked += b.rounds_checked;
                a.blackwell_failures.extend(b.blackwell_failures);
                a.growth_failures.extend(b.growth_failures);
                a.monotone_failures.extend(b.monotone_failures);
                a.regret_failures.extend(b.regret_failures);
                a.max_blackwell = a.max_blackwell.max(b.max_blackwell);
                a.min_regret_slack = a.min_regret_slack.min(b.min_regret_slack);
                a
            },
        );
        total.seconds = start.elapsed().as_secs_f64();
        total
    })
}

#[test]
fn criterion_01_blackwell_condition_on_grid() {
    let g = grid();
    let ok = g.configs >= 50 && g.blackwell_failures.is_empty() && g.seconds < 300.0;
    report(
        "1",
        ok,
        format!("{} configs, {} rounds, max ip {:.2e}, {:.1}s", g.configs, g.rounds_checked, g.max_blackwell, g.seconds),
    );
    assert!(ok, "{:?}", &g.blackwell_failures[..g.blackwell_failures.len().min(5)]);
}

#[test]
fn criterion_02_potential_growth_audits_on_grid() {
    let g = grid();
    let ok = g.growth_failures.is_empty() && g.monotone_failures.is_empty() && g.plus_configs > 0;
    report("2", ok, format!("{} configs ({} plus mode), every round within relative 1e-9", g.configs, g.plus_configs));
    assert!(ok, "{:?} {:?}", &g.growth_failures[..g.growth_failures.len().min(5)], &g.monotone_failures[..g.monotone_failures.len().min(5)]);
}

#[test]
fn criterion_03_regret_below_bound_on_grid() {
    let g = grid();
    let ok = g.regret_failures.is_empty();
    report("3", ok, format!("smallest bound - regret {:.4e}", g.min_regret_slack));
    assert!(ok, "{:?}", &g.regret_failures[..g.regret_failures.len().min(5)]);
}

// ---------------------------------------------------------------- oracles

fn loss_stream(n: usize, rounds: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rounds).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect()
}

fn normalized_or_uniform(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / w.len() as f64; w.len()]
    }
}

/// Textbook regret matching; `plus` clips the accumulated regrets each round.
fn regret_matching(losses: &[Vec<f64>], plus: bool) -> Vec<Vec<f64>> {
    let n = losses[0].len();
    let mut r = vec![0.0; n];
    let mut iterates = Vec::new();
    for l in losses {
        let pos: Vec<f64> = r.iter().map(|v: &f64| v.max(0.0)).collect();
        let x = normalized_or_uniform(&pos);
        let lx = dot(l, &x);
        for i in 0..n {
            r[i] += lx - l[i];
            if plus {
                r[i] = r[i].max(0.0);
            }
        }
        iterates.push(x);
    }
    iterates
}

fn hedge(losses: &[Vec<f64>], eta: f64) -> Vec<Vec<f64>> {
    let n = losses[0].len();
    let mut s = vec![0.0; n];
    let mut iterates = Vec::new();
    for l in losses {
        let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = s.iter().map(|v| (eta * (v - top)).exp()).collect();
        let x = normalized_or_uniform(&w);
        let lx = dot(l, &x);
        for i in 0..n {
            s[i] += lx - l[i];
        }
        iterates.push(x);
    }
    iterates
}

fn phi_iterates(potential: Potential, eta: f64, plus: bool, losses: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let phi = PhiKind::External.build(losses[0].len()).unwrap();
    let mut learner =
        PhiRegret::new(phi, potential, StepsizeSchedule::Constant { eta }, Predictor::Zero, plus).unwrap();
    losses
        .iter()
        .map(|l| {
            let x = learner.next_iterate(None).unwrap().into_inner();
            learner.observe_loss(l).unwrap();
            x
        })
        .collect()
}

fn hedger_iterates(potential: Potential, eta: f64, losses: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut learner = Hedger::new(potential, StepsizeSchedule::Constant { eta }, Predictor::Zero).unwrap();
    losses
        .iter()
        .map(|l| {
            let x = learner.next_iterate(None).unwrap().into_inner();
            learner.observe_loss(l).unwrap();
            x
        })
        .collect()
}

fn max_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
}

#[test]
fn criterion_04_equivalence_oracles() {
    let n = 5;
    let losses = loss_stream(n, 10_000, 2024);
    let poly = || Potential::polynomial(2.0, n).unwrap();
    let rm = regret_matching(&losses, false);
    let rm_plus = regret_matching(&losses, true);
    let eta = 0.05;
    let hg = hedge(&losses, eta);

    let devs = [
        ("rm", max_deviation(&phi_iterates(poly(), 1.0, false, &losses), &rm)),
        ("rm+", max_deviation(&phi_iterates(poly(), 1.0, true, &losses), &rm_plus)),
        ("hedge", max_deviation(&phi_iterates(Potential::exponential(n).unwrap(), eta, false, &losses), &hg)),
        ("hedger rm", max_deviation(&hedger_iterates(poly(), 1.0, &losses), &rm)),
        ("hedger hedge", max_deviation(&hedger_iterates(Potential::exponential(n).unwrap(), eta, &losses), &hg)),
    ];
    let ok = devs.iter().all(|(_, d)| *d <= 1e-12);
    report("4", ok, devs.iter().map(|(k, d)| format!("{k} {d:.1e}")).collect::<Vec<_>>().join(", "));
    assert!(ok, "{devs:?}");
}

// ---------------------------------------------------------------- path length

#[test]
fn criterion_05_path_length_bound() {
    let n = 10;
    let b: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / 55.0).collect();
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut cfg = ExperimentConfig::new(
        EnvSpec::FixedSmoothLoss { m, b: b.clone(), norms: lhedge::NormPair::euclidean() },
        PotentialSpec::Polynomial { p: 2.0 },
    );
    cfg.predictor = PredictorSpec::LastInstant;
    cfg.rounds = 10_000;

    // C̃ = (L + ‖u‖ D L + K)² with L = 1 for M = I, D = 1 on the simplex and
    // K the largest gradient norm over the vertices.
    let k = (0..n)
        .map(|v| (0..n).map(|i| (f64::from(u8::from(i == v)) - b[i]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let c_tilde = (1.0 + (n as f64).sqrt() + k).powi(2);

    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut movement = 0.0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut cumulative = vec![0.0; n];
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    let summary = run_with(&cfg, None, |_, rec| {
        for (c, s) in cumulative.iter_mut().zip(&rec.instant_regret) {
            *c += s;
        }
        if let Some((s, x)) = &prev {
            let dx = sq(&rec.iterate, x);
            let excess = sq(&rec.instant_regret, s) - c_tilde * dx;
            worst = worst.max(excess);
            violations += usize::from(excess > 1e-9);
            movement += dx;
        }
        prev = Some((rec.instant_regret.clone(), rec.iterate.clone()));
    })
    .unwrap();
    let regret = cumulative.iter().copied().fold(0.0f64, f64::max);
    let bound = (c_tilde * movement).sqrt();
    let tracker = summary.path_length.as_ref().expect("path tracker active");
    let ok = violations == 0
        && regret <= bound + 1e-6
        && tracker.passed()
        && (tracker.constant - c_tilde).abs() <= 1e-9 * c_tilde;
    report(
        "5",
        ok,
        format!("C~ {c_tilde:.4}, worst excess {worst:.2e}, regret {regret:.4} <= {bound:.4}"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- rate

#[test]
fn criterion_06_sqrt_t_rate() {
    let start = Instant::now();
    let horizons = [1_000usize, 10_000, 100_000];
    let seeds: Vec<u64> = (0..16).collect();
    let per_seed: Vec<[f64; 3]> = seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = ExperimentConfig::new(EnvSpec::AdversarialRandom { n: 8 }, PotentialSpec::Polynomial { p: 2.0 });
            cfg.rounds = horizons[2];
            cfg.seed = seed;
            cfg.audit = false;
            let mut at = [0.0; 3];
            run_with(&cfg, None, |_, rec| {
                if let Some(k) = horizons.iter().position(|&h| h == rec.t) {
                    at[k] = rec.measured_regret;
                }
            })
            .unwrap();
            at
        })
        .collect();
    let mean: Vec<f64> = (0..3).map(|k| per_seed.iter().map(|r| r[k]).sum::<f64>() / seeds.len() as f64).collect();
    let xs: Vec<f64> = horizons.iter().map(|&h| (h as f64).ln()).collect();
    let ys: Vec<f64> = mean.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let c = mean[0] / (horizons[0] as f64).sqrt();
    let ratios: Vec<f64> = horizons.iter().zip(&mean).map(|(&h, r)| r / (c * (h as f64).sqrt())).collect();
    let secs = start.elapsed().as_secs_f64();
    let ok = slope <= 0.55 && secs < 30.0;
    report("6", ok, format!("slope {slope:.3}, R/(c sqrt T) {ratios:.3?}, {secs:.1}s"));
    assert!(ok);
}

// ---------------------------------------------------------------- games

fn game_run(env: EnvSpec, predictor: PredictorSpec) -> RunSummary {
    let mut cfg = ExperimentConfig::new(env, PotentialSpec::Polynomial { p: 2.0 });
    cfg.predictor = predictor;
    cfg.rounds = 100_000;
    run(&cfg, None).unwrap()
}

#[test]
fn criterion_07_rps_self_play() {
    let biased = NormalFormGame::zero_sum(&[vec![0.0, -1.0, 2.0], vec![1.0, 0.0, -1.0], vec![-2.0, 1.0, 0.0]]).unwrap();
    let games = [
        ("rps", EnvSpec::MatrixGameZeroSum { game: GameSpec::RockPaperScissors }),
        ("biased rps", EnvSpec::MatrixGameZeroSum { game: GameSpec::Inline { game: biased } }),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, env) in games {
        let optimistic = game_run(env.clone(), PredictorSpec::LastInstant).exploitability.unwrap();
        let plain = game_run(env, PredictorSpec::Zero).exploitability.unwrap();
        ok &= optimistic <= 0.02 && optimistic <= plain * 1.1 + 1e-15;
        detail.push(format!("{name}: optimistic {optimistic:.2e}, plain {plain:.2e}"));
    }
    report("7", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_08_correlated_equilibrium() {
    let mut cfg = ExperimentConfig::new(
        EnvSpec::NormalFormGame { game: GameSpec::Random { actions: vec![3, 3, 3], seed: 7 } },
        PotentialSpec::Exponential,
    );
    cfg.algorithm = Algorithm::PhiRegret;
    cfg.phi_kind = PhiKind::Internal;
    cfg.schedule = StepsizeSchedule::InverseSqrt { c: 1.0 };
    cfg.rounds = 100_000;
    let summary = run(&cfg, None).unwrap();
    let gap = summary.ce_gap.unwrap();
    let per_round = summary.players.iter().map(|p| p.final_regret).fold(f64::NEG_INFINITY, f64::max) / cfg.rounds as f64;
    let ok = gap <= 0.05 && per_round <= 0.05;
    report("8", ok, format!("ce gap {gap:.3e}, max internal regret / T {per_round:.3e}"));
    assert!(ok);
}

// ---------------------------------------------------------------- stepsize inequalities

const SUMMATION_INSTANCES: usize = 1_000;

#[test]
fn criterion_09_stepsize_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let specs = [
        PotentialSpec::Polynomial { p: 2.0 },
        PotentialSpec::Polynomial { p: 3.5 },
        PotentialSpec::Subquadratic { p: 1.5 },
        PotentialSpec::Exponential,
    ];
    let mut failures = 0;
    for spec in specs {
        for _ in 0..SUMMATION_INSTANCES {
            let d = rng.gen_range(1..10);
            let f = spec.build(d).unwrap();
            let s: Vec<f64> = (0..d).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let eta_prev = rng.gen_range(1e-3..2.0);
            let eta = eta_prev * rng.gen_range(1e-3..1.0);
            let at = |e: f64| f.value(&s.iter().map(|v| e * v).collect::<Vec<_>>());
            failures += usize::from(at(eta) > eta / eta_prev * at(eta_prev) + 1e-9);
        }
    }
    report("9a", failures == 0, format!("{} instances, {failures} failures", 4 * SUMMATION_INSTANCES));
    assert_eq!(failures, 0);
}

struct Sequence {
    c: f64,
    a0: f64,
    a: Vec<f64>,
}

fn sequences() -> Vec<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    (0..SUMMATION_INSTANCES)
        .map(|_| {
            let c = rng.gen_range(0.1..10.0);
            let a0 = rng.gen_range(1e-3..2.0 * c);
            let t = rng.gen_range(1..60);
            Sequence { c, a0, a: (0..t).map(|_| rng.gen_range(0.0..=c)).collect() }
        })
        .collect()
}

/// `Σ_t a_t f(a₀ + Σ_{i<t} a_i)` with `f = 1/√x`, and `s_{T−1}`.
fn summation_lhs(seq: &Sequence) -> (f64, f64) {
    let mut s = seq.a0;
    let mut lhs = 0.0;
    for (t, &a) in seq.a.iter().enumerate() {
        lhs += a / s.sqrt();
        if t + 1 < seq.a.len() {
            s += a;
        }
    }
    (lhs, s)
}

/// The inequality exactly as stated, integral from `a₀`. It does not hold:
/// for `T = 1` and `a₀ = a₁ = C` the left side is `√C` and the right side 0.
#[test]
#[ignore = "the stated inequality is false; run with --ignored to see it fail"]
fn criterion_09_summation_stated_form() {
    let seqs = sequences();
    let failures: Vec<(f64, f64)> = seqs
        .iter()
        .filter_map(|seq| {
            let (lhs, s_last) = summation_lhs(seq);
            let rhs = (seq.c - seq.a0) / seq.a0.sqrt() + 2.0 * (s_last.sqrt() - seq.a0.sqrt());
            (lhs > rhs + 1e-9).then_some((lhs, rhs))
        })
        .collect();
    report("9b", failures.is_empty(), format!("{} of {} instances violate the stated form", failures.len(), seqs.len()));
    assert!(failures.is_empty(), "first counterexample lhs {} > rhs {}", failures[0].0, failures[0].1);
}

/// The same inequality with the first-round integral kept, i.e. integrated
/// from 0, plus the stepsize sum it is used for.
#[test]
fn criterion_09_summation_corrected_form() {
    let mut failures = 0;
    for seq in sequences() {
        let (lhs, s_last) = summation_lhs(&seq);
        let rhs = (seq.c - seq.a0) / seq.a0.sqrt() + 2.0 * s_last.sqrt();
        failures += usize::from(lhs > rhs + 1e-9);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    for _ in 0..SUMMATION_INSTANCES {
        let c: f64 = rng.gen_range(0.1..10.0);
        let eta1 = rng.gen_range(1e-3..1.0) / c.sqrt();
        let a: Vec<f64> = (0..rng.gen_range(1..60)).map(|_| rng.gen_range(0.0..=c)).collect();
        let mut acc: f64 = 1.0 / (eta1 * eta1);
        let mut sum = 0.0;
        for &at in &a {
            sum += at / acc.sqrt();
            acc += at;
        }
        failures += usize::from(sum > 2.0 * acc.sqrt() + 1e-9);
    }
    report("9c", failures == 0, format!("{} instances, {failures} failures", 2 * SUMMATION_INSTANCES));
    assert_eq!(failures, 0);
}

// ---------------------------------------------------------------- gradients

#[test]
fn criterion_10_gradients_match_finite_differences() {
    let specs = [
        PotentialSpec::Polynomial { p: 2.0 },
        PotentialSpec::Polynomial { p: 3.0 },
        PotentialSpec::Polynomial { p: 4.5 },
        PotentialSpec::Subquadratic { p: 1.2 },
        PotentialSpec::Subquadratic { p: 1.5 },
        PotentialSpec::Subquadratic { p: 1.8 },
        PotentialSpec::Exponential,
    ];
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for spec in specs {
        for _ in 0..1_000 {
            let d = rng.gen_range(1..9);
            let f = spec.build(d).unwrap();
            // stay clear of the kinks of the positive part
            let x: Vec<f64> = (0..d)
                .map(|_| {
                    let v: f64 = rng.gen_range(0.01..3.0);
                    if rng.gen_bool(0.5) { v } else { -v }
                })
                .collect();
            let g = f.gradient(&x);
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..d {
                let mut up = x.clone();
                let mut down = x.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (f.value(&up) - f.value(&down)) / (2.0 * h);
                let err = (fd - g[i]).abs() / scale.max(1e-300);
                if scale > 0.0 {
                    worst = worst.max(err);
                }
                failures += usize::from(if scale > 0.0 { err > 1e-5 } else { fd != 0.0 });
            }
        }
    }
    report("10", failures == 0, format!("{} points, worst relative error {worst:.2e}", 7 * 1_000));
    assert_eq!(failures, 0);
}
