use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::audit::AuditSummary;
use crate::env::{path_length_constant, Environment, JointAccumulator};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::record::RoundRecord;
use crate::vector::{KahanAccumulator, Norm, NormPair};

use super::config::{Algorithm, ExperimentConfig, PredictorSpec, SelfPlay};
use super::learner::Learner;
use super::telemetry::{meta_path, PlayerMeta, TelemetryMeta, TelemetryWriter};

/// Largest joint action space for which the empirical joint distribution is
/// tracked.
pub const MAX_TRACKED_JOINT: usize = 4096;
pub const PATH_LENGTH_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerSummary {
    pub player: usize,
    pub actions: usize,
    pub final_regret: f64,
    pub bound: f64,
    pub slack: f64,
    pub max_blackwell: f64,
    pub c_bound: f64,
    pub eta1_admissible: bool,
    pub average_strategy: Vec<f64>,
    /// Largest gap between the summed telemetry and the learner's cumulative
    /// regret vector.
    pub telemetry_drift: f64,
    pub audit: AuditSummary,
}

/// Movement-based checks on a fixed smooth loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathLengthReport {
    pub norms: NormPair,
    /// `‖u‖` in the primal norm.
    pub u_norm: f64,
    pub gradient_bound: f64,
    pub gradient_lipschitz: f64,
    /// `C̃ = (L + ‖u‖ D L + K)²`.
    pub constant: f64,
    /// `Σ_{t≥2} ‖x_t − x_{t−1}‖²` in the dual norm.
    pub movement: f64,
    /// `‖s_1‖²`, not covered by the movement.
    pub first_regret_sq: f64,
    pub rounds_checked: usize,
    pub violations: usize,
    /// Largest `‖s_t − s_{t−1}‖² − C̃ ‖x_t − x_{t−1}‖²`.
    pub max_excess: f64,
    /// `D √(C̃ Σ‖x_t − x_{t−1}‖²)`; only for the quadratic potential with the
    /// Euclidean pair.
    pub regret_bound: Option<f64>,
    /// The same bound with `‖s_1‖²` added under the root.
    pub regret_bound_with_first: Option<f64>,
    pub final_regret: f64,
    pub regret_ok: bool,
}

impl PathLengthReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.regret_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub rounds: usize,
    pub players: Vec<PlayerSummary>,
    pub final_regret: f64,
    pub bound: f64,
    pub bound_slack: f64,
    pub max_blackwell: f64,
    pub audit_enabled: bool,
    pub audit_passed: bool,
    pub violations: usize,
    pub first_violation_round: Option<usize>,
    pub exploitability: Option<f64>,
    pub ce_gap: Option<f64>,
    pub path_length: Option<PathLengthReport>,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

struct AveragePredictor {
    sum: Vec<f64>,
    count: usize,
}

impl AveragePredictor {
    fn new(d: usize) -> Self {
        AveragePredictor { sum: vec![0.0; d], count: 0 }
    }

    fn add(&mut self, s: &[f64]) {
        for (a, b) in self.sum.iter_mut().zip(s) {
            *a += b;
        }
        self.count += 1;
    }

    fn mean(&self) -> Vec<f64> {
        let c = self.count.max(1) as f64;
        self.sum.iter().map(|v| v / c).collect()
    }
}

struct PathTracker {
    norms: NormPair,
    report: PathLengthReport,
    movement: KahanAccumulator,
    prev: Option<(Vec<f64>, Vec<f64>)>,
}

impl PathTracker {
    fn new(cfg: &ExperimentConfig, env: &Environment) -> Option<Self> {
        let f = env.smooth_loss()?;
        if cfg.algorithm != Algorithm::Hedger || cfg.predictor != PredictorSpec::LastInstant {
            return None;
        }
        let norms = f.norms();
        let u_norm = norms.primal.of_ones(f.dim());
        let constant = path_length_constant(f.gradient_lipschitz(), u_norm, env.diameter(), f.gradient_bound());
        Some(PathTracker {
            norms,
            report: PathLengthReport {
                norms,
                u_norm,
                gradient_bound: f.gradient_bound(),
                gradient_lipschitz: f.gradient_lipschitz(),
                constant,
                movement: 0.0,
                first_regret_sq: 0.0,
                rounds_checked: 0,
                violations: 0,
                max_excess: f64::NEG_INFINITY,
                regret_bound: None,
                regret_bound_with_first: None,
                final_regret: 0.0,
                regret_ok: true,
            },
            movement: KahanAccumulator::default(),
            prev: None,
        })
    }

    fn observe(&mut self, rec: &RoundRecord) {
        let sq = |n: Norm, a: &[f64], b: &[f64]| {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let v = n.eval(&d);
            v * v
        };
        match &self.prev {
            None => {
                let v = self.norms.primal.eval(&rec.instant_regret);
                self.report.first_regret_sq = v * v;
            }
            Some((s, x)) => {
                let ds = sq(self.norms.primal, &rec.instant_regret, s);
                let dx = sq(self.norms.dual, &rec.iterate, x);
                let excess = ds - self.report.constant * dx;
                self.report.max_excess = self.report.max_excess.max(excess);
                self.report.violations += usize::from(excess > PATH_LENGTH_SLACK);
                self.report.rounds_checked += 1;
                self.movement.add(dx);
            }
        }
        self.prev = Some((rec.instant_regret.clone(), rec.iterate.clone()));
    }

    fn finish(mut self, cfg: &ExperimentConfig, learner: &Learner, diameter: f64) -> PathLengthReport {
        let r = &mut self.report;
        r.movement = self.movement.value();
        r.final_regret = learner.measured_regret().max(0.0);
        let quadratic = matches!(cfg.potential, PotentialSpec::Polynomial { p } if p == 2.0);
        if quadratic && self.norms == NormPair::euclidean() {
            let bound = diameter * (r.constant * r.movement).sqrt();
            r.regret_bound = Some(bound);
            r.regret_bound_with_first = Some(diameter * (r.first_regret_sq + r.constant * r.movement).sqrt());
            r.regret_ok = r.final_regret <= bound + 1e-6;
        }
        if r.rounds_checked == 0 {
            r.max_excess = 0.0;
        }
        self.report
    }
}

/// Runs an experiment, writing telemetry to `out` when given.
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunSummary> {
    run_with(cfg, out, |_, _| {})
}

/// Like [`run`], also handing every completed round to `sink` as
/// `(player, record)`.
pub fn run_with<F>(cfg: &ExperimentConfig, out: Option<&Path>, sink: F) -> Result<RunSummary>
where
    F: FnMut(usize, &RoundRecord),
{
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let file = BufWriter::new(File::create(path)?);
            let (summary, meta) = run_to_writer(cfg, Some(file), sink)?;
            std::fs::write(meta_path(path), serde_json::to_string_pretty(&meta)?)?;
            Ok(summary)
        }
        None => Ok(run_to_writer::<File, F>(cfg, None, sink)?.0),
    }
}

/// Runs an experiment streaming CSV telemetry into `writer`.
pub fn run_to_writer<W, F>(
    cfg: &ExperimentConfig,
    writer: Option<W>,
    mut sink: F,
) -> Result<(RunSummary, TelemetryMeta)>
where
    W: Write,
    F: FnMut(usize, &RoundRecord),
{
    let start = Instant::now();
    let warnings = cfg.validate()?;
    let mut env = cfg.environment.build(cfg.seed)?;
    let actions = env.actions();
    let players = actions.len();
    let loss_bound = env.loss_bound();
    let mut learners =
        actions.iter().map(|&n| Learner::build(cfg, n, loss_bound)).collect::<Result<Vec<_>>>()?;
    let meta = TelemetryMeta {
        label: cfg.label(),
        players: learners.iter().map(|l| PlayerMeta::from_context(&l.bound_context())).collect(),
    };
    let mut writer = match writer {
        Some(w) => Some(TelemetryWriter::new(w, actions.iter().copied().max().unwrap_or(0))?),
        None => None,
    };
    let mut averages: Vec<AveragePredictor> = learners.iter().map(|l| AveragePredictor::new(l.regret_dim())).collect();
    let mut strategy_sums: Vec<Vec<f64>> = actions.iter().map(|&n| vec![0.0; n]).collect();
    let mut telemetry_sums: Vec<Vec<KahanAccumulator>> =
        learners.iter().map(|l| vec![KahanAccumulator::default(); l.regret_dim()]).collect();
    let game = env.game().cloned();
    let mut joint = game.as_ref().filter(|g| g.joint_size() <= MAX_TRACKED_JOINT).map(JointAccumulator::new);
    let mut path = PathTracker::new(cfg, &env);
    let mut pending_second = None;

    let prediction = |avg: &AveragePredictor| match cfg.predictor {
        PredictorSpec::Average => Some(avg.mean()),
        _ => None,
    };

    for _ in 0..cfg.rounds {
        let mut round: Vec<Option<RoundRecord>> = vec![None; players];
        let iterates: Vec<Vec<f64>> = match cfg.self_play {
            SelfPlay::Simultaneous => {
                let xs = (0..players)
                    .map(|i| Ok(learners[i].next_iterate(prediction(&averages[i]).as_deref())?.into_inner()))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
                let losses = env.losses(&refs)?;
                for (i, l) in losses.iter().enumerate() {
                    let rec = learners[i].observe_loss(l)?;
                    averages[i].add(&rec.instant_regret);
                    round[i] = Some(rec);
                }
                xs
            }
            SelfPlay::Alternating => {
                let g = game.as_ref().ok_or_else(|| Error::Config("alternating self-play needs a game".into()))?;
                let x = learners[0].next_iterate(prediction(&averages[0]).as_deref())?.into_inner();
                let y = match pending_second.take() {
                    Some(y) => y,
                    None => learners[1].next_iterate(prediction(&averages[1]).as_deref())?.into_inner(),
                };
                let rec1 = learners[1].observe_loss(&g.loss(1, &[&x, &y])?)?;
                averages[1].add(&rec1.instant_regret);
                let y_next = learners[1].next_iterate(prediction(&averages[1]).as_deref())?.into_inner();
                let rec0 = learners[0].observe_loss(&g.loss(0, &[&x, &y_next])?)?;
                averages[0].add(&rec0.instant_regret);
                round[0] = Some(rec0);
                round[1] = Some(rec1);
                pending_second = Some(y_next);
                vec![x, y]
            }
        };

        if let (Some(acc), Some(g)) = (joint.as_mut(), game.as_ref()) {
            let refs: Vec<&[f64]> = iterates.iter().map(Vec::as_slice).collect();
            acc.add(g, &refs)?;
        }
        for (i, rec) in round.iter().enumerate() {
            let rec = rec.as_ref().expect("every player completes the round");
            for (s, a) in strategy_sums[i].iter_mut().zip(&iterates[i]) {
                *s += a;
            }
            for (acc, v) in telemetry_sums[i].iter_mut().zip(&rec.instant_regret) {
                acc.add(*v);
            }
            if i == 0 {
                if let Some(p) = path.as_mut() {
                    p.observe(rec);
                }
            }
            if let Some(w) = writer.as_mut() {
                w.write(i, rec)?;
            }
            sink(i, rec);
        }
    }
    if let Some(w) = writer {
        w.finish()?;
    }

    let t = cfg.rounds.max(1) as f64;
    let player_summaries: Vec<PlayerSummary> = learners
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let audit = l.audit_summary().clone();
            let final_regret = if cfg.rounds == 0 { 0.0 } else { l.measured_regret() };
            let bound = l.regret_upper_bound();
            let drift = telemetry_sums[i]
                .iter()
                .zip(l.raw_cumulative())
                .map(|(a, b)| (a.value() - b).abs())
                .fold(0.0, f64::max);
            PlayerSummary {
                player: i,
                actions: actions[i],
                final_regret,
                bound,
                slack: bound - final_regret,
                max_blackwell: if audit.rounds == 0 { 0.0 } else { audit.max_blackwell },
                c_bound: l.c_bound(),
                eta1_admissible: l.eta1_admissible(),
                average_strategy: strategy_sums[i].iter().map(|s| s / t).collect(),
                telemetry_drift: drift,
                audit,
            }
        })
        .collect();

    let exploitability = match &game {
        Some(g) if g.is_zero_sum() && cfg.rounds > 0 => Some(
            g.exploitability(&player_summaries[0].average_strategy, &player_summaries[1].average_strategy)?,
        ),
        _ => None,
    };
    let ce_gap = match (&game, &joint) {
        (Some(g), Some(acc)) if cfg.rounds > 0 => Some(g.ce_gap(&acc.distribution())?),
        _ => None,
    };
    let path_length = path.map(|p| p.finish(cfg, &learners[0], env.diameter()));
    let violations: usize = player_summaries.iter().map(|p| p.audit.violations()).sum::<usize>()
        + path_length.as_ref().map_or(0, |p| p.violations + usize::from(!p.regret_ok));
    let first_violation_round = player_summaries.iter().filter_map(|p| p.audit.first_violation_round).min();

    let summary = RunSummary {
        label: cfg.label(),
        rounds: cfg.rounds,
        final_regret: player_summaries.iter().map(|p| p.final_regret).fold(f64::NEG_INFINITY, f64::max),
        bound: player_summaries.iter().map(|p| p.bound).fold(f64::NEG_INFINITY, f64::max),
        bound_slack: player_summaries.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min),
        max_blackwell: player_summaries.iter().map(|p| p.max_blackwell).fold(f64::NEG_INFINITY, f64::max),
        audit_enabled: cfg.audit,
        audit_passed: violations == 0,
        violations,
        first_violation_round,
        exploitability,
        ce_gap,
        path_length,
        warnings,
        wall_time_secs: start.elapsed().as_secs_f64(),
        players: player_summaries,
    };
    Ok((summary, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvSpec, GameSpec};
    use crate::phi::PhiKind;
    use crate::schedule::StepsizeSchedule;

    fn rps(rounds: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            EnvSpec::MatrixGameZeroSum { game: GameSpec::RockPaperScissors },
            PotentialSpec::Polynomial { p: 2.0 },
        );
        c.rounds = rounds;
        c
    }

    #[test]
    fn zero_rounds() {
        let mut buf = Vec::new();
        let (s, _) = run_to_writer(&rps(0), Some(&mut buf), |_, _| {}).unwrap();
        assert_eq!(s.final_regret, 0.0);
        assert!(s.audit_passed);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("t,player,eta"));
    }

    #[test]
    fn telemetry_is_self_consistent() {
        let mut c = rps(500);
        c.environment = EnvSpec::NormalFormGame { game: GameSpec::Random { actions: vec![3, 3], seed: 4 } };
        c.algorithm = Algorithm::PhiRegretPlus;
        c.phi_kind = PhiKind::Internal;
        c.predictor = PredictorSpec::Average;
        let s = run(&c, None).unwrap();
        for p in &s.players {
            assert!(p.telemetry_drift <= 1e-9);
        }
        assert!(s.audit_passed, "{s:?}");
        assert!(s.ce_gap.is_some());
    }

    #[test]
    fn rps_regret_within_unpredicted_bound() {
        let mut rows = Vec::new();
        let s = run_with(&rps(2000), None, |i, r| rows.push((i, r.instant_regret.clone()))).unwrap();
        for player in 0..2 {
            let sq: f64 = rows.iter().filter(|(i, _)| *i == player).map(|(_, v)| v.iter().map(|x| x * x).sum::<f64>()).sum();
            assert!(s.players[player].final_regret <= sq.sqrt() + 1e-9);
        }
        assert!(s.exploitability.is_some());
    }

    #[test]
    fn alternating_runs() {
        let mut c = rps(300);
        c.self_play = SelfPlay::Alternating;
        c.predictor = PredictorSpec::LastInstant;
        c.schedule = StepsizeSchedule::InverseSqrt { c: 1.0 };
        let s = run(&c, None).unwrap();
        assert!(s.audit_passed);
        assert_eq!(s.players.len(), 2);
    }

    #[test]
    fn smooth_loss_reports_path_length() {
        let mut c = ExperimentConfig::new(
            EnvSpec::FixedSmoothLoss {
                m: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                b: vec![0.2, 0.5, 0.3],
                norms: NormPair::euclidean(),
            },
            PotentialSpec::Polynomial { p: 2.0 },
        );
        c.predictor = PredictorSpec::LastInstant;
        c.rounds = 500;
        let s = run(&c, None).unwrap();
        let p = s.path_length.unwrap();
        assert_eq!(p.rounds_checked, 499);
        assert!(p.regret_bound.is_some());
    }
}
