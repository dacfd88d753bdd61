//! Drivers that search for the largest verifiable subset-to-one substitution
//! onto a test labeling.
//!
//! All modes start from `Y_v = X_v \ {y_v}` and shrink the sets until the
//! substitution is certified. The dual modes run TRW-S on the reduced
//! verification costs with warm starts across rebuilds; the exact mode solves
//! the verification LP with the dense simplex oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_oracle::{self, LocalPolytopeLP, OracleLimits};
use crate::mincut::{pruning_cut, single_node_prune};
use crate::model::{GraphicalModel, Labeling, Reparametrization};
use crate::substitution::{Measures, SubsetToOne};
use crate::trws::{self, Costs, SweepTrace};
use crate::verification::reduce;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    ArcConsistency,
    Budgeted,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "arc-consistency" | "arc_consistency" => Ok(Mode::ArcConsistency),
            "budgeted" => Ok(Mode::Budgeted),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Speedups {
    pub single_node: bool,
    pub pruning_cut: bool,
    pub fast_messages: bool,
}

impl Default for Speedups {
    fn default() -> Self {
        Speedups {
            single_node: true,
            pruning_cut: true,
            fast_messages: true,
        }
    }
}

impl Speedups {
    pub fn none() -> Self {
        Speedups {
            single_node: false,
            pruning_cut: false,
            fast_messages: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencyConfig {
    pub mode: Mode,
    /// TRW-S sweeps between two active-set prunings.
    pub sweeps_per_round: usize,
    /// Cap on outer rounds; `None` means the natural bound `sum (|X_v| - 1)`.
    pub max_outer_rounds: Option<usize>,
    pub speedups: Speedups,
    /// Slack for calling a reparametrized unary active. `None` picks 0.25 for
    /// integer costs and 1e-7 otherwise.
    pub activity_tol: Option<f64>,
    /// Sweeps used by [`choose_test_labeling`].
    pub test_labeling_budget: usize,
    pub limits: OracleLimits,
}

impl Default for PersistencyConfig {
    fn default() -> Self {
        PersistencyConfig {
            mode: Mode::Budgeted,
            sweeps_per_round: 50,
            max_outer_rounds: None,
            speedups: Speedups::default(),
            activity_tol: None,
            test_labeling_budget: 1000,
            limits: OracleLimits::default(),
        }
    }
}

impl PersistencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps_per_round == 0 {
            return Err(Error::Config("sweeps_per_round must be at least 1".into()));
        }
        if let Some(t) = self.activity_tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!(
                    "activity tolerance {t} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneCounts {
    pub single_node: usize,
    pub pruning_cut: usize,
    /// Labels removed because they were active at the end of a round.
    pub active: usize,
    pub cut_invocations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistencyReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub labels: Vec<usize>,
    pub substitution: SubsetToOne,
    pub measures: Measures,
    pub outer_rounds: usize,
    pub total_sweeps: usize,
    pub prunes: PruneCounts,
    /// Lower bound of the reduced verification problem at termination.
    pub final_lb: f64,
    pub dichotomy_violations: usize,
    /// The round cap was hit and the identity substitution returned.
    pub capped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Counters gathered by a driver run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Counters {
    pub outer_rounds: usize,
    pub total_sweeps: usize,
    pub prunes: PruneCounts,
    pub final_lb: f64,
    pub dichotomy_violations: usize,
    pub capped: bool,
}

pub fn report(
    p: &SubsetToOne,
    f: &GraphicalModel,
    mode: Mode,
    counters: &Counters,
) -> PersistencyReport {
    PersistencyReport {
        schema_version: SCHEMA_VERSION,
        mode,
        labels: f.labels().to_vec(),
        substitution: p.clone(),
        measures: p.measures(f.labels()),
        outer_rounds: counters.outer_rounds,
        total_sweeps: counters.total_sweeps,
        prunes: counters.prunes,
        final_lb: counters.final_lb,
        dichotomy_violations: counters.dichotomy_violations,
        capped: counters.capped,
        wall_time_ms: None,
    }
}

/// Receives progress from a driver run.
pub trait Observer {
    /// Start of an outer round, with the sets `Y` it starts from.
    fn round(&mut self, _round: usize, _sub: &SubsetToOne) {}
    /// After every TRW-S sweep of a dual mode.
    fn sweep(&mut self, _trace: &SweepTrace) {}
}

impl Observer for () {}

/// Test labeling: the final greedy TRW-S labeling after the configured budget,
/// or in exact mode the smallest label of each node's LP support.
pub fn choose_test_labeling(f: &GraphicalModel, cfg: &PersistencyConfig) -> Result<Labeling> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Exact => {
            let o = lp_oracle::support_sets(f, &cfg.limits)?;
            Ok(Labeling((0..f.num_nodes()).map(|v| o.get(v)[0]).collect()))
        }
        _ => Ok(trws::solve(f, cfg.test_labeling_budget).last),
    }
}

pub fn find_persistency(
    f: &GraphicalModel,
    y: &Labeling,
    cfg: &PersistencyConfig,
) -> Result<PersistencyReport> {
    find_persistency_observed(f, y, cfg, &mut ())
}

pub fn find_persistency_observed(
    f: &GraphicalModel,
    y: &Labeling,
    cfg: &PersistencyConfig,
    obs: &mut dyn Observer,
) -> Result<PersistencyReport> {
    cfg.validate()?;
    f.check_labeling(y)?;
    let clock = Clock::start();
    let mut counters = Counters::default();
    let p = match cfg.mode {
        Mode::Exact if cfg.speedups.single_node || cfg.speedups.pruning_cut => {
            exact_with_speedups(f, y, cfg, &mut counters, obs)?
        }
        Mode::Exact => exact_plain(f, y, cfg, &mut counters, obs)?,
        Mode::ArcConsistency | Mode::Budgeted => dual(f, y, cfg, &mut counters, obs)?,
    };
    let mut r = report(&p, f, cfg.mode, &counters);
    r.wall_time_ms = clock.elapsed_ms();
    Ok(r)
}

// No clock on bare wasm32.
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
struct Clock(std::time::Instant);

#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }

    fn elapsed_ms(&self) -> Option<f64> {
        Some(self.0.elapsed().as_secs_f64() * 1e3)
    }
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
struct Clock;

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
impl Clock {
    fn start() -> Self {
        Clock
    }

    fn elapsed_ms(&self) -> Option<f64> {
        None
    }
}

fn round_cap(f: &GraphicalModel, cfg: &PersistencyConfig) -> usize {
    let natural: usize = f.labels().iter().map(|&k| k - 1).sum();
    cfg.max_outer_rounds.map_or(natural, |c| c.min(natural))
}

fn prune_tol(f: &GraphicalModel) -> f64 {
    if f.integer_costs() {
        0.0
    } else {
        1e-9 * (1.0 + f.cost_scale())
    }
}

fn exact_plain(
    f: &GraphicalModel,
    y: &Labeling,
    cfg: &PersistencyConfig,
    counters: &mut Counters,
    obs: &mut dyn Observer,
) -> Result<SubsetToOne> {
    let out = lp_oracle::algorithm1(f, y, &cfg.limits)?;
    for (k, sets) in out.rounds.iter().enumerate() {
        obs.round(k + 1, &SubsetToOne::new(y.clone(), sets.clone())?);
    }
    counters.outer_rounds = out.rounds.len();
    counters.final_lb = out.values.last().copied().unwrap_or(0.0);
    Ok(out.substitution)
}

fn exact_with_speedups(
    f: &GraphicalModel,
    y: &Labeling,
    cfg: &PersistencyConfig,
    counters: &mut Counters,
    obs: &mut dyn Observer,
) -> Result<SubsetToOne> {
    cfg.limits.check_lp(f)?;
    let tol = prune_tol(f);
    let mut p = SubsetToOne::all_to_one(y.clone(), f.labels())?;
    while !p.is_identity() {
        counters.outer_rounds += 1;
        obs.round(counters.outer_rounds, &p);
        if cfg.speedups.single_node {
            counters.prunes.single_node += single_node_prune(f, &mut p, tol)?;
            if p.is_identity() {
                break;
            }
        }
        let r = reduce(f, &p)?;
        let lp = LocalPolytopeLP::new(r.model(), &cfg.limits)?;
        if cfg.speedups.pruning_cut {
            let (value, mu) = lp_oracle::solve_lp(&lp)?;
            if value < -tol - 1e-9 {
                let integral = mu
                    .unary
                    .iter()
                    .flatten()
                    .all(|&m| m < 1e-9 || m > 1.0 - 1e-9);
                if integral {
                    let x: Vec<usize> = mu
                        .unary
                        .iter()
                        .map(|m| trws::argmin(&m.iter().map(|x| -x).collect::<Vec<_>>()).0)
                        .collect();
                    if r.model().energy(&x)? < -tol - 1e-9 {
                        counters.prunes.cut_invocations += 1;
                        counters.prunes.pruning_cut += pruning_cut(&r, &mut p, &x)?;
                        continue;
                    }
                }
            }
        }
        let (value, o) = lp_oracle::optimal_support(&lp)?;
        counters.final_lb = value;
        let mut removed = 0;
        for v in 0..f.num_nodes() {
            for &i in o.get(v) {
                removed += usize::from(p.keep(v, i));
            }
        }
        if removed == 0 {
            break;
        }
        counters.prunes.active += removed;
    }
    if p.is_identity() {
        counters.final_lb = 0.0;
    }
    Ok(p)
}

/// Makes every message constant on immovable labels by copying the value at
/// the test label.
fn canonicalize(phi: &mut Reparametrization, f: &GraphicalModel, p: &SubsetToOne) {
    let y = p.test_labeling();
    for (e, &(u, v)) in f.edges().iter().enumerate() {
        let at = phi.tail[e][y[u]];
        for i in 0..f.num_labels(u) {
            if !p.is_eliminated(u, i) {
                phi.tail[e][i] = at;
            }
        }
        let at = phi.head[e][y[v]];
        for j in 0..f.num_labels(v) {
            if !p.is_eliminated(v, j) {
                phi.head[e][j] = at;
            }
        }
    }
}

fn dual(
    f: &GraphicalModel,
    y: &Labeling,
    cfg: &PersistencyConfig,
    counters: &mut Counters,
    obs: &mut dyn Observer,
) -> Result<SubsetToOne> {
    let integer = f.integer_costs();
    let scale = 1.0 + f.cost_scale();
    let activity = cfg
        .activity_tol
        .unwrap_or(if integer { 0.25 } else { 1e-7 });
    let lb_tol = if integer { 0.5 } else { 1e-7 * scale };
    let tol = prune_tol(f);
    let cap = round_cap(f, cfg);
    let dec = trws::default_chains(f);
    let mut phi = Reparametrization::zeros(f);
    let mut p = SubsetToOne::all_to_one(y.clone(), f.labels())?;

    'outer: loop {
        if p.is_identity() {
            counters.final_lb = 0.0;
            return Ok(p);
        }
        if counters.outer_rounds >= cap {
            counters.capped = true;
            return Ok(SubsetToOne::identity(y.clone()));
        }
        counters.outer_rounds += 1;
        let round = counters.outer_rounds;
        obs.round(round, &p);
        if cfg.speedups.single_node {
            counters.prunes.single_node += single_node_prune(f, &mut p, tol)?;
            if p.is_identity() {
                counters.final_lb = 0.0;
                return Ok(p);
            }
        }
        let r = reduce(f, &p)?;
        let g = r.model();
        let costs = if cfg.speedups.fast_messages {
            canonicalize(&mut phi, f, &p);
            Costs::Reduced(&r)
        } else {
            Costs::Naive(g)
        };

        let mut active = Vec::new();
        for s in 0..cfg.sweeps_per_round {
            let sw = trws::sweep(costs, &mut phi, &dec, activity);
            counters.total_sweeps += 1;

            if cfg.speedups.pruning_cut {
                let (x, ex) = [&sw.forward.labeling, &sw.backward.labeling]
                    .into_iter()
                    .map(|x| (x, g.energy_unchecked(x)))
                    .fold((&sw.backward.labeling, f64::INFINITY), |a, b| {
                        if b.1 < a.1 {
                            b
                        } else {
                            a
                        }
                    });
                if ex < -tol - 1e-9 * scale {
                    counters.prunes.cut_invocations += 1;
                    let removed = pruning_cut(&r, &mut p, x)?;
                    debug_assert!(removed > 0, "a negative labeling always allows a cut");
                    counters.prunes.pruning_cut += removed;
                    continue 'outer;
                }
            }

            // Active sets come from the pass state, whose unaries keep each
            // chain's slack; exit is certified on the corrected point.
            let corrected = trws::dual_correct(g, &trws::node_slack_form(g, &phi, &dec, true));
            active = trws::active_labels(g, &phi, activity);
            let lb = corrected.lower_bound(g);
            counters.final_lb = lb;
            let certified = if integer { lb > -lb_tol } else { lb >= -lb_tol };
            let corrected_active = trws::active_labels(g, &corrected, activity);
            if !certified
                && corrected_active
                    .iter()
                    .enumerate()
                    .all(|(v, o)| o.iter().all(|&i| !p.is_eliminated(v, i)))
            {
                counters.dichotomy_violations += 1;
                log::warn!("corrected bound {lb} with no active movable label");
            }
            debug_assert_eq!(counters.dichotomy_violations, 0, "dichotomy violated");
            let disjoint = active
                .iter()
                .enumerate()
                .all(|(v, o)| o.iter().all(|&i| !p.is_eliminated(v, i)));
            obs.sweep(&SweepTrace {
                round,
                sweep: counters.total_sweeps,
                lower_bound: sw.backward.lower_bound,
                problem_margin: trws::margin(g, &phi, y).problem,
                active_labels: active.iter().map(Vec::len).sum(),
                movable_labels: p.total_eliminated(),
            });
            if disjoint {
                if !certified {
                    continue;
                }
                if cfg.mode == Mode::Budgeted
                    || s + 1 == cfg.sweeps_per_round
                    || trws::arc_consistency_check(g, &corrected, activity).is_empty()
                {
                    return Ok(p);
                }
            } else if cfg.mode == Mode::ArcConsistency {
                break;
            }
        }

        let mut removed = prune_active(&mut p, &active);
        if removed == 0 {
            // Pass-state sets missed Y without a certified bound: fall back
            // to the corrected point, which then meets Y.
            let corrected = trws::dual_correct(g, &trws::node_slack_form(g, &phi, &dec, true));
            removed = prune_active(&mut p, &trws::active_labels(g, &corrected, activity));
            if removed == 0 {
                return Ok(SubsetToOne::identity(y.clone()));
            }
        }
        counters.prunes.active += removed;
        log::debug!(
            "round {round}: pruned {removed} active labels, {} movable left",
            p.total_eliminated()
        );
    }
}

fn prune_active(p: &mut SubsetToOne, active: &[Vec<usize>]) -> usize {
    let mut removed = 0;
    for (v, o) in active.iter().enumerate() {
        for &i in o {
            removed += usize::from(p.keep(v, i));
        }
    }
    removed
}
