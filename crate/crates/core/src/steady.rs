//! Steady states of the learning model, the patient-limit scan and the
//! diagnostics run on its output.

use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{
    bayes_posterior, is_nash, is_pbe_hetero, l1_distance, Posterior, SignallingGame, StrategyProfile, Verdict,
};
use crate::receiver::{arr_exact_small, arr_monte_carlo, ReceiverPrior};
use crate::refinement::{
    check_compatibility_criterion, check_strong_compatibility_criterion, is_on_path_strict, undominated_types,
    CriterionVerdict,
};
use crate::sampling::{derive_seed, random_profile};
use crate::sender::{asr_exact_with, asr_monte_carlo_with, truncation_horizon, SenderAgent, DEFAULT_MAX_STATES};

/// One component of a heterogeneous population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorComponent {
    pub weight: f64,
    /// `alpha[signal][action]`, shared by every sender type.
    pub sender_prior: Vec<Vec<f64>>,
    pub receiver_prior: ReceiverPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningParams {
    pub delta: f64,
    pub gamma: f64,
    pub sender_prior: Vec<Vec<f64>>,
    pub receiver_prior: ReceiverPrior,
    /// When non-empty, replaces the single prior pair above.
    pub mixture: Vec<PriorComponent>,
}

impl LearningParams {
    pub fn new(delta: f64, gamma: f64, sender_prior: Vec<Vec<f64>>, receiver_prior: ReceiverPrior) -> Self {
        Self { delta, gamma, sender_prior, receiver_prior, mixture: Vec::new() }
    }

    /// Unit Dirichlet weights for both sides.
    pub fn uniform(game: &SignallingGame, delta: f64, gamma: f64) -> Self {
        Self::new(
            delta,
            gamma,
            vec![vec![1.0; game.n_actions()]; game.n_signals()],
            ReceiverPrior::uniform(game),
        )
    }

    pub fn with_lifetime(&self, delta: f64, gamma: f64) -> Self {
        Self { delta, gamma, ..self.clone() }
    }

    fn components(&self) -> Vec<PriorComponent> {
        if self.mixture.is_empty() {
            return vec![PriorComponent {
                weight: 1.0,
                sender_prior: self.sender_prior.clone(),
                receiver_prior: self.receiver_prior.clone(),
            }];
        }
        self.mixture.clone()
    }

    pub fn validate(&self, game: &SignallingGame) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) || !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= delta < 1 and 0 <= gamma < 1, got {} and {}",
                self.delta, self.gamma
            )));
        }
        let comps = self.components();
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        if comps.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("mixture weights must be positive and sum to 1".into()));
        }
        for c in &comps {
            if c.sender_prior.len() != game.n_signals() || c.sender_prior.iter().any(|r| r.len() != game.n_actions())
            {
                return Err(Error::Dimension("sender prior must be signals x actions".into()));
            }
            if c.sender_prior.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
                return Err(Error::InvalidParameter("sender Dirichlet weights must be positive".into()));
            }
            c.receiver_prior.validate(game)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "mc" | "monte-carlo" | "montecarlo" => Ok(Mode::MonteCarlo),
            other => Err(Error::Parse(format!("unknown mode '{other}', expected exact or mc"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Weight on the new image in the damped update.
    pub damping: f64,
    /// Stop when the `l1` residual falls to this level.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    /// Lifetimes per Monte Carlo evaluation; `None` scales with `1 - γ`.
    pub samples: Option<usize>,
    /// Lifetime periods per evaluation when `samples` is `None`.
    pub period_budget: f64,
    pub seed: u64,
    /// Exact mode: mass below which sender count states are pruned.
    pub prune_eps: f64,
    /// Exact mode: truncation tolerance for the lifetime sums.
    pub exact_tol: f64,
    pub max_states: usize,
    /// Extra random starting points tried if the first run does not converge.
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 200,
            mode: Mode::Exact,
            samples: None,
            period_budget: 2e6,
            seed: 0,
            prune_eps: 1e-14,
            exact_tol: 1e-12,
            max_states: DEFAULT_MAX_STATES,
            restarts: 5,
        }
    }
}

impl SolverConfig {
    pub fn monte_carlo(seed: u64) -> Self {
        Self { mode: Mode::MonteCarlo, tol: 0.02, max_iter: 60, seed, ..Self::default() }
    }

    fn lifetimes(&self, gamma: f64) -> usize {
        self.samples.unwrap_or_else(|| (self.period_budget * (1.0 - gamma)).clamp(200.0, 100_000.0) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateResult {
    pub profile: StrategyProfile,
    /// `l1` distance between the profile and its image.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Starting points tried, the first included.
    pub starts: usize,
}

/// The action the receiver's posterior-based rule picks after `s` no matter
/// what it has seen, if any: the first action that pays at least as much
/// as every other one at every type, with every earlier action strictly
/// worse at every type.
pub fn constant_reply(game: &SignallingGame, s: usize) -> Option<usize> {
    let n_t = game.n_types();
    let u = |t: usize, a: usize| game.u2().get_f64(t, s, a);
    let star = (0..game.n_actions()).find(|&a| (0..game.n_actions()).all(|b| (0..n_t).all(|t| u(t, a) >= u(t, b))))?;
    (0..star).all(|b| (0..n_t).all(|t| u(t, b) < u(t, star) - 1e-12)).then_some(star)
}

struct Component {
    weight: f64,
    agents: Vec<SenderAgent>,
    receiver_prior: ReceiverPrior,
}

/// Evaluates the aggregate response map for fixed parameters. Sender
/// agents keep their policy memos across evaluations.
pub struct ResponseMap<'g> {
    game: &'g SignallingGame,
    gamma: f64,
    comps: Vec<Component>,
    config: SolverConfig,
    // last (pi2, sender image) and (pi1, receiver image)
    sender_memo: Mutex<Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>>,
    receiver_memo: Mutex<Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>>,
}

impl<'g> ResponseMap<'g> {
    pub fn new(game: &'g SignallingGame, params: &LearningParams, config: &SolverConfig) -> Result<Self> {
        params.validate(game)?;
        let comps = params
            .components()
            .into_iter()
            .map(|c| {
                let agents = (0..game.n_types())
                    .map(|t| SenderAgent::new(game, t, &c.sender_prior, params.delta, params.gamma))
                    .collect::<Result<_>>()?;
                Ok(Component { weight: c.weight, agents, receiver_prior: c.receiver_prior })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            game,
            gamma: params.gamma,
            comps,
            config: config.clone(),
            sender_memo: Mutex::new(None),
            receiver_memo: Mutex::new(None),
        })
    }

    /// The receiver image when it does not depend on sender play.
    pub fn fixed_receiver_response(&self) -> Option<Vec<Vec<f64>>> {
        let g = self.game;
        (0..g.n_signals())
            .map(|s| {
                constant_reply(g, s).map(|a| {
                    let mut row = vec![0.0; g.n_actions()];
                    row[a] = 1.0;
                    row
                })
            })
            .collect()
    }

    /// `(R1[pi2], R2[pi1])`, mixed across population components. Each half
    /// is reused when its input is unchanged since the previous call.
    pub fn image(&self, profile: &StrategyProfile) -> Result<StrategyProfile> {
        let pi1 = match &*self.sender_memo.lock() {
            Some((key, img)) if *key == profile.pi2 => Some(img.clone()),
            _ => None,
        };
        let pi1 = match pi1 {
            Some(p) => p,
            None => {
                let img = self.sender_image(&profile.pi2)?;
                *self.sender_memo.lock() = Some((profile.pi2.clone(), img.clone()));
                img
            }
        };
        let pi2 = match &*self.receiver_memo.lock() {
            Some((key, img)) if *key == profile.pi1 => Some(img.clone()),
            _ => None,
        };
        let pi2 = match pi2 {
            Some(p) => p,
            None => {
                let img = self.receiver_image(&profile.pi1)?;
                *self.receiver_memo.lock() = Some((profile.pi1.clone(), img.clone()));
                img
            }
        };
        Ok(StrategyProfile { pi1: normalized(pi1), pi2: normalized(pi2) })
    }

    fn sender_image(&self, pi2: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let g = self.game;
        let cfg = &self.config;
        let n = cfg.lifetimes(self.gamma);
        let mut out = vec![vec![0.0; g.n_signals()]; g.n_types()];
        for (k, c) in self.comps.iter().enumerate() {
            for (t, agent) in c.agents.iter().enumerate() {
                let row = match cfg.mode {
                    Mode::Exact => {
                        asr_exact_with(agent, g, pi2, self.gamma, cfg.prune_eps, cfg.exact_tol, cfg.max_states)?
                            .distribution
                    }
                    Mode::MonteCarlo => {
                        let seed = derive_seed(cfg.seed, (k * 1000 + t) as u64);
                        asr_monte_carlo_with(agent, g, pi2, self.gamma, n, seed)?.distribution
                    }
                };
                for (o, v) in out[t].iter_mut().zip(row) {
                    *o += c.weight * v;
                }
            }
        }
        Ok(out)
    }

    fn receiver_image(&self, pi1: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let g = self.game;
        let cfg = &self.config;
        let n = cfg.lifetimes(self.gamma);
        let mut out = vec![vec![0.0; g.n_actions()]; g.n_signals()];
        for (k, c) in self.comps.iter().enumerate() {
            let pi2 = match cfg.mode {
                Mode::Exact => self.exact_receiver(pi1, &c.receiver_prior)?,
                Mode::MonteCarlo => {
                    let seed = derive_seed(cfg.seed, (k * 1000 + 999) as u64);
                    arr_monte_carlo(g, pi1, &c.receiver_prior, self.gamma, n, seed)?.pi2
                }
            };
            for (o, row) in out.iter_mut().zip(pi2) {
                for (x, v) in o.iter_mut().zip(row) {
                    *x += c.weight * v;
                }
            }
        }
        Ok(out)
    }

    fn exact_receiver(&self, pi1: &[Vec<f64>], prior: &ReceiverPrior) -> Result<Vec<Vec<f64>>> {
        let g = self.game;
        if let Some(fixed) = self.fixed_receiver_response() {
            return Ok(fixed);
        }
        let fixed: Vec<Option<usize>> = (0..g.n_signals()).map(|s| constant_reply(g, s)).collect();
        let t_max = truncation_horizon(self.gamma, self.config.exact_tol);
        let exact = arr_exact_small(g, pi1, prior, self.gamma, t_max, self.config.max_states)?;
        let mut pi2 = exact.pi2;
        for (s, a) in fixed.iter().enumerate() {
            if let Some(a) = a {
                pi2[s].iter_mut().for_each(|v| *v = 0.0);
                pi2[s][*a] = 1.0;
            }
        }
        Ok(pi2)
    }
}

fn run_from(map: &ResponseMap, start: StrategyProfile, cfg: &SolverConfig) -> Result<SteadyStateResult> {
    let mut profile = start;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let image = map.image(&profile)?;
        residual = l1_distance(&profile, &image)?;
        if residual <= cfg.tol {
            return Ok(SteadyStateResult { profile: image, residual, iterations: it, converged: true, starts: 1 });
        }
        profile = profile.mix(&image, cfg.damping);
    }
    Ok(SteadyStateResult { profile, residual, iterations: cfg.max_iter, converged: false, starts: 1 })
}

// Float round-off in the exact responses loses ~1e-13 of mass per row; fed
// back through the map it compounds, so rows are rescaled to sum to one.
fn normalized(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for row in &mut rows {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    rows
}

/// Damped fixed-point iteration `π ← (1-η)π + η(R1[π2], R2[π1])` from
/// `start` (uniform when `None`). If it does not converge, up to
/// `config.restarts` random starts are tried and the lowest residual wins.
pub fn solve_steady_state(
    game: &SignallingGame,
    params: &LearningParams,
    config: &SolverConfig,
    start: Option<&StrategyProfile>,
) -> Result<SteadyStateResult> {
    let map = ResponseMap::new(game, params, config)?;
    solve_with(&map, config, start)
}

fn solve_with(map: &ResponseMap, config: &SolverConfig, start: Option<&StrategyProfile>) -> Result<SteadyStateResult> {
    if !(config.damping > 0.0 && config.damping <= 1.0) || !(config.tol > 0.0) || config.max_iter == 0 {
        return Err(Error::InvalidParameter("need 0 < damping <= 1, tol > 0 and max_iter >= 1".into()));
    }
    let game = map.game;
    // a receiver image that ignores sender play is its own fixed point
    let fixed = map.fixed_receiver_response();
    let pin = |mut p: StrategyProfile| {
        if let Some(f) = &fixed {
            p.pi2 = f.clone();
        }
        p
    };
    let first = match start {
        Some(p) => {
            p.validate(game)?;
            p.clone()
        }
        None => StrategyProfile::uniform(game),
    };
    let mut best = run_from(map, pin(first), config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0x5EED));
    for _ in 0..config.restarts {
        if best.converged {
            break;
        }
        let attempt = run_from(map, pin(random_profile(&mut rng, game)), config)?;
        let tried = best.starts + 1;
        if attempt.residual < best.residual {
            best = attempt;
        }
        best.starts = tried;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub delta: f64,
    pub gamma: f64,
    pub profile: StrategyProfile,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Entries at or below this are dropped when purifying the limit.
    pub purify_tol: f64,
    /// Tolerance for the equilibrium checks on the purified candidate.
    pub check_tol: f64,
    pub solver: SolverConfig,
    pub cold_start_check: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            deltas: vec![0.9, 0.99, 0.999],
            gammas: vec![0.99, 0.999, 0.9999],
            purify_tol: 0.05,
            check_tol: 1e-6,
            solver: SolverConfig::monte_carlo(0),
            cold_start_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub nash: Verdict,
    pub pbe_hetero: Verdict,
    pub compatibility: CriterionVerdict,
    pub strong_compatibility: CriterionVerdict,
    pub on_path_strict: bool,
}

pub fn classify(game: &SignallingGame, profile: &StrategyProfile, tol: f64) -> Result<Classification> {
    Ok(Classification {
        nash: is_nash(game, profile, tol)?,
        pbe_hetero: is_pbe_hetero(game, profile, tol)?,
        compatibility: check_compatibility_criterion(game, profile, tol)?,
        strong_compatibility: check_strong_compatibility_criterion(game, profile, tol)?,
        on_path_strict: is_on_path_strict(game, profile)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub trajectory: Vec<GridPoint>,
    /// Last γ point for each δ.
    pub within_delta_limits: Vec<GridPoint>,
    /// Linear extrapolation of the within-δ limits to `δ = 1`, clipped and
    /// renormalised.
    pub extrapolated: StrategyProfile,
    pub candidate: StrategyProfile,
    pub classification: Classification,
    /// Grid points that did not converge, as `(δ, γ)`.
    pub non_converged: Vec<(f64, f64)>,
    /// Limit properties the candidate should have but does not: the
    /// compatibility criterion, heterogeneous-belief PBE, and the strong
    /// criterion when strictly on-path.
    pub property_failures: Vec<String>,
    /// `l1` distance between warm- and cold-started solutions at the last
    /// grid point.
    pub cold_start_distance: Option<f64>,
}

fn clip_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let c: Vec<f64> = r.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let s: f64 = c.iter().sum();
            if s > 0.0 {
                c.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / r.len() as f64; r.len()]
            }
        })
        .collect()
}

/// Linear extrapolation in `x = 1 - δ` through the last two limits.
pub fn extrapolate_to_patience(points: &[(f64, StrategyProfile)]) -> Result<StrategyProfile> {
    match points {
        [] => Err(Error::InvalidParameter("nothing to extrapolate".into())),
        [(_, p)] => Ok(StrategyProfile { pi1: clip_rows(&p.pi1), pi2: clip_rows(&p.pi2) }),
        _ => {
            let (d1, p1) = &points[points.len() - 2];
            let (d2, p2) = &points[points.len() - 1];
            let (x1, x2) = (1.0 - d1, 1.0 - d2);
            if (x1 - x2).abs() < 1e-15 {
                return Err(Error::InvalidParameter("extrapolation needs distinct δ values".into()));
            }
            let lin = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                a.iter()
                    .zip(b)
                    .map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| (x1 * v - x2 * u) / (x1 - x2)).collect())
                    .collect()
            };
            Ok(StrategyProfile { pi1: clip_rows(&lin(&p1.pi1, &p2.pi1)), pi2: clip_rows(&lin(&p1.pi2, &p2.pi2)) })
        }
    }
}

/// Solves along the `δ × γ` grid (γ inner, warm-started from the previous
/// point), extrapolates the patient limit, purifies and classifies it.
pub fn patient_stability_scan(
    game: &SignallingGame,
    params: &LearningParams,
    config: &ScanConfig,
    mut on_point: impl FnMut(&GridPoint),
) -> Result<ScanResult> {
    if config.deltas.is_empty() || config.gammas.is_empty() {
        return Err(Error::InvalidParameter("scan grid is empty".into()));
    }
    let mut trajectory = Vec::new();
    let mut within = Vec::new();
    let mut warm: Option<StrategyProfile> = None;
    for &delta in &config.deltas {
        for &gamma in &config.gammas {
            let p = params.with_lifetime(delta, gamma);
            let r = solve_steady_state(game, &p, &config.solver, warm.as_ref())?;
            let point = GridPoint {
                delta,
                gamma,
                profile: r.profile.clone(),
                residual: r.residual,
                iterations: r.iterations,
                converged: r.converged,
            };
            on_point(&point);
            warm = Some(r.profile);
            trajectory.push(point);
        }
        let block = &trajectory[trajectory.len() - config.gammas.len()..];
        let limit = block.iter().rev().find(|g| g.converged).unwrap_or(block.last().unwrap());
        within.push(limit.clone());
    }
    let non_converged = trajectory.iter().filter(|g| !g.converged).map(|g| (g.delta, g.gamma)).collect();
    let limits: Vec<(f64, StrategyProfile)> = within.iter().map(|g| (g.delta, g.profile.clone())).collect();
    let extrapolated = extrapolate_to_patience(&limits)?;
    let candidate = extrapolated.purified(config.purify_tol);
    let classification = classify(game, &candidate, config.check_tol)?;
    let c = &classification;
    let mut property_failures = Vec::new();
    if !c.compatibility.pass {
        property_failures.push(format!("compatibility criterion fails at {:?}", c.compatibility.violations));
    }
    if !c.pbe_hetero.pass {
        property_failures.push(format!("not a PBE with heterogeneous beliefs: {:?}", c.pbe_hetero.witnesses));
    }
    if c.on_path_strict && !c.strong_compatibility.pass {
        property_failures.push(format!(
            "strictly on-path but strong criterion fails at {:?}",
            c.strong_compatibility.violations
        ));
    }
    let cold_start_distance = if config.cold_start_check {
        let last = trajectory.last().unwrap();
        let once = SolverConfig { restarts: 0, ..config.solver.clone() };
        let cold = solve_steady_state(game, &params.with_lifetime(last.delta, last.gamma), &once, None)?;
        Some(l1_distance(&cold.profile, &last.profile)?)
    } else {
        None
    };
    Ok(ScanResult {
        trajectory,
        within_delta_limits: within,
        extrapolated,
        candidate,
        classification,
        non_converged,
        property_failures,
        cold_start_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelfConfirmingFailure {
    /// On-path `signal`: `action` is played but is not a best reply to the
    /// Bayes posterior.
    Receiver { signal: usize, action: usize, shortfall: f64 },
    /// `ty` sends `signal` although even the worst replies elsewhere beat it.
    Sender { ty: usize, signal: usize, payoff: f64, guaranteed_elsewhere: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfConfirmingReport {
    pub pass: bool,
    pub failures: Vec<SelfConfirmingFailure>,
}

/// Checks the self-confirming conditions: on-path receiver play is a best
/// reply to Bayes beliefs, and every signal a type sends is a best reply to
/// some receiver strategy that agrees with `pi2` on that signal.
pub fn self_confirming_diagnostic(
    game: &SignallingGame,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<SelfConfirmingReport> {
    profile.validate(game)?;
    let mut failures = Vec::new();
    for s in 0..game.n_signals() {
        let joint: f64 = (0..game.n_types()).map(|t| game.prior_f64()[t] * profile.pi1[t][s]).sum();
        if joint <= tol {
            continue;
        }
        let Posterior::Belief(p) = bayes_posterior(game, &profile.pi1, s) else { continue };
        let vals: Vec<f64> = (0..game.n_actions()).map(|a| game.receiver_payoff(&p.0, s, a)).collect();
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for a in 0..game.n_actions() {
            if profile.pi2[s][a] > tol && vals[a] < best - tol {
                failures.push(SelfConfirmingFailure::Receiver { signal: s, action: a, shortfall: best - vals[a] });
            }
        }
    }
    for t in 0..game.n_types() {
        for s in 0..game.n_signals() {
            if profile.pi1[t][s] <= tol {
                continue;
            }
            let payoff = game.sender_payoff_f64(t, s, &profile.pi2[s])?;
            let guaranteed = (0..game.n_signals())
                .filter(|&o| o != s)
                .map(|o| game.u1().row_f64(t, o).iter().cloned().fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            if payoff < guaranteed - tol {
                failures.push(SelfConfirmingFailure::Sender { ty: t, signal: s, payoff, guaranteed_elsewhere: guaranteed });
            }
        }
    }
    Ok(SelfConfirmingReport { pass: failures.is_empty(), failures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    /// Whether the type can gain from the signal against the reference
    /// profile; the probe is only meaningful when it can.
    pub precondition: bool,
    /// `(δ, γ, π1(s|θ) / (1 - γ))` along the trajectory.
    pub ratios: Vec<(f64, f64, f64)>,
    pub increasing_steps: usize,
    pub steps: usize,
    /// Last ratio exceeds the first.
    pub grows: bool,
    /// Fewer than one expected sending per lifetime at every grid point.
    pub near_zero: bool,
}

/// Tracks how often type `t` sends `s` relative to `1 - γ` along a scan
/// trajectory, for a signal that is off-path in `reference`.
pub fn experimentation_rate_probe(
    game: &SignallingGame,
    trajectory: &[GridPoint],
    reference: &StrategyProfile,
    t: usize,
    s: usize,
) -> Result<ProbeReport> {
    if t >= game.n_types() || s >= game.n_signals() {
        return Err(Error::Dimension("type or signal out of range".into()));
    }
    reference.validate(game)?;
    let precondition = undominated_types(game, reference, s).contains(&t);
    let ratios: Vec<(f64, f64, f64)> =
        trajectory.iter().map(|g| (g.delta, g.gamma, g.profile.pi1[t][s] / (1.0 - g.gamma))).collect();
    let increasing_steps = ratios.windows(2).filter(|w| w[1].2 > w[0].2).count();
    let grows = ratios.len() >= 2 && ratios.last().unwrap().2 > ratios[0].2;
    let near_zero = ratios.iter().all(|r| r.2 < 1.0);
    Ok(ProbeReport { precondition, steps: ratios.len().saturating_sub(1), ratios, increasing_steps, grows, near_zero })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::receiver::ReceiverPrior;

    fn example_params(delta: f64, gamma: f64) -> LearningParams {
        let g = myopic_experimentation_game();
        LearningParams::new(delta, gamma, myopic_experimentation_sender_alpha(), ReceiverPrior::uniform(&g))
    }

    #[test]
    fn myopic_example_closed_form() {
        let g = myopic_experimentation_game();
        for gamma in [0.9, 0.99] {
            let cfg = SolverConfig { tol: 1e-11, ..SolverConfig::default() };
            let r = solve_steady_state(&g, &example_params(0.0, gamma), &cfg, None).unwrap();
            assert!(r.converged, "{r:?}");
            let expect = 1.0 - f64::powi(gamma, 6);
            assert!((r.profile.pi1[0][0] - expect).abs() < 1e-9, "{} vs {expect}", r.profile.pi1[0][0]);
            assert!((r.profile.pi1[1][1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_reply_detection() {
        let g = myopic_experimentation_game();
        assert_eq!(constant_reply(&g, 0), Some(0));
        let bq = beer_quiche();
        assert_eq!(constant_reply(&bq, BEER), None);
    }

    #[test]
    fn extrapolation_is_linear_in_one_minus_delta() {
        let mk = |v: f64| StrategyProfile { pi1: vec![vec![v, 1.0 - v]], pi2: vec![vec![0.5, 0.5]] };
        let e = extrapolate_to_patience(&[(0.9, mk(0.5)), (0.99, mk(0.59))]).unwrap();
        assert!((e.pi1[0][0] - 0.6).abs() < 1e-12);
        let clipped = extrapolate_to_patience(&[(0.9, mk(0.1)), (0.99, mk(0.91))]).unwrap();
        assert_eq!(clipped.pi1[0], vec![1.0, 0.0]);
    }

    #[test]
    fn self_confirming_on_pooling() {
        let g = beer_quiche();
        let p = beer_pooling(&g);
        assert!(self_confirming_diagnostic(&g, &p, 1e-9).unwrap().pass);
        // receiver fights after on-path beer
        let mut bad = p.clone();
        bad.pi2[BEER] = vec![1.0, 0.0];
        let r = self_confirming_diagnostic(&g, &bad, 1e-9).unwrap();
        assert!(r.failures.iter().any(|f| matches!(f, SelfConfirmingFailure::Receiver { .. })));
    }

    #[test]
    fn mixture_matches_single_component() {
        let g = myopic_experimentation_game();
        let mut p = example_params(0.0, 0.9);
        let single = solve_steady_state(&g, &p, &SolverConfig::default(), None).unwrap();
        p.mixture = vec![
            PriorComponent { weight: 0.3, sender_prior: p.sender_prior.clone(), receiver_prior: p.receiver_prior.clone() },
            PriorComponent { weight: 0.7, sender_prior: p.sender_prior.clone(), receiver_prior: p.receiver_prior.clone() },
        ];
        let mixed = solve_steady_state(&g, &p, &SolverConfig::default(), None).unwrap();
        assert!(l1_distance(&single.profile, &mixed.profile).unwrap() < 1e-8);
    }

    #[test]
    fn bad_params_rejected() {
        let g = myopic_experimentation_game();
        assert!(solve_steady_state(&g, &example_params(1.0, 0.9), &SolverConfig::default(), None).is_err());
        let mut p = example_params(0.0, 0.9);
        p.mixture = vec![PriorComponent { weight: 0.5, sender_prior: p.sender_prior.clone(), receiver_prior: p.receiver_prior.clone() }];
        assert!(solve_steady_state(&g, &p, &SolverConfig::default(), None).is_err());
    }

    #[test]
    fn trivial_game_is_fixed_immediately() {
        let g = trivial_game(crate::rational::int(3));
        let r = solve_steady_state(&g, &LearningParams::uniform(&g, 0.5, 0.9), &SolverConfig::default(), None).unwrap();
        assert!(r.converged);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn monte_carlo_residual_survives_doubled_budget() {
        let g = beer_quiche();
        let params = LearningParams::uniform(&g, 0.5, 0.9);
        let cfg = SolverConfig { samples: Some(4000), ..SolverConfig::monte_carlo(11) };
        let r = solve_steady_state(&g, &params, &cfg, None).unwrap();
        assert!(r.converged, "{r:?}");
        let doubled = SolverConfig { samples: Some(8000), seed: 12, ..cfg.clone() };
        let image = ResponseMap::new(&g, &params, &doubled).unwrap().image(&r.profile).unwrap();
        let res = l1_distance(&r.profile, &image).unwrap();
        assert!(res <= 2.0 * cfg.tol, "{res}");
    }

    fn point(gamma: f64, v: f64) -> GridPoint {
        GridPoint {
            delta: 0.9,
            gamma,
            profile: StrategyProfile { pi1: vec![vec![v, 1.0 - v], vec![0.0, 1.0]], pi2: vec![vec![0.0, 1.0], vec![1.0, 0.0]] },
            residual: 0.0,
            iterations: 1,
            converged: true,
        }
    }

    #[test]
    fn probe_reports_growth_and_precondition() {
        let g = beer_quiche();
        let qp = quiche_pooling(&g);
        let traj = [point(0.9, 0.05), point(0.99, 0.01), point(0.999, 0.002)];
        let r = experimentation_rate_probe(&g, &traj, &qp, STRONG, BEER).unwrap();
        assert!(r.precondition && r.grows && !r.near_zero);
        assert_eq!((r.increasing_steps, r.steps), (2, 2));
        // weak gains nothing from beer against quiche-pooling
        let weak = experimentation_rate_probe(&g, &traj, &qp, WEAK, BEER).unwrap();
        assert!(!weak.precondition);
        assert!(experimentation_rate_probe(&g, &traj, &qp, 5, BEER).is_err());
    }

    #[test]
    fn probe_near_zero_for_dominated_signal() {
        let g = dominant_signal_game();
        let base = LearningParams::uniform(&g, 0.0, 0.5);
        let mut traj = Vec::new();
        for gamma in [0.5, 0.7] {
            let p = base.with_lifetime(0.5, gamma);
            let r = solve_steady_state(&g, &p, &SolverConfig::default(), None).unwrap();
            traj.push(GridPoint { delta: 0.5, gamma, profile: r.profile, residual: r.residual, iterations: r.iterations, converged: r.converged });
        }
        let reference = StrategyProfile::pure(&g, &[0, 0], &[0, 0]);
        let r = experimentation_rate_probe(&g, &traj, &reference, 0, 1).unwrap();
        assert!(r.near_zero, "{r:?}");
        assert!(r.ratios.iter().all(|x| x.2 == 0.0));
    }
}
