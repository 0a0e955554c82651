//! Aggregate sender response: exact occupancy enumeration over per-signal
//! count vectors, Monte Carlo over geometric lifetimes, and the
//! pre-programmed response paths used to couple two types.

use std::collections::HashMap;

use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::compat::{is_more_compatible, CompatibilityQuery};
use crate::error::{Error, Result};
use crate::game::SignallingGame;
use crate::gittins::{IndexPolicy, PolicyChoice};
use crate::sampling::derive_seed;

const MEMO_CAP: usize = 2_000_000;
pub const DEFAULT_MAX_STATES: usize = 4_000_000;
const CHUNK: usize = 500;

pub(crate) fn check_lifetime(delta: f64, gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("patience {delta} outside [0, 1)")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("survival probability {gamma} outside [0, 1)")));
    }
    Ok(())
}

/// Smallest `T >= 1` with `γ^T <= tol`.
pub fn truncation_horizon(gamma: f64, tol: f64) -> usize {
    if gamma == 0.0 {
        return 1;
    }
    ((tol.ln() / gamma.ln()).ceil().max(1.0)) as usize
}

/// A sender type's index policy with a memo over count states. The policy
/// does not depend on receiver play, so one agent can serve many
/// evaluations of the aggregate response.
#[derive(Debug)]
pub struct SenderAgent {
    pub policy: IndexPolicy,
    memo: RwLock<HashMap<Vec<u64>, PolicyChoice>>,
}

impl SenderAgent {
    pub fn new(game: &SignallingGame, t: usize, alpha: &[Vec<f64>], delta: f64, gamma: f64) -> Result<Self> {
        check_lifetime(delta, gamma)?;
        Ok(Self { policy: IndexPolicy::new(game, t, alpha, delta * gamma)?, memo: RwLock::new(HashMap::new()) })
    }

    pub fn choose(&self, counts: &[u64]) -> usize {
        if let Some(c) = self.memo.read().get(counts) {
            return c.signal;
        }
        let c = self.policy.choose(counts);
        let mut memo = self.memo.write();
        if memo.len() >= MEMO_CAP {
            memo.clear();
        }
        memo.insert(counts.to_vec(), c);
        c.signal
    }
}

/// Lifetime occupancy over count states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyDistribution {
    pub atoms: HashMap<Vec<u64>, f64>,
    pub truncation_mass: f64,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsrExact {
    pub distribution: Vec<f64>,
    pub error_bound: f64,
    pub horizon: usize,
    pub pruned_mass: f64,
    pub states_visited: usize,
}

fn check_pi2(game: &SignallingGame, pi2: &[Vec<f64>]) -> Result<()> {
    if pi2.len() != game.n_signals() || pi2.iter().any(|r| r.len() != game.n_actions()) {
        return Err(Error::Dimension("receiver strategy must have one row per signal over all actions".into()));
    }
    for row in pi2 {
        if row.iter().any(|p| !(*p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProfile(format!("receiver row {row:?} is not a distribution")));
        }
    }
    Ok(())
}

/// Breadth-first expansion of the count chain. `visit(state, mass, signal)`
/// sees every retained state with its occupancy weight `(1-γ)γ^t P`.
/// Returns `(signal masses, pruned, tail, horizon, states)`.
fn expand(
    agent: &SenderAgent,
    pi2: &[Vec<f64>],
    gamma: f64,
    prune_eps: f64,
    tol: f64,
    max_states: usize,
    mut visit: impl FnMut(&[u64], f64),
) -> Result<(Vec<f64>, f64, f64, usize, usize)> {
    let n_s = pi2.len();
    let n_a = pi2[0].len();
    let horizon = truncation_horizon(gamma, tol);
    let mut dist = vec![0.0; n_s];
    let mut pruned = 0.0;
    let mut visited = 0;
    let mut layer: HashMap<Vec<u64>, f64> = HashMap::new();
    layer.insert(vec![0; n_s * n_a], 1.0);
    let mut disc = 1.0;
    for _ in 0..horizon {
        let mut next: HashMap<Vec<u64>, f64> = HashMap::with_capacity(layer.len() * 2);
        for (state, p) in layer {
            visited += 1;
            let s = agent.choose(&state);
            let w = (1.0 - gamma) * disc * p;
            dist[s] += w;
            visit(&state, w);
            for (a, &q) in pi2[s].iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let mut child = state.clone();
                child[s * n_a + a] += 1;
                let pc = p * q;
                if pc < prune_eps {
                    let rest = gamma * disc * pc;
                    dist[agent.choose(&child)] += rest;
                    pruned += rest;
                } else {
                    *next.entry(child).or_insert(0.0) += pc;
                }
            }
        }
        if next.len() > max_states {
            return Err(Error::StateCap(max_states));
        }
        layer = next;
        disc *= gamma;
    }
    let mut tail = 0.0;
    for (state, p) in layer {
        let rest = disc * p;
        dist[agent.choose(&state)] += rest;
        tail += rest;
    }
    Ok((dist, pruned, tail, horizon, visited))
}

/// Exact aggregate sender response of type `t` against `pi2`. Mass of
/// pruned branches and of the truncated tail is assigned to the signal the
/// policy plays at the cut, and reported as `error_bound`.
#[allow(clippy::too_many_arguments)]
pub fn asr_exact(
    game: &SignallingGame,
    t: usize,
    pi2: &[Vec<f64>],
    alpha: &[Vec<f64>],
    delta: f64,
    gamma: f64,
    prune_eps: f64,
    tol: f64,
) -> Result<AsrExact> {
    let agent = SenderAgent::new(game, t, alpha, delta, gamma)?;
    asr_exact_with(&agent, game, pi2, gamma, prune_eps, tol, DEFAULT_MAX_STATES)
}

pub fn asr_exact_with(
    agent: &SenderAgent,
    game: &SignallingGame,
    pi2: &[Vec<f64>],
    gamma: f64,
    prune_eps: f64,
    tol: f64,
    max_states: usize,
) -> Result<AsrExact> {
    check_pi2(game, pi2)?;
    check_lifetime(0.0, gamma)?;
    if prune_eps < 0.0 || !(tol > 0.0) {
        return Err(Error::InvalidParameter("need prune_eps >= 0 and tol > 0".into()));
    }
    let (distribution, pruned, tail, horizon, states) = expand(agent, pi2, gamma, prune_eps, tol, max_states, |_, _| {})?;
    Ok(AsrExact { distribution, error_bound: pruned + tail, horizon, pruned_mass: pruned, states_visited: states })
}

/// The lifetime occupancy measure itself (for inspection on small cases).
#[allow(clippy::too_many_arguments)]
pub fn occupancy(
    game: &SignallingGame,
    t: usize,
    pi2: &[Vec<f64>],
    alpha: &[Vec<f64>],
    delta: f64,
    gamma: f64,
    prune_eps: f64,
    tol: f64,
) -> Result<OccupancyDistribution> {
    check_pi2(game, pi2)?;
    let agent = SenderAgent::new(game, t, alpha, delta, gamma)?;
    let mut atoms: HashMap<Vec<u64>, f64> = HashMap::new();
    let (_, pruned, tail, horizon, _) = expand(&agent, pi2, gamma, prune_eps, tol, DEFAULT_MAX_STATES, |s, w| {
        *atoms.entry(s.to_vec()).or_insert(0.0) += w;
    })?;
    Ok(OccupancyDistribution { atoms, truncation_mass: pruned + tail, horizon })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub distribution: Vec<f64>,
    pub std_err: Vec<f64>,
    pub samples: usize,
}

/// Ratio estimator over independent lifetimes: per-lifetime counts of each
/// outcome divided by per-lifetime lengths, with delta-method errors.
pub(crate) fn ratio_estimate(per_chunk: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)>, n: usize) -> (Vec<f64>, Vec<f64>) {
    // chunk sums: Σx, Σx², Σxy, Σy, Σy²
    let k = per_chunk[0].0.len();
    let (mut sx, mut sxx, mut sxy, mut sy, mut syy) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], 0.0, 0.0);
    for (x, xx, xy, y, yy) in per_chunk {
        for i in 0..k {
            sx[i] += x[i];
            sxx[i] += xx[i];
            sxy[i] += xy[i];
        }
        sy += y;
        syy += yy;
    }
    let nf = n as f64;
    let ybar = sy / nf;
    let mut est = vec![0.0; k];
    let mut se = vec![0.0; k];
    for i in 0..k {
        let r = sx[i] / sy;
        est[i] = r;
        // Var(X - rY) estimated from the sums
        let v = (sxx[i] - 2.0 * r * sxy[i] + r * r * syy) / nf;
        // floored at one period's weight so outcomes never sampled still
        // carry an error
        se[i] = if n > 1 { ((v.max(0.0) / (nf - 1.0)).sqrt() / ybar).max(1.0 / sy) } else { f64::INFINITY };
    }
    (est, se)
}

pub(crate) fn lifetime_length<R: Rng>(rng: &mut R, gamma: f64) -> u64 {
    if gamma == 0.0 {
        return 1;
    }
    1 + Geometric::new(1.0 - gamma).expect("valid survival probability").sample(rng)
}

pub(crate) fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Monte Carlo aggregate sender response over `n_lifetimes` lifetimes.
#[allow(clippy::too_many_arguments)]
pub fn asr_monte_carlo(
    game: &SignallingGame,
    t: usize,
    pi2: &[Vec<f64>],
    alpha: &[Vec<f64>],
    delta: f64,
    gamma: f64,
    n_lifetimes: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let agent = SenderAgent::new(game, t, alpha, delta, gamma)?;
    asr_monte_carlo_with(&agent, game, pi2, gamma, n_lifetimes, seed)
}

pub fn asr_monte_carlo_with(
    agent: &SenderAgent,
    game: &SignallingGame,
    pi2: &[Vec<f64>],
    gamma: f64,
    n_lifetimes: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_pi2(game, pi2)?;
    check_lifetime(0.0, gamma)?;
    if n_lifetimes == 0 {
        return Err(Error::InvalidParameter("need at least one lifetime".into()));
    }
    let n_s = game.n_signals();
    let n_a = game.n_actions();
    let n_chunks = n_lifetimes.div_ceil(CHUNK);
    let chunks: Vec<_> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_lifetimes - c * CHUNK);
            let (mut x, mut xx, mut xy, mut y, mut yy) = (vec![0.0; n_s], vec![0.0; n_s], vec![0.0; n_s], 0.0, 0.0);
            let mut counts = vec![0u64; n_s * n_a];
            let mut sent = vec![0.0; n_s];
            for _ in 0..count {
                counts.iter_mut().for_each(|c| *c = 0);
                sent.iter_mut().for_each(|c| *c = 0.0);
                let len = lifetime_length(&mut rng, gamma);
                for _ in 0..len {
                    let s = agent.policy.choose(&counts).signal;
                    sent[s] += 1.0;
                    let a = sample_index(&mut rng, &pi2[s]);
                    counts[s * n_a + a] += 1;
                }
                let l = len as f64;
                for i in 0..n_s {
                    x[i] += sent[i];
                    xx[i] += sent[i] * sent[i];
                    xy[i] += sent[i] * l;
                }
                y += l;
                yy += l * l;
            }
            (x, xx, xy, y, yy)
        })
        .collect();
    let (distribution, std_err) = ratio_estimate(chunks, n_lifetimes);
    Ok(MonteCarloEstimate { distribution, std_err, samples: n_lifetimes })
}

/// Per-signal response sequences: an explicit prefix, extended on demand
/// by per-signal random streams drawn from `pi2`.
#[derive(Debug, Clone)]
pub struct PreProgrammedPath {
    sequences: Vec<Vec<usize>>,
    generator: Option<(Vec<Vec<f64>>, Vec<ChaCha8Rng>)>,
}

impl PreProgrammedPath {
    /// A fixed path; asking beyond a prefix repeats its last action.
    pub fn explicit(sequences: Vec<Vec<usize>>) -> Self {
        Self { sequences, generator: None }
    }

    pub fn constant(actions: &[usize]) -> Self {
        Self::explicit(actions.iter().map(|&a| vec![a]).collect())
    }

    pub fn random(pi2: &[Vec<f64>], seed: u64) -> Self {
        let streams = (0..pi2.len()).map(|s| ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64))).collect();
        Self { sequences: vec![Vec::new(); pi2.len()], generator: Some((pi2.to_vec(), streams)) }
    }

    /// Response to the `j`-th sending of `s` (`j` from 0).
    pub fn action(&mut self, s: usize, j: usize) -> usize {
        while self.sequences[s].len() <= j {
            match &mut self.generator {
                Some((pi2, streams)) => {
                    let a = sample_index(&mut streams[s], &pi2[s]);
                    self.sequences[s].push(a);
                }
                None => return *self.sequences[s].last().expect("non-empty sequence"),
            }
        }
        self.sequences[s][j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathHistory {
    pub steps: Vec<(usize, usize)>,
}

impl PathHistory {
    /// `#(s | y^t)`: sendings of `s` among the first `t` periods.
    pub fn count(&self, s: usize, t: usize) -> usize {
        self.steps[..t.min(self.steps.len())].iter().filter(|(x, _)| *x == s).count()
    }

    /// Period (from 0) of the `j`-th sending of `s` (`j` from 1).
    pub fn sending_time(&self, s: usize, j: usize) -> Option<usize> {
        self.steps.iter().enumerate().filter(|(_, (x, _))| *x == s).nth(j - 1).map(|(t, _)| t)
    }

    /// `(1-γ) Σ γ^t 1{s_t = s}` over the simulated periods; the unseen tail
    /// carries at most `γ^len` more.
    pub fn discounted_share(&self, s: usize, gamma: f64) -> f64 {
        let mut w = 1.0 - gamma;
        let mut total = 0.0;
        for (x, _) in &self.steps {
            if *x == s {
                total += w;
            }
            w *= gamma;
        }
        total
    }
}

/// The deterministic history of a type running the index policy against a
/// pre-programmed path.
pub fn simulate_preprogrammed(
    game: &SignallingGame,
    t: usize,
    path: &mut PreProgrammedPath,
    alpha: &[Vec<f64>],
    beta: f64,
    horizon: usize,
) -> Result<PathHistory> {
    let policy = IndexPolicy::new(game, t, alpha, beta)?;
    Ok(run_path(&policy, path, horizon))
}

fn run_path(policy: &IndexPolicy, path: &mut PreProgrammedPath, horizon: usize) -> PathHistory {
    let n_a = policy.n_actions();
    let mut counts = vec![0u64; policy.n_signals() * n_a];
    let mut sent = vec![0usize; policy.n_signals()];
    let mut steps = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let s = policy.choose(&counts).signal;
        let a = path.action(s, sent[s]);
        sent[s] += 1;
        counts[s * n_a + a] += 1;
        steps.push((s, a));
    }
    PathHistory { steps }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingViolation {
    pub path: usize,
    pub j: usize,
    pub t_hi: Option<usize>,
    pub t_lo: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub precondition_met: bool,
    pub paths: usize,
    pub sendings_compared: usize,
    pub timing_violations: Vec<TimingViolation>,
    /// Paths where the discounted share of `s'` for the higher type falls
    /// short by more than the unseen tail `γ^horizon`.
    pub share_violations: Vec<(usize, f64, f64)>,
    pub mean_share_hi: f64,
    pub mean_share_lo: f64,
}

impl CouplingReport {
    pub fn is_clean(&self) -> bool {
        self.timing_violations.is_empty() && self.share_violations.is_empty()
    }
}

/// Runs both types on each path and compares the periods of their `j`-th
/// sendings of `s`.
#[allow(clippy::too_many_arguments)]
pub fn coupling_check(
    game: &SignallingGame,
    theta_hi: usize,
    theta_lo: usize,
    s: usize,
    paths: &mut [PreProgrammedPath],
    alpha: &[Vec<f64>],
    beta: f64,
    gamma: f64,
    horizon: usize,
) -> Result<CouplingReport> {
    let precondition_met =
        theta_hi == theta_lo || is_more_compatible(game, &CompatibilityQuery { theta_hi, theta_lo, signal: s })?.holds;
    let hi_policy = IndexPolicy::new(game, theta_hi, alpha, beta)?;
    let lo_policy = IndexPolicy::new(game, theta_lo, alpha, beta)?;
    let mut report = CouplingReport {
        precondition_met,
        paths: paths.len(),
        sendings_compared: 0,
        timing_violations: Vec::new(),
        share_violations: Vec::new(),
        mean_share_hi: 0.0,
        mean_share_lo: 0.0,
    };
    let tail = gamma.powi(horizon as i32);
    let n_paths = paths.len().max(1) as f64;
    for (i, path) in paths.iter_mut().enumerate() {
        let hi = run_path(&hi_policy, path, horizon);
        let lo = run_path(&lo_policy, path, horizon);
        let mut j = 1;
        while let Some(t_lo) = lo.sending_time(s, j) {
            report.sendings_compared += 1;
            let t_hi = hi.sending_time(s, j);
            if t_hi.is_none_or(|t| t > t_lo) {
                report.timing_violations.push(TimingViolation { path: i, j, t_hi, t_lo });
            }
            j += 1;
        }
        let (sh, sl) = (hi.discounted_share(s, gamma), lo.discounted_share(s, gamma));
        if sh < sl - tail - 1e-12 {
            report.share_violations.push((i, sh, sl));
        }
        report.mean_share_hi += sh / n_paths;
        report.mean_share_lo += sl / n_paths;
    }
    Ok(report)
}
