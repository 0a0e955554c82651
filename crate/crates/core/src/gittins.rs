//! Dirichlet arms, Gittins indices by retirement calibration, and the
//! sender's index policy.
//!
//! Indices are reported in per-period units. Each computation returns a
//! certified interval: the dynamic program is cut at a finite depth and the
//! frontier values are bracketed from below (retire, or keep pulling at the
//! current posterior mean) and from above (the value with the arm's
//! parameters revealed, or the best reward for arms with three or more
//! distinct rewards). Both brackets are propagated to the root.

use std::collections::HashMap;
use std::sync::OnceLock;

use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::compat::{is_more_compatible, CompatibilityQuery};
use crate::error::{Error, Result};
use crate::game::SignallingGame;
use crate::rational::{self, Rational};

pub const TIE_EPS: f64 = 1e-9;
const FIRST_HORIZON: usize = 16;
const CACHE_CAP: usize = 4_000_000;

/// Prior pseudo-counts and observed responses for one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletArm {
    pub alpha: Vec<f64>,
    pub counts: Vec<u64>,
}

impl DirichletArm {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        Self::with_counts(alpha, vec![0; n])
    }

    pub fn with_counts(alpha: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParameter(format!("Dirichlet weights must be positive: {alpha:?}")));
        }
        if counts.len() != alpha.len() {
            return Err(Error::Dimension(format!("{} counts for {} actions", counts.len(), alpha.len())));
        }
        Ok(Self { alpha, counts })
    }

    pub fn observe(&mut self, a: usize) {
        self.counts[a] += 1;
    }

    pub fn effective(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.counts).map(|(a, &n)| a + n as f64).collect()
    }

    /// Posterior predictive distribution of the next response.
    pub fn predictive(&self) -> Vec<f64> {
        let eff = self.effective();
        let total: f64 = eff.iter().sum();
        eff.iter().map(|x| x / total).collect()
    }
}

/// One arm per signal, plus the effective discount factor `δγ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenderBeliefState {
    pub arms: Vec<DirichletArm>,
    pub beta: f64,
}

impl SenderBeliefState {
    pub fn fresh(alpha: &[Vec<f64>], beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let arms = alpha.iter().map(|a| DirichletArm::new(a.clone())).collect::<Result<_>>()?;
        Ok(Self { arms, beta })
    }

    pub fn validate(&self, game: &SignallingGame) -> Result<()> {
        check_beta(self.beta)?;
        if self.arms.len() != game.n_signals() {
            return Err(Error::Dimension(format!("{} arms for {} signals", self.arms.len(), game.n_signals())));
        }
        for arm in &self.arms {
            if arm.alpha.len() != game.n_actions() {
                return Err(Error::Dimension(format!("arm over {} actions, game has {}", arm.alpha.len(), game.n_actions())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GittinsResult {
    pub index: f64,
    pub error_bound: f64,
    pub horizon_used: usize,
}

impl GittinsResult {
    pub fn lo(&self) -> f64 {
        self.index - self.error_bound
    }
    pub fn hi(&self) -> f64 {
        self.index + self.error_bound
    }
    fn exact(v: f64) -> Self {
        Self { index: v, error_bound: 0.0, horizon_used: 0 }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("discount factor {beta} outside [0, 1)")));
    }
    Ok(())
}

pub fn posterior_mean_reward(game: &SignallingGame, t: usize, s: usize, arm: &DirichletArm) -> f64 {
    arm.predictive().iter().zip(game.u1().row_f64(t, s)).map(|(p, u)| p * u).sum()
}

/// [`posterior_mean_reward`] in exact arithmetic (pseudo-counts are read as
/// the exact binary values of their `f64`s).
pub fn posterior_mean_reward_exact(game: &SignallingGame, t: usize, s: usize, arm: &DirichletArm) -> Rational {
    let eff: Vec<Rational> =
        arm.alpha.iter().zip(&arm.counts).map(|(a, &n)| rational::from_f64(*a) + rational::from_f64(n as f64)).collect();
    let total: Rational = eff.iter().sum();
    eff.iter().zip(game.u1().row(t, s)).map(|(w, u)| w * u).sum::<Rational>() / total
}

/// An arm after merging actions with equal reward (Dirichlet aggregation
/// leaves the reward process unchanged).
#[derive(Debug, Clone, PartialEq)]
enum Reduced {
    Constant(f64),
    /// Normalised to rewards 0/1: `index = low + (high - low) * G(a, b)`
    /// where `a` weights the high reward.
    Bernoulli { low: f64, high: f64, a: f64, b: f64 },
    General { rewards: Vec<f64>, weights: Vec<f64> },
}

/// Groups of actions with equal reward for one reward row.
#[derive(Debug, Clone)]
struct RewardGroups {
    values: Vec<f64>,
    group_of: Vec<usize>,
}

impl RewardGroups {
    fn new(rewards: &[f64]) -> Self {
        let mut values: Vec<f64> = rewards.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite rewards"));
        values.dedup();
        let group_of = rewards.iter().map(|r| values.iter().position(|v| v == r).unwrap()).collect();
        Self { values, group_of }
    }

    fn reduce(&self, alpha: &[f64], counts: &[u64]) -> Reduced {
        let mut w = vec![0.0; self.values.len()];
        for (a, g) in self.group_of.iter().enumerate() {
            w[*g] += alpha[a] + counts[a] as f64;
        }
        match self.values.len() {
            1 => Reduced::Constant(self.values[0]),
            2 => Reduced::Bernoulli { low: self.values[0], high: self.values[1], a: w[1], b: w[0] },
            _ => Reduced::General { rewards: self.values.clone(), weights: w },
        }
    }
}

impl Reduced {
    fn mean(&self) -> f64 {
        match self {
            Reduced::Constant(c) => *c,
            Reduced::Bernoulli { low, high, a, b } => low + (high - low) * a / (a + b),
            Reduced::General { rewards, weights } => {
                let total: f64 = weights.iter().sum();
                rewards.iter().zip(weights).map(|(r, w)| r * w / total).sum()
            }
        }
    }

    fn max_reward(&self) -> f64 {
        match self {
            Reduced::Constant(c) => *c,
            Reduced::Bernoulli { high, .. } => *high,
            Reduced::General { rewards, .. } => *rewards.last().unwrap(),
        }
    }

    fn range(&self) -> f64 {
        match self {
            Reduced::Constant(_) => 0.0,
            Reduced::Bernoulli { low, high, .. } => high - low,
            Reduced::General { rewards, .. } => rewards.last().unwrap() - rewards[0],
        }
    }

    /// Whether `index(beta, tol)` would be answered from the cache.
    fn is_cached(&self, beta: f64, tol: f64) -> bool {
        match self {
            Reduced::Constant(_) => true,
            _ if beta == 0.0 => true,
            Reduced::Bernoulli { low, high, a, b } => {
                let key = (a.to_bits(), b.to_bits(), beta.to_bits(), (tol / (high - low)).to_bits());
                caches().bernoulli.read().contains_key(&key)
            }
            Reduced::General { rewards, weights } => {
                caches().general.read().contains_key(&general_key(rewards, weights, beta, tol))
            }
        }
    }

    fn index(&self, beta: f64, tol: f64) -> GittinsResult {
        match self {
            Reduced::Constant(c) => GittinsResult::exact(*c),
            _ if beta == 0.0 => GittinsResult::exact(self.mean()),
            Reduced::Bernoulli { low, high, a, b } => {
                let d = high - low;
                let g = bernoulli_index_cached(*a, *b, beta, tol / d);
                GittinsResult {
                    index: (low + d * g.index).clamp(*low, *high),
                    error_bound: d * g.error_bound,
                    horizon_used: g.horizon_used,
                }
            }
            Reduced::General { rewards, weights } => general_index_cached(rewards, weights, beta, tol),
        }
    }
}

/// Depth at which `β^H · range <= tol · (1 - β)`.
pub fn a_priori_horizon(beta: f64, range: f64, tol: f64) -> usize {
    if beta == 0.0 || range <= 0.0 {
        return 1;
    }
    let h = ((tol * (1.0 - beta) / range).ln() / beta.ln()).ceil();
    (h.max(1.0)) as usize
}

type BernoulliKey = (u64, u64, u64, u64);
type GeneralKey = Vec<u64>;

struct Caches {
    bernoulli: RwLock<HashMap<BernoulliKey, GittinsResult>>,
    general: RwLock<HashMap<GeneralKey, GittinsResult>>,
}

fn caches() -> &'static Caches {
    static CACHES: OnceLock<Caches> = OnceLock::new();
    CACHES.get_or_init(|| Caches { bernoulli: RwLock::new(HashMap::new()), general: RwLock::new(HashMap::new()) })
}

/// Drops all memoised indices.
pub fn clear_index_cache() {
    caches().bernoulli.write().clear();
    caches().general.write().clear();
}

fn bernoulli_index_cached(a: f64, b: f64, beta: f64, tol: f64) -> GittinsResult {
    let key = (a.to_bits(), b.to_bits(), beta.to_bits(), tol.to_bits());
    if let Some(r) = caches().bernoulli.read().get(&key) {
        return *r;
    }
    let r = bernoulli_index(a, b, beta, tol);
    let mut map = caches().bernoulli.write();
    if map.len() >= CACHE_CAP {
        map.clear();
    }
    map.insert(key, r);
    r
}

fn general_key(rewards: &[f64], weights: &[f64], beta: f64, tol: f64) -> GeneralKey {
    rewards.iter().chain(weights).chain([&beta, &tol]).map(|x| x.to_bits()).collect()
}

fn general_index_cached(rewards: &[f64], weights: &[f64], beta: f64, tol: f64) -> GittinsResult {
    let key = general_key(rewards, weights, beta, tol);
    if let Some(r) = caches().general.read().get(&key) {
        return *r;
    }
    let r = general_index(rewards, weights, beta, tol);
    let mut map = caches().general.write();
    if map.len() >= CACHE_CAP {
        map.clear();
    }
    map.insert(key, r);
    r
}

/// `E[max(m, q)]` and its derivative in `m` for `q ~ Beta(a, b)`.
fn revealed_value(a: f64, b: f64, m: f64) -> (f64, f64) {
    if m <= 0.0 {
        return (a / (a + b), 0.0);
    }
    if m >= 1.0 {
        return (m, 1.0);
    }
    let below = beta_reg(a, b, m);
    let above_mean = a / (a + b) * (1.0 - beta_reg(a + 1.0, b, m));
    (m * below + above_mean, below)
}

/// Continuation value at the root of a 0/1 arm and its slope in `m`, with
/// the frontier at depth `h` bracketed from below or above.
fn bernoulli_continuation(a: f64, b: f64, beta: f64, h: usize, m: f64, upper: bool, v: &mut Vec<f64>, dv: &mut Vec<f64>) -> (f64, f64) {
    v.clear();
    dv.clear();
    for i in 0..=h {
        let (ai, bi) = (a + i as f64, b + (h - i) as f64);
        let (val, der) = if upper {
            revealed_value(ai, bi, m)
        } else {
            let p = ai / (ai + bi);
            if m >= p { (m, 1.0) } else { (p, 0.0) }
        };
        v.push(val);
        dv.push(der);
    }
    for d in (0..h).rev() {
        let total = a + b + d as f64;
        for i in 0..=d {
            let p = (a + i as f64) / total;
            let cont = (1.0 - beta) * p + beta * (p * v[i + 1] + (1.0 - p) * v[i]);
            let dcont = beta * (p * dv[i + 1] + (1.0 - p) * dv[i]);
            if d == 0 {
                return (cont, dcont);
            }
            if cont > m {
                v[i] = cont;
                dv[i] = dcont;
            } else {
                v[i] = m;
                dv[i] = 1.0;
            }
        }
    }
    unreachable!("horizon is at least one")
}

/// Root of the decreasing convex map `f(m) = C(m) - m`, approached from the
/// left by Newton steps. Returns `(m, f(m))` with `m` at or below the root.
fn newton_root(mut eval: impl FnMut(f64) -> (f64, f64), start: f64, cap: f64, beta: f64) -> (f64, f64) {
    let mut m = start;
    let mut f = 0.0;
    for _ in 0..200 {
        let (c, dc) = eval(m);
        f = c - m;
        if f <= 1e-15 {
            break;
        }
        let slope = (dc - 1.0).min(beta - 1.0);
        let next = (m - f / slope).min(cap);
        if next <= m + 1e-16 {
            break;
        }
        m = next;
    }
    (m, f.max(0.0))
}

fn bracket_from_roots(lo: (f64, f64), hi: (f64, f64), beta: f64, floor: f64, cap: f64, h: usize) -> GittinsResult {
    let lower = lo.0.clamp(floor, cap);
    let upper = (hi.0 + hi.1 / (1.0 - beta) + 1e-14).clamp(lower, cap);
    GittinsResult { index: 0.5 * (lower + upper), error_bound: 0.5 * (upper - lower), horizon_used: h }
}

/// Gittins index of an arm paying 1 with Beta(a, b) probability, else 0.
fn bernoulli_index(a: f64, b: f64, beta: f64, tol: f64) -> GittinsResult {
    let mean = a / (a + b);
    let h_max = a_priori_horizon(beta, 1.0, tol);
    let mut h = FIRST_HORIZON.min(h_max);
    let (mut v, mut dv) = (Vec::new(), Vec::new());
    // the lower root only grows with the horizon, so it seeds the next pass
    let mut start = mean;
    loop {
        let lo = newton_root(|m| bernoulli_continuation(a, b, beta, h, m, false, &mut v, &mut dv), start, 1.0, beta);
        let hi = newton_root(|m| bernoulli_continuation(a, b, beta, h, m, true, &mut v, &mut dv), lo.0, 1.0, beta);
        let r = bracket_from_roots(lo, hi, beta, mean, 1.0, h);
        if r.error_bound <= tol || h >= h_max {
            return r;
        }
        start = lo.0;
        h = (h * 2).min(h_max);
    }
}

/// Count lattice over `k` outcomes up to depth `h`: per depth, the count
/// vectors and the child index of each node per outcome.
struct Lattice {
    nodes: Vec<Vec<Vec<u32>>>,
    children: Vec<Vec<Vec<usize>>>,
}

impl Lattice {
    fn new(k: usize, h: usize) -> Self {
        let mut nodes = vec![vec![vec![0u32; k]]];
        let mut children = Vec::with_capacity(h);
        for d in 0..h {
            let mut next: Vec<Vec<u32>> = Vec::new();
            let mut lookup: HashMap<Vec<u32>, usize> = HashMap::new();
            let mut kids = Vec::with_capacity(nodes[d].len());
            for node in &nodes[d] {
                let mut row = Vec::with_capacity(k);
                for j in 0..k {
                    let mut c = node.clone();
                    c[j] += 1;
                    let idx = *lookup.entry(c.clone()).or_insert_with(|| {
                        next.push(c);
                        next.len() - 1
                    });
                    row.push(idx);
                }
                kids.push(row);
            }
            children.push(kids);
            nodes.push(next);
        }
        Self { nodes, children }
    }
}

fn general_continuation(
    lat: &Lattice,
    rewards: &[f64],
    weights: &[f64],
    beta: f64,
    m: f64,
    upper: bool,
) -> (f64, f64) {
    let h = lat.children.len();
    let w0: f64 = weights.iter().sum();
    let top = *rewards.last().unwrap();
    let probs = |node: &[u32], d: usize| -> Vec<f64> {
        let total = w0 + d as f64;
        weights.iter().zip(node).map(|(w, &c)| (w + c as f64) / total).collect()
    };
    let mut v: Vec<f64> = Vec::new();
    let mut dv: Vec<f64> = Vec::new();
    for node in &lat.nodes[h] {
        let rho: f64 = probs(node, h).iter().zip(rewards).map(|(p, r)| p * r).sum();
        let frontier = if upper { top } else { rho };
        if m >= frontier {
            v.push(m);
            dv.push(1.0);
        } else {
            v.push(frontier);
            dv.push(0.0);
        }
    }
    for d in (0..h).rev() {
        let mut nv = Vec::with_capacity(lat.nodes[d].len());
        let mut ndv = Vec::with_capacity(lat.nodes[d].len());
        for (node, kids) in lat.nodes[d].iter().zip(&lat.children[d]) {
            let p = probs(node, d);
            let rho: f64 = p.iter().zip(rewards).map(|(p, r)| p * r).sum();
            let ev: f64 = p.iter().zip(kids).map(|(p, &c)| p * v[c]).sum();
            let edv: f64 = p.iter().zip(kids).map(|(p, &c)| p * dv[c]).sum();
            let cont = (1.0 - beta) * rho + beta * ev;
            let dcont = beta * edv;
            if d == 0 {
                return (cont, dcont);
            }
            if cont > m {
                nv.push(cont);
                ndv.push(dcont);
            } else {
                nv.push(m);
                ndv.push(1.0);
            }
        }
        v = nv;
        dv = ndv;
    }
    unreachable!("horizon is at least one")
}

fn general_index(rewards: &[f64], weights: &[f64], beta: f64, tol: f64) -> GittinsResult {
    let range = rewards.last().unwrap() - rewards[0];
    let top = *rewards.last().unwrap();
    let total: f64 = weights.iter().sum();
    let mean: f64 = rewards.iter().zip(weights).map(|(r, w)| r * w / total).sum();
    let h_max = a_priori_horizon(beta, range, tol);
    let mut h = FIRST_HORIZON.min(h_max);
    let mut start = mean;
    loop {
        let lat = Lattice::new(rewards.len(), h);
        let lo = newton_root(|m| general_continuation(&lat, rewards, weights, beta, m, false), start, top, beta);
        let hi = newton_root(|m| general_continuation(&lat, rewards, weights, beta, m, true), lo.0, top, beta);
        let r = bracket_from_roots(lo, hi, beta, mean, top, h);
        if r.error_bound <= tol || h >= h_max {
            return r;
        }
        start = lo.0;
        h = (h * 2).min(h_max);
    }
}

/// Gittins index of signal `s` for type `t` under `arm`, within `tol`.
pub fn gittins_index(game: &SignallingGame, t: usize, s: usize, arm: &DirichletArm, beta: f64, tol: f64) -> Result<GittinsResult> {
    check_beta(beta)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if arm.alpha.len() != game.n_actions() {
        return Err(Error::Dimension(format!("arm over {} actions, game has {}", arm.alpha.len(), game.n_actions())));
    }
    let reduced = RewardGroups::new(game.u1().row_f64(t, s)).reduce(&arm.alpha, &arm.counts);
    Ok(reduced.index(beta, tol))
}

/// Index policy for one sender type with fixed priors and discount factor.
///
/// Intervals are refined lazily: first `[mean, best reward]`, then indices
/// at tolerance `10^-l` of the reward range, down to [`TIE_EPS`]. Signals
/// whose intervals still overlap at the finest level are tied and the first
/// in signal order wins.
#[derive(Debug, Clone)]
pub struct IndexPolicy {
    n_actions: usize,
    alpha: Vec<Vec<f64>>,
    groups: Vec<RewardGroups>,
    beta: f64,
    tie_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolicyChoice {
    pub signal: usize,
    pub tie: bool,
}

impl IndexPolicy {
    pub fn new(game: &SignallingGame, t: usize, alpha: &[Vec<f64>], beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if alpha.len() != game.n_signals() || alpha.iter().any(|a| a.len() != game.n_actions()) {
            return Err(Error::Dimension("sender prior must have one row per signal over all actions".into()));
        }
        if alpha.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParameter("Dirichlet weights must be positive".into()));
        }
        Ok(Self {
            n_actions: game.n_actions(),
            alpha: alpha.to_vec(),
            groups: (0..game.n_signals()).map(|s| RewardGroups::new(game.u1().row_f64(t, s))).collect(),
            beta,
            tie_eps: TIE_EPS,
        })
    }

    pub fn with_tie_eps(mut self, eps: f64) -> Self {
        self.tie_eps = eps;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_signals(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Choice given counts laid out signal-major (`counts[s * |A| + a]`).
    pub fn choose(&self, counts: &[u64]) -> PolicyChoice {
        let n_s = self.alpha.len();
        if n_s == 1 {
            return PolicyChoice { signal: 0, tie: false };
        }
        let arms: Vec<Reduced> = (0..n_s)
            .map(|s| self.groups[s].reduce(&self.alpha[s], &counts[s * self.n_actions..(s + 1) * self.n_actions]))
            .collect();
        let mut bounds: Vec<(f64, f64)> = arms
            .iter()
            .map(|r| {
                let m = r.mean();
                if self.beta == 0.0 || matches!(r, Reduced::Constant(_)) {
                    (m, m)
                } else {
                    (m, r.max_reward())
                }
            })
            .collect();
        // Each signal is refined separately, one step at a time: cached
        // indices first, then the widest interval.
        let mut levels = vec![0i32; n_s];
        let mut candidates: Vec<usize> = (0..n_s).collect();
        loop {
            let best_lo = candidates.iter().map(|&s| bounds[s].0).fold(f64::NEG_INFINITY, f64::max);
            candidates.retain(|&s| bounds[s].1 >= best_lo);
            if candidates.len() == 1 {
                return PolicyChoice { signal: candidates[0], tie: false };
            }
            let open: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&s| bounds[s].0 < bounds[s].1 && level_tol(arms[s].range(), levels[s]) > self.tie_eps)
                .collect();
            if open.is_empty() {
                return PolicyChoice { signal: candidates[0], tie: true };
            }
            let next_tol = |s: usize| level_tol(arms[s].range(), levels[s] + 1).max(self.tie_eps);
            let pick = open.iter().copied().find(|&s| arms[s].is_cached(self.beta, next_tol(s))).unwrap_or_else(|| {
                open.iter()
                    .copied()
                    .max_by(|&x, &y| (bounds[x].1 - bounds[x].0).total_cmp(&(bounds[y].1 - bounds[y].0)).then(y.cmp(&x)))
                    .unwrap()
            });
            let r = arms[pick].index(self.beta, next_tol(pick));
            levels[pick] += 1;
            bounds[pick] = (r.lo().max(bounds[pick].0), r.hi().min(bounds[pick].1));
        }
    }

    pub fn choose_state(&self, state: &SenderBeliefState) -> PolicyChoice {
        let counts: Vec<u64> = state.arms.iter().flat_map(|a| a.counts.iter().copied()).collect();
        self.choose(&counts)
    }
}

fn level_tol(range: f64, level: i32) -> f64 {
    if level == 0 {
        f64::INFINITY
    } else {
        range * 10f64.powi(-level)
    }
}

/// Signal with the highest Gittins index; ties go to the first signal.
pub fn sender_policy(game: &SignallingGame, t: usize, state: &SenderBeliefState) -> Result<usize> {
    state.validate(game)?;
    let alpha: Vec<Vec<f64>> = state.arms.iter().map(|a| a.alpha.clone()).collect();
    Ok(IndexPolicy::new(game, t, &alpha, state.beta)?.choose_state(state).signal)
}

/// A finite-support belief over the receiver's mixed reply to one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureBelief {
    pub weights: Vec<f64>,
    pub mixtures: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beyond {
    Stop,
    ContinueForever,
}

/// A stopping rule evaluated on the responses seen so far. It is consulted
/// after each of the first `max_depth - 1` pulls; after `max_depth` pulls it
/// either stops or never stops, per `beyond`.
pub struct StoppingRule {
    pub max_depth: usize,
    pub beyond: Beyond,
    stop: Box<dyn Fn(&[usize]) -> bool + Send + Sync>,
}

impl StoppingRule {
    pub fn new(max_depth: usize, beyond: Beyond, stop: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        Self { max_depth, beyond, stop: Box::new(stop) }
    }

    /// Stop after a single pull.
    pub fn after_one() -> Self {
        Self::new(1, Beyond::Stop, |_| true)
    }

    /// Stop the first time `action` is seen, checked up to `depth` pulls.
    pub fn at_first(action: usize, depth: usize) -> Self {
        Self::new(depth, Beyond::ContinueForever, move |h: &[usize]| h.last() == Some(&action))
    }

    fn stops_after(&self, history: &[usize]) -> bool {
        if history.len() >= self.max_depth {
            self.beyond == Beyond::Stop
        } else {
            (self.stop)(history)
        }
    }
}

fn check_stopping(nu: &MixtureBelief, tau: &StoppingRule, beta: f64) -> Result<()> {
    check_beta(beta)?;
    if tau.max_depth == 0 {
        return Err(Error::InvalidParameter("stopping rule must allow at least one pull".into()));
    }
    if nu.weights.len() != nu.mixtures.len() || nu.weights.is_empty() {
        return Err(Error::Dimension("belief weights and support differ in length".into()));
    }
    Ok(())
}

/// Discounted frequencies of each action seen before stopping, normalised
/// by the expected discounted number of pulls.
pub fn induced_mixed_action(nu: &MixtureBelief, tau: &StoppingRule, beta: f64) -> Result<Vec<f64>> {
    check_stopping(nu, tau, beta)?;
    let n_a = nu.mixtures[0].len();
    let mut num = vec![0.0; n_a];
    let mut den = 0.0;
    let mut history = Vec::new();
    induced_walk(nu, tau, beta, &nu.weights.clone(), 0, &mut history, &mut num, &mut den);
    Ok(num.iter().map(|x| x / den).collect())
}

#[allow(clippy::too_many_arguments)]
fn induced_walk(
    nu: &MixtureBelief,
    tau: &StoppingRule,
    beta: f64,
    joint: &[f64],
    t: usize,
    history: &mut Vec<usize>,
    num: &mut [f64],
    den: &mut f64,
) {
    let disc = beta.powi(t as i32);
    for (i, slot) in num.iter_mut().enumerate() {
        *slot += disc * joint.iter().zip(&nu.mixtures).map(|(w, q)| w * q[i]).sum::<f64>();
    }
    *den += disc * joint.iter().sum::<f64>();
    for i in 0..num.len() {
        let next: Vec<f64> = joint.iter().zip(&nu.mixtures).map(|(w, q)| w * q[i]).collect();
        if next.iter().all(|w| *w == 0.0) {
            continue;
        }
        history.push(i);
        if history.len() >= tau.max_depth && tau.beyond == Beyond::ContinueForever {
            // each component keeps producing its own mixture forever
            let tail = beta.powi(history.len() as i32) / (1.0 - beta);
            for (j, slot) in num.iter_mut().enumerate() {
                *slot += tail * next.iter().zip(&nu.mixtures).map(|(w, q)| w * q[j]).sum::<f64>();
            }
            *den += tail * next.iter().sum::<f64>();
        } else if !tau.stops_after(history) {
            induced_walk(nu, tau, beta, &next, t + 1, history, num, den);
        }
        history.pop();
    }
}

/// Expected discounted reward and expected discounted pulls before
/// stopping, computed one support point at a time.
pub fn stopped_payoff(rewards: &[f64], nu: &MixtureBelief, tau: &StoppingRule, beta: f64) -> Result<(f64, f64)> {
    check_stopping(nu, tau, beta)?;
    let mut reward = 0.0;
    let mut pulls = 0.0;
    for (w, q) in nu.weights.iter().zip(&nu.mixtures) {
        let (r, p) = stopped_single(rewards, q, tau, beta, &mut Vec::new(), 1.0);
        reward += w * r;
        pulls += w * p;
    }
    Ok((reward, pulls))
}

fn stopped_single(rewards: &[f64], q: &[f64], tau: &StoppingRule, beta: f64, history: &mut Vec<usize>, prob: f64) -> (f64, f64) {
    let t = history.len() as i32;
    let per_pull: f64 = q.iter().zip(rewards).map(|(p, r)| p * r).sum();
    let mut reward = prob * beta.powi(t) * per_pull;
    let mut pulls = prob * beta.powi(t);
    for (i, &p) in q.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        history.push(i);
        if history.len() >= tau.max_depth && tau.beyond == Beyond::ContinueForever {
            let tail = prob * p * beta.powi(history.len() as i32) / (1.0 - beta);
            reward += tail * per_pull;
            pulls += tail;
        } else if !tau.stops_after(history) {
            let (r, n) = stopped_single(rewards, q, tau, beta, history, prob * p);
            reward += r;
            pulls += n;
        }
        history.pop();
    }
    (reward, pulls)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexViolation {
    pub sample: usize,
    pub beta: f64,
    /// `index(θ'', s') - max other index(θ'')`.
    pub lo_margin: f64,
    /// `index(θ', s') - max other index(θ')`.
    pub hi_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexOrderingReport {
    pub checks: usize,
    pub premise_held: usize,
    pub violations: Vec<IndexViolation>,
}

fn random_state<R: Rng>(rng: &mut R, n_s: usize, n_a: usize, beta: f64) -> SenderBeliefState {
    let arms = (0..n_s)
        .map(|_| DirichletArm {
            alpha: (0..n_a).map(|_| rng.random_range(0.1..3.0)).collect(),
            counts: (0..n_a).map(|_| if rng.random_bool(0.5) { rng.random_range(0..=12) } else { 0 }).collect(),
        })
        .collect();
    SenderBeliefState { arms, beta }
}

fn index_intervals(game: &SignallingGame, t: usize, state: &SenderBeliefState, tol: f64) -> Result<Vec<GittinsResult>> {
    (0..game.n_signals()).map(|s| gittins_index(game, t, s, &state.arms[s], state.beta, tol)).collect()
}

/// Samples shared beliefs and checks: whenever `s'` can be a top-index
/// signal for `θ''`, it is strictly top for `θ'`, up to certified errors.
pub fn index_ordering_check(
    game: &SignallingGame,
    theta_hi: usize,
    theta_lo: usize,
    s: usize,
    samples: usize,
    beta_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<IndexOrderingReport> {
    let q = CompatibilityQuery { theta_hi, theta_lo, signal: s };
    if !is_more_compatible(game, &q)?.holds {
        return Err(Error::Precondition(format!(
            "{} is not more compatible than {} with {}",
            game.types()[theta_hi],
            game.types()[theta_lo],
            game.signals()[s]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IndexOrderingReport { checks: 0, premise_held: 0, violations: Vec::new() };
    for sample in 0..samples {
        let base = random_state(&mut rng, game.n_signals(), game.n_actions(), 0.0);
        for &beta in beta_grid {
            let state = SenderBeliefState { arms: base.arms.clone(), beta };
            let lo = index_intervals(game, theta_lo, &state, tol)?;
            let hi = index_intervals(game, theta_hi, &state, tol)?;
            report.checks += 1;
            let others = |r: &[GittinsResult], f: fn(&GittinsResult) -> f64| {
                (0..r.len()).filter(|&o| o != s).map(|o| f(&r[o])).fold(f64::NEG_INFINITY, f64::max)
            };
            if others(&lo, GittinsResult::lo) == f64::NEG_INFINITY {
                continue;
            }
            if lo[s].hi() >= others(&lo, GittinsResult::lo) {
                report.premise_held += 1;
                if hi[s].hi() <= others(&hi, GittinsResult::lo) {
                    report.violations.push(IndexViolation {
                        sample,
                        beta,
                        lo_margin: lo[s].index - others(&lo, |r| r.index),
                        hi_margin: hi[s].index - others(&hi, |r| r.index),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// For a pair where `θ' ≻_s θ''` fails, searches near the LP witness for a
/// shared belief under which `θ''` certifiably prefers `s` by index while
/// `θ'` certifiably does not.
pub fn converse_witness_search(
    game: &SignallingGame,
    theta_hi: usize,
    theta_lo: usize,
    s: usize,
    beta: f64,
    attempts: usize,
    seed: u64,
) -> Result<Option<SenderBeliefState>> {
    let cert = is_more_compatible(game, &CompatibilityQuery { theta_hi, theta_lo, signal: s })?;
    let Some(witness) = cert.witness else { return Ok(None) };
    let centre: Vec<Vec<f64>> = witness.pi2.iter().map(|row| row.iter().map(rational::to_f64).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-7;
    for attempt in 0..attempts {
        let concentration = [20.0, 200.0, 2000.0][attempt % 3];
        let arms = centre
            .iter()
            .map(|row| {
                let alpha = row.iter().map(|p| concentration * (p + 0.05 * rng.random::<f64>()) + 1e-3).collect();
                DirichletArm { counts: vec![0; row.len()], alpha }
            })
            .collect();
        let state = SenderBeliefState { arms, beta };
        let lo = index_intervals(game, theta_lo, &state, tol)?;
        let hi = index_intervals(game, theta_hi, &state, tol)?;
        let others = (0..game.n_signals()).filter(|&o| o != s);
        let lo_prefers = others.clone().all(|o| lo[s].lo() >= lo[o].hi());
        let hi_not_strict = others.clone().any(|o| hi[s].hi() <= hi[o].lo());
        if lo_prefers && hi_not_strict {
            return Ok(Some(state));
        }
    }
    Ok(None)
}
