//! Receivers: plug-in posterior over sender types, myopic best replies, and
//! the aggregate receiver response.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Belief, SignallingGame};
use crate::refinement::{br_membership, BeliefConstraintSet};
use crate::sampling::derive_seed;
use crate::sender::{check_lifetime, lifetime_length, ratio_estimate, sample_index};

const CHUNK: usize = 500;
const TIE: f64 = 1e-12;

/// Dirichlet pseudo-counts over signals, one row per type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverPrior {
    pub alpha: Vec<Vec<f64>>,
}

impl ReceiverPrior {
    pub fn new(alpha: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidParameter("receiver Dirichlet weights must be positive".into()));
        }
        Ok(Self { alpha })
    }

    pub fn uniform(game: &SignallingGame) -> Self {
        Self { alpha: vec![vec![1.0; game.n_signals()]; game.n_types()] }
    }

    pub fn validate(&self, game: &SignallingGame) -> Result<()> {
        if self.alpha.len() != game.n_types() || self.alpha.iter().any(|r| r.len() != game.n_signals()) {
            return Err(Error::Dimension("receiver prior must have one row per type over all signals".into()));
        }
        Self::new(self.alpha.clone()).map(|_| ())
    }

    fn row_totals(&self) -> Vec<f64> {
        self.alpha.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Observed `(type, signal)` counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverCounts {
    pub m: Vec<Vec<u64>>,
}

impl ReceiverCounts {
    pub fn zero(game: &SignallingGame) -> Self {
        Self { m: vec![vec![0; game.n_signals()]; game.n_types()] }
    }
}

/// Belief computation over flat counts `m[t * |S| + s]`.
struct Posterior<'a> {
    game: &'a SignallingGame,
    prior: &'a ReceiverPrior,
    alpha_totals: Vec<f64>,
}

impl<'a> Posterior<'a> {
    fn new(game: &'a SignallingGame, prior: &'a ReceiverPrior) -> Self {
        Self { game, prior, alpha_totals: prior.row_totals() }
    }

    fn belief(&self, m: &[u64], totals: &[u64], s: usize, out: &mut [f64]) {
        let n_s = self.game.n_signals();
        let lambda = self.game.prior_f64();
        let mut z = 0.0;
        for t in 0..self.game.n_types() {
            let v = lambda[t] * (self.prior.alpha[t][s] + m[t * n_s + s] as f64) / (self.alpha_totals[t] + totals[t] as f64);
            out[t] = v;
            z += v;
        }
        out.iter_mut().for_each(|x| *x /= z);
    }

    fn action(&self, m: &[u64], totals: &[u64], s: usize, scratch: &mut [f64]) -> usize {
        self.belief(m, totals, s, scratch);
        best_reply(self.game, scratch, s)
    }
}

/// First action (in declared order) within `1e-12` of the best expected
/// receiver payoff.
fn best_reply(game: &SignallingGame, p: &[f64], s: usize) -> usize {
    let values: Vec<f64> = (0..game.n_actions()).map(|a| game.receiver_payoff(p, s, a)).collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|v| *v >= best - TIE).unwrap()
}

fn flatten(game: &SignallingGame, counts: &ReceiverCounts) -> Result<(Vec<u64>, Vec<u64>)> {
    if counts.m.len() != game.n_types() || counts.m.iter().any(|r| r.len() != game.n_signals()) {
        return Err(Error::Dimension("receiver counts must be types x signals".into()));
    }
    let totals = counts.m.iter().map(|r| r.iter().sum()).collect();
    Ok((counts.m.iter().flatten().copied().collect(), totals))
}

pub fn receiver_posterior_belief(
    game: &SignallingGame,
    prior: &ReceiverPrior,
    counts: &ReceiverCounts,
    s: usize,
) -> Result<Belief> {
    prior.validate(game)?;
    let (m, totals) = flatten(game, counts)?;
    let mut out = vec![0.0; game.n_types()];
    Posterior::new(game, prior).belief(&m, &totals, s, &mut out);
    Ok(Belief(out))
}

/// Best reply to the posterior after each signal.
pub fn receiver_policy(game: &SignallingGame, prior: &ReceiverPrior, counts: &ReceiverCounts) -> Result<Vec<usize>> {
    prior.validate(game)?;
    let (m, totals) = flatten(game, counts)?;
    let post = Posterior::new(game, prior);
    let mut scratch = vec![0.0; game.n_types()];
    Ok((0..game.n_signals()).map(|s| post.action(&m, &totals, s, &mut scratch)).collect())
}

fn joint_cells(game: &SignallingGame, pi1: &[Vec<f64>]) -> Result<Vec<f64>> {
    if pi1.len() != game.n_types() || pi1.iter().any(|r| r.len() != game.n_signals()) {
        return Err(Error::Dimension("sender strategy must be types x signals".into()));
    }
    for row in pi1 {
        if row.iter().any(|p| !(*p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProfile(format!("sender row {row:?} is not a distribution")));
        }
    }
    let lambda = game.prior_f64();
    Ok((0..game.n_types()).flat_map(|t| pi1[t].iter().map(move |p| lambda[t] * p)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrEstimate {
    pub pi2: Vec<Vec<f64>>,
    pub std_err: Vec<Vec<f64>>,
    pub samples: usize,
}

fn reshape(flat: &[f64], n_a: usize) -> Vec<Vec<f64>> {
    flat.chunks(n_a).map(|c| c.to_vec()).collect()
}

/// Monte Carlo aggregate receiver response.
pub fn arr_monte_carlo(
    game: &SignallingGame,
    pi1: &[Vec<f64>],
    prior: &ReceiverPrior,
    gamma: f64,
    n_lifetimes: usize,
    seed: u64,
) -> Result<ArrEstimate> {
    prior.validate(game)?;
    check_lifetime(0.0, gamma)?;
    if n_lifetimes == 0 {
        return Err(Error::InvalidParameter("need at least one lifetime".into()));
    }
    let joint = joint_cells(game, pi1)?;
    let (n_t, n_s, n_a) = (game.n_types(), game.n_signals(), game.n_actions());
    let k = n_s * n_a;
    let post = Posterior::new(game, prior);
    let chunks: Vec<_> = (0..n_lifetimes.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_lifetimes - c * CHUNK);
            let (mut x, mut xx, mut xy, mut y, mut yy) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], 0.0, 0.0);
            let mut m = vec![0u64; n_t * n_s];
            let mut totals = vec![0u64; n_t];
            let mut per = vec![0.0; k];
            let mut scratch = vec![0.0; n_t];
            for _ in 0..count {
                m.iter_mut().for_each(|v| *v = 0);
                totals.iter_mut().for_each(|v| *v = 0);
                per.iter_mut().for_each(|v| *v = 0.0);
                let len = lifetime_length(&mut rng, gamma);
                for _ in 0..len {
                    for s in 0..n_s {
                        per[s * n_a + post.action(&m, &totals, s, &mut scratch)] += 1.0;
                    }
                    let cell = sample_index(&mut rng, &joint);
                    m[cell] += 1;
                    totals[cell / n_s] += 1;
                }
                let l = len as f64;
                for i in 0..k {
                    x[i] += per[i];
                    xx[i] += per[i] * per[i];
                    xy[i] += per[i] * l;
                }
                y += l;
                yy += l * l;
            }
            (x, xx, xy, y, yy)
        })
        .collect();
    let (est, se) = ratio_estimate(chunks, n_lifetimes);
    Ok(ArrEstimate { pi2: reshape(&est, n_a), std_err: reshape(&se, n_a), samples: n_lifetimes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrExact {
    pub pi2: Vec<Vec<f64>>,
    /// `γ^(t_max + 1)`: age mass beyond the enumeration. The reported
    /// strategy is renormalised over ages `0..=t_max`.
    pub tail: f64,
    pub states_visited: usize,
}

/// Exact age-weighted receiver response over ages `0..=t_max`, by
/// enumerating count matrices with their multinomial probabilities.
pub fn arr_exact_small(
    game: &SignallingGame,
    pi1: &[Vec<f64>],
    prior: &ReceiverPrior,
    gamma: f64,
    t_max: usize,
    max_states: usize,
) -> Result<ArrExact> {
    prior.validate(game)?;
    check_lifetime(0.0, gamma)?;
    let joint = joint_cells(game, pi1)?;
    let (n_t, n_s, n_a) = (game.n_types(), game.n_signals(), game.n_actions());
    let live: Vec<usize> = (0..joint.len()).filter(|&c| joint[c] > 0.0).collect();
    let post = Posterior::new(game, prior);
    let mut acc = vec![0.0; n_s * n_a];
    let mut scratch = vec![0.0; n_t];
    let mut layer: HashMap<Vec<u64>, f64> = HashMap::new();
    layer.insert(vec![0; n_t * n_s], 1.0);
    let mut disc = 1.0;
    let mut visited = 0;
    for age in 0..=t_max {
        let w_age = (1.0 - gamma) * disc;
        let mut next: HashMap<Vec<u64>, f64> = HashMap::new();
        for (m, p) in &layer {
            visited += 1;
            let totals: Vec<u64> = (0..n_t).map(|t| m[t * n_s..(t + 1) * n_s].iter().sum()).collect();
            for s in 0..n_s {
                acc[s * n_a + post.action(m, &totals, s, &mut scratch)] += w_age * p;
            }
            if age < t_max {
                for &c in &live {
                    let mut child = m.clone();
                    child[c] += 1;
                    *next.entry(child).or_insert(0.0) += p * joint[c];
                }
            }
        }
        if next.len() > max_states {
            return Err(Error::StateCap(max_states));
        }
        layer = next;
        disc *= gamma;
    }
    let kept = 1.0 - disc;
    acc.iter_mut().for_each(|v| *v /= kept);
    Ok(ArrExact { pi2: reshape(&acc, n_a), tail: disc, states_visited: visited })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningCheckReport {
    pub vacuous: bool,
    /// Actions after `s'` that are best replies to some belief in `P_{θ'▷θ''}`.
    pub best_replies: Vec<usize>,
    /// Lifetime-weighted share of receivers whose reply to `s'` is in that set.
    pub fraction_best_reply: f64,
    pub std_err: f64,
    /// Share whose posterior after `s'` satisfies the odds restriction.
    pub fraction_in_set: f64,
    /// Empirical stand-in for the constant `C`: expected number of
    /// `(θ', s')` observations at the youngest age where 95% of simulated
    /// receivers satisfy the odds restriction. `None` if not reached.
    pub calibrated_c: Option<f64>,
    pub hypothesis_holds: bool,
    pub bound: f64,
    pub meets_bound: bool,
}

/// Simulates receivers against `pi1` and measures how often their reply to
/// `s'` is a best reply to beliefs respecting `θ' ▷ θ''` odds.
#[allow(clippy::too_many_arguments)]
pub fn receiver_learning_check(
    game: &SignallingGame,
    pi1: &[Vec<f64>],
    prior: &ReceiverPrior,
    gamma: f64,
    theta_hi: usize,
    theta_lo: usize,
    s: usize,
    n: u32,
    eps: f64,
    n_lifetimes: usize,
    seed: u64,
) -> Result<LearningCheckReport> {
    prior.validate(game)?;
    check_lifetime(0.0, gamma)?;
    let joint = joint_cells(game, pi1)?;
    if pi1[theta_hi][s] < pi1[theta_lo][s] {
        return Err(Error::Precondition(format!(
            "{} sends {} less often than {}",
            game.types()[theta_hi],
            game.signals()[s],
            game.types()[theta_lo]
        )));
    }
    let set = BeliefConstraintSet { odds_constraints: vec![(theta_hi, theta_lo)], support_restriction: None };
    let best_replies: Vec<usize> =
        (0..game.n_actions()).filter_map(|a| br_membership(game, &set, s, a).map(|b| b.then_some(a)).transpose()).collect::<Result<_>>()?;
    let vacuous = pi1[theta_hi][s] == 0.0 && pi1[theta_lo][s] == 0.0;
    let (n_t, n_s) = (game.n_types(), game.n_signals());
    let lambda = game.prior_f64();
    let odds_bound = lambda[theta_lo] / lambda[theta_hi];
    let in_set = |p: &[f64]| p[theta_lo] <= odds_bound * p[theta_hi] * (1.0 + 1e-12);
    let post = Posterior::new(game, prior);

    let chunks: Vec<_> = (0..n_lifetimes.max(1).div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
            let count = CHUNK.min(n_lifetimes.max(1) - c * CHUNK);
            let (mut x, mut xx, mut xy, mut y, mut yy) = (vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], 0.0, 0.0);
            let mut m = vec![0u64; n_t * n_s];
            let mut totals = vec![0u64; n_t];
            let mut p = vec![0.0; n_t];
            for _ in 0..count {
                m.iter_mut().for_each(|v| *v = 0);
                totals.iter_mut().for_each(|v| *v = 0);
                let mut per = [0.0f64; 2];
                let len = lifetime_length(&mut rng, gamma);
                for _ in 0..len {
                    post.belief(&m, &totals, s, &mut p);
                    if best_replies.contains(&best_reply(game, &p, s)) {
                        per[0] += 1.0;
                    }
                    if in_set(&p) {
                        per[1] += 1.0;
                    }
                    let cell = sample_index(&mut rng, &joint);
                    m[cell] += 1;
                    totals[cell / n_s] += 1;
                }
                let l = len as f64;
                for i in 0..2 {
                    x[i] += per[i];
                    xx[i] += per[i] * per[i];
                    xy[i] += per[i] * l;
                }
                y += l;
                yy += l * l;
            }
            (x, xx, xy, y, yy)
        })
        .collect();
    let (est, se) = ratio_estimate(chunks, n_lifetimes.max(1));

    let calibrated_c = if pi1[theta_hi][s] > 0.0 {
        calibrate_age(game, &joint, &post, s, &in_set, seed).map(|age| age as f64 * pi1[theta_hi][s])
    } else {
        None
    };
    let hypothesis_holds = calibrated_c.is_some_and(|c| pi1[theta_hi][s] >= (1.0 - gamma) * n as f64 * c);
    let bound = 1.0 - 1.0 / n as f64 - eps;
    Ok(LearningCheckReport {
        vacuous,
        best_replies,
        fraction_best_reply: est[0],
        std_err: se[0],
        fraction_in_set: est[1],
        calibrated_c,
        hypothesis_holds,
        bound,
        meets_bound: est[0] >= bound,
    })
}

/// Youngest age (doubling grid) at which 95% of 400 simulated receivers
/// have posteriors after `s` in the odds set.
fn calibrate_age(
    game: &SignallingGame,
    joint: &[f64],
    post: &Posterior,
    s: usize,
    in_set: &dyn Fn(&[f64]) -> bool,
    seed: u64,
) -> Option<u64> {
    const HISTORIES: usize = 400;
    let (n_t, n_s) = (game.n_types(), game.n_signals());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    let mut p = vec![0.0; n_t];
    let mut age = 1u64;
    while age <= 1 << 24 {
        let mut ok = 0;
        for _ in 0..HISTORIES {
            let m = multinomial(&mut rng, age, joint);
            let totals: Vec<u64> = (0..n_t).map(|t| m[t * n_s..(t + 1) * n_s].iter().sum()).collect();
            post.belief(&m, &totals, s, &mut p);
            if in_set(&p) {
                ok += 1;
            }
        }
        if ok as f64 >= 0.95 * HISTORIES as f64 {
            return Some(age);
        }
        age *= 2;
    }
    None
}

fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 || mass <= 0.0 {
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if i + 1 == probs.len() { left } else { Binomial::new(left, q).expect("valid binomial").sample(rng) };
        out[i] = k;
        left -= k;
        mass -= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, BEER, FIGHT, NO_FIGHT, QUICHE, STRONG, WEAK};
    use crate::game::bayes_posterior;
    use crate::rational::ratio;
    use crate::sampling;

    #[test]
    fn posterior_examples() {
        let g = fixtures::beer_quiche();
        let prior = ReceiverPrior::uniform(&g);
        let zero = ReceiverCounts::zero(&g);
        let p = receiver_posterior_belief(&g, &prior, &zero, BEER).unwrap();
        assert!((p.0[STRONG] - 0.9).abs() < 1e-15);
        let mut c = zero.clone();
        c.m[STRONG][BEER] = 10;
        assert!(receiver_posterior_belief(&g, &prior, &c, BEER).unwrap().0[STRONG] > 0.9);
        let equal = ReceiverCounts { m: vec![vec![4, 2], vec![4, 2]] };
        let p = receiver_posterior_belief(&g, &prior, &equal, QUICHE).unwrap();
        assert!((p.0[WEAK] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn policy_examples() {
        let g = fixtures::beer_quiche();
        let prior = ReceiverPrior::uniform(&g);
        assert_eq!(receiver_policy(&g, &prior, &ReceiverCounts::zero(&g)).unwrap(), vec![NO_FIGHT, NO_FIGHT]);
        let c = ReceiverCounts { m: vec![vec![0, 500], vec![500, 0]] };
        assert_eq!(receiver_policy(&g, &prior, &c).unwrap()[BEER], FIGHT);
        let t = fixtures::trivial_game(ratio(1, 1));
        assert_eq!(receiver_policy(&t, &ReceiverPrior::uniform(&t), &ReceiverCounts::zero(&t)).unwrap(), vec![0]);
    }

    #[test]
    fn posterior_consistency() {
        let g = fixtures::beer_quiche();
        let prior = ReceiverPrior { alpha: vec![vec![0.5, 2.0], vec![3.0, 1.0]] };
        let pi1 = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
        let truth = bayes_posterior(&g, &pi1, BEER);
        let truth = truth.belief().unwrap();
        let mut errs = Vec::new();
        for k in [100u64, 10_000] {
            let m = pi1.iter().map(|r| r.iter().map(|p| (p * k as f64).round() as u64).collect()).collect();
            let p = receiver_posterior_belief(&g, &prior, &ReceiverCounts { m }, BEER).unwrap();
            errs.push((p.0[0] - truth.0[0]).abs());
        }
        assert!(errs[1] < errs[0] && errs[1] < 1e-3, "{errs:?}");
    }

    #[test]
    fn newborn_receivers() {
        let g = fixtures::beer_quiche();
        let pi1 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let prior = ReceiverPrior::uniform(&g);
        let mc = arr_monte_carlo(&g, &pi1, &prior, 0.0, 50, 1).unwrap();
        assert_eq!(mc.pi2, vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
        let ex = arr_exact_small(&g, &pi1, &prior, 0.5, 0, 1000).unwrap();
        assert_eq!(ex.pi2, vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(ex.tail, 0.5);
    }

    #[test]
    fn separating_profile_receivers_leave_beer_alone() {
        let g = fixtures::beer_quiche();
        let pi1 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mc = arr_monte_carlo(&g, &pi1, &ReceiverPrior::uniform(&g), 0.99, 4000, 2).unwrap();
        assert!(mc.pi2[BEER][NO_FIGHT] >= 0.95, "{mc:?}");
        let a = arr_monte_carlo(&g, &pi1, &ReceiverPrior::uniform(&g), 0.9, 300, 5).unwrap();
        let b = arr_monte_carlo(&g, &pi1, &ReceiverPrior::uniform(&g), 0.9, 300, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_and_monte_carlo_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..3 {
            let g = sampling::random_game(&mut rng, 2, 2, 2, 3);
            let p = sampling::random_profile(&mut rng, &g);
            let prior = ReceiverPrior::uniform(&g);
            let ex = arr_exact_small(&g, &p.pi1, &prior, 0.5, 20, 1_000_000).unwrap();
            let mc = arr_monte_carlo(&g, &p.pi1, &prior, 0.5, 40_000, i).unwrap();
            for s in 0..2 {
                for a in 0..2 {
                    assert!(
                        (ex.pi2[s][a] - mc.pi2[s][a]).abs() <= ex.tail + 4.0 * mc.std_err[s][a] + 1e-12,
                        "{ex:?} {mc:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_sender_play() {
        let g = fixtures::beer_quiche();
        let pi1 = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let ex = arr_exact_small(&g, &pi1, &ReceiverPrior::uniform(&g), 0.5, 5, 100).unwrap();
        // one cell per type is live; two types give t + 1 states at age t
        assert_eq!(ex.states_visited, (1..=6).sum::<usize>());
        assert!(arr_exact_small(&g, &vec![vec![0.5, 0.5]; 2], &ReceiverPrior::uniform(&g), 0.5, 30, 50).is_err());
    }

    #[test]
    fn learning_check() {
        let g = fixtures::beer_quiche();
        let prior = ReceiverPrior::uniform(&g);
        let pi1 = vec![vec![0.05, 0.95], vec![0.01, 0.99]];
        let r = receiver_learning_check(&g, &pi1, &prior, 0.999, STRONG, WEAK, BEER, 10, 0.05, 2000, 3).unwrap();
        assert!(r.fraction_best_reply >= 0.85, "{r:?}");
        assert_eq!(r.best_replies, vec![NO_FIGHT]);
        let newborn = receiver_learning_check(&g, &pi1, &prior, 0.0, STRONG, WEAK, BEER, 10, 0.05, 100, 3).unwrap();
        assert_eq!(newborn.fraction_best_reply, 1.0);
        let silent = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let v = receiver_learning_check(&g, &silent, &prior, 0.9, STRONG, WEAK, BEER, 10, 0.05, 100, 3).unwrap();
        assert!(v.vacuous);
        assert!(receiver_learning_check(&g, &pi1, &prior, 0.9, WEAK, STRONG, BEER, 10, 0.05, 10, 3).is_err());
    }

    proptest::proptest! {
        #[test]
        fn posterior_is_a_belief(
            alpha in proptest::collection::vec(0.05f64..5.0, 6),
            m in proptest::collection::vec(0u64..50, 6),
            s in 0usize..3,
        ) {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(m[0]);
            let g = sampling::random_game(&mut rng, 2, 3, 2, 3);
            let prior = ReceiverPrior::new(alpha.chunks(3).map(|c| c.to_vec()).collect()).unwrap();
            let counts = ReceiverCounts { m: m.chunks(3).map(|c| c.to_vec()).collect() };
            let b = receiver_posterior_belief(&g, &prior, &counts, s).unwrap();
            proptest::prop_assert!(b.is_valid(), "{:?}", b);
        }
    }
}
