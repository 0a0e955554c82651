//! Finite signalling games, strategy profiles, and equilibrium checks.
//!
//! Payoffs are held as exact rationals (with a cached `f64` view for the
//! simulation paths). Strategy profiles are floating point: they come either
//! from hand-written analytic profiles, where every entry is exactly
//! representable, or from simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearSystem, Relation};
use crate::rational::{self, Rational};
use crate::refinement::{br_membership, BeliefConstraintSet};

const ROW_TOL: f64 = 1e-12;

/// Payoff table indexed `(type, signal, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTable {
    n_signals: usize,
    n_actions: usize,
    exact: Vec<Rational>,
    float: Vec<f64>,
}

impl PayoffTable {
    fn from_nested(rows: Vec<Vec<Vec<Rational>>>, n_s: usize, n_a: usize, who: &str) -> Result<Self> {
        let mut exact = Vec::with_capacity(rows.len() * n_s * n_a);
        for (t, by_signal) in rows.into_iter().enumerate() {
            if by_signal.len() != n_s {
                return Err(Error::InvalidGame(format!("{who}[{t}] has {} signal rows, expected {n_s}", by_signal.len())));
            }
            for (s, by_action) in by_signal.into_iter().enumerate() {
                if by_action.len() != n_a {
                    return Err(Error::InvalidGame(format!(
                        "{who}[{t}][{s}] has {} entries, expected {n_a}",
                        by_action.len()
                    )));
                }
                exact.extend(by_action);
            }
        }
        let float = exact.iter().map(rational::to_f64).collect();
        Ok(Self { n_signals: n_s, n_actions: n_a, exact, float })
    }

    #[inline]
    fn idx(&self, t: usize, s: usize, a: usize) -> usize {
        (t * self.n_signals + s) * self.n_actions + a
    }

    pub fn get(&self, t: usize, s: usize, a: usize) -> &Rational {
        &self.exact[self.idx(t, s, a)]
    }

    #[inline]
    pub fn get_f64(&self, t: usize, s: usize, a: usize) -> f64 {
        self.float[self.idx(t, s, a)]
    }

    /// Exact payoff row over actions for `(type, signal)`.
    pub fn row(&self, t: usize, s: usize) -> &[Rational] {
        let i = self.idx(t, s, 0);
        &self.exact[i..i + self.n_actions]
    }

    pub fn row_f64(&self, t: usize, s: usize) -> &[f64] {
        let i = self.idx(t, s, 0);
        &self.float[i..i + self.n_actions]
    }
}

/// A finite signalling game: types drawn from `prior`, signals, actions,
/// and sender / receiver payoffs `u1`, `u2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignallingGame {
    types: Vec<String>,
    signals: Vec<String>,
    actions: Vec<String>,
    prior: Vec<Rational>,
    prior_f64: Vec<f64>,
    u1: PayoffTable,
    u2: PayoffTable,
}

impl SignallingGame {
    /// Payoff tables are nested `[type][signal][action]`.
    pub fn new(
        types: Vec<String>,
        signals: Vec<String>,
        actions: Vec<String>,
        prior: Vec<Rational>,
        u1: Vec<Vec<Vec<Rational>>>,
        u2: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        for (label, set) in [("types", &types), ("signals", &signals), ("actions", &actions)] {
            if set.is_empty() {
                return Err(Error::InvalidGame(format!("{label} must be non-empty")));
            }
            let mut seen = std::collections::HashSet::new();
            for name in set {
                if !seen.insert(name) {
                    return Err(Error::InvalidGame(format!("duplicate entry {name:?} in {label}")));
                }
            }
        }
        if prior.len() != types.len() {
            return Err(Error::InvalidGame(format!("prior has {} entries for {} types", prior.len(), types.len())));
        }
        if let Some(i) = prior.iter().position(|p| *p <= rational::zero()) {
            return Err(Error::InvalidGame(format!("prior of type {:?} must be positive", types[i])));
        }
        let total: Rational = prior.iter().cloned().sum();
        if total != rational::one() {
            return Err(Error::InvalidGame(format!("prior does not sum to 1 (sum = {})", rational::render(&total))));
        }
        if u1.len() != types.len() || u2.len() != types.len() {
            return Err(Error::InvalidGame("payoff tables need one block per type".into()));
        }
        let (n_s, n_a) = (signals.len(), actions.len());
        let u1 = PayoffTable::from_nested(u1, n_s, n_a, "u1")?;
        let u2 = PayoffTable::from_nested(u2, n_s, n_a, "u2")?;
        let prior_f64 = prior.iter().map(rational::to_f64).collect();
        Ok(Self { types, signals, actions, prior, prior_f64, u1, u2 })
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }
    pub fn signals(&self) -> &[String] {
        &self.signals
    }
    pub fn actions(&self) -> &[String] {
        &self.actions
    }
    pub fn n_types(&self) -> usize {
        self.types.len()
    }
    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn prior(&self) -> &[Rational] {
        &self.prior
    }
    pub fn prior_f64(&self) -> &[f64] {
        &self.prior_f64
    }
    pub fn u1(&self) -> &PayoffTable {
        &self.u1
    }
    pub fn u2(&self) -> &PayoffTable {
        &self.u2
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t == name)
    }
    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|t| t == name)
    }
    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|t| t == name)
    }

    /// Largest sender payoff available to `t` after `s`.
    pub fn max_u1(&self, t: usize, s: usize) -> &Rational {
        self.u1.row(t, s).iter().max().expect("non-empty action set")
    }

    pub fn min_u1(&self, t: usize, s: usize) -> &Rational {
        self.u1.row(t, s).iter().min().expect("non-empty action set")
    }

    /// `u1(t, s, mix)` for an exact mixed action.
    pub fn sender_payoff(&self, t: usize, s: usize, mix: &[Rational]) -> Result<Rational> {
        if mix.len() != self.n_actions() {
            return Err(Error::Dimension(format!("mix has {} entries for {} actions", mix.len(), self.n_actions())));
        }
        Ok(rational::dot(mix, self.u1.row(t, s)))
    }

    pub fn sender_payoff_f64(&self, t: usize, s: usize, mix: &[f64]) -> Result<f64> {
        if mix.len() != self.n_actions() {
            return Err(Error::Dimension(format!("mix has {} entries for {} actions", mix.len(), self.n_actions())));
        }
        Ok(mix.iter().zip(self.u1.row_f64(t, s)).map(|(m, u)| m * u).sum())
    }

    /// Receiver's expected payoff of `a` after `s` under belief `p`.
    pub fn receiver_payoff(&self, p: &[f64], s: usize, a: usize) -> f64 {
        p.iter().enumerate().map(|(t, pt)| pt * self.u2.get_f64(t, s, a)).sum()
    }

    /// Receiver best responses (within `tol`) to belief `p` after `s`.
    pub fn receiver_best_responses(&self, p: &[f64], s: usize, tol: f64) -> Vec<usize> {
        let vals: Vec<f64> = (0..self.n_actions()).map(|a| self.receiver_payoff(p, s, a)).collect();
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..self.n_actions()).filter(|&a| vals[a] >= best - tol).collect()
    }
}

/// Mixed behaviour strategies for both players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    /// `pi1[type][signal]`
    pub pi1: Vec<Vec<f64>>,
    /// `pi2[signal][action]`
    pub pi2: Vec<Vec<f64>>,
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidProfile(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidProfile(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl StrategyProfile {
    pub fn uniform(game: &SignallingGame) -> Self {
        let (n_t, n_s, n_a) = (game.n_types(), game.n_signals(), game.n_actions());
        Self { pi1: vec![vec![1.0 / n_s as f64; n_s]; n_t], pi2: vec![vec![1.0 / n_a as f64; n_a]; n_s] }
    }

    /// Pure profile: `sender[t]` is the signal of type `t`, `receiver[s]`
    /// the action after `s`.
    pub fn pure(game: &SignallingGame, sender: &[usize], receiver: &[usize]) -> Self {
        let mut p = Self {
            pi1: vec![vec![0.0; game.n_signals()]; game.n_types()],
            pi2: vec![vec![0.0; game.n_actions()]; game.n_signals()],
        };
        for (t, &s) in sender.iter().enumerate() {
            p.pi1[t][s] = 1.0;
        }
        for (s, &a) in receiver.iter().enumerate() {
            p.pi2[s][a] = 1.0;
        }
        p
    }

    pub fn validate(&self, game: &SignallingGame) -> Result<()> {
        if self.pi1.len() != game.n_types() || self.pi2.len() != game.n_signals() {
            return Err(Error::Dimension("profile shape does not match game".into()));
        }
        for (t, row) in self.pi1.iter().enumerate() {
            if row.len() != game.n_signals() {
                return Err(Error::Dimension(format!("pi1 row for type {t} has wrong length")));
            }
            check_row(row, &format!("pi1(.|{})", game.types()[t]))?;
        }
        for (s, row) in self.pi2.iter().enumerate() {
            if row.len() != game.n_actions() {
                return Err(Error::Dimension(format!("pi2 row for signal {s} has wrong length")));
            }
            check_row(row, &format!("pi2(.|{})", game.signals()[s]))?;
        }
        Ok(())
    }

    /// Zeroes entries at or below `tol` and renormalises each row.
    pub fn purified(&self, tol: f64) -> Self {
        fn clean(row: &[f64], tol: f64) -> Vec<f64> {
            let kept: Vec<f64> = row.iter().map(|&v| if v > tol { v } else { 0.0 }).collect();
            let sum: f64 = kept.iter().sum();
            if sum <= 0.0 {
                return row.to_vec();
            }
            kept.iter().map(|v| v / sum).collect()
        }
        Self {
            pi1: self.pi1.iter().map(|r| clean(r, tol)).collect(),
            pi2: self.pi2.iter().map(|r| clean(r, tol)).collect(),
        }
    }

    /// Row-wise convex combination `(1 - w) * self + w * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        let comb = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
            a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (1.0 - w) * u + w * v).collect()).collect()
        };
        Self { pi1: comb(&self.pi1, &other.pi1), pi2: comb(&self.pi2, &other.pi2) }
    }
}

/// A belief over types.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(pub Vec<f64>);

impl Belief {
    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|p| p.is_finite() && *p >= 0.0) && (self.0.iter().sum::<f64>() - 1.0).abs() <= ROW_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    Belief(Belief),
    OffPath,
}

impl Posterior {
    pub fn belief(&self) -> Option<&Belief> {
        match self {
            Posterior::Belief(b) => Some(b),
            Posterior::OffPath => None,
        }
    }
}

/// Type `t`'s payoff under the profile.
pub fn equilibrium_payoff(game: &SignallingGame, profile: &StrategyProfile, t: usize) -> f64 {
    (0..game.n_signals())
        .map(|s| {
            let pay: f64 = (0..game.n_actions()).map(|a| profile.pi2[s][a] * game.u1().get_f64(t, s, a)).sum();
            profile.pi1[t][s] * pay
        })
        .sum()
}

/// Exact version: the profile's binary floats are read as exact rationals.
pub fn equilibrium_payoff_exact(game: &SignallingGame, profile: &StrategyProfile, t: usize) -> Rational {
    let mut total = rational::zero();
    for s in 0..game.n_signals() {
        if profile.pi1[t][s] == 0.0 {
            continue;
        }
        let mix: Vec<Rational> = profile.pi2[s].iter().map(|&v| rational::from_f64(v)).collect();
        total += rational::from_f64(profile.pi1[t][s]) * rational::dot(&mix, game.u1().row(t, s));
    }
    total
}

/// Bayes posterior over types after `s`, or `OffPath` when `s` has zero
/// probability under `pi1`.
pub fn bayes_posterior(game: &SignallingGame, pi1: &[Vec<f64>], s: usize) -> Posterior {
    let joint: Vec<f64> = (0..game.n_types()).map(|t| game.prior_f64()[t] * pi1[t][s]).collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Posterior::OffPath;
    }
    Posterior::Belief(Belief(joint.iter().map(|j| j / total).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Deviation {
    /// Type `ty` plays `played` but `better` pays strictly more (beyond tol).
    Sender { ty: usize, played: usize, better: usize, gain: f64 },
    /// After on-path `signal` the receiver plays `played` but `better` pays more.
    Receiver { signal: usize, played: usize, better: usize, gain: f64 },
    /// After off-path `signal`, `action` is not a best response to any belief.
    OffPathUnsupported { signal: usize, action: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub witnesses: Vec<Deviation>,
}

impl Verdict {
    fn from_witnesses(witnesses: Vec<Deviation>) -> Self {
        Self { pass: witnesses.is_empty(), witnesses }
    }
}

/// Nash check: every signal in a type's support is a `tol`-best reply to
/// `pi2`, and on-path receiver play is supported on `tol`-best replies to
/// the Bayes posterior.
pub fn is_nash(game: &SignallingGame, profile: &StrategyProfile, tol: f64) -> Result<Verdict> {
    profile.validate(game)?;
    let mut witnesses = Vec::new();
    for t in 0..game.n_types() {
        let vals: Vec<f64> =
            (0..game.n_signals()).map(|s| game.sender_payoff_f64(t, s, &profile.pi2[s])).collect::<Result<_>>()?;
        let (best_s, best) = argmax(&vals);
        for s in 0..game.n_signals() {
            if profile.pi1[t][s] > 0.0 && vals[s] < best - tol {
                witnesses.push(Deviation::Sender { ty: t, played: s, better: best_s, gain: best - vals[s] });
            }
        }
    }
    for s in 0..game.n_signals() {
        let Posterior::Belief(p) = bayes_posterior(game, &profile.pi1, s) else { continue };
        let vals: Vec<f64> = (0..game.n_actions()).map(|a| game.receiver_payoff(&p.0, s, a)).collect();
        let (best_a, best) = argmax(&vals);
        for a in 0..game.n_actions() {
            if profile.pi2[s][a] > 0.0 && vals[a] < best - tol {
                witnesses.push(Deviation::Receiver { signal: s, played: a, better: best_a, gain: best - vals[a] });
            }
        }
    }
    Ok(Verdict::from_witnesses(witnesses))
}

/// Perfect Bayesian equilibrium with heterogeneous off-path beliefs: Nash,
/// plus every action played after an off-path signal is a best response
/// to some belief over types.
pub fn is_pbe_hetero(game: &SignallingGame, profile: &StrategyProfile, tol: f64) -> Result<Verdict> {
    let mut verdict = is_nash(game, profile, tol)?;
    let everything = BeliefConstraintSet::unconstrained();
    for s in 0..game.n_signals() {
        if bayes_posterior(game, &profile.pi1, s) != Posterior::OffPath {
            continue;
        }
        for a in 0..game.n_actions() {
            if profile.pi2[s][a] > tol && !br_membership(game, &everything, s, a)? {
                verdict.witnesses.push(Deviation::OffPathUnsupported { signal: s, action: a });
            }
        }
    }
    verdict.pass = verdict.witnesses.is_empty();
    Ok(verdict)
}

/// `l1` distance between two profiles of the same shape.
pub fn l1_distance(a: &StrategyProfile, b: &StrategyProfile) -> Result<f64> {
    let shape = |p: &StrategyProfile| {
        (p.pi1.iter().map(Vec::len).collect::<Vec<_>>(), p.pi2.iter().map(Vec::len).collect::<Vec<_>>())
    };
    if shape(a) != shape(b) {
        return Err(Error::Dimension("profiles have different shapes".into()));
    }
    let part = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> f64 {
        x.iter().zip(y).flat_map(|(r, q)| r.iter().zip(q).map(|(u, v)| (u - v).abs())).sum()
    };
    Ok(part(&a.pi1, &b.pi1) + part(&a.pi2, &b.pi2))
}

/// Sender-side part of the `l1` distance.
pub fn l1_sender_distance(a: &StrategyProfile, b: &StrategyProfile) -> f64 {
    a.pi1.iter().zip(&b.pi1).flat_map(|(r, q)| r.iter().zip(q).map(|(u, v)| (u - v).abs())).sum()
}

fn argmax(vals: &[f64]) -> (usize, f64) {
    let mut best = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Whether `s` is strictly dominant for type `t`: some receiver strategy
/// making `s` no better than an alternative exists iff the LP is feasible.
pub fn is_strictly_dominant(game: &SignallingGame, t: usize, s: usize) -> bool {
    if game.n_signals() == 1 {
        return true;
    }
    !(0..game.n_signals()).filter(|&o| o != s).any(|o| compare_lp(game, t, s, o))
}

/// Whether `s` is strictly dominated for type `t`: no receiver strategy
/// makes `s` weakly better than every alternative.
pub fn is_strictly_dominated(game: &SignallingGame, t: usize, s: usize) -> bool {
    let n_a = game.n_actions();
    let n_s = game.n_signals();
    let mut sys = LinearSystem::new(n_s * n_a);
    for sig in 0..n_s {
        sys.add_simplex((0..n_a).map(|a| sig * n_a + a));
    }
    for o in (0..n_s).filter(|&o| o != s) {
        let mut c = vec![rational::zero(); n_s * n_a];
        for a in 0..n_a {
            c[s * n_a + a] += game.u1().get(t, s, a);
            c[o * n_a + a] -= game.u1().get(t, o, a);
        }
        sys.add(c, Relation::Ge, rational::zero());
    }
    sys.feasible_point().is_none()
}

/// Feasibility of `u1(t, other, .) >= u1(t, s, .)` for some receiver play.
fn compare_lp(game: &SignallingGame, t: usize, s: usize, other: usize) -> bool {
    let n_a = game.n_actions();
    let mut sys = LinearSystem::new(2 * n_a);
    sys.add_simplex(0..n_a);
    sys.add_simplex(n_a..2 * n_a);
    let mut c = vec![rational::zero(); 2 * n_a];
    for a in 0..n_a {
        c[a] = game.u1().get(t, other, a).clone();
        c[n_a + a] = -game.u1().get(t, s, a).clone();
    }
    sys.add(c, Relation::Ge, rational::zero());
    sys.feasible_point().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn sender_payoff_examples() {
        let g = fixtures::beer_quiche();
        let (strong, b) = (0, fixtures::BEER);
        let nf = vec![int(0), int(1)];
        let f = vec![int(1), int(0)];
        assert_eq!(g.sender_payoff(strong, b, &nf).unwrap(), int(3));
        assert_eq!(g.sender_payoff(strong, b, &f).unwrap(), int(1));
        assert!(matches!(g.sender_payoff(strong, b, &[int(1)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn constant_row_payoff() {
        let g = fixtures::trivial_game(int(7));
        assert_eq!(g.sender_payoff(0, 0, &[int(1)]).unwrap(), int(7));
    }

    #[test]
    fn equilibrium_payoffs() {
        let g = fixtures::beer_quiche();
        assert_eq!(equilibrium_payoff(&g, &fixtures::quiche_pooling(&g), fixtures::STRONG), 2.0);
        assert_eq!(equilibrium_payoff(&g, &fixtures::beer_pooling(&g), fixtures::STRONG), 3.0);
        assert_eq!(equilibrium_payoff_exact(&g, &fixtures::beer_pooling(&g), fixtures::STRONG), int(3));
        let t = fixtures::trivial_game(int(0));
        assert_eq!(equilibrium_payoff(&t, &StrategyProfile::uniform(&t), 0), 0.0);
    }

    #[test]
    fn posterior_examples() {
        let g = fixtures::beer_quiche();
        let qp = fixtures::quiche_pooling(&g);
        assert_eq!(bayes_posterior(&g, &qp.pi1, fixtures::QUICHE), Posterior::Belief(Belief(vec![0.9, 0.1])));
        assert_eq!(bayes_posterior(&g, &qp.pi1, fixtures::BEER), Posterior::OffPath);
        let sep = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(bayes_posterior(&g, &sep, fixtures::BEER), Posterior::Belief(Belief(vec![1.0, 0.0])));
    }

    #[test]
    fn nash_examples() {
        let g = fixtures::beer_quiche();
        assert!(is_nash(&g, &fixtures::quiche_pooling(&g), 0.0).unwrap().pass);
        // both types drink beer, receiver never fights: weak prefers quiche
        let p = StrategyProfile::pure(&g, &[0, 0], &[1, 1]);
        let v = is_nash(&g, &p, 0.0).unwrap();
        assert!(!v.pass);
        assert!(v.witnesses.contains(&Deviation::Sender {
            ty: fixtures::WEAK,
            played: fixtures::BEER,
            better: fixtures::QUICHE,
            gain: 1.0
        }));
        let t = fixtures::trivial_game(int(1));
        assert!(is_nash(&t, &StrategyProfile::uniform(&t), 0.0).unwrap().pass);
    }

    #[test]
    fn pbe_hetero_examples() {
        let g = fixtures::beer_quiche();
        assert!(is_pbe_hetero(&g, &fixtures::quiche_pooling(&g), 0.0).unwrap().pass);
        let mut mixed = fixtures::quiche_pooling(&g);
        mixed.pi2[fixtures::BEER] = vec![0.5, 0.5];
        assert!(is_pbe_hetero(&g, &mixed, 0.0).unwrap().pass);

        // receiver action strictly dominated after the off-path signal
        let dom = fixtures::dominated_receiver_game();
        let p = StrategyProfile::pure(&dom, &[1, 1], &[1, 0]);
        assert!(is_nash(&dom, &p, 0.0).unwrap().pass);
        let v = is_pbe_hetero(&dom, &p, 0.0).unwrap();
        assert!(!v.pass);
        assert_eq!(v.witnesses, vec![Deviation::OffPathUnsupported { signal: 0, action: 1 }]);
    }

    #[test]
    fn l1_examples() {
        let g = fixtures::beer_quiche();
        let bp = fixtures::beer_pooling(&g);
        let mut qp = fixtures::quiche_pooling(&g);
        assert_eq!(l1_distance(&bp, &bp).unwrap(), 0.0);
        qp.pi2 = bp.pi2.clone();
        assert_eq!(l1_distance(&bp, &qp).unwrap(), 4.0);
        let mut swapped = bp.clone();
        swapped.pi2[0] = vec![1.0, 0.0];
        assert_eq!(l1_distance(&bp, &swapped).unwrap(), 2.0);
        let t = fixtures::trivial_game(int(0));
        assert!(l1_distance(&bp, &StrategyProfile::uniform(&t)).is_err());
    }

    #[test]
    fn game_validation() {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let u = vec![vec![vec![int(0)]], vec![vec![int(0)]]];
        let err = SignallingGame::new(
            names(&["a", "b"]),
            names(&["s"]),
            names(&["x"]),
            vec![ratio(1, 2), ratio(3, 5)],
            u.clone(),
            u.clone(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("prior does not sum to 1"));
        let err =
            SignallingGame::new(names(&["a", "a"]), names(&["s"]), names(&["x"]), vec![ratio(1, 2); 2], u.clone(), u)
                .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn dominance_lps() {
        let g = fixtures::beer_quiche();
        for t in 0..2 {
            for s in 0..2 {
                assert!(!is_strictly_dominant(&g, t, s));
                assert!(!is_strictly_dominated(&g, t, s));
            }
        }
        let d = fixtures::dominant_signal_game();
        assert!(is_strictly_dominant(&d, 0, 0) && is_strictly_dominant(&d, 1, 0));
        assert!(is_strictly_dominated(&d, 0, 1));
    }

    fn arb_mix(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    fn arb_profile() -> impl Strategy<Value = StrategyProfile> {
        (prop::collection::vec(arb_mix(2), 2), prop::collection::vec(arb_mix(2), 2))
            .prop_map(|(pi1, pi2)| StrategyProfile { pi1, pi2 })
    }

    proptest! {
        #[test]
        fn l1_is_a_metric(a in arb_profile(), b in arb_profile(), c in arb_profile()) {
            let d = |x: &StrategyProfile, y: &StrategyProfile| l1_distance(x, y).unwrap();
            prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
            if a != b { prop_assert!(d(&a, &b) > 0.0); }
        }

        #[test]
        fn sender_payoff_is_affine(m1 in arb_mix(2), m2 in arb_mix(2), w in 0.0f64..1.0, t in 0usize..2, s in 0usize..2) {
            let g = fixtures::beer_quiche();
            let mixed: Vec<f64> = m1.iter().zip(&m2).map(|(x, y)| w * x + (1.0 - w) * y).collect();
            let lhs = g.sender_payoff_f64(t, s, &mixed).unwrap();
            let rhs = w * g.sender_payoff_f64(t, s, &m1).unwrap() + (1.0 - w) * g.sender_payoff_f64(t, s, &m2).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn posterior_is_a_belief(pi1 in prop::collection::vec(arb_mix(2), 2), s in 0usize..2) {
            let g = fixtures::beer_quiche();
            if let Posterior::Belief(b) = bayes_posterior(&g, &pi1, s) {
                prop_assert!(b.is_valid());
            }
        }

        #[test]
        fn nash_pass_implies_pbe_differs_only_off_path(p in arb_profile()) {
            let g = fixtures::beer_quiche();
            let nash = is_nash(&g, &p, 0.0).unwrap();
            let pbe = is_pbe_hetero(&g, &p, 0.0).unwrap();
            let extra: Vec<_> = pbe.witnesses.iter().filter(|w| !nash.witnesses.contains(w)).collect();
            let all_off_path = extra.iter().all(|w| matches!(w, Deviation::OffPathUnsupported { .. }));
            prop_assert!(all_off_path);
        }
    }
}
