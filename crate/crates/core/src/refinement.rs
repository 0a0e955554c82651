//! Compatibility-based belief restrictions and the criteria built on them.

use num::Zero;
use serde::Serialize;

use crate::compat::compatibility_relation;
use crate::error::{Error, Result};
use crate::game::{equilibrium_payoff_exact, SignallingGame, StrategyProfile};
use crate::lp::{LinearSystem, Relation};
use crate::rational::{self, Rational};

/// A polytope of beliefs over types: the simplex, optionally restricted to
/// a support set, intersected with odds-ratio half-spaces
/// `p(θ'') λ(θ') - λ(θ'') p(θ') <= 0` for each listed `(θ', θ'')`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BeliefConstraintSet {
    pub odds_constraints: Vec<(usize, usize)>,
    pub support_restriction: Option<Vec<usize>>,
}

impl BeliefConstraintSet {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn is_unconstrained(&self) -> bool {
        self.odds_constraints.is_empty() && self.support_restriction.is_none()
    }

    /// The feasibility system over `p`, one variable per type.
    pub fn system(&self, game: &SignallingGame) -> LinearSystem {
        let n = game.n_types();
        let mut sys = LinearSystem::new(n);
        sys.add_simplex(0..n);
        if let Some(support) = &self.support_restriction {
            for t in (0..n).filter(|t| !support.contains(t)) {
                let mut c = vec![rational::zero(); n];
                c[t] = rational::one();
                sys.add(c, Relation::Eq, rational::zero());
            }
        }
        let lambda = game.prior();
        for &(hi, lo) in &self.odds_constraints {
            let mut c = vec![rational::zero(); n];
            c[lo] += &lambda[hi];
            c[hi] -= &lambda[lo];
            sys.add(c, Relation::Le, rational::zero());
        }
        sys
    }

    pub fn contains(&self, game: &SignallingGame, p: &[Rational]) -> bool {
        self.system(game).satisfied_by(p)
    }

    pub fn is_empty(&self, game: &SignallingGame) -> bool {
        self.system(game).feasible_point().is_none()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut odds = self.odds_constraints.clone();
        for pair in &other.odds_constraints {
            if !odds.contains(pair) {
                odds.push(*pair);
            }
        }
        let support = match (&self.support_restriction, &other.support_restriction) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a.iter().filter(|t| b.contains(t)).cloned().collect()),
        };
        Self { odds_constraints: odds, support_restriction: support }
    }
}

/// `J(s, π*)`: types for which some response to `s` beats their payoff
/// under the profile.
pub fn undominated_types(game: &SignallingGame, profile: &StrategyProfile, s: usize) -> Vec<usize> {
    (0..game.n_types()).filter(|&t| *game.max_u1(t, s) > equilibrium_payoff_exact(game, profile, t)).collect()
}

/// `J̃(s, π*)`: as [`undominated_types`] with a weak inequality.
pub fn weakly_undominated_types(game: &SignallingGame, profile: &StrategyProfile, s: usize) -> Vec<usize> {
    (0..game.n_types()).filter(|&t| *game.max_u1(t, s) >= equilibrium_payoff_exact(game, profile, t)).collect()
}

/// Admissible beliefs at `s`: odds restrictions for every `θ' ≻_s θ''` with
/// `θ' ∈ J(s, π*)`. `relation` is the output of `compatibility_relation(s)`.
pub fn admissible_beliefs(
    game: &SignallingGame,
    profile: &StrategyProfile,
    s: usize,
    relation: &[(usize, usize)],
) -> BeliefConstraintSet {
    let j = undominated_types(game, profile, s);
    BeliefConstraintSet {
        odds_constraints: relation.iter().filter(|(hi, lo)| hi != lo && j.contains(hi)).cloned().collect(),
        support_restriction: None,
    }
}

/// Strongly admissible beliefs at `s`: supported on `J̃(s, π*)` and subject
/// to every odds restriction of the relation; the whole simplex when `J̃`
/// is empty.
pub fn strongly_admissible_beliefs(
    game: &SignallingGame,
    profile: &StrategyProfile,
    s: usize,
    relation: &[(usize, usize)],
) -> BeliefConstraintSet {
    let jt = weakly_undominated_types(game, profile, s);
    if jt.is_empty() {
        return BeliefConstraintSet::unconstrained();
    }
    let support = if jt.len() == game.n_types() { None } else { Some(jt) };
    BeliefConstraintSet {
        odds_constraints: relation.iter().filter(|(hi, lo)| hi != lo).cloned().collect(),
        support_restriction: support,
    }
}

fn br_system(game: &SignallingGame, set: &BeliefConstraintSet, s: usize, a: usize) -> LinearSystem {
    let mut sys = set.system(game);
    for other in (0..game.n_actions()).filter(|&o| o != a) {
        let c: Vec<Rational> = (0..game.n_types()).map(|t| game.u2().get(t, s, a) - game.u2().get(t, s, other)).collect();
        sys.add(c, Relation::Ge, rational::zero());
    }
    sys
}

/// A belief in `set` against which `a` is a best reply after `s`.
pub fn br_witness(game: &SignallingGame, set: &BeliefConstraintSet, s: usize, a: usize) -> Result<Option<Vec<Rational>>> {
    if set.is_empty(game) {
        return Err(Error::EmptySet);
    }
    Ok(br_system(game, set, s, a).feasible_point())
}

/// `a ∈ BR(P, s)`.
pub fn br_membership(game: &SignallingGame, set: &BeliefConstraintSet, s: usize, a: usize) -> Result<bool> {
    Ok(br_witness(game, set, s, a)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub pass: bool,
    /// `(signal, action)` pairs played with probability above `tol` that are
    /// not best replies to any admissible belief.
    pub violations: Vec<(usize, usize)>,
    /// Signals whose restricted belief set turned out empty (only possible
    /// for non-equilibrium inputs).
    pub empty_belief_sets: Vec<usize>,
    pub belief_sets: Vec<BeliefConstraintSet>,
}

fn run_criterion(
    game: &SignallingGame,
    profile: &StrategyProfile,
    tol: f64,
    build: impl Fn(&SignallingGame, &StrategyProfile, usize, &[(usize, usize)]) -> BeliefConstraintSet,
) -> Result<CriterionVerdict> {
    profile.validate(game)?;
    let mut violations = Vec::new();
    let mut empty = Vec::new();
    let mut sets = Vec::new();
    for s in 0..game.n_signals() {
        let relation = compatibility_relation(game, s)?;
        let set = build(game, profile, s, &relation);
        let nonempty = !set.is_empty(game);
        if !nonempty {
            empty.push(s);
        }
        for a in 0..game.n_actions() {
            if profile.pi2[s][a] > tol && !(nonempty && br_membership(game, &set, s, a)?) {
                violations.push((s, a));
            }
        }
        sets.push(set);
    }
    Ok(CriterionVerdict { pass: violations.is_empty(), violations, empty_belief_sets: empty, belief_sets: sets })
}

/// Receiver play after every signal must be supported on best replies to
/// admissible beliefs.
pub fn check_compatibility_criterion(game: &SignallingGame, profile: &StrategyProfile, tol: f64) -> Result<CriterionVerdict> {
    run_criterion(game, profile, tol, admissible_beliefs)
}

pub fn check_strong_compatibility_criterion(
    game: &SignallingGame,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<CriterionVerdict> {
    run_criterion(game, profile, tol, strongly_admissible_beliefs)
}

/// Every on-path signal gets a pure receiver reply that is a strict best
/// reply to the Bayes posterior. Evaluated exactly.
pub fn is_on_path_strict(game: &SignallingGame, profile: &StrategyProfile) -> Result<bool> {
    profile.validate(game)?;
    for s in 0..game.n_signals() {
        // Unnormalised posterior weights; scaling does not affect comparisons.
        let w: Vec<Rational> = (0..game.n_types())
            .map(|t| &game.prior()[t] * rational::from_f64(profile.pi1[t][s]))
            .collect();
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        let Some(chosen) = (0..game.n_actions()).find(|&a| profile.pi2[s][a] == 1.0) else {
            return Ok(false);
        };
        let value = |a: usize| -> Rational { (0..game.n_types()).map(|t| &w[t] * game.u2().get(t, s, a)).sum() };
        let v = value(chosen);
        if (0..game.n_actions()).filter(|&a| a != chosen).any(|a| value(a) >= v) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, BEER, FIGHT, NO_FIGHT, QUICHE, STRONG, WEAK};
    use crate::game::StrategyProfile;
    use crate::rational::ratio;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn undominated_sets() {
        let g = fixtures::beer_quiche();
        let qp = fixtures::quiche_pooling(&g);
        assert_eq!(undominated_types(&g, &qp, BEER), vec![STRONG]);
        assert_eq!(weakly_undominated_types(&g, &qp, BEER), vec![STRONG]);
        let m = fixtures::modified_beer_quiche();
        let qp = fixtures::quiche_pooling(&m);
        assert_eq!(undominated_types(&m, &qp, BEER), vec![STRONG]);
        assert_eq!(weakly_undominated_types(&m, &qp, BEER), vec![STRONG]);
    }

    #[test]
    fn boundary_is_strict_for_j_weak_for_j_tilde() {
        // Beer-pooling gives strong exactly its best payoff after beer.
        let g = fixtures::beer_quiche();
        let bp = fixtures::beer_pooling(&g);
        assert!(!undominated_types(&g, &bp, BEER).contains(&STRONG));
        assert!(weakly_undominated_types(&g, &bp, BEER).contains(&STRONG));
    }

    #[test]
    fn admissible_sets() {
        let g = fixtures::beer_quiche();
        let qp = fixtures::quiche_pooling(&g);
        let rel = compatibility_relation(&g, BEER).unwrap();
        let p = admissible_beliefs(&g, &qp, BEER, &rel);
        assert_eq!(p.odds_constraints, vec![(STRONG, WEAK)]);
        // p(weak)/p(strong) <= 1/9 exactly
        assert!(p.contains(&g, &[ratio(9, 10), ratio(1, 10)]));
        assert!(!p.contains(&g, &[ratio(89, 100), ratio(11, 100)]));
        assert!(p.contains(&g, &[ratio(1, 1), ratio(0, 1)]));

        let bp = fixtures::beer_pooling(&g);
        assert!(admissible_beliefs(&g, &bp, BEER, &rel).is_unconstrained());
        assert!(admissible_beliefs(&g, &qp, BEER, &[]).is_unconstrained());
    }

    #[test]
    fn strongly_admissible_sets() {
        let m = fixtures::modified_beer_quiche();
        let qp = fixtures::quiche_pooling(&m);
        let rel = compatibility_relation(&m, BEER).unwrap();
        let p = strongly_admissible_beliefs(&m, &qp, BEER, &rel);
        assert_eq!(p.support_restriction, Some(vec![STRONG]));
        assert!(p.contains(&m, &[ratio(1, 1), ratio(0, 1)]));
        assert!(!p.contains(&m, &[ratio(99, 100), ratio(1, 100)]));

        // every type strictly worse off at s -> J̃ empty -> whole simplex
        let all_high = StrategyProfile::pure(&m, &[BEER, QUICHE], &[NO_FIGHT, NO_FIGHT]);
        assert_eq!(weakly_undominated_types(&m, &all_high, QUICHE), vec![WEAK]);
        let d = fixtures::dominant_signal_game();
        let p0 = StrategyProfile::pure(&d, &[0, 0], &[1, 1]);
        assert!(weakly_undominated_types(&d, &p0, 1).is_empty());
        assert!(strongly_admissible_beliefs(&d, &p0, 1, &[]).is_unconstrained());
        // J̃ = Θ with no odds family
        let t = StrategyProfile::pure(&d, &[1, 1], &[0, 0]);
        assert_eq!(weakly_undominated_types(&d, &t, 0), vec![0, 1]);
        assert!(strongly_admissible_beliefs(&d, &t, 0, &[]).is_unconstrained());
    }

    #[test]
    fn br_membership_examples() {
        let g = fixtures::beer_quiche();
        let p = BeliefConstraintSet { odds_constraints: vec![(STRONG, WEAK)], support_restriction: None };
        assert!(!br_membership(&g, &p, BEER, FIGHT).unwrap());
        assert!(br_membership(&g, &p, BEER, NO_FIGHT).unwrap());
        let all = BeliefConstraintSet::unconstrained();
        assert!(br_membership(&g, &all, BEER, FIGHT).unwrap());
        let empty = BeliefConstraintSet {
            odds_constraints: vec![(STRONG, WEAK)],
            support_restriction: Some(vec![WEAK]),
        };
        assert_eq!(br_membership(&g, &empty, BEER, FIGHT), Err(Error::EmptySet));
    }

    #[test]
    fn criterion_verdicts() {
        let g = fixtures::beer_quiche();
        let qp = fixtures::quiche_pooling(&g);
        let v = check_compatibility_criterion(&g, &qp, 0.0).unwrap();
        assert!(!v.pass);
        assert_eq!(v.violations, vec![(BEER, FIGHT)]);
        let bp = fixtures::beer_pooling(&g);
        assert!(check_compatibility_criterion(&g, &bp, 0.0).unwrap().pass);
        assert!(check_strong_compatibility_criterion(&g, &bp, 0.0).unwrap().pass);
        assert!(!check_strong_compatibility_criterion(&g, &qp, 0.0).unwrap().pass);

        let m = fixtures::modified_beer_quiche();
        let qp = fixtures::quiche_pooling(&m);
        assert!(check_compatibility_criterion(&m, &qp, 0.0).unwrap().pass);
        let v = check_strong_compatibility_criterion(&m, &qp, 0.0).unwrap();
        assert_eq!(v.violations, vec![(BEER, FIGHT)]);
        assert!(is_on_path_strict(&m, &qp).unwrap());
    }

    #[test]
    fn on_path_strictness() {
        let g = fixtures::beer_quiche();
        assert!(is_on_path_strict(&g, &fixtures::quiche_pooling(&g)).unwrap());
        let mut mixed = fixtures::quiche_pooling(&g);
        mixed.pi2[QUICHE] = vec![0.5, 0.5];
        assert!(!is_on_path_strict(&g, &mixed).unwrap());
    }

    /// Brute force over a belief grid with step 1/100 (two or three types).
    fn grid_br(g: &SignallingGame, set: &BeliefConstraintSet, s: usize, a: usize) -> bool {
        let n = g.n_types();
        let steps = 100i64;
        let mut points = Vec::new();
        if n == 2 {
            for i in 0..=steps {
                points.push(vec![ratio(i, steps), ratio(steps - i, steps)]);
            }
        } else {
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    points.push(vec![ratio(i, steps), ratio(j, steps), ratio(steps - i - j, steps)]);
                }
            }
        }
        points.into_iter().any(|p| {
            set.contains(g, &p)
                && (0..g.n_actions()).all(|o| {
                    let gain: Rational = (0..n).map(|t| &p[t] * (g.u2().get(t, s, a) - g.u2().get(t, s, o))).sum();
                    gain >= rational::zero()
                })
        })
    }

    #[test]
    fn random_instances_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let g = sampling::random_game(&mut rng, 3, 2, 3, 4);
            let profile = sampling::random_profile(&mut rng, &g);
            for s in 0..g.n_signals() {
                let rel = compatibility_relation(&g, s).unwrap();
                let p = admissible_beliefs(&g, &profile, s, &rel);
                let lambda = g.prior().to_vec();
                assert!(p.contains(&g, &lambda), "admissible set must contain the prior");
                let extra = BeliefConstraintSet {
                    odds_constraints: vec![(0, 1), (2, 0)],
                    support_restriction: None,
                };
                let both = p.intersect(&extra);
                for a in 0..g.n_actions() {
                    let in_p = br_membership(&g, &p, s, a).unwrap();
                    if !both.is_empty(&g) && br_membership(&g, &both, s, a).unwrap() {
                        assert!(in_p, "shrinking the belief set cannot add best replies");
                    }
                    if grid_br(&g, &p, s, a) {
                        assert!(in_p);
                    }
                    if let Some(w) = br_witness(&g, &p, s, a).unwrap() {
                        assert!(br_system(&g, &p, s, a).satisfied_by(&w));
                    }
                }
            }
            let strong = check_strong_compatibility_criterion(&g, &profile, 0.0).unwrap();
            let plain = check_compatibility_criterion(&g, &profile, 0.0).unwrap();
            if strong.pass {
                assert!(plain.pass);
            }
        }
    }
}
