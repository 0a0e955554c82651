//! Random instances for property checks, and deterministic seed derivation.

use rand::Rng;

use crate::game::{SignallingGame, StrategyProfile};
use crate::rational::{int, ratio, Rational};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_prior<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = w.iter().sum();
    w.iter().map(|&x| ratio(x, total)).collect()
}

fn random_table<R: Rng>(rng: &mut R, n_t: usize, n_s: usize, n_a: usize, max_abs: i64) -> Vec<Vec<Vec<Rational>>> {
    (0..n_t)
        .map(|_| (0..n_s).map(|_| (0..n_a).map(|_| int(rng.random_range(-max_abs..=max_abs))).collect()).collect())
        .collect()
}

/// Game with integer payoffs in `[-max_abs, max_abs]` and a random prior.
pub fn random_game<R: Rng>(rng: &mut R, n_t: usize, n_s: usize, n_a: usize, max_abs: i64) -> SignallingGame {
    let u1 = random_table(rng, n_t, n_s, n_a, max_abs);
    let u2 = random_table(rng, n_t, n_s, n_a, max_abs);
    SignallingGame::new(names("t", n_t), names("s", n_s), names("a", n_a), random_prior(rng, n_t), u1, u2)
        .expect("random game is valid")
}

/// Game with `u1 = v(type, signal) + z(action)`; returns the decomposition too.
pub fn random_separable_game<R: Rng>(
    rng: &mut R,
    n_t: usize,
    n_s: usize,
    n_a: usize,
) -> (SignallingGame, Vec<Vec<Rational>>, Vec<Rational>) {
    let v: Vec<Vec<Rational>> = (0..n_t).map(|_| (0..n_s).map(|_| int(rng.random_range(-4..=4))).collect()).collect();
    let z: Vec<Rational> = (0..n_a).map(|_| int(rng.random_range(-4..=4))).collect();
    let u1 = (0..n_t).map(|t| (0..n_s).map(|s| (0..n_a).map(|a| &v[t][s] + &z[a]).collect()).collect()).collect();
    let u2 = random_table(rng, n_t, n_s, n_a, 4);
    let g = SignallingGame::new(names("t", n_t), names("s", n_s), names("a", n_a), random_prior(rng, n_t), u1, u2)
        .expect("random game is valid");
    (g, v, z)
}

/// A random probability vector with a random support.
pub fn random_mix<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() }).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.iter().map(|x| x / total).collect();
        }
    }
}

pub fn random_profile<R: Rng>(rng: &mut R, game: &SignallingGame) -> StrategyProfile {
    StrategyProfile {
        pi1: (0..game.n_types()).map(|_| random_mix(rng, game.n_signals())).collect(),
        pi2: (0..game.n_signals()).map(|_| random_mix(rng, game.n_actions())).collect(),
    }
}

/// SplitMix64 finaliser; derives independent per-task seeds from a master
/// seed so results do not depend on how tasks are scheduled.
pub fn derive_seed(master: u64, task: u64) -> u64 {
    let mut z = master ^ task.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
