//! Bundled games used by tests, benches, and the command-line examples.

use crate::game::{SignallingGame, StrategyProfile};
use crate::rational::{int, ratio, Rational};

pub const STRONG: usize = 0;
pub const WEAK: usize = 1;
pub const BEER: usize = 0;
pub const QUICHE: usize = 1;
pub const FIGHT: usize = 0;
pub const NO_FIGHT: usize = 1;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn table(rows: &[[[i64; 2]; 2]]) -> Vec<Vec<Vec<Rational>>> {
    rows.iter().map(|t| t.iter().map(|s| s.iter().map(|&v| int(v)).collect()).collect()).collect()
}

/// Sender payoffs `v(type, signal) + z(action)` with `v(strong, B) =
/// v(weak, Q) = 1`, the other `v` zero, `z(F) = 0`, `z(NF) = 2`.
pub fn beer_quiche_u1() -> Vec<Vec<Vec<Rational>>> {
    table(&[[[1, 3], [0, 2]], [[0, 2], [1, 3]]])
}

/// The receiver wants to fight the weak type and leave the strong type alone.
pub fn beer_quiche() -> SignallingGame {
    SignallingGame::new(
        names(&["strong", "weak"]),
        names(&["B", "Q"]),
        names(&["F", "NF"]),
        vec![ratio(9, 10), ratio(1, 10)],
        beer_quiche_u1(),
        table(&[[[0, 1], [0, 1]], [[1, 0], [1, 0]]]),
    )
    .expect("valid fixture")
}

/// Beer-quiche with a large receiver payoff (20) from fighting a weak type
/// who drinks beer, so that fighting after beer is a best reply to the prior.
pub fn modified_beer_quiche() -> SignallingGame {
    SignallingGame::new(
        names(&["strong", "weak"]),
        names(&["B", "Q"]),
        names(&["F", "NF"]),
        vec![ratio(9, 10), ratio(1, 10)],
        beer_quiche_u1(),
        table(&[[[0, 1], [0, 1]], [[20, 0], [1, 0]]]),
    )
    .expect("valid fixture")
}

/// The separable decomposition of [`beer_quiche_u1`]: `(v[type][signal], z[action])`.
pub fn beer_quiche_separable() -> (Vec<Vec<Rational>>, Vec<Rational>) {
    (vec![vec![int(1), int(0)], vec![int(0), int(1)]], vec![int(0), int(2)])
}

/// Both types eat quiche; the receiver fights after beer, not after quiche.
pub fn quiche_pooling(game: &SignallingGame) -> StrategyProfile {
    StrategyProfile::pure(game, &[QUICHE, QUICHE], &[FIGHT, NO_FIGHT])
}

/// Both types drink beer; the receiver does not fight after beer and fights
/// after quiche.
pub fn beer_pooling(game: &SignallingGame) -> StrategyProfile {
    StrategyProfile::pure(game, &[BEER, BEER], &[NO_FIGHT, FIGHT])
}

/// Two types, two signals, two actions, receiver indifferent everywhere.
///
/// Type `t1` gets `-1` / `2` from `s1` against `a1` / `a2`, and `-1/20` from
/// `s2` regardless of the action. Type `t2` gets `-1` / `0` from `s1` and `1`
/// from `s2`. With a Dirichlet(1, 3) sender prior on the responses to `s1`,
/// a myopic `t1` keeps sending `s1` while it has seen fewer than six `a1`
/// responses there.
pub fn myopic_experimentation_game() -> SignallingGame {
    let u1 = vec![
        vec![vec![int(-1), int(2)], vec![ratio(-1, 20), ratio(-1, 20)]],
        vec![vec![int(-1), int(0)], vec![int(1), int(1)]],
    ];
    let u2 = vec![vec![vec![int(0); 2]; 2]; 2];
    SignallingGame::new(
        names(&["t1", "t2"]),
        names(&["s1", "s2"]),
        names(&["a1", "a2"]),
        vec![ratio(1, 2), ratio(1, 2)],
        u1,
        u2,
    )
    .expect("valid fixture")
}

/// Sender Dirichlet pseudo-counts for [`myopic_experimentation_game`].
pub fn myopic_experimentation_sender_alpha() -> Vec<Vec<f64>> {
    vec![vec![1.0, 3.0], vec![1.0, 1.0]]
}

/// One type, one signal, one action, sender payoff `c`.
pub fn trivial_game(c: Rational) -> SignallingGame {
    SignallingGame::new(
        names(&["only"]),
        names(&["s"]),
        names(&["a"]),
        vec![int(1)],
        vec![vec![vec![c]]],
        vec![vec![vec![int(0)]]],
    )
    .expect("valid fixture")
}

/// After signal `s0` the receiver's action `x1` is strictly dominated; both
/// types strictly prefer `s1`.
pub fn dominated_receiver_game() -> SignallingGame {
    SignallingGame::new(
        names(&["t0", "t1"]),
        names(&["s0", "s1"]),
        names(&["x0", "x1"]),
        vec![ratio(1, 2), ratio(1, 2)],
        table(&[[[0, 0], [1, 1]], [[0, 0], [1, 1]]]),
        table(&[[[1, 0], [0, 0]], [[1, 0], [0, 0]]]),
    )
    .expect("valid fixture")
}

/// Signal `s0` pays 10 more than `s1` against any action for both types.
pub fn dominant_signal_game() -> SignallingGame {
    SignallingGame::new(
        names(&["t0", "t1"]),
        names(&["s0", "s1"]),
        names(&["x0", "x1"]),
        vec![ratio(1, 2), ratio(1, 2)],
        table(&[[[10, 11], [0, 1]], [[10, 12], [0, 2]]]),
        table(&[[[0, 1], [0, 1]], [[1, 0], [1, 0]]]),
    )
    .expect("valid fixture")
}
