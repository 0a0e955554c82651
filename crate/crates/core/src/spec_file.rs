//! Game-spec files (TOML) and profile files (JSON).
//!
//! ```toml
//! [game]
//! types = ["strong", "weak"]
//! prior = ["9/10", "1/10"]
//! signals = ["B", "Q"]
//! actions = ["F", "NF"]
//! u1 = [[[1, 3], [0, 2]], [[0, 2], [1, 3]]]   # [type][signal][action]
//! u2 = [[[0, 1], [0, 1]], [[1, 0], [1, 0]]]
//!
//! [game.separable]                             # optional
//! v = [[1, 0], [0, 1]]                         # [type][signal]
//! z = [0, 2]                                   # [action]
//!
//! [priors.sender]
//! alpha = [[1, 1], [1, 1]]                     # [signal][action]
//!
//! [priors.receiver]
//! alpha = [[1, 1], [1, 1]]                     # [type][signal]
//!
//! [[priors.mixture]]                           # optional, repeatable
//! weight = 0.5
//! sender = [[1, 1], [1, 1]]
//! receiver = [[1, 1], [1, 1]]
//!
//! [defaults]
//! delta = 0.99
//! gamma = 0.999
//! tol = 1e-6
//! seed = 0
//! ```
//!
//! Payoffs and prior weights may be integers, decimals, or `"p/q"` strings;
//! decimals are read as the exact decimal they spell.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::compat::validate_separable;
use crate::error::{Error, Result};
use crate::game::{SignallingGame, StrategyProfile};
use crate::rational::{self, Rational};
use crate::receiver::ReceiverPrior;
use crate::steady::{LearningParams, PriorComponent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    pub delta: f64,
    pub gamma: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self { delta: 0.99, gamma: 0.999, tol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub game: SignallingGame,
    pub params: LearningParams,
    /// `(v[type][signal], z[action])` when the spec declares one.
    pub separable: Option<(Vec<Vec<Rational>>, Vec<Rational>)>,
    pub defaults: Defaults,
}

struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, at: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{at}: {msg}"));
    }
}

fn get<'a>(t: &'a Table, key: &str, at: &str, errs: &mut Errors) -> Option<&'a Value> {
    let v = t.get(key);
    if v.is_none() {
        errs.push(at, format!("missing key '{key}'"));
    }
    v
}

fn table<'a>(v: Option<&'a Value>, at: &str, errs: &mut Errors) -> Option<&'a Table> {
    match v? {
        Value::Table(t) => Some(t),
        _ => {
            errs.push(at, "expected a table");
            None
        }
    }
}

fn array<'a>(v: &'a Value, at: &str, errs: &mut Errors) -> Option<&'a Vec<Value>> {
    match v {
        Value::Array(a) => Some(a),
        _ => {
            errs.push(at, "expected an array");
            None
        }
    }
}

fn names(v: Option<&Value>, at: &str, errs: &mut Errors) -> Option<Vec<String>> {
    let items = array(v?, at, errs)?;
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match item {
            Value::String(s) => out.push(s.clone()),
            _ => errs.push(&format!("{at}[{i}]"), "expected a string"),
        }
    }
    (out.len() == items.len()).then_some(out)
}

fn exact(v: &Value, at: &str, errs: &mut Errors) -> Option<Rational> {
    let r = match v {
        Value::Integer(i) => Ok(rational::int(*i)),
        Value::Float(f) => rational::from_decimal_f64(*f),
        Value::String(s) => rational::parse(s),
        _ => Err(Error::Parse("expected a number or a \"p/q\" string".into())),
    };
    r.map_err(|e| errs.push(at, e)).ok()
}

fn real(v: &Value, at: &str, errs: &mut Errors) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        Value::String(s) => rational::parse(s).map(|r| rational::to_f64(&r)).map_err(|e| errs.push(at, e)).ok(),
        _ => {
            errs.push(at, "expected a number");
            None
        }
    }
}

/// Reads a nested array with the given shape, checking every level.
fn grid<T>(
    v: Option<&Value>,
    shape: &[usize],
    at: &str,
    errs: &mut Errors,
    leaf: &dyn Fn(&Value, &str, &mut Errors) -> Option<T>,
) -> Option<Vec<T>> {
    fn walk<T>(
        v: &Value,
        shape: &[usize],
        at: &str,
        errs: &mut Errors,
        leaf: &dyn Fn(&Value, &str, &mut Errors) -> Option<T>,
        out: &mut Vec<T>,
    ) -> bool {
        let Some((&n, rest)) = shape.split_first() else {
            return match leaf(v, at, errs) {
                Some(x) => {
                    out.push(x);
                    true
                }
                None => false,
            };
        };
        let Some(items) = array(v, at, errs) else { return false };
        if items.len() != n {
            errs.push(at, format!("expected {n} entries, found {}", items.len()));
            return false;
        }
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            ok &= walk(item, rest, &format!("{at}[{i}]"), errs, leaf, out);
        }
        ok
    }
    let mut out = Vec::new();
    walk(v?, shape, at, errs, leaf, &mut out).then_some(out)
}

fn nest3<T: Clone>(flat: Vec<T>, b: usize, c: usize) -> Vec<Vec<Vec<T>>> {
    flat.chunks(b * c).map(|blk| blk.chunks(c).map(|r| r.to_vec()).collect()).collect()
}

fn nest2<T: Clone>(flat: Vec<T>, c: usize) -> Vec<Vec<T>> {
    flat.chunks(c).map(|r| r.to_vec()).collect()
}

fn alpha_grid(v: Option<&Value>, rows: usize, cols: usize, at: &str, errs: &mut Errors) -> Option<Vec<Vec<f64>>> {
    let positive = |v: &Value, at: &str, errs: &mut Errors| {
        let x = real(v, at, errs)?;
        if !(x.is_finite() && x > 0.0) {
            errs.push(at, format!("Dirichlet weight must be positive, got {x}"));
            return None;
        }
        Some(x)
    };
    grid(v, &[rows, cols], at, errs, &positive).map(|f| nest2(f, cols))
}

impl GameSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates; every problem found is reported with its key path.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut errs = Errors(Vec::new());
        let spec = Self::read(&doc, &mut errs);
        match spec {
            Some(s) if errs.0.is_empty() => Ok(s),
            _ => Err(Error::Validation(errs.0)),
        }
    }

    fn read(doc: &Table, errs: &mut Errors) -> Option<Self> {
        let g = table(get(doc, "game", "spec", errs), "game", errs)?;
        let types = names(get(g, "types", "game", errs), "game.types", errs);
        let signals = names(get(g, "signals", "game", errs), "game.signals", errs);
        let actions = names(get(g, "actions", "game", errs), "game.actions", errs);
        let (types, signals, actions) = (types?, signals?, actions?);
        let (n_t, n_s, n_a) = (types.len(), signals.len(), actions.len());
        let prior = grid(get(g, "prior", "game", errs), &[n_t], "game.prior", errs, &exact);
        let u1 = grid(get(g, "u1", "game", errs), &[n_t, n_s, n_a], "game.u1", errs, &exact);
        let u2 = grid(get(g, "u2", "game", errs), &[n_t, n_s, n_a], "game.u2", errs, &exact);
        let separable = match g.get("separable") {
            None => None,
            Some(v) => {
                let t = table(Some(v), "game.separable", errs)?;
                let sv = grid(get(t, "v", "game.separable", errs), &[n_t, n_s], "game.separable.v", errs, &exact);
                let sz = grid(get(t, "z", "game.separable", errs), &[n_a], "game.separable.z", errs, &exact);
                Some((nest2(sv?, n_s), sz?))
            }
        };
        let priors = table(get(doc, "priors", "spec", errs), "priors", errs);
        let (sender, receiver, mixture) = match priors {
            Some(p) => {
                let sender = table(get(p, "sender", "priors", errs), "priors.sender", errs)
                    .and_then(|t| alpha_grid(get(t, "alpha", "priors.sender", errs), n_s, n_a, "priors.sender.alpha", errs));
                let receiver = table(get(p, "receiver", "priors", errs), "priors.receiver", errs).and_then(|t| {
                    alpha_grid(get(t, "alpha", "priors.receiver", errs), n_t, n_s, "priors.receiver.alpha", errs)
                });
                let mut mixture = Vec::new();
                if let Some(m) = p.get("mixture") {
                    for (i, item) in array(m, "priors.mixture", errs).into_iter().flatten().enumerate() {
                        let at = format!("priors.mixture[{i}]");
                        let Some(t) = table(Some(item), &at, errs) else { continue };
                        let w = get(t, "weight", &at, errs).and_then(|v| real(v, &format!("{at}.weight"), errs));
                        let s = alpha_grid(get(t, "sender", &at, errs), n_s, n_a, &format!("{at}.sender"), errs);
                        let r = alpha_grid(get(t, "receiver", &at, errs), n_t, n_s, &format!("{at}.receiver"), errs);
                        if let (Some(weight), Some(sender_prior), Some(r)) = (w, s, r) {
                            if !(weight > 0.0) {
                                errs.push(&format!("{at}.weight"), "mixture weight must be positive");
                            }
                            mixture.push(PriorComponent {
                                weight,
                                sender_prior,
                                receiver_prior: ReceiverPrior { alpha: r },
                            });
                        }
                    }
                    let total: f64 = mixture.iter().map(|c| c.weight).sum();
                    if !mixture.is_empty() && (total - 1.0).abs() > 1e-9 {
                        errs.push("priors.mixture", format!("weights do not sum to 1 (sum = {total})"));
                    }
                }
                (sender, receiver, mixture)
            }
            None => (None, None, Vec::new()),
        };
        let mut defaults = Defaults::default();
        if let Some(d) = doc.get("defaults") {
            let d = table(Some(d), "defaults", errs)?;
            for (key, v) in d {
                let at = format!("defaults.{key}");
                match key.as_str() {
                    "delta" => defaults.delta = real(v, &at, errs).unwrap_or(defaults.delta),
                    "gamma" => defaults.gamma = real(v, &at, errs).unwrap_or(defaults.gamma),
                    "tol" => defaults.tol = real(v, &at, errs).unwrap_or(defaults.tol),
                    "seed" => match v {
                        Value::Integer(i) if *i >= 0 => defaults.seed = *i as u64,
                        _ => errs.push(&at, "expected a non-negative integer"),
                    },
                    other => errs.push(&at, format!("unknown key '{other}'")),
                }
            }
            if !(0.0..1.0).contains(&defaults.delta) {
                errs.push("defaults.delta", "must lie in [0, 1)");
            }
            if !(0.0..1.0).contains(&defaults.gamma) {
                errs.push("defaults.gamma", "must lie in [0, 1)");
            }
            if !(defaults.tol > 0.0) {
                errs.push("defaults.tol", "must be positive");
            }
        }
        let game = match SignallingGame::new(
            types,
            signals,
            actions,
            prior?,
            nest3(u1?, n_s, n_a),
            nest3(u2?, n_s, n_a),
        ) {
            Ok(g) => g,
            Err(e) => {
                errs.push("game", e);
                return None;
            }
        };
        if let Some((v, z)) = &separable {
            if let Err(e) = validate_separable(&game, v, z) {
                match e {
                    Error::Validation(cells) => cells.into_iter().for_each(|c| errs.push("game.separable", c)),
                    other => errs.push("game.separable", other),
                }
            }
        }
        let mut params = LearningParams::new(defaults.delta, defaults.gamma, sender?, ReceiverPrior { alpha: receiver? });
        params.mixture = mixture;
        Some(Self { game, params, separable, defaults })
    }

    /// Renders the spec back to TOML; exact payoffs are written as strings.
    pub fn to_toml(&self) -> String {
        let g = &self.game;
        let ex = |r: &Rational| Value::String(rational::render(r));
        let strs = |v: &[String]| Value::Array(v.iter().cloned().map(Value::String).collect());
        let floats = |rows: &[Vec<f64>]| {
            Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(|x| Value::Float(*x)).collect())).collect())
        };
        let payoff = |u: &crate::game::PayoffTable| {
            Value::Array(
                (0..g.n_types())
                    .map(|t| {
                        Value::Array(
                            (0..g.n_signals())
                                .map(|s| Value::Array((0..g.n_actions()).map(|a| ex(u.get(t, s, a))).collect()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        };
        let mut game = Table::new();
        game.insert("types".into(), strs(g.types()));
        game.insert("prior".into(), Value::Array(g.prior().iter().map(ex).collect()));
        game.insert("signals".into(), strs(g.signals()));
        game.insert("actions".into(), strs(g.actions()));
        game.insert("u1".into(), payoff(g.u1()));
        game.insert("u2".into(), payoff(g.u2()));
        if let Some((v, z)) = &self.separable {
            let mut sep = Table::new();
            sep.insert("v".into(), Value::Array(v.iter().map(|r| Value::Array(r.iter().map(ex).collect())).collect()));
            sep.insert("z".into(), Value::Array(z.iter().map(ex).collect()));
            game.insert("separable".into(), Value::Table(sep));
        }
        let mut priors = Table::new();
        let mut sender = Table::new();
        sender.insert("alpha".into(), floats(&self.params.sender_prior));
        priors.insert("sender".into(), Value::Table(sender));
        let mut receiver = Table::new();
        receiver.insert("alpha".into(), floats(&self.params.receiver_prior.alpha));
        priors.insert("receiver".into(), Value::Table(receiver));
        if !self.params.mixture.is_empty() {
            let comps = self
                .params
                .mixture
                .iter()
                .map(|c| {
                    let mut t = Table::new();
                    t.insert("weight".into(), Value::Float(c.weight));
                    t.insert("sender".into(), floats(&c.sender_prior));
                    t.insert("receiver".into(), floats(&c.receiver_prior.alpha));
                    Value::Table(t)
                })
                .collect();
            priors.insert("mixture".into(), Value::Array(comps));
        }
        let mut defaults = Table::new();
        defaults.insert("delta".into(), Value::Float(self.defaults.delta));
        defaults.insert("gamma".into(), Value::Float(self.defaults.gamma));
        defaults.insert("tol".into(), Value::Float(self.defaults.tol));
        defaults.insert("seed".into(), Value::Integer(self.defaults.seed as i64));
        let mut doc = Table::new();
        doc.insert("game".into(), Value::Table(game));
        doc.insert("priors".into(), Value::Table(priors));
        doc.insert("defaults".into(), Value::Table(defaults));
        toml::to_string(&doc).expect("spec tables serialise")
    }
}

/// Profile blocks keyed by name: `pi1[type][signal]`, `pi2[signal][action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub pi1: BTreeMap<String, BTreeMap<String, f64>>,
    pub pi2: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ProfileDoc {
    pub fn from_profile(game: &SignallingGame, p: &StrategyProfile) -> Self {
        let block = |rows: &[Vec<f64>], outer: &[String], inner: &[String]| {
            outer
                .iter()
                .zip(rows)
                .map(|(o, r)| (o.clone(), inner.iter().cloned().zip(r.iter().copied()).collect()))
                .collect()
        };
        Self {
            pi1: block(&p.pi1, game.types(), game.signals()),
            pi2: block(&p.pi2, game.signals(), game.actions()),
        }
    }

    /// Missing entries are zero; unknown names are errors.
    pub fn to_profile(&self, game: &SignallingGame) -> Result<StrategyProfile> {
        fn rows(
            block: &BTreeMap<String, BTreeMap<String, f64>>,
            outer: &[String],
            inner: &[String],
            what: &str,
        ) -> Result<Vec<Vec<f64>>> {
            let mut out = vec![vec![0.0; inner.len()]; outer.len()];
            for (o, row) in block {
                let i = outer
                    .iter()
                    .position(|n| n == o)
                    .ok_or_else(|| Error::Parse(format!("{what}: unknown name {o:?}")))?;
                for (k, v) in row {
                    let j = inner
                        .iter()
                        .position(|n| n == k)
                        .ok_or_else(|| Error::Parse(format!("{what}.{o}: unknown name {k:?}")))?;
                    out[i][j] = *v;
                }
            }
            Ok(out)
        }
        let p = StrategyProfile {
            pi1: rows(&self.pi1, game.types(), game.signals(), "pi1")?,
            pi2: rows(&self.pi2, game.signals(), game.actions(), "pi2")?,
        };
        p.validate(game)?;
        Ok(p)
    }
}

pub fn read_profile(game: &SignallingGame, path: &Path) -> Result<StrategyProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let doc: ProfileDoc = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    doc.to_profile(game)
}
