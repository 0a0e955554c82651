use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use siglearn::compat::{compatibility_relation, relation_properties_check};
use siglearn::game::{l1_distance, SignallingGame, StrategyProfile};
use siglearn::gittins::index_ordering_check;
use siglearn::receiver::{arr_exact_small, arr_monte_carlo};
use siglearn::refinement::CriterionVerdict;
use siglearn::report::{inputs_digest, trajectory_csv, AnalysisReport, CheckVerdict};
use siglearn::sampling::{derive_seed, random_profile};
use siglearn::sender::{asr_exact, asr_monte_carlo, coupling_check, PreProgrammedPath};
use siglearn::spec_file::{read_profile, GameSpec, ProfileDoc};
use siglearn::steady::{
    classify, patient_stability_scan, self_confirming_diagnostic, solve_steady_state, Mode, ScanConfig,
    SolverConfig,
};

#[derive(Parser)]
#[command(name = "siglearn", version, about = "Learning and equilibrium refinement in signalling games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Game spec file (TOML)
    spec: PathBuf,
    /// Directory for report.json and tables
    #[arg(long, default_value = "siglearn-out")]
    out: PathBuf,
    /// Master seed (defaults to the spec's)
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance (defaults to the spec's)
    #[arg(long)]
    tol: Option<f64>,
    /// Strategy profile file (JSON)
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compatibility relation per signal and criterion checks on a profile
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Solve for one steady state
    Steady {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mc")]
        mode: Mode,
        /// Lifetimes per Monte Carlo evaluation
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Extra random starting profiles, to expose multiple steady states
        #[arg(long, default_value_t = 0)]
        starts: usize,
    },
    /// Patient-stability scan over a (delta, gamma) schedule
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mc")]
        mode: Mode,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated delta values
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Comma-separated gamma values (used for every delta)
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Property suites; exits nonzero if any check fails
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Print a stored report
    Report { file: PathBuf },
}

struct Loaded {
    spec: GameSpec,
    spec_bytes: Vec<u8>,
    profile: Option<StrategyProfile>,
    profile_bytes: Vec<u8>,
    seed: u64,
    tol: f64,
}

fn load(c: &Common) -> anyhow::Result<Loaded> {
    let spec_bytes = std::fs::read(&c.spec).with_context(|| format!("reading {}", c.spec.display()))?;
    let spec = GameSpec::parse(&String::from_utf8_lossy(&spec_bytes))
        .map_err(|e| anyhow::anyhow!("{}: {e}", c.spec.display()))?;
    let (profile, profile_bytes) = match &c.profile {
        Some(p) => (Some(read_profile(&spec.game, p)?), std::fs::read(p)?),
        None => (None, Vec::new()),
    };
    let seed = c.seed.unwrap_or(spec.defaults.seed);
    let tol = c.tol.unwrap_or(spec.defaults.tol);
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    Ok(Loaded { spec, spec_bytes, profile, profile_bytes, seed, tol })
}

fn digest(l: &Loaded, flags: &str) -> String {
    inputs_digest(&[&l.spec_bytes, &l.profile_bytes, flags.as_bytes()])
}

fn named_cells(game: &SignallingGame, cells: &[(usize, usize)]) -> serde_json::Value {
    cells.iter().map(|&(s, a)| json!({ "signal": game.signals()[s], "action": game.actions()[a] })).collect()
}

fn criterion_detail(game: &SignallingGame, v: &CriterionVerdict) -> serde_json::Value {
    json!({
        "violations": named_cells(game, &v.violations),
        "empty_belief_sets": v.empty_belief_sets.iter().map(|&s| &game.signals()[s]).collect::<Vec<_>>(),
    })
}

/// The pure profile closest in `l1` to `p` (row-wise argmax).
fn nearest_pure(game: &SignallingGame, p: &StrategyProfile) -> (StrategyProfile, f64) {
    let send: Vec<usize> = p.pi1.iter().map(|r| argmax(r)).collect();
    let reply: Vec<usize> = p.pi2.iter().map(|r| argmax(r)).collect();
    let q = StrategyProfile::pure(game, &send, &reply);
    let d = l1_distance(p, &q).unwrap_or(f64::INFINITY);
    (q, d)
}

fn argmax(r: &[f64]) -> usize {
    (0..r.len()).fold(0, |b, i| if r[i] > r[b] { i } else { b })
}

fn describe_pure(game: &SignallingGame, p: &StrategyProfile) -> String {
    let send: Vec<String> =
        game.types().iter().zip(&p.pi1).map(|(t, r)| format!("{t}->{}", game.signals()[argmax(r)])).collect();
    let reply: Vec<String> =
        game.signals().iter().zip(&p.pi2).map(|(s, r)| format!("{s}->{}", game.actions()[argmax(r)])).collect();
    format!("sender {}; receiver {}", send.join(", "), reply.join(", "))
}

fn finish(report: &AnalysisReport, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    report.write(&out.join("report.json"))?;
    print!("{}", report.render());
    Ok(())
}

fn analyze(c: &Common) -> anyhow::Result<ExitCode> {
    let l = load(c)?;
    let g = &l.spec.game;
    let mut report = AnalysisReport::new("analyze", digest(&l, &format!("analyze tol={}", l.tol)), None);
    let mut relations = serde_json::Map::new();
    for s in 0..g.n_signals() {
        let pairs: Vec<String> = compatibility_relation(g, s)?
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| format!("{} > {}", g.types()[a], g.types()[b]))
            .collect();
        relations.insert(g.signals()[s].clone(), json!(pairs));
    }
    report.insert("compatibility", relations);
    if let Some(p) = &l.profile {
        let cls = classify(g, p, l.tol)?;
        report.verdicts.push(CheckVerdict::new("nash", cls.nash.pass, &cls.nash.witnesses));
        report.verdicts.push(CheckVerdict::new("pbe_hetero", cls.pbe_hetero.pass, &cls.pbe_hetero.witnesses));
        report.verdicts.push(CheckVerdict::new(
            "compatibility_criterion",
            cls.compatibility.pass,
            criterion_detail(g, &cls.compatibility),
        ));
        report.verdicts.push(CheckVerdict::new(
            "strong_compatibility_criterion",
            cls.strong_compatibility.pass,
            criterion_detail(g, &cls.strong_compatibility),
        ));
        let sc = self_confirming_diagnostic(g, p, l.tol)?;
        report.verdicts.push(CheckVerdict::new("self_confirming", sc.pass, &sc.failures));
        report.insert("on_path_strict", cls.on_path_strict);
        report.insert("profile", ProfileDoc::from_profile(g, p));
    }
    finish(&report, &c.out)?;
    Ok(ExitCode::SUCCESS)
}

fn solver_config(mode: Mode, samples: Option<usize>, seed: u64, tol: Option<f64>) -> SolverConfig {
    let base = match mode {
        Mode::Exact => SolverConfig { seed, ..SolverConfig::default() },
        Mode::MonteCarlo => SolverConfig::monte_carlo(seed),
    };
    SolverConfig { samples, tol: tol.unwrap_or(base.tol), ..base }
}

#[allow(clippy::too_many_arguments)]
fn steady(
    c: &Common,
    mode: Mode,
    samples: Option<usize>,
    delta: Option<f64>,
    gamma: Option<f64>,
    starts: usize,
) -> anyhow::Result<ExitCode> {
    let l = load(c)?;
    let g = &l.spec.game;
    let params = l.spec.params.with_lifetime(delta.unwrap_or(l.spec.defaults.delta), gamma.unwrap_or(l.spec.defaults.gamma));
    let cfg = solver_config(mode, samples, l.seed, c.tol);
    let flags = format!("steady mode={mode:?} samples={samples:?} delta={} gamma={} tol={} starts={starts}", params.delta, params.gamma, cfg.tol);
    let mut report = AnalysisReport::new("steady", digest(&l, &flags), Some(l.seed));
    let r = solve_steady_state(g, &params, &cfg, l.profile.as_ref())?;
    report.verdicts.push(CheckVerdict::new("converged", r.converged, json!({ "residual": r.residual })));
    let sc = self_confirming_diagnostic(g, &r.profile, 0.05)?;
    report.verdicts.push(CheckVerdict::new("self_confirming", sc.pass, &sc.failures));
    report.insert("delta", params.delta);
    report.insert("gamma", params.gamma);
    report.insert("iterations", r.iterations);
    report.insert("residual", r.residual);
    report.insert("starts_tried", r.starts);
    report.insert("profile", ProfileDoc::from_profile(g, &r.profile));
    if starts > 0 {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(l.seed, 0xA11));
        let once = SolverConfig { restarts: 0, ..cfg.clone() };
        let mut found: Vec<StrategyProfile> = vec![r.profile.clone()];
        for _ in 0..starts {
            let start = random_profile(&mut rng, g);
            let alt = solve_steady_state(g, &params, &once, Some(&start))?;
            if alt.converged && found.iter().all(|f| l1_distance(f, &alt.profile).unwrap_or(0.0) > 0.1) {
                found.push(alt.profile);
            }
        }
        report.insert(
            "distinct_steady_states",
            found.iter().map(|p| ProfileDoc::from_profile(g, p)).collect::<Vec<_>>(),
        );
    }
    finish(&report, &c.out)?;
    Ok(ExitCode::SUCCESS)
}

fn scan(
    c: &Common,
    mode: Mode,
    samples: Option<usize>,
    deltas: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
) -> anyhow::Result<ExitCode> {
    let l = load(c)?;
    let g = &l.spec.game;
    let mut cfg = ScanConfig { solver: solver_config(mode, samples, l.seed, c.tol), ..ScanConfig::default() };
    if let Some(d) = deltas {
        cfg.deltas = d;
    }
    if let Some(gm) = gammas {
        cfg.gammas = gm;
    }
    let flags = format!("scan mode={mode:?} samples={samples:?} deltas={:?} gammas={:?} tol={}", cfg.deltas, cfg.gammas, cfg.solver.tol);
    let mut report = AnalysisReport::new("scan", digest(&l, &flags), Some(l.seed));
    let result = patient_stability_scan(g, &l.spec.params, &cfg, |p| {
        eprintln!("delta {} gamma {}: residual {:.4} after {} iterations{}", p.delta, p.gamma, p.residual, p.iterations, if p.converged { "" } else { " (not converged)" });
    })?;
    std::fs::create_dir_all(&c.out)?;
    std::fs::write(c.out.join("trajectory.csv"), trajectory_csv(g, &result.trajectory)?)?;
    let cls = &result.classification;
    let (pure, dist) = nearest_pure(g, &result.candidate);
    let mut labels = Vec::new();
    if cls.nash.pass {
        labels.push("nash".to_string());
    }
    if cls.pbe_hetero.pass {
        labels.push("pbe-hetero".to_string());
    }
    if cls.compatibility.pass {
        labels.push("compatible".to_string());
    }
    if cls.strong_compatibility.pass {
        labels.push("strongly compatible".to_string());
    }
    labels.push(format!("near {} (l1 {:.3})", describe_pure(g, &pure), dist));
    report.verdicts.push(CheckVerdict::new("nash", cls.nash.pass, &cls.nash.witnesses));
    report.verdicts.push(CheckVerdict::new("pbe_hetero", cls.pbe_hetero.pass, &cls.pbe_hetero.witnesses));
    report.verdicts.push(CheckVerdict::new("compatibility_criterion", cls.compatibility.pass, criterion_detail(g, &cls.compatibility)));
    report.verdicts.push(CheckVerdict::new(
        "strong_compatibility_criterion",
        cls.strong_compatibility.pass,
        criterion_detail(g, &cls.strong_compatibility),
    ));
    report.verdicts.push(CheckVerdict::new("limit_properties", result.property_failures.is_empty(), &result.property_failures));
    report.insert("classification", labels.join(", "));
    report.insert("on_path_strict", cls.on_path_strict);
    report.insert("candidate", ProfileDoc::from_profile(g, &result.candidate));
    report.insert("extrapolated", ProfileDoc::from_profile(g, &result.extrapolated));
    report.insert("non_converged", &result.non_converged);
    report.insert("cold_start_distance", result.cold_start_distance);
    report.insert("trajectory_file", "trajectory.csv");
    finish(&report, &c.out)?;
    println!("classification: {}", labels.join(", "));
    if result.property_failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &result.property_failures {
            eprintln!("limit property failure: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn verify(c: &Common, samples: usize) -> anyhow::Result<ExitCode> {
    let l = load(c)?;
    let g = &l.spec.game;
    let d = &l.spec.defaults;
    let flags = format!("verify samples={samples} tol={}", l.tol);
    let mut report = AnalysisReport::new("verify", digest(&l, &flags), Some(l.seed));
    let alpha = &l.spec.params.sender_prior;
    for s in 0..g.n_signals() {
        let sig = &g.signals()[s];
        let rel = relation_properties_check(g, s)?;
        report.verdicts.push(CheckVerdict::new(format!("relation_properties[{sig}]"), rel.is_clean(), &rel));
        for (hi, lo) in compatibility_relation(g, s)?.into_iter().filter(|(a, b)| a != b) {
            let pair = format!("{}>{}@{sig}", g.types()[hi], g.types()[lo]);
            let it = index_ordering_check(g, hi, lo, s, samples, &[0.0, 0.5, 0.9, 0.99], 1e-6, derive_seed(l.seed, s as u64))?;
            report.verdicts.push(CheckVerdict::new(
                format!("index_ordering[{pair}]"),
                it.violations.is_empty(),
                json!({ "checks": it.checks, "premise_held": it.premise_held, "violations": it.violations }),
            ));
            let pi2 = random_profile(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(l.seed), g).pi2;
            let mut paths: Vec<PreProgrammedPath> = (0..samples.min(200))
                .map(|k| PreProgrammedPath::random(&pi2, derive_seed(l.seed, 1000 + k as u64)))
                .collect();
            let cp = coupling_check(g, hi, lo, s, &mut paths, alpha, d.delta * d.gamma, d.gamma, 100)?;
            report.verdicts.push(CheckVerdict::new(format!("coupling[{pair}]"), cp.is_clean(), &cp));
        }
    }
    // cross-method consistency at a short lifetime
    let gamma = 0.9;
    let pi = StrategyProfile::uniform(g);
    let n = samples * 100;
    for t in 0..g.n_types() {
        let ex = asr_exact(g, t, &pi.pi2, alpha, d.delta, gamma, 1e-14, 1e-12)?;
        let mc = asr_monte_carlo(g, t, &pi.pi2, alpha, d.delta, gamma, n, derive_seed(l.seed, 77 + t as u64))?;
        let worst = (0..g.n_signals())
            .map(|s| (ex.distribution[s] - mc.distribution[s]).abs() - ex.error_bound - 3.0 * mc.std_err[s])
            .fold(f64::NEG_INFINITY, f64::max);
        report.verdicts.push(CheckVerdict::new(
            format!("asr_exact_vs_mc[{}]", g.types()[t]),
            worst <= 0.0,
            json!({ "exact": ex.distribution, "mc": mc.distribution, "std_err": mc.std_err, "bound": ex.error_bound }),
        ));
    }
    let rp = &l.spec.params.receiver_prior;
    match arr_exact_small(g, &pi.pi1, rp, 0.5, 24, 2_000_000) {
        Ok(ex) => {
            let mc = arr_monte_carlo(g, &pi.pi1, rp, 0.5, n, derive_seed(l.seed, 99))?;
            let mut worst = f64::NEG_INFINITY;
            for s in 0..g.n_signals() {
                for a in 0..g.n_actions() {
                    worst = worst.max((ex.pi2[s][a] - mc.pi2[s][a]).abs() - ex.tail - 4.0 * mc.std_err[s][a]);
                }
            }
            report.verdicts.push(CheckVerdict::new(
                "arr_exact_vs_mc",
                worst <= 0.0,
                json!({ "exact": ex.pi2, "mc": mc.pi2, "std_err": mc.std_err, "tail": ex.tail }),
            ));
        }
        Err(siglearn::Error::StateCap(cap)) => report.insert("arr_exact_vs_mc_skipped", format!("state cap {cap}")),
        Err(e) => return Err(e.into()),
    }
    finish(&report, &c.out)?;
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn show(file: &Path) -> anyhow::Result<ExitCode> {
    let report = AnalysisReport::read(file)?;
    print!("{}", report.render());
    for v in report.verdicts.iter().filter(|v| !v.pass) {
        println!("  {}: {}", v.name, v.detail);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    siglearn::init_threads_from_env();
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Analyze { common } => analyze(common),
        Command::Steady { common, mode, samples, delta, gamma, starts } => {
            steady(common, *mode, *samples, *delta, *gamma, *starts)
        }
        Command::Scan { common, mode, samples, deltas, gammas } => {
            scan(common, *mode, *samples, deltas.clone(), gammas.clone())
        }
        Command::Verify { common, samples } => verify(common, *samples),
        Command::Report { file } => show(file),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
