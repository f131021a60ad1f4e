mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use impulse_dividend::oracle::compare_solver_oracle;
use impulse_dividend::sim::{estimate_value_mc, simulate_controlled, SimConfig};
use impulse_dividend::verify::check_conditions;
use impulse_dividend::*;
use serde_json::{json, Value};

use config::RunConfig;
use output::{json_bytes, num, write_atomic};

/// Optimal two-barrier impulse dividend strategies for a threshold-switching diffusion.
///
/// Values are taken from the built-in defaults, then the --config file, then
/// command-line flags; later sources win.
#[derive(Parser, Debug)]
#[command(name = "impulse-dividend", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files; without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// With solve or verify, exit with status 4 when a pair is not proven optimal.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    axis: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long = "n-paths", global = true)]
    n_paths: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve for the optimal barriers and verify them.
    Solve,
    /// Print the case label and convexity profile.
    Classify,
    /// Check the optimality conditions for a pair (the solver's by default).
    Verify,
    /// Simulate the controlled surplus and estimate the value by Monte Carlo.
    Simulate,
    /// Solve along a grid of one parameter and write a long-format CSV.
    Sweep,
    /// Compare the solver against a brute-force lattice search.
    Oracle,
}

enum Failure {
    Config(String),
    Numerical(String),
    NotProven(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::NotProven(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Numerical(_) => "numerical",
            Failure::NotProven(_) => "not-proven",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::NotProven(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Ordering(_)
            | Error::Domain { .. }
            | Error::SimConfig(_)
            | Error::EmptyGrid(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn resolve_config(common: &Common) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(beta) = common.beta {
        cfg.params.beta = beta;
    }
    if let Some(axis) = &common.axis {
        cfg.sweep.axis = axis.clone();
    }
    if let Some(v) = common.from {
        cfg.sweep.from = v;
    }
    if let Some(v) = common.to {
        cfg.sweep.to = v;
    }
    if let Some(v) = common.steps {
        cfg.sweep.steps = v;
    }
    if let Some(v) = common.n_paths {
        cfg.sim.n_paths = v;
    }
    if let Some(v) = common.dt {
        cfg.sim.dt = v;
    }
    if let Some(v) = common.horizon {
        cfg.sim.horizon = Some(v);
    }
    cfg.model().map_err(Failure::Config)?;
    Ok(cfg.resolve())
}

/// Writes the main result either to `<out>/<name>` or to stdout, and the
/// summary to whichever stream the result did not take.
fn emit(cfg: &RunConfig, name: &str, body: &[u8], summary: &str) -> Outcome {
    match &cfg.out {
        Some(dir) => {
            let path = write_atomic(dir, name, body)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            eprintln!("{summary}");
            print!("{}", String::from_utf8_lossy(body));
        }
    }
    Ok(())
}

fn context(cfg: &RunConfig) -> std::result::Result<Scale, Failure> {
    Ok(Scale::new(cfg.model().map_err(Failure::Config)?)?)
}

fn envelope(cfg: &RunConfig, command: &str, result: Value) -> Value {
    let embedded = RunConfig { out: None, ..cfg.clone() };
    json!({
        "command": command,
        "config": serde_json::to_value(&embedded).expect("config serialises"),
        "result": result,
    })
}

fn cmd_solve(cfg: &RunConfig, strict: bool) -> Outcome {
    let ctx = context(cfg)?;
    let sol = solve_barriers(&ctx)?;
    let reports: Vec<Report> = sol
        .pairs
        .iter()
        .map(|p| check_conditions(&ValueFunction::from_pair(&ctx, *p)))
        .collect();
    let mut result = output::solution(&sol);
    result["constants"] = output::constants(&ctx.consts);
    result["log_normalization"] = json!(ctx.log_normalization());
    result["verification"] = Value::Array(reports.iter().map(output::report).collect());
    let mut summary = format!("case {} ({})", sol.case, sol.profile.pattern());
    for (p, r) in sol.pairs.iter().zip(&reports) {
        summary.push_str(&format!(
            "\nz1 = {:.6}, z2 = {:.6}, zeta = {:.6e}: {} [{}]",
            p.z1,
            p.z2,
            p.zeta,
            r.verdict,
            r.satisfied()
        ));
    }
    emit(cfg, "solve.json", &json_bytes(&envelope(cfg, "solve", result)), &summary)?;
    if strict && reports.iter().any(|r| r.verdict != Verdict::OptimalProven) {
        return Err(Failure::NotProven("at least one barrier pair is not proven optimal".into()));
    }
    Ok(())
}

fn cmd_classify(cfg: &RunConfig) -> Outcome {
    let ctx = context(cfg)?;
    let label = classify_case(&ctx.params, &ctx.consts);
    let profile = convexity_profile(&ctx.params, &ctx.consts, label)?;
    let result = json!({
        "case": label.to_string(),
        "regime": label.regime.as_str(),
        "sub_case": label.sub_case.as_str(),
        "profile": profile.pattern(),
        "breakpoints": profile.breakpoints,
        "constants": output::constants(&ctx.consts),
    });
    emit(cfg, "classify.json", &json_bytes(&envelope(cfg, "classify", result)), &label.to_string())
}

fn cmd_verify(cfg: &RunConfig, strict: bool) -> Outcome {
    let ctx = context(cfg)?;
    let pairs: Vec<Pair> = match (cfg.verify.z1, cfg.verify.z2) {
        (Some(z1), Some(z2)) => {
            if !(z1 >= 0.0 && z2 > z1 + ctx.beta()) {
                return Err(Failure::Config(format!(
                    "verify needs 0 <= z1 and z2 > z1 + beta, got z1 = {z1}, z2 = {z2}"
                )));
            }
            vec![Pair { z1, z2, zeta: zeta(&ctx, z1, z2) }]
        }
        (None, None) => solve_barriers(&ctx)?.pairs,
        _ => return Err(Failure::Config("verify needs both z1 and z2, or neither".into())),
    };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut all_proven = true;
    for p in &pairs {
        let r = check_conditions(&ValueFunction::from_pair(&ctx, *p));
        all_proven &= r.verdict == Verdict::OptimalProven;
        summary.push(format!("({:.6}, {:.6}): {} [{}]", p.z1, p.z2, r.verdict, r.satisfied()));
        rows.push(json!({ "pair": output::pair(p), "report": output::report(&r) }));
    }
    emit(
        cfg,
        "verify.json",
        &json_bytes(&envelope(cfg, "verify", Value::Array(rows))),
        &summary.join("\n"),
    )?;
    if strict && !all_proven {
        return Err(Failure::NotProven("the barrier pair is not proven optimal".into()));
    }
    Ok(())
}

fn regime(a: f64, x: f64) -> &'static str {
    if x <= a {
        "minus"
    } else {
        "plus"
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Outcome {
    let ctx = context(cfg)?;
    let p = ctx.params;
    let pair = match (cfg.sim.z1, cfg.sim.z2) {
        (Some(z1), Some(z2)) => Pair { z1, z2, zeta: zeta(&ctx, z1, z2) },
        (None, None) => solve_barriers(&ctx)?.primary(),
        _ => return Err(Failure::Config("sim needs both z1 and z2, or neither".into())),
    };
    let x0 = cfg.sim.x0.unwrap_or(pair.z1);
    let sim = SimConfig::new(
        cfg.sim.dt,
        cfg.horizon(),
        cfg.sim.n_paths,
        cfg.seed,
        cfg.sim.antithetic,
        cfg.sim.store_paths,
    )?;
    if sim.store_paths && cfg.out.is_none() {
        return Err(Failure::Config("store_paths needs an output directory (--out)".into()));
    }
    // Validate everything before any file is written.
    let paths = simulate_controlled(&p, &pair, &sim, x0)?;
    let est = estimate_value_mc(&p, &pair, &sim, x0)?;
    if sim.store_paths {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time", "surplus", "dividend_amount", "regime", "path_id"])
            .map_err(|e| Failure::Io(e.to_string()))?;
        for rec in paths {
            let mut paid = rec.dividends.iter();
            for i in 0..rec.times.len() {
                let amount = if i > 0 && rec.times[i] == rec.times[i - 1] {
                    paid.next().map_or(0.0, |d| d.1)
                } else {
                    0.0
                };
                let x = rec.surplus[i];
                w.write_record([
                    num(rec.times[i]),
                    num(x),
                    num(amount),
                    regime(p.a, x).to_string(),
                    rec.path_id.to_string(),
                ])
                .map_err(|e| Failure::Io(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        write_atomic(cfg.out.as_ref().unwrap(), "paths.csv", &bytes)?;
    }
    let value = ValueFunction::from_pair(&ctx, pair).value(x0);
    let result = json!({
        "pair": output::pair(&pair),
        "x0": x0,
        "analytic_value": value,
        "estimate": output::estimate(&est),
        "covers_analytic": est.covers(value),
        "n_steps": sim.n_steps(),
    });
    let summary = format!(
        "V({x0:.4}) = {value:.6}, Monte Carlo {:.6} +/- {:.1e} over {} paths",
        est.mean, est.std_error, est.n_paths
    );
    emit(cfg, "estimate.json", &json_bytes(&envelope(cfg, "simulate", result)), &summary)
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    cfg.check_sweep().map_err(Failure::Config)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "axis", "value", "branch", "z1", "z2", "zeta", "case", "condition_a", "condition_b", "condition_c", "verdict",
        "errors",
    ];
    w.write_record(header).map_err(|e| Failure::Io(e.to_string()))?;
    let mut n_rows = 0;
    let mut n_errors = 0;
    for value in cfg.sweep_values() {
        let run = cfg.with_axis(value);
        let solved = run
            .model()
            .map_err(|e| e.to_string())
            .and_then(|p| Scale::new(p).map_err(|e| e.to_string()))
            .and_then(|ctx| solve_barriers(&ctx).map(|s| (ctx, s)).map_err(|e| e.to_string()));
        let mut rows: Vec<Vec<String>> = Vec::new();
        match solved {
            Ok((ctx, sol)) => {
                for (i, p) in sol.pairs.iter().enumerate() {
                    let r = check_conditions(&ValueFunction::from_pair(&ctx, *p));
                    rows.push(vec![
                        i.to_string(),
                        num(p.z1),
                        num(p.z2),
                        num(p.zeta),
                        sol.case.to_string(),
                        r.condition_a.to_string(),
                        r.condition_b.to_string(),
                        r.condition_c.to_string(),
                        r.verdict.to_string(),
                        String::new(),
                    ]);
                }
            }
            Err(e) => {
                n_errors += 1;
                let mut row = vec![String::new(); 9];
                row.push(e);
                rows.push(row);
            }
        }
        for row in rows {
            let mut full = vec![cfg.sweep.axis.clone(), num(value)];
            full.extend(row);
            w.write_record(&full).map_err(|e| Failure::Io(e.to_string()))?;
            n_rows += 1;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    let summary = format!(
        "{} sweep: {} values, {n_rows} rows, {n_errors} errors",
        cfg.sweep.axis, cfg.sweep.steps
    );
    if let Some(dir) = &cfg.out {
        let meta = envelope(cfg, "sweep", json!({ "rows": n_rows, "errors": n_errors, "csv": "sweep.csv" }));
        write_atomic(dir, "sweep.json", &json_bytes(&meta))?;
    }
    emit(cfg, "sweep.csv", &bytes, &summary)
}

fn cmd_oracle(cfg: &RunConfig) -> Outcome {
    let ctx = context(cfg)?;
    let sol = solve_barriers(&ctx)?;
    let mut spec = GridSpec::for_context(&ctx)?;
    let o = &cfg.oracle;
    spec.n1 = o.n1;
    spec.n2 = o.n2;
    spec.refine_rounds = o.refine_rounds;
    spec.top_k = o.top_k;
    if let Some(z) = o.z_max {
        spec.z1_range.1 = z;
        spec.z2_range.1 = z;
    }
    let cmp = compare_solver_oracle(&ctx, &sol, &spec)?;
    let mut result = output::comparison(&cmp);
    result["solution"] = output::solution(&sol);
    result["grid"] = json!({
        "z1_range": [spec.z1_range.0, spec.z1_range.1],
        "z2_range": [spec.z2_range.0, spec.z2_range.1],
        "n1": spec.n1,
        "n2": spec.n2,
        "refine_rounds": spec.refine_rounds,
        "top_k": spec.top_k,
    });
    let summary = format!(
        "oracle {}: zeta solver {:.9e}, oracle {:.9e}, argmax distance ({:.2e}, {:.2e}) vs spacing ({:.2e}, {:.2e})",
        if cmp.passed() { "PASS" } else { "FAIL" },
        cmp.zeta_solver,
        cmp.zeta_oracle,
        cmp.argmax_distance.0,
        cmp.argmax_distance.1,
        cmp.spacing.0,
        cmp.spacing.1
    );
    emit(cfg, "oracle.json", &json_bytes(&envelope(cfg, "oracle", result)), &summary)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = resolve_config(&cli.common)?;
    match cli.command {
        Command::Solve => cmd_solve(&cfg, cli.common.strict),
        Command::Classify => cmd_classify(&cfg),
        Command::Verify => cmd_verify(&cfg, cli.common.strict),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Oracle => cmd_oracle(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind(), "message": f.message() }));
            ExitCode::from(f.code())
        }
    }
}
