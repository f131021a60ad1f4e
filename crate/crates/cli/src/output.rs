use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use impulse_dividend::model::{AuxLevels, DerivedConstants};
use impulse_dividend::oracle::{Comparison, OraclePoint};
use impulse_dividend::sim::MCEstimate;
use impulse_dividend::{Pair, Report, Solution};
use serde_json::{json, Value};

/// Float rendering for CSV: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s.into_bytes()
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

pub fn constants(k: &DerivedConstants<f64>) -> Value {
    json!({
        "theta1_plus": k.theta1_plus,
        "theta2_plus": k.theta2_plus,
        "theta1_minus": k.theta1_minus,
        "theta2_minus": k.theta2_minus,
        "c_minus": k.c_minus,
        "c_plus": k.c_plus,
        "big_theta": k.big_theta,
        "x0": opt(k.x0),
        "a1": opt(k.a1),
        "a2": opt(k.a2),
        "a3": opt(k.a3),
    })
}

pub fn levels(l: &AuxLevels<f64>) -> Value {
    json!({
        "a4": opt(l.a4),
        "a5": opt(l.a5),
        "a6": opt(l.a6),
        "a7": opt(l.a7),
        "x1": opt(l.x1),
        "x2": opt(l.x2),
        "x3": opt(l.x3),
        "x4": opt(l.x4),
    })
}

pub fn pair(p: &Pair) -> Value {
    json!({ "z1": p.z1, "z2": p.z2, "zeta": p.zeta })
}

pub fn report(r: &Report) -> Value {
    json!({
        "condition_a": r.condition_a,
        "condition_b": r.condition_b,
        "condition_b_residual": r.condition_b_residual,
        "condition_c": r.condition_c,
        "g2_at_a_plus": r.g2_at_a_plus,
        "qvi_max_residual": r.qvi_max_residual,
        "interior_residual": r.interior_residual,
        "interior_tolerance": r.interior_tolerance,
        "increment_min_slack": r.increment_min_slack,
        "satisfied": r.satisfied(),
        "verdict": r.verdict.to_string(),
    })
}

pub fn solution(s: &Solution) -> Value {
    json!({
        "case": s.case.to_string(),
        "regime": s.case.regime.as_str(),
        "sub_case": s.case.sub_case.as_str(),
        "profile": s.profile.pattern(),
        "breakpoints": s.profile.breakpoints,
        "levels": levels(&s.levels),
        "pairs": s.pairs.iter().map(pair).collect::<Vec<_>>(),
        "zeta_star": s.zeta_star(),
        "degenerate_triple": s.degenerate_triple,
        "branch_trace": s.branch_trace,
    })
}

fn point(p: &OraclePoint<f64>) -> Value {
    json!({ "z1": p.z1, "z2": p.z2, "zeta": p.zeta })
}

pub fn comparison(c: &Comparison<f64>) -> Value {
    json!({
        "passed": c.passed(),
        "zeta_solver": c.zeta_solver,
        "zeta_oracle": c.zeta_oracle,
        "zeta_ok": c.zeta_ok,
        "argmax_distance": [c.argmax_distance.0, c.argmax_distance.1],
        "spacing": [c.spacing.0, c.spacing.1],
        "argmax_ok": c.argmax_ok,
        "oracle_maxima": c.oracle.maxima.iter().map(point).collect::<Vec<_>>(),
        "trace": c.oracle.trace,
    })
}

pub fn estimate(e: &MCEstimate) -> Value {
    json!({
        "mean": e.mean,
        "std_error": e.std_error,
        "ci95": [e.ci95.0, e.ci95.1],
        "n_paths": e.n_paths,
        "truncation_bias_bound": e.truncation_bias_bound,
    })
}
