//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances and runtime limits are fixed
//! here and must not be loosened.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cnlhv_core::departure::{delta_bound, figure1_sweep, write_csv};
use cnlhv_core::logic::{
    check_FR, check_FW, check_NS, check_ST, converse_scan, strictness_counterexample, theorem_scan, Var,
    ANTECEDENT_TOL, CONVERSE_TOL,
};
use cnlhv_core::mc::block_rng;
use cnlhv_core::ontic::{
    mc_conditional_average_x, model_joint_correlation, solve_a_hat, thresholds_for,
    verify_quantum_recovery, Method, SOLVER_TOL,
};
use cnlhv_core::quantum::joint_correlation;
use cnlhv_core::{Setting, TwoQubitState};
use rand::Rng;

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn theta_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i == n - 1 { FRAC_PI_2 } else { FRAC_PI_2 * i as f64 / (n - 1) as f64 })
}

fn closed_form() -> Verdict {
    let mut rng = block_rng(SEED, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let a = Setting::in_plane(rng.random_range(-PI..PI));
        let b = Setting::in_plane(rng.random_range(-PI..PI));
        let state = TwoQubitState::new(theta).unwrap();
        let [ax, ay, az] = a.components();
        let [bx, by, bz] = b.components();
        let expect = az * bz + theta.sin() * (ax * bx - ay * by);
        worst = worst.max((joint_correlation(&state, &a, &b) - expect).abs());
    }
    verdict(worst <= 1e-12, format!("max |E - closed form| = {worst:.3e} over 1000 draws (tol 1e-12)"))
}

fn recovery() -> Verdict {
    let mut worst: f64 = 0.0;
    for theta in theta_grid(21) {
        let state = TwoQubitState::new(theta).unwrap();
        for k in 0..10 {
            // a_z >= 0: angle from the z axis in [-pi/2, pi/2]
            let a = Setting::in_plane(-FRAC_PI_2 + PI * k as f64 / 9.0);
            match verify_quantum_recovery(&state, &a, 1e-10) {
                Ok(r) => worst = worst.max(r.abs_diff),
                Err(e) => return verdict(false, format!("theta={theta} a={:?}: {e}", a.components())),
            }
        }
    }
    verdict(worst <= 1e-6, format!("max |integral - marginal| = {worst:.3e} over 21 x 10 (tol 1e-6)"))
}

/// Serialised conditional averages, so reruns can be compared byte for byte.
fn non_signalling_run() -> Result<(f64, String), String> {
    let n = 1_000_000;
    let mut worst_ratio: f64 = 0.0;
    let mut log = String::new();
    let bs = [-2.7, -1.1, 0.35, 1.6, 2.9];
    let mut case = 0u64;
    for theta in [0.4, FRAC_PI_3, 1.3] {
        let state = TwoQubitState::new(theta).unwrap();
        for a in [Setting::in_plane(0.2), Setting::in_plane(2.4)] {
            for tau in [0.35, 1.2, FRAC_PI_2, 2.5] {
                let mut est = Vec::new();
                for &angle in &bs {
                    let b = Setting::in_plane(angle);
                    case += 1;
                    let e = mc_conditional_average_x(&state, &a, &b, tau, n, SEED + case).map_err(|e| {
                        format!("theta={theta} a={:?} b={:?} tau={tau}: {e}", a.components(), b.components())
                    })?;
                    log.push_str(&format!("{:e} {:e}\n", e.mean, e.std_err));
                    est.push(e);
                }
                for (i, p) in est.iter().enumerate() {
                    for q in &est[i + 1..] {
                        let diff = (p.mean - q.mean).abs();
                        let se = f64::hypot(p.std_err, q.std_err);
                        let ratio = if se > 0.0 {
                            diff / se
                        } else if diff == 0.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        };
                        worst_ratio = worst_ratio.max(ratio);
                    }
                }
            }
        }
    }
    Ok((worst_ratio, log))
}

fn non_signalling() -> Verdict {
    match non_signalling_run() {
        Ok((r, _)) => verdict(r <= 4.0, format!("max pairwise |diff| / combined SE = {r:.3} at N = 1e6 (limit 4)")),
        Err(e) => verdict(false, e),
    }
}

fn predictive_run() -> Result<(f64, f64, String), String> {
    let mut rng = block_rng(SEED, 4);
    let (mut worst_res, mut worst_diff): (f64, f64) = (0.0, 0.0);
    let mut log = String::new();
    for _ in 0..200 {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let a = Setting::in_plane(rng.random_range(-PI..PI));
        let b = Setting::in_plane(rng.random_range(-PI..PI));
        let state = TwoQubitState::new(theta).unwrap();
        let inputs = || format!("theta={theta:e} a={:?} b={:?}", a.components(), b.components());
        let eff = solve_a_hat(&state, &a, &b, SOLVER_TOL).map_err(|e| format!("{}: {e}", inputs()))?;
        let th = thresholds_for(&state, &a, &b);
        let model = model_joint_correlation(&th, &eff.a_hat, &b, Method::Quadrature)
            .map_err(|e| format!("{}: {e}", inputs()))?;
        let diff = (model.value - joint_correlation(&state, &a, &b)).abs();
        worst_res = worst_res.max(eff.residual);
        worst_diff = worst_diff.max(diff);
        log.push_str(&format!("{:e} {:e} {:e}\n", eff.alpha, eff.residual, model.value));
    }
    Ok((worst_res, worst_diff, log))
}

fn predictive() -> Verdict {
    match predictive_run() {
        Ok((res, diff, _)) if res <= 1e-8 && diff <= 1e-8 => {
            verdict(true, format!("200 solves, max residual {res:.3e}, max |E_model - E_q| {diff:.3e} (tol 1e-8)"))
        }
        Ok((res, diff, _)) => verdict(false, format!("max residual {res:.3e}, max |E_model - E_q| {diff:.3e}")),
        Err(e) => verdict(false, format!("solver failure: {e}")),
    }
}

fn maximise(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    0.5 * (lo + hi)
}

fn sweep_csv() -> Result<String, String> {
    let a = Setting::new(0.0, 0.0, 1.0).unwrap();
    let rows = figure1_sweep(&a, 101).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(|e| e.to_string())?;
    Ok(String::from_utf8(buf).unwrap())
}

fn figure() -> Verdict {
    let a = Setting::new(0.0, 0.0, 1.0).unwrap();
    let rows = match figure1_sweep(&a, 101) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let endpoints = first.delta_model <= 1e-6 && last.delta_model <= 1e-6;
    let nonneg = rows.iter().all(|r| r.delta_model >= 0.0);
    let below = rows
        .iter()
        .map(|r| r.delta_model - r.delta_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = |theta: f64| delta_bound(&TwoQubitState::new(theta).unwrap(), &a);
    let peak_at = maximise(bound, 0.0, FRAC_PI_2);
    let peak = bound(FRAC_PI_3);
    let peak_ok = (peak - 0.25).abs() <= 1e-10
        && (peak_at - FRAC_PI_3).abs() <= 1e-5
        && rows.iter().all(|r| r.delta_bound <= peak);
    verdict(
        rows.len() == 101 && endpoints && nonneg && below <= 1e-8 && peak_ok,
        format!(
            "{} rows, delta(0)={:.1e}, delta(pi/2)={:.1e}, min delta {:.1e}, max(delta - bound) {below:.3e}, \
             bound peak {peak:.12} at {peak_at:.8}",
            rows.len(),
            first.delta_model,
            last.delta_model,
            rows.iter().map(|r| r.delta_model).fold(f64::INFINITY, f64::min),
        ),
    )
}

fn theorem_json() -> Result<String, String> {
    theorem_scan(1000, SEED)
        .map(|s| serde_json::to_string(&s).unwrap())
        .map_err(|e| e.to_string())
}

fn theorem() -> Verdict {
    match theorem_scan(1000, SEED) {
        Ok(s) => verdict(
            s.violation_count() == 0 && s.compliant == 1000,
            format!(
                "{} compliant tables, {} FR violations above {ANTECEDENT_TOL:e}, max FR {:.3e}",
                s.compliant,
                s.violation_count(),
                s.max_fr
            ),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn strictness() -> Verdict {
    let j = strictness_counterexample();
    let fw = check_FW(&j, Var::Lambda).unwrap().max_violation;
    let ns = check_NS(&j).unwrap().max_violation;
    let st = check_ST(&j).unwrap().max_violation;
    let fr = check_FR(&j).unwrap().max_violation;
    verdict(
        fw == 0.0 && ns == 0.0 && st >= 0.25 && fr >= 0.25,
        format!("FW={fw} NS={ns} ST={st} FR={fr}"),
    )
}

fn converse() -> Verdict {
    match converse_scan(1000, SEED) {
        Ok(s) => {
            let worst = s.max_fw.max(s.max_ns).max(s.max_st);
            verdict(
                s.failures.is_empty() && worst <= CONVERSE_TOL,
                format!(
                    "1000 tables, max FW {:.3e}, NS {:.3e}, ST {:.3e} (tol {CONVERSE_TOL:e})",
                    s.max_fw, s.max_ns, s.max_st
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn outputs() -> Vec<(&'static str, String)> {
    let ns = non_signalling_run().map(|(_, log)| log).unwrap_or_else(|e| e);
    let pred = predictive_run().map(|(_, _, log)| log).unwrap_or_else(|e| e);
    let csv = sweep_csv().unwrap_or_else(|e| e);
    let scan = theorem_json().unwrap_or_else(|e| e);
    vec![("non-signalling", ns), ("solver", pred), ("sweep", csv), ("scan", scan)]
}

fn determinism() -> Verdict {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(outputs)
    };
    let reference = run(1);
    let mut differing = Vec::new();
    for threads in [3, 8] {
        for ((name, a), (_, b)) in reference.iter().zip(run(threads)) {
            if *a != b {
                differing.push(format!("{name} @ {threads} threads"));
            }
        }
    }
    let bytes: usize = reference.iter().map(|(_, s)| s.len()).sum();
    if differing.is_empty() {
        verdict(true, format!("criteria 3-6 outputs ({bytes} bytes) identical with 1, 3, 8 threads"))
    } else {
        verdict(false, format!("outputs differ: {}", differing.join(", ")))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("quantum closed form", Duration::from_secs(1), closed_form),
        ("quantum recovery", Duration::from_secs(10), recovery),
        ("non-signalling at fixed tau", Duration::from_secs(30), non_signalling),
        ("predictive equivalence", Duration::from_secs(120), predictive),
        ("departure sweep", Duration::from_secs(30), figure),
        ("implication scan", Duration::from_secs(30), theorem),
        ("strictness counterexample", Duration::from_secs(1), strictness),
        ("converse with Z as ontic state", Duration::from_secs(30), converse),
        ("determinism across thread counts", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { "" } else { " [over time limit]" };
        println!(
            "{} [{}] {name}: {} ({:.2} s, limit {} s){timing}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
