//! Departure of the intermediate-level average from the quantum marginal.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{self, Estimate};
use crate::numerics::integrate;
use crate::ontic::{intermediate_from_mean, support_grid};
use crate::quantum::{marginal_x, Setting, TwoQubitState};

/// Absolute tolerance for the `delta` quadrature.
pub const DELTA_QUAD_TOL: f64 = 1e-10;

/// Default number of grid points for [`figure1_sweep`].
pub const DEFAULT_SWEEP_POINTS: usize = 101;

pub const CSV_HEADER: &str = "theta,delta_model,delta_bound";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub delta_model: f64,
    pub delta_bound: f64,
}

/// Variance of the intermediate average `f(a, tau)` under `rho_tau`.
pub fn delta(state: &TwoQubitState, a: &Setting) -> Result<f64> {
    let mean = marginal_x(state, a);
    let xi = (-mean).clamp(-1.0, 1.0).acos();
    let q = integrate(
        |tau| {
            let d = intermediate_from_mean(mean, tau) - mean;
            d * d * 0.5 * tau.sin()
        },
        &support_grid(xi),
        DELTA_QUAD_TOL,
    )?;
    // Integral of a nonnegative integrand; clip rounding below zero.
    Ok(q.value.max(0.0))
}

/// `cos(theta) - <x(a)>^2`.
pub fn delta_bound(state: &TwoQubitState, a: &Setting) -> f64 {
    let m = marginal_x(state, a);
    state.theta().cos() - m * m
}

/// Plain Monte Carlo estimate of [`delta`], sampling `tau` from `rho_tau`.
pub fn delta_mc(state: &TwoQubitState, a: &Setting, samples: u64, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mean = marginal_x(state, a);
    Ok(mc::estimate(samples, seed, |rng| {
        let d = intermediate_from_mean(mean, mc::polar_angle(rng)) - mean;
        d * d
    }))
}

/// `delta` and its bound on a uniform `theta` grid over [0, pi/2].
pub fn figure1_sweep(a: &Setting, n_theta: usize) -> Result<Vec<SweepRow>> {
    if n_theta < 2 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 2 grid points, got {n_theta}"
        )));
    }
    let step = FRAC_PI_2 / (n_theta - 1) as f64;
    (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = if i == n_theta - 1 {
                FRAC_PI_2
            } else {
                step * i as f64
            };
            let state = TwoQubitState::new(theta)?;
            Ok(SweepRow {
                theta,
                delta_model: delta(&state, a)?,
                delta_bound: delta_bound(&state, a),
            })
        })
        .collect()
}

/// Formats `v` with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes sweep rows as CSV with LF line endings.
pub fn write_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{}",
            format_f64(r.theta),
            format_f64(r.delta_model),
            format_f64(r.delta_bound)
        )?;
    }
    Ok(())
}
