//! Refinement studies over the time step: the gap between the two interface
//! velocity channels and self-convergence of the split scheme.

use crate::driver::{RunResult, Simulation};
use crate::error::{Error, Result};
use crate::fem::csr::CsrMatrix;

/// A time-indexed series of dof vectors on a uniform grid, with shifting.
#[derive(Debug, Clone)]
pub struct ShiftSeries {
    /// Spacing of the stored samples.
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ShiftSeries {
    pub fn from_snapshots<F>(result: &RunResult, extract: F) -> ShiftSeries
    where
        F: Fn(&crate::driver::Snapshot) -> Vec<f64>,
    {
        let dt = result.config.dt() * result.config.snapshot_every as f64;
        ShiftSeries {
            dt,
            times: result.snapshots.iter().map(|s| s.time).collect(),
            values: result.snapshots.iter().map(extract).collect(),
        }
    }

    /// The series translated in time by `k` samples: entry `i` holds the
    /// value at `t_i - k dt`. Only the overlap `i >= k` is returned.
    pub fn shift_steps(&self, k: usize) -> ShiftSeries {
        ShiftSeries {
            dt: self.dt,
            times: self.times[k..].to_vec(),
            values: self.values[..self.values.len() - k].to_vec(),
        }
    }

    /// Discrete `L^2(time; mass-norm)` distance between two equally long
    /// series (rectangle rule over the sample spacing).
    pub fn l2_distance_sq(&self, other: &ShiftSeries, mass: &CsrMatrix) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let mut total = 0.0;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
            total += self.dt * mass.quadratic_form(&d, &d);
        }
        total
    }
}

/// Least-squares slope of `log y` against `log x`. `None` when any value is
/// exactly zero (the quantity is identically resolved).
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(_, y)| y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// `L^2((0,T) x interface)` distance between the fluid-side and wall-side
/// interface velocities of one run, from the per-step ledger gaps.
pub fn interface_velocity_gap(result: &RunResult) -> f64 {
    let dt = result.config.dt();
    result
        .ledger
        .rows()
        .iter()
        .map(|r| dt * r.v_vstar_gap * r.v_vstar_gap)
        .sum::<f64>()
        .sqrt()
}

/// Measured decay of the two-channel interface velocity gap under time
/// refinement.
#[derive(Debug, Clone)]
pub struct GapRate {
    /// `(dt, gap)` per refinement level.
    pub measurements: Vec<(f64, f64)>,
    /// Slope of the log-log fit; `None` when every gap vanished exactly.
    pub slope: Option<f64>,
    /// A vanished gap on a run that moved at all means the two channels
    /// were not independent.
    pub suspicious: bool,
}

/// Fits the gap decay over at least three refinement levels of the same
/// configuration.
pub fn v_vstar_gap_rate(results: &[&RunResult]) -> Result<GapRate> {
    if results.len() < 3 {
        return Err(Error::config(format!(
            "gap-rate fit needs at least 3 refinement levels, got {}",
            results.len()
        )));
    }
    let mut measurements = Vec::new();
    let mut any_motion = false;
    for r in results {
        measurements.push((r.config.dt(), interface_velocity_gap(r)));
        any_motion |= r.ledger.max_energy() > 0.0;
    }
    let slope = log_log_slope(&measurements);
    Ok(GapRate {
        suspicious: slope.is_none() && any_motion,
        measurements,
        slope,
    })
}

/// Per-channel self-convergence orders of the time stepping on a fixed mesh.
#[derive(Debug, Clone)]
pub struct SelfConvergence {
    /// `(coarse-vs-mid error, mid-vs-fine error, order)` per channel; order
    /// is `None` when the differences vanish identically.
    pub eta: (f64, f64, Option<f64>),
    pub v: (f64, f64, Option<f64>),
    pub u: (f64, f64, Option<f64>),
    pub d: (f64, f64, Option<f64>),
}

impl SelfConvergence {
    pub fn summary_lines(&self) -> Vec<String> {
        let fmt = |name: &str, c: &(f64, f64, Option<f64>)| {
            format!(
                "{name}: |X_N - X_2N| = {:.6e}, |X_2N - X_4N| = {:.6e}, order = {}",
                c.0,
                c.1,
                c.2.map(|p| format!("{p:.3}"))
                    .unwrap_or_else(|| "exact".to_string())
            )
        };
        vec![
            fmt("eta", &self.eta),
            fmt("v  ", &self.v),
            fmt("u  ", &self.u),
            fmt("d  ", &self.d),
        ]
    }
}

/// Compares runs at `N`, `2N`, `4N` steps of the same configuration at the
/// coarse sample times and reports the observed order per channel. All runs
/// must keep every step (`snapshot_every = 1`).
pub fn temporal_self_convergence(
    sim: &Simulation,
    coarse: &RunResult,
    mid: &RunResult,
    fine: &RunResult,
) -> Result<SelfConvergence> {
    for (r, factor) in [(coarse, 1usize), (mid, 2), (fine, 4)] {
        if r.config.snapshot_every != 1 {
            return Err(Error::config(
                "self-convergence needs runs with snapshots at every step",
            ));
        }
        if r.config.n_steps != coarse.config.n_steps * factor
            || (r.config.t_final - coarse.config.t_final).abs() > 1e-14
        {
            return Err(Error::config(
                "self-convergence needs matched configs at N, 2N, 4N steps",
            ));
        }
        if r.halt.is_some() {
            return Err(Error::config(
                "self-convergence runs must finish without a degeneracy halt",
            ));
        }
    }
    let thin_mass = &sim.stepper.thin.mass_unit;
    let solid_mass = &sim.structure.solid_mass_unit;
    let fluid_mass = &sim.fluid_mass_unit;
    let channel = |extract: fn(&crate::driver::Snapshot) -> Vec<f64>, mass: &CsrMatrix| {
        let sc = ShiftSeries::from_snapshots(coarse, extract);
        let sm = ShiftSeries::from_snapshots(mid, extract);
        let sf = ShiftSeries::from_snapshots(fine, extract);
        // subsample the finer runs at the coarse times
        let at_coarse = |s: &ShiftSeries, stride: usize| ShiftSeries {
            dt: sc.dt,
            times: s.times.iter().step_by(stride).cloned().collect(),
            values: s.values.iter().step_by(stride).cloned().collect(),
        };
        let e01 = sc.l2_distance_sq(&at_coarse(&sm, 2), mass).sqrt();
        let e12 = at_coarse(&sm, 2)
            .l2_distance_sq(&at_coarse(&sf, 4), mass)
            .sqrt();
        let order = if e01 > 0.0 && e12 > 0.0 {
            Some((e01 / e12).log2())
        } else {
            None
        };
        (e01, e12, order)
    };
    Ok(SelfConvergence {
        eta: channel(|s| s.eta.clone(), thin_mass),
        v: channel(|s| s.v.clone(), thin_mass),
        u: channel(|s| s.u.clone(), fluid_mass),
        d: channel(|s| s.d.clone(), solid_mass),
    })
}
