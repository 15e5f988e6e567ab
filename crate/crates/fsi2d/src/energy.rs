//! Per-step energy bookkeeping and the run-level audit report.
//!
//! Every number in the ledger is a quadratic form in the very matrices the
//! steps solved with; recomputing a row from stored state reproduces it
//! bit for bit because assembly is deterministic. Independent quadrature
//! has no place here; that is what the test oracles are for.

use crate::error::{Error, Result};
use crate::fem::csr::CsrMatrix;

/// Kinetic energy `1/2 sum_i rho_i x_i' M_i x_i` over any set of
/// (density, mass matrix, dof vector) triples — fluid, membrane and thick
/// wall contributions are all of this shape. The matrices must be the ones
/// the steps solved with.
pub fn kinetic_energy(parts: &[(f64, &CsrMatrix, &[f64])]) -> f64 {
    parts
        .iter()
        .map(|(rho, m, x)| 0.5 * rho * m.quadratic_form(x, x))
        .sum()
}

/// Elastic energy `1/2 x' K x` summed over (stiffness, dof vector) pairs.
pub fn elastic_energy(parts: &[(&CsrMatrix, &[f64])]) -> f64 {
    parts
        .iter()
        .map(|(k, x)| 0.5 * k.quadratic_form(x, x))
        .sum()
}

/// Viscous dissipation increment of one fluid step,
/// `dt int (1+eta/R) |D_eta(u)|^2`, recovered exactly from the assembled
/// viscous matrix (which carries the `2 mu` factor).
pub fn dissipation_increment(u: &[f64], viscous: &CsrMatrix, dt: f64, mu: f64) -> f64 {
    dt * viscous.quadratic_form(u, u) / (2.0 * mu)
}

/// Which half-step a ledger row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageTag {
    /// Wall elastodynamics half-step.
    Wall,
    /// Fluid half-step.
    Fluid,
}

impl StageTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageTag::Wall => "a1",
            StageTag::Fluid => "a2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "a1" => Ok(StageTag::Wall),
            "a2" => Ok(StageTag::Fluid),
            other => Err(Error::config(format!("unknown stage tag {other:?}"))),
        }
    }
}

/// One half-step of the audit ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub step: usize,
    pub stage: StageTag,
    pub time: f64,
    /// Total kinetic energy at this stage (stage-correct domain weight).
    pub e_kin: f64,
    /// Total elastic energy; equal on the two rows of a step because the
    /// fluid half-step leaves displacements untouched.
    pub e_el: f64,
    /// Viscous dissipation increment (fluid rows; zero on wall rows).
    pub dissipation: f64,
    /// Signed residual of the wall energy equality (wall rows).
    pub structure_residual: f64,
    /// Slack of the fluid energy balance with exact boundary work
    /// (fluid rows).
    pub fluid_slack: f64,
    /// Boundary work done by the dynamic-pressure data (fluid rows).
    pub boundary_work: f64,
    /// Extremes of the deformed radius over the interface nodes.
    pub min_radius: f64,
    pub max_radius: f64,
    /// `|v - v*|` in L2 over the interface (fluid rows).
    pub v_vstar_gap: f64,
}

/// Append-only per-step audit ledger, rows in strictly increasing
/// `(step, stage)` order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        EnergyLedger::default()
    }

    pub fn push(&mut self, row: EnergyRow) {
        if let Some(last) = self.rows.last() {
            let ord_ok = row.step > last.step
                || (row.step == last.step
                    && last.stage == StageTag::Wall
                    && row.stage == StageTag::Fluid);
            assert!(ord_ok, "ledger rows must arrive in (step, stage) order");
        }
        debug_assert!(row.e_kin >= -1e-12 && row.e_el >= -1e-12 && row.dissipation >= -1e-12);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[EnergyRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_energy(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.e_kin + r.e_el)
            .fold(0.0, f64::max)
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.rows.last().map(|r| r.e_kin + r.e_el)
    }
}

/// Accumulated quadratic increments of a run, in the exact combination the
/// per-step balances telescope with. Velocity sums are plain L2 except for
/// the fluid one, which carries the start-of-step domain weight; elastic
/// sums are in their energy norms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DifferenceSums {
    /// `sum_n int (1+eta^n/R) |u^{n+1} - u^n|^2`
    pub du_weighted: f64,
    /// `sum_n |v^{n+1} - v^{n+1/2}|^2`
    pub dv_fluid: f64,
    /// `sum_n |v^{n+1/2} - v^n|^2`
    pub dv_wall: f64,
    /// `sum_n |V^{n+1} - V^n|^2`
    pub dvel_wall: f64,
    /// `sum_n` membrane elastic norm of `eta^{n+1/2} - eta^n`
    pub deta_elastic: f64,
    /// `sum_n` thick elastic norm of `d^{n+1/2} - d^n`
    pub dd_elastic: f64,
    /// `sum_n D^{n+1}` (dissipation increments)
    pub dissipation: f64,
    /// membrane viscosity losses (zero unless configured)
    pub damping: f64,
    /// `sum_n W^n` (boundary work)
    pub boundary_work: f64,
    /// Full-step squared jumps in plain L2, one per channel, for the
    /// piecewise-linear interpolant bounds.
    pub jump_u: f64,
    pub jump_v: f64,
    pub jump_eta: f64,
    pub jump_vel: f64,
}

impl DifferenceSums {
    /// The total of all nonnegative increment terms as they enter the
    /// telescoped balance, given the physical weights.
    pub fn increment_total(&self, rho_f: f64, rho_s1_h: f64, rho_s2: f64, mu: f64) -> f64 {
        0.5 * rho_f * self.du_weighted
            + 0.5 * rho_s1_h * (self.dv_fluid + self.dv_wall)
            + 0.5 * rho_s2 * self.dvel_wall
            + 0.5 * (self.deta_elastic + self.dd_elastic)
            + 2.0 * mu * self.dissipation
            + self.damping
    }
}

/// Run-level report on the uniform energy estimates.
#[derive(Debug, Clone)]
pub struct UniformBoundReport {
    pub e0: f64,
    pub max_energy: f64,
    pub final_energy: f64,
    pub dissipation_sum: f64,
    /// The four velocity difference sums (fluid, interface post, interface
    /// mid, thick), plain/weighted as in [`DifferenceSums`].
    pub velocity_sums: [f64; 4],
    /// Membrane and thick elastic difference sums.
    pub elastic_sums: [f64; 2],
    /// `E_final + increments - E_0 - boundary work`; zero up to accumulated
    /// solver tolerance for any data.
    pub telescope_residual: f64,
    pub telescope_tol: f64,
    /// `L^2(0,T)` norm squared of the pressure data (both ends).
    pub pressure_l2_sq: f64,
    /// Measured bound constant `(max E - E0) / |P|^2`, when data is nonzero.
    pub c_tilde: Option<f64>,
    /// Sup-norm drift of eta from its initial value (raw observable; no
    /// constant is asserted for it).
    pub eta_sup_drift: f64,
    pub pass: bool,
}

impl UniformBoundReport {
    pub fn summary_lines(&self) -> Vec<String> {
        let ok = |b: bool| if b { "pass" } else { "FAIL" };
        let zero_data = self.pressure_l2_sq == 0.0;
        let bounded = !zero_data || self.max_energy <= self.e0 + self.telescope_tol;
        vec![
            format!(
                "uniform bound:    max E = {:.6e}, E0 = {:.6e}, |P|^2 = {:.6e}, C~ = {} [{}]",
                self.max_energy,
                self.e0,
                self.pressure_l2_sq,
                self.c_tilde
                    .map(|c| format!("{c:.6e}"))
                    .unwrap_or_else(|| "n/a".to_string()),
                ok(bounded)
            ),
            format!(
                "dissipation sum:  {:.6e} [{}]",
                self.dissipation_sum,
                ok(self.dissipation_sum.is_finite())
            ),
            format!(
                "velocity sums:    {:.6e} {:.6e} {:.6e} {:.6e} [{}]",
                self.velocity_sums[0],
                self.velocity_sums[1],
                self.velocity_sums[2],
                self.velocity_sums[3],
                ok(self.velocity_sums.iter().all(|s| s.is_finite()))
            ),
            format!(
                "elastic sums:     {:.6e} {:.6e} [{}]",
                self.elastic_sums[0],
                self.elastic_sums[1],
                ok(self.elastic_sums.iter().all(|s| s.is_finite()))
            ),
            format!(
                "telescoped residual: {:.6e} (tol {:.3e}) [{}]",
                self.telescope_residual,
                self.telescope_tol,
                ok(self.telescope_residual.abs() <= self.telescope_tol)
            ),
            format!("eta sup drift:    {:.6e}", self.eta_sup_drift),
        ]
    }
}

/// Builds the run-level report from the ledger and the accumulated sums.
#[allow(clippy::too_many_arguments)]
pub fn uniform_bound_report(
    ledger: &EnergyLedger,
    sums: &DifferenceSums,
    e0: f64,
    pressure_l2_sq: f64,
    n_steps: usize,
    rho_f: f64,
    rho_s1_h: f64,
    rho_s2: f64,
    mu: f64,
    eta_sup_drift: f64,
) -> UniformBoundReport {
    let max_energy = ledger.max_energy().max(e0);
    let final_energy = ledger.final_energy().unwrap_or(e0);
    let increments = sums.increment_total(rho_f, rho_s1_h, rho_s2, mu);
    let telescope_residual = final_energy + increments - e0 - sums.boundary_work;
    let telescope_tol = (n_steps.max(1) as f64) * 1e-9 * (1.0 + max_energy);
    let c_tilde = if pressure_l2_sq > 0.0 {
        Some((max_energy - e0).max(0.0) / pressure_l2_sq)
    } else {
        None
    };
    let all_finite = increments.is_finite() && max_energy.is_finite();
    let zero_data_monotone =
        pressure_l2_sq > 0.0 || max_energy <= e0 + telescope_tol;
    let pass = all_finite
        && telescope_residual.abs() <= telescope_tol
        && zero_data_monotone;
    UniformBoundReport {
        e0,
        max_energy,
        final_energy,
        dissipation_sum: sums.dissipation,
        velocity_sums: [
            sums.du_weighted,
            sums.dv_fluid,
            sums.dv_wall,
            sums.dvel_wall,
        ],
        elastic_sums: [sums.deta_elastic, sums.dd_elastic],
        telescope_residual,
        telescope_tol,
        pressure_l2_sq,
        c_tilde,
        eta_sup_drift,
        pass,
    }
}

/// Checks every ledger row against the per-step balances at solver
/// tolerance: wall rows must close the energy equality, fluid rows must
/// have nonnegative slack and satisfy the step identity. Returns a
/// description of each violation.
pub fn per_step_audit_failures(ledger: &EnergyLedger, mu: f64) -> Vec<String> {
    let mut failures = Vec::new();
    for row in ledger.rows() {
        let scale = 1e-9 * (1.0 + row.e_kin + row.e_el);
        match row.stage {
            StageTag::Wall => {
                if row.structure_residual.abs() > scale {
                    failures.push(format!(
                        "step {}: wall energy residual {:.3e} exceeds {:.3e}",
                        row.step, row.structure_residual, scale
                    ));
                }
            }
            StageTag::Fluid => {
                if row.fluid_slack < -scale {
                    failures.push(format!(
                        "step {}: fluid energy slack {:.3e} below -{:.3e}",
                        row.step, row.fluid_slack, scale
                    ));
                }
                let identity = row.fluid_slack - (2.0 * mu - 1.0) * row.dissipation;
                if identity.abs() > scale {
                    failures.push(format!(
                        "step {}: fluid identity residual {:.3e} exceeds {:.3e}",
                        row.step, identity, scale
                    ));
                }
            }
        }
    }
    failures
}
