//! Linearized fluid half-step on the fixed reference domain.
//!
//! The transformed operators are frozen at the start-of-step interface
//! configuration; the advection transport uses the start-of-step fluid
//! velocity minus the domain velocity built from the just-computed wall
//! velocity. The interface inertia enters the velocity block as a Robin-type
//! mass term on the radial trace dofs: the new interface velocity *is* the
//! radial trace of the new fluid velocity, one set of unknowns. Inflow and
//! outflow carry dynamic-pressure data through the boundary load functional
//! only. Wall displacements pass through unchanged.
//!
//! The monolithic system couples velocity and pressure through the
//! divergence constraint; both the pressure gradient and the constraint are
//! weighted by the ALE Jacobian so each is exactly the adjoint of the other
//! at the matrix level (no pressure stabilization; the pressure block is
//! zero).

use crate::ale::{check_validity, evaluate_ale, ValidityMonitor};
use crate::error::{Error, Result};
use crate::fem::assemble::{
    assemble_advection, assemble_pressure_load, assemble_thin_wall,
    assemble_transformed_divergence, assemble_transformed_stiffness,
    assemble_weighted_mass_vector, qp_jacobian, qp_v_over_r, ThinWallMatrices,
};
use crate::fem::csr::{Coo, CsrMatrix};
use crate::fem::solve::{solve_sparse, SolveKind};
use crate::fem::FormWeights;
use crate::mesh::{FemMesh, InterfaceMaps, Tags};
use crate::state::FluidState;

/// Inlet/outlet dynamic-pressure data as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum PressureData {
    Constant(f64),
    /// Raised-cosine pulse `A/2 (1 - cos(2 pi t / tau))` on `[0, tau]`,
    /// zero afterwards.
    CosinePulse { amplitude: f64, duration: f64 },
    /// Piecewise-linear samples `(t, value)` with strictly increasing times;
    /// constant extrapolation outside the table.
    Table(Vec<(f64, f64)>),
}

impl PressureData {
    pub fn zero() -> Self {
        PressureData::Constant(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PressureData::Constant(_) => Ok(()),
            PressureData::CosinePulse { duration, .. } => {
                if *duration > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "pressure pulse duration must be > 0, got {duration}"
                    )))
                }
            }
            PressureData::Table(samples) => {
                if samples.len() < 2 {
                    return Err(Error::config("pressure table needs at least two samples"));
                }
                for w in samples.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::config(format!(
                            "pressure table times must be strictly increasing, got {} then {}",
                            w[0].0, w[1].0
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            PressureData::Constant(c) => *c,
            PressureData::CosinePulse {
                amplitude,
                duration,
            } => {
                if t < 0.0 || t > *duration {
                    0.0
                } else {
                    0.5 * amplitude * (1.0 - (2.0 * std::f64::consts::PI * t / duration).cos())
                }
            }
            PressureData::Table(samples) => {
                if t <= samples[0].0 {
                    return samples[0].1;
                }
                if t >= samples[samples.len() - 1].0 {
                    return samples[samples.len() - 1].1;
                }
                let i = samples.partition_point(|s| s.0 <= t) - 1;
                let (t0, v0) = samples[i];
                let (t1, v1) = samples[i + 1];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Exact integral over `[a, b]` (closed form for constant and cosine,
    /// trapezoid-exact for the piecewise-linear table).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b >= a);
        match self {
            PressureData::Constant(c) => c * (b - a),
            PressureData::CosinePulse {
                amplitude,
                duration,
            } => {
                let lo = a.clamp(0.0, *duration);
                let hi = b.clamp(0.0, *duration);
                if hi <= lo {
                    return 0.0;
                }
                let om = 2.0 * std::f64::consts::PI / duration;
                0.5 * amplitude * ((hi - lo) - ((om * hi).sin() - (om * lo).sin()) / om)
            }
            PressureData::Table(samples) => {
                // exact integral of the piecewise-linear interpolant with
                // constant extrapolation
                let mut total = 0.0;
                let mut knots: Vec<f64> = vec![a];
                for &(t, _) in samples {
                    if t > a && t < b {
                        knots.push(t);
                    }
                }
                knots.push(b);
                for w in knots.windows(2) {
                    total += 0.5 * (self.value(w[0]) + self.value(w[1])) * (w[1] - w[0]);
                }
                total
            }
        }
    }

    /// Exact `L^2(0, t_end)` norm squared of the signal (segments of the
    /// table are quadratic after squaring, integrated by Simpson, exact).
    pub fn l2_norm_sq(&self, t_end: f64) -> f64 {
        match self {
            PressureData::Constant(c) => c * c * t_end,
            PressureData::CosinePulse {
                amplitude,
                duration,
            } => {
                let hi = t_end.clamp(0.0, *duration);
                let om = 2.0 * std::f64::consts::PI / duration;
                // (A/2)^2 int (1 - cos)^2 = (A/2)^2 [3t/2 - 2 sin/om + sin(2)/4 ...]
                let x = om * hi;
                0.25 * amplitude * amplitude / om
                    * (1.5 * x - 2.0 * x.sin() + 0.25 * (2.0 * x).sin())
            }
            PressureData::Table(_) => {
                let mut knots: Vec<f64> = vec![0.0];
                if let PressureData::Table(samples) = self {
                    for &(t, _) in samples {
                        if t > 0.0 && t < t_end {
                            knots.push(t);
                        }
                    }
                }
                knots.push(t_end);
                let mut total = 0.0;
                for w in knots.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let m = 0.5 * (lo + hi);
                    let (f0, fm, f1) = (self.value(lo), self.value(m), self.value(hi));
                    total += (hi - lo) / 6.0 * (f0 * f0 + 4.0 * fm * fm + f1 * f1);
                }
                total
            }
        }
    }
}

/// Interval average of the pressure datum over step `n` of size `dt`.
pub fn pressure_average(data: &PressureData, n: usize, dt: f64) -> f64 {
    if let PressureData::Constant(c) = data {
        return *c;
    }
    let a = n as f64 * dt;
    data.integral(a, a + dt) / dt
}

/// Matrices and load of one fluid step, kept for the energy bookkeeping.
/// Everything is over the full dof sets, before elimination.
pub struct FluidStepReport {
    /// Vector mass with weight `1 + eta_n/R` (no density factor).
    pub mass: CsrMatrix,
    /// Vector reaction with weight `v_half/R` (no density, no 1/2).
    pub reaction: CsrMatrix,
    /// Viscous stiffness including the `2 mu` factor.
    pub viscous: CsrMatrix,
    /// Weighted divergence, pressure-by-velocity.
    pub divergence: CsrMatrix,
    /// Dynamic-pressure load vector.
    pub load: Vec<f64>,
    pub dt: f64,
    pub p_in: f64,
    pub p_out: f64,
}

/// Output of one fluid half-step.
pub struct FluidStep {
    pub fluid: FluidState,
    /// New interface velocity (the radial trace of the new fluid velocity).
    pub v: Vec<f64>,
    pub report: FluidStepReport,
}

/// Energy bookkeeping of one fluid step. The thick-wall kinetic term is
/// unchanged by this half-step and is left out of both sides.
#[derive(Debug, Clone, Copy)]
pub struct FluidAudit {
    /// Slack of the dissipative balance with the exact boundary work in
    /// place of the data bound; nonnegative (up to solver accuracy) whenever
    /// `2 mu >= 1`.
    pub slack: f64,
    /// Residual of the underlying step identity; zero up to solver accuracy
    /// for any data.
    pub identity_residual: f64,
    /// `dt * (P_in int u_z|in - P_out int u_z|out)` for the new velocity.
    pub boundary_work: f64,
    /// `dt int (1+eta_n/R) |D_eta u|^2`, the dissipation increment.
    pub dissipation: f64,
    pub kin_after: f64,
    pub kin_before: f64,
    /// Weighted `|u_new - u_old|^2` increment (density-free).
    pub du_weighted_sq: f64,
    /// Plain `|v_new - v_half|^2` increment.
    pub dv_sq: f64,
}

/// Inputs of one fluid half-step.
pub struct FluidInputs<'a> {
    /// Start-of-step fluid velocity (also the advection transport field).
    pub u_prev: &'a [f64],
    /// Wall velocity from the elastodynamics half-step.
    pub v_half: &'a [f64],
    /// Interface displacement the operators are frozen at.
    pub eta_n: &'a [f64],
    /// Interface displacement produced by the wall half-step.
    pub eta_half: &'a [f64],
    pub dt: f64,
    pub p_in: f64,
    pub p_out: f64,
    /// Time label for degeneracy reports.
    pub time: f64,
}

/// Builder and solver for the monolithic velocity-pressure-interface system.
pub struct FluidStepper {
    mesh: FemMesh,
    maps: InterfaceMaps,
    pub weights: FormWeights,
    radius: f64,
    monitor: ValidityMonitor,
    pub thin: ThinWallMatrices,
    /// Unknown index per velocity dof; `None` for eliminated (essential)
    /// dofs: `u_z` on the interface, `u_r` on the axis and at both ends.
    vel_unknown: Vec<Option<usize>>,
    n_vel_unknowns: usize,
    /// When true the interface trace dofs are eliminated too (rigid wall);
    /// intended for channel-flow sanity tests only.
    rigid_interface: bool,
}

impl FluidStepper {
    pub fn new(
        mesh: &FemMesh,
        maps: &InterfaceMaps,
        weights: &FormWeights,
        radius: f64,
        monitor: ValidityMonitor,
    ) -> Result<Self> {
        weights.validate()?;
        monitor.validate(radius)?;
        let thin = assemble_thin_wall(mesh.nz, mesh.hz, weights)?;
        let mut stepper = FluidStepper {
            mesh: mesh.clone(),
            maps: maps.clone(),
            weights: weights.clone(),
            radius,
            monitor,
            thin,
            vel_unknown: Vec::new(),
            n_vel_unknowns: 0,
            rigid_interface: false,
        };
        stepper.number_unknowns();
        Ok(stepper)
    }

    /// Replaces the interface coupling rows by a no-slip wall. Test hook for
    /// classical channel-flow comparisons.
    pub fn with_rigid_interface(mut self) -> Self {
        self.rigid_interface = true;
        self.number_unknowns();
        self
    }

    fn number_unknowns(&mut self) {
        let n = self.mesh.n_q2_nodes();
        let mut unknown = vec![None; 2 * n];
        let mut next = 0usize;
        for (node, tag) in self.mesh.q2_tags.iter().enumerate() {
            let z_fixed = tag.contains(Tags::INTERFACE);
            let mut r_fixed = tag.contains(Tags::AXIS)
                || tag.contains(Tags::INLET)
                || tag.contains(Tags::OUTLET);
            if self.rigid_interface && tag.contains(Tags::INTERFACE) {
                r_fixed = true;
            }
            if !z_fixed {
                unknown[2 * node] = Some(next);
                next += 1;
            }
            if !r_fixed {
                unknown[2 * node + 1] = Some(next);
                next += 1;
            }
        }
        self.vel_unknown = unknown;
        self.n_vel_unknowns = next;
    }

    pub fn mesh(&self) -> &FemMesh {
        &self.mesh
    }

    pub fn maps(&self) -> &InterfaceMaps {
        &self.maps
    }

    /// Advances the fluid by one step. Also enforces the radius guard on
    /// both interface configurations entering the step.
    pub fn advance(&self, inp: &FluidInputs) -> Result<FluidStep> {
        assert!(inp.dt > 0.0, "time step must be positive");
        check_validity(inp.eta_n, &self.maps.z, self.radius, &self.monitor, inp.time)?;
        check_validity(
            inp.eta_half,
            &self.maps.z,
            self.radius,
            &self.monitor,
            inp.time,
        )?;
        let ale = evaluate_ale(inp.eta_n, inp.v_half, &self.mesh, self.radius, inp.time)?;
        let mass = assemble_weighted_mass_vector(&self.mesh, &qp_jacobian(&ale));
        let reaction_field = qp_v_over_r(&ale);
        let adv = assemble_advection(&self.mesh, &ale, inp.u_prev);
        let viscous = assemble_transformed_stiffness(&self.mesh, &ale, self.weights.mu);
        let divergence = assemble_transformed_divergence(&self.mesh, &ale);
        let load = assemble_pressure_load(&self.mesh, inp.p_in, inp.p_out);
        // the reaction matrix from assemble_advection is exactly the
        // weighted vector mass with weight v/R; reuse it for the report
        let reaction = assemble_weighted_mass_vector(&self.mesh, &reaction_field);

        let nv = self.n_vel_unknowns;
        let np = self.mesh.n_q1_nodes();
        let ntot = nv + np;
        let rho_f = self.weights.rho_f;
        let mut sys = Coo::new(ntot, ntot);
        let vmap = |d: usize| self.vel_unknown[d];
        sys.scatter(&mass, vmap, vmap, rho_f / inp.dt);
        sys.scatter(&adv.skew, vmap, vmap, rho_f);
        sys.scatter(&reaction, vmap, vmap, 0.5 * rho_f);
        sys.scatter(&viscous, vmap, vmap, 1.0);
        if !self.rigid_interface {
            let robin = self.weights.rho_s1_h / inp.dt;
            for (k, c, v) in self.thin.mass_unit.entries() {
                let (rd, cd) = (self.maps.fluid_radial_dof[k], self.maps.fluid_radial_dof[c]);
                if let (Some(ri), Some(ci)) = (self.vel_unknown[rd], self.vel_unknown[cd]) {
                    sys.push(ri, ci, robin * v);
                }
            }
        }
        // pressure coupling: momentum rows get -B', constraint rows -B
        for (k, j, v) in divergence.entries() {
            if let Some(uj) = self.vel_unknown[j] {
                sys.push(uj, nv + k, -v);
                sys.push(nv + k, uj, -v);
            }
        }
        let sys = sys.into_csr();

        let mut rhs_full = mass.mul_vec(inp.u_prev);
        for (r, l) in rhs_full.iter_mut().zip(load.iter()) {
            *r = *r * rho_f / inp.dt + l;
        }
        let mut rhs = vec![0.0; ntot];
        for (dof, m) in self.vel_unknown.iter().enumerate() {
            if let Some(u) = m {
                rhs[*u] = rhs_full[dof];
            }
        }
        if !self.rigid_interface {
            let robin_rhs = self.thin.mass_unit.mul_vec(inp.v_half);
            for (k, val) in robin_rhs.iter().enumerate() {
                if let Some(u) = self.vel_unknown[self.maps.fluid_radial_dof[k]] {
                    rhs[u] += self.weights.rho_s1_h / inp.dt * val;
                }
            }
        }

        let x = solve_sparse(&sys, &rhs, SolveKind::General).map_err(|e| match e {
            Error::Solver(msg) => Error::Solver(format!(
                "fluid step at t = {:.6e}: {msg} (a closed configuration with no \
                 pressure datum leaves the pressure defined only up to a constant)",
                inp.time
            )),
            other => other,
        })?;

        let mut u = vec![0.0; 2 * self.mesh.n_q2_nodes()];
        for (dof, m) in self.vel_unknown.iter().enumerate() {
            if let Some(ui) = m {
                u[dof] = x[*ui];
            }
        }
        let p = x[nv..].to_vec();
        let v: Vec<f64> = self
            .maps
            .fluid_radial_dof
            .iter()
            .map(|&d| u[d])
            .collect();
        Ok(FluidStep {
            fluid: FluidState { u, p },
            v,
            report: FluidStepReport {
                mass,
                reaction,
                viscous,
                divergence,
                load,
                dt: inp.dt,
                p_in: inp.p_in,
                p_out: inp.p_out,
            },
        })
    }

    /// Kinetic energy of fluid plus interface with the step's own matrices.
    /// `weight_shift` adds `dt * reaction` to the mass weight, turning the
    /// start-of-step weight into the end-of-step one.
    pub fn kinetic_energy(
        &self,
        u: &[f64],
        v: &[f64],
        report: &FluidStepReport,
        weight_shift: bool,
    ) -> f64 {
        let mut fluid = report.mass.quadratic_form(u, u);
        if weight_shift {
            fluid += report.dt * report.reaction.quadratic_form(u, u);
        }
        0.5 * self.weights.rho_f * fluid
            + 0.5 * self.thin.mass.quadratic_form(v, v)
    }

    /// Discrete energy bookkeeping of one fluid step; see [`FluidAudit`].
    pub fn energy_balance(
        &self,
        inp: &FluidInputs,
        out: &FluidStep,
    ) -> FluidAudit {
        let rep = &out.report;
        let u = &out.fluid.u;
        let kin_after = self.kinetic_energy(u, &out.v, rep, true);
        let kin_before = self.kinetic_energy(inp.u_prev, inp.v_half, rep, false);
        let du: Vec<f64> = u
            .iter()
            .zip(inp.u_prev.iter())
            .map(|(a, b)| a - b)
            .collect();
        let dv: Vec<f64> = out
            .v
            .iter()
            .zip(inp.v_half.iter())
            .map(|(a, b)| a - b)
            .collect();
        let du_weighted_sq = rep.mass.quadratic_form(&du, &du);
        let dv_sq = self.thin.mass_unit.quadratic_form(&dv, &dv);
        let dissipation =
            crate::energy::dissipation_increment(u, &rep.viscous, rep.dt, self.weights.mu);
        let boundary_work = rep.dt * dot(&rep.load, u);
        let slack = kin_before + boundary_work
            - kin_after
            - 0.5 * self.weights.rho_f * du_weighted_sq
            - 0.5 * self.weights.rho_s1_h * dv_sq
            - dissipation;
        let identity_residual = slack - (2.0 * self.weights.mu - 1.0) * dissipation;
        FluidAudit {
            slack,
            identity_residual,
            boundary_work,
            dissipation,
            kin_after,
            kin_before,
            du_weighted_sq,
            dv_sq,
        }
    }

    /// `|B u| / max(1, |u|)` for the step's own divergence matrix.
    pub fn divergence_residual(&self, report: &FluidStepReport, u: &[f64]) -> f64 {
        let bu = report.divergence.mul_vec(u);
        let num = bu.iter().map(|x| x * x).sum::<f64>().sqrt();
        let den = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        num / den
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
