//! Time loop: wall half-step, then fluid half-step, with validity guards,
//! per-step audits, and bookkeeping of the piecewise-constant solution
//! sequences.
//!
//! The wall velocity produced by the first half-step (`v*`) and the
//! interface velocity produced by the fluid solve (`v`) are kept as
//! separate snapshot channels; their gap is a first-order-in-dt quantity
//! the verification harness measures, so they must never be merged.

use crate::ale::{check_validity, evaluate_ale, radius_range, ValidityMonitor};
use crate::energy::{DifferenceSums, EnergyLedger, EnergyRow, StageTag};
use crate::error::{Error, Result};
use crate::fem::assemble::{assemble_weighted_mass_vector, qp_jacobian, qp_ones};
use crate::fem::csr::CsrMatrix;
use crate::fem::FormWeights;
use crate::fluid::{pressure_average, FluidInputs, FluidStepper, PressureData};
use crate::mesh::{
    build_fluid_mesh, build_interface_maps, build_solid_mesh, FemMesh, GeometryConfig,
    InterfaceMaps,
};
use crate::state::{CoupledState, InterfaceState, Stage};
use crate::structure::StructureSystem;

/// Smooth sine-mode initial data; the thick layer is filled with the linear
/// radial taper of the interface values, which satisfies every admissibility
/// condition by construction. All-zero fields are the default.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub eta_amplitude: f64,
    pub eta_mode: u32,
    pub v_amplitude: f64,
    pub v_mode: u32,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            eta_amplitude: 0.0,
            eta_mode: 1,
            v_amplitude: 0.0,
            v_mode: 1,
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub weights: FormWeights,
    pub t_final: f64,
    pub n_steps: usize,
    pub pressure_in: PressureData,
    pub pressure_out: PressureData,
    pub initial: InitialData,
    /// Keep a state snapshot every this many steps (1 = every step).
    pub snapshot_every: usize,
    pub monitor: ValidityMonitor,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: GeometryConfig::default(),
            weights: FormWeights::default(),
            t_final: 0.1,
            n_steps: 10,
            pressure_in: PressureData::zero(),
            pressure_out: PressureData::zero(),
            initial: InitialData::default(),
            snapshot_every: 1,
            monitor: ValidityMonitor::for_radius(1.0),
        }
    }
}

impl RunConfig {
    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(Error::Config(mut e)) = self.geometry.validate() {
            errs.append(&mut e);
        }
        if let Err(Error::Config(mut e)) = self.weights.validate() {
            errs.append(&mut e);
        }
        if !(self.t_final > 0.0) {
            errs.push(format!("time.t_final must be > 0, got {}", self.t_final));
        }
        if self.n_steps == 0 {
            errs.push("time.steps must be >= 1".to_string());
        }
        if self.snapshot_every == 0 {
            errs.push("output.cadence must be >= 1".to_string());
        }
        for (name, p) in [
            ("pressure.inlet", &self.pressure_in),
            ("pressure.outlet", &self.pressure_out),
        ] {
            if let Err(Error::Config(e)) = p.validate() {
                errs.extend(e.into_iter().map(|m| format!("{name}: {m}")));
            }
        }
        if let Err(Error::Config(mut e)) = self
            .monitor
            .validate(self.geometry.radius)
            .map_err(|e| match e {
                Error::Config(v) => Error::Config(v),
                other => Error::Config(vec![other.to_string()]),
            })
        {
            errs.append(&mut e);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// `|P_in|^2 + |P_out|^2` in `L^2(0, t_final)`, exact.
    pub fn pressure_l2_sq(&self) -> f64 {
        self.pressure_in.l2_norm_sq(self.t_final) + self.pressure_out.l2_norm_sq(self.t_final)
    }
}

/// One stored state snapshot. `v_star` is the wall velocity from the
/// elastodynamics half-step of the same step; `v` the fluid trace.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
    pub v_star: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub d: Vec<f64>,
    pub vel: Vec<f64>,
}

/// Why a run stopped before its final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaltInfo {
    /// Touching time: when the radius guard was reached.
    pub time: f64,
    pub z: f64,
    pub radius: f64,
    pub guard: f64,
}

/// Everything a finished (or degeneracy-halted) run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub ledger: EnergyLedger,
    pub sums: DifferenceSums,
    pub snapshots: Vec<Snapshot>,
    pub final_state: CoupledState,
    pub e0: f64,
    /// Present when the run stopped at the radius guard.
    pub halt: Option<HaltInfo>,
}

impl RunResult {
    /// Measured constant of the global energy bound, `(max E - E0)/|P|^2`.
    pub fn measured_bound_constant(&self) -> Option<f64> {
        let p2 = self.config.pressure_l2_sq();
        if p2 > 0.0 {
            Some((self.ledger.max_energy() - self.e0).max(0.0) / p2)
        } else {
            None
        }
    }

    pub fn uniform_bound_report(&self) -> crate::energy::UniformBoundReport {
        let w = &self.config.weights;
        let eta0 = &self.snapshots[0].eta;
        let drift = self
            .snapshots
            .iter()
            .map(|s| {
                s.eta
                    .iter()
                    .zip(eta0.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        crate::energy::uniform_bound_report(
            &self.ledger,
            &self.sums,
            self.e0,
            self.config.pressure_l2_sq(),
            self.config.n_steps,
            w.rho_f,
            w.rho_s1_h,
            w.rho_s2,
            w.mu,
            drift,
        )
    }
}

/// Meshes, dof maps and assembled systems shared by every step of a run.
pub struct Simulation {
    pub config: RunConfig,
    pub fluid_mesh: FemMesh,
    pub solid_mesh: FemMesh,
    pub maps: InterfaceMaps,
    pub structure: StructureSystem,
    pub stepper: FluidStepper,
    /// Unweighted fluid vector mass, for plain-L2 jump norms.
    pub fluid_mass_unit: CsrMatrix,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let fluid_mesh = build_fluid_mesh(&config.geometry)?;
        let solid_mesh = build_solid_mesh(&config.geometry)?;
        let maps = build_interface_maps(&fluid_mesh, &solid_mesh)?;
        let structure = StructureSystem::new(&solid_mesh, &maps, &config.weights)?;
        let stepper = FluidStepper::new(
            &fluid_mesh,
            &maps,
            &config.weights,
            config.geometry.radius,
            config.monitor,
        )?;
        let fluid_mass_unit = assemble_weighted_mass_vector(&fluid_mesh, &qp_ones(&fluid_mesh));
        Ok(Simulation {
            config,
            fluid_mesh,
            solid_mesh,
            maps,
            structure,
            stepper,
            fluid_mass_unit,
        })
    }

    /// Builds and validates the initial state from the configured modes.
    pub fn initial_state(&self) -> Result<CoupledState> {
        let g = &self.config.geometry;
        let ini = &self.config.initial;
        let mut state = CoupledState::zeros(&self.fluid_mesh, &self.solid_mesh);
        let shape = |amp: f64, mode: u32, z: f64| {
            amp * (mode as f64 * std::f64::consts::PI * z / g.length).sin()
        };
        for (k, &z) in self.maps.z.iter().enumerate() {
            state.iface.eta[k] = shape(ini.eta_amplitude, ini.eta_mode, z);
            state.iface.v[k] = shape(ini.v_amplitude, ini.v_mode, z);
        }
        // clamped ends exactly zero regardless of rounding
        let n = self.maps.n_nodes();
        for k in [0, n - 1] {
            state.iface.eta[k] = 0.0;
            state.iface.v[k] = 0.0;
        }
        // fill the thick layer with the linear taper of the interface values
        let h = g.thickness;
        for (node, &(z, r)) in self.solid_mesh.q2_nodes.iter().enumerate() {
            let taper = 1.0 - (r - g.radius) / h;
            let e = shape(ini.eta_amplitude, ini.eta_mode, z);
            let v = shape(ini.v_amplitude, ini.v_mode, z);
            state.thick.d[2 * node + 1] = e * taper;
            state.thick.vel[2 * node + 1] = v * taper;
        }
        // exact trace identification and clamped lateral ends
        let w2 = 2 * self.solid_mesh.nz + 1;
        for (node, _) in self.solid_mesh.q2_nodes.iter().enumerate() {
            let i = node % w2;
            if i == 0 || i == w2 - 1 {
                state.thick.d[2 * node + 1] = 0.0;
                state.thick.vel[2 * node + 1] = 0.0;
            }
        }
        for k in 0..n {
            state.thick.d[self.maps.solid_radial_dof[k]] = state.iface.eta[k];
            state.thick.vel[self.maps.solid_radial_dof[k]] = state.iface.v[k];
        }
        // fluid at rest except for the kinematic trace
        for (k, &dof) in self.maps.fluid_radial_dof.iter().enumerate() {
            state.fluid.u[dof] = state.iface.v[k];
        }
        state.validate_initial(
            &self.fluid_mesh,
            &self.solid_mesh,
            &self.maps,
            g.radius,
            self.config.monitor.r_min,
        )?;
        Ok(state)
    }

    /// Total energy of a state whose kinetic weight is `1 + eta/R` at the
    /// state's own displacement.
    pub fn total_energy(&self, state: &CoupledState) -> Result<f64> {
        let ale = evaluate_ale(
            &state.iface.eta,
            &state.iface.v,
            &self.fluid_mesh,
            self.config.geometry.radius,
            state.time,
        )?;
        let mass = assemble_weighted_mass_vector(&self.fluid_mesh, &qp_jacobian(&ale));
        let w = &self.config.weights;
        Ok(
            0.5 * w.rho_f * mass.quadratic_form(&state.fluid.u, &state.fluid.u)
                + self.structure.kinetic_energy(&state.iface.v, &state.thick.vel)
                + self.structure.elastic_energy(&state.iface.eta, &state.thick.d),
        )
    }

    /// One full step: wall solve, fluid solve, audits, bookkeeping.
    pub fn advance_one_step(
        &self,
        state: &CoupledState,
        ledger: &mut EnergyLedger,
        sums: &mut DifferenceSums,
    ) -> Result<StepOutcome> {
        debug_assert!(matches!(state.stage, Stage::Initial | Stage::PostFluid));
        let g = &self.config.geometry;
        let dt = self.config.dt();
        let n = state.step;
        let t_next = (n + 1) as f64 * dt;
        let p_in = pressure_average(&self.config.pressure_in, n, dt);
        let p_out = pressure_average(&self.config.pressure_out, n, dt);

        // wall half-step
        let wall = self.structure.advance(&state.iface, &state.thick, dt)?;
        let structure_residual =
            self.structure
                .energy_residual(&state.iface, &state.thick, &wall, dt);
        let incs = self
            .structure
            .increments((&state.iface, &state.thick), &wall, dt);
        sums.dv_wall += incs.dv_mid_sq;
        sums.dvel_wall += incs.dvel_sq;
        sums.deta_elastic += incs.deta_elastic;
        sums.dd_elastic += incs.dd_elastic;
        sums.damping += incs.damping;

        // stage energies with the stage-correct weight 1 + eta^n/R
        let ale_n = evaluate_ale(
            &state.iface.eta,
            &wall.iface.v,
            &self.fluid_mesh,
            g.radius,
            state.time,
        )?;
        let mass_n = assemble_weighted_mass_vector(&self.fluid_mesh, &qp_jacobian(&ale_n));
        let w = &self.config.weights;
        let e_kin_half = 0.5 * w.rho_f * mass_n.quadratic_form(&state.fluid.u, &state.fluid.u)
            + self.structure.kinetic_energy(&wall.iface.v, &wall.thick.vel);
        let e_el = self.structure.elastic_energy(&wall.iface.eta, &wall.thick.d);
        let half_range = radius_range(&wall.iface.eta, &self.maps.z, g.radius);
        ledger.push(EnergyRow {
            step: n,
            stage: StageTag::Wall,
            time: t_next,
            e_kin: e_kin_half,
            e_el,
            dissipation: 0.0,
            structure_residual,
            fluid_slack: 0.0,
            boundary_work: 0.0,
            min_radius: half_range.min,
            max_radius: half_range.max,
            v_vstar_gap: 0.0,
        });

        // both configurations must clear the guard before the fluid solve
        check_validity(
            &wall.iface.eta,
            &self.maps.z,
            g.radius,
            &self.config.monitor,
            t_next,
        )?;

        // fluid half-step
        let inputs = FluidInputs {
            u_prev: &state.fluid.u,
            v_half: &wall.iface.v,
            eta_n: &state.iface.eta,
            eta_half: &wall.iface.eta,
            dt,
            p_in,
            p_out,
            time: t_next,
        };
        let fstep = self.stepper.advance(&inputs)?;
        let audit = self.stepper.energy_balance(&inputs, &fstep);
        sums.du_weighted += audit.du_weighted_sq;
        sums.dv_fluid += audit.dv_sq;
        sums.dissipation += audit.dissipation;
        sums.boundary_work += audit.boundary_work;

        // full-step jumps in plain L2 for the interpolant bounds
        sums.jump_u += diff_quad(&self.fluid_mass_unit, &fstep.fluid.u, &state.fluid.u);
        sums.jump_v += diff_quad(&self.stepper.thin.mass_unit, &fstep.v, &state.iface.v);
        sums.jump_eta += diff_quad(
            &self.stepper.thin.mass_unit,
            &wall.iface.eta,
            &state.iface.eta,
        );
        sums.jump_vel += diff_quad(&self.structure.solid_mass_unit, &wall.thick.vel, &state.thick.vel);

        let e_kin_full = audit.kin_after + self.structure.thick_kinetic_energy(&wall.thick.vel);
        ledger.push(EnergyRow {
            step: n,
            stage: StageTag::Fluid,
            time: t_next,
            e_kin: e_kin_full,
            e_el,
            dissipation: audit.dissipation,
            structure_residual: 0.0,
            fluid_slack: audit.slack,
            boundary_work: audit.boundary_work,
            min_radius: half_range.min,
            max_radius: half_range.max,
            v_vstar_gap: audit.dv_sq.max(0.0).sqrt(),
        });

        let next = CoupledState {
            fluid: fstep.fluid,
            iface: InterfaceState {
                eta: wall.iface.eta,
                v: fstep.v,
            },
            thick: wall.thick,
            time: t_next,
            step: n + 1,
            stage: Stage::PostFluid,
        };
        debug_assert!(self
            .maps
            .solid_radial_dof
            .iter()
            .enumerate()
            .all(|(k, &dof)| (next.thick.d[dof] - next.iface.eta[k]).abs() < 1e-12));
        Ok(StepOutcome {
            state: next,
            v_star: wall.iface.v,
        })
    }

    /// Runs the full time loop. A degeneracy halt is a regular outcome
    /// recorded in the result; solver failures propagate as errors.
    pub fn run(&self) -> Result<RunResult> {
        let state0 = self.initial_state()?;
        let e0 = self.total_energy(&state0)?;
        let mut ledger = EnergyLedger::new();
        let mut sums = DifferenceSums::default();
        let mut snapshots = vec![snapshot_of(&state0, &state0.iface.v)];
        let mut state = state0;
        let mut halt = None;
        for n in 0..self.config.n_steps {
            match self.advance_one_step(&state, &mut ledger, &mut sums) {
                Ok(outcome) => {
                    let keep = (n + 1) % self.config.snapshot_every == 0
                        || n + 1 == self.config.n_steps;
                    if keep {
                        snapshots.push(snapshot_of(&outcome.state, &outcome.v_star));
                    }
                    state = outcome.state;
                }
                Err(Error::Degeneracy {
                    time,
                    z,
                    radius,
                    guard,
                }) => {
                    halt = Some(HaltInfo {
                        time,
                        z,
                        radius,
                        guard,
                    });
                    break;
                }
                Err(other) => return Err(other),
            }
        }
        Ok(RunResult {
            config: self.config.clone(),
            ledger,
            sums,
            snapshots,
            final_state: state,
            e0,
            halt,
        })
    }
}

/// State plus the wall-velocity channel of the step that produced it.
pub struct StepOutcome {
    pub state: CoupledState,
    pub v_star: Vec<f64>,
}

fn snapshot_of(state: &CoupledState, v_star: &[f64]) -> Snapshot {
    Snapshot {
        step: state.step,
        time: state.time,
        eta: state.iface.eta.clone(),
        v: state.iface.v.clone(),
        v_star: v_star.to_vec(),
        u: state.fluid.u.clone(),
        p: state.fluid.p.clone(),
        d: state.thick.d.clone(),
        vel: state.thick.vel.clone(),
    }
}

fn diff_quad(m: &CsrMatrix, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    m.quadratic_form(&d, &d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        RunConfig {
            geometry: GeometryConfig {
                nz: 2,
                nr_fluid: 2,
                nr_solid: 1,
                ..GeometryConfig::default()
            },
            t_final: 0.05,
            n_steps: 5,
            ..RunConfig::default()
        }
    }

    #[test]
    fn zero_data_run_stays_identically_zero() {
        let sim = Simulation::new(small_config()).unwrap();
        let res = sim.run().unwrap();
        assert!(res.halt.is_none());
        assert_eq!(res.ledger.rows().len(), 10);
        for row in res.ledger.rows() {
            assert_eq!(row.e_kin, 0.0);
            assert_eq!(row.e_el, 0.0);
            assert_eq!(row.dissipation, 0.0);
            assert_eq!(row.structure_residual, 0.0);
            assert_eq!(row.fluid_slack, 0.0);
        }
        assert!(res.final_state.fluid.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn one_step_equals_manual_composition() {
        let mut cfg = small_config();
        cfg.initial.eta_amplitude = 0.02;
        cfg.initial.v_amplitude = 0.1;
        cfg.n_steps = 1;
        cfg.t_final = 0.01;
        let sim = Simulation::new(cfg).unwrap();
        let state0 = sim.initial_state().unwrap();

        let mut ledger = EnergyLedger::new();
        let mut sums = DifferenceSums::default();
        let next = sim
            .advance_one_step(&state0, &mut ledger, &mut sums)
            .unwrap()
            .state;

        // manual composition of the two half-steps
        let dt = sim.config.dt();
        let wall = sim
            .structure
            .advance(&state0.iface, &state0.thick, dt)
            .unwrap();
        let f = sim
            .stepper
            .advance(&FluidInputs {
                u_prev: &state0.fluid.u,
                v_half: &wall.iface.v,
                eta_n: &state0.iface.eta,
                eta_half: &wall.iface.eta,
                dt,
                p_in: 0.0,
                p_out: 0.0,
                time: dt,
            })
            .unwrap();
        assert_eq!(next.iface.eta, wall.iface.eta);
        assert_eq!(next.fluid.u, f.fluid.u);
        assert_eq!(next.iface.v, f.v);
        assert_eq!(next.thick.d, wall.thick.d);
    }

    #[test]
    fn invalid_config_collects_all_errors() {
        let mut cfg = small_config();
        cfg.t_final = -1.0;
        cfg.geometry.nz = 1;
        let err = match Simulation::new(cfg) {
            Ok(_) => panic!("expected config error"),
            Err(e) => e,
        };
        match err {
            Error::Config(msgs) => assert!(msgs.len() >= 2, "{msgs:?}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
