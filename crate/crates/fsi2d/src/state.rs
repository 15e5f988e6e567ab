//! State vectors of the coupled problem.
//!
//! All fields live on the fixed reference grids. The interface displacement
//! and velocity are shared unknowns: the thin-wall dofs, the radial trace of
//! the fluid velocity, and the radial bottom trace of the thick displacement
//! are identified index-wise through
//! [`InterfaceMaps`](crate::mesh::InterfaceMaps), never constrained through
//! multipliers.

use crate::error::{Error, Result};
use crate::mesh::{FemMesh, InterfaceMaps, Tags};

/// Thin-wall displacement and velocity on the 1D interface grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceState {
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
}

/// Fluid velocity and pressure dofs on the reference fluid mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    /// Velocity dofs, `2*node + component`.
    pub u: Vec<f64>,
    /// Pressure dofs on the bilinear grid.
    pub p: Vec<f64>,
}

impl FluidState {
    /// Radial velocity trace along the interface.
    pub fn radial_trace(&self, maps: &InterfaceMaps) -> Vec<f64> {
        maps.fluid_radial_dof.iter().map(|&d| self.u[d]).collect()
    }
}

/// Thick-wall displacement and velocity dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickState {
    pub d: Vec<f64>,
    pub vel: Vec<f64>,
}

/// Which half of the split the state came out of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Initial data, treated like the output of a fluid half-step.
    Initial,
    /// After the wall elastodynamics solve; fluid velocity untouched.
    PostStructure,
    /// After the fluid solve; wall displacements untouched.
    PostFluid,
}

/// Full state of the coupled system at one (half-)step.
#[derive(Debug, Clone)]
pub struct CoupledState {
    pub fluid: FluidState,
    pub iface: InterfaceState,
    pub thick: ThickState,
    pub time: f64,
    pub step: usize,
    pub stage: Stage,
}

impl CoupledState {
    pub fn zeros(fluid_mesh: &FemMesh, solid_mesh: &FemMesh) -> Self {
        let n_if = 2 * fluid_mesh.nz + 1;
        CoupledState {
            fluid: FluidState {
                u: vec![0.0; 2 * fluid_mesh.n_q2_nodes()],
                p: vec![0.0; fluid_mesh.n_q1_nodes()],
            },
            iface: InterfaceState {
                eta: vec![0.0; n_if],
                v: vec![0.0; n_if],
            },
            thick: ThickState {
                d: vec![0.0; 2 * solid_mesh.n_q2_nodes()],
                vel: vec![0.0; 2 * solid_mesh.n_q2_nodes()],
            },
            time: 0.0,
            step: 0,
            stage: Stage::Initial,
        }
    }

    /// Checks the admissibility conditions initial data must satisfy:
    /// clamped interface ends, displacement/velocity trace identification
    /// between the thin and thick layers, zero thick-wall lateral traces,
    /// matching fluid velocity boundary values, and a strictly positive
    /// radius. Tolerance 1e-12 absolute.
    pub fn validate_initial(
        &self,
        fluid_mesh: &FemMesh,
        solid_mesh: &FemMesh,
        maps: &InterfaceMaps,
        radius: f64,
        r_min: f64,
    ) -> Result<()> {
        const TOL: f64 = 1e-12;
        let mut errs = Vec::new();
        let n = maps.n_nodes();
        for (k, &dir) in maps.dirichlet.iter().enumerate() {
            if dir {
                if self.iface.eta[k].abs() > TOL {
                    errs.push(format!(
                        "initial: eta must vanish at the clamped interface ends, got {} at node {k}",
                        self.iface.eta[k]
                    ));
                }
                if self.iface.v[k].abs() > TOL {
                    errs.push(format!(
                        "initial: interface velocity must vanish at the clamped ends, got {} at node {k}",
                        self.iface.v[k]
                    ));
                }
            }
        }
        for k in 0..n {
            let dr = maps.solid_radial_dof[k];
            let dz = maps.pinned_solid_z[k];
            if (self.thick.d[dr] - self.iface.eta[k]).abs() > TOL {
                errs.push(format!(
                    "initial: thick-wall radial trace must equal eta at interface node {k}"
                ));
            }
            if self.thick.d[dz].abs() > TOL {
                errs.push(format!(
                    "initial: thick-wall axial trace must vanish at interface node {k}"
                ));
            }
            if (self.thick.vel[dr] - self.iface.v[k]).abs() > TOL {
                errs.push(format!(
                    "initial: thick-wall radial velocity trace must equal v at interface node {k}"
                ));
            }
            if self.thick.vel[dz].abs() > TOL {
                errs.push(format!(
                    "initial: thick-wall axial velocity trace must vanish at interface node {k}"
                ));
            }
            if radius + self.iface.eta[k] <= r_min {
                errs.push(format!(
                    "initial: deformed radius {} at node {k} is not above the guard {r_min}",
                    radius + self.iface.eta[k]
                ));
            }
            let fr = maps.fluid_radial_dof[k];
            if (self.fluid.u[fr] - self.iface.v[k]).abs() > TOL {
                errs.push(format!(
                    "initial: fluid radial trace must equal the interface velocity at node {k}"
                ));
            }
        }
        for (node, tag) in solid_mesh.q2_tags.iter().enumerate() {
            if tag.contains(Tags::SOLID_END_IN) || tag.contains(Tags::SOLID_END_OUT) {
                for c in 0..2 {
                    if self.thick.d[2 * node + c].abs() > TOL
                        || self.thick.vel[2 * node + c].abs() > TOL
                    {
                        errs.push(format!(
                            "initial: thick wall must be at rest on its clamped lateral ends (node {node})"
                        ));
                        break;
                    }
                }
            }
        }
        for (node, tag) in fluid_mesh.q2_tags.iter().enumerate() {
            if tag.contains(Tags::INTERFACE) && self.fluid.u[2 * node].abs() > TOL {
                errs.push(format!(
                    "initial: axial fluid velocity must vanish on the interface (node {node})"
                ));
            }
            if (tag.contains(Tags::AXIS) || tag.contains(Tags::INLET) || tag.contains(Tags::OUTLET))
                && self.fluid.u[2 * node + 1].abs() > TOL
            {
                errs.push(format!(
                    "initial: radial fluid velocity must vanish on the axis and at the ends (node {node})"
                ));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            errs.truncate(12);
            Err(Error::Config(errs))
        }
    }
}
