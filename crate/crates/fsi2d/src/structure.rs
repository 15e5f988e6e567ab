//! Implicit elastodynamics half-step for the coupled two-layer wall.
//!
//! One backward-Euler step of the first-order system for the membrane and
//! the thick layer together, with the membrane acting as the massive bottom
//! boundary of the thick layer. Substituting the velocity updates
//! `v = (eta_new - eta_old)/dt`, `V = (d_new - d_old)/dt` turns the step
//! into one SPD solve for the displacements:
//!
//! `(M + dt^2 K + dt D) x_new = M (x_old + dt y_old) + dt D x_old`
//!
//! where `M` bundles the thin and thick masses, `K` the membrane and elastic
//! stiffnesses and `D` the optional membrane viscosity, all on the coupled
//! unknown set in which the radial bottom-trace dofs of the thick wall *are*
//! the interior membrane dofs (one unknown, not two plus a constraint).
//! The fluid velocity does not change in this half-step.

use std::cell::{Cell, RefCell};

use crate::error::Result;
use crate::fem::assemble::{assemble_thick_elasticity, assemble_thin_wall, ThinWallMatrices};
use crate::fem::csr::{Coo, CsrMatrix};
use crate::fem::solve::{Factorization, SolveKind};
use crate::fem::FormWeights;
use crate::mesh::{FemMesh, InterfaceMaps, Tags};
use crate::state::{InterfaceState, ThickState};

/// Outcome of one wall half-step.
#[derive(Debug, Clone)]
pub struct StructureStep {
    pub iface: InterfaceState,
    pub thick: ThickState,
}

/// Assembled wall system with its dof identification and a factorization
/// cache keyed by the time step.
pub struct StructureSystem {
    /// Unknown index per thin-wall node (`None` at the clamped ends).
    thin_unknown: Vec<Option<usize>>,
    /// Unknown index per thick-wall dof; bottom radial traces share the
    /// matching thin unknowns.
    solid_unknown: Vec<Option<usize>>,
    n_unknowns: usize,
    /// Coupled mass, elastic and damping matrices on the unknown set.
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    damping: CsrMatrix,
    has_damping: bool,
    /// Full-grid matrices for energy evaluation.
    pub thin: ThinWallMatrices,
    pub solid_stiffness: CsrMatrix,
    pub solid_mass_unit: CsrMatrix,
    pub weights: FormWeights,
    n_thin: usize,
    n_solid_dofs: usize,
    factor: RefCell<Option<(u64, Factorization, CsrMatrix)>>,
    factorizations: Cell<usize>,
}

impl StructureSystem {
    pub fn new(
        solid_mesh: &FemMesh,
        maps: &InterfaceMaps,
        weights: &FormWeights,
    ) -> Result<Self> {
        weights.validate()?;
        let n_thin = maps.n_nodes();
        let nz = (n_thin - 1) / 2;
        let hz = solid_mesh.hz;
        let thin = assemble_thin_wall(nz, hz, weights)?;
        let solid_stiffness = assemble_thick_elasticity(solid_mesh, weights);
        let solid_mass_unit = {
            let w = crate::fem::qp_ones(solid_mesh);
            crate::fem::assemble_weighted_mass_vector(solid_mesh, &w)
        };

        // unknown numbering: interior membrane dofs first, then free thick
        // dofs; bottom radial traces resolve to the membrane unknowns
        let mut thin_unknown = vec![None; n_thin];
        let mut next = 0usize;
        for k in 0..n_thin {
            if !maps.dirichlet[k] {
                thin_unknown[k] = Some(next);
                next += 1;
            }
        }
        let n_solid_dofs = 2 * solid_mesh.n_q2_nodes();
        let mut solid_unknown = vec![None; n_solid_dofs];
        let w2 = 2 * solid_mesh.nz + 1;
        for (node, tag) in solid_mesh.q2_tags.iter().enumerate() {
            let lateral =
                tag.contains(Tags::SOLID_END_IN) || tag.contains(Tags::SOLID_END_OUT);
            for c in 0..2 {
                let dof = 2 * node + c;
                if lateral {
                    continue;
                }
                if tag.contains(Tags::INTERFACE) {
                    if c == 1 {
                        // radial bottom trace: same unknown as the membrane
                        let k = node % w2;
                        solid_unknown[dof] = thin_unknown[k];
                    }
                    // axial bottom trace stays pinned
                } else {
                    solid_unknown[dof] = Some(next);
                    next += 1;
                }
            }
        }
        let n_unknowns = next;

        let scatter = |full: &CsrMatrix, map: &[Option<usize>], scale: f64| {
            let mut coo = Coo::new(n_unknowns, n_unknowns);
            coo.scatter(full, |r| map[r], |c| map[c], scale);
            coo
        };
        let mut mass = scatter(&thin.mass, &thin_unknown, 1.0);
        mass.scatter(
            &solid_mass_unit,
            |r| solid_unknown[r],
            |c| solid_unknown[c],
            weights.rho_s2,
        );
        let mut stiffness = scatter(&thin.stiffness, &thin_unknown, 1.0);
        stiffness.scatter(
            &solid_stiffness,
            |r| solid_unknown[r],
            |c| solid_unknown[c],
            1.0,
        );
        let damping = scatter(&thin.damping, &thin_unknown, 1.0).into_csr();

        Ok(StructureSystem {
            thin_unknown,
            solid_unknown,
            n_unknowns,
            mass: mass.into_csr(),
            stiffness: stiffness.into_csr(),
            has_damping: damping.nnz() > 0,
            damping,
            thin,
            solid_stiffness,
            solid_mass_unit,
            weights: weights.clone(),
            n_thin,
            n_solid_dofs,
            factor: RefCell::new(None),
            factorizations: Cell::new(0),
        })
    }

    /// Number of factorizations performed so far (one per distinct dt).
    pub fn factorization_count(&self) -> usize {
        self.factorizations.get()
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    fn scatter_back(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut thin_vals = vec![0.0; self.n_thin];
        for (k, m) in self.thin_unknown.iter().enumerate() {
            if let Some(u) = m {
                thin_vals[k] = x[*u];
            }
        }
        let mut solid_vals = vec![0.0; self.n_solid_dofs];
        for (dof, m) in self.solid_unknown.iter().enumerate() {
            if let Some(u) = m {
                solid_vals[dof] = x[*u];
            }
        }
        (thin_vals, solid_vals)
    }

    /// Advances the wall by one implicit step of size `dt`. The fluid
    /// velocity is untouched by construction.
    ///
    /// The membrane data `(eta, v)` and the thick data `(d, V)` load the
    /// right-hand side through their own mass matrices; the interface
    /// velocity seen by the fluid and the thick-wall velocity trace are in
    /// general different fields, and both drive the wall here.
    pub fn advance(
        &self,
        iface: &InterfaceState,
        thick: &ThickState,
        dt: f64,
    ) -> Result<StructureStep> {
        assert!(dt > 0.0, "time step must be positive");
        let key = dt.to_bits();
        {
            let cached = self.factor.borrow();
            let fresh = !matches!(&*cached, Some((k, _, _)) if *k == key);
            drop(cached);
            if fresh {
                let mut sys = self.mass.add_scaled(&self.stiffness, dt * dt);
                if self.has_damping {
                    sys = sys.add_scaled(&self.damping, dt);
                }
                let fact = Factorization::new(&sys, SolveKind::Spd)?;
                self.factorizations.set(self.factorizations.get() + 1);
                *self.factor.borrow_mut() = Some((key, fact, sys));
            }
        }

        let mut rhs = vec![0.0; self.n_unknowns];
        let thin_data: Vec<f64> = iface
            .eta
            .iter()
            .zip(iface.v.iter())
            .map(|(e, v)| e + dt * v)
            .collect();
        let mt = self.thin.mass.mul_vec(&thin_data);
        for (k, m) in self.thin_unknown.iter().enumerate() {
            if let Some(u) = m {
                rhs[*u] += mt[k];
            }
        }
        let solid_data: Vec<f64> = thick
            .d
            .iter()
            .zip(thick.vel.iter())
            .map(|(d, v)| d + dt * v)
            .collect();
        let ms = self.solid_mass_unit.mul_vec(&solid_data);
        for (dof, m) in self.solid_unknown.iter().enumerate() {
            if let Some(u) = m {
                rhs[*u] += self.weights.rho_s2 * ms[dof];
            }
        }
        if self.has_damping {
            let extra = self.thin.damping.mul_vec(&iface.eta);
            for (k, m) in self.thin_unknown.iter().enumerate() {
                if let Some(u) = m {
                    rhs[*u] += dt * extra[k];
                }
            }
        }
        let cached = self.factor.borrow();
        let (_, fact, sys) = cached.as_ref().unwrap();
        let x_new = fact.solve(sys, &rhs)?;
        drop(cached);

        let (eta_new, d_new) = self.scatter_back(&x_new);
        let v_new: Vec<f64> = eta_new
            .iter()
            .zip(iface.eta.iter())
            .map(|(a, b)| (a - b) / dt)
            .collect();
        let vel_new: Vec<f64> = d_new
            .iter()
            .zip(thick.d.iter())
            .map(|(a, b)| (a - b) / dt)
            .collect();
        Ok(StructureStep {
            iface: InterfaceState {
                eta: eta_new,
                v: v_new,
            },
            thick: ThickState {
                d: d_new,
                vel: vel_new,
            },
        })
    }

    /// Kinetic energy of the wall, `1/2 (rho_s1 h |v|^2 + rho_s2 |V|^2)`,
    /// evaluated with the assembled mass matrices.
    pub fn kinetic_energy(&self, v: &[f64], vel: &[f64]) -> f64 {
        crate::energy::kinetic_energy(&[(1.0, &self.thin.mass, v)]) + self.thick_kinetic_energy(vel)
    }

    /// Thick-layer kinetic energy alone, `1/2 rho_s2 |V|^2`.
    pub fn thick_kinetic_energy(&self, vel: &[f64]) -> f64 {
        crate::energy::kinetic_energy(&[(self.weights.rho_s2, &self.solid_mass_unit, vel)])
    }

    /// Elastic energy of the wall, membrane plus thick layer.
    pub fn elastic_energy(&self, eta: &[f64], d: &[f64]) -> f64 {
        crate::energy::elastic_energy(&[
            (&self.thin.stiffness, eta),
            (&self.solid_stiffness, d),
        ])
    }

    /// Signed residual of the discrete wall energy balance for one step:
    ///
    /// `E_kin' + E_el' + 1/2 |y'-y|_M^2 + 1/2 |x'-x|_K^2 + dt y' D y' - (E_kin + E_el)`
    ///
    /// Exact up to factorization accuracy. The fluid kinetic term is
    /// unchanged by this half-step and cancels from both sides.
    pub fn energy_residual(
        &self,
        before_iface: &InterfaceState,
        before_thick: &ThickState,
        after: &StructureStep,
        dt: f64,
    ) -> f64 {
        let dv: Vec<f64> = after
            .iface
            .v
            .iter()
            .zip(before_iface.v.iter())
            .map(|(a, b)| a - b)
            .collect();
        let dvel: Vec<f64> = after
            .thick
            .vel
            .iter()
            .zip(before_thick.vel.iter())
            .map(|(a, b)| a - b)
            .collect();
        let deta: Vec<f64> = after
            .iface
            .eta
            .iter()
            .zip(before_iface.eta.iter())
            .map(|(a, b)| a - b)
            .collect();
        let dd: Vec<f64> = after
            .thick
            .d
            .iter()
            .zip(before_thick.d.iter())
            .map(|(a, b)| a - b)
            .collect();
        let lhs = self.kinetic_energy(&after.iface.v, &after.thick.vel)
            + self.elastic_energy(&after.iface.eta, &after.thick.d)
            + 0.5 * self.thin.mass.quadratic_form(&dv, &dv)
            + 0.5 * self.weights.rho_s2 * self.solid_mass_unit.quadratic_form(&dvel, &dvel)
            + 0.5 * self.thin.stiffness.quadratic_form(&deta, &deta)
            + 0.5 * self.solid_stiffness.quadratic_form(&dd, &dd)
            + dt * self.thin.damping.quadratic_form(&after.iface.v, &after.iface.v);
        let rhs = self.kinetic_energy(&before_iface.v, &before_thick.vel)
            + self.elastic_energy(&before_iface.eta, &before_thick.d);
        lhs - rhs
    }

    /// Quadratic increments of one wall step, in the exact combination the
    /// energy balance telescopes with.
    pub fn increments(&self, before: (&InterfaceState, &ThickState), after: &StructureStep, dt: f64) -> StructureIncrements {
        let dv: Vec<f64> = after
            .iface
            .v
            .iter()
            .zip(before.0.v.iter())
            .map(|(a, b)| a - b)
            .collect();
        let dvel: Vec<f64> = after
            .thick
            .vel
            .iter()
            .zip(before.1.vel.iter())
            .map(|(a, b)| a - b)
            .collect();
        let deta: Vec<f64> = after
            .iface
            .eta
            .iter()
            .zip(before.0.eta.iter())
            .map(|(a, b)| a - b)
            .collect();
        let dd: Vec<f64> = after
            .thick
            .d
            .iter()
            .zip(before.1.d.iter())
            .map(|(a, b)| a - b)
            .collect();
        StructureIncrements {
            dv_mid_sq: self.thin.mass_unit.quadratic_form(&dv, &dv),
            dvel_sq: self.solid_mass_unit.quadratic_form(&dvel, &dvel),
            deta_elastic: self.thin.stiffness.quadratic_form(&deta, &deta),
            dd_elastic: self.solid_stiffness.quadratic_form(&dd, &dd),
            damping: dt
                * self
                    .thin
                    .damping
                    .quadratic_form(&after.iface.v, &after.iface.v),
        }
    }
}

/// Per-step wall increments (plain L2 for velocities, energy norms for the
/// elastic differences).
#[derive(Debug, Clone, Copy, Default)]
pub struct StructureIncrements {
    pub dv_mid_sq: f64,
    pub dvel_sq: f64,
    pub deta_elastic: f64,
    pub dd_elastic: f64,
    pub damping: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_fluid_mesh, build_interface_maps, build_solid_mesh, GeometryConfig};
    use crate::state::CoupledState;

    fn setup(nz: usize, nr_s: usize) -> (FemMesh, FemMesh, InterfaceMaps, StructureSystem) {
        let cfg = GeometryConfig {
            nz,
            nr_fluid: 2,
            nr_solid: nr_s,
            ..GeometryConfig::default()
        };
        let f = build_fluid_mesh(&cfg).unwrap();
        let s = build_solid_mesh(&cfg).unwrap();
        let maps = build_interface_maps(&f, &s).unwrap();
        let sys = StructureSystem::new(&s, &maps, &FormWeights::default()).unwrap();
        (f, s, maps, sys)
    }

    /// Deterministic pseudo-random admissible wall state.
    pub(crate) fn random_wall_state(
        solid: &FemMesh,
        maps: &InterfaceMaps,
        seed: u64,
        amp: f64,
    ) -> (InterfaceState, ThickState) {
        let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            amp * ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        };
        let n = maps.n_nodes();
        let mut eta = vec![0.0; n];
        let mut v = vec![0.0; n];
        for k in 0..n {
            if !maps.dirichlet[k] {
                eta[k] = next();
                v[k] = next();
            }
        }
        let mut d = vec![0.0; 2 * solid.n_q2_nodes()];
        let mut vel = vec![0.0; 2 * solid.n_q2_nodes()];
        let w2 = 2 * solid.nz + 1;
        for (node, tag) in solid.q2_tags.iter().enumerate() {
            if tag.contains(Tags::SOLID_END_IN) || tag.contains(Tags::SOLID_END_OUT) {
                continue;
            }
            for c in 0..2 {
                let dof = 2 * node + c;
                if tag.contains(Tags::INTERFACE) {
                    if c == 1 {
                        let k = node % w2;
                        d[dof] = eta[k];
                        vel[dof] = v[k];
                    }
                } else {
                    d[dof] = next();
                    vel[dof] = next();
                }
            }
        }
        (InterfaceState { eta, v }, ThickState { d, vel })
    }

    #[test]
    fn zero_state_stays_zero() {
        let (f, s, _maps, sys) = setup(2, 1);
        let st = CoupledState::zeros(&f, &s);
        let out = sys.advance(&st.iface, &st.thick, 0.1).unwrap();
        assert!(out.iface.eta.iter().all(|v| v.abs() < 1e-14));
        assert!(out.thick.d.iter().all(|v| v.abs() < 1e-14));
        assert!(out.iface.v.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn energy_balance_holds_and_detects_corruption() {
        let (_f, s, maps, sys) = setup(3, 2);
        for seed in 0..20 {
            for &dt in &[1e-1, 1e-3] {
                let (iface, thick) = random_wall_state(&s, &maps, seed, 0.5);
                let e0 = sys.kinetic_energy(&iface.v, &thick.vel)
                    + sys.elastic_energy(&iface.eta, &thick.d);
                let out = sys.advance(&iface, &thick, dt).unwrap();
                let res = sys.energy_residual(&iface, &thick, &out, dt);
                assert!(
                    res.abs() <= 1e-9 * (1.0 + e0),
                    "residual {res} too large at seed {seed}, dt {dt}"
                );
                // energies never increase across the wall step
                let e1 = sys.kinetic_energy(&out.iface.v, &out.thick.vel)
                    + sys.elastic_energy(&out.iface.eta, &out.thick.d);
                assert!(e1 <= e0 + 1e-9 * (1.0 + e0));

                let mut bad = out.clone();
                for v in bad.iface.v.iter_mut() {
                    *v += 1e-3;
                }
                let res_bad = sys.energy_residual(&iface, &thick, &bad, dt);
                assert!(res_bad.abs() > 1e-7, "audit failed to flag corruption");
            }
        }
    }

    #[test]
    fn dt_consistency_displacement_change_is_order_dt() {
        let (_f, s, maps, sys) = setup(2, 1);
        let (iface, thick) = random_wall_state(&s, &maps, 7, 0.3);
        let mut prev = f64::INFINITY;
        for &dt in &[1e-2, 1e-3, 1e-4] {
            let out = sys.advance(&iface, &thick, dt).unwrap();
            let change: f64 = out
                .iface
                .eta
                .iter()
                .zip(iface.eta.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(change < prev);
            assert!(change < 10.0 * dt, "change {change} not O(dt) at dt {dt}");
            prev = change;
        }
    }

    #[test]
    fn factorization_cache_reuses_identical_dt() {
        let (f, s, _maps, sys) = setup(2, 1);
        let st = CoupledState::zeros(&f, &s);
        assert_eq!(sys.factorization_count(), 0);
        sys.advance(&st.iface, &st.thick, 0.1).unwrap();
        sys.advance(&st.iface, &st.thick, 0.1).unwrap();
        assert_eq!(sys.factorization_count(), 1);
        sys.advance(&st.iface, &st.thick, 0.05).unwrap();
        assert_eq!(sys.factorization_count(), 2);
    }
}
