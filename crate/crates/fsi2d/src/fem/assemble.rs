//! Finite-element assembly of every bilinear form in the scheme.
//!
//! All routines return matrices over the *full* dof sets of their meshes;
//! boundary conditions are applied downstream by the step builders through
//! index elimination, never by penalties. Assembly loops run in a fixed
//! element order so repeated assembly of the same data is bit-identical.
//!
//! Vector fields on the biquadratic grid use dof `2*node + c` with `c = 0`
//! for z and `c = 1` for r. Quadrature-point weight fields are flat slices
//! of length `9 * n_elems` in the same element-major order as
//! [`AleOperators::points`](crate::ale::AleOperators).

use crate::ale::AleOperators;
use crate::error::{Error, Result};
use crate::fem::csr::{Coo, CsrMatrix};
use crate::fem::quadrature::{gauss_3x3, GAUSS_3};
use crate::fem::shape::{q1, q2, q2_grad, quad1d, quad1d_deriv};
use crate::mesh::FemMesh;

/// Physical coefficients of the coupled problem. Densities, viscosity and
/// elastic moduli default to one; the optional thin-wall coefficients extend
/// the membrane to a full zeroth/second-order viscoelastic model.
#[derive(Debug, Clone, PartialEq)]
pub struct FormWeights {
    /// Fluid density.
    pub rho_f: f64,
    /// Fluid viscosity.
    pub mu: f64,
    /// Thin-wall areal mass (density times thickness).
    pub rho_s1_h: f64,
    /// Membrane stiffness (wave speed squared).
    pub c2: f64,
    /// Zeroth-order thin-wall elasticity.
    pub thin_c0: f64,
    /// Fourth-order thin-wall elasticity; unsupported, must stay zero.
    pub thin_c2: f64,
    /// Zeroth-order thin-wall viscosity.
    pub thin_d0: f64,
    /// Second-order thin-wall viscosity.
    pub thin_d1: f64,
    /// Fourth-order thin-wall viscosity; unsupported, must stay zero.
    pub thin_d2: f64,
    /// Thick-wall Lame constant lambda.
    pub lambda: f64,
    /// Thick-wall Lame constant mu.
    pub mu_s: f64,
    /// Thick-wall density.
    pub rho_s2: f64,
}

impl Default for FormWeights {
    fn default() -> Self {
        FormWeights {
            rho_f: 1.0,
            mu: 1.0,
            rho_s1_h: 1.0,
            c2: 1.0,
            thin_c0: 0.0,
            thin_c2: 0.0,
            thin_d0: 0.0,
            thin_d1: 0.0,
            thin_d2: 0.0,
            lambda: 1.0,
            mu_s: 1.0,
            rho_s2: 1.0,
        }
    }
}

impl FormWeights {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("physics.rho_f", self.rho_f),
            ("physics.mu", self.mu),
            ("physics.rho_s1_h", self.rho_s1_h),
            ("physics.rho_s2", self.rho_s2),
        ] {
            if !(v > 0.0) {
                errs.push(format!("{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("physics.c2", self.c2),
            ("physics.thin_c0", self.thin_c0),
            ("physics.thin_d0", self.thin_d0),
            ("physics.thin_d1", self.thin_d1),
            ("physics.lambda", self.lambda),
            ("physics.mu_s", self.mu_s),
        ] {
            if !(v >= 0.0) {
                errs.push(format!("{name} must be >= 0, got {v}"));
            }
        }
        if self.thin_c2 != 0.0 {
            errs.push(
                "physics.thin_c2: fourth-order membrane stiffness is unsupported \
                 (needs C1-continuous elements); it must be 0"
                    .to_string(),
            );
        }
        if self.thin_d2 != 0.0 {
            errs.push(
                "physics.thin_d2: fourth-order membrane viscosity is unsupported; it must be 0"
                    .to_string(),
            );
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Basis tables at the nine quadrature points, shared by every element of a
/// structured mesh. Gradients are already scaled to domain coordinates.
pub struct ElemBasis {
    pub q2_val: [[f64; 9]; 9],
    pub q2_grad: [[(f64, f64); 9]; 9],
    pub q1_val: [[f64; 4]; 9],
}

pub fn elem_basis(mesh: &FemMesh) -> ElemBasis {
    let quad = gauss_3x3();
    let mut q2_val = [[0.0; 9]; 9];
    let mut q2_gr = [[(0.0, 0.0); 9]; 9];
    let mut q1_val = [[0.0; 4]; 9];
    for (q, &(xi, mu, _)) in quad.iter().enumerate() {
        q2_val[q] = q2(xi, mu);
        let g = q2_grad(xi, mu);
        for i in 0..9 {
            q2_gr[q][i] = (g[i].0 * 2.0 / mesh.hz, g[i].1 * 2.0 / mesh.hr);
        }
        q1_val[q] = q1(xi, mu);
    }
    ElemBasis {
        q2_val,
        q2_grad: q2_gr,
        q1_val,
    }
}

/// All-ones quadrature weight field for `mesh`.
pub fn qp_ones(mesh: &FemMesh) -> Vec<f64> {
    vec![1.0; 9 * mesh.n_elems()]
}

/// ALE Jacobian sampled as a weight field.
pub fn qp_jacobian(ale: &AleOperators) -> Vec<f64> {
    ale.points.iter().map(|p| p.jac).collect()
}

/// Interface velocity over reference radius, `v(z)/R`, as a weight field.
pub fn qp_v_over_r(ale: &AleOperators) -> Vec<f64> {
    ale.points.iter().map(|p| p.v_over_r).collect()
}

/// Scalar mass matrix `M[i][j] = int w phi_i phi_j` on the biquadratic grid,
/// with `w` sampled at the assembly quadrature points.
pub fn assemble_weighted_mass(mesh: &FemMesh, weight: &[f64]) -> CsrMatrix {
    assert_eq!(weight.len(), 9 * mesh.n_elems(), "weight field mismatch");
    let basis = elem_basis(mesh);
    let quad = gauss_3x3();
    let area = 0.25 * mesh.hz * mesh.hr;
    let n = mesh.n_q2_nodes();
    let mut coo = Coo::new(n, n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        let mut local = [[0.0; 9]; 9];
        for (q, &(_, _, wq)) in quad.iter().enumerate() {
            let w = wq * area * weight[9 * e + q];
            let phi = &basis.q2_val[q];
            for i in 0..9 {
                for j in 0..9 {
                    local[i][j] += w * phi[i] * phi[j];
                }
            }
        }
        for i in 0..9 {
            for j in 0..9 {
                coo.push(conn[i], conn[j], local[i][j]);
            }
        }
    }
    coo.into_csr()
}

/// Vector (componentwise block-diagonal) variant of
/// [`assemble_weighted_mass`], over the `2 * n_q2` velocity dofs.
pub fn assemble_weighted_mass_vector(mesh: &FemMesh, weight: &[f64]) -> CsrMatrix {
    let scalar = assemble_weighted_mass(mesh, weight);
    let n = mesh.n_q2_nodes();
    let mut coo = Coo::new(2 * n, 2 * n);
    for (i, j, v) in scalar.entries() {
        coo.push(2 * i, 2 * j, v);
        coo.push(2 * i + 1, 2 * j + 1, v);
    }
    coo.into_csr()
}

/// Viscous stiffness `2 mu int (1+eta/R) D(u) : D(q)` with gradients
/// transformed by the ALE operators. Symmetric positive semidefinite.
pub fn assemble_transformed_stiffness(mesh: &FemMesh, ale: &AleOperators, mu: f64) -> CsrMatrix {
    let basis = elem_basis(mesh);
    let n = mesh.n_q2_nodes();
    let mut coo = Coo::new(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        let pts = ale.elem_points(e);
        let mut local = [[0.0; 18]; 18];
        for (q, p) in pts.iter().enumerate() {
            let w = 2.0 * mu * p.weight * p.jac;
            let mut g = [(0.0, 0.0); 9];
            for i in 0..9 {
                let (dz, dr) = basis.q2_grad[q][i];
                g[i] = p.transform_grad(dz, dr);
            }
            for i in 0..9 {
                let gi = [g[i].0, g[i].1];
                for j in 0..9 {
                    let gj = [g[j].0, g[j].1];
                    let dot = gi[0] * gj[0] + gi[1] * gj[1];
                    for a in 0..2 {
                        for b in 0..2 {
                            let dab = if a == b { dot } else { 0.0 };
                            local[2 * i + a][2 * j + b] += w * 0.5 * (dab + gi[b] * gj[a]);
                        }
                    }
                }
            }
        }
        scatter_vector_local(&mut coo, conn, &local);
    }
    coo.into_csr()
}

/// Skew-symmetrized transport and the kinetic-weight-transfer reaction term.
///
/// `skew` realizes
/// `1/2 int (1+eta/R) [(a . grad_eta) u . q - (a . grad_eta) q . u]`
/// with `a = transport - w`, `w` the domain velocity baked into `ale`;
/// it is exactly antisymmetric by construction.
/// `reaction` is the plain-weight mass `int (v/R) u . q` (no Jacobian).
pub struct AdvectionMatrices {
    pub skew: CsrMatrix,
    pub reaction: CsrMatrix,
}

impl AdvectionMatrices {
    /// The operator the fluid step consumes: `skew + 0.5 * reaction`.
    pub fn fused(&self) -> CsrMatrix {
        self.skew.add_scaled(&self.reaction, 0.5)
    }
}

/// Assembles the advection operators for a transport velocity field
/// (`2 * n_q2` dofs, the previous-step fluid velocity). The interface
/// velocity used both in the domain velocity and in the reaction term rides
/// in on `ale`.
pub fn assemble_advection(
    mesh: &FemMesh,
    ale: &AleOperators,
    transport: &[f64],
) -> AdvectionMatrices {
    let n = mesh.n_q2_nodes();
    assert_eq!(transport.len(), 2 * n, "transport field dof mismatch");
    let basis = elem_basis(mesh);
    let mut coo_skew = Coo::new(2 * n, 2 * n);
    let mut coo_reac = Coo::new(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        let pts = ale.elem_points(e);
        let mut skew = [[0.0; 9]; 9];
        let mut reac = [[0.0; 9]; 9];
        for (q, p) in pts.iter().enumerate() {
            let phi = &basis.q2_val[q];
            // transport velocity minus domain velocity at this point
            let mut az = 0.0;
            let mut ar = -p.w_r;
            for i in 0..9 {
                az += phi[i] * transport[2 * conn[i]];
                ar += phi[i] * transport[2 * conn[i] + 1];
            }
            let wj = p.weight * p.jac;
            let wr = p.weight * p.v_over_r;
            let mut conv = [0.0; 9];
            for i in 0..9 {
                let (dz, dr) = basis.q2_grad[q][i];
                let g = p.transform_grad(dz, dr);
                conv[i] = az * g.0 + ar * g.1;
            }
            for i in 0..9 {
                for j in 0..9 {
                    skew[i][j] += 0.5 * wj * (phi[i] * conv[j] - conv[i] * phi[j]);
                    reac[i][j] += wr * phi[i] * phi[j];
                }
            }
        }
        for i in 0..9 {
            for j in 0..9 {
                for c in 0..2 {
                    coo_skew.push(2 * conn[i] + c, 2 * conn[j] + c, skew[i][j]);
                    coo_reac.push(2 * conn[i] + c, 2 * conn[j] + c, reac[i][j]);
                }
            }
        }
    }
    AdvectionMatrices {
        skew: coo_skew.into_csr(),
        reaction: coo_reac.into_csr(),
    }
}

/// Weighted divergence constraint: `(B u)_k = int (1+eta/R) chi_k (div_eta u)`
/// over bilinear pressure test functions. Rectangular `n_q1 x 2 n_q2`.
pub fn assemble_transformed_divergence(mesh: &FemMesh, ale: &AleOperators) -> CsrMatrix {
    let basis = elem_basis(mesh);
    let mut coo = Coo::new(mesh.n_q1_nodes(), 2 * mesh.n_q2_nodes());
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        let pconn = &mesh.q1_elems[e];
        let pts = ale.elem_points(e);
        let mut local = [[0.0; 18]; 4];
        for (q, p) in pts.iter().enumerate() {
            let w = p.weight * p.jac;
            let chi = &basis.q1_val[q];
            for j in 0..9 {
                let (dz, dr) = basis.q2_grad[q][j];
                let g = p.transform_grad(dz, dr);
                for k in 0..4 {
                    local[k][2 * j] += w * chi[k] * g.0;
                    local[k][2 * j + 1] += w * chi[k] * g.1;
                }
            }
        }
        for k in 0..4 {
            for j in 0..9 {
                coo.push(pconn[k], 2 * conn[j], local[k][2 * j]);
                coo.push(pconn[k], 2 * conn[j] + 1, local[k][2 * j + 1]);
            }
        }
    }
    coo.into_csr()
}

/// Thick-wall elastic form `int 2 mu_s D(d) : D(psi) + lambda (div d)(div psi)`
/// over the solid displacement dofs. Symmetric positive semidefinite.
pub fn assemble_thick_elasticity(mesh: &FemMesh, weights: &FormWeights) -> CsrMatrix {
    let basis = elem_basis(mesh);
    let quad = gauss_3x3();
    let area = 0.25 * mesh.hz * mesh.hr;
    let n = mesh.n_q2_nodes();
    let (two_mu, lambda) = (2.0 * weights.mu_s, weights.lambda);
    let mut coo = Coo::new(2 * n, 2 * n);
    for conn in mesh.q2_elems.iter() {
        let mut local = [[0.0; 18]; 18];
        for (q, &(_, _, wq)) in quad.iter().enumerate() {
            let w = wq * area;
            let g = &basis.q2_grad[q];
            for i in 0..9 {
                let gi = [g[i].0, g[i].1];
                for j in 0..9 {
                    let gj = [g[j].0, g[j].1];
                    let dot = gi[0] * gj[0] + gi[1] * gj[1];
                    for a in 0..2 {
                        for b in 0..2 {
                            let dab = if a == b { dot } else { 0.0 };
                            local[2 * i + a][2 * j + b] += w
                                * (two_mu * 0.5 * (dab + gi[b] * gj[a])
                                    + lambda * gi[a] * gj[b]);
                        }
                    }
                }
            }
        }
        scatter_vector_local(&mut coo, conn, &local);
    }
    coo.into_csr()
}

/// Thin-wall matrices on the quadratic interface grid (full grid, clamped
/// end dofs included; callers restrict to interior dofs as needed).
pub struct ThinWallMatrices {
    /// Areal-mass-weighted mass, `rho_s1_h * int eta psi`.
    pub mass: CsrMatrix,
    /// Unweighted mass, for plain L2 norms of interface fields.
    pub mass_unit: CsrMatrix,
    /// Elastic stiffness `c2 * int eta' psi' + c0 * int eta psi`.
    pub stiffness: CsrMatrix,
    /// Viscosity `d0 * int v psi + d1 * int v' psi'`; zero by default.
    pub damping: CsrMatrix,
}

/// Assembles the 1D membrane matrices over `nz` quadratic elements of
/// length `hz`. Fourth-order coefficients are rejected.
pub fn assemble_thin_wall(nz: usize, hz: f64, weights: &FormWeights) -> Result<ThinWallMatrices> {
    if weights.thin_c2 != 0.0 || weights.thin_d2 != 0.0 {
        weights.validate()?;
    }
    let n = 2 * nz + 1;
    let mut coo_m = Coo::new(n, n);
    let mut coo_k = Coo::new(n, n);
    let mut coo_d = Coo::new(n, n);
    for e in 0..nz {
        let mut m = [[0.0; 3]; 3];
        let mut k = [[0.0; 3]; 3];
        for &(xi, wq) in GAUSS_3.iter() {
            let w = wq * 0.5 * hz;
            let phi = quad1d(xi);
            let dphi = quad1d_deriv(xi).map(|d| d * 2.0 / hz);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * phi[i] * phi[j];
                    k[i][j] += w * dphi[i] * dphi[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let (gi, gj) = (2 * e + i, 2 * e + j);
                coo_m.push(gi, gj, m[i][j]);
                coo_k.push(gi, gj, weights.c2 * k[i][j] + weights.thin_c0 * m[i][j]);
                let d = weights.thin_d0 * m[i][j] + weights.thin_d1 * k[i][j];
                if d != 0.0 {
                    coo_d.push(gi, gj, d);
                }
            }
        }
    }
    let mass_unit = coo_m.into_csr();
    Ok(ThinWallMatrices {
        mass: mass_unit.scaled(weights.rho_s1_h),
        mass_unit,
        stiffness: coo_k.into_csr(),
        damping: coo_d.into_csr(),
    })
}

/// Boundary load vector of the dynamic-pressure data: for every test
/// function, `P_in int q_z|_{z=0} - P_out int q_z|_{z=L}` integrated over the
/// inlet and outlet edges of the reference domain.
pub fn assemble_pressure_load(mesh: &FemMesh, p_in: f64, p_out: f64) -> Vec<f64> {
    let mut f = vec![0.0; 2 * mesh.n_q2_nodes()];
    let w2 = 2 * mesh.nz + 1;
    for (i_col, sign, p) in [(0usize, 1.0, p_in), (w2 - 1, -1.0, p_out)] {
        if p == 0.0 {
            continue;
        }
        for ej in 0..mesh.nr {
            for &(xi, wq) in GAUSS_3.iter() {
                let w = wq * 0.5 * mesh.hr * sign * p;
                let phi = quad1d(xi);
                for b in 0..3 {
                    let node = mesh.q2_index(i_col, 2 * ej + b);
                    f[2 * node] += w * phi[b];
                }
            }
        }
    }
    f
}

fn scatter_vector_local(coo: &mut Coo, conn: &[usize; 9], local: &[[f64; 18]; 18]) {
    for i in 0..9 {
        for a in 0..2 {
            let gi = 2 * conn[i] + a;
            for j in 0..9 {
                for b in 0..2 {
                    coo.push(gi, 2 * conn[j] + b, local[2 * i + a][2 * j + b]);
                }
            }
        }
    }
}
