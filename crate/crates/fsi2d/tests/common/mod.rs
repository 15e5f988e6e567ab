//! Shared test support: a dense straight-loop quadrature oracle and
//! deterministic random-state generators.
//!
//! The oracle shares only the shape-function definitions with the library;
//! quadrature constants, interpolation, boundary handling and the assembly
//! loops are all written here from the mathematical definitions, and its
//! solves go through dense nalgebra factorizations.

#![allow(dead_code)]

use fsi2d::fem::shape::{q1, q2, q2_grad, quad1d, quad1d_deriv};
use fsi2d::fem::FormWeights;
use fsi2d::mesh::{FemMesh, InterfaceMaps, Tags};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Own copy of the 3-point Gauss rule (value of sqrt(3/5) written out).
const GAUSS: [(f64, f64); 3] = [
    (-0.774596669241483377035853079956, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774596669241483377035853079956, 5.0 / 9.0),
];

pub struct QuadPoint {
    pub z: f64,
    pub r: f64,
    pub xi: f64,
    pub mu: f64,
    pub weight: f64,
}

/// All quadrature points of one element, straight tensor loop.
pub fn elem_quad_points(mesh: &FemMesh, e: usize) -> Vec<QuadPoint> {
    let (ei, ej) = (e % mesh.nz, e / mesh.nz);
    let mut pts = Vec::with_capacity(9);
    for &(mu, wm) in GAUSS.iter() {
        for &(xi, wx) in GAUSS.iter() {
            pts.push(QuadPoint {
                z: mesh.origin.0 + mesh.hz * (ei as f64 + 0.5 * (1.0 + xi)),
                r: mesh.origin.1 + mesh.hr * (ej as f64 + 0.5 * (1.0 + mu)),
                xi,
                mu,
                weight: wx * wm * 0.25 * mesh.hz * mesh.hr,
            });
        }
    }
    pts
}

/// Interface field value and z-derivative at an in-element coordinate.
pub fn iface_interp(mesh: &FemMesh, vals: &[f64], e_z: usize, xi: f64) -> (f64, f64) {
    let phi = quad1d(xi);
    let dphi = quad1d_deriv(xi);
    let mut v = 0.0;
    let mut dv = 0.0;
    for a in 0..3 {
        v += phi[a] * vals[2 * e_z + a];
        dv += dphi[a] * vals[2 * e_z + a] * 2.0 / mesh.hz;
    }
    (v, dv)
}

/// The transformed gradient of one scalar basis function at a point, from
/// the mathematical definition.
fn transformed_grad(
    mesh: &FemMesh,
    radius: f64,
    eta: f64,
    deta: f64,
    r: f64,
    grad_ref: (f64, f64),
) -> (f64, f64) {
    let jac = 1.0 + eta / radius;
    let dz = grad_ref.0 * 2.0 / mesh.hz;
    let dr = grad_ref.1 * 2.0 / mesh.hr;
    (dz - r * (deta / radius) / jac * dr, dr / jac)
}

/// Dense scalar mass with weight `1 + eta/R` (pass `eta = 0` for plain L2).
pub fn dense_weighted_mass_scalar(mesh: &FemMesh, eta: &[f64], radius: f64) -> DMatrix<f64> {
    let n = mesh.n_q2_nodes();
    let mut m = DMatrix::zeros(n, n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        for p in elem_quad_points(mesh, e) {
            let (ev, _) = iface_interp(mesh, eta, e % mesh.nz, p.xi);
            let w = p.weight * (1.0 + ev / radius);
            let phi = q2(p.xi, p.mu);
            for i in 0..9 {
                for j in 0..9 {
                    m[(conn[i], conn[j])] += w * phi[i] * phi[j];
                }
            }
        }
    }
    m
}

/// Dense vector mass with an arbitrary interface-borne weight `w(z)`:
/// `kind = Jacobian` gives `1 + eta/R`, `kind = VOverR` gives `v/R`.
pub enum MassWeight {
    Jacobian,
    VOverR,
}

pub fn dense_weighted_mass_vector(
    mesh: &FemMesh,
    field: &[f64],
    radius: f64,
    kind: MassWeight,
) -> DMatrix<f64> {
    let n = mesh.n_q2_nodes();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        for p in elem_quad_points(mesh, e) {
            let (fv, _) = iface_interp(mesh, field, e % mesh.nz, p.xi);
            let w = p.weight
                * match kind {
                    MassWeight::Jacobian => 1.0 + fv / radius,
                    MassWeight::VOverR => fv / radius,
                };
            let phi = q2(p.xi, p.mu);
            for i in 0..9 {
                for j in 0..9 {
                    for c in 0..2 {
                        m[(2 * conn[i] + c, 2 * conn[j] + c)] += w * phi[i] * phi[j];
                    }
                }
            }
        }
    }
    m
}

/// Dense viscous stiffness `2 mu int (1+eta/R) D_eta(u) : D_eta(q)`.
pub fn dense_transformed_stiffness(
    mesh: &FemMesh,
    eta: &[f64],
    radius: f64,
    mu: f64,
) -> DMatrix<f64> {
    let n = mesh.n_q2_nodes();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        for p in elem_quad_points(mesh, e) {
            let (ev, dev) = iface_interp(mesh, eta, e % mesh.nz, p.xi);
            let jac = 1.0 + ev / radius;
            let w = 2.0 * mu * p.weight * jac;
            let gref = q2_grad(p.xi, p.mu);
            let g: Vec<(f64, f64)> = (0..9)
                .map(|i| transformed_grad(mesh, radius, ev, dev, p.r, gref[i]))
                .collect();
            for i in 0..9 {
                for a in 0..2 {
                    // D(phi_i e_a) as a symmetric 2x2 matrix
                    let di = sym_grad([g[i].0, g[i].1], a);
                    for j in 0..9 {
                        for b in 0..2 {
                            let dj = sym_grad([g[j].0, g[j].1], b);
                            let contract = di[0] * dj[0] + di[2] * dj[2] + 2.0 * di[1] * dj[1];
                            m[(2 * conn[i] + a, 2 * conn[j] + b)] += w * contract;
                        }
                    }
                }
            }
        }
    }
    m
}

/// `[D11, D12, D22]` of the symmetrized gradient of `phi e_c`.
fn sym_grad(g: [f64; 2], c: usize) -> [f64; 3] {
    match c {
        0 => [g[0], 0.5 * g[1], 0.0],
        _ => [0.0, 0.5 * g[0], g[1]],
    }
}

/// Dense skew advection and plain reaction, integrating both terms of the
/// symmetrized form separately.
pub fn dense_advection(
    mesh: &FemMesh,
    eta: &[f64],
    v_half: &[f64],
    transport: &[f64],
    radius: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.n_q2_nodes();
    let mut skew = DMatrix::zeros(2 * n, 2 * n);
    let mut reac = DMatrix::zeros(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        for p in elem_quad_points(mesh, e) {
            let (ev, dev) = iface_interp(mesh, eta, e % mesh.nz, p.xi);
            let (vv, _) = iface_interp(mesh, v_half, e % mesh.nz, p.xi);
            let jac = 1.0 + ev / radius;
            let phi = q2(p.xi, p.mu);
            let gref = q2_grad(p.xi, p.mu);
            let g: Vec<(f64, f64)> = (0..9)
                .map(|i| transformed_grad(mesh, radius, ev, dev, p.r, gref[i]))
                .collect();
            // transport minus domain velocity
            let mut az = 0.0;
            let mut ar = -vv * p.r / radius;
            for i in 0..9 {
                az += phi[i] * transport[2 * conn[i]];
                ar += phi[i] * transport[2 * conn[i] + 1];
            }
            for i in 0..9 {
                for j in 0..9 {
                    let conv_j = az * g[j].0 + ar * g[j].1;
                    let conv_i = az * g[i].0 + ar * g[i].1;
                    let s = 0.5 * p.weight * jac * (phi[i] * conv_j - conv_i * phi[j]);
                    let rterm = p.weight * (vv / radius) * phi[i] * phi[j];
                    for c in 0..2 {
                        skew[(2 * conn[i] + c, 2 * conn[j] + c)] += s;
                        reac[(2 * conn[i] + c, 2 * conn[j] + c)] += rterm;
                    }
                }
            }
        }
    }
    (skew, reac)
}

/// Dense weighted divergence, pressure tests by velocity dofs.
pub fn dense_transformed_divergence(mesh: &FemMesh, eta: &[f64], radius: f64) -> DMatrix<f64> {
    let np = mesh.n_q1_nodes();
    let n = mesh.n_q2_nodes();
    let mut b = DMatrix::zeros(np, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        let pconn = &mesh.q1_elems[e];
        for p in elem_quad_points(mesh, e) {
            let (ev, dev) = iface_interp(mesh, eta, e % mesh.nz, p.xi);
            let jac = 1.0 + ev / radius;
            let chi = q1(p.xi, p.mu);
            let gref = q2_grad(p.xi, p.mu);
            for j in 0..9 {
                let g = transformed_grad(mesh, radius, ev, dev, p.r, gref[j]);
                for k in 0..4 {
                    b[(pconn[k], 2 * conn[j])] += p.weight * jac * chi[k] * g.0;
                    b[(pconn[k], 2 * conn[j] + 1)] += p.weight * jac * chi[k] * g.1;
                }
            }
        }
    }
    b
}

/// Dense thick-wall elastic form.
pub fn dense_thick_elasticity(mesh: &FemMesh, w: &FormWeights) -> DMatrix<f64> {
    let n = mesh.n_q2_nodes();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (e, conn) in mesh.q2_elems.iter().enumerate() {
        for p in elem_quad_points(mesh, e) {
            let gref = q2_grad(p.xi, p.mu);
            let g: Vec<(f64, f64)> = (0..9)
                .map(|i| (gref[i].0 * 2.0 / mesh.hz, gref[i].1 * 2.0 / mesh.hr))
                .collect();
            for i in 0..9 {
                for a in 0..2 {
                    let di = sym_grad([g[i].0, g[i].1], a);
                    let divi = [g[i].0, g[i].1][a];
                    for j in 0..9 {
                        for b in 0..2 {
                            let dj = sym_grad([g[j].0, g[j].1], b);
                            let divj = [g[j].0, g[j].1][b];
                            let contract = di[0] * dj[0] + di[2] * dj[2] + 2.0 * di[1] * dj[1];
                            m[(2 * conn[i] + a, 2 * conn[j] + b)] += p.weight
                                * (2.0 * w.mu_s * contract + w.lambda * divi * divj);
                        }
                    }
                }
            }
        }
    }
    m
}

/// Dense thin-wall mass/stiffness/damping over the full interface grid.
pub fn dense_thin_wall(nz: usize, hz: f64, w: &FormWeights) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = 2 * nz + 1;
    let mut mass = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    let mut damp = DMatrix::zeros(n, n);
    for e in 0..nz {
        for &(xi, wq) in GAUSS.iter() {
            let wt = wq * 0.5 * hz;
            let phi = quad1d(xi);
            let dphi = quad1d_deriv(xi).map(|d| d * 2.0 / hz);
            for i in 0..3 {
                for j in 0..3 {
                    let (gi, gj) = (2 * e + i, 2 * e + j);
                    mass[(gi, gj)] += w.rho_s1_h * wt * phi[i] * phi[j];
                    stiff[(gi, gj)] += wt * (w.c2 * dphi[i] * dphi[j] + w.thin_c0 * phi[i] * phi[j]);
                    damp[(gi, gj)] += wt * (w.thin_d0 * phi[i] * phi[j] + w.thin_d1 * dphi[i] * dphi[j]);
                }
            }
        }
    }
    (mass, stiff, damp)
}

/// Entrywise comparison of a sparse matrix against its dense oracle.
pub fn assert_matches_dense(sparse: &fsi2d::fem::CsrMatrix, dense: &DMatrix<f64>, tol: f64, what: &str) {
    assert_eq!(sparse.nrows, dense.nrows(), "{what}: row count");
    assert_eq!(sparse.ncols, dense.ncols(), "{what}: col count");
    let mut worst = 0.0f64;
    for r in 0..dense.nrows() {
        for c in 0..dense.ncols() {
            worst = worst.max((sparse.get(r, c) - dense[(r, c)]).abs());
        }
    }
    assert!(worst <= tol, "{what}: worst entry mismatch {worst:.3e} > {tol:.1e}");
}

/// Deterministic RNG for test data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random admissible wall state (clamped ends, identified traces).
pub fn random_wall_state(
    solid: &FemMesh,
    maps: &InterfaceMaps,
    rng: &mut ChaCha8Rng,
    amp: f64,
) -> (fsi2d::state::InterfaceState, fsi2d::state::ThickState) {
    let n = maps.n_nodes();
    let mut eta = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in 0..n {
        if !maps.dirichlet[k] {
            eta[k] = amp * (rng.random::<f64>() - 0.5);
            v[k] = amp * (rng.random::<f64>() - 0.5);
        }
    }
    let nd = 2 * solid.n_q2_nodes();
    let mut d = vec![0.0; nd];
    let mut vel = vec![0.0; nd];
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
                d[dof] = amp * (rng.random::<f64>() - 0.5);
                vel[dof] = amp * (rng.random::<f64>() - 0.5);
            }
        }
    }
    (
        fsi2d::state::InterfaceState { eta, v },
        fsi2d::state::ThickState { d, vel },
    )
}

/// Random fluid velocity respecting the essential boundary conditions, with
/// the interface radial trace set to `v_trace`.
pub fn random_fluid_velocity(
    mesh: &FemMesh,
    v_trace: &[f64],
    rng: &mut ChaCha8Rng,
    amp: f64,
) -> Vec<f64> {
    let w2 = 2 * mesh.nz + 1;
    let mut u = vec![0.0; 2 * mesh.n_q2_nodes()];
    for (node, tag) in mesh.q2_tags.iter().enumerate() {
        let z_fixed = tag.contains(Tags::INTERFACE);
        let r_fixed =
            tag.contains(Tags::AXIS) || tag.contains(Tags::INLET) || tag.contains(Tags::OUTLET);
        if !z_fixed {
            u[2 * node] = amp * (rng.random::<f64>() - 0.5);
        }
        if !r_fixed {
            u[2 * node + 1] = amp * (rng.random::<f64>() - 0.5);
        }
        if tag.contains(Tags::INTERFACE) && !r_fixed {
            u[2 * node + 1] = v_trace[node % w2];
        }
    }
    u
}

/// Dense solve helper with a residual guard.
pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let lu = a.clone().full_piv_lu();
    let x = lu.solve(b).expect("dense oracle solve failed");
    let res = (a * &x - b).norm() / b.norm().max(1e-300);
    assert!(res < 1e-9, "dense oracle residual {res:.3e}");
    x
}

/// Independent dense solve of the wall step: rebuilds unknown numbering,
/// matrices and right-hand side from scratch and solves densely. Returns
/// the new displacement fields.
pub fn dense_structure_step(
    smesh: &FemMesh,
    maps: &InterfaceMaps,
    w: &FormWeights,
    iface: &fsi2d::state::InterfaceState,
    thick: &fsi2d::state::ThickState,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n_thin = maps.n_nodes();
    let w2 = 2 * smesh.nz + 1;
    let mut thin_u = vec![usize::MAX; n_thin];
    let mut next = 0;
    for k in 1..n_thin - 1 {
        thin_u[k] = next;
        next += 1;
    }
    let nd = 2 * smesh.n_q2_nodes();
    let mut solid_u = vec![usize::MAX; nd];
    for (node, tag) in smesh.q2_tags.iter().enumerate() {
        if tag.contains(Tags::SOLID_END_IN) || tag.contains(Tags::SOLID_END_OUT) {
            continue;
        }
        for c in 0..2 {
            if tag.contains(Tags::INTERFACE) {
                if c == 1 {
                    solid_u[2 * node + c] = thin_u[node % w2];
                }
            } else {
                solid_u[2 * node + c] = next;
                next += 1;
            }
        }
    }
    let (tm, tk, td) = dense_thin_wall(smesh.nz, smesh.hz, w);
    let sk = dense_thick_elasticity(smesh, w);
    let sm = dense_weighted_mass_vector(smesh, &vec![0.0; w2], 1.0, MassWeight::Jacobian);
    let mut sys = DMatrix::zeros(next, next);
    let mut rhs = DVector::zeros(next);
    for i in 0..n_thin {
        if thin_u[i] == usize::MAX {
            continue;
        }
        for j in 0..n_thin {
            if thin_u[j] != usize::MAX {
                sys[(thin_u[i], thin_u[j])] += tm[(i, j)] + dt * dt * tk[(i, j)] + dt * td[(i, j)];
            }
            rhs[thin_u[i]] +=
                tm[(i, j)] * (iface.eta[j] + dt * iface.v[j]) + dt * td[(i, j)] * iface.eta[j];
        }
    }
    for i in 0..nd {
        if solid_u[i] == usize::MAX {
            continue;
        }
        for j in 0..nd {
            if solid_u[j] != usize::MAX {
                sys[(solid_u[i], solid_u[j])] += w.rho_s2 * sm[(i, j)] + dt * dt * sk[(i, j)];
            }
            rhs[solid_u[i]] += w.rho_s2 * sm[(i, j)] * (thick.d[j] + dt * thick.vel[j]);
        }
    }
    let x = dense_solve(&sys, &rhs);
    let mut eta_new = vec![0.0; n_thin];
    for k in 0..n_thin {
        if thin_u[k] != usize::MAX {
            eta_new[k] = x[thin_u[k]];
        }
    }
    let mut d_new = vec![0.0; nd];
    for dof in 0..nd {
        if solid_u[dof] != usize::MAX {
            d_new[dof] = x[solid_u[dof]];
        }
    }
    (eta_new, d_new)
}

/// Independent dense solve of the fluid step. Returns velocity, pressure
/// and the interface trace.
pub fn dense_fluid_step(
    fmesh: &FemMesh,
    maps: &InterfaceMaps,
    w: &FormWeights,
    inp: &fsi2d::fluid::FluidInputs,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = fmesh.n_q2_nodes();
    let w2 = 2 * fmesh.nz + 1;
    let mut vel_u = vec![usize::MAX; 2 * n];
    let mut nv = 0;
    for (node, tag) in fmesh.q2_tags.iter().enumerate() {
        let z_fixed = tag.contains(Tags::INTERFACE);
        let r_fixed =
            tag.contains(Tags::AXIS) || tag.contains(Tags::INLET) || tag.contains(Tags::OUTLET);
        if !z_fixed {
            vel_u[2 * node] = nv;
            nv += 1;
        }
        if !r_fixed {
            vel_u[2 * node + 1] = nv;
            nv += 1;
        }
    }
    let np = fmesh.n_q1_nodes();
    let ntot = nv + np;
    let mass = dense_weighted_mass_vector(fmesh, inp.eta_n, 1.0, MassWeight::Jacobian);
    let (skew, reac) = dense_advection(fmesh, inp.eta_n, inp.v_half, inp.u_prev, 1.0);
    let visc = dense_transformed_stiffness(fmesh, inp.eta_n, 1.0, w.mu);
    let div = dense_transformed_divergence(fmesh, inp.eta_n, 1.0);
    let (tmass, _, _) = dense_thin_wall(fmesh.nz, fmesh.hz, &FormWeights::default());

    let mut sys = DMatrix::zeros(ntot, ntot);
    let mut rhs = DVector::zeros(ntot);
    for i in 0..2 * n {
        if vel_u[i] == usize::MAX {
            continue;
        }
        for j in 0..2 * n {
            if vel_u[j] == usize::MAX {
                continue;
            }
            sys[(vel_u[i], vel_u[j])] += w.rho_f / inp.dt * mass[(i, j)]
                + w.rho_f * skew[(i, j)]
                + 0.5 * w.rho_f * reac[(i, j)]
                + visc[(i, j)];
        }
        for j in 0..2 * n {
            rhs[vel_u[i]] += w.rho_f / inp.dt * mass[(i, j)] * inp.u_prev[j];
        }
        for k in 0..np {
            sys[(vel_u[i], nv + k)] = -div[(k, i)];
            sys[(nv + k, vel_u[i])] = -div[(k, i)];
        }
    }
    for a in 0..w2 {
        let da = maps.fluid_radial_dof[a];
        if vel_u[da] == usize::MAX {
            continue;
        }
        for b in 0..w2 {
            let db = maps.fluid_radial_dof[b];
            if vel_u[db] != usize::MAX {
                sys[(vel_u[da], vel_u[db])] += w.rho_s1_h / inp.dt * tmass[(a, b)];
            }
            rhs[vel_u[da]] += w.rho_s1_h / inp.dt * tmass[(a, b)] * inp.v_half[b];
        }
    }
    for (col, sign, p) in [(0usize, 1.0, inp.p_in), (w2 - 1, -1.0, inp.p_out)] {
        for ej in 0..fmesh.nr {
            for &(xi, wq) in GAUSS.iter() {
                let wt = wq * 0.5 * fmesh.hr * sign * p;
                let phi = quad1d(xi);
                for b in 0..3 {
                    let node = fmesh.q2_index(col, 2 * ej + b);
                    if vel_u[2 * node] != usize::MAX {
                        rhs[vel_u[2 * node]] += wt * phi[b];
                    }
                }
            }
        }
    }
    let x = dense_solve(&sys, &rhs);
    let mut u = vec![0.0; 2 * n];
    for dof in 0..2 * n {
        if vel_u[dof] != usize::MAX {
            u[dof] = x[vel_u[dof]];
        }
    }
    let p: Vec<f64> = (0..np).map(|k| x[nv + k]).collect();
    let v: Vec<f64> = maps.fluid_radial_dof.iter().map(|&d| u[d]).collect();
    (u, p, v)
}
