//! Equality of the transformed gradient and symmetrized-gradient energies.
//!
//! For divergence-free fields with no-slip tangential velocity at the
//! deforming wall and no normal flow through the remaining boundaries, the
//! gradient energy is exactly twice the symmetrized-gradient energy, with a
//! constant independent of the wall shape:
//!
//! `int (1+eta) |grad_eta u|^2  =  2 int (1+eta) |D_eta(u)|^2`
//!
//! The harness evaluates both sides by high-order quadrature on a fine
//! evaluation grid, fully independent of the finite-element assembly; only
//! the mathematical definitions are shared. Fields are manufactured from
//! stream functions on the deformed domain, so they are divergence-free by
//! construction, and their support is chosen so every boundary condition
//! holds identically.

use super::hyperdual::Dual2;
use crate::error::{Error, Result};

/// 8-point Gauss-Legendre rule on [-1, 1].
const GAUSS_8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.5255324099163290, 0.3137066458778873),
    (-0.1834346424956498, 0.3626837833783620),
    (0.1834346424956498, 0.3626837833783620),
    (0.5255324099163290, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

/// Analytic wall shapes with two derivatives, on the unit-length channel
/// with unit reference radius. All vanish at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallShape {
    Flat,
    /// `amp * z (1 - z)`
    Bump { amp: f64 },
    /// Smooth stand-in for a barely-H1 profile: a slowly decaying finite
    /// sine series `amp * sum_k sin(k pi z) / k^{3/2}`.
    RoughProxy { amp: f64, modes: u32 },
}

impl WallShape {
    /// `(eta, eta', eta'')` at `z`.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        match self {
            WallShape::Flat => (0.0, 0.0, 0.0),
            WallShape::Bump { amp } => (amp * z * (1.0 - z), amp * (1.0 - 2.0 * z), -2.0 * amp),
            WallShape::RoughProxy { amp, modes } => {
                let mut e = 0.0;
                let mut de = 0.0;
                let mut dde = 0.0;
                for k in 1..=*modes {
                    let kf = k as f64;
                    let om = kf * std::f64::consts::PI;
                    let w = amp / kf.powf(1.5);
                    e += w * (om * z).sin();
                    de += w * om * (om * z).cos();
                    dde -= w * om * om * (om * z).sin();
                }
                (e, de, dde)
            }
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "zero" | "flat" => Ok(WallShape::Flat),
            "bump" => Ok(WallShape::Bump { amp: 0.1 }),
            "rough" | "sawtooth" => Ok(WallShape::RoughProxy {
                amp: 0.12,
                modes: 6,
            }),
            other => Err(Error::config(format!(
                "unknown wall shape {other:?}; expected zero, bump or rough"
            ))),
        }
    }
}

/// Velocity field manufactured from a stream function on the deformed
/// domain: `u = (d phi/dr, -d phi/dz)`. The potential receives the local
/// wall position as a third ingredient so supports can follow the wall.
pub struct ManufacturedField {
    pub name: &'static str,
    /// `phi(z, r, rho)` with `rho = 1 + eta(z)` entering as a z-profile.
    potential: fn(Dual2, Dual2, Dual2) -> Dual2,
    /// Whether the field is claimed to satisfy the admissibility conditions
    /// (the negative control is not).
    pub admissible: bool,
}

/// Velocity and physical gradient at one point.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub u_z: f64,
    pub u_r: f64,
    /// Row-major physical gradient: `[du_z/dz, du_z/dr, du_r/dz, du_r/dr]`.
    pub grad: [f64; 4],
}

impl ManufacturedField {
    /// Compactly supported in every direction; the radial support follows
    /// the wall through the squared `(rho - r)` factor.
    pub fn library() -> Vec<ManufacturedField> {
        vec![
            ManufacturedField {
                name: "poly-squared",
                potential: |z, r, rho| {
                    let one = Dual2::constant(1.0);
                    z.powi(2) * (one - z).powi(2) * r.powi(2) * (rho - r).powi(2)
                },
                admissible: true,
            },
            ManufacturedField {
                name: "poly-cubic-radial",
                potential: |z, r, rho| {
                    let one = Dual2::constant(1.0);
                    z.powi(2) * (one - z).powi(2) * r.powi(3) * (rho - r).powi(2)
                },
                admissible: true,
            },
            ManufacturedField {
                name: "sine-axial",
                potential: |z, r, rho| {
                    let pi = std::f64::consts::PI;
                    z.scale(pi).sin().powi(2) * r.powi(2) * (rho - r).powi(3)
                },
                admissible: true,
            },
        ]
    }

    /// Negative control: tangential slip at the wall (`u_z != 0` there).
    pub fn slip_control() -> ManufacturedField {
        ManufacturedField {
            name: "slip-control",
            potential: |z, r, _rho| {
                let one = Dual2::constant(1.0);
                z.powi(2) * (one - z).powi(2) * r.powi(2)
            },
            admissible: false,
        }
    }

    /// Evaluates velocity and gradient at a physical point under `shape`.
    pub fn sample(&self, shape: &WallShape, z: f64, r: f64) -> FieldSample {
        let (eta, deta, ddeta) = shape.eval(z);
        let rho = Dual2::of_z_profile(1.0 + eta, deta, ddeta);
        let phi = (self.potential)(Dual2::var_z(z), Dual2::var_r(r), rho);
        FieldSample {
            u_z: phi.dr,
            u_r: -phi.dz,
            grad: [phi.dzr, phi.drr, -phi.dzz, -phi.dzr],
        }
    }

    /// Divergence at arbitrary sample points; identically zero for stream
    /// fields, asserted numerically as a guard on the derivative algebra.
    pub fn max_divergence(&self, shape: &WallShape, n_samples: usize) -> f64 {
        let mut state: u64 = 0x243f6a8885a308d3;
        let mut rand01 = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst: f64 = 0.0;
        for _ in 0..n_samples {
            let z = rand01();
            let (eta, _, _) = shape.eval(z);
            let r = rand01() * (1.0 + eta);
            let s = self.sample(shape, z, r);
            worst = worst.max((s.grad[0] + s.grad[3]).abs());
        }
        worst
    }

    /// Largest boundary-condition violation: tangential velocity at the
    /// wall, normal velocity on the axis and at both ends.
    pub fn max_boundary_violation(&self, shape: &WallShape, n_samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=n_samples {
            let t = i as f64 / n_samples as f64;
            let (eta, _, _) = shape.eval(t);
            let wall = self.sample(shape, t, 1.0 + eta);
            worst = worst.max(wall.u_z.abs());
            let axis = self.sample(shape, t, 0.0);
            worst = worst.max(axis.u_r.abs());
            let inlet = self.sample(shape, 0.0, t * (1.0 + shape.eval(0.0).0));
            worst = worst.max(inlet.u_r.abs());
            let outlet = self.sample(shape, 1.0, t * (1.0 + shape.eval(1.0).0));
            worst = worst.max(outlet.u_r.abs());
        }
        worst
    }
}

/// Both sides of the gradient-energy equality and their relative mismatch.
#[derive(Debug, Clone, Copy)]
pub struct KornReport {
    /// `2 int (1+eta) |D_eta u|^2`
    pub twice_sym: f64,
    /// `int (1+eta) |grad_eta u|^2`
    pub grad: f64,
    pub mismatch: f64,
}

/// Evaluates both energies on an `n_cells x n_cells` evaluation grid with
/// 8x8 Gauss points per cell. No admissibility checks; see [`korn_check`].
pub fn korn_mismatch(shape: &WallShape, field: &ManufacturedField, n_cells: usize) -> KornReport {
    let h = 1.0 / n_cells as f64;
    let mut twice_sym = 0.0;
    let mut grad_energy = 0.0;
    for cz in 0..n_cells {
        for cr in 0..n_cells {
            for &(xz, wz) in GAUSS_8.iter() {
                for &(xr, wr) in GAUSS_8.iter() {
                    // reference-domain point
                    let zt = h * (cz as f64 + 0.5 * (1.0 + xz));
                    let rt = h * (cr as f64 + 0.5 * (1.0 + xr));
                    let w = wz * wr * 0.25 * h * h;
                    let (eta, deta, _) = shape.eval(zt);
                    let jac = 1.0 + eta;
                    // pull the physical field back and form the transformed
                    // gradient through its rational coefficients
                    let s = field.sample(shape, zt, jac * rt);
                    let pull = |gz_phys: f64, gr_phys: f64| {
                        // reference-coordinate gradient of the composition
                        let dzt = gz_phys + gr_phys * deta * rt;
                        let drt = gr_phys * jac;
                        // transformed gradient
                        (dzt - rt * deta / jac * drt, drt / jac)
                    };
                    let guz = pull(s.grad[0], s.grad[1]);
                    let gur = pull(s.grad[2], s.grad[3]);
                    let sym_off = 0.5 * (guz.1 + gur.0);
                    let sym_sq =
                        guz.0 * guz.0 + gur.1 * gur.1 + 2.0 * sym_off * sym_off;
                    let grad_sq =
                        guz.0 * guz.0 + guz.1 * guz.1 + gur.0 * gur.0 + gur.1 * gur.1;
                    twice_sym += w * jac * 2.0 * sym_sq;
                    grad_energy += w * jac * grad_sq;
                }
            }
        }
    }
    KornReport {
        twice_sym,
        grad: grad_energy,
        mismatch: (twice_sym - grad_energy).abs() / grad_energy.max(f64::MIN_POSITIVE),
    }
}

/// Validates the field's admissibility (divergence and boundary conditions),
/// then evaluates the gradient-energy equality.
pub fn korn_check(shape: &WallShape, field: &ManufacturedField, n_cells: usize) -> Result<KornReport> {
    let div = field.max_divergence(shape, 10_000);
    if div > 1e-12 {
        return Err(Error::config(format!(
            "field {} is not divergence-free (max residual {div:.3e})",
            field.name
        )));
    }
    let bc = field.max_boundary_violation(shape, 400);
    if bc > 1e-10 {
        return Err(Error::config(format!(
            "field {} violates the boundary conditions (max violation {bc:.3e})",
            field.name
        )));
    }
    Ok(korn_mismatch(shape, field, n_cells))
}
