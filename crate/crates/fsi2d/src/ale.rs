//! Kinematics of the moving fluid domain.
//!
//! The deforming channel `(0,L) x (0, R+eta(t,z))` is pulled back to the
//! fixed rectangle `(0,L) x (0,R)` by the radial stretch
//! `(z, r) -> (z, (1 + eta(z)/R) r)`. Everything the transformed operators
//! need at a quadrature point is captured here: the Jacobian `1 + eta/R`,
//! the two coefficients of the transformed gradient, and the radial domain
//! velocity `v(z) r / R`.
//!
//! The displacement is interpolated elementwise with its own quadratic basis
//! before any of these quantities are formed; gradients are never averaged
//! across nodes.

use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_3x3;
use crate::fem::shape::{quad1d, quad1d_deriv};
use crate::mesh::FemMesh;

/// Transformed-operator samples at one quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct AlePoint {
    /// Quadrature weight including the element area factor (not the ALE
    /// Jacobian; forms multiply that in explicitly where it appears).
    pub weight: f64,
    /// ALE Jacobian `1 + eta(z)/R`.
    pub jac: f64,
    /// Coefficient of `d/dr` inside the transformed z-derivative:
    /// `-r * (eta'(z)/R) / (1 + eta(z)/R)`.
    pub dz_coeff: f64,
    /// Coefficient of `d/dr` in the transformed r-derivative:
    /// `1 / (1 + eta(z)/R)`.
    pub dr_coeff: f64,
    /// Radial component of the domain velocity, `v(z) * r / R`.
    pub w_r: f64,
    /// Sampled interface velocity `v(z) / R` (used by the kinetic-energy
    /// weight transfer term, which carries no Jacobian).
    pub v_over_r: f64,
    /// Reference coordinates of the point.
    pub z: f64,
    pub r: f64,
}

impl AlePoint {
    /// Applies the transformed gradient to a reference-domain gradient pair.
    #[inline]
    pub fn transform_grad(&self, dz: f64, dr: f64) -> (f64, f64) {
        (dz + self.dz_coeff * dr, self.dr_coeff * dr)
    }
}

/// Per-quadrature-point transformed operators over a whole fluid mesh,
/// frozen at one interface configuration. Immutable once built.
#[derive(Debug, Clone)]
pub struct AleOperators {
    /// 9 points per element, element-major.
    pub points: Vec<AlePoint>,
    pub n_elems: usize,
}

impl AleOperators {
    #[inline]
    pub fn elem_points(&self, e: usize) -> &[AlePoint] {
        &self.points[9 * e..9 * (e + 1)]
    }
}

/// Samples the ALE operators for displacement `eta` and interface velocity
/// `v_for_w` (both on the quadratic interface grid) at every quadrature point
/// of `mesh`. `radius` is the reference radius R; `time` is only used to
/// label a degeneracy error.
pub fn evaluate_ale(
    eta: &[f64],
    v_for_w: &[f64],
    mesh: &FemMesh,
    radius: f64,
    time: f64,
) -> Result<AleOperators> {
    let n_iface = 2 * mesh.nz + 1;
    assert_eq!(eta.len(), n_iface, "eta dof count mismatch");
    assert_eq!(v_for_w.len(), n_iface, "v dof count mismatch");
    // nodal scan first: quadrature points never sit on the nodes
    for (k, &e) in eta.iter().enumerate() {
        let jac = 1.0 + e / radius;
        if jac <= 0.0 {
            return Err(Error::Degeneracy {
                time,
                z: mesh.origin.0 + 0.5 * mesh.hz * k as f64,
                radius: jac * radius,
                guard: 0.0,
            });
        }
    }
    let quad = gauss_3x3();
    let area = 0.25 * mesh.hz * mesh.hr;
    let mut points = Vec::with_capacity(9 * mesh.n_elems());
    for ej in 0..mesh.nr {
        for ei in 0..mesh.nz {
            for &(xi, mu, w) in quad.iter() {
                // interface data interpolated on the matching 1D element
                let phi = quad1d(xi);
                let dphi = quad1d_deriv(xi);
                let mut eta_q = 0.0;
                let mut deta_q = 0.0;
                let mut v_q = 0.0;
                for a in 0..3 {
                    let k = 2 * ei + a;
                    eta_q += phi[a] * eta[k];
                    deta_q += dphi[a] * eta[k] * 2.0 / mesh.hz;
                    v_q += phi[a] * v_for_w[k];
                }
                let z = mesh.origin.0 + mesh.hz * (ei as f64 + 0.5 * (1.0 + xi));
                let r = mesh.origin.1 + mesh.hr * (ej as f64 + 0.5 * (1.0 + mu));
                let jac = 1.0 + eta_q / radius;
                if jac <= 0.0 {
                    return Err(Error::Degeneracy {
                        time,
                        z,
                        radius: jac * radius,
                        guard: 0.0,
                    });
                }
                points.push(AlePoint {
                    weight: w * area,
                    jac,
                    dz_coeff: -r * (deta_q / radius) / jac,
                    dr_coeff: 1.0 / jac,
                    w_r: v_q * r / radius,
                    v_over_r: v_q / radius,
                    z,
                    r,
                });
            }
        }
    }
    Ok(AleOperators {
        points,
        n_elems: mesh.n_elems(),
    })
}

/// Runtime guards on the deformed radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityMonitor {
    /// Degeneracy threshold on the physical radius `R + eta`.
    pub r_min: f64,
    /// Reporting cap on the physical radius.
    pub r_max: f64,
}

impl ValidityMonitor {
    /// Default guards for reference radius R: `1e-3 R` and `10 R`.
    pub fn for_radius(radius: f64) -> Self {
        ValidityMonitor {
            r_min: 1e-3 * radius,
            r_max: 10.0 * radius,
        }
    }

    pub fn validate(&self, radius: f64) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < radius && radius < self.r_max) {
            return Err(Error::config(format!(
                "guards must satisfy 0 < r_min < R < r_max, got r_min = {}, R = {}, r_max = {}",
                self.r_min, radius, self.r_max
            )));
        }
        Ok(())
    }
}

/// Extreme physical radii over the interface nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRange {
    pub min: f64,
    pub max: f64,
    /// z location of the minimum.
    pub z_min: f64,
}

/// Extremes of `R + eta` over the interface nodes, with no guard applied.
pub fn radius_range(eta: &[f64], z: &[f64], radius: f64) -> RadiusRange {
    let mut range = RadiusRange {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        z_min: 0.0,
    };
    for (k, &e) in eta.iter().enumerate() {
        let r = radius + e;
        if r < range.min {
            range.min = r;
            range.z_min = z[k];
        }
        range.max = range.max.max(r);
    }
    range
}

/// Scans `R + eta` over the interface nodes. Returns a typed degeneracy
/// signal (not a panic) when the minimum falls to or below the guard; the
/// driver turns that into a halt with a reported touching time.
pub fn check_validity(
    eta: &[f64],
    z: &[f64],
    radius: f64,
    mon: &ValidityMonitor,
    time: f64,
) -> Result<RadiusRange> {
    let range = radius_range(eta, z, radius);
    if range.min <= mon.r_min {
        return Err(Error::Degeneracy {
            time,
            z: range.z_min,
            radius: range.min,
            guard: mon.r_min,
        });
    }
    Ok(range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_fluid_mesh, GeometryConfig};

    fn unit_mesh() -> FemMesh {
        build_fluid_mesh(&GeometryConfig {
            nz: 2,
            nr_fluid: 2,
            ..GeometryConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_displacement_gives_identity_transform() {
        let mesh = unit_mesh();
        let n = 2 * mesh.nz + 1;
        let ale = evaluate_ale(&vec![0.0; n], &vec![0.0; n], &mesh, 1.0, 0.0).unwrap();
        for p in &ale.points {
            assert!((p.jac - 1.0).abs() < 1e-15);
            assert!(p.dz_coeff.abs() < 1e-15);
            assert!((p.dr_coeff - 1.0).abs() < 1e-15);
            assert!(p.w_r.abs() < 1e-15);
        }
    }

    #[test]
    fn constant_half_displacement() {
        // endpoint clamping deliberately relaxed: constant eta = 0.5
        let mesh = unit_mesh();
        let n = 2 * mesh.nz + 1;
        let ale = evaluate_ale(&vec![0.5; n], &vec![0.0; n], &mesh, 1.0, 0.0).unwrap();
        for p in &ale.points {
            assert!((p.jac - 1.5).abs() < 1e-14);
            assert!(p.dz_coeff.abs() < 1e-13, "constant eta has no z slope");
            assert!((p.dr_coeff - 1.0 / 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn collapsed_node_is_a_degeneracy_error() {
        let mesh = unit_mesh();
        let n = 2 * mesh.nz + 1;
        let mut eta = vec![0.0; n];
        eta[2] = -1.0;
        let err = evaluate_ale(&eta, &vec![0.0; n], &mesh, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Degeneracy { .. }));
    }

    #[test]
    fn validity_scan_reports_extremes_and_degeneracy() {
        let mon = ValidityMonitor::for_radius(1.0);
        let z = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let ok = check_validity(&[0.0, -0.1, 0.2, 0.0, 0.0], &z, 1.0, &mon, 0.0).unwrap();
        assert!((ok.min - 0.9).abs() < 1e-15 && (ok.max - 1.2).abs() < 1e-15);

        let zero = check_validity(&[0.0; 5], &z, 1.0, &mon, 0.0).unwrap();
        assert_eq!((zero.min, zero.max), (1.0, 1.0));

        let err = check_validity(&[0.0, -0.9995, 0.0, 0.0, 0.0], &z, 1.0, &mon, 0.3).unwrap_err();
        match err {
            Error::Degeneracy { time, radius, .. } => {
                assert_eq!(time, 0.3);
                assert!((radius - 5e-4).abs() < 1e-12);
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }
}
