//! Lagrange shape functions on the reference interval and square.
//!
//! Three families are used throughout:
//! - `q2`: 9-node biquadratic quadrilaterals (velocity, thick displacement),
//! - `q1`: 4-node bilinear quadrilaterals (pressure),
//! - `line3`: 3-node quadratic segments (thin wall, traces).
//!
//! Local node ordering is tensor-product with the first coordinate fastest:
//! q2 local node `3*b + a` sits at `(xi_a, eta_b)`, `xi_0 = -1, xi_1 = 0,
//! xi_2 = 1` (and similarly for q1 with `2*b + a`).

/// 1D quadratic Lagrange basis at `xi` in [-1, 1]: values at nodes -1, 0, 1.
#[inline]
pub fn quad1d(xi: f64) -> [f64; 3] {
    [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)]
}

/// Derivatives of [`quad1d`] with respect to `xi`.
#[inline]
pub fn quad1d_deriv(xi: f64) -> [f64; 3] {
    [xi - 0.5, -2.0 * xi, xi + 0.5]
}

/// 1D linear Lagrange basis at `xi`: values at nodes -1, 1.
#[inline]
pub fn lin1d(xi: f64) -> [f64; 2] {
    [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)]
}

#[inline]
pub fn lin1d_deriv() -> [f64; 2] {
    [-0.5, 0.5]
}

/// Biquadratic basis values at `(xi, eta)`, tensor-product ordering.
pub fn q2(xi: f64, eta: f64) -> [f64; 9] {
    let fx = quad1d(xi);
    let fe = quad1d(eta);
    let mut out = [0.0; 9];
    for b in 0..3 {
        for a in 0..3 {
            out[3 * b + a] = fx[a] * fe[b];
        }
    }
    out
}

/// Biquadratic reference-coordinate gradients `(d/dxi, d/deta)` at `(xi, eta)`.
pub fn q2_grad(xi: f64, eta: f64) -> [(f64, f64); 9] {
    let fx = quad1d(xi);
    let fe = quad1d(eta);
    let dx = quad1d_deriv(xi);
    let de = quad1d_deriv(eta);
    let mut out = [(0.0, 0.0); 9];
    for b in 0..3 {
        for a in 0..3 {
            out[3 * b + a] = (dx[a] * fe[b], fx[a] * de[b]);
        }
    }
    out
}

/// Bilinear basis values at `(xi, eta)`.
pub fn q1(xi: f64, eta: f64) -> [f64; 4] {
    let fx = lin1d(xi);
    let fe = lin1d(eta);
    [fx[0] * fe[0], fx[1] * fe[0], fx[0] * fe[1], fx[1] * fe[1]]
}

/// Bilinear reference-coordinate gradients at `(xi, eta)`.
pub fn q1_grad(xi: f64, eta: f64) -> [(f64, f64); 4] {
    let fx = lin1d(xi);
    let fe = lin1d(eta);
    let dx = lin1d_deriv();
    let de = lin1d_deriv();
    [
        (dx[0] * fe[0], fx[0] * de[0]),
        (dx[1] * fe[0], fx[1] * de[0]),
        (dx[0] * fe[1], fx[0] * de[1]),
        (dx[1] * fe[1], fx[1] * de[1]),
    ]
}
