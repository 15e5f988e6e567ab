//! Gauss-Legendre quadrature rules.
//!
//! A single fixed rule (3 points per direction) is used for every form in the
//! solver, both in assembly and in the energy diagnostics. The integrands
//! contain rational factors that no rule integrates exactly; using one rule
//! everywhere keeps the discrete energy identities exact at the matrix level.

/// 3-point Gauss-Legendre rule on [-1, 1]. Exact for polynomials of degree 5.
/// Node is sqrt(3/5), weights 5/9 and 8/9.
pub const GAUSS_3: [(f64, f64); 3] = [
    (-0.7745966692414834, 0.5555555555555556),
    (0.0, 0.8888888888888889),
    (0.7745966692414834, 0.5555555555555556),
];

/// Tensor-product 3x3 rule on the reference square, `(xi, eta, weight)`.
pub fn gauss_3x3() -> [(f64, f64, f64); 9] {
    let mut out = [(0.0, 0.0, 0.0); 9];
    let mut k = 0;
    for &(e, we) in GAUSS_3.iter() {
        for &(x, wx) in GAUSS_3.iter() {
            out[k] = (x, e, wx * we);
            k += 1;
        }
    }
    out
}
