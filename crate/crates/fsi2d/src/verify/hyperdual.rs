//! Two-variable second-order forward-mode differentiation.
//!
//! Carries a value together with first and second partial derivatives in
//! `(z, r)`. Exact to machine precision for the polynomial/trigonometric
//! stream functions the harness manufactures, which need second derivatives
//! of the potential to produce velocity gradients.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub dz: f64,
    pub dr: f64,
    pub dzz: f64,
    pub dzr: f64,
    pub drr: f64,
}

impl Dual2 {
    pub const ZERO: Dual2 = Dual2::constant(0.0);

    pub const fn constant(v: f64) -> Self {
        Dual2 {
            v,
            dz: 0.0,
            dr: 0.0,
            dzz: 0.0,
            dzr: 0.0,
            drr: 0.0,
        }
    }

    pub fn var_z(z: f64) -> Self {
        Dual2 {
            v: z,
            dz: 1.0,
            ..Dual2::ZERO
        }
    }

    pub fn var_r(r: f64) -> Self {
        Dual2 {
            v: r,
            dr: 1.0,
            ..Dual2::ZERO
        }
    }

    /// Lifts a function of z with known value/slope/curvature at a point.
    pub fn of_z_profile(value: f64, slope: f64, curvature: f64) -> Self {
        Dual2 {
            v: value,
            dz: slope,
            dzz: curvature,
            ..Dual2::ZERO
        }
    }

    /// Composition with a scalar function given `g(v)`, `g'(v)`, `g''(v)`.
    fn compose(self, g: f64, dg: f64, ddg: f64) -> Self {
        Dual2 {
            v: g,
            dz: dg * self.dz,
            dr: dg * self.dr,
            dzz: ddg * self.dz * self.dz + dg * self.dzz,
            dzr: ddg * self.dz * self.dr + dg * self.dzr,
            drr: ddg * self.dr * self.dr + dg * self.drr,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn powi(self, n: i32) -> Self {
        debug_assert!(n >= 1);
        let g = self.v.powi(n);
        let dg = n as f64 * self.v.powi(n - 1);
        let ddg = if n >= 2 {
            (n * (n - 1)) as f64 * self.v.powi(n - 2)
        } else {
            0.0
        };
        self.compose(g, dg, ddg)
    }

    pub fn scale(self, s: f64) -> Self {
        Dual2 {
            v: s * self.v,
            dz: s * self.dz,
            dr: s * self.dr,
            dzz: s * self.dzz,
            dzr: s * self.dzr,
            drr: s * self.drr,
        }
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v + o.v,
            dz: self.dz + o.dz,
            dr: self.dr + o.dr,
            dzz: self.dzz + o.dzz,
            dzr: self.dzr + o.dzr,
            drr: self.drr + o.drr,
        }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        self + (-o)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v * o.v,
            dz: self.dz * o.v + self.v * o.dz,
            dr: self.dr * o.v + self.v * o.dr,
            dzz: self.dzz * o.v + 2.0 * self.dz * o.dz + self.v * o.dzz,
            dzr: self.dzr * o.v + self.dz * o.dr + self.dr * o.dz + self.v * o.dzr,
            drr: self.drr * o.v + 2.0 * self.dr * o.dr + self.v * o.drr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_polynomial_product() {
        // f = z^2 r^3: fz = 2 z r^3, fr = 3 z^2 r^2,
        // fzz = 2 r^3, fzr = 6 z r^2, frr = 6 z^2 r
        let (z, r) = (1.3, -0.7);
        let f = Dual2::var_z(z).powi(2) * Dual2::var_r(r).powi(3);
        assert!((f.v - z * z * r.powi(3)).abs() < 1e-14);
        assert!((f.dz - 2.0 * z * r.powi(3)).abs() < 1e-14);
        assert!((f.dr - 3.0 * z * z * r * r).abs() < 1e-14);
        assert!((f.dzz - 2.0 * r.powi(3)).abs() < 1e-14);
        assert!((f.dzr - 6.0 * z * r * r).abs() < 1e-14);
        assert!((f.drr - 6.0 * z * z * r).abs() < 1e-13);
    }

    #[test]
    fn sine_chain_rule() {
        // f = sin(a z): fzz = -a^2 sin(a z)
        let a = 2.5;
        let z = 0.4;
        let f = Dual2::var_z(z).scale(a).sin();
        assert!((f.v - (a * z).sin()).abs() < 1e-15);
        assert!((f.dz - a * (a * z).cos()).abs() < 1e-14);
        assert!((f.dzz + a * a * (a * z).sin()).abs() < 1e-14);
    }
}
