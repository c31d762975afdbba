//! Quaternion scalar arithmetic.
//!
//! `q = r + i*x + j*y + k*z` with the Hamilton relations
//! `i^2 = j^2 = k^2 = ijk = -1`. Multiplication is associative and
//! distributes over addition but does not commute.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub r: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(r: f64, i: f64, j: f64, k: f64) -> Self {
        Quaternion { r, i, j, k }
    }

    pub const fn real(r: f64) -> Self {
        Quaternion::new(r, 0.0, 0.0, 0.0)
    }

    pub fn conjugate(self) -> Self {
        Quaternion::new(self.r, -self.i, -self.j, -self.k)
    }

    pub fn norm_sq(self) -> f64 {
        self.r * self.r + self.i * self.i + self.j * self.j + self.k * self.k
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Component of largest magnitude; handy for tolerance checks.
    pub fn max_abs(self) -> f64 {
        self.r.abs().max(self.i.abs()).max(self.j.abs()).max(self.k.abs())
    }

    pub fn component(self, t: usize) -> f64 {
        match t {
            0 => self.r,
            1 => self.i,
            2 => self.j,
            3 => self.k,
            _ => panic!("quaternion component index {t} out of range"),
        }
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.i.is_finite() && self.j.is_finite() && self.k.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r + o.r, self.i + o.i, self.j + o.j, self.k + o.k)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r - o.r, self.i - o.i, self.j - o.j, self.k - o.k)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.r, -self.i, -self.j, -self.k)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.r * o.r - self.i * o.i - self.j * o.j - self.k * o.k,
            self.r * o.i + self.i * o.r + self.j * o.k - self.k * o.j,
            self.r * o.j - self.i * o.k + self.j * o.r + self.k * o.i,
            self.r * o.k + self.i * o.j - self.j * o.i + self.k * o.r,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.r * s, self.i * s, self.j * s, self.k * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        let minus_one = Quaternion::real(-1.0);
        assert_eq!(i * i, minus_one);
        assert_eq!(j * j, minus_one);
        assert_eq!(k * k, minus_one);
        assert_eq!(i * j * k, minus_one);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
    }

    #[test]
    fn identity_element() {
        let q = Quaternion::new(2.0, 3.0, -1.0, 0.5);
        assert_eq!(q * Quaternion::ONE, q);
        assert_eq!(Quaternion::ONE * q, q);
    }

    #[test]
    fn non_commutative_example() {
        // (1+i)(1+j) = 1 + i + j + k, but (1+j)(1+i) = 1 + i + j - k.
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(b * a, Quaternion::new(1.0, 1.0, 1.0, -1.0));
    }

    #[test]
    fn conjugation_involution_and_norm() {
        let q = Quaternion::new(2.0, 3.0, -1.0, 0.5);
        assert_eq!(q.conjugate().conjugate(), q);
        let n = q * q.conjugate();
        assert_eq!(n.i, 0.0);
        assert_eq!(n.j, 0.0);
        assert_eq!(n.k, 0.0);
        assert_eq!(n.r, q.norm_sq());
    }

    #[test]
    fn conjugate_antihomomorphism() {
        let a = Quaternion::new(0.5, -2.0, 1.5, 3.0);
        let b = Quaternion::new(-1.0, 0.25, 2.0, -0.75);
        let lhs = (a * b).conjugate();
        let rhs = b.conjugate() * a.conjugate();
        assert!((lhs - rhs).max_abs() < 1e-15);
    }
}
