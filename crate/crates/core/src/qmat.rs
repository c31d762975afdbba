//! Dense quaternion and complex matrices.
//!
//! A quaternion matrix is stored as four real component matrices
//! (`Q = Q0 + i Q1 + j Q2 + k Q3`), which is also the layout the network
//! engine consumes as four real channels.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quat::Quaternion;

/// Hamilton product component table: `out[m] = sum sign * A[p] * B[q]`.
const MUL_TABLE: [[(usize, usize, f64); 4]; 4] = [
    [(0, 0, 1.0), (1, 1, -1.0), (2, 2, -1.0), (3, 3, -1.0)],
    [(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, -1.0)],
    [(0, 2, 1.0), (1, 3, -1.0), (2, 0, 1.0), (3, 1, 1.0)],
    [(0, 3, 1.0), (1, 2, 1.0), (2, 1, -1.0), (3, 0, 1.0)],
];

#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    comp: [Mat; 4],
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            comp: std::array::from_fn(|_| Mat::zeros(rows, cols)),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut q = QMatrix::zeros(n, n);
        q.comp[0] = Mat::identity(n);
        q
    }

    /// Assemble from the four real component matrices, which must share a shape.
    pub fn from_components(comp: [Mat; 4]) -> Result<Self> {
        let shape = comp[0].shape();
        for c in &comp[1..] {
            if c.shape() != shape {
                return Err(Error::ShapeMismatch {
                    op: "QMatrix::from_components",
                    lhs: shape,
                    rhs: c.shape(),
                });
            }
        }
        Ok(QMatrix { comp })
    }

    /// Embed a real matrix (imaginary components zero).
    pub fn from_real(re: Mat) -> Self {
        let (r, c) = re.shape();
        let mut q = QMatrix::zeros(r, c);
        q.comp[0] = re;
        q
    }

    /// Embed a complex matrix (j and k components zero).
    pub fn from_complex(m: &CMat) -> Self {
        let (r, c) = m.re.shape();
        let mut q = QMatrix::zeros(r, c);
        q.comp[0] = m.re.clone();
        q.comp[1] = m.im.clone();
        q
    }

    pub fn rows(&self) -> usize {
        self.comp[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.comp[0].cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.comp[0].shape()
    }

    pub fn comp(&self, t: usize) -> &Mat {
        &self.comp[t]
    }

    pub fn comp_mut(&mut self, t: usize) -> &mut Mat {
        &mut self.comp[t]
    }

    pub fn comps_mut(&mut self) -> [&mut Mat; 4] {
        let [a, b, c, d] = &mut self.comp;
        [a, b, c, d]
    }

    pub fn re(&self) -> &Mat {
        &self.comp[0]
    }

    pub fn get(&self, u: usize, v: usize) -> Quaternion {
        Quaternion::new(
            self.comp[0][(u, v)],
            self.comp[1][(u, v)],
            self.comp[2][(u, v)],
            self.comp[3][(u, v)],
        )
    }

    pub fn set(&mut self, u: usize, v: usize, q: Quaternion) {
        for t in 0..4 {
            self.comp[t][(u, v)] = q.component(t);
        }
    }

    /// Quaternion matrix product, expanded into 16 real matrix products
    /// combined per the Hamilton basis table.
    pub fn matmul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch {
                op: "QMatrix::matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let comp = std::array::from_fn(|m| {
            let mut acc = Mat::zeros(self.rows(), rhs.cols());
            for &(p, q, sign) in &MUL_TABLE[m] {
                let term = self.comp[p].matmul(&rhs.comp[q]);
                acc = if sign > 0.0 { &acc + &term } else { &acc - &term };
            }
            acc
        });
        Ok(QMatrix { comp })
    }

    pub fn conjugate_transpose(&self) -> QMatrix {
        QMatrix {
            comp: [
                self.comp[0].transpose(),
                -&self.comp[1].transpose(),
                -&self.comp[2].transpose(),
                -&self.comp[3].transpose(),
            ],
        }
    }

    /// True iff `max |Q - Q*| <= tol` over all four components.
    pub fn is_hermitian(&self, tol: f64) -> Result<bool> {
        Ok(self.hermitian_deviation()? <= tol)
    }

    /// Max-abs entrywise difference between `Q` and `Q*`.
    pub fn hermitian_deviation(&self) -> Result<f64> {
        if self.rows() != self.cols() {
            return Err(Error::NonSquare {
                op: "is_hermitian",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(self.max_abs_diff(&self.conjugate_transpose()))
    }

    /// Complex adjoint representation: with `Q = Qa + Qb j` where
    /// `Qa = Q0 + i Q1` and `Qb = Q2 + i Q3`, returns the 2n x 2n block
    /// matrix `[[Qa, Qb], [-conj(Qb), conj(Qa)]]`. The map preserves sums,
    /// products, and Hermitian structure.
    pub fn complex_adjoint(&self) -> Result<CMat> {
        if self.rows() != self.cols() {
            return Err(Error::NonSquare {
                op: "complex_adjoint",
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let n = self.rows();
        let (q0, q1, q2, q3) = (&self.comp[0], &self.comp[1], &self.comp[2], &self.comp[3]);
        let mut re = Mat::zeros(2 * n, 2 * n);
        let mut im = Mat::zeros(2 * n, 2 * n);
        for u in 0..n {
            for v in 0..n {
                re[(u, v)] = q0[(u, v)];
                im[(u, v)] = q1[(u, v)];
                re[(u, n + v)] = q2[(u, v)];
                im[(u, n + v)] = q3[(u, v)];
                re[(n + u, v)] = -q2[(u, v)];
                im[(n + u, v)] = q3[(u, v)];
                re[(n + u, n + v)] = q0[(u, v)];
                im[(n + u, n + v)] = -q1[(u, v)];
            }
        }
        Ok(CMat { re, im })
    }

    pub fn add(&self, rhs: &QMatrix) -> QMatrix {
        QMatrix {
            comp: std::array::from_fn(|t| &self.comp[t] + &rhs.comp[t]),
        }
    }

    pub fn sub(&self, rhs: &QMatrix) -> QMatrix {
        QMatrix {
            comp: std::array::from_fn(|t| &self.comp[t] - &rhs.comp[t]),
        }
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix {
            comp: std::array::from_fn(|t| self.comp[t].scale(s)),
        }
    }

    pub fn max_abs_diff(&self, rhs: &QMatrix) -> f64 {
        (0..4).fold(0.0f64, |m, t| m.max(self.comp[t].max_abs_diff(&rhs.comp[t])))
    }

    pub fn max_abs(&self) -> f64 {
        (0..4).fold(0.0f64, |m, t| m.max(self.comp[t].max_abs()))
    }

    pub fn frob_norm(&self) -> f64 {
        (0..4)
            .map(|t| {
                let f = self.comp[t].frob_norm();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Dense complex matrix as a (real, imaginary) pair, used for the
/// sign-magnetic Laplacian and the complex adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub re: Mat,
    pub im: Mat,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            re: Mat::zeros(rows, cols),
            im: Mat::zeros(rows, cols),
        }
    }

    pub fn from_real(re: Mat) -> Self {
        let im = Mat::zeros(re.rows(), re.cols());
        CMat { re, im }
    }

    pub fn rows(&self) -> usize {
        self.re.rows()
    }

    pub fn cols(&self) -> usize {
        self.re.cols()
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        CMat {
            re: &self.re.matmul(&rhs.re) - &self.im.matmul(&rhs.im),
            im: &self.re.matmul(&rhs.im) + &self.im.matmul(&rhs.re),
        }
    }

    pub fn adjoint(&self) -> CMat {
        CMat {
            re: self.re.transpose(),
            im: -&self.im.transpose(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        self.re
            .max_abs_diff(&rhs.re)
            .max(self.im.max_abs_diff(&rhs.im))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_qmatrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> QMatrix {
        let mut q = QMatrix::zeros(rows, cols);
        for t in 0..4 {
            for x in q.comp_mut(t).data_mut() {
                // dyadic rationals so schoolbook and expanded routes agree exactly
                *x = (rng.random_range(-32..=32) as f64) / 4.0;
            }
        }
        q
    }

    /// Schoolbook entrywise quaternion product, the oracle for `matmul`.
    fn schoolbook(a: &QMatrix, b: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(a.rows(), b.cols());
        for u in 0..a.rows() {
            for v in 0..b.cols() {
                let mut s = Quaternion::ZERO;
                for t in 0..a.cols() {
                    s = s + a.get(u, t) * b.get(t, v);
                }
                out.set(u, v, s);
            }
        }
        out
    }

    #[test]
    fn matmul_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_qmatrix(&mut rng, 3, 3);
        let i = QMatrix::identity(3);
        assert_eq!(i.matmul(&q).unwrap(), q);
        assert_eq!(q.matmul(&i).unwrap(), q);
    }

    #[test]
    fn matmul_scalar_embedding_reduces_to_qmul() {
        let mut a = QMatrix::zeros(1, 1);
        a.set(0, 0, Quaternion::I);
        let mut b = QMatrix::zeros(1, 1);
        b.set(0, 0, Quaternion::J);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.get(0, 0), Quaternion::K);
    }

    #[test]
    fn matmul_matches_schoolbook_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random_qmatrix(&mut rng, 2, 2);
            let b = random_qmatrix(&mut rng, 2, 2);
            assert_eq!(a.matmul(&b).unwrap(), schoolbook(&a, &b));
        }
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = QMatrix::zeros(2, 3);
        let b = QMatrix::zeros(2, 3);
        assert!(matches!(
            a.matmul(&b),
            Err(Error::ShapeMismatch { op: "QMatrix::matmul", .. })
        ));
    }

    #[test]
    fn conjugate_transpose_involution_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_qmatrix(&mut rng, 3, 2);
        assert_eq!(q.conjugate_transpose().conjugate_transpose(), q);

        let mut s = QMatrix::zeros(1, 1);
        s.set(0, 0, Quaternion::I);
        assert_eq!(s.conjugate_transpose().get(0, 0), -Quaternion::I);
    }

    #[test]
    fn conjugate_transpose_antihomomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_qmatrix(&mut rng, 3, 2);
            let b = random_qmatrix(&mut rng, 2, 4);
            let lhs = a.matmul(&b).unwrap().conjugate_transpose();
            let rhs = b
                .conjugate_transpose()
                .matmul(&a.conjugate_transpose())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hermitian_checks() {
        let re = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 3.0]]);
        let q = QMatrix::from_real(re);
        assert!(q.is_hermitian(0.0).unwrap());

        let mut skew = QMatrix::zeros(1, 1);
        skew.set(0, 0, Quaternion::J);
        assert!(!skew.is_hermitian(0.0).unwrap());

        let rect = QMatrix::zeros(2, 3);
        assert!(matches!(
            rect.is_hermitian(0.0),
            Err(Error::NonSquare { op: "is_hermitian", .. })
        ));
    }

    #[test]
    fn adjoint_of_scalars() {
        let mut five = QMatrix::zeros(1, 1);
        five.set(0, 0, Quaternion::real(5.0));
        let a = five.complex_adjoint().unwrap();
        assert_eq!(a.re, Mat::from_rows(&[&[5.0, 0.0], &[0.0, 5.0]]));
        assert_eq!(a.im, Mat::zeros(2, 2));

        let mut j = QMatrix::zeros(1, 1);
        j.set(0, 0, Quaternion::J);
        let a = j.complex_adjoint().unwrap();
        assert_eq!(a.re, Mat::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]));
        assert_eq!(a.im, Mat::zeros(2, 2));
    }

    #[test]
    fn adjoint_is_ring_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_qmatrix(&mut rng, 3, 3);
            let b = random_qmatrix(&mut rng, 3, 3);
            let prod = a.matmul(&b).unwrap().complex_adjoint().unwrap();
            let mapped = a
                .complex_adjoint()
                .unwrap()
                .matmul(&b.complex_adjoint().unwrap());
            assert!(prod.max_abs_diff(&mapped) == 0.0);

            let sum = a.add(&b).complex_adjoint().unwrap();
            let mapped_sum = CMat {
                re: &a.complex_adjoint().unwrap().re + &b.complex_adjoint().unwrap().re,
                im: &a.complex_adjoint().unwrap().im + &b.complex_adjoint().unwrap().im,
            };
            assert!(sum.max_abs_diff(&mapped_sum) == 0.0);
        }
    }

    #[test]
    fn adjoint_of_hermitian_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_qmatrix(&mut rng, 4, 4);
        let h = a.add(&a.conjugate_transpose()); // Hermitian by construction
        assert!(h.is_hermitian(0.0).unwrap());
        assert!(h.complex_adjoint().unwrap().is_hermitian(0.0));
    }
}
