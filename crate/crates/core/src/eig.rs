//! Right-eigendecomposition of Hermitian quaternion matrices.
//!
//! A Hermitian `Q` is diagonalizable with real right eigenvalues. We compute
//! them through the complex adjoint: the 2n x 2n adjoint is complex Hermitian
//! and its spectrum consists of the n quaternion eigenvalues, each with
//! multiplicity two. Eigenvectors are recovered from the adjoint eigenvector
//! blocks and re-orthonormalized under the quaternionic inner product within
//! each eigenvalue cluster.

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quat::Quaternion;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// The n real right eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvector columns, orthonormal under `x* y`.
    pub eigenvectors: QMatrix,
}

/// Eigendecompose a Hermitian quaternion matrix.
///
/// `tol` bounds the accepted deviation `|Q - Q*|`; anything beyond it is an
/// error rather than a silent symmetrization.
pub fn hermitian_eig(q: &QMatrix, tol: f64) -> Result<EigenResult> {
    let deviation = q.hermitian_deviation()?;
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let n = q.rows();
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: vec![],
            eigenvectors: QMatrix::zeros(0, 0),
        });
    }

    let adjoint = to_nalgebra(q);
    let se = adjoint.symmetric_eigen();

    // Sort the 2n adjoint eigenpairs ascending.
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let lambdas: Vec<f64> = order.iter().map(|&t| se.eigenvalues[t]).collect();

    // Multiplicity-2 structure: adjacent sorted values must pair up.
    let scale = q.frob_norm().max(1.0);
    let pair_tol = 1e-8 * scale;
    for t in 0..n {
        let (a, b) = (lambdas[2 * t], lambdas[2 * t + 1]);
        if (b - a).abs() > pair_tol {
            return Err(Error::Eigen(format!(
                "adjoint eigenvalues {a} and {b} do not pair within {pair_tol:.3e}"
            )));
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|t| lambdas[2 * t]).collect();

    // Group into clusters of (numerically) equal eigenvalues, then recover
    // quaternion eigenvectors cluster by cluster. Within a cluster the
    // adjoint eigenvectors span a 2m-dimensional complex space that maps to
    // an m-dimensional quaternionic eigenspace, so a greedy quaternionic
    // Gram-Schmidt over all 2m candidates yields m orthonormal columns.
    let mut eigenvectors = QMatrix::zeros(n, n);
    let mut out_col = 0usize;
    let mut start = 0usize;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n && lambdas[end] - lambdas[end - 1] <= pair_tol {
            end += 1;
        }
        let cluster = &order[start..end];
        if cluster.len() % 2 != 0 {
            return Err(Error::Eigen(format!(
                "eigenvalue cluster at {} has odd adjoint multiplicity {}",
                lambdas[start],
                cluster.len()
            )));
        }
        let want = cluster.len() / 2;
        let mut kept: Vec<Vec<Quaternion>> = Vec::with_capacity(want);
        for &col in cluster {
            if kept.len() == want {
                break;
            }
            let mut x = quaternion_vector_from_adjoint_column(&se.eigenvectors, col, n);
            for basis in &kept {
                let coeff = qdot(basis, &x);
                for (xt, bt) in x.iter_mut().zip(basis) {
                    *xt = *xt - *bt * coeff;
                }
            }
            let norm = qnorm(&x);
            if norm > 1e-6 {
                let inv = 1.0 / norm;
                for xt in &mut x {
                    *xt = *xt * inv;
                }
                kept.push(x);
            }
        }
        if kept.len() != want {
            return Err(Error::Eigen(format!(
                "could not extract {want} orthonormal eigenvectors for eigenvalue {}",
                lambdas[start]
            )));
        }
        for x in kept {
            for (u, q) in x.into_iter().enumerate() {
                eigenvectors.set(u, out_col, q);
            }
            out_col += 1;
        }
        start = end;
    }
    debug_assert_eq!(out_col, n);

    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only (ascending), skipping the eigenvector recovery.
pub fn hermitian_eigenvalues(q: &QMatrix, tol: f64) -> Result<Vec<f64>> {
    let deviation = q.hermitian_deviation()?;
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let n = q.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut lambdas: Vec<f64> = to_nalgebra(q)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    lambdas.sort_by(f64::total_cmp);
    let scale = q.frob_norm().max(1.0);
    let pair_tol = 1e-8 * scale;
    for t in 0..n {
        let (a, b) = (lambdas[2 * t], lambdas[2 * t + 1]);
        if (b - a).abs() > pair_tol {
            return Err(Error::Eigen(format!(
                "adjoint eigenvalues {a} and {b} do not pair within {pair_tol:.3e}"
            )));
        }
    }
    Ok((0..n).map(|t| lambdas[2 * t]).collect())
}

fn to_nalgebra(q: &QMatrix) -> DMatrix<Complex64> {
    let n = q.rows();
    let adj = q.complex_adjoint().expect("square checked by caller");
    DMatrix::from_fn(2 * n, 2 * n, |u, v| {
        Complex64::new(adj.re[(u, v)], adj.im[(u, v)])
    })
}

/// Map adjoint eigenvector (u, v) blocks to the quaternion vector
/// `x = u - conj(v) j`.
fn quaternion_vector_from_adjoint_column(
    vectors: &DMatrix<Complex64>,
    col: usize,
    n: usize,
) -> Vec<Quaternion> {
    (0..n)
        .map(|t| {
            let a = vectors[(t, col)];
            let b = vectors[(n + t, col)];
            Quaternion::new(a.re, a.im, -b.re, b.im)
        })
        .collect()
}

/// Quaternionic inner product `x* y`.
pub(crate) fn qdot(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter()
        .zip(y)
        .fold(Quaternion::ZERO, |acc, (a, b)| acc + a.conjugate() * *b)
}

pub(crate) fn qnorm(x: &[Quaternion]) -> f64 {
    x.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> QMatrix {
        let mut q = QMatrix::zeros(n, n);
        for t in 0..4 {
            for x in q.comp_mut(t).data_mut() {
                *x = rng.random_range(-1.0..1.0);
            }
        }
        q.add(&q.conjugate_transpose()).scale(0.5)
    }

    fn check_reconstruction(q: &QMatrix, res: &EigenResult) {
        let n = q.rows();
        let mut lambda = QMatrix::zeros(n, n);
        for t in 0..n {
            lambda.set(t, t, Quaternion::real(res.eigenvalues[t]));
        }
        let rec = res
            .eigenvectors
            .matmul(&lambda)
            .unwrap()
            .matmul(&res.eigenvectors.conjugate_transpose())
            .unwrap();
        let tol = 1e-8 * q.frob_norm().max(1.0);
        assert!(
            rec.max_abs_diff(q) <= tol,
            "reconstruction error {} exceeds {}",
            rec.max_abs_diff(q),
            tol
        );
    }

    fn check_orthonormal(res: &EigenResult) {
        let n = res.eigenvectors.rows();
        let gram = res
            .eigenvectors
            .conjugate_transpose()
            .matmul(&res.eigenvectors)
            .unwrap();
        assert!(gram.max_abs_diff(&QMatrix::identity(n)) < 1e-10);
    }

    #[test]
    fn diagonal_real_matrix() {
        let q = QMatrix::from_real(Mat::from_rows(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 2.0, 0.0],
            &[0.0, 0.0, 3.0],
        ]));
        let res = hermitian_eig(&q, 0.0).unwrap();
        assert_eq!(res.eigenvalues, vec![1.0, 2.0, 3.0]);
        check_reconstruction(&q, &res);
        check_orthonormal(&res);
    }

    #[test]
    fn two_node_path_laplacian() {
        // Classical Laplacian of an undirected 2-node path: eigenvalues 0 and 2.
        let q = QMatrix::from_real(Mat::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]));
        let res = hermitian_eig(&q, 0.0).unwrap();
        assert!(res.eigenvalues[0].abs() < 1e-12);
        assert!((res.eigenvalues[1] - 2.0).abs() < 1e-12);
        check_reconstruction(&q, &res);
        check_orthonormal(&res);
    }

    #[test]
    fn identity_with_degenerate_spectrum() {
        let q = QMatrix::identity(4);
        let res = hermitian_eig(&q, 0.0).unwrap();
        assert!(res.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        check_reconstruction(&q, &res);
        check_orthonormal(&res);
    }

    #[test]
    fn random_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 5, 8] {
            let q = random_hermitian(&mut rng, n);
            let res = hermitian_eig(&q, 1e-12).unwrap();
            for t in 1..n {
                assert!(res.eigenvalues[t] >= res.eigenvalues[t - 1]);
            }
            check_reconstruction(&q, &res);
            check_orthonormal(&res);
        }
    }

    #[test]
    fn eigenvalues_match_full_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let q = random_hermitian(&mut rng, 6);
        let full = hermitian_eig(&q, 1e-12).unwrap();
        let only = hermitian_eigenvalues(&q, 1e-12).unwrap();
        for (a, b) in full.eigenvalues.iter().zip(&only) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut q = QMatrix::zeros(2, 2);
        q.set(0, 1, Quaternion::J);
        // missing the conjugate at (1,0)
        assert!(matches!(
            hermitian_eig(&q, 1e-12),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn quadratic_form_has_negligible_imaginary_parts() {
        // Basis for the positive-semidefiniteness argument: x* Q x is real
        // for Hermitian Q.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = 5;
            let q = random_hermitian(&mut rng, n);
            let mut x = QMatrix::zeros(n, 1);
            for t in 0..4 {
                for v in x.comp_mut(t).data_mut() {
                    *v = rng.random_range(-2.0..2.0);
                }
            }
            let form = x
                .conjugate_transpose()
                .matmul(&q)
                .unwrap()
                .matmul(&x)
                .unwrap()
                .get(0, 0);
            let xnorm2 = x.frob_norm() * x.frob_norm();
            let bound = 1e-10 * q.frob_norm().max(1.0) * xnorm2;
            assert!(form.i.abs() <= bound);
            assert!(form.j.abs() <= bound);
            assert!(form.k.abs() <= bound);
        }
    }
}
