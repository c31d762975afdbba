//! Graph Laplacian constructions.
//!
//! The central object is the quaternionic Laplacian `Lq = Dbar - Hq` with
//!
//! ```text
//! Hq = As1 .* (H0 + i H1)  +  j (As2 .* H2)  +  k (As3 .* H3)
//! ```
//!
//! where `.*` is the Hadamard product. Single directed edges land on the i
//! component, equal-weight digons on the real component, and unequal-weight
//! digons on the j/k components, so the adjacency can be reconstructed from
//! `Hq` without loss. The classical Laplacian (on the symmetrized adjacency)
//! and the complex sign-magnetic Laplacian are also provided, both as
//! comparison oracles and as alternative propagation operators for the
//! network.

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::mat::{sgn, Mat};
use crate::qmat::{CMat, QMatrix};
use crate::quat::Quaternion;

/// Which Laplacian backs the network's propagation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianKind {
    Quaternionic,
    Classical,
    SignMagnetic,
}

impl LaplacianKind {
    pub const ALL: [LaplacianKind; 3] = [
        LaplacianKind::Quaternionic,
        LaplacianKind::Classical,
        LaplacianKind::SignMagnetic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LaplacianKind::Quaternionic => "quaternionic",
            LaplacianKind::Classical => "classical",
            LaplacianKind::SignMagnetic => "sign-magnetic",
        }
    }

    /// The renormalized propagation matrix of this kind, embedded into
    /// quaternion channels so one network consumes any of them.
    pub fn propagation(self, g: &Digraph) -> Result<QMatrix> {
        Ok(match self {
            LaplacianKind::Quaternionic => propagation_matrix(g),
            LaplacianKind::Classical => QMatrix::from_real(classical_propagation_matrix(g)?),
            LaplacianKind::SignMagnetic => sign_magnetic_propagation_matrix(g),
        })
    }
}

impl std::str::FromStr for LaplacianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LaplacianKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown laplacian kind {s:?}")))
    }
}

/// Every matrix of the quaternionic construction for one graph.
#[derive(Clone, Debug)]
pub struct LaplacianBundle {
    /// Binary topology: `t[(u,v)] = 1` iff the edge u -> v exists.
    pub t: Mat,
    /// Symmetric digon indicator `T .* T^t`.
    pub o: Mat,
    /// `sgn(|A - A^t|)`: zero exactly where the pair is weight-symmetric.
    pub n: Mat,
    /// `sgn(|A| - |A^t|)`: direction of the larger absolute weight.
    pub r: Mat,
    pub h0: Mat,
    pub h1: Mat,
    pub h2: Mat,
    pub h3: Mat,
    pub as1: Mat,
    pub as2: Mat,
    pub as3: Mat,
    /// Diagonal of `Dbar = Diag(|As1| e)`.
    pub dbar: Vec<f64>,
    pub hq: QMatrix,
    pub lq: QMatrix,
    /// Absent when some `dbar` entry is zero (isolated node).
    pub lq_norm: Option<QMatrix>,
}

/// `(T, O, N, R)` of the construction.
pub fn topology_matrices(g: &Digraph) -> (Mat, Mat, Mat, Mat) {
    raw_topology(g.adjacency())
}

fn raw_topology(a: &Mat) -> (Mat, Mat, Mat, Mat) {
    let at = a.transpose();
    let abs = a.map(f64::abs);
    let abs_t = at.map(f64::abs);
    let t = sgn(&abs);
    let o = t.hadamard(&t.transpose());
    let n = sgn(&(a - &at).map(f64::abs));
    let r = sgn(&(&abs - &abs_t));
    (t, o, n, r)
}

/// `(H0, H1, H2, H3)` from the topology matrices. `U`/`L` keep the upper and
/// lower triangle including the diagonal; the diagonal choice is irrelevant
/// after the Hadamard products because the symmetrized adjacencies have zero
/// diagonals.
pub fn h_components(t: &Mat, o: &Mat, n: &Mat, r: &Mat) -> (Mat, Mat, Mat, Mat) {
    let size = t.rows();
    let ones = Mat::from_fn(size, size, |_, _| 1.0);
    let h0 = &ones - n;
    let h1 = r.hadamard(&(&ones - o));
    let h2 = o.hadamard(n).hadamard(&(&t.upper() - &t.transpose().lower()));
    let h3 = -&h2;
    (h0, h1, h2, h3)
}

/// `As1 = (A + A^t)/2`, `As2 = (U(A) + L(A^t))/2`, `As3 = (L(A) + U(A^t))/2`.
pub fn symmetrized_adjacencies(g: &Digraph) -> (Mat, Mat, Mat) {
    raw_symmetrized(g.adjacency())
}

fn raw_symmetrized(a: &Mat) -> (Mat, Mat, Mat) {
    let at = a.transpose();
    let as1 = (&(a + &at)).scale(0.5);
    let as2 = (&(&a.upper() + &at.lower())).scale(0.5);
    let as3 = (&(&a.lower() + &at.upper())).scale(0.5);
    (as1, as2, as3)
}

/// `Hq` and the degree diagonal for an arbitrary adjacency (which may carry
/// self-weights, as the renormalized propagation matrix does).
fn raw_quaternionic(a: &Mat) -> (QMatrix, Vec<f64>) {
    let (t, o, n, r) = raw_topology(a);
    let (h0, h1, h2, h3) = h_components(&t, &o, &n, &r);
    let (as1, as2, as3) = raw_symmetrized(a);
    let hq = QMatrix::from_components([
        as1.hadamard(&h0),
        as1.hadamard(&h1),
        as2.hadamard(&h2),
        as3.hadamard(&h3),
    ])
    .expect("components share the adjacency shape");
    let dbar = as1.map(f64::abs).row_sums();
    (hq, dbar)
}

/// Build the full quaternionic bundle for a graph.
pub fn build_quaternionic(g: &Digraph) -> LaplacianBundle {
    let a = g.adjacency();
    let (t, o, n, r) = raw_topology(a);
    let (h0, h1, h2, h3) = h_components(&t, &o, &n, &r);
    let (as1, as2, as3) = raw_symmetrized(a);
    let (hq, dbar) = raw_quaternionic(a);

    let size = g.n();
    let mut lq = hq.scale(-1.0);
    for (u, &d) in dbar.iter().enumerate() {
        lq.comp_mut(0)[(u, u)] += d;
    }

    let lq_norm = if dbar.iter().all(|&d| d > 0.0) {
        Some(normalized_from(&hq, &dbar, true))
    } else {
        None
    };
    let _ = size;

    LaplacianBundle {
        t,
        o,
        n,
        r,
        h0,
        h1,
        h2,
        h3,
        as1,
        as2,
        as3,
        dbar,
        hq,
        lq,
        lq_norm,
    }
}

/// `identity - S Hq S` (or just `S Hq S`) with `S = Dbar^{-1/2}`.
fn normalized_from(hq: &QMatrix, dbar: &[f64], subtract_from_identity: bool) -> QMatrix {
    let size = hq.rows();
    let mut out = QMatrix::zeros(size, size);
    for t in 0..4 {
        let comp = out.comp_mut(t);
        for u in 0..size {
            for v in 0..size {
                let scaled = hq.comp(t)[(u, v)] / (dbar[u] * dbar[v]).sqrt();
                comp[(u, v)] = if subtract_from_identity {
                    let id = if t == 0 && u == v { 1.0 } else { 0.0 };
                    id - scaled
                } else {
                    scaled
                };
            }
        }
    }
    out
}

/// Normalized quaternionic Laplacian `I - Dbar^{-1/2} Hq Dbar^{-1/2}`.
/// Hermitian with unit diagonal; errors on the first isolated node.
pub fn normalize(bundle: &LaplacianBundle) -> Result<QMatrix> {
    if let Some(node) = bundle.dbar.iter().position(|&d| d == 0.0) {
        return Err(Error::IsolatedNode { node });
    }
    Ok(bundle
        .lq_norm
        .clone()
        .unwrap_or_else(|| normalized_from(&bundle.hq, &bundle.dbar, true)))
}

/// Renormalized propagation operator consumed by the convolution layer:
/// `Dt^{-1/2} Hqt Dt^{-1/2}` built from `A + identity`, which guarantees
/// positive degrees. Hermitian by construction.
pub fn propagation_matrix(g: &Digraph) -> QMatrix {
    let a_tilde = g.adjacency() + &Mat::identity(g.n());
    let (hq, dbar) = raw_quaternionic(&a_tilde);
    normalized_from(&hq, &dbar, false)
}

/// Classical Laplacian on the symmetrized adjacency `As = (A + A^t)/2`:
/// `D - As`, or `identity - D^{-1/2} As D^{-1/2}` when `normalized`.
pub fn classical_laplacian(g: &Digraph, normalized: bool) -> Result<Mat> {
    let a = g.adjacency();
    let as1 = (&(a + &a.transpose())).scale(0.5);
    let d = as1.row_sums();
    let size = g.n();
    if !normalized {
        let mut l = -&as1;
        for u in 0..size {
            l[(u, u)] += d[u];
        }
        return Ok(l);
    }
    if let Some(node) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::IsolatedNode { node });
    }
    let s: Vec<f64> = d.iter().map(|&x| 1.0 / x.sqrt()).collect();
    Ok(Mat::from_fn(size, size, |u, v| {
        let id = if u == v { 1.0 } else { 0.0 };
        id - as1[(u, v)] * (s[u] * s[v])
    }))
}

/// Renormalized classical propagation `Dt^{-1/2} (As + identity) Dt^{-1/2}`,
/// the operator a plain GCN uses after symmetrization.
pub fn classical_propagation_matrix(g: &Digraph) -> Result<Mat> {
    let a = g.adjacency();
    let size = g.n();
    let mut as_tilde = (&(a + &a.transpose())).scale(0.5);
    for u in 0..size {
        as_tilde[(u, u)] += 1.0;
    }
    let d = as_tilde.row_sums();
    if let Some(node) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::IsolatedNode { node });
    }
    let s: Vec<f64> = d.iter().map(|&x| 1.0 / x.sqrt()).collect();
    Ok(Mat::from_fn(size, size, |u, v| as_tilde[(u, v)] * (s[u] * s[v])))
}

/// The complex sign-magnetic Laplacian and its pieces.
#[derive(Clone, Debug)]
pub struct SignMagneticBundle {
    pub hsigma: CMat,
    pub lsigma: CMat,
    pub dbar: Vec<f64>,
}

/// `Hsigma = As .* (ee^t - sgn|A - A^t| + i sgn(|A| - |A^t|))` and
/// `Lsigma = Dbar - Hsigma`.
pub fn sign_magnetic_laplacian(g: &Digraph) -> SignMagneticBundle {
    let (hsigma, dbar) = raw_sign_magnetic(g.adjacency());
    let mut lsigma = CMat {
        re: -&hsigma.re,
        im: -&hsigma.im,
    };
    for (u, &d) in dbar.iter().enumerate() {
        lsigma.re[(u, u)] += d;
    }
    SignMagneticBundle {
        hsigma,
        lsigma,
        dbar,
    }
}

fn raw_sign_magnetic(a: &Mat) -> (CMat, Vec<f64>) {
    let (_, _, n, r) = raw_topology(a);
    let (as1, _, _) = raw_symmetrized(a);
    let size = a.rows();
    let ones = Mat::from_fn(size, size, |_, _| 1.0);
    let hsigma = CMat {
        re: as1.hadamard(&(&ones - &n)),
        im: as1.hadamard(&r),
    };
    let dbar = as1.map(f64::abs).row_sums();
    (hsigma, dbar)
}

/// Renormalized sign-magnetic propagation matrix, embedded into the
/// quaternion channels (j and k zero) so the same network consumes it.
pub fn sign_magnetic_propagation_matrix(g: &Digraph) -> QMatrix {
    let a_tilde = g.adjacency() + &Mat::identity(g.n());
    let (hsigma, dbar) = raw_sign_magnetic(&a_tilde);
    let hq = QMatrix::from_complex(&hsigma);
    normalized_from(&hq, &dbar, false)
}

/// Recover the adjacency matrix from `Hq` by the component case analysis:
/// real entries are equal-weight digons, i entries single edges, j/k entries
/// unequal-weight digons. Single edges are decoded with the positive-weight
/// direction convention; a single edge of negative weight is
/// indistinguishable in `Hq` from its reversed, negated twin (see
/// [`canonical_single_edge_form`]).
pub fn reconstruct_adjacency(hq: &QMatrix) -> Result<Mat> {
    if hq.rows() != hq.cols() {
        return Err(Error::NonSquare {
            op: "reconstruct_adjacency",
            rows: hq.rows(),
            cols: hq.cols(),
        });
    }
    let size = hq.rows();
    let mut a = Mat::zeros(size, size);
    for u in 0..size {
        if hq.get(u, u) != Quaternion::ZERO {
            return Err(Error::InvalidConfig(format!(
                "diagonal entry {u} is nonzero; not the quaternionic matrix of a loop-free graph"
            )));
        }
        for v in (u + 1)..size {
            let q = hq.get(u, v);
            let groups =
                (q.r != 0.0) as u8 + (q.i != 0.0) as u8 + (q.j != 0.0 || q.k != 0.0) as u8;
            if groups > 1 {
                return Err(Error::InvalidConfig(format!(
                    "entry ({u}, {v}) mixes orthogonal component groups"
                )));
            }
            if q.r != 0.0 {
                a[(u, v)] = q.r;
                a[(v, u)] = q.r;
            } else if q.i != 0.0 {
                let w = 2.0 * q.i;
                if w > 0.0 {
                    a[(u, v)] = w;
                } else {
                    a[(v, u)] = -w;
                }
            } else if q.j != 0.0 || q.k != 0.0 {
                a[(u, v)] = 2.0 * q.j;
                a[(v, u)] = -2.0 * q.k;
            }
        }
    }
    Ok(a)
}

/// Canonical representative of the graphs sharing a quaternionic Laplacian:
/// every single (non-digon) edge of negative weight is replaced by the
/// reversed edge of positive weight, which leaves `Hq` unchanged entry for
/// entry. Graphs already in this form reconstruct exactly.
pub fn canonical_single_edge_form(g: &Digraph) -> Digraph {
    let mut a = g.adjacency().clone();
    let size = g.n();
    for u in 0..size {
        for v in 0..size {
            if a[(u, v)] < 0.0 && a[(v, u)] == 0.0 {
                a[(v, u)] = -a[(u, v)];
                a[(u, v)] = 0.0;
            }
        }
    }
    Digraph::new(a, g.labels().map(|l| l.to_vec())).expect("canonical form keeps the graph valid")
}
