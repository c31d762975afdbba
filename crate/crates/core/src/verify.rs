//! Batch verification of the Laplacian's structural and spectral properties
//! over seeded graph corpora.
//!
//! Each property is checked per graph and aggregated into a
//! [`VerificationReport`] with pass/fail/skip counts, the worst violation
//! magnitude, and the seeds of any failures. A property whose hypothesis a
//! graph does not satisfy (e.g. the undirected-graph identity on a directed
//! corpus) is skipped for that graph, never failed.

use crate::eig::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::graph::{generate_dsbm, Digraph, DsbmConfig};
use crate::laplacian::{
    build_quaternionic, canonical_single_edge_form, classical_laplacian, reconstruct_adjacency,
    sign_magnetic_laplacian, LaplacianBundle, SignMagneticBundle,
};
use crate::mat::Mat;
use crate::qmat::QMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    /// Equality with the classical Laplacian on undirected nonnegative graphs.
    Thm1,
    /// Equality with the sign-magnetic Laplacian when every pair is a single
    /// edge or an equal-weight digon.
    Thm2,
    /// Decomposition into the sign-magnetic part plus the digon part on
    /// graphs without equal-weight digons.
    Thm3,
    /// Positive semidefiniteness of Lq and Lq_norm.
    Psd,
    /// Largest eigenvalue of Lq_norm at most 2.
    LambdaMax,
    /// Hq, Lq (and Lq_norm when defined) are Hermitian.
    Hermitian,
    /// Off-diagonal entries use at most one of the component groups
    /// {real, i, (j,k)}.
    Orthogonality,
    /// The adjacency is recovered exactly from Hq.
    Reconstruction,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Thm1,
        Property::Thm2,
        Property::Thm3,
        Property::Psd,
        Property::LambdaMax,
        Property::Hermitian,
        Property::Orthogonality,
        Property::Reconstruction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Thm1 => "thm1",
            Property::Thm2 => "thm2",
            Property::Thm3 => "thm3",
            Property::Psd => "psd",
            Property::LambdaMax => "lambda_max",
            Property::Hermitian => "hermitian",
            Property::Orthogonality => "orthogonality",
            Property::Reconstruction => "reconstruction",
        }
    }
}

impl std::str::FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

/// Default tolerances: exact for integer-representable identities, 1e-12 for
/// floating-point algebraic identities, 1e-9 relative for spectral bounds.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub exact: f64,
    pub algebraic: f64,
    pub spectral_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 0.0,
            algebraic: 1e-12,
            spectral_rel: 1e-9,
        }
    }
}

/// Post-processing applied to a generated graph to place it in a regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphTransform {
    None,
    /// Mirror every edge so the adjacency is symmetric.
    Undirect,
    /// Force both directions of every digon to the `u < v` weight.
    SymmetrizeDigons,
    /// Nudge equal-weight digons apart so none remain symmetric.
    AsymmetrizeDigons,
    /// Flip negative single edges to the positive-weight direction.
    CanonicalSingleEdges,
}

pub fn apply_transform(g: &Digraph, transform: GraphTransform) -> Digraph {
    let n = g.n();
    let mut a = g.adjacency().clone();
    match transform {
        GraphTransform::None => {}
        GraphTransform::Undirect => {
            for u in 0..n {
                for v in (u + 1)..n {
                    let w = if a[(u, v)] != 0.0 { a[(u, v)] } else { a[(v, u)] };
                    a[(u, v)] = w;
                    a[(v, u)] = w;
                }
            }
        }
        GraphTransform::SymmetrizeDigons => {
            for u in 0..n {
                for v in (u + 1)..n {
                    if a[(u, v)] != 0.0 && a[(v, u)] != 0.0 {
                        a[(v, u)] = a[(u, v)];
                    }
                }
            }
        }
        GraphTransform::AsymmetrizeDigons => {
            for u in 0..n {
                for v in (u + 1)..n {
                    if a[(u, v)] != 0.0 && a[(u, v)] == a[(v, u)] {
                        a[(v, u)] += a[(v, u)].signum();
                    }
                }
            }
        }
        GraphTransform::CanonicalSingleEdges => {
            return canonical_single_edge_form(g);
        }
    }
    Digraph::new(a, g.labels().map(|l| l.to_vec())).expect("transform keeps the graph valid")
}

/// One graph of a corpus: a generator configuration plus a regime transform.
#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub config: DsbmConfig,
    pub transform: GraphTransform,
}

impl CorpusSpec {
    pub fn realize(&self) -> Result<Digraph> {
        Ok(apply_transform(&generate_dsbm(&self.config)?, self.transform))
    }
}

/// The three named regimes used by the default verification corpora.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    UndirectedNonnegative,
    SymmetricDigon,
    SignedDigonRich,
    CanonicalSignedDigon,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::UndirectedNonnegative,
        Regime::SymmetricDigon,
        Regime::SignedDigonRich,
        Regime::CanonicalSignedDigon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::UndirectedNonnegative => "undirected-nonnegative",
            Regime::SymmetricDigon => "symmetric-digon",
            Regime::SignedDigonRich => "signed-digon-rich",
            Regime::CanonicalSignedDigon => "canonical-signed-digon",
        }
    }
}

/// Seeded corpus for a regime: `count` graphs with node counts cycling
/// through 40..=200.
pub fn regime_corpus(regime: Regime, count: usize, base_seed: u64) -> Vec<CorpusSpec> {
    (0..count as u64)
        .map(|i| {
            let npc = 8 + 4 * (i as usize % 9); // 5 clusters: n in 40..=200
            let (signed, delta, transform) = match regime {
                Regime::UndirectedNonnegative => (false, 0.3, GraphTransform::Undirect),
                Regime::SymmetricDigon => (true, 0.35, GraphTransform::SymmetrizeDigons),
                Regime::SignedDigonRich => (true, 0.5, GraphTransform::AsymmetrizeDigons),
                Regime::CanonicalSignedDigon => (true, 0.5, GraphTransform::CanonicalSingleEdges),
            };
            let mut config = DsbmConfig::di150(delta, base_seed + i);
            config.nodes_per_cluster = npc;
            config.signed = signed;
            CorpusSpec { config, transform }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub property: Property,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub worst_violation: f64,
    pub failing_seeds: Vec<u64>,
    pub detail: Option<String>,
}

impl PropertyOutcome {
    fn new(property: Property) -> Self {
        PropertyOutcome {
            property,
            pass: 0,
            fail: 0,
            skipped: 0,
            worst_violation: 0.0,
            failing_seeds: Vec::new(),
            detail: None,
        }
    }

    fn record(&mut self, seed: u64, result: CheckResult) {
        match result {
            CheckResult::Pass(v) => {
                self.pass += 1;
                self.worst_violation = self.worst_violation.max(v);
            }
            CheckResult::Fail(v, detail) => {
                self.fail += 1;
                self.worst_violation = self.worst_violation.max(v);
                self.failing_seeds.push(seed);
                if self.detail.is_none() {
                    self.detail = detail;
                }
            }
            CheckResult::Skip => self.skipped += 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub corpus: String,
    pub graphs: usize,
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.fail == 0)
    }

    /// Line-oriented `key=value` rendering.
    pub fn render_keyvalue(&self) -> String {
        let mut out = format!("corpus={} graphs={}\n", self.corpus, self.graphs);
        for o in &self.outcomes {
            out.push_str(&format!(
                "property={} pass={} fail={} skipped={} worst={:e}",
                o.property.name(),
                o.pass,
                o.fail,
                o.skipped,
                o.worst_violation
            ));
            if !o.failing_seeds.is_empty() {
                let seeds: Vec<String> = o.failing_seeds.iter().map(u64::to_string).collect();
                out.push_str(&format!(" failing_seeds={}", seeds.join(",")));
            }
            if let Some(d) = &o.detail {
                out.push_str(&format!(" detail={d:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// Aligned summary table.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>6} {:>6} {:>8} {:>12}\n",
            "property", "pass", "fail", "skipped", "worst"
        );
        for o in &self.outcomes {
            out.push_str(&format!(
                "{:<16} {:>6} {:>6} {:>8} {:>12.3e}\n",
                o.property.name(),
                o.pass,
                o.fail,
                o.skipped,
                o.worst_violation
            ));
        }
        out
    }
}

enum CheckResult {
    Pass(f64),
    Fail(f64, Option<String>),
    Skip,
}

impl CheckResult {
    fn threshold(violation: f64, tol: f64) -> CheckResult {
        if violation <= tol {
            CheckResult::Pass(violation)
        } else {
            CheckResult::Fail(violation, None)
        }
    }
}

/// Lazily computed per-graph artifacts shared between properties.
struct Ctx<'a> {
    g: &'a Digraph,
    bundle: LaplacianBundle,
    smb: Option<SignMagneticBundle>,
    lq_eigs: Option<Vec<f64>>,
    norm_eigs: Option<Option<Vec<f64>>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a Digraph) -> Self {
        Ctx {
            g,
            bundle: build_quaternionic(g),
            smb: None,
            lq_eigs: None,
            norm_eigs: None,
        }
    }

    fn smb(&mut self) -> &SignMagneticBundle {
        if self.smb.is_none() {
            self.smb = Some(sign_magnetic_laplacian(self.g));
        }
        self.smb.as_ref().unwrap()
    }

    fn lq_eigs(&mut self) -> Result<&[f64]> {
        if self.lq_eigs.is_none() {
            self.lq_eigs = Some(hermitian_eigenvalues(&self.bundle.lq, 0.0)?);
        }
        Ok(self.lq_eigs.as_ref().unwrap())
    }

    fn norm_eigs(&mut self) -> Result<Option<&[f64]>> {
        if self.norm_eigs.is_none() {
            self.norm_eigs = Some(match &self.bundle.lq_norm {
                Some(norm) => Some(hermitian_eigenvalues(norm, 0.0)?),
                None => None,
            });
        }
        Ok(self.norm_eigs.as_ref().unwrap().as_deref())
    }
}

fn ones(n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| 1.0)
}

fn check_property(ctx: &mut Ctx, property: Property, tol: &Tolerances) -> Result<CheckResult> {
    let g = ctx.g;
    let n = g.n();
    let a = g.adjacency();
    Ok(match property {
        Property::Hermitian => {
            let mut v = ctx.bundle.hq.hermitian_deviation()?;
            v = v.max(ctx.bundle.lq.hermitian_deviation()?);
            if let Some(norm) = &ctx.bundle.lq_norm {
                v = v.max(norm.hermitian_deviation()?);
            }
            CheckResult::threshold(v, tol.exact)
        }
        Property::Orthogonality => {
            let hq = &ctx.bundle.hq;
            let mut worst = 0u8;
            for u in 0..n {
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    let q = hq.get(u, v);
                    let groups = (q.r != 0.0) as u8
                        + (q.i != 0.0) as u8
                        + (q.j != 0.0 || q.k != 0.0) as u8;
                    worst = worst.max(groups);
                }
            }
            CheckResult::threshold(worst.saturating_sub(1) as f64, tol.exact)
        }
        Property::Thm1 => {
            let symmetric = a.max_abs_diff(&a.transpose()) == 0.0;
            let nonnegative = a.data().iter().all(|&w| w >= 0.0);
            if !(symmetric && nonnegative) {
                return Ok(CheckResult::Skip);
            }
            let l = classical_laplacian(g, false)?;
            let mut v = ctx.bundle.lq.re().max_abs_diff(&l);
            for t in 1..4 {
                v = v.max(ctx.bundle.lq.comp(t).max_abs());
            }
            CheckResult::threshold(v, tol.exact)
        }
        Property::Thm2 => {
            let mut in_scope = true;
            'outer: for u in 0..n {
                for v in 0..n {
                    let w = a[(u, v)];
                    if w != 0.0 && w != a[(v, u)] && a[(v, u)] != 0.0 {
                        in_scope = false;
                        break 'outer;
                    }
                }
            }
            // Scope is: every entry is zero or equals its transpose partner.
            // A single directed edge (A_vu = 0) still qualifies.
            if !in_scope {
                return Ok(CheckResult::Skip);
            }
            let lq = ctx.bundle.lq.clone();
            let smb = ctx.smb();
            let mut v = lq.re().max_abs_diff(&smb.lsigma.re);
            v = v.max(lq.comp(1).max_abs_diff(&smb.lsigma.im));
            v = v.max(lq.comp(2).max_abs());
            v = v.max(lq.comp(3).max_abs());
            CheckResult::threshold(v, tol.algebraic)
        }
        Property::Thm3 => {
            let (o, nn) = (ctx.bundle.o.clone(), ctx.bundle.n.clone());
            let symmetric_digon_exists = (0..n).any(|u| {
                (0..n).any(|v| u != v && o[(u, v)] == 1.0 && nn[(u, v)] == 0.0)
            });
            if symmetric_digon_exists {
                return Ok(CheckResult::Skip);
            }
            let t = &ctx.bundle.t;
            let h21 = nn.hadamard(&(&t.upper() - &t.transpose().lower()));
            let h31 = -&h21;
            let mask = &ones(n) - &o;
            let smb = ctx.smb();
            let rhs = QMatrix::from_components([
                smb.hsigma.re.hadamard(&mask),
                smb.hsigma.im.hadamard(&mask),
                o.hadamard(&ctx.bundle.as2.hadamard(&h21)),
                o.hadamard(&ctx.bundle.as3.hadamard(&h31)),
            ])?;
            CheckResult::threshold(ctx.bundle.hq.max_abs_diff(&rhs), tol.algebraic)
        }
        Property::Psd => {
            let scale = ctx.bundle.lq.frob_norm().max(1.0);
            let norm_scale = ctx
                .bundle
                .lq_norm
                .as_ref()
                .map(|m| m.frob_norm().max(1.0))
                .unwrap_or(1.0);
            let lq_min = *ctx
                .lq_eigs()?
                .first()
                .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
            let mut viol = (-lq_min).max(0.0) / scale;
            if let Some(eigs) = ctx.norm_eigs()? {
                viol = viol.max((-eigs[0]).max(0.0) / norm_scale);
            }
            CheckResult::threshold(viol, tol.spectral_rel)
        }
        Property::LambdaMax => match ctx.norm_eigs()? {
            None => CheckResult::Skip,
            Some(eigs) => {
                let max = *eigs.last().unwrap();
                CheckResult::threshold((max - 2.0).max(0.0) / 2.0, tol.spectral_rel)
            }
        },
        Property::Reconstruction => {
            let canonical = canonical_single_edge_form(g);
            if canonical.adjacency() != a {
                // A negative single edge is indistinguishable in Hq from its
                // reversed positive twin, so exact recovery is out of scope.
                return Ok(CheckResult::Skip);
            }
            let rebuilt = reconstruct_adjacency(&ctx.bundle.hq)?;
            CheckResult::threshold(rebuilt.max_abs_diff(a), tol.exact)
        }
    })
}

/// Run the selected properties over every graph of the corpus.
pub fn verify_corpus(
    corpus: &[CorpusSpec],
    properties: &[Property],
    tol: &Tolerances,
    corpus_name: &str,
) -> Result<VerificationReport> {
    let mut outcomes: Vec<PropertyOutcome> =
        properties.iter().map(|&p| PropertyOutcome::new(p)).collect();
    for spec in corpus {
        let g = spec.realize()?;
        let mut ctx = Ctx::new(&g);
        for outcome in outcomes.iter_mut() {
            let result = check_property(&mut ctx, outcome.property, tol)?;
            outcome.record(spec.config.seed, result);
        }
    }
    Ok(VerificationReport {
        corpus: corpus_name.to_string(),
        graphs: corpus.len(),
        outcomes,
    })
}

/// Check a bare matrix (e.g. read back from a file): Hermitian structure and,
/// when it holds, the spectral bounds. The Hermitian detail names the
/// offending index on failure.
pub fn verify_matrix(
    q: &QMatrix,
    properties: &[Property],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let mut outcomes = Vec::new();
    for &property in properties {
        let mut outcome = PropertyOutcome::new(property);
        let result = match property {
            Property::Hermitian => {
                let deviation = q.hermitian_deviation()?;
                if deviation <= tol.algebraic {
                    CheckResult::Pass(deviation)
                } else {
                    let qt = q.conjugate_transpose();
                    let mut at = (0, 0);
                    let mut worst = 0.0;
                    for u in 0..q.rows() {
                        for v in 0..q.cols() {
                            let d = (q.get(u, v) - qt.get(u, v)).max_abs();
                            if d > worst {
                                worst = d;
                                at = (u, v);
                            }
                        }
                    }
                    CheckResult::Fail(
                        deviation,
                        Some(format!("worst deviation at ({}, {})", at.0, at.1)),
                    )
                }
            }
            Property::Psd => match hermitian_eigenvalues(q, tol.algebraic) {
                Ok(eigs) => {
                    let scale = q.frob_norm().max(1.0);
                    let viol = eigs.first().map_or(0.0, |&l| (-l).max(0.0) / scale);
                    CheckResult::threshold(viol, tol.spectral_rel)
                }
                Err(Error::NotHermitian { deviation, .. }) => {
                    CheckResult::Fail(deviation, Some("matrix is not Hermitian".into()))
                }
                Err(e) => return Err(e),
            },
            Property::LambdaMax => match hermitian_eigenvalues(q, tol.algebraic) {
                Ok(eigs) => {
                    let viol = eigs.last().map_or(0.0, |&l| (l - 2.0).max(0.0) / 2.0);
                    CheckResult::threshold(viol, tol.spectral_rel)
                }
                Err(Error::NotHermitian { deviation, .. }) => {
                    CheckResult::Fail(deviation, Some("matrix is not Hermitian".into()))
                }
                Err(e) => return Err(e),
            },
            _ => CheckResult::Skip,
        };
        outcome.record(0, result);
        outcomes.push(outcome);
    }
    Ok(VerificationReport {
        corpus: "matrix".into(),
        graphs: 1,
        outcomes,
    })
}
