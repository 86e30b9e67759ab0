//! Recursive correction of approximate representations on chordal graphs.
//!
//! Let `v₀` be the last vertex of a construction sequence and `V₀` the
//! clique it was attached to. One level of the recursion
//!
//! 1. jointly diagonalizes the (nearly commuting) data of `V₀`,
//! 2. rounds each spectrum onto a finite grid, which turns every `V₀`
//!    vertex into an exact partition of unity `{P_{v,d}}` with sample
//!    points `x_{v,d}`,
//! 3. corrects the graph without `v₀`, with the `V₀` vertices carried as
//!    partitions,
//! 4. rebuilds each `V₀` generator as `Σ_d x_{v,d}·P'_{v,d}` from the
//!    corrected partitions,
//! 5. forms the common refinement `Q_1..Q_r` of those partitions and
//!    corrects `v₀` inside every corner `Q_j M Q_j` separately, so that it
//!    commutes with everything in `V₀`.
//!
//! Vertices outside `V₀ ∪ {v₀}` keep whatever the recursive call produced.
//! The base case is a single vertex, made exact on its own.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chordal::{construction_sequence, Graph, GraphError, Step};
use crate::linalg::{
    apply_right, apply_two_sided, dot, hermitian_eig, hs_norm, mat_vec, polar_unitary,
    unitarity_defect, ComplexMatrix, C64,
};
use crate::reps::{
    partition_defect, relation_defect, rep_distance, root_of_unity, DefectReport, Rep,
    RepDistance, RepError, VertexData, VertexGroup,
};

const TAU: f64 = std::f64::consts::TAU;

/// Largest accepted `‖U*U − I‖₂` for an input generator.
pub const UNITARITY_PRECONDITION: f64 = 0.1;
/// Largest accepted partition-axiom violation for an input partition.
pub const PARTITION_PRECONDITION: f64 = 0.5;
/// Largest accepted distance of a diagonal entry from the unit circle.
pub const CIRCLE_TOLERANCE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum StabilizeError {
    #[error("graph is not chordal: induced cycle {}", .0.join(" – "))]
    NotChordal(Vec<String>),
    #[error("generator at `{vertex}` is too far from unitary (‖U*U − I‖₂ = {defect:.3e})")]
    TooFarFromUnitary { vertex: String, defect: f64 },
    #[error("partition at `{vertex}` is too far from a partition of unity (defect {defect:.3e})")]
    PartitionTooFar { vertex: String, defect: f64 },
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("diagonal entry {value} is off the unit circle by {deviation:.3e}")]
    OffCircleEntry { value: C64, deviation: f64 },
    #[error("diagonal entry {value} does not round to a class of Partition({m})")]
    UnresolvableClass { value: C64, m: u32 },
    #[error("partitions do not share a basis")]
    BasisMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Rep(#[from] RepError),
}

impl From<GraphError> for StabilizeError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NotChordal(cycle) => StabilizeError::NotChordal(cycle),
            other => StabilizeError::Rep(RepError::Graph(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetPolicy {
    /// Arcs start at angle 0.
    Fixed,
    /// Rotate the arc grid to keep eigenvalue phases away from arc
    /// boundaries.
    MaxMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizeParams {
    /// Number of arcs the circle is cut into at ℤ vertices.
    pub arcs_m: u32,
    pub offset_policy: OffsetPolicy,
    /// Jacobi refinement sweeps after the random-combination eigenbasis.
    pub jacobi_sweeps: usize,
    /// Output defect regarded as exact.
    pub exact_tol: f64,
    /// Seed for the random Hermitian combination in joint diagonalization.
    pub seed: u64,
}

impl Default for StabilizeParams {
    fn default() -> Self {
        Self {
            arcs_m: 32,
            offset_policy: OffsetPolicy::MaxMargin,
            jacobi_sweeps: 3,
            exact_tol: 1e-10,
            seed: 0,
        }
    }
}

impl StabilizeParams {
    pub fn validate(&self) -> Result<(), StabilizeError> {
        if self.arcs_m < 2 {
            return Err(StabilizeError::InvalidParams(format!("arcs_m must be >= 2, got {}", self.arcs_m)));
        }
        if self.exact_tol.is_nan() || self.exact_tol <= 0.0 {
            return Err(StabilizeError::InvalidParams(format!(
                "exact_tol must be positive, got {}",
                self.exact_tol
            )));
        }
        Ok(())
    }
}

/// Result of [`joint_diagonalize`].
#[derive(Debug, Clone)]
pub struct JointDiagonalization {
    /// Unitary `W`; its columns are the common (approximate) eigenvectors.
    pub basis: ComplexMatrix,
    /// Diagonal of `W*·m·W` for every input `m`.
    pub diags: Vec<Vec<C64>>,
    /// Largest `‖offdiag(W*·m·W)‖₂` over the inputs.
    pub residual: f64,
}

/// Common approximate eigenbasis of nearly commuting normal matrices.
///
/// The starting basis diagonalizes a seeded random Hermitian combination
/// `Σ α_k(M_k + M_k*) + β_k·i(M_k − M_k*)`; it is then refined by
/// `params.jacobi_sweeps` sweeps of Jacobi rotations, each chosen in closed
/// form to minimize the total off-diagonal mass of the Hermitian and
/// anti-Hermitian parts of all inputs.
pub fn joint_diagonalize(mats: &[ComplexMatrix], params: &StabilizeParams) -> JointDiagonalization {
    assert!(!mats.is_empty(), "joint_diagonalize needs at least one matrix");
    let n = mats[0].dim();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut combo = ComplexMatrix::zeros(n);
    let mut parts = Vec::with_capacity(2 * mats.len());
    for m in mats {
        let adj = m.adjoint();
        let sum = m + &adj;
        let diff = (m - &adj).scale(C64::i());
        let alpha: f64 = rng.random_range(-1.0..1.0);
        let beta: f64 = rng.random_range(-1.0..1.0);
        combo = &combo + &(&sum.scale_real(alpha) + &diff.scale_real(beta));
        // Hermitian and anti-Hermitian halves, both Hermitian matrices.
        parts.push(sum.scale_real(0.5).symmetrize());
        parts.push(diff.scale_real(-0.5).symmetrize());
    }
    let mut w = hermitian_eig(&combo.symmetrize())
        .expect("symmetrized combination is Hermitian")
        .basis;
    let mut rotated: Vec<ComplexMatrix> =
        parts.iter().map(|h| w.adjoint().matmul(h).matmul(&w)).collect();

    for _ in 0..params.jacobi_sweeps {
        let mut moved = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if let Some(g) = joint_rotation(&rotated, p, q) {
                    for t in rotated.iter_mut() {
                        apply_two_sided(t, p, q, &g);
                    }
                    apply_right(&mut w, p, q, &g);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }

    let mut diags = Vec::with_capacity(mats.len());
    let mut residual = 0.0f64;
    let w_adj = w.adjoint();
    for m in mats {
        let t = w_adj.matmul(m).matmul(&w);
        residual = residual.max(hs_norm(&t.off_diagonal()));
        diags.push(t.diagonal());
    }
    JointDiagonalization { basis: w, diags, residual }
}

/// Closed-form Jacobi rotation on `(p, q)` that minimizes
/// `Σ_k |T_k[p, q]|²` over Hermitian `T_k`. Equivalently it maximizes
/// `Σ_k (T'_k[p,p] − T'_k[q,q])²`, a quadratic form in the unit vector
/// `(cos 2θ, sin 2θ cos φ, sin 2θ sin φ)` whose top eigenvector gives the
/// angles.
fn joint_rotation(ts: &[ComplexMatrix], p: usize, q: usize) -> Option<[[C64; 2]; 2]> {
    let mut off = 0.0;
    let mut gram = [[0.0f64; 3]; 3];
    for t in ts {
        let apq = t[(p, q)];
        off += apq.norm_sqr();
        let g = [t[(p, p)].re - t[(q, q)].re, 2.0 * apq.re, -2.0 * apq.im];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] += g[i] * g[j];
            }
        }
    }
    if off <= 1e-30 {
        return None;
    }
    let g3 = ComplexMatrix::from_real(&[&gram[0], &gram[1], &gram[2]]);
    let eig = hermitian_eig(&g3).expect("real symmetric 3x3");
    let mut v = [eig.basis[(0, 2)].re, eig.basis[(1, 2)].re, eig.basis[(2, 2)].re];
    if v[0] < 0.0 {
        v = [-v[0], -v[1], -v[2]];
    }
    // atan2 keeps small angles accurate, where sqrt((1 + cos 2θ)/2) would
    // round to 1.
    let sin2 = v[1].hypot(v[2]);
    let theta = 0.5 * sin2.atan2(v[0]);
    if theta.abs() < 1e-15 {
        return None;
    }
    let c = theta.cos();
    let s = C64::new(v[1], v[2]) / sin2 * theta.sin();
    Some([[C64::new(c, 0.0), -s.conj()], [s, C64::new(c, 0.0)]])
}

/// Grid rounding of one vertex's joint spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPartition {
    /// Class of each diagonal index.
    pub labels: Vec<usize>,
    /// Sample point `x_d` of each class `d` (a complex number on the unit
    /// circle, or the class index itself for partitions).
    pub points: Vec<C64>,
    /// Grid rotation used for ℤ vertices (0 otherwise).
    pub offset: f64,
    /// Joint basis the labels refer to; `None` means the standard basis.
    pub basis: Option<Arc<ComplexMatrix>>,
}

impl SpectralPartition {
    pub fn classes(&self) -> usize {
        self.points.len()
    }

    pub fn with_basis(mut self, basis: Arc<ComplexMatrix>) -> Self {
        self.basis = Some(basis);
        self
    }

    /// Index sets of the classes, `classes()` of them (possibly empty).
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes()];
        for (i, &d) in self.labels.iter().enumerate() {
            out[d].push(i);
        }
        out
    }

    /// Exact projections `W·1_{class d}·W*`.
    pub fn projections(&self) -> Vec<ComplexMatrix> {
        let dim = self.labels.len();
        self.class_indices()
            .iter()
            .map(|idx| match &self.basis {
                Some(w) => span_projection(w, idx),
                None => {
                    let mut p = ComplexMatrix::zeros(dim);
                    for &i in idx {
                        p[(i, i)] = C64::new(1.0, 0.0);
                    }
                    p
                }
            })
            .collect()
    }
}

fn circle_phase(z: C64) -> Result<f64, StabilizeError> {
    let deviation = (z.norm() - 1.0).abs();
    if deviation > CIRCLE_TOLERANCE {
        return Err(StabilizeError::OffCircleEntry { value: z, deviation });
    }
    Ok(z.arg().rem_euclid(TAU))
}

/// Distance from `theta` to the nearest arc boundary for a grid of width
/// `width` rotated by `offset`.
fn boundary_margin(theta: f64, offset: f64, width: f64) -> f64 {
    let r = (theta - offset).rem_euclid(width);
    r.min(width - r)
}

/// Rounds a joint spectrum onto the grid of its vertex type.
///
/// * ℤ: `arcs_m` half-open arcs of equal width, rotated by the offset
///   policy; sample points are the arc midpoints.
/// * ℤ/n: `n` arcs centered at the n-th roots of unity; sample points are
///   the roots.
/// * Partition(m): nearest class index.
pub fn spectral_partition(
    diag: &[C64],
    vg: VertexGroup,
    params: &StabilizeParams,
) -> Result<SpectralPartition, StabilizeError> {
    match vg {
        VertexGroup::FreeAbelian => {
            let m = params.arcs_m;
            let width = TAU / m as f64;
            let phases = diag.iter().map(|&z| circle_phase(z)).collect::<Result<Vec<_>, _>>()?;
            let offset = match params.offset_policy {
                OffsetPolicy::Fixed => 0.0,
                OffsetPolicy::MaxMargin => {
                    let mut best = (f64::NEG_INFINITY, 0.0);
                    for k in 0..m {
                        let offset = k as f64 * width / m as f64;
                        let margin = phases
                            .iter()
                            .map(|&t| boundary_margin(t, offset, width))
                            .fold(f64::INFINITY, f64::min);
                        if margin > best.0 {
                            best = (margin, offset);
                        }
                    }
                    best.1
                }
            };
            let labels = phases
                .iter()
                .map(|&t| (((t - offset).rem_euclid(TAU) / width) as usize).min(m as usize - 1))
                .collect();
            let points = (0..m)
                .map(|d| C64::from_polar(1.0, offset + (d as f64 + 0.5) * width))
                .collect();
            Ok(SpectralPartition { labels, points, offset, basis: None })
        }
        VertexGroup::Cyclic(n) => {
            let labels = diag
                .iter()
                .map(|&z| {
                    let t = circle_phase(z)?;
                    Ok(((t * n as f64 / TAU).round() as u64 % n as u64) as usize)
                })
                .collect::<Result<Vec<_>, StabilizeError>>()?;
            let points = (0..n as u64).map(|k| root_of_unity(k, n)).collect();
            Ok(SpectralPartition { labels, points, offset: 0.0, basis: None })
        }
        VertexGroup::Partition(m) => {
            let labels = diag
                .iter()
                .map(|&z| {
                    let x = z.re;
                    if z.im.abs() > 0.5 || x < -0.5 || x > m as f64 - 0.5 {
                        return Err(StabilizeError::UnresolvableClass { value: z, m });
                    }
                    Ok((x.round().max(0.0) as usize).min(m as usize - 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let points = (0..m).map(|d| C64::new(d as f64, 0.0)).collect();
            Ok(SpectralPartition { labels, points, offset: 0.0, basis: None })
        }
    }
}

/// Common refinement of several commuting partitions of unity, as index
/// blocks in one orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPartition {
    /// Unitary whose columns carry the blocks; `None` means the standard
    /// basis.
    pub basis: Option<Arc<ComplexMatrix>>,
    pub dim: usize,
    /// Nonempty, disjoint index sets covering `0..dim`.
    pub blocks: Vec<Vec<usize>>,
    /// Label tuple of each block (one entry per input partition).
    pub labels: Vec<Vec<usize>>,
}

impl GeneratedPartition {
    /// The trivial partition with one block.
    pub fn whole(dim: usize) -> Self {
        Self { basis: None, dim, blocks: vec![(0..dim).collect()], labels: vec![vec![]] }
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Orthonormal columns spanning block `j`.
    pub fn frame(&self, j: usize) -> Vec<Vec<C64>> {
        self.blocks[j]
            .iter()
            .map(|&c| match &self.basis {
                Some(w) => w.column(c),
                None => {
                    let mut e = vec![C64::new(0.0, 0.0); self.dim];
                    e[c] = C64::new(1.0, 0.0);
                    e
                }
            })
            .collect()
    }

    /// Orthogonal projection `Q_j`.
    pub fn projection(&self, j: usize) -> ComplexMatrix {
        expand(&ComplexMatrix::identity(self.blocks[j].len()), &self.frame(j), self.dim)
    }
}

/// Nonempty intersections of one class from each input partition, in
/// lexicographic order of their label tuples.
pub fn generated_partition(parts: &[SpectralPartition]) -> Result<GeneratedPartition, StabilizeError> {
    let Some(first) = parts.first() else {
        return Err(StabilizeError::ShapeMismatch("no partitions given".into()));
    };
    let dim = first.labels.len();
    for p in &parts[1..] {
        let same_basis = match (&first.basis, &p.basis) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        };
        if !same_basis || p.labels.len() != dim {
            return Err(StabilizeError::BasisMismatch);
        }
    }
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let key: Vec<usize> = parts.iter().map(|p| p.labels[i]).collect();
        groups.entry(key).or_default().push(i);
    }
    let (labels, blocks) = groups.into_iter().unzip();
    Ok(GeneratedPartition { basis: first.basis.clone(), dim, blocks, labels })
}

/// Hermitian matrices whose joint eigenspaces are those of a vertex datum:
/// the two Hermitian parts of a generator, or `Σ_d d·P_d` for a partition.
fn hermitian_views(d: &VertexData) -> Vec<ComplexMatrix> {
    match d {
        VertexData::Matrix(u) => {
            let adj = u.adjoint();
            vec![
                (u + &adj).scale_real(0.5).symmetrize(),
                (u - &adj).scale(C64::new(0.0, -0.5)).symmetrize(),
            ]
        }
        VertexData::Projections(ps) => vec![class_operator(ps)],
    }
}

/// `Σ_d d·P_d`, symmetrized.
fn class_operator(ps: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = ps[0].dim();
    let mut h = ComplexMatrix::zeros(dim);
    for (d, p) in ps.iter().enumerate() {
        h = &h + &p.scale_real(d as f64);
    }
    h.symmetrize()
}

/// Joint eigenspaces of exactly commuting vertex data, found by refining
/// one Hermitian view at a time: each current block is compressed,
/// diagonalized, and split wherever consecutive eigenvalues differ by more
/// than `gap`. With no data the result is the single whole-space block.
pub fn commuting_blocks(data: &[&VertexData], dim: usize, gap: f64) -> GeneratedPartition {
    let mut frames: Vec<(Vec<Vec<C64>>, Vec<usize>)> = vec![(
        (0..dim)
            .map(|i| {
                let mut e = vec![C64::new(0.0, 0.0); dim];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect(),
        Vec::new(),
    )];
    for h in data.iter().flat_map(|d| hermitian_views(d)) {
        let mut next = Vec::with_capacity(frames.len());
        for (frame, label) in frames {
            let local = compress(&h, &frame);
            let eig = hermitian_eig(&local).expect("compressed Hermitian is Hermitian");
            let k = frame.len();
            let mut start = 0;
            let mut cluster = 0;
            for i in 1..=k {
                if i == k || eig.eigenvalues[i] - eig.eigenvalues[i - 1] > gap {
                    let cols: Vec<Vec<C64>> = (start..i)
                        .map(|c| {
                            (0..dim)
                                .map(|r| (0..k).map(|j| frame[j][r] * eig.basis[(j, c)]).sum())
                                .collect()
                        })
                        .collect();
                    let mut l = label.clone();
                    l.push(cluster);
                    next.push((cols, l));
                    cluster += 1;
                    start = i;
                }
            }
        }
        frames = next;
    }
    let mut basis = ComplexMatrix::zeros(dim);
    let mut blocks = Vec::with_capacity(frames.len());
    let mut labels = Vec::with_capacity(frames.len());
    let mut col = 0;
    for (frame, label) in frames {
        let mut idx = Vec::with_capacity(frame.len());
        for v in frame {
            for r in 0..dim {
                basis[(r, col)] = v[r];
            }
            idx.push(col);
            col += 1;
        }
        blocks.push(idx);
        labels.push(label);
    }
    GeneratedPartition { basis: Some(Arc::new(basis)), dim, blocks, labels }
}

/// `F*·m·F` for a frame `F` of orthonormal columns.
fn compress(m: &ComplexMatrix, frame: &[Vec<C64>]) -> ComplexMatrix {
    let k = frame.len();
    let images: Vec<Vec<C64>> = frame.iter().map(|f| mat_vec(m, f)).collect();
    let mut out = ComplexMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            out[(i, j)] = dot(&frame[i], &images[j]);
        }
    }
    out
}

/// `F·c·F*`.
fn expand(c: &ComplexMatrix, frame: &[Vec<C64>], dim: usize) -> ComplexMatrix {
    let k = frame.len();
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..k {
        for j in 0..k {
            let cij = c[(i, j)];
            if cij == C64::new(0.0, 0.0) {
                continue;
            }
            for r in 0..dim {
                let a = frame[i][r] * cij;
                for s in 0..dim {
                    out[(r, s)] += a * frame[j][s].conj();
                }
            }
        }
    }
    out
}

/// Projection onto the span of the selected columns of `w`.
fn span_projection(w: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    let frame = w.columns(cols);
    expand(&ComplexMatrix::identity(cols.len()), &frame, w.dim())
}

/// Nearest exact datum for a single vertex of type `vg`.
///
/// ℤ: unitary polar factor. ℤ/n: polar factor with its eigenvalues rounded
/// to the nearest n-th roots of unity. Partition(m): eigenvalues of
/// `Σ_d d·P_d` rounded to the nearest class, projections rebuilt from the
/// eigenvectors.
pub fn exact_vertex_rep(data: &VertexData, vg: VertexGroup) -> VertexData {
    match (vg, data) {
        (VertexGroup::FreeAbelian, VertexData::Matrix(m)) => VertexData::Matrix(polar_unitary(m)),
        (VertexGroup::Cyclic(n), VertexData::Matrix(m)) => {
            let u = polar_unitary(m);
            let jd = joint_diagonalize(std::slice::from_ref(&u), &StabilizeParams::default());
            let diag: Vec<C64> = jd.diags[0]
                .iter()
                .map(|z| {
                    let k = (z.arg().rem_euclid(TAU) * n as f64 / TAU).round() as u64;
                    root_of_unity(k, n)
                })
                .collect();
            let w = &jd.basis;
            VertexData::Matrix(w.matmul(&ComplexMatrix::from_diag(&diag)).mul_adjoint(w))
        }
        (VertexGroup::Partition(m), VertexData::Projections(ps)) => {
            let h = class_operator(ps);
            let eig = hermitian_eig(&h).expect("class operator is Hermitian");
            let labels: Vec<usize> = eig
                .eigenvalues
                .iter()
                .map(|&l| (l.round().max(0.0) as usize).min(m as usize - 1))
                .collect();
            let sp = SpectralPartition {
                labels,
                points: (0..m).map(|d| C64::new(d as f64, 0.0)).collect(),
                offset: 0.0,
                basis: Some(Arc::new(eig.basis)),
            };
            VertexData::Projections(sp.projections())
        }
        (vg, d) => panic!("vertex data {d:?} does not match group {vg}"),
    }
}

/// Corrects `data` inside every corner `Q_j M Q_j` of `gp` and reassembles
/// the direct sum. The result is block diagonal with respect to `gp`.
pub fn corner_correct(data: &VertexData, vg: VertexGroup, gp: &GeneratedPartition) -> VertexData {
    let dim = gp.dim;
    match data {
        VertexData::Matrix(m) => {
            let mut out = ComplexMatrix::zeros(dim);
            for j in 0..gp.blocks.len() {
                let frame = gp.frame(j);
                let local = VertexData::Matrix(compress(m, &frame));
                if let VertexData::Matrix(fixed) = exact_vertex_rep(&local, vg) {
                    out = &out + &expand(&fixed, &frame, dim);
                }
            }
            VertexData::Matrix(out)
        }
        VertexData::Projections(ps) => {
            let mut out = vec![ComplexMatrix::zeros(dim); ps.len()];
            for j in 0..gp.blocks.len() {
                let frame = gp.frame(j);
                let local = VertexData::Projections(ps.iter().map(|p| compress(p, &frame)).collect());
                if let VertexData::Projections(fixed) = exact_vertex_rep(&local, vg) {
                    for (o, f) in out.iter_mut().zip(&fixed) {
                        *o = &*o + &expand(f, &frame, dim);
                    }
                }
            }
            VertexData::Projections(out)
        }
    }
}

/// One level of the recursion, for the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTrace {
    pub depth: usize,
    pub removed: String,
    pub clique: Vec<String>,
    pub clique_size: usize,
    /// Number of corners `v₀` was corrected in (0 for base cases and empty
    /// cliques).
    pub blocks: usize,
    /// Joint diagonalization residual of the clique data.
    pub joint_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizeReport {
    pub distances: RepDistance,
    pub input_defect: DefectReport,
    pub output_defect: DefectReport,
    pub trace: Vec<LevelTrace>,
    pub params: StabilizeParams,
    pub success: bool,
}

/// Corrects `rep` into an exact representation on the same graph and
/// dimension. `report.success` tells whether the output defect is within
/// `params.exact_tol`.
pub fn stabilize(rep: &Rep, params: &StabilizeParams) -> Result<(Rep, StabilizeReport), StabilizeError> {
    params.validate()?;
    let graph = rep.graph();
    let seq = construction_sequence(graph)?;
    let input_defect = relation_defect(rep)?;

    let mut data = Vec::with_capacity(graph.len());
    for (v, d) in rep.data().iter().enumerate() {
        let vertex = graph.name(v).to_string();
        data.push(match d {
            VertexData::Matrix(u) => {
                let defect = unitarity_defect(u);
                if defect > UNITARITY_PRECONDITION {
                    return Err(StabilizeError::TooFarFromUnitary { vertex, defect });
                }
                VertexData::Matrix(polar_unitary(u))
            }
            VertexData::Projections(ps) => {
                let defect = partition_defect(ps, rep.dim());
                if defect > PARTITION_PRECONDITION {
                    return Err(StabilizeError::PartitionTooFar { vertex, defect });
                }
                d.clone()
            }
        });
    }

    let mut trace = Vec::new();
    let ctx = Context { graph, dim: rep.dim(), params };
    let data = ctx.level(&seq.steps, graph.groups().to_vec(), data, &mut trace)?;

    let out = Rep::new(graph.clone(), rep.dim(), data, true)?;
    let output_defect = relation_defect(&out)?;
    let distances = rep_distance(rep, &out)?;
    let success = output_defect.max_defect <= params.exact_tol;
    let report = StabilizeReport {
        distances,
        input_defect,
        output_defect,
        trace,
        params: params.clone(),
        success,
    };
    Ok((out, report))
}

struct Context<'a> {
    graph: &'a Graph,
    dim: usize,
    params: &'a StabilizeParams,
}

impl Context<'_> {
    /// Corrects the subgraph built by `steps` (a prefix of a construction
    /// sequence, hence itself one for the induced subgraph). `groups` and
    /// `data` are indexed by vertex of the full graph; entries outside the
    /// prefix pass through untouched.
    fn level(
        &self,
        steps: &[Step],
        mut groups: Vec<VertexGroup>,
        mut data: Vec<VertexData>,
        trace: &mut Vec<LevelTrace>,
    ) -> Result<Vec<VertexData>, StabilizeError> {
        let Some((last, rest)) = steps.split_last() else {
            return Ok(data);
        };
        let v0 = last.vertex;
        let mut entry = LevelTrace {
            depth: steps.len(),
            removed: self.graph.name(v0).to_string(),
            clique: last.attach.iter().map(|&v| self.graph.name(v).to_string()).collect(),
            clique_size: last.attach.len(),
            blocks: 0,
            joint_residual: 0.0,
        };

        if last.attach.is_empty() {
            trace.push(entry);
            let mut data = self.level(rest, groups.clone(), data, trace)?;
            data[v0] = exact_vertex_rep(&data[v0], groups[v0]);
            return Ok(data);
        }

        // Joint spectrum of the clique and its grid rounding.
        let clique = &last.attach;
        let views: Vec<ComplexMatrix> = clique
            .iter()
            .map(|&v| match &data[v] {
                VertexData::Matrix(u) => u.clone(),
                VertexData::Projections(ps) => class_operator(ps),
            })
            .collect();
        let jd = joint_diagonalize(&views, self.params);
        entry.joint_residual = jd.residual;
        let basis = Arc::new(jd.basis);
        let mut points = Vec::with_capacity(clique.len());
        let saved: Vec<VertexGroup> = clique.iter().map(|&v| groups[v]).collect();
        for (i, &v) in clique.iter().enumerate() {
            let sp = spectral_partition(&jd.diags[i], groups[v], self.params)?.with_basis(basis.clone());
            groups[v] = VertexGroup::Partition(sp.classes() as u32);
            data[v] = VertexData::Projections(sp.projections());
            points.push(sp.points);
        }
        let slot = trace.len();
        trace.push(entry);

        let mut data = self.level(rest, groups.clone(), data, trace)?;

        // Corners of the corrected clique partitions; v₀ is fixed inside each.
        let parts: Vec<&VertexData> = clique.iter().map(|&v| &data[v]).collect();
        let gp = commuting_blocks(&parts, self.dim, 0.5);
        trace[slot].blocks = gp.blocks.len();
        data[v0] = corner_correct(&data[v0], groups[v0], &gp);

        for ((&v, kind), pts) in clique.iter().zip(saved).zip(points) {
            let VertexData::Projections(ps) = &data[v] else {
                unreachable!("clique vertices are carried as partitions");
            };
            data[v] = match kind {
                VertexGroup::Partition(_) => VertexData::Projections(ps.clone()),
                _ => {
                    let mut u = ComplexMatrix::zeros(self.dim);
                    for (p, &x) in ps.iter().zip(&pts) {
                        u = &u + &p.scale(x);
                    }
                    VertexData::Matrix(u)
                }
            };
        }
        Ok(data)
    }
}

/// True iff every defining relation holds to `tol`.
pub fn verify_exact(rep: &Rep, tol: f64) -> Result<(bool, DefectReport), RepError> {
    let report = relation_defect(rep)?;
    Ok((report.max_defect <= tol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_distance, random_unitary};
    use crate::reps::{exact_rep_diagonal, perturb};

    fn diag_unitary(phases: &[f64]) -> ComplexMatrix {
        let d: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        ComplexMatrix::from_diag(&d)
    }

    fn rotate_2x2(m: &ComplexMatrix, theta: f64, phi: f64) -> ComplexMatrix {
        let c = theta.cos();
        let s = C64::from_polar(theta.sin(), phi);
        let g = ComplexMatrix::from_rows(vec![
            vec![C64::new(c, 0.0), -s.conj()],
            vec![s, C64::new(c, 0.0)],
        ])
        .unwrap();
        g.adjoint().matmul(m).matmul(&g)
    }

    #[test]
    fn joint_diag_of_single_diagonal_unitary() {
        let u = diag_unitary(&[0.3, 1.7, 2.9]);
        let jd = joint_diagonalize(&[u], &StabilizeParams::default());
        assert!(jd.residual <= 1e-12);
        assert!(unitarity_defect(&jd.basis) <= 1e-12);
    }

    #[test]
    fn joint_diag_of_commuting_unitaries() {
        for seed in 0..5 {
            let w = random_unitary(8, seed);
            let a = w.matmul(&diag_unitary(&[0.1, 0.1, 0.5, 0.5, 1.0, 2.0, 3.0, 4.0])).mul_adjoint(&w);
            let b = w.matmul(&diag_unitary(&[1.0, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0])).mul_adjoint(&w);
            let jd = joint_diagonalize(&[a, b], &StabilizeParams::default());
            assert!(jd.residual <= 1e-9 * 8.0, "residual {}", jd.residual);
            assert!(unitarity_defect(&jd.basis) <= 1e-12);
        }
    }

    /// Total off-diagonal mass `sqrt(Σ_k ‖offdiag(G*·M_k·G)‖₂²)`, the
    /// quantity the Jacobi step minimizes.
    fn total_mass(mats: &[ComplexMatrix], w: &ComplexMatrix) -> f64 {
        mats.iter()
            .map(|m| hs_norm(&w.adjoint().matmul(m).matmul(w).off_diagonal()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Brute-force oracle: best total mass over a 100 × 100 grid of Jacobi
    /// angles for a 2×2 pair.
    fn grid_mass(mats: &[ComplexMatrix]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..100 {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / 100.0;
            for j in 0..100 {
                let phi = TAU * j as f64 / 100.0;
                let rotated: Vec<ComplexMatrix> = mats.iter().map(|m| rotate_2x2(m, theta, phi)).collect();
                best = best.min(total_mass(&rotated, &ComplexMatrix::identity(2)));
            }
        }
        best
    }

    #[test]
    fn joint_diag_2x2_beats_angle_grid() {
        let g = Graph::uniform(&["a", "b"], &[("a", "b")], VertexGroup::FreeAbelian).unwrap();
        for seed in 0..5 {
            // Scale delta until the commutator defect is about 1e-2.
            let mut delta = 5e-3;
            let mut r = perturb(&exact_rep_diagonal(&g, 2, seed), delta, seed + 7);
            for _ in 0..40 {
                let d = relation_defect(&r).unwrap().max_defect;
                if (d - 1e-2).abs() < 1e-3 {
                    break;
                }
                delta *= 1e-2 / d.max(1e-6);
                r = perturb(&exact_rep_diagonal(&g, 2, seed), delta, seed + 7);
            }
            let mats: Vec<ComplexMatrix> = r.data().iter().map(|d| d.as_matrix().unwrap().clone()).collect();
            let oracle = grid_mass(&mats);
            let jd = joint_diagonalize(&mats, &StabilizeParams::default());
            let ours = total_mass(&mats, &jd.basis);
            assert!(ours <= oracle + 1e-12, "seed {seed}: {ours} > {oracle}");
            assert!(jd.residual <= ours);
        }
    }

    #[test]
    fn joint_rotation_minimizes_pair_mass() {
        // For a single Hermitian 2x2, the rotation must diagonalize exactly.
        let h = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, 0.0), C64::new(0.3, -0.4)],
            vec![C64::new(0.3, 0.4), C64::new(-0.5, 0.0)],
        ])
        .unwrap();
        let mut t = h.clone();
        let g = joint_rotation(std::slice::from_ref(&t), 0, 1).unwrap();
        apply_two_sided(&mut t, 0, 1, &g);
        assert!(t[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn spectral_partition_examples() {
        let p = StabilizeParams::default();
        let sp = spectral_partition(
            &[C64::new(1.0, 0.0), C64::from_polar(1.0, 0.2)],
            VertexGroup::Cyclic(2),
            &p,
        )
        .unwrap();
        assert_eq!(sp.labels, vec![0, 0]);
        assert_eq!(sp.points[0], C64::new(1.0, 0.0));

        let fixed = StabilizeParams { arcs_m: 4, offset_policy: OffsetPolicy::Fixed, ..p.clone() };
        let sp = spectral_partition(
            &[C64::from_polar(1.0, 0.3 * std::f64::consts::PI)],
            VertexGroup::FreeAbelian,
            &fixed,
        )
        .unwrap();
        assert_eq!(sp.labels, vec![0]);
        assert!((sp.points[0] - C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);

        let sp = spectral_partition(
            &[C64::new(0.97, 0.0), C64::new(0.02, 0.0)],
            VertexGroup::Partition(2),
            &p,
        )
        .unwrap();
        assert_eq!(sp.labels, vec![1, 0]);

        assert!(matches!(
            spectral_partition(&[C64::new(0.2, 0.0)], VertexGroup::FreeAbelian, &p),
            Err(StabilizeError::OffCircleEntry { .. })
        ));
        assert!(matches!(
            spectral_partition(&[C64::new(2.7, 0.0)], VertexGroup::Partition(2), &p),
            Err(StabilizeError::UnresolvableClass { .. })
        ));
    }

    #[test]
    fn max_margin_keeps_midpoints() {
        let p = StabilizeParams { arcs_m: 4, ..StabilizeParams::default() };
        let w = TAU / 4.0;
        let diag: Vec<C64> = [0, 1, 3].iter().map(|&d| C64::from_polar(1.0, (d as f64 + 0.5) * w)).collect();
        let sp = spectral_partition(&diag, VertexGroup::FreeAbelian, &p).unwrap();
        assert_eq!(sp.offset, 0.0);
        assert_eq!(sp.labels, vec![0, 1, 3]);
    }

    #[test]
    fn max_margin_moves_boundaries_away() {
        let p = StabilizeParams { arcs_m: 8, ..StabilizeParams::default() };
        // Phases right on the offset-0 boundaries.
        let diag: Vec<C64> = (0..8).map(|d| C64::from_polar(1.0, d as f64 * TAU / 8.0 + 1e-9)).collect();
        let sp = spectral_partition(&diag, VertexGroup::FreeAbelian, &p).unwrap();
        assert!(sp.offset > 0.0);
        let width = TAU / 8.0;
        for z in &diag {
            assert!(boundary_margin(z.arg().rem_euclid(TAU), sp.offset, width) > 0.3 * width);
        }
    }

    fn labels_part(labels: Vec<usize>, classes: usize) -> SpectralPartition {
        SpectralPartition {
            labels,
            points: (0..classes).map(|d| C64::new(d as f64, 0.0)).collect(),
            offset: 0.0,
            basis: None,
        }
    }

    #[test]
    fn generated_partition_examples() {
        let one = labels_part(vec![0, 0, 1], 2);
        let gp = generated_partition(&[one]).unwrap();
        assert_eq!(gp.blocks, vec![vec![0, 1], vec![2]]);

        let a = labels_part(vec![0, 0, 1, 1], 2);
        let b = labels_part(vec![0, 1, 0, 1], 2);
        let gp = generated_partition(&[a.clone(), b]).unwrap();
        assert_eq!(gp.blocks, vec![vec![0], vec![1], vec![2], vec![3]]);

        let c = labels_part(vec![0, 0, 1, 1], 2);
        let gp = generated_partition(&[a.clone(), c]).unwrap();
        // (0,1) and (1,0) never occur.
        assert_eq!(gp.blocks.len(), 2);
        let mut sum = ComplexMatrix::zeros(4);
        for j in 0..gp.blocks.len() {
            sum = &sum + &gp.projection(j);
        }
        assert!(hs_distance(&sum, &ComplexMatrix::identity(4)) == 0.0);

        let other = labels_part(vec![0, 1, 0], 2);
        assert!(matches!(generated_partition(&[a, other]), Err(StabilizeError::BasisMismatch)));
    }

    #[test]
    fn generated_partition_blocks_refine_inputs() {
        let w = Arc::new(random_unitary(6, 3));
        let a = labels_part(vec![0, 1, 2, 0, 1, 2], 3).with_basis(w.clone());
        let b = labels_part(vec![0, 0, 1, 1, 0, 0], 2).with_basis(w.clone());
        let gp = generated_partition(&[a.clone(), b.clone()]).unwrap();
        let qs: Vec<ComplexMatrix> = (0..gp.blocks.len()).map(|j| gp.projection(j)).collect();
        let mut sum = ComplexMatrix::zeros(6);
        for (i, q) in qs.iter().enumerate() {
            sum = &sum + q;
            for r in &qs[i + 1..] {
                assert!(hs_norm(&q.matmul(r)) <= 1e-13);
            }
            for part in [&a, &b] {
                // Q_j lies under exactly one class projection.
                let inside = part
                    .projections()
                    .iter()
                    .filter(|p| hs_distance(&p.matmul(q), q) <= 1e-13)
                    .count();
                assert_eq!(inside, 1);
            }
        }
        assert!(hs_distance(&sum, &ComplexMatrix::identity(6)) <= 1e-13);
    }

    #[test]
    fn exact_vertex_rep_examples() {
        let u = ComplexMatrix::from_diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, 0.2)]);
        let VertexData::Matrix(out) = exact_vertex_rep(&VertexData::Matrix(u.clone()), VertexGroup::Cyclic(2))
        else {
            panic!()
        };
        assert!(hs_distance(&out, &ComplexMatrix::identity(2)) < 1e-14);
        let expected = 2.0 * 0.1f64.sin() / 2f64.sqrt();
        assert!((hs_distance(&out, &u) - expected).abs() < 1e-12);

        let w = random_unitary(4, 8);
        let VertexData::Matrix(same) = exact_vertex_rep(&VertexData::Matrix(w.clone()), VertexGroup::FreeAbelian)
        else {
            panic!()
        };
        assert!(hs_distance(&same, &w) < 1e-12);

        let p = w.matmul(&ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.0, 0.0])).mul_adjoint(&w);
        let q = &ComplexMatrix::identity(4) - &p;
        let pair = VertexData::Projections(vec![p.clone(), q.clone()]);
        let VertexData::Projections(out) = exact_vertex_rep(&pair, VertexGroup::Partition(2)) else {
            panic!()
        };
        assert!(hs_distance(&out[0], &p) < 1e-12);
        assert!(hs_distance(&out[1], &q) < 1e-12);
    }

    #[test]
    fn cyclic_exactification_satisfies_torsion() {
        for seed in 0..10 {
            let near = &random_unitary(5, seed) + &random_unitary(5, seed + 50).scale_real(0.01);
            let VertexData::Matrix(u) = exact_vertex_rep(&VertexData::Matrix(near), VertexGroup::Cyclic(3))
            else {
                panic!()
            };
            assert!(hs_distance(&u.powi(3), &ComplexMatrix::identity(5)) <= 1e-12);
            assert!(unitarity_defect(&u) <= 1e-12);
        }
    }

    #[test]
    fn corner_correct_examples() {
        let u = random_unitary(4, 1);
        let whole = GeneratedPartition::whole(4);
        let a = corner_correct(&VertexData::Matrix(u.clone()), VertexGroup::Cyclic(3), &whole);
        let b = exact_vertex_rep(&VertexData::Matrix(u), VertexGroup::Cyclic(3));
        assert!(hs_distance(a.as_matrix().unwrap(), b.as_matrix().unwrap()) < 1e-12);

        let parts = labels_part(vec![0, 0, 1, 1], 2);
        let gp = generated_partition(&[parts]).unwrap();
        let mut block = ComplexMatrix::zeros(4);
        let u1 = random_unitary(2, 5);
        let u2 = random_unitary(2, 6);
        for r in 0..2 {
            for c in 0..2 {
                block[(r, c)] = u1[(r, c)];
                block[(r + 2, c + 2)] = u2[(r, c)];
            }
        }
        let out = corner_correct(&VertexData::Matrix(block.clone()), VertexGroup::FreeAbelian, &gp);
        assert!(hs_distance(out.as_matrix().unwrap(), &block) < 1e-12);
    }

    #[test]
    fn corner_correct_removes_off_block_mass() {
        let gp = generated_partition(&[labels_part(vec![0, 0, 1, 1], 2)]).unwrap();
        let eps = 1e-3;
        let mut m = ComplexMatrix::identity(4);
        m[(0, 3)] = C64::new(eps, 0.0);
        m[(3, 0)] = C64::new(-eps, 0.0);
        let out = corner_correct(&VertexData::Matrix(m.clone()), VertexGroup::FreeAbelian, &gp);
        let out = out.as_matrix().unwrap();
        // The compressed blocks are already the identity, so only the
        // off-block entries move.
        let off_block = hs_norm(&(&m - &ComplexMatrix::identity(4)));
        assert!((hs_distance(out, &m) - off_block).abs() < 1e-15);
        for j in 0..2 {
            assert!(hs_norm(&out.commutator(&gp.projection(j))) <= 1e-13);
        }
    }

    #[test]
    fn corner_correct_commutes_with_blocks_on_random_input() {
        let w = Arc::new(random_unitary(6, 2));
        let gp = generated_partition(&[labels_part(vec![0, 1, 1, 2, 2, 2], 3).with_basis(w)]).unwrap();
        for seed in 0..5 {
            let m = random_unitary(6, 40 + seed);
            for vg in [VertexGroup::FreeAbelian, VertexGroup::Cyclic(2), VertexGroup::Cyclic(3)] {
                let out = corner_correct(&VertexData::Matrix(m.clone()), vg, &gp);
                let out = out.as_matrix().unwrap();
                for j in 0..gp.blocks.len() {
                    assert!(hs_norm(&out.commutator(&gp.projection(j))) <= 1e-13);
                }
                assert!(unitarity_defect(out) <= 1e-12);
            }
        }
    }

    #[test]
    fn commuting_blocks_of_partitions() {
        let w = random_unitary(5, 9);
        let proj = |ind: &[f64]| w.matmul(&ComplexMatrix::from_real_diag(ind)).mul_adjoint(&w);
        let a = VertexData::Projections(vec![proj(&[1.0, 1.0, 0.0, 0.0, 0.0]), proj(&[0.0, 0.0, 1.0, 1.0, 1.0])]);
        let b = VertexData::Projections(vec![proj(&[1.0, 0.0, 1.0, 0.0, 0.0]), proj(&[0.0, 1.0, 0.0, 1.0, 1.0])]);
        let gp = commuting_blocks(&[&a, &b], 5, 0.5);
        assert_eq!(gp.block_dims().iter().sum::<usize>(), 5);
        assert_eq!(gp.blocks.len(), 4);
        let basis = gp.basis.as_ref().unwrap();
        assert!(unitarity_defect(basis) <= 1e-13);
        for j in 0..gp.blocks.len() {
            let q = gp.projection(j);
            for d in [&a, &b] {
                for p in d.matrices() {
                    assert!(hs_norm(&q.commutator(p)) <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn stabilize_single_vertex_closed_form() {
        let g = Graph::uniform(&["a"], &[], VertexGroup::Cyclic(2)).unwrap();
        let u = ComplexMatrix::from_diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, 0.2)]);
        let rep = Rep::new(g, 2, vec![VertexData::Matrix(u)], false).unwrap();
        let (out, report) = stabilize(&rep, &StabilizeParams::default()).unwrap();
        assert!(hs_distance(out.vertex(0).as_matrix().unwrap(), &ComplexMatrix::identity(2)) < 1e-14);
        assert!((report.distances.max - 2.0 * 0.1f64.sin() / 2f64.sqrt()).abs() < 1e-12);
        assert!(report.output_defect.max_defect <= 1e-14);
        assert!(report.success);
    }

    #[test]
    fn stabilize_rejects_square() {
        let g = Graph::uniform(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
            VertexGroup::FreeAbelian,
        )
        .unwrap();
        let rep = exact_rep_diagonal(&g, 2, 0);
        match stabilize(&rep, &StabilizeParams::default()) {
            Err(StabilizeError::NotChordal(cycle)) => assert_eq!(cycle.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stabilize_rejects_far_from_unitary() {
        let g = Graph::uniform(&["a"], &[], VertexGroup::FreeAbelian).unwrap();
        let rep = Rep::new(g, 2, vec![VertexData::Matrix(ComplexMatrix::from_real_diag(&[2.0, 1.0]))], false)
            .unwrap();
        assert!(matches!(
            stabilize(&rep, &StabilizeParams::default()),
            Err(StabilizeError::TooFarFromUnitary { .. })
        ));
    }

    #[test]
    fn stabilize_edge_graph_at_midpoints_is_identity() {
        let g = Graph::uniform(&["a", "b"], &[("a", "b")], VertexGroup::FreeAbelian).unwrap();
        let w = random_unitary(4, 12);
        let mid = |d: usize| (d as f64 + 0.5) * TAU / 4.0;
        let a = w.matmul(&diag_unitary(&[mid(0), mid(1), mid(1), mid(3)])).mul_adjoint(&w);
        let b = w.matmul(&diag_unitary(&[mid(2), mid(2), mid(0), mid(1)])).mul_adjoint(&w);
        let rep = Rep::new(g, 4, vec![VertexData::Matrix(a), VertexData::Matrix(b)], true).unwrap();
        let params = StabilizeParams { arcs_m: 4, ..StabilizeParams::default() };
        let (_, report) = stabilize(&rep, &params).unwrap();
        assert!(report.distances.max <= 1e-9, "{:?}", report.distances);
    }

    #[test]
    fn stabilize_perturbed_mixed_graph() {
        let g = Graph::new(
            vec![
                ("a".into(), VertexGroup::FreeAbelian),
                ("b".into(), VertexGroup::Cyclic(2)),
                ("c".into(), VertexGroup::Cyclic(3)),
                ("d".into(), VertexGroup::FreeAbelian),
            ],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")],
        )
        .unwrap();
        for seed in 0..4 {
            let exact = crate::reps::exact_rep_mixed(&g, 6, seed).unwrap();
            let rep = perturb(&exact, 1e-2, seed + 1);
            let (out, report) = stabilize(&rep, &StabilizeParams::default()).unwrap();
            assert!(report.success, "seed {seed}: {}", report.output_defect.max_defect);
            assert!(verify_exact(&out, 1e-10).unwrap().0);
            assert_eq!(out.graph(), rep.graph());
            assert_eq!(out.dim(), rep.dim());
            assert_eq!(report.trace.len(), 4);
        }
    }

    #[test]
    fn verify_examples() {
        let g = Graph::uniform(&["a", "b"], &[("a", "b")], VertexGroup::FreeAbelian).unwrap();
        for seed in 0..10 {
            let exact = exact_rep_diagonal(&g, 4, seed);
            assert!(verify_exact(&exact, 1e-10).unwrap().0);
            let p = perturb(&exact, 1e-2, seed);
            let (ok, report) = verify_exact(&p, 1e-6).unwrap();
            assert!(!ok);
            assert!(report.max_defect >= 1e-4);
        }
    }
}
