//! Vertex groups, exact and approximate representations of graph products,
//! and how far a representation is from satisfying its defining relations.
//!
//! Defects are measured on defining relations only: commutators along
//! edges, `U^n = I` at torsion vertices, unitarity, and the partition of
//! unity axioms at partition vertices. Generator-level control is enough
//! for lifting questions, so word-level defects are never computed here.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::chordal::{construction_sequence, Graph, GraphError, GraphFile};
use crate::linalg::{
    hs_distance, hs_norm, matrix_exp_skew, random_skew, random_unitary, unitarity_defect,
    ComplexMatrix, C64,
};
use crate::stabilize::commuting_blocks;
use crate::words::{Word, WordError};

/// Group (or internal partition algebra) attached to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "GroupRepr", try_from = "GroupRepr")]
pub enum VertexGroup {
    /// ℤ: one unitary generator.
    FreeAbelian,
    /// ℤ/n: a unitary with `U^n = I`.
    Cyclic(u32),
    /// `m` orthogonal projections summing to the identity. Produced by the
    /// stabilization recursion; accepted in files for testing.
    Partition(u32),
}

impl VertexGroup {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            VertexGroup::Cyclic(n) if n < 2 => Err(format!("Zn needs n >= 2, got {n}")),
            VertexGroup::Partition(0) => Err("Partition needs m >= 1".into()),
            _ => Ok(()),
        }
    }

    pub fn is_unitary_kind(&self) -> bool {
        !matches!(self, VertexGroup::Partition(_))
    }
}

impl fmt::Display for VertexGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexGroup::FreeAbelian => write!(f, "Z"),
            VertexGroup::Cyclic(n) => write!(f, "Z/{n}"),
            VertexGroup::Partition(m) => write!(f, "Partition({m})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum GroupRepr {
    Z,
    Zn { n: u32 },
    Partition { m: u32 },
}

impl From<VertexGroup> for GroupRepr {
    fn from(g: VertexGroup) -> Self {
        match g {
            VertexGroup::FreeAbelian => GroupRepr::Z,
            VertexGroup::Cyclic(n) => GroupRepr::Zn { n },
            VertexGroup::Partition(m) => GroupRepr::Partition { m },
        }
    }
}

impl TryFrom<GroupRepr> for VertexGroup {
    type Error = String;
    fn try_from(r: GroupRepr) -> Result<Self, String> {
        let g = match r {
            GroupRepr::Z => VertexGroup::FreeAbelian,
            GroupRepr::Zn { n } => VertexGroup::Cyclic(n),
            GroupRepr::Partition { m } => VertexGroup::Partition(m),
        };
        g.validate().map(|_| g)
    }
}

/// Image of one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum VertexData {
    #[serde(rename = "matrix")]
    Matrix(ComplexMatrix),
    #[serde(rename = "projections")]
    Projections(Vec<ComplexMatrix>),
}

impl VertexData {
    pub fn matrices(&self) -> &[ComplexMatrix] {
        match self {
            VertexData::Matrix(m) => std::slice::from_ref(m),
            VertexData::Projections(ps) => ps,
        }
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> VertexData {
        match self {
            VertexData::Matrix(m) => VertexData::Matrix(f(m)),
            VertexData::Projections(ps) => VertexData::Projections(ps.iter().map(f).collect()),
        }
    }

    pub fn as_matrix(&self) -> Option<&ComplexMatrix> {
        match self {
            VertexData::Matrix(m) => Some(m),
            VertexData::Projections(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RepError {
    #[error("vertex `{vertex}` has a {found}x{found} matrix, expected {expected}x{expected}")]
    DimensionMismatch { vertex: String, expected: usize, found: usize },
    #[error("representations differ in shape: {0}")]
    ShapeMismatch(String),
    #[error("no data for vertex `{0}`")]
    MissingData(String),
    #[error("data given for undeclared vertex `{0}`")]
    UnexpectedData(String),
    #[error("vertex `{vertex}` of type {group} cannot carry this data: {reason}")]
    KindMismatch { vertex: String, group: VertexGroup, reason: String },
    #[error("malformed representation JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Assignment of matrices to the vertices of a graph, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Rep {
    graph: Graph,
    dim: usize,
    data: Vec<VertexData>,
    exact: bool,
}

impl Rep {
    /// Validating constructor. `data` is indexed like the graph's vertices.
    pub fn new(graph: Graph, dim: usize, data: Vec<VertexData>, exact: bool) -> Result<Self, RepError> {
        if data.len() != graph.len() {
            return Err(RepError::ShapeMismatch(format!(
                "{} vertices but {} data entries",
                graph.len(),
                data.len()
            )));
        }
        for (v, d) in data.iter().enumerate() {
            let name = graph.name(v);
            match (graph.group(v), d) {
                (VertexGroup::Partition(m), VertexData::Projections(ps)) if ps.len() != m as usize => {
                    return Err(RepError::KindMismatch {
                        vertex: name.into(),
                        group: graph.group(v),
                        reason: format!("{} projections given", ps.len()),
                    })
                }
                (VertexGroup::Partition(_), VertexData::Matrix(_)) => {
                    return Err(RepError::KindMismatch {
                        vertex: name.into(),
                        group: graph.group(v),
                        reason: "expected `projections`".into(),
                    })
                }
                (g, VertexData::Projections(_)) if g.is_unitary_kind() => {
                    return Err(RepError::KindMismatch {
                        vertex: name.into(),
                        group: g,
                        reason: "expected `matrix`".into(),
                    })
                }
                _ => {}
            }
            for m in d.matrices() {
                if m.dim() != dim {
                    return Err(RepError::DimensionMismatch {
                        vertex: name.into(),
                        expected: dim,
                        found: m.dim(),
                    });
                }
            }
        }
        Ok(Self { graph, dim, data, exact })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[VertexData] {
        &self.data
    }

    pub fn vertex(&self, v: usize) -> &VertexData {
        &self.data[v]
    }

    pub fn by_name(&self, name: &str) -> Option<&VertexData> {
        self.graph.index_of(name).map(|v| &self.data[v])
    }

    pub fn is_marked_exact(&self) -> bool {
        self.exact
    }

    pub fn into_parts(self) -> (Graph, usize, Vec<VertexData>) {
        (self.graph, self.dim, self.data)
    }

    /// `U·X·U*` applied to every matrix.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Rep {
        let data = self.data.iter().map(|d| d.map(|m| u.matmul(m).mul_adjoint(u))).collect();
        Rep { data, ..self.clone() }
    }

    pub fn from_json_str(text: &str) -> Result<Self, RepError> {
        let file: RepFile = serde_json::from_str(text)?;
        file.into_rep()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("representation serializes")
    }

    pub fn to_file(&self) -> RepFile {
        RepFile {
            graph: self.graph.to_file(),
            dim: self.dim,
            data: OrderedData(
                self.data
                    .iter()
                    .enumerate()
                    .map(|(v, d)| (self.graph.name(v).to_string(), d.clone()))
                    .collect(),
            ),
            exact: self.exact,
        }
    }
}

/// On-disk representation format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFile {
    pub graph: GraphFile,
    pub dim: usize,
    pub data: OrderedData,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl RepFile {
    pub fn into_rep(self) -> Result<Rep, RepError> {
        let graph = self.graph.into_graph(None)?;
        let mut slots: Vec<Option<VertexData>> = vec![None; graph.len()];
        for (name, d) in self.data.0 {
            let v = graph.index_of(&name).ok_or_else(|| RepError::UnexpectedData(name.clone()))?;
            if slots[v].replace(d).is_some() {
                return Err(RepError::ShapeMismatch(format!("vertex `{name}` given twice")));
            }
        }
        let data = slots
            .into_iter()
            .enumerate()
            .map(|(v, d)| d.ok_or_else(|| RepError::MissingData(graph.name(v).to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Rep::new(graph, self.dim, data, self.exact)
    }
}

/// Vertex → data map that keeps file order.
#[derive(Debug, Clone, Default)]
pub struct OrderedData(pub Vec<(String, VertexData)>);

impl Serialize for OrderedData {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedData;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from vertex name to vertex data")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OrderedData, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, VertexData>()? {
                    out.push((k, v));
                }
                Ok(OrderedData(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDefect {
    pub edge: [String; 2],
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDefect {
    pub vertex: String,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub edge_defects: Vec<EdgeDefect>,
    pub vertex_defects: Vec<VertexDefect>,
    pub max_defect: f64,
}

/// Largest commutator norm between any matrix of `a` and any matrix of `b`.
pub fn edge_defect(a: &VertexData, b: &VertexData) -> f64 {
    let mut worst = 0.0f64;
    for x in a.matrices() {
        for y in b.matrices() {
            worst = worst.max(hs_norm(&x.commutator(y)));
        }
    }
    worst
}

/// Partition of unity axioms: idempotent, self-adjoint, mutually
/// orthogonal, summing to the identity. Returns the worst violation.
pub fn partition_defect(ps: &[ComplexMatrix], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    let mut sum = ComplexMatrix::zeros(dim);
    for (i, p) in ps.iter().enumerate() {
        worst = worst.max(hs_distance(&p.matmul(p), p));
        worst = worst.max(hs_distance(p, &p.adjoint()));
        for q in &ps[i + 1..] {
            worst = worst.max(hs_norm(&p.matmul(q)));
        }
        sum = &sum + p;
    }
    worst.max(hs_distance(&sum, &ComplexMatrix::identity(dim)))
}

pub fn vertex_defect(group: VertexGroup, data: &VertexData, dim: usize) -> f64 {
    match (group, data) {
        (VertexGroup::FreeAbelian, VertexData::Matrix(u)) => unitarity_defect(u),
        (VertexGroup::Cyclic(n), VertexData::Matrix(u)) => {
            let power = hs_distance(&u.powi(n as i64), &ComplexMatrix::identity(dim));
            power.max(unitarity_defect(u))
        }
        (VertexGroup::Partition(_), VertexData::Projections(ps)) => partition_defect(ps, dim),
        _ => f64::INFINITY,
    }
}

pub fn relation_defect(rep: &Rep) -> Result<DefectReport, RepError> {
    let g = &rep.graph;
    for (v, d) in rep.data.iter().enumerate() {
        for m in d.matrices() {
            if m.dim() != rep.dim {
                return Err(RepError::DimensionMismatch {
                    vertex: g.name(v).into(),
                    expected: rep.dim,
                    found: m.dim(),
                });
            }
        }
    }
    let edge_defects: Vec<EdgeDefect> = g
        .edges()
        .into_iter()
        .map(|(a, b)| EdgeDefect {
            edge: [g.name(a).into(), g.name(b).into()],
            defect: edge_defect(&rep.data[a], &rep.data[b]),
        })
        .collect();
    let vertex_defects: Vec<VertexDefect> = (0..g.len())
        .map(|v| VertexDefect {
            vertex: g.name(v).into(),
            defect: vertex_defect(g.group(v), &rep.data[v], rep.dim),
        })
        .collect();
    let max_defect = edge_defects
        .iter()
        .map(|e| e.defect)
        .chain(vertex_defects.iter().map(|v| v.defect))
        .fold(0.0, f64::max);
    Ok(DefectReport { edge_defects, vertex_defects, max_defect })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepDistance {
    pub per_vertex: Vec<VertexDefect>,
    pub max: f64,
}

/// Generator-wise distance. Partition vertices combine their projection
/// distances in ℓ².
pub fn rep_distance(r1: &Rep, r2: &Rep) -> Result<RepDistance, RepError> {
    if r1.graph.names() != r2.graph.names() || r1.graph.edges() != r2.graph.edges() {
        return Err(RepError::ShapeMismatch("different graphs".into()));
    }
    if r1.dim != r2.dim {
        return Err(RepError::ShapeMismatch(format!("dimensions {} and {}", r1.dim, r2.dim)));
    }
    let mut per_vertex = Vec::with_capacity(r1.data.len());
    for (v, (a, b)) in r1.data.iter().zip(&r2.data).enumerate() {
        let (ma, mb) = (a.matrices(), b.matrices());
        if ma.len() != mb.len() || matches!(a, VertexData::Matrix(_)) != matches!(b, VertexData::Matrix(_)) {
            return Err(RepError::ShapeMismatch(format!("vertex `{}`", r1.graph.name(v))));
        }
        let d = ma
            .iter()
            .zip(mb)
            .map(|(x, y)| hs_distance(x, y).powi(2))
            .sum::<f64>()
            .sqrt();
        per_vertex.push(VertexDefect { vertex: r1.graph.name(v).into(), defect: d });
    }
    let max = per_vertex.iter().map(|d| d.defect).fold(0.0, f64::max);
    Ok(RepDistance { per_vertex, max })
}

/// `e^{2πik/n}`, exact at multiples of a quarter turn.
pub fn root_of_unity(k: u64, n: u32) -> C64 {
    let n = n as u64;
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
}

/// Independent seed stream derived from `seed` (splitmix64 finalizer).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random diagonal spectrum of the right type for `group`, as a vertex
/// datum in the basis given by `cols` (orthonormal columns spanning the
/// block). Returns the per-column diagonal and class labels. With a
/// palette, ℤ phases are drawn from it so eigenspaces have multiplicity.
fn random_spectrum(
    group: VertexGroup,
    len: usize,
    palette: Option<[f64; 2]>,
    rng: &mut ChaCha8Rng,
) -> (Vec<C64>, Vec<usize>) {
    let mut diag = Vec::with_capacity(len);
    let mut classes = Vec::with_capacity(len);
    for _ in 0..len {
        match group {
            VertexGroup::FreeAbelian => {
                let t: f64 = if let Some(palette) = palette {
                    palette[rng.random_range(0..2)]
                } else {
                    rng.random_range(0.0..std::f64::consts::TAU)
                };
                diag.push(C64::from_polar(1.0, t));
                classes.push(0);
            }
            VertexGroup::Cyclic(n) => {
                let k = rng.random_range(0..n as u64);
                diag.push(root_of_unity(k, n));
                classes.push(k as usize);
            }
            VertexGroup::Partition(m) => {
                let k = rng.random_range(0..m as usize);
                diag.push(C64::new(k as f64, 0.0));
                classes.push(k);
            }
        }
    }
    (diag, classes)
}

/// Vertex datum `W·diag·W*` (or its indicator projections).
pub(crate) fn datum_from_spectrum(
    group: VertexGroup,
    basis: &ComplexMatrix,
    diag: &[C64],
    classes: &[usize],
) -> VertexData {
    match group {
        VertexGroup::Partition(m) => VertexData::Projections(
            (0..m as usize)
                .map(|d| {
                    let ind: Vec<f64> =
                        classes.iter().map(|&c| if c == d { 1.0 } else { 0.0 }).collect();
                    basis.matmul(&ComplexMatrix::from_real_diag(&ind)).mul_adjoint(basis)
                })
                .collect(),
        ),
        _ => VertexData::Matrix(
            basis.matmul(&ComplexMatrix::from_diag(diag)).mul_adjoint(basis),
        ),
    }
}

/// Exact representation with every generator diagonal in one random
/// unitary basis.
pub fn exact_rep_diagonal(g: &Graph, dim: usize, seed: u64) -> Rep {
    let w = random_unitary(dim, sub_seed(seed, 0));
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 1));
    let data = (0..g.len())
        .map(|v| {
            let (diag, classes) = random_spectrum(g.group(v), dim, None, &mut rng);
            datum_from_spectrum(g.group(v), &w, &diag, &classes)
        })
        .collect();
    Rep::new(g.clone(), dim, data, true).expect("generated data has the right shape")
}

/// Exact representation with non-commuting images at non-adjacent
/// vertices, for chordal graphs. Vertices are placed in construction order;
/// each new vertex is a random element of the commutant of its attach
/// clique (block-diagonal over the clique's joint eigenspaces, random
/// unitary inside each block).
pub fn exact_rep_mixed(g: &Graph, dim: usize, seed: u64) -> Result<Rep, RepError> {
    let seq = construction_sequence(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 2));
    let mut data: Vec<Option<VertexData>> = vec![None; g.len()];
    for (k, step) in seq.steps.iter().enumerate() {
        let clique: Vec<&VertexData> =
            step.attach.iter().map(|&a| data[a].as_ref().expect("placed earlier")).collect();
        let blocks = commuting_blocks(&clique, dim, 1e-8);
        let group = g.group(step.vertex);
        let palette = [
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::TAU),
        ];
        let mut total = ComplexMatrix::zeros(dim);
        let mut projections = vec![ComplexMatrix::zeros(dim); match group {
            VertexGroup::Partition(m) => m as usize,
            _ => 0,
        }];
        for (b, block) in blocks.blocks.iter().enumerate() {
            let local = random_unitary(block.len(), sub_seed(seed, 1000 + 97 * k as u64 + b as u64));
            let (diag, classes) = random_spectrum(group, block.len(), Some(palette), &mut rng);
            let frame = blocks.frame(b);
            // Columns of the block basis rotated by `local`.
            let rotated: Vec<Vec<C64>> = (0..block.len())
                .map(|c| {
                    (0..dim)
                        .map(|r| (0..block.len()).map(|i| frame[i][r] * local[(i, c)]).sum())
                        .collect()
                })
                .collect();
            for (c, col) in rotated.iter().enumerate() {
                let weight = match group {
                    VertexGroup::Partition(_) => C64::new(1.0, 0.0),
                    _ => diag[c],
                };
                let target = match group {
                    VertexGroup::Partition(_) => &mut projections[classes[c]],
                    _ => &mut total,
                };
                for r in 0..dim {
                    for s in 0..dim {
                        target[(r, s)] += weight * col[r] * col[s].conj();
                    }
                }
            }
        }
        data[step.vertex] = Some(match group {
            VertexGroup::Partition(_) => VertexData::Projections(projections),
            _ => VertexData::Matrix(total),
        });
    }
    let data = data.into_iter().map(|d| d.expect("every vertex placed")).collect();
    Rep::new(g.clone(), dim, data, true)
}

/// Replaces each generator `U` by `exp(δK)·U` (projections by
/// `exp(δK)·P·exp(−δK)`), with independent normalized random skew `K` per
/// vertex.
pub fn perturb(rep: &Rep, delta: f64, seed: u64) -> Rep {
    if delta == 0.0 {
        return Rep { exact: false, ..rep.clone() };
    }
    let data = rep
        .data
        .iter()
        .enumerate()
        .map(|(v, d)| {
            let k = random_skew(rep.dim, sub_seed(seed, 10_000 + v as u64)).scale_real(delta);
            let e = matrix_exp_skew(&k).expect("random_skew is skew-Hermitian");
            match d {
                VertexData::Matrix(u) => VertexData::Matrix(e.matmul(u)),
                VertexData::Projections(ps) => VertexData::Projections(
                    ps.iter().map(|p| e.matmul(p).mul_adjoint(&e)).collect(),
                ),
            }
        })
        .collect();
    Rep { data, exact: false, ..rep.clone() }
}

/// Image of a word under the representation.
pub fn eval_word(rep: &Rep, w: &Word<'_>) -> Result<ComplexMatrix, RepError> {
    if w.graph() != rep.graph() {
        return Err(WordError::ContextMismatch.into());
    }
    let mut acc = ComplexMatrix::identity(rep.dim);
    for s in w.syllables() {
        match &rep.data[s.vertex] {
            VertexData::Matrix(u) => acc = acc.matmul(&u.powi(s.exp)),
            VertexData::Projections(_) => {
                return Err(WordError::PartitionVertex(rep.graph.name(s.vertex).into()).into())
            }
        }
    }
    Ok(acc)
}
