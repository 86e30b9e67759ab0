//! Finite simple graphs with vertex groups, chordality recognition and the
//! vertex-by-vertex construction sequence of a chordal graph.
//!
//! A chordal graph can be grown one vertex at a time, each new vertex being
//! joined to a (possibly empty) clique of the vertices already present. The
//! reverse of such a growth order is a perfect elimination ordering. We
//! recognize chordality with maximum cardinality search (MCS), whose visit
//! order is a growth order whenever the graph is chordal, and otherwise
//! return an induced chordless cycle of length at least four.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reps::VertexGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("edge endpoint `{0}` is not a declared vertex")]
    UnknownEndpoint(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`–`{1}`")]
    DuplicateEdge(String, String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` has no group and no preset was given")]
    MissingGroup(String),
    #[error("invalid group at `{vertex}`: {reason}")]
    InvalidGroup { vertex: String, reason: String },
    #[error("graph is not chordal: induced cycle {}", .0.join(" – "))]
    NotChordal(Vec<String>),
}

/// Finite simple graph with named vertices, each carrying a vertex group.
///
/// Vertices are addressed by their position in declaration order; the
/// declaration order is also the tie-break order everywhere determinism
/// matters.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    groups: Vec<VertexGroup>,
    adj: Vec<Vec<bool>>,
    index: HashMap<String, usize>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(a, b)| format!("{}-{}", self.names[a], self.names[b]))
            .collect();
        f.debug_struct("Graph")
            .field("vertices", &self.names)
            .field("groups", &self.groups)
            .field("edges", &edges)
            .finish()
    }
}

impl Graph {
    /// Validating constructor.
    pub fn new<S: AsRef<str>>(
        vertices: Vec<(String, VertexGroup)>,
        edges: &[(S, S)],
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(vertices.len());
        let mut names = Vec::with_capacity(vertices.len());
        let mut groups = Vec::with_capacity(vertices.len());
        for (i, (name, group)) in vertices.into_iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name));
            }
            group
                .validate()
                .map_err(|reason| GraphError::InvalidGroup { vertex: name.clone(), reason })?;
            names.push(name);
            groups.push(group);
        }
        let n = names.len();
        let mut adj = vec![vec![false; n]; n];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index.get(a).ok_or_else(|| GraphError::UnknownEndpoint(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| GraphError::UnknownEndpoint(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            if adj[ia][ib] {
                return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
            }
            adj[ia][ib] = true;
            adj[ib][ia] = true;
        }
        Ok(Self { names, groups, adj, index })
    }

    /// Every vertex gets the same group.
    pub fn uniform<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(S, S)],
        group: VertexGroup,
    ) -> Result<Self, GraphError> {
        let vs = vertices.iter().map(|v| (v.as_ref().to_string(), group)).collect();
        Self::new(vs, edges)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn group(&self, v: usize) -> VertexGroup {
        self.groups[v]
    }

    pub fn groups(&self) -> &[VertexGroup] {
        &self.groups
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().enumerate().filter(|(_, &e)| e).map(|(w, _)| w)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Same graph with a different group at every vertex.
    pub fn with_groups(&self, groups: Vec<VertexGroup>) -> Self {
        assert_eq!(groups.len(), self.len());
        Self { groups, ..self.clone() }
    }

    /// Same graph with every vertex assigned `group`.
    pub fn with_uniform_group(&self, group: VertexGroup) -> Self {
        self.with_groups(vec![group; self.len()])
    }

    pub fn resolve(&self, names: &[&str]) -> Result<Vec<usize>, GraphError> {
        names
            .iter()
            .map(|s| self.index_of(s).ok_or_else(|| GraphError::UnknownVertex(s.to_string())))
            .collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphFileError> {
        let file: GraphFile = serde_json::from_str(text)?;
        Ok(file.into_graph(None)?)
    }

    /// Parses a graph file, filling or overriding every vertex group with
    /// `preset` when given.
    pub fn from_json_with_preset(
        text: &str,
        preset: Option<VertexGroup>,
    ) -> Result<Self, GraphFileError> {
        let file: GraphFile = serde_json::from_str(text)?;
        Ok(file.into_graph(preset)?)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self
                .names
                .iter()
                .zip(&self.groups)
                .map(|(name, &group)| VertexEntry { name: name.clone(), group: Some(group) })
                .collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| [self.names[a].clone(), self.names[b].clone()])
                .collect(),
        }
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let file = GraphFile::deserialize(d)?;
        file.into_graph(None).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// On-disk graph format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexEntry>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<VertexGroup>,
}

impl GraphFile {
    pub fn into_graph(self, preset: Option<VertexGroup>) -> Result<Graph, GraphError> {
        let vertices = self
            .vertices
            .into_iter()
            .map(|v| match preset.or(v.group) {
                Some(g) => Ok((v.name, g)),
                None => Err(GraphError::MissingGroup(v.name)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edges: Vec<(String, String)> =
            self.edges.into_iter().map(|[a, b]| (a, b)).collect();
        Graph::new(vertices, &edges)
    }
}

/// Outcome of [`is_chordal`], with its certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    /// Perfect elimination ordering: each vertex's later neighbors form a
    /// clique.
    Chordal { elimination_order: Vec<usize> },
    /// Induced cycle of length ≥ 4, in cyclic order.
    NotChordal { cycle: Vec<usize> },
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal { .. })
    }
}

/// One step of a construction sequence: add `vertex` and join it to
/// `attach`, a clique of earlier vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub vertex: usize,
    pub attach: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstructionSequence {
    pub steps: Vec<Step>,
}

impl ConstructionSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Vertex order of the growth process.
    pub fn order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.vertex).collect()
    }

    /// Reversed growth order.
    pub fn elimination_order(&self) -> Vec<usize> {
        let mut o = self.order();
        o.reverse();
        o
    }

    /// Rebuilds the graph by replaying the steps against `g`'s names and
    /// groups. Vertices keep `g`'s declaration order.
    pub fn replay(&self, g: &Graph) -> Result<Graph, GraphError> {
        let mut edges: Vec<(String, String)> = Vec::new();
        for step in &self.steps {
            for &a in &step.attach {
                edges.push((g.name(a).to_string(), g.name(step.vertex).to_string()));
            }
        }
        let vertices = (0..g.len()).map(|v| (g.name(v).to_string(), g.group(v))).collect();
        Graph::new(vertices, &edges)
    }

    pub fn describe(&self, g: &Graph) -> Vec<(String, Vec<String>)> {
        self.steps
            .iter()
            .map(|s| {
                (
                    g.name(s.vertex).to_string(),
                    s.attach.iter().map(|&a| g.name(a).to_string()).collect(),
                )
            })
            .collect()
    }
}

/// Maximum cardinality search. Returns the visit order; ties go to the
/// lowest declared index.
pub fn maximum_cardinality_search(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !visited[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        visited[next] = true;
        order.push(next);
        for w in g.neighbors(next) {
            if !visited[w] {
                weight[w] += 1;
            }
        }
    }
    order
}

pub(crate) fn is_clique_idx(g: &Graph, s: &[usize]) -> bool {
    s.iter()
        .enumerate()
        .all(|(i, &a)| s[i + 1..].iter().all(|&b| a != b && g.adjacent(a, b)))
}

/// True iff every pair in `s` is adjacent. Empty and singleton sets are
/// cliques.
pub fn is_clique(g: &Graph, s: &[&str]) -> Result<bool, GraphError> {
    let idx = g.resolve(s)?;
    let set: BTreeSet<usize> = idx.into_iter().collect();
    let v: Vec<usize> = set.into_iter().collect();
    Ok(is_clique_idx(g, &v))
}

/// Checks the perfect elimination property of `order` directly.
pub fn is_perfect_elimination_order(g: &Graph, order: &[usize]) -> bool {
    let n = g.len();
    if order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    order.iter().enumerate().all(|(i, &v)| {
        let later: Vec<usize> = g.neighbors(v).filter(|&w| pos[w] > i).collect();
        is_clique_idx(g, &later)
    })
}

pub fn is_chordal(g: &Graph) -> Chordality {
    let visit = maximum_cardinality_search(g);
    let mut seen = vec![false; g.len()];
    let mut ok = true;
    for &v in &visit {
        let earlier: Vec<usize> = g.neighbors(v).filter(|&w| seen[w]).collect();
        if !is_clique_idx(g, &earlier) {
            ok = false;
            break;
        }
        seen[v] = true;
    }
    if ok {
        let mut elimination_order = visit;
        elimination_order.reverse();
        Chordality::Chordal { elimination_order }
    } else {
        let cycle = chordless_cycle(g).expect("MCS failure implies an induced cycle of length >= 4");
        Chordality::NotChordal { cycle }
    }
}

/// Finds an induced cycle of length ≥ 4, if any: a vertex `v` with two
/// non-adjacent neighbors `x`, `y` joined by a path that avoids the rest of
/// `v`'s closed neighborhood. A shortest such path closes a chordless cycle.
pub fn chordless_cycle(g: &Graph) -> Option<Vec<usize>> {
    let n = g.len();
    for v in 0..n {
        let nbrs: Vec<usize> = g.neighbors(v).collect();
        for (i, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[i + 1..] {
                if g.adjacent(x, y) {
                    continue;
                }
                let mut blocked = vec![false; n];
                blocked[v] = true;
                for &w in &nbrs {
                    if w != x && w != y {
                        blocked[w] = true;
                    }
                }
                if let Some(path) = shortest_path(g, x, y, &blocked) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(g: &Graph, from: usize, to: usize, blocked: &[bool]) -> Option<Vec<usize>> {
    let n = g.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for w in g.neighbors(u) {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Growth order of a chordal graph: each step's attach set is the new
/// vertex's neighborhood among earlier vertices, and is a clique.
pub fn construction_sequence(g: &Graph) -> Result<ConstructionSequence, GraphError> {
    match is_chordal(g) {
        Chordality::Chordal { elimination_order } => {
            let n = g.len();
            let mut placed = vec![false; n];
            let mut steps = Vec::with_capacity(n);
            for &v in elimination_order.iter().rev() {
                let attach: Vec<usize> = g.neighbors(v).filter(|&w| placed[w]).collect();
                placed[v] = true;
                steps.push(Step { vertex: v, attach });
            }
            Ok(ConstructionSequence { steps })
        }
        Chordality::NotChordal { cycle } => Err(GraphError::NotChordal(
            cycle.into_iter().map(|v| g.name(v).to_string()).collect(),
        )),
    }
}

/// Subgraph induced on `keep` (by index), in `g`'s declaration order.
pub(crate) fn induced_subgraph_idx(g: &Graph, keep: &[usize]) -> Graph {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let vertices = keep.iter().map(|&v| (g.name(v).to_string(), g.group(v))).collect();
    let mut edges = Vec::new();
    for (i, &a) in keep.iter().enumerate() {
        for &b in &keep[i + 1..] {
            if g.adjacent(a, b) {
                edges.push((g.name(a).to_string(), g.name(b).to_string()));
            }
        }
    }
    Graph::new(vertices, &edges).expect("induced subgraph of a valid graph is valid")
}

pub fn induced_subgraph(g: &Graph, keep: &[&str]) -> Result<Graph, GraphError> {
    let idx = g.resolve(keep)?;
    Ok(induced_subgraph_idx(g, &idx))
}
