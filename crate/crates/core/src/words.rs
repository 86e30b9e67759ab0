//! Words in graph product groups and their normal forms.
//!
//! A word is a sequence of syllables `(vertex, exponent)`. Two syllables at
//! adjacent vertices commute; a torsion vertex `ℤ/n` satisfies `x^n = 1`;
//! nothing else holds. The normal form first reduces the word (merging every
//! pair of same-vertex syllables that can be shuffled together), then picks
//! the lexicographically least arrangement, by vertex declaration order, of
//! the resulting reduced word among all its shuffles.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chordal::Graph;
use crate::reps::VertexGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("zero exponent in token `{0}`")]
    ZeroExponentToken(String),
    #[error("vertex `{0}` carries a partition, which has no group elements")]
    PartitionVertex(String),
    #[error("words live over different graphs")]
    ContextMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub vertex: usize,
    pub exp: i64,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Word<'g> {
    graph: &'g Graph,
    syllables: Vec<Syllable>,
}

impl fmt::Debug for Word<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl fmt::Display for Word<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let name = self.graph.name(s.vertex);
            if s.exp == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{}", s.exp)?;
            }
        }
        Ok(())
    }
}

/// Canonical exponent for a syllable at a vertex of group `g`; zero means the
/// syllable is trivial.
fn reduce_exp(g: VertexGroup, exp: i64) -> i64 {
    match g {
        VertexGroup::Cyclic(n) => exp.rem_euclid(n as i64),
        _ => exp,
    }
}

impl<'g> Word<'g> {
    pub fn empty(graph: &'g Graph) -> Self {
        Self { graph, syllables: Vec::new() }
    }

    /// Literal word; syllables are kept as given.
    pub fn from_syllables(graph: &'g Graph, syllables: Vec<Syllable>) -> Self {
        Self { graph, syllables }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word<'g>) -> Result<Word<'g>, WordError> {
        same_context(self, other)?;
        let mut syllables = self.syllables.clone();
        syllables.extend_from_slice(&other.syllables);
        Ok(Word { graph: self.graph, syllables })
    }

    pub fn inverse(&self) -> Word<'g> {
        let syllables = self
            .syllables
            .iter()
            .rev()
            .map(|s| Syllable { vertex: s.vertex, exp: -s.exp })
            .collect();
        Word { graph: self.graph, syllables }
    }
}

fn same_context(a: &Word<'_>, b: &Word<'_>) -> Result<(), WordError> {
    if std::ptr::eq(a.graph, b.graph) || a.graph == b.graph {
        Ok(())
    } else {
        Err(WordError::ContextMismatch)
    }
}

/// Parses whitespace-separated `vertex` / `vertex^exp` tokens.
pub fn parse_word<'g>(text: &str, g: &'g Graph) -> Result<Word<'g>, WordError> {
    let mut syllables = Vec::new();
    for token in text.split_whitespace() {
        let (name, exp) = match token.rsplit_once('^') {
            Some((name, exp)) => {
                let exp: i32 =
                    exp.parse().map_err(|_| WordError::MalformedToken(token.to_string()))?;
                (name, exp as i64)
            }
            None => (token, 1),
        };
        if name.is_empty() {
            return Err(WordError::MalformedToken(token.to_string()));
        }
        if exp == 0 {
            return Err(WordError::ZeroExponentToken(token.to_string()));
        }
        let vertex = g.index_of(name).ok_or_else(|| WordError::UnknownVertex(name.to_string()))?;
        if let VertexGroup::Partition(_) = g.group(vertex) {
            return Err(WordError::PartitionVertex(name.to_string()));
        }
        syllables.push(Syllable { vertex, exp });
    }
    Ok(Word { graph: g, syllables })
}

/// Left-greedy reduction: each incoming syllable travels left past
/// syllables at adjacent vertices and merges with the first syllable at its
/// own vertex it meets, if any.
fn reduce(g: &Graph, input: &[Syllable]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::with_capacity(input.len());
    for s in input {
        let exp = reduce_exp(g.group(s.vertex), s.exp);
        if exp == 0 {
            continue;
        }
        let mut merged = false;
        for j in (0..out.len()).rev() {
            let t = out[j];
            if t.vertex == s.vertex {
                let e = reduce_exp(g.group(s.vertex), t.exp + exp);
                if e == 0 {
                    out.remove(j);
                } else {
                    out[j].exp = e;
                }
                merged = true;
                break;
            }
            if !g.adjacent(t.vertex, s.vertex) {
                break;
            }
        }
        if !merged {
            out.push(Syllable { vertex: s.vertex, exp });
        }
    }
    out
}

/// Lexicographically least rearrangement of a reduced word that only swaps
/// syllables at adjacent vertices.
fn least_shuffle(g: &Graph, word: &[Syllable]) -> Vec<Syllable> {
    let k = word.len();
    // blockers[j] = number of earlier syllables that must stay before j.
    let mut blockers = vec![0usize; k];
    for j in 0..k {
        for i in 0..j {
            if !g.adjacent(word[i].vertex, word[j].vertex) {
                blockers[j] += 1;
            }
        }
    }
    let mut placed = vec![false; k];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let next = (0..k)
            .filter(|&j| !placed[j] && blockers[j] == 0)
            .min_by_key(|&j| (word[j].vertex, word[j].exp))
            .expect("a reduced word's dependency order is acyclic");
        placed[next] = true;
        out.push(word[next]);
        for j in (next + 1)..k {
            if !placed[j] && !g.adjacent(word[next].vertex, word[j].vertex) {
                blockers[j] -= 1;
            }
        }
    }
    out
}

pub fn normal_form<'g>(w: &Word<'g>) -> Word<'g> {
    let reduced = reduce(w.graph, &w.syllables);
    Word { graph: w.graph, syllables: least_shuffle(w.graph, &reduced) }
}

pub fn words_equal(a: &Word<'_>, b: &Word<'_>) -> Result<bool, WordError> {
    same_context(a, b)?;
    Ok(normal_form(a).syllables == normal_form(b).syllables)
}

/// Deterministic pseudo-random word with exactly `length` literal
/// syllables. Exponents are drawn from `[-3, 3] \ {0}` and reduced at
/// torsion vertices (redrawn if they reduce to the identity). Partition
/// vertices are never used.
pub fn random_word(g: &Graph, length: usize, seed: u64) -> Word<'_> {
    let usable: Vec<usize> =
        (0..g.len()).filter(|&v| !matches!(g.group(v), VertexGroup::Partition(_))).collect();
    if usable.is_empty() {
        return Word::empty(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut syllables = Vec::with_capacity(length);
    while syllables.len() < length {
        let vertex = usable[rng.random_range(0..usable.len())];
        let raw: i64 = rng.random_range(1..=3) * if rng.random_bool(0.5) { 1 } else { -1 };
        let exp = match g.group(vertex) {
            VertexGroup::Cyclic(_) => reduce_exp(g.group(vertex), raw),
            _ => raw,
        };
        if exp != 0 {
            syllables.push(Syllable { vertex, exp });
        }
    }
    Word { graph: g, syllables }
}
