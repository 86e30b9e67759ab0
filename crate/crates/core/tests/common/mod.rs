//! Helpers shared by the integration tests: graphs from bitmasks, a
//! brute-force induced-cycle oracle, isomorphism-class enumeration and
//! random chordal graphs.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use graphstab::chordal::Graph;
use graphstab::reps::VertexGroup;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjacency as one bitmask row per vertex.
pub type Adj = Vec<u16>;

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Graph whose edge set is selected by `bits` over [`pairs`].
pub fn adj_from_bits(n: usize, bits: u64) -> Adj {
    let mut adj = vec![0u16; n];
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        if bits >> k & 1 == 1 {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
    }
    adj
}

pub fn to_graph(adj: &Adj, group: VertexGroup) -> Graph {
    let names: Vec<String> = (0..adj.len()).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..adj.len() {
        for j in (i + 1)..adj.len() {
            if adj[i] >> j & 1 == 1 {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Graph::uniform(&names, &edges, group).unwrap()
}

pub fn from_graph(g: &Graph) -> Adj {
    let mut adj = vec![0u16; g.len()];
    for (a, b) in g.edges() {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    adj
}

/// True iff the subgraph induced on `set` is a cycle.
pub fn induces_cycle(adj: &Adj, set: u16) -> bool {
    if set.count_ones() < 3 {
        return false;
    }
    for v in 0..adj.len() {
        if set >> v & 1 == 1 && (adj[v] & set).count_ones() != 2 {
            return false;
        }
    }
    // 2-regular: a cycle iff connected.
    let start = set.trailing_zeros() as usize;
    let mut seen = 1u16 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u16;
        for v in 0..adj.len() {
            if frontier >> v & 1 == 1 {
                next |= adj[v] & set;
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == set
}

/// Brute force: some vertex subset of size ≥ 4 induces a cycle.
pub fn has_long_induced_cycle(adj: &Adj) -> bool {
    let n = adj.len();
    (0u16..(1u16 << n)).any(|s| s.count_ones() >= 4 && induces_cycle(adj, s))
}

pub fn is_connected(adj: &Adj) -> bool {
    let n = adj.len();
    if n == 0 {
        return true;
    }
    let all = ((1u32 << n) - 1) as u16;
    let mut seen = 1u16;
    let mut frontier = 1u16;
    while frontier != 0 {
        let mut next = 0u16;
        for v in 0..n {
            if frontier >> v & 1 == 1 {
                next |= adj[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == all
}

/// Stable colors from iterated neighborhood refinement; isomorphism
/// invariant.
fn refine(adj: &Adj) -> Vec<usize> {
    let n = adj.len();
    let mut color: Vec<usize> = (0..n).map(|v| adj[v].count_ones() as usize).collect();
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&w| adj[v] >> w & 1 == 1).map(|w| color[w]).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
        let classes = |c: &[usize]| c.iter().collect::<HashSet<_>>().len();
        if classes(&next) == classes(&color) {
            return next;
        }
        color = next;
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Canonical code: least edge bitstring over relabelings that respect the
/// refined color classes.
pub fn canonical(adj: &Adj) -> u64 {
    let n = adj.len();
    let color = refine(adj);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut ncolors: Vec<usize> = color.clone();
    ncolors.sort_unstable();
    ncolors.dedup();
    for c in ncolors {
        cells.push((0..n).filter(|&v| color[v] == c).collect());
    }
    let cell_perms: Vec<Vec<Vec<usize>>> = cells.iter().map(|c| permutations(c)).collect();
    let pair_list = pairs(n);
    let mut best = u64::MAX;
    let mut idx = vec![0usize; cells.len()];
    loop {
        // order[new] = old
        let order: Vec<usize> = cell_perms.iter().zip(&idx).flat_map(|(ps, &i)| ps[i].iter().copied()).collect();
        let mut code = 0u64;
        for (k, &(i, j)) in pair_list.iter().enumerate() {
            if adj[order[i]] >> order[j] & 1 == 1 {
                code |= 1 << k;
            }
        }
        best = best.min(code);
        let mut c = 0;
        loop {
            if c == idx.len() {
                return best;
            }
            idx[c] += 1;
            if idx[c] < cell_perms[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Representatives of all isomorphism classes on `0..=max_n` vertices,
/// grouped by vertex count, by one-vertex augmentation.
pub fn iso_classes(max_n: usize) -> Vec<Vec<Adj>> {
    let mut levels: Vec<Vec<Adj>> = vec![vec![Vec::new()]];
    for n in 1..=max_n {
        let mut seen = HashSet::new();
        let mut reps = Vec::new();
        for base in &levels[n - 1] {
            for nb in 0u16..(1u16 << (n - 1)) {
                let mut adj = base.clone();
                adj.push(nb);
                for v in 0..n - 1 {
                    if nb >> v & 1 == 1 {
                        adj[v] |= 1 << (n - 1);
                    }
                }
                if seen.insert(canonical(&adj)) {
                    reps.push(adj);
                }
            }
        }
        levels.push(reps);
    }
    levels
}

/// Random chordal graph on `n` vertices: each new vertex joins a random
/// clique of earlier vertices; the declaration order is then shuffled.
pub fn random_chordal(n: usize, rng: &mut ChaCha8Rng) -> Adj {
    let mut adj = vec![0u16; n];
    for v in 1..n {
        let mut candidates: Vec<usize> = (0..v).filter(|_| rng.random_bool(0.5)).collect();
        candidates.shuffle(rng);
        let mut clique: Vec<usize> = Vec::new();
        for c in candidates {
            if clique.iter().all(|&k| adj[k] >> c & 1 == 1) {
                clique.push(c);
            }
        }
        for c in clique {
            adj[v] |= 1 << c;
            adj[c] |= 1 << v;
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    relabel(&adj, &perm)
}

/// `perm[old] = new`.
pub fn relabel(adj: &Adj, perm: &[usize]) -> Adj {
    let n = adj.len();
    let mut out = vec![0u16; n];
    for v in 0..n {
        for w in 0..n {
            if adj[v] >> w & 1 == 1 {
                out[perm[v]] |= 1 << perm[w];
            }
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random group from {ℤ, ℤ/2, ℤ/3} per vertex.
pub fn random_groups(n: usize, rng: &mut ChaCha8Rng) -> Vec<VertexGroup> {
    (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => VertexGroup::FreeAbelian,
            1 => VertexGroup::Cyclic(2),
            _ => VertexGroup::Cyclic(3),
        })
        .collect()
}
