//! Whitehead's method for systems of subgroups of a free group: complexity
//! minimization by Whitehead automorphisms with peak reduction, exploration
//! of the minimal level set, and detection of relative free splittings.
//!
//! A system is a multiset of connected core graphs immersed in the rose of
//! rank `k` (conjugacy classes of nontrivial f.g. subgroups); its complexity
//! is the total number of geometric edges. A splitting of the ambient group
//! relative to the system is *visible* when the basis letters can be split
//! into two nonempty parts with every member graph supported in one part;
//! visible separability at some minimal-level state decides separability.

use crate::error::{Error, Result};
use crate::graphs::{fold, CanonKey, CoreGraph, GeomEdge};
use crate::words::{Letter, Word};
use std::collections::{HashMap, HashSet, VecDeque};

/// Signed letter: `+l` reads letter `l`, `-l` its inverse.
pub type SignedLetter = i32;

/// A type (ii) Whitehead automorphism `(A, a)` with `a ∈ A`, `a⁻¹ ∉ A`:
/// maps `x ↦ xa` when only `x ∈ A`, `x ↦ a⁻¹x` when only `x⁻¹ ∈ A`,
/// `x ↦ a⁻¹xa` when both, and fixes the rest (and the letter of `a`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhMove {
    pub multiplier: SignedLetter,
    pub set: Vec<SignedLetter>,
}

impl WhMove {
    pub fn inverse(&self) -> WhMove {
        let mut set: Vec<SignedLetter> = self
            .set
            .iter()
            .copied()
            .filter(|&x| x != self.multiplier)
            .collect();
        set.push(-self.multiplier);
        set.sort_unstable();
        WhMove { multiplier: -self.multiplier, set }
    }

    fn image_of(&self, x: SignedLetter) -> Vec<SignedLetter> {
        let a = self.multiplier;
        if x.abs() == a.abs() {
            return vec![x];
        }
        let in_a = self.set.contains(&x);
        let inv_in_a = self.set.contains(&-x);
        match (in_a, inv_in_a) {
            (true, false) => vec![x, a],
            (false, true) => vec![-a, x],
            (true, true) => vec![-a, x, a],
            (false, false) => vec![x],
        }
    }

    pub fn apply_to_word(&self, w: &Word) -> Word {
        let rank = w.ambient_rank();
        let letters = w.letters().iter().flat_map(|l| {
            let x = l.index as i32 * l.sign as i32;
            self.image_of(x)
                .into_iter()
                .map(|s| Letter::new(s.unsigned_abs(), if s > 0 { 1 } else { -1 }))
        });
        Word::from_letters(letters, rank).expect("letters in range")
    }

    /// Applies the automorphism to a subgroup graph: each edge is replaced
    /// by the path spelling the image of its label, then folded and pruned.
    pub fn apply_to_graph(&self, g: &CoreGraph) -> CoreGraph {
        let mut n = g.n_vertices();
        let mut edges = Vec::new();
        for e in g.geom_edges() {
            let img = self.image_of(e.label as i32);
            let mut prev = e.src;
            for (i, &s) in img.iter().enumerate() {
                let next = if i + 1 == img.len() {
                    e.dst
                } else {
                    n += 1;
                    n - 1
                };
                if s > 0 {
                    edges.push(GeomEdge { src: prev, dst: next, label: s as u32 });
                } else {
                    edges.push(GeomEdge { src: next, dst: prev, label: (-s) as u32 });
                }
                prev = next;
            }
        }
        let raw = CoreGraph::new(g.rank(), n, edges);
        let (folded, _) = fold(&raw);
        folded.prune_to_core().0
    }
}

/// All type (ii) Whitehead moves for rank `k`, excluding identities.
pub fn all_moves(k: u32) -> Vec<WhMove> {
    let mut letters: Vec<SignedLetter> = Vec::new();
    for l in 1..=k as i32 {
        letters.push(l);
        letters.push(-l);
    }
    let mut moves = Vec::new();
    for &a in &letters {
        let rest: Vec<SignedLetter> = letters
            .iter()
            .copied()
            .filter(|&x| x != a && x != -a)
            .collect();
        for mask in 0u32..(1 << rest.len()) {
            let mut set = vec![a];
            for (i, &x) in rest.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set.push(x);
                }
            }
            if set.len() == 1 {
                continue; // identity
            }
            set.sort_unstable();
            moves.push(WhMove { multiplier: a, set });
        }
    }
    moves
}

fn complexity(system: &[CoreGraph]) -> usize {
    system.iter().map(|g| g.n_geom_edges()).sum()
}

/// Dedup key for a system: the sorted per-graph canonical keys. Not
/// invariant under letter permutations; the level exploration then reaches
/// every minimal state only up to a trailing permutation, which is enough
/// because visible separability is permutation-invariant.
pub fn state_key(system: &[CoreGraph], k: u32) -> CanonKey {
    let _ = k;
    let mut keys: Vec<CanonKey> = system.iter().map(|g| g.canonical_key()).collect();
    keys.sort();
    let mut ser = Vec::new();
    for key in keys {
        ser.push(-7);
        ser.extend(key.0);
    }
    CanonKey(ser)
}

/// Letter partition witnessing a visible splitting: parts of the
/// letter-interaction graph plus unused letters, when at least two pieces
/// exist. Each member graph is supported inside a single part.
fn visible_partition(system: &[CoreGraph], k: u32) -> Option<Vec<Vec<u32>>> {
    let mut parent: Vec<usize> = (0..k as usize).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut used = vec![false; k as usize];
    for g in system {
        let mut letters: Vec<usize> = g
            .geom_edges()
            .iter()
            .map(|e| (e.label - 1) as usize)
            .collect();
        letters.sort_unstable();
        letters.dedup();
        for &l in &letters {
            used[l] = true;
        }
        for w in letters.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<u32>> = HashMap::new();
    for l in 0..k as usize {
        if used[l] {
            let root = find(&mut parent, l);
            groups.entry(root).or_default().push(l as u32 + 1);
        }
    }
    let mut parts: Vec<Vec<u32>> = groups.into_values().collect();
    for l in 0..k as usize {
        if !used[l] {
            parts.push(vec![l as u32 + 1]);
        }
    }
    parts.sort();
    if parts.len() >= 2 {
        Some(parts)
    } else {
        None
    }
}

/// Whitehead graph on the `2k` signed letters: one edge per pair of
/// distinct directions at a vertex of a member graph (endpoints inverted).
pub fn whitehead_graph_edges(system: &[CoreGraph]) -> Vec<(SignedLetter, SignedLetter)> {
    let mut edges = Vec::new();
    for g in system {
        let out = g.out_edges();
        for dirs in out {
            let mut signed: Vec<SignedLetter> = dirs
                .iter()
                .map(|&oe| {
                    let d = g.orient_dir(oe);
                    let l = (d / 2 + 1) as i32;
                    if d % 2 == 0 {
                        l
                    } else {
                        -l
                    }
                })
                .collect();
            signed.sort_unstable();
            for i in 0..signed.len() {
                for j in i + 1..signed.len() {
                    edges.push((-signed[i], -signed[j]));
                }
            }
        }
    }
    edges
}

/// Connectivity and cut-vertex-freeness of the Whitehead graph on the
/// signed letters that occur.
pub fn whitehead_graph_shape(system: &[CoreGraph], k: u32) -> (bool, bool) {
    let edges = whitehead_graph_edges(system);
    let mut verts: HashSet<SignedLetter> = HashSet::new();
    for l in 1..=k as i32 {
        verts.insert(l);
        verts.insert(-l);
    }
    let idx: HashMap<SignedLetter, usize> =
        verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = idx.len();
    let mut adj = vec![HashSet::new(); n];
    for (a, b) in &edges {
        if a != b {
            let (i, j) = (idx[a], idx[b]);
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    let connected = |skip: Option<usize>| -> bool {
        let start = (0..n).find(|&v| Some(v) != skip);
        let Some(start) = start else { return true };
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if Some(u) != skip && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        (0..n).all(|v| seen[v] || Some(v) == skip)
    };
    let conn = connected(None);
    let no_cut = conn && (0..n).all(|v| connected(Some(v)));
    (conn, no_cut)
}

/// Outcome of the separability decision for one system.
#[derive(Debug, Clone)]
pub struct SeparabilityOutcome {
    pub splits: bool,
    /// Letter partition of the witness state, when splitting.
    pub partition: Option<Vec<Vec<u32>>>,
    /// Moves carrying the input system to the witness / minimized state.
    pub chain: Vec<WhMove>,
    /// The witness state (splitting) or a minimized state (non-splitting).
    pub state: Vec<CoreGraph>,
    pub min_complexity: usize,
    /// Whitehead-graph shape of the reported state: (connected, no cut vertex).
    pub wh_shape: (bool, bool),
}

/// Decides whether the rank-`k` free group splits freely relative to the
/// system. Greedy strict descent reaches the orbit minimum (peak reduction);
/// the minimal level set is then explored exhaustively modulo letter
/// permutations, testing visible separability at every state.
pub fn decide_separability(
    k: u32,
    system: &[CoreGraph],
    orbit_limit: usize,
) -> Result<SeparabilityOutcome> {
    let moves = all_moves(k);
    let mut current: Vec<CoreGraph> = system.to_vec();
    let mut chain: Vec<WhMove> = Vec::new();

    // Strict descent: the first strictly reducing move is taken (fixed move
    // order keeps this deterministic); peak reduction guarantees the local
    // minimum is the orbit minimum.
    loop {
        if let Some(parts) = visible_partition(&current, k) {
            let wh_shape = whitehead_graph_shape(&current, k);
            return Ok(SeparabilityOutcome {
                splits: true,
                partition: Some(parts),
                chain,
                min_complexity: complexity(&current),
                state: current,
                wh_shape,
            });
        }
        let cur_c = complexity(&current);
        let mut reduced = false;
        for mv in &moves {
            let next: Vec<CoreGraph> = current.iter().map(|g| mv.apply_to_graph(g)).collect();
            if complexity(&next) < cur_c {
                chain.push(mv.clone());
                current = next;
                reduced = true;
                break;
            }
        }
        if !reduced {
            break;
        }
    }

    // At the minimum: by the cut vertex lemma, a minimized system whose
    // Whitehead graph is connected without cut vertices admits no splitting;
    // only the remaining shapes need the level-set exploration.
    let wh_shape = whitehead_graph_shape(&current, k);
    if wh_shape == (true, true) {
        return Ok(SeparabilityOutcome {
            splits: false,
            partition: None,
            chain,
            min_complexity: complexity(&current),
            state: current,
            wh_shape,
        });
    }

    // Level exploration at the minimum.
    let min_c = complexity(&current);
    let mut seen: HashMap<CanonKey, ()> = HashMap::new();
    let mut queue: VecDeque<(Vec<CoreGraph>, Vec<WhMove>)> = VecDeque::new();
    seen.insert(state_key(&current, k), ());
    queue.push_back((current.clone(), chain.clone()));
    while let Some((state, state_chain)) = queue.pop_front() {
        if let Some(parts) = visible_partition(&state, k) {
            let wh_shape = whitehead_graph_shape(&state, k);
            return Ok(SeparabilityOutcome {
                splits: true,
                partition: Some(parts),
                chain: state_chain,
                min_complexity: min_c,
                state,
                wh_shape,
            });
        }
        for mv in &moves {
            let next: Vec<CoreGraph> = state.iter().map(|g| mv.apply_to_graph(g)).collect();
            let c = complexity(&next);
            if c > min_c {
                continue;
            }
            if c < min_c {
                return Err(Error::Internal(
                    "level exploration found a smaller complexity than the descent minimum".into(),
                ));
            }
            let key = state_key(&next, k);
            if !seen.contains_key(&key) {
                if seen.len() >= orbit_limit {
                    return Err(Error::resource("whitehead orbit limit", orbit_limit as u64));
                }
                seen.insert(key, ());
                let mut next_chain = state_chain.clone();
                next_chain.push(mv.clone());
                queue.push_back((next, next_chain));
            }
        }
    }
    let wh_shape = whitehead_graph_shape(&current, k);
    Ok(SeparabilityOutcome {
        splits: false,
        partition: None,
        chain,
        min_complexity: min_c,
        state: current,
        wh_shape,
    })
}

/// Applies the inverse of a move chain to a single letter, producing the
/// word the letter denotes in the coordinates before the chain.
pub fn pull_back_letter(chain: &[WhMove], letter: u32, k: u32) -> Word {
    let mut w = Word::from_letters([Letter::new(letter, 1)], k).unwrap();
    for mv in chain.iter().rev() {
        w = mv.inverse().apply_to_word(&w);
    }
    w
}
