//! Exhaustive enumeration of surjective quotients of a core graph and of the
//! decomposition sets Decomp², Decomp³ and their algebraic variants, up to
//! the equivalence that commutes with isomorphisms of the intermediate graphs.

use crate::error::{Error, Result};
use crate::graphs::{merge_pair_and_fold, CanonKey, CoreGraph, GraphMorphism};
use std::collections::HashMap;
use std::sync::Arc;

/// Default guard on the number of domain vertices for quotient enumeration.
pub const DEFAULT_VERTEX_LIMIT: usize = 14;

/// All surjective morphisms `g ↠ Σ` up to post-composition by isomorphism,
/// in canonical order.
///
/// Every surjective immersion factors through a chain of single vertex-pair
/// identifications followed by folding, so a breadth-first closure over
/// pair-merges reaches every quotient; dedupe is by the fixed-domain
/// canonical key.
pub fn quotients(g: &Arc<CoreGraph>, vertex_limit: usize) -> Result<Vec<GraphMorphism>> {
    if g.n_vertices() > vertex_limit {
        return Err(Error::resource("quotient enumeration vertex limit", vertex_limit as u64));
    }
    let id = GraphMorphism::identity(g.clone());
    let mut seen: HashMap<CanonKey, GraphMorphism> = HashMap::new();
    let mut frontier = vec![id.clone()];
    seen.insert(id.fixed_domain_key()?, id);
    while let Some(q) = frontier.pop() {
        let sigma = q.codomain.clone();
        for u in 0..sigma.n_vertices() {
            for v in u + 1..sigma.n_vertices() {
                let (_, quo) = merge_pair_and_fold(&sigma, u, v);
                let composed = q.compose(&quo);
                let key = composed.fixed_domain_key()?;
                if !seen.contains_key(&key) {
                    seen.insert(key, composed.clone());
                    frontier.push(composed);
                }
            }
        }
    }
    let mut out: Vec<(CanonKey, GraphMorphism)> = seen.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|(_, m)| m).collect())
}

/// A decomposition of a morphism into 2 or 3 composable parts, with the
/// properties the enumeration certified for each part.
#[derive(Debug, Clone)]
pub struct DecompRecord {
    pub parts: Vec<GraphMorphism>,
    pub surjective: Vec<bool>,
    pub algebraic: Vec<Option<bool>>,
}

impl DecompRecord {
    pub fn composed(&self) -> GraphMorphism {
        let mut m = self.parts[0].clone();
        for p in &self.parts[1..] {
            m = m.compose(p);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompMode {
    Surjective,
    Algebraic,
}

/// Whether `eta` factors through the surjective quotient `q`; if so returns
/// the unique second factor.
pub fn factor_through(
    eta: &GraphMorphism,
    q: &GraphMorphism,
) -> Option<GraphMorphism> {
    debug_assert_eq!(eta.domain.as_ref(), q.domain.as_ref());
    let sigma = q.codomain.as_ref();
    let mut vmap = vec![usize::MAX; sigma.n_vertices()];
    for v in 0..eta.domain.n_vertices() {
        let s = q.vertex_map[v];
        let t = eta.vertex_map[v];
        if vmap[s] == usize::MAX {
            vmap[s] = t;
        } else if vmap[s] != t {
            return None;
        }
    }
    let mut emap = vec![usize::MAX; sigma.n_geom_edges()];
    for e in 0..eta.domain.n_geom_edges() {
        let s = q.edge_map[e];
        let t = eta.edge_map[e];
        if emap[s] == usize::MAX {
            emap[s] = t;
        } else if emap[s] != t {
            return None;
        }
    }
    // q surjective, so all slots are filled.
    Some(GraphMorphism::new(
        q.codomain.clone(),
        eta.codomain.clone(),
        vmap,
        emap,
    ))
}

/// Decomp²(η): pairs `(η₁, η₂)` with `η₂ ∘ η₁ = η` and `η₁` surjective
/// (mode Surjective) or algebraic (mode Algebraic), up to equivalence.
///
/// `is_algebraic` decides algebraicity of a candidate first part; it is
/// injected to keep this module independent of the splitting engine.
pub fn decomp2(
    eta: &GraphMorphism,
    mode: DecompMode,
    vertex_limit: usize,
    is_algebraic: &mut dyn FnMut(&GraphMorphism) -> Result<bool>,
) -> Result<Vec<DecompRecord>> {
    let domain = eta.domain.clone();
    let mut out = Vec::new();
    for q in quotients(&domain, vertex_limit)? {
        let Some(rest) = factor_through(eta, &q) else {
            continue;
        };
        let (alg_flag, keep) = match mode {
            DecompMode::Surjective => (None, true),
            DecompMode::Algebraic => {
                let a = is_algebraic(&q)?;
                (Some(a), a)
            }
        };
        if keep {
            out.push(DecompRecord {
                surjective: vec![true, rest.is_surjective()],
                algebraic: vec![alg_flag, None],
                parts: vec![q, rest],
            });
        }
    }
    Ok(out)
}

/// Decomp³(η): triples `(η₁, η₂, η₃)` with the first two parts surjective
/// (resp. algebraic), up to equivalence. Enumerated by nesting Decomp²;
/// with the first part held as its canonical representative the remaining
/// equivalence freedom is exactly an isomorphism of the middle codomain,
/// which the inner Decomp² dedupe already quotients out.
pub fn decomp3(
    eta: &GraphMorphism,
    mode: DecompMode,
    vertex_limit: usize,
    is_algebraic: &mut dyn FnMut(&GraphMorphism) -> Result<bool>,
) -> Result<Vec<DecompRecord>> {
    let mut out = Vec::new();
    for first in decomp2(eta, mode, vertex_limit, is_algebraic)? {
        let rest = &first.parts[1];
        for second in decomp2(rest, mode, vertex_limit, is_algebraic)? {
            out.push(DecompRecord {
                surjective: vec![
                    true,
                    true,
                    second.parts[1].is_surjective(),
                ],
                algebraic: vec![
                    first.algebraic[0],
                    second.algebraic[0],
                    None,
                ],
                parts: vec![
                    first.parts[0].clone(),
                    second.parts[0].clone(),
                    second.parts[1].clone(),
                ],
            });
        }
    }
    Ok(out)
}

/// Unified entry point: decompositions of `eta` into `arity` (2 or 3)
/// composable parts with the leading parts surjective or algebraic.
pub fn decompositions(
    eta: &GraphMorphism,
    arity: usize,
    mode: DecompMode,
    vertex_limit: usize,
    is_algebraic: &mut dyn FnMut(&GraphMorphism) -> Result<bool>,
) -> Result<Vec<DecompRecord>> {
    match arity {
        2 => decomp2(eta, mode, vertex_limit, is_algebraic),
        3 => decomp3(eta, mode, vertex_limit, is_algebraic),
        other => Err(Error::Input(format!("decomposition arity {other} not in {{2, 3}}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{fold, gamma_w, GeomEdge};
    use crate::words::parse_word;

    fn surjective_only(_: &GraphMorphism) -> Result<bool> {
        Ok(true)
    }

    #[test]
    fn quotients_of_loop() {
        let g = gamma_w(&parse_word("a", 1).unwrap()).graph;
        let qs = quotients(&g, 14).unwrap();
        assert_eq!(qs.len(), 1);
        assert!(qs[0].is_isomorphism());
    }

    #[test]
    fn quotients_of_empty() {
        let g = Arc::new(CoreGraph::empty(2));
        let qs = quotients(&g, 14).unwrap();
        assert_eq!(qs.len(), 1);
    }

    #[test]
    fn quotient_guard() {
        let g = gamma_w(&parse_word("abAB", 2).unwrap()).graph;
        assert!(matches!(
            quotients(&g, 2),
            Err(Error::Resource { .. })
        ));
    }

    /// Oracle for the 4-cycle: enumerate all 15 vertex partitions directly,
    /// quotient, fold, dedupe. The pair-merge closure must agree.
    #[test]
    fn quotients_of_commutator_match_partition_oracle() {
        let g = gamma_w(&parse_word("abAB", 2).unwrap()).graph;
        let fast = quotients(&g, 14).unwrap();

        let mut keys = std::collections::HashSet::new();
        for partition in set_partitions(4) {
            let n_blocks = partition.iter().max().unwrap() + 1;
            let edges: Vec<GeomEdge> = g
                .geom_edges()
                .iter()
                .map(|e| GeomEdge {
                    src: partition[e.src],
                    dst: partition[e.dst],
                    label: e.label,
                })
                .collect();
            let raw = CoreGraph::new(2, n_blocks, edges);
            let quo = GraphMorphism::new(
                g.clone(),
                Arc::new(raw.clone()),
                partition.clone(),
                (0..g.n_geom_edges()).collect(),
            );
            let (_, fm) = fold(&raw);
            keys.insert(quo.compose(&fm).fixed_domain_key().unwrap());
        }
        let fast_keys: std::collections::HashSet<_> =
            fast.iter().map(|m| m.fixed_domain_key().unwrap()).collect();
        assert_eq!(fast_keys, keys);

        // Identity and the full collapse to the rank-2 bouquet both occur.
        assert!(fast.iter().any(|m| m.is_isomorphism()));
        let bouquet = CoreGraph::bouquet(2).unwrap();
        assert!(fast.iter().any(|m| m.codomain.isomorphic(&bouquet)));
    }

    fn set_partitions(n: usize) -> Vec<Vec<usize>> {
        // Restricted growth strings.
        let mut out = Vec::new();
        let mut cur = vec![0usize; n];
        fn rec(cur: &mut Vec<usize>, i: usize, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for b in 0..=max + 1 {
                cur[i] = b;
                rec(cur, i + 1, max.max(b), out);
            }
        }
        if n == 0 {
            return vec![Vec::new()];
        }
        cur[0] = 0;
        rec(&mut cur, 1, 0, &mut out);
        out
    }

    #[test]
    fn decomp2_identity() {
        let gamma = gamma_w(&parse_word("abAB", 2).unwrap());
        let id = GraphMorphism::identity(gamma.graph.clone());
        let recs = decomp2(&id, DecompMode::Surjective, 14, &mut surjective_only).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].parts[0].is_isomorphism() && recs[0].parts[1].is_isomorphism());
    }

    #[test]
    fn decomp2_counts_match_quotient_factorization() {
        let gamma = gamma_w(&parse_word("abAB", 2).unwrap());
        let recs = decomp2(&gamma.eta, DecompMode::Surjective, 14, &mut surjective_only).unwrap();
        let qs = quotients(&gamma.graph, 14).unwrap();
        let by_filter = qs
            .iter()
            .filter(|q| factor_through(&gamma.eta, q).is_some())
            .count();
        assert_eq!(recs.len(), by_filter);
        for r in &recs {
            let c = r.composed();
            assert_eq!(
                c.canonical_key().unwrap(),
                gamma.eta.canonical_key().unwrap()
            );
        }
    }

    #[test]
    fn decomp3_of_rank_one_circle_is_trivial_in_algebraic_mode() {
        // η_a : Γ_a -> Ω (rank 1): the loop has no proper quotients, and the
        // only algebraic triple is (id, id, η_a).
        let s = crate::session::Session::new();
        let gamma = gamma_w(&parse_word("a", 1).unwrap());
        let recs = decomp3(&gamma.eta, DecompMode::Algebraic, 14, &mut |m| {
            crate::algebraic::is_algebraic(m, &s)
        })
        .unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].parts[0].is_isomorphism());
        assert!(recs[0].parts[1].is_isomorphism());
    }

    #[test]
    fn decomp3_middle_identity_bijection() {
        // Records with identity first part correspond to Decomp² records.
        let gamma = gamma_w(&parse_word("abAB", 2).unwrap());
        let recs3 = decomp3(&gamma.eta, DecompMode::Surjective, 14, &mut surjective_only).unwrap();
        let recs2 = decomp2(&gamma.eta, DecompMode::Surjective, 14, &mut surjective_only).unwrap();
        let with_id_first = recs3
            .iter()
            .filter(|r| r.parts[0].is_isomorphism())
            .count();
        assert_eq!(with_id_first, recs2.len());
        assert!(recs3.len() >= recs2.len());
    }
}
