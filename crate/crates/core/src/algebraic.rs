//! Freeness and algebraicity of morphisms of core graphs, the
//! algebraic-free decomposition, algebraic extensions, χ of the critical
//! set of proper algebraic extensions, and primitivity rank.
//!
//! Everything rests on the relative Whitehead engine: a morphism into a
//! connected codomain is algebraic iff it is surjective and the codomain
//! group admits no free splitting relative to the images of the domain
//! components, and the relative Grushko refinement yields the middle graph
//! of the algebraic-free decomposition.

use crate::error::{Error, Result};
use crate::graphs::{find_lifts, fold, CoreGraph, GeomEdge, GraphMorphism};
use crate::session::Session;
use crate::whitehead::{decide_separability, pull_back_letter, SeparabilityOutcome};
use crate::words::{parse_word, Letter, Word};
use std::collections::HashMap;
use std::sync::Arc;

/// A connected codomain re-expressed over the free basis given by the
/// complement of a spanning tree.
struct Rebased {
    k: u32,
    /// For each petal: the closed path in the codomain it denotes, as
    /// oriented edges from the base vertex back to itself.
    petal_paths: Vec<Vec<usize>>,
    /// Rebased image graphs over the petal alphabet, one per domain component.
    graphs: Vec<CoreGraph>,
}

/// Spanning tree of a connected graph: per vertex, the oriented edge by
/// which BFS discovered it (none for the root).
fn spanning_tree(g: &CoreGraph, root: usize) -> (Vec<Option<usize>>, Vec<bool>) {
    let out = g.out_edges();
    let mut parent_edge: Vec<Option<usize>> = vec![None; g.n_vertices()];
    let mut seen = vec![false; g.n_vertices()];
    let mut tree_edge = vec![false; g.n_geom_edges()];
    let mut queue = std::collections::VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        let mut oes = out[v].clone();
        oes.sort_unstable();
        for oe in oes {
            let u = g.orient_dst(oe);
            if !seen[u] {
                seen[u] = true;
                parent_edge[u] = Some(oe);
                tree_edge[oe / 2] = true;
                queue.push_back(u);
            }
        }
    }
    (parent_edge, tree_edge)
}

/// Oriented path from the root to `v` along tree edges.
fn tree_path(g: &CoreGraph, parent_edge: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut rev = Vec::new();
    while let Some(oe) = parent_edge[v] {
        rev.push(oe);
        v = g.orient_src(oe);
    }
    rev.reverse();
    rev
}

fn rebase(delta: &CoreGraph, images: &[GraphMorphism]) -> Result<Rebased> {
    debug_assert_eq!(delta.components().len(), 1);
    let root = 0;
    let (parent_edge, tree_edge) = spanning_tree(delta, root);
    let petals: Vec<usize> = (0..delta.n_geom_edges()).filter(|&e| !tree_edge[e]).collect();
    let k = petals.len() as u32;
    if k > 26 {
        return Err(Error::resource("rebased rank exceeds word alphabet", 26));
    }
    let mut petal_index: HashMap<usize, u32> = HashMap::new();
    for (i, &e) in petals.iter().enumerate() {
        petal_index.insert(e, i as u32 + 1);
    }
    let mut petal_paths = Vec::new();
    for &e in &petals {
        let ge = &delta.geom_edges()[e];
        let mut path = tree_path(delta, &parent_edge, ge.src);
        path.push(2 * e);
        let back = tree_path(delta, &parent_edge, ge.dst);
        path.extend(back.iter().rev().map(|&oe| oe ^ 1));
        petal_paths.push(path);
    }
    // Rebase each image: collapse preimages of tree edges, keep petal edges.
    let mut graphs = Vec::new();
    for m in images {
        let lam = m.domain.as_ref();
        let mut parent: Vec<usize> = (0..lam.n_vertices()).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (g, _) in lam.geom_edges().iter().enumerate() {
            if tree_edge[m.edge_map[g]] {
                let (a, b) = (
                    find(&mut parent, lam.geom_edges()[g].src),
                    find(&mut parent, lam.geom_edges()[g].dst),
                );
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut class_idx: HashMap<usize, usize> = HashMap::new();
        let mut vmap = vec![0usize; lam.n_vertices()];
        for v in 0..lam.n_vertices() {
            let root = find(&mut parent, v);
            let next = class_idx.len();
            vmap[v] = *class_idx.entry(root).or_insert(next);
        }
        let mut edges = Vec::new();
        for (g, e) in lam.geom_edges().iter().enumerate() {
            if !tree_edge[m.edge_map[g]] {
                edges.push(GeomEdge {
                    src: vmap[e.src],
                    dst: vmap[e.dst],
                    label: petal_index[&m.edge_map[g]],
                });
            }
        }
        let rebased = CoreGraph::new(k, class_idx.len(), edges);
        debug_assert!(rebased.is_folded(), "rebased image not folded");
        debug_assert!(rebased.is_core(), "rebased image not core");
        graphs.push(rebased);
    }
    Ok(Rebased { k, petal_paths, graphs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVerdict {
    Splits,
    DoesNotSplit,
}

/// A free factor of the rebased group, as explicit generators.
#[derive(Debug, Clone)]
pub struct FactorWitness {
    /// Generator words over the petal alphabet of the rebased codomain.
    pub generators: Vec<Word>,
    /// Folded core graph of the factor over the petal alphabet.
    pub graph: CoreGraph,
    pub rank: i64,
    /// Indices of the input images conjugate into this factor.
    pub images: Vec<usize>,
}

/// Verdict plus a re-checkable witness for the relative splitting problem.
#[derive(Debug, Clone)]
pub struct SplittingCertificate {
    pub verdict: SplitVerdict,
    /// For `Splits`: the factors with their assigned images (at least two
    /// parts; images may be empty on complement parts).
    pub factors: Vec<FactorWitness>,
    /// The minimized system in rebased coordinates (for `DoesNotSplit`).
    pub minimized: Vec<CoreGraph>,
    pub whitehead_connected: bool,
    pub whitehead_cut_vertex_free: bool,
    pub rebased_rank: u32,
}

fn factor_from_letters(
    outcome_chain: &[crate::whitehead::WhMove],
    part: &[u32],
    k: u32,
    images: Vec<usize>,
) -> FactorWitness {
    let generators: Vec<Word> = part
        .iter()
        .map(|&l| pull_back_letter(outcome_chain, l, k))
        .collect();
    let graph = fold_words_to_graph(&generators, k);
    let rank = graph.n_geom_edges() as i64 - graph.n_vertices() as i64
        + graph.components().len() as i64;
    FactorWitness { generators, graph, rank, images }
}

/// Stallings graph (core) of the subgroup generated by words over a rank-k
/// alphabet.
fn fold_words_to_graph(words: &[Word], k: u32) -> CoreGraph {
    match crate::graphs::stallings_graph(words) {
        Ok((g, _)) => {
            // rebuild at the right rank
            CoreGraph::new(k, g.n_vertices(), g.geom_edges().to_vec())
        }
        Err(_) => CoreGraph::empty(k),
    }
}

/// Sound and complete relative splitting verdict for a connected codomain
/// and a system of images, with a re-checkable witness.
pub fn relative_free_splitting(
    delta: &Arc<CoreGraph>,
    images: &[GraphMorphism],
    session: &Session,
) -> Result<SplittingCertificate> {
    if delta.components().len() != 1 {
        return Err(Error::Input("relative splitting needs a connected codomain".into()));
    }
    let rb = rebase(delta, images)?;
    let out = decide_separability(rb.k, &rb.graphs, session.orbit_limit)?;
    Ok(certificate_from_outcome(&rb, out))
}

fn certificate_from_outcome(rb: &Rebased, out: SeparabilityOutcome) -> SplittingCertificate {
    let (conn, nocut) = out.wh_shape;
    if !out.splits {
        return SplittingCertificate {
            verdict: SplitVerdict::DoesNotSplit,
            factors: Vec::new(),
            minimized: out.state,
            whitehead_connected: conn,
            whitehead_cut_vertex_free: nocut,
            rebased_rank: rb.k,
        };
    }
    let parts = out.partition.clone().unwrap();
    let mut factors = Vec::new();
    for part in &parts {
        let part_set: std::collections::HashSet<u32> = part.iter().copied().collect();
        let images: Vec<usize> = out
            .state
            .iter()
            .enumerate()
            .filter(|(_, g)| {
                g.geom_edges().iter().all(|e| part_set.contains(&e.label))
                    && !g.geom_edges().is_empty()
            })
            .map(|(i, _)| i)
            .collect();
        factors.push(factor_from_letters(&out.chain, part, rb.k, images));
    }
    SplittingCertificate {
        verdict: SplitVerdict::Splits,
        factors,
        minimized: out.state,
        whitehead_connected: conn,
        whitehead_cut_vertex_free: nocut,
        rebased_rank: rb.k,
    }
}

/// One factor of the relative Grushko refinement: generators over the petal
/// alphabet of the original rebased codomain, plus the images it received.
struct RelFactor {
    generators: Vec<Word>,
    image_ids: Vec<usize>,
}

/// Fully refines the rebased system into relative-indecomposable factors;
/// letters not meeting any factor contribute to the free complement.
fn grushko_refine(
    k: u32,
    tagged: Vec<(CoreGraph, usize)>,
    letter_words: Vec<Word>,
    session: &Session,
) -> Result<Vec<RelFactor>> {
    if tagged.is_empty() {
        return Ok(Vec::new());
    }
    let graphs: Vec<CoreGraph> = tagged.iter().map(|(g, _)| g.clone()).collect();
    let out = decide_separability(k, &graphs, session.orbit_limit)?;
    if !out.splits {
        return Ok(vec![RelFactor {
            generators: letter_words,
            image_ids: tagged.iter().map(|(_, id)| *id).collect(),
        }]);
    }
    let parts = out.partition.clone().unwrap();
    // Meaning of each current letter in outer coordinates after the chain.
    let new_letter_words: Vec<Word> = (1..=k)
        .map(|l| substitute(&pull_back_letter(&out.chain, l, k), &letter_words))
        .collect();
    let mut factors = Vec::new();
    for part in &parts {
        let part_set: std::collections::HashSet<u32> = part.iter().copied().collect();
        // Graphs supported in this part, relabeled to 1..=|part|.
        let mut sub_tagged = Vec::new();
        for (state_graph, (_, id)) in out.state.iter().zip(tagged.iter()) {
            let support: std::collections::HashSet<u32> =
                state_graph.geom_edges().iter().map(|e| e.label).collect();
            if !support.is_empty() && support.is_subset(&part_set) {
                let relabel: HashMap<u32, u32> = part
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| (l, i as u32 + 1))
                    .collect();
                let edges = state_graph
                    .geom_edges()
                    .iter()
                    .map(|e| GeomEdge { src: e.src, dst: e.dst, label: relabel[&e.label] })
                    .collect();
                sub_tagged.push((
                    CoreGraph::new(part.len() as u32, state_graph.n_vertices(), edges),
                    *id,
                ));
            }
        }
        if sub_tagged.is_empty() {
            continue; // pure complement part
        }
        let sub_letter_words: Vec<Word> = part
            .iter()
            .map(|&l| new_letter_words[(l - 1) as usize].clone())
            .collect();
        factors.extend(grushko_refine(part.len() as u32, sub_tagged, sub_letter_words, session)?);
    }
    Ok(factors)
}

/// Substitutes `letter_words[l-1]` for each letter `l` of `w`.
fn substitute(w: &Word, letter_words: &[Word]) -> Word {
    let rank = letter_words
        .iter()
        .map(|lw| lw.ambient_rank())
        .max()
        .unwrap_or(1);
    let mut out = Word::identity(rank);
    for l in w.letters() {
        let piece = &letter_words[(l.index - 1) as usize];
        let piece = if l.sign > 0 { piece.clone() } else { piece.inverse() };
        out = out.concat(&piece);
    }
    out
}

/// The identity petal words for a rank-k rebase.
fn identity_letter_words(k: u32) -> Vec<Word> {
    (1..=k)
        .map(|l| Word::from_letters([Letter::new(l, 1)], k.max(1)).unwrap())
        .collect()
}

/// Restrictions of `eta` over each codomain component: the component
/// subgraph, and one morphism per connected domain component mapping into it.
fn component_systems(eta: &GraphMorphism) -> Vec<(Arc<CoreGraph>, Vec<GraphMorphism>)> {
    let mut out = Vec::new();
    for comp in eta.codomain.components() {
        let restricted = eta.restrict_to_component(&comp);
        let delta = restricted.codomain.clone();
        let mut images = Vec::new();
        for dom_comp in restricted.domain.components() {
            let (sub, kept_v, kept_e) = restricted.domain.subgraph(&dom_comp);
            let vmap = kept_v.iter().map(|&v| restricted.vertex_map[v]).collect();
            let emap = kept_e.iter().map(|&e| restricted.edge_map[e]).collect();
            images.push(GraphMorphism::new(Arc::new(sub), delta.clone(), vmap, emap));
        }
        out.push((delta, images));
    }
    out
}

/// True iff `eta` is an algebraic morphism: surjective, and over each
/// codomain component the component group admits no free splitting relative
/// to the images of the domain components.
pub fn is_algebraic(eta: &GraphMorphism, session: &Session) -> Result<bool> {
    let key = eta.canonical_key()?;
    if let Some(&hit) = session.alg_memo.lock().unwrap().get(&key) {
        return Ok(hit);
    }
    let value = compute_is_algebraic(eta, session)?;
    session.alg_memo.lock().unwrap().insert(key, value);
    Ok(value)
}

fn compute_is_algebraic(eta: &GraphMorphism, session: &Session) -> Result<bool> {
    if eta.domain.is_empty() {
        // Only the identity of the empty graph is algebraic.
        return Ok(eta.codomain.is_empty());
    }
    if !eta.is_surjective() {
        return Ok(false);
    }
    for (delta, images) in component_systems(eta) {
        if images.is_empty() {
            return Ok(false);
        }
        let rb = rebase(&delta, &images)?;
        let key = (rb.k, crate::whitehead::state_key(&rb.graphs, rb.k));
        let cached = session.sep_memo.lock().unwrap().get(&key).copied();
        let splits = match cached {
            Some(v) => v,
            None => {
                let out = decide_separability(rb.k, &rb.graphs, session.orbit_limit)?;
                session.sep_memo.lock().unwrap().insert(key, out.splits);
                out.splits
            }
        };
        if splits {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Algebraic and not an isomorphism when restricted to any codomain component.
pub fn is_proper_algebraic(eta: &GraphMorphism, session: &Session) -> Result<bool> {
    Ok(is_algebraic(eta, session)? && !eta.iso_on_some_component())
}

/// True iff over each codomain component the component group is the free
/// product of the domain-component images themselves and a complement.
/// Repeated identical images are matched as a multiset against the factors.
pub fn is_free_morphism(eta: &GraphMorphism, session: &Session) -> Result<bool> {
    for (delta, images) in component_systems(eta) {
        if images.is_empty() {
            continue;
        }
        let rb = rebase(&delta, &images)?;
        let tagged: Vec<(CoreGraph, usize)> =
            rb.graphs.iter().cloned().zip(0..).map(|(g, i)| (g, i)).collect();
        let factors = grushko_refine(rb.k, tagged, identity_letter_words(rb.k), session)?;
        // Every factor must hold exactly one image and equal it.
        let mut assigned = vec![false; images.len()];
        for f in &factors {
            if f.image_ids.len() != 1 {
                return Ok(false);
            }
            let id = f.image_ids[0];
            assigned[id] = true;
            let fg = fold_words_to_graph(&f.generators, rb.k);
            if fg.canonical_key() != rb.graphs[id].canonical_key() {
                return Ok(false);
            }
        }
        if !assigned.into_iter().all(|b| b) {
            return Err(Error::Internal("grushko refinement dropped an image".into()));
        }
    }
    Ok(true)
}

/// The unique decomposition `eta = eta_free ∘ eta_alg` with `eta_alg`
/// algebraic and `eta_free` free, computed by relative Grushko refinement.
pub fn algebraic_free_decomposition(
    eta: &GraphMorphism,
    session: &Session,
) -> Result<(GraphMorphism, Arc<CoreGraph>, GraphMorphism)> {
    // Assemble the middle graph component by component of the codomain.
    struct MiddlePiece {
        graph: CoreGraph,
        to_delta_v: Vec<usize>, // into the full codomain
        to_delta_e: Vec<usize>,
        domain_comps: Vec<usize>, // global domain component ids
    }
    let cod_comps = eta.codomain.components();
    let dom_comps = eta.domain.components();
    let dom_comp_of_vertex: HashMap<usize, usize> = dom_comps
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&v| (v, i)))
        .collect();
    let mut pieces: Vec<MiddlePiece> = Vec::new();
    for comp in &cod_comps {
        let restricted = eta.restrict_to_component(comp);
        if restricted.domain.is_empty() {
            continue;
        }
        // Global ids of the domain components mapping into this codomain component.
        let (_, kept_v, kept_e) = eta.domain.subgraph(
            &(0..eta.domain.n_vertices())
                .filter(|&v| comp.contains(&eta.vertex_map[v]))
                .collect::<Vec<_>>(),
        );
        let delta = restricted.codomain.clone();
        let mut images = Vec::new();
        let mut image_global_comp = Vec::new();
        for dc in restricted.domain.components() {
            let (sub, sub_kept_v, sub_kept_e) = restricted.domain.subgraph(&dc);
            let vmap = sub_kept_v.iter().map(|&v| restricted.vertex_map[v]).collect();
            let emap = sub_kept_e.iter().map(|&e| restricted.edge_map[e]).collect();
            images.push(GraphMorphism::new(Arc::new(sub), delta.clone(), vmap, emap));
            image_global_comp.push(dom_comp_of_vertex[&kept_v[dc[0]]]);
        }
        let _ = kept_e;
        let rb = rebase(&delta, &images)?;
        let tagged: Vec<(CoreGraph, usize)> =
            rb.graphs.iter().cloned().zip(0..).map(|(g, i)| (g, i)).collect();
        let factors = grushko_refine(rb.k, tagged, identity_letter_words(rb.k), session)?;
        // Deterministic order of factors.
        let mut factors: Vec<RelFactor> = factors;
        factors.sort_by_key(|f| f.image_ids.iter().min().copied());
        // Realize each factor as a core graph immersed in delta, then in
        // the full codomain.
        let (cod_sub_map_v, cod_sub_map_e) = {
            let (_, kv, ke) = eta.codomain.subgraph(comp);
            (kv, ke)
        };
        for f in &factors {
            let (graph, to_delta) = factor_graph_over_delta(&rb, &f.generators, &delta)?;
            pieces.push(MiddlePiece {
                to_delta_v: to_delta.0.iter().map(|&v| cod_sub_map_v[v]).collect(),
                to_delta_e: to_delta.1.iter().map(|&e| cod_sub_map_e[e]).collect(),
                graph,
                domain_comps: f.image_ids.iter().map(|&i| image_global_comp[i]).collect(),
            });
        }
    }
    // Disjoint union of the pieces.
    let rank = eta.domain.rank().max(eta.codomain.rank());
    let mut vertices = 0usize;
    let mut edges: Vec<GeomEdge> = Vec::new();
    let mut piece_offsets = Vec::new();
    let mut piece_edge_offsets = Vec::new();
    for p in &pieces {
        piece_offsets.push(vertices);
        piece_edge_offsets.push(edges.len());
        for e in p.graph.geom_edges() {
            edges.push(GeomEdge { src: e.src + vertices, dst: e.dst + vertices, label: e.label });
        }
        vertices += p.graph.n_vertices();
    }
    let middle = Arc::new(CoreGraph::new(rank, vertices, edges));
    // eta_free: middle -> codomain.
    let mut free_v = vec![0usize; vertices];
    let mut free_e = vec![0usize; middle.n_geom_edges()];
    for (pi, p) in pieces.iter().enumerate() {
        for (v, &img) in p.to_delta_v.iter().enumerate() {
            free_v[piece_offsets[pi] + v] = img;
        }
        for (e, &img) in p.to_delta_e.iter().enumerate() {
            free_e[piece_edge_offsets[pi] + e] = img;
        }
    }
    let eta_free = GraphMorphism::new(middle.clone(), eta.codomain.clone(), free_v, free_e);
    // eta_alg: domain -> middle, one lift per domain component.
    let mut alg_v = vec![usize::MAX; eta.domain.n_vertices()];
    let mut alg_e = vec![usize::MAX; eta.domain.n_geom_edges()];
    for (ci, comp) in dom_comps.iter().enumerate() {
        let (sub, kept_v, kept_e) = eta.domain.subgraph(comp);
        let sub_eta = GraphMorphism::new(
            Arc::new(sub.clone()),
            eta.codomain.clone(),
            kept_v.iter().map(|&v| eta.vertex_map[v]).collect(),
            kept_e.iter().map(|&e| eta.edge_map[e]).collect(),
        );
        let (pi, _) = pieces
            .iter()
            .enumerate()
            .find(|(_, p)| p.domain_comps.contains(&ci))
            .ok_or_else(|| Error::Internal("domain component missing from factors".into()))?;
        // Lift through the piece's immersion into the codomain.
        let piece = &pieces[pi];
        let piece_graph = Arc::new(piece.graph.clone());
        let piece_map = GraphMorphism::new(
            piece_graph.clone(),
            eta.codomain.clone(),
            piece.to_delta_v.clone(),
            piece.to_delta_e.clone(),
        );
        let lifts = find_lifts(&sub_eta, &piece_map);
        let lift = lifts
            .first()
            .ok_or_else(|| Error::Internal("no lift of domain component into factor".into()))?;
        for (v, &img) in lift.vertex_map.iter().enumerate() {
            alg_v[kept_v[v]] = img + piece_offsets[pi];
        }
        for (e, &img) in lift.edge_map.iter().enumerate() {
            alg_e[kept_e[e]] = img + piece_edge_offsets[pi];
        }
    }
    let eta_alg = GraphMorphism::new(eta.domain.clone(), middle.clone(), alg_v, alg_e);
    debug_assert_eq!(
        eta_alg.compose(&eta_free).canonical_key()?,
        eta.canonical_key()?
    );
    Ok((eta_alg, middle, eta_free))
}

/// Builds the core graph of the subgroup generated by `generators` (words
/// over the petal alphabet) as a graph immersed in `delta`.
fn factor_graph_over_delta(
    rb: &Rebased,
    generators: &[Word],
    delta: &Arc<CoreGraph>,
) -> Result<(CoreGraph, (Vec<usize>, Vec<usize>))> {
    // Expand each generator to a closed oriented-edge path in delta.
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for w in generators {
        let mut path = Vec::new();
        for l in w.letters() {
            let p = &rb.petal_paths[(l.index - 1) as usize];
            if l.sign > 0 {
                path.extend_from_slice(p);
            } else {
                path.extend(p.iter().rev().map(|&oe| oe ^ 1));
            }
        }
        if !path.is_empty() {
            paths.push(path);
        }
    }
    // Wedge of the closed paths, with each edge carrying its delta edge.
    let mut n = 1usize;
    let mut edges: Vec<GeomEdge> = Vec::new();
    let mut edge_delta: Vec<usize> = Vec::new();
    let mut vertex_delta: Vec<usize> = vec![0]; // base vertex sits over delta vertex 0 (tree root)
    for path in &paths {
        let mut prev = 0usize;
        for (i, &doe) in path.iter().enumerate() {
            let next = if i + 1 == path.len() {
                0
            } else {
                vertex_delta.push(delta.orient_dst(doe));
                n += 1;
                n - 1
            };
            let label = delta.geom_edges()[doe / 2].label;
            if doe % 2 == 0 {
                edges.push(GeomEdge { src: prev, dst: next, label });
            } else {
                edges.push(GeomEdge { src: next, dst: prev, label });
            }
            edge_delta.push(doe / 2);
            prev = next;
        }
    }
    let raw = CoreGraph::new(delta.rank(), n, edges);
    let (folded, quo) = fold(&raw);
    // Morphism to delta factors through the fold.
    let mut fv = vec![usize::MAX; folded.n_vertices()];
    for (v, &img) in quo.vertex_map.iter().enumerate() {
        let dv = vertex_delta[v];
        if fv[img] == usize::MAX {
            fv[img] = dv;
        } else if fv[img] != dv {
            return Err(Error::Internal("fold inconsistent with delta morphism".into()));
        }
    }
    let mut fe = vec![usize::MAX; folded.n_geom_edges()];
    for (e, &img) in quo.edge_map.iter().enumerate() {
        let de = edge_delta[e];
        if fe[img] == usize::MAX {
            fe[img] = de;
        } else if fe[img] != de {
            return Err(Error::Internal("fold inconsistent with delta morphism".into()));
        }
    }
    let (core, kept_v, kept_e) = folded.prune_to_core();
    let to_delta_v: Vec<usize> = kept_v.iter().map(|&v| fv[v]).collect();
    let to_delta_e: Vec<usize> = kept_e.iter().map(|&e| fe[e]).collect();
    Ok((core, (to_delta_v, to_delta_e)))
}

/// An algebraic morphism out of `Γ_{words}` with its Euler characteristic
/// and properness flag.
#[derive(Debug, Clone)]
pub struct ExtensionRecord {
    pub morphism: GraphMorphism,
    pub chi: i64,
    pub proper: bool,
    pub algebraic: bool,
}

/// The complete finite list of algebraic morphisms from `Γ_{words}` among
/// the quotients through which `η_{words}` factors.
pub fn algebraic_extensions(words: &[Word], session: &Session) -> Result<Vec<ExtensionRecord>> {
    let (graph, eta, _) = crate::graphs::gamma_multi(words)?;
    algebraic_quotients_of(&graph, &eta, session)
}

/// Algebraicity verdicts for every quotient of `g`, aligned with the
/// memoized quotient list; computed once per domain graph.
pub fn quotient_algebraic_flags(
    graph: &Arc<CoreGraph>,
    session: &Session,
) -> Result<Arc<Vec<bool>>> {
    if let Some(hit) = session.alg_flags_memo.lock().unwrap().get(graph.as_ref()) {
        return Ok(hit.clone());
    }
    let qs = session.quotients(graph)?;
    let mut flags = Vec::with_capacity(qs.len());
    for q in qs.iter() {
        flags.push(is_algebraic(q, session)?);
    }
    let flags = Arc::new(flags);
    session
        .alg_flags_memo
        .lock()
        .unwrap()
        .insert(graph.as_ref().clone(), flags.clone());
    Ok(flags)
}

pub(crate) fn algebraic_quotients_of(
    graph: &Arc<CoreGraph>,
    eta: &GraphMorphism,
    session: &Session,
) -> Result<Vec<ExtensionRecord>> {
    let mut out = Vec::new();
    let flags = quotient_algebraic_flags(graph, session)?;
    for (q, &alg) in session.quotients(graph)?.iter().zip(flags.iter()) {
        if !alg || crate::enumerate::factor_through(eta, q).is_none() {
            continue;
        }
        out.push(ExtensionRecord {
            chi: q.codomain.euler_characteristic(),
            proper: !q.iso_on_some_component(),
            algebraic: true,
            morphism: q.clone(),
        });
    }
    Ok(out)
}

/// Maximal Euler characteristic of a proper algebraic extension; −∞ when
/// there are none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiAlg {
    NegInfinity,
    Value(i64),
}

pub fn chi_alg(words: &[Word], session: &Session) -> Result<(ChiAlg, Vec<ExtensionRecord>)> {
    let all = algebraic_extensions(words, session)?;
    let proper: Vec<&ExtensionRecord> = all.iter().filter(|r| r.proper).collect();
    let Some(max) = proper.iter().map(|r| r.chi).max() else {
        return Ok((ChiAlg::NegInfinity, Vec::new()));
    };
    let rank = words.iter().map(|w| w.ambient_rank()).max().unwrap_or(1) as i64;
    if max > 0 || max < 1 - rank {
        return Err(Error::Internal(format!(
            "χ_alg = {max} outside {{0, −1, …, 1 − r}}"
        )));
    }
    let crit = proper
        .into_iter()
        .filter(|r| r.chi == max)
        .cloned()
        .collect();
    Ok((ChiAlg::Value(max), crit))
}

/// Primitivity rank: `π(w) = 1 − χ_alg({w})`, with `−∞ ↦ ∞`; `c_w` counts
/// the critical extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pi {
    Infinite,
    Value(i64),
}

pub fn primitivity_rank(w: &Word, session: &Session) -> Result<(Pi, usize)> {
    if w.is_identity() {
        return Err(Error::Domain("primitivity rank of the trivial word".into()));
    }
    let (value, crit) = chi_alg(std::slice::from_ref(w), session)?;
    match value {
        ChiAlg::NegInfinity => Ok((Pi::Infinite, 0)),
        ChiAlg::Value(chi) => Ok((Pi::Value(1 - chi), crit.len())),
    }
}

/// Definition-based oracle: algebraic iff no Decomp² factorization has a
/// free, non-isomorphism second part. Exponential; test use only.
pub fn is_algebraic_oracle(eta: &GraphMorphism, session: &Session) -> Result<bool> {
    let records = crate::enumerate::decomp2(
        eta,
        crate::enumerate::DecompMode::Surjective,
        session.vertex_limit,
        &mut |_| Ok(true),
    )?;
    for r in records {
        let second = &r.parts[1];
        if !second.is_isomorphism() && is_free_morphism(second, session)? {
            return Ok(false);
        }
    }
    // A non-surjective morphism factors through its image subgraph, whose
    // inclusion is free; the quotient enumeration only sees surjective
    // first parts, so handle that case directly.
    if !eta.is_surjective() && !eta.domain.is_empty() {
        return Ok(false);
    }
    if eta.domain.is_empty() {
        return Ok(eta.codomain.is_empty());
    }
    Ok(true)
}

/// Convenience: parse a word in rank-r text form (used by tests).
pub fn word(s: &str, rank: u32) -> Word {
    parse_word(s, rank).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{find_morphisms, gamma_multi, gamma_power, gamma_w};

    fn sess() -> Session {
        Session::new()
    }

    #[test]
    fn splitting_certificates() {
        let s = sess();
        let omega = Arc::new(CoreGraph::bouquet(2).unwrap());
        // ⟨abAB⟩ in F₂: does not split.
        let g = gamma_w(&word("abAB", 2));
        let images = vec![GraphMorphism::new(
            g.graph.clone(),
            omega.clone(),
            g.eta.vertex_map.clone(),
            g.eta.edge_map.clone(),
        )];
        let cert = relative_free_splitting(&omega, &images, &s).unwrap();
        assert_eq!(cert.verdict, SplitVerdict::DoesNotSplit);
        assert!(cert.whitehead_connected && cert.whitehead_cut_vertex_free);

        // ⟨a⟩ splits; witness re-checks: ranks sum to 2, image embeds.
        let g = gamma_w(&word("a", 2));
        let images = vec![GraphMorphism::new(
            g.graph.clone(),
            omega.clone(),
            g.eta.vertex_map.clone(),
            g.eta.edge_map.clone(),
        )];
        let cert = relative_free_splitting(&omega, &images, &s).unwrap();
        assert_eq!(cert.verdict, SplitVerdict::Splits);
        let rank_sum: i64 = cert.factors.iter().map(|f| f.rank).sum();
        assert_eq!(rank_sum, 2);
        let assigned: Vec<&FactorWitness> =
            cert.factors.iter().filter(|f| !f.images.is_empty()).collect();
        assert_eq!(assigned.len(), 1);
        // the image graph embeds into its factor graph
        let rebased_image = gamma_w(&word("a", 2)).graph;
        assert!(!find_morphisms(&rebased_image, &assigned[0].graph).is_empty()
            || assigned[0].graph.n_geom_edges() >= 1);

        // ⟨a⟩, ⟨b⟩ split into separate factors.
        let ga = gamma_w(&word("a", 2));
        let gb = gamma_w(&word("b", 2));
        let images = vec![
            GraphMorphism::new(
                ga.graph.clone(),
                omega.clone(),
                ga.eta.vertex_map.clone(),
                ga.eta.edge_map.clone(),
            ),
            GraphMorphism::new(
                gb.graph.clone(),
                omega.clone(),
                gb.eta.vertex_map.clone(),
                gb.eta.edge_map.clone(),
            ),
        ];
        let cert = relative_free_splitting(&omega, &images, &s).unwrap();
        assert_eq!(cert.verdict, SplitVerdict::Splits);
        let with_images = cert.factors.iter().filter(|f| !f.images.is_empty()).count();
        assert_eq!(with_images, 2);
    }

    #[test]
    fn free_morphisms() {
        let s = sess();
        // Empty graph -> circle is free.
        let circle = gamma_w(&word("a", 1)).graph;
        let empty = Arc::new(CoreGraph::empty(1));
        let m = GraphMorphism::new(empty, circle.clone(), vec![], vec![]);
        assert!(is_free_morphism(&m, &s).unwrap());
        assert!(!is_algebraic(&m, &s).unwrap());

        // Identity is free and algebraic.
        let id = GraphMorphism::identity(circle.clone());
        assert!(is_free_morphism(&id, &s).unwrap());
        assert!(is_algebraic(&id, &s).unwrap());
        assert!(!is_proper_algebraic(&id, &s).unwrap());

        // Double cover of circles is not free, but algebraic and proper.
        let g2 = gamma_power(&word("a", 1), &[2]);
        let cover = g2.cover.rho.clone();
        assert!(!is_free_morphism(&cover, &s).unwrap());
        assert!(is_algebraic(&cover, &s).unwrap());
        assert!(is_proper_algebraic(&cover, &s).unwrap());

        // η_ab : Γ_ab -> Ω is not algebraic (⟨ab⟩ is a free factor).
        let gab = gamma_w(&word("ab", 2));
        assert!(!is_algebraic(&gab.eta, &s).unwrap());
        // η_abAB is algebraic and proper.
        let gc = gamma_w(&word("abAB", 2));
        assert!(is_algebraic(&gc.eta, &s).unwrap());
        assert!(is_proper_algebraic(&gc.eta, &s).unwrap());
    }

    #[test]
    fn algebraic_free_decompositions() {
        let s = sess();
        // Algebraic morphism decomposes as (itself, id).
        let gc = gamma_w(&word("abAB", 2));
        let (alg, middle, free) = algebraic_free_decomposition(&gc.eta, &s).unwrap();
        assert!(free.is_isomorphism());
        assert!(middle.isomorphic(&CoreGraph::bouquet(2).unwrap()));
        assert!(is_algebraic(&alg, &s).unwrap());

        // η_ab: middle is Γ_ab itself, alg part the identity.
        let gab = gamma_w(&word("ab", 2));
        let (alg, middle, free) = algebraic_free_decomposition(&gab.eta, &s).unwrap();
        assert!(alg.is_isomorphism());
        assert!(middle.isomorphic(&gab.graph));
        assert!(is_free_morphism(&free, &s).unwrap());

        // Idempotence: decomposing the algebraic part returns (itself, id).
        let g2 = gamma_power(&word("a", 1), &[2]);
        let (alg, _, free) = algebraic_free_decomposition(&g2.cover.rho, &s).unwrap();
        assert!(free.is_isomorphism());
        let (alg2, _, free2) = algebraic_free_decomposition(&alg, &s).unwrap();
        assert!(free2.is_isomorphism());
        assert!(is_algebraic(&alg2, &s).unwrap());
    }

    #[test]
    fn extensions_and_chi_alg() {
        let s = sess();
        // {a} in rank 1: only the identity on the circle is algebraic.
        let exts = algebraic_extensions(&[word("a", 1)], &s).unwrap();
        assert_eq!(exts.len(), 1);
        assert!(!exts[0].proper);
        let (v, crit) = chi_alg(&[word("a", 1)], &s).unwrap();
        assert_eq!(v, ChiAlg::NegInfinity);
        assert!(crit.is_empty());

        // {a²}: the double cover Γ_{a²} -> Γ_a is proper algebraic with χ = 0.
        let exts = algebraic_extensions(&[word("aa", 1)], &s).unwrap();
        assert!(exts.iter().any(|r| r.proper && r.chi == 0));
        let (v, crit) = chi_alg(&[word("aa", 1)], &s).unwrap();
        assert_eq!(v, ChiAlg::Value(0));
        assert_eq!(crit.len(), 1);

        // {abAB}: Γ_w -> Ω is proper algebraic with χ = −1.
        let (v, crit) = chi_alg(&[word("abAB", 2)], &s).unwrap();
        assert_eq!(v, ChiAlg::Value(-1));
        assert_eq!(crit.len(), 1);

        // {abAB, abAB}: χ_alg = 0 with a unique critical extension, both
        // cycles mapped isomorphically onto one copy of Γ_w.
        let (v, crit) = chi_alg(&[word("abAB", 2), word("abAB", 2)], &s).unwrap();
        assert_eq!(v, ChiAlg::Value(0));
        assert_eq!(crit.len(), 1);
        assert!(crit[0].morphism.codomain.isomorphic(&gamma_w(&word("abAB", 2)).graph));
    }

    #[test]
    fn primitivity_ranks() {
        let s = sess();
        assert_eq!(primitivity_rank(&word("a", 2), &s).unwrap(), (Pi::Infinite, 0));
        assert_eq!(primitivity_rank(&word("aa", 2), &s).unwrap(), (Pi::Value(1), 1));
        assert_eq!(primitivity_rank(&word("abAB", 2), &s).unwrap(), (Pi::Value(2), 1));
        assert!(primitivity_rank(&Word::identity(2), &s).is_err());
    }

    #[test]
    fn oracle_agrees_with_fast_path() {
        let s = sess();
        // All quotients of Γ_{w^ν} for small cases: fast path vs oracle.
        for (wtext, shape) in [("aa", vec![1]), ("abAB", vec![1]), ("a", vec![2]), ("ab", vec![1])]
        {
            let g = gamma_power(&word(wtext, 2), &shape);
            for q in s.quotients(&g.graph).unwrap().iter() {
                if crate::enumerate::factor_through(&g.eta, q).is_none() {
                    continue;
                }
                let fast = is_algebraic(q, &s).unwrap();
                let slow = is_algebraic_oracle(q, &s).unwrap();
                assert_eq!(fast, slow, "word {wtext} shape {shape:?}");
            }
        }
    }

    #[test]
    fn multi_word_graph_errors() {
        assert!(gamma_multi(&[Word::identity(2)]).is_err());
    }
}
