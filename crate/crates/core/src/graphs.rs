//! Labeled Serre graphs over a fixed basis, Stallings folding, the cycle
//! graphs of words and their finite covers, label-preserving morphisms,
//! and canonical forms.
//!
//! A graph stores geometric edges; oriented edge `2g` reads the label of
//! geometric edge `g` forward from its source, `2g + 1` reads the inverse
//! from its target. Folded graphs are deterministic transition systems over
//! signed labels, which is what makes the breadth-first canonical code below
//! sound and complete for isomorphism.

use crate::error::{Error, Result};
use crate::words::Word;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeomEdge {
    pub src: usize,
    pub dst: usize,
    pub label: u32,
}

/// A finite labeled Serre graph; possibly disconnected or empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreGraph {
    rank: u32,
    n_vertices: usize,
    edges: Vec<GeomEdge>,
}

/// Signed label of an oriented edge, encoded `2(l-1)` forward, `2(l-1)+1` backward.
fn direction_code(label: u32, forward: bool) -> u32 {
    2 * (label - 1) + if forward { 0 } else { 1 }
}

impl CoreGraph {
    pub fn new(rank: u32, n_vertices: usize, edges: Vec<GeomEdge>) -> Self {
        debug_assert!(edges.iter().all(|e| e.src < n_vertices
            && e.dst < n_vertices
            && e.label >= 1
            && e.label <= rank));
        CoreGraph { rank, n_vertices, edges }
    }

    pub fn empty(rank: u32) -> Self {
        CoreGraph { rank, n_vertices: 0, edges: Vec::new() }
    }

    /// One vertex and `rank` labeled loops.
    pub fn bouquet(rank: u32) -> Result<Self> {
        if rank < 1 {
            return Err(Error::Input(format!("bouquet rank {rank} < 1")));
        }
        let edges = (1..=rank).map(|l| GeomEdge { src: 0, dst: 0, label: l }).collect();
        Ok(CoreGraph { rank, n_vertices: 1, edges })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_geom_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn geom_edges(&self) -> &[GeomEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.n_vertices == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64
    }

    /// Source vertex of an oriented edge.
    pub fn orient_src(&self, oe: usize) -> usize {
        let e = &self.edges[oe / 2];
        if oe % 2 == 0 { e.src } else { e.dst }
    }

    pub fn orient_dst(&self, oe: usize) -> usize {
        self.orient_src(oe ^ 1)
    }

    pub fn orient_dir(&self, oe: usize) -> u32 {
        direction_code(self.edges[oe / 2].label, oe % 2 == 0)
    }

    /// Oriented edges grouped by source vertex.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices];
        for oe in 0..2 * self.edges.len() {
            out[self.orient_src(oe)].push(oe);
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        let mut d = 0;
        for e in &self.edges {
            if e.src == v {
                d += 1;
            }
            if e.dst == v {
                d += 1;
            }
        }
        d
    }

    /// No two distinct oriented edges with the same signed label out of one vertex.
    pub fn is_folded(&self) -> bool {
        let mut seen = HashMap::new();
        for oe in 0..2 * self.edges.len() {
            let key = (self.orient_src(oe), self.orient_dir(oe));
            if let Some(prev) = seen.insert(key, oe) {
                if prev / 2 != oe / 2 {
                    return false;
                }
                // A loop presents its two ends at the same vertex with
                // distinct directions, so a collision within one geometric
                // edge can only be a label-`l` loop folded onto itself,
                // which never happens for distinct orientations.
                return false;
            }
        }
        true
    }

    pub fn is_core(&self) -> bool {
        (0..self.n_vertices).all(|v| self.degree(v) >= 2)
    }

    /// Vertex partition into connected components, in order of smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n_vertices];
        let out = self.out_edges();
        let mut comps = Vec::new();
        for start in 0..self.n_vertices {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &oe in &out[v] {
                    let u = self.orient_dst(oe);
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn component_ids(&self) -> Vec<usize> {
        let comps = self.components();
        let mut ids = vec![0; self.n_vertices];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                ids[v] = i;
            }
        }
        ids
    }

    /// True when the component of vertices `comp` is a single cycle (χ = 0).
    pub fn component_is_cycle(&self, comp: &[usize]) -> bool {
        let in_comp: std::collections::HashSet<usize> = comp.iter().copied().collect();
        let e = self
            .edges
            .iter()
            .filter(|e| in_comp.contains(&e.src))
            .count();
        e == comp.len() && comp.iter().all(|&v| self.degree(v) == 2)
    }

    pub fn has_cycle_component(&self) -> bool {
        self.components().iter().any(|c| self.component_is_cycle(c))
    }

    pub fn is_union_of_cycles(&self) -> bool {
        self.components().iter().all(|c| self.component_is_cycle(c))
    }

    /// Induced subgraph on a vertex set, with the inclusion data.
    pub fn subgraph(&self, vertices: &[usize]) -> (CoreGraph, Vec<usize>, Vec<usize>) {
        let mut vmap = HashMap::new();
        for (i, &v) in vertices.iter().enumerate() {
            vmap.insert(v, i);
        }
        let mut edges = Vec::new();
        let mut emap = Vec::new();
        for (g, e) in self.edges.iter().enumerate() {
            if let (Some(&s), Some(&d)) = (vmap.get(&e.src), vmap.get(&e.dst)) {
                emap.push(g);
                edges.push(GeomEdge { src: s, dst: d, label: e.label });
            }
        }
        (
            CoreGraph { rank: self.rank, n_vertices: vertices.len(), edges },
            vertices.to_vec(),
            emap,
        )
    }

    /// Iteratively removes degree-≤1 vertices; returns the core together
    /// with the kept vertex and geometric-edge indices.
    pub fn prune_to_core(&self) -> (CoreGraph, Vec<usize>, Vec<usize>) {
        let mut alive_v = vec![true; self.n_vertices];
        let mut alive_e = vec![true; self.edges.len()];
        loop {
            let mut deg = vec![0usize; self.n_vertices];
            for (g, e) in self.edges.iter().enumerate() {
                if alive_e[g] {
                    deg[e.src] += 1;
                    deg[e.dst] += 1;
                }
            }
            let mut changed = false;
            for v in 0..self.n_vertices {
                if alive_v[v] && deg[v] <= 1 {
                    alive_v[v] = false;
                    changed = true;
                    for (g, e) in self.edges.iter().enumerate() {
                        if alive_e[g] && (e.src == v || e.dst == v) {
                            alive_e[g] = false;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let kept: Vec<usize> = (0..self.n_vertices).filter(|&v| alive_v[v]).collect();
        let mut vidx = HashMap::new();
        for (i, &v) in kept.iter().enumerate() {
            vidx.insert(v, i);
        }
        let mut edges = Vec::new();
        let mut emap = Vec::new();
        for (g, e) in self.edges.iter().enumerate() {
            if alive_e[g] {
                emap.push(g);
                edges.push(GeomEdge { src: vidx[&e.src], dst: vidx[&e.dst], label: e.label });
            }
        }
        (CoreGraph { rank: self.rank, n_vertices: kept.len(), edges }, kept, emap)
    }

    /// Deterministic breadth-first code of the component containing `start`.
    /// Requires a folded graph. Returns the code and the discovery order.
    fn bfs_code(&self, start: usize, out: &[Vec<usize>]) -> (Vec<i64>, Vec<usize>) {
        let mut index = vec![usize::MAX; self.n_vertices];
        let mut order = vec![start];
        index[start] = 0;
        let mut code = Vec::new();
        let mut pos = 0;
        while pos < order.len() {
            let v = order[pos];
            let mut trans: Vec<(u32, usize)> = out[v]
                .iter()
                .map(|&oe| (self.orient_dir(oe), self.orient_dst(oe)))
                .collect();
            trans.sort_unstable();
            for (dir, tgt) in trans {
                if index[tgt] == usize::MAX {
                    order.push(tgt);
                    index[tgt] = order.len() - 1;
                }
                code.push(dir as i64);
                code.push(index[tgt] as i64);
            }
            code.push(-1);
            pos += 1;
        }
        (code, order)
    }

    /// Canonical data: the graph key plus every vertex ordering that
    /// realizes it (one per code-minimizing start vertex and ordering of
    /// equal components). Deterministic across storage permutations.
    pub fn canonical(&self) -> Canonical {
        let out = self.out_edges();
        let comps = self.components();
        let mut comp_data: Vec<(Vec<i64>, Vec<Vec<usize>>)> = Vec::new();
        for comp in &comps {
            let mut best: Option<Vec<i64>> = None;
            let mut orders: Vec<Vec<usize>> = Vec::new();
            for &start in comp {
                let (code, order) = self.bfs_code(start, &out);
                match &best {
                    Some(b) if *b < code => {}
                    Some(b) if *b == code => orders.push(order),
                    _ => {
                        best = Some(code);
                        orders = vec![order];
                    }
                }
            }
            comp_data.push((best.unwrap_or_default(), orders));
        }
        comp_data.sort_by(|a, b| a.0.cmp(&b.0));
        let mut key: Vec<i64> = vec![self.rank as i64, self.n_vertices as i64, self.edges.len() as i64];
        for (code, _) in &comp_data {
            key.push(-2);
            key.extend_from_slice(code);
        }
        Canonical { key: CanonKey(key), comp_data }
    }

    pub fn canonical_key(&self) -> CanonKey {
        self.canonical().key
    }

    pub fn isomorphic(&self, other: &CoreGraph) -> bool {
        self.canonical_key() == other.canonical_key()
    }

    /// Human-readable adjacency dump in canonical order, one component per block.
    pub fn dump(&self) -> String {
        let canon = self.canonical();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "graph rank={} vertices={} edges={} chi={}",
            self.rank,
            self.n_vertices,
            self.edges.len(),
            self.euler_characteristic()
        );
        for (ci, order) in canon.comp_data.iter().enumerate() {
            let order = &order.1[0];
            let mut newidx = HashMap::new();
            for (i, &v) in order.iter().enumerate() {
                newidx.insert(v, i);
            }
            let _ = writeln!(s, "component {ci}");
            let out = self.out_edges();
            for (i, &v) in order.iter().enumerate() {
                let mut trans: Vec<(u32, usize)> = out[v]
                    .iter()
                    .map(|&oe| (self.orient_dir(oe), newidx[&self.orient_dst(oe)]))
                    .collect();
                trans.sort_unstable();
                let desc: Vec<String> = trans
                    .iter()
                    .map(|(d, t)| {
                        let l = d / 2 + 1;
                        let sign = if d % 2 == 0 { "" } else { "-" };
                        format!("{sign}{l}->{t}")
                    })
                    .collect();
                let _ = writeln!(s, "  v{}: {}", i, desc.join(" "));
            }
        }
        s
    }
}

/// Opaque canonical key; equal keys iff isomorphic as labeled graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonKey(pub Vec<i64>);

pub struct Canonical {
    pub key: CanonKey,
    /// Per component (sorted by code): the code and all orders realizing it.
    comp_data: Vec<(Vec<i64>, Vec<Vec<usize>>)>,
}

impl Canonical {
    /// Every vertex relabeling `old -> new` consistent with the canonical key.
    /// Guarded against combinatorial blowup.
    pub fn orderings(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        // Group equal-code components; within a group all assignments of
        // component slots are interchangeable.
        let mut groups: Vec<(usize, usize)> = Vec::new(); // (start, len) in comp_data
        let mut i = 0;
        while i < self.comp_data.len() {
            let mut j = i + 1;
            while j < self.comp_data.len() && self.comp_data[j].0 == self.comp_data[i].0 {
                j += 1;
            }
            groups.push((i, j - i));
            i = j;
        }
        let n: usize = self.comp_data.iter().map(|(_, o)| o[0].len()).sum();
        let mut results: Vec<Vec<usize>> = vec![Vec::new()];
        for &(start, len) in &groups {
            let slots: Vec<usize> = (start..start + len).collect();
            let mut new_results = Vec::new();
            for perm in permutations(&slots) {
                // For this assignment of components to slots, choose one
                // order per component.
                let mut partials: Vec<Vec<usize>> = vec![Vec::new()];
                for &comp_idx in &perm {
                    let mut next = Vec::new();
                    for p in &partials {
                        for ord in &self.comp_data[comp_idx].1 {
                            let mut q = p.clone();
                            q.extend_from_slice(ord);
                            next.push(q);
                        }
                    }
                    partials = next;
                    if partials.len() > cap {
                        return Err(Error::Internal("canonical ordering blowup".into()));
                    }
                }
                for base in &results {
                    for tail in &partials {
                        let mut full = base.clone();
                        full.extend_from_slice(tail);
                        new_results.push(full);
                    }
                }
                if new_results.len() > cap {
                    return Err(Error::Internal("canonical ordering blowup".into()));
                }
            }
            results = new_results;
        }
        // Convert discovery sequences (new -> old) into old -> new maps.
        Ok(results
            .into_iter()
            .map(|seq| {
                let mut m = vec![usize::MAX; n];
                for (new, &old) in seq.iter().enumerate() {
                    m[old] = new;
                }
                m
            })
            .collect())
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// A label-preserving graph morphism; commutes with incidence and involution.
#[derive(Debug, Clone)]
pub struct GraphMorphism {
    pub domain: Arc<CoreGraph>,
    pub codomain: Arc<CoreGraph>,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

impl GraphMorphism {
    pub fn new(
        domain: Arc<CoreGraph>,
        codomain: Arc<CoreGraph>,
        vertex_map: Vec<usize>,
        edge_map: Vec<usize>,
    ) -> Self {
        let m = GraphMorphism { domain, codomain, vertex_map, edge_map };
        debug_assert!(m.validate().is_ok(), "{:?}", m.validate());
        m
    }

    pub fn identity(g: Arc<CoreGraph>) -> Self {
        let vmap = (0..g.n_vertices()).collect();
        let emap = (0..g.n_geom_edges()).collect();
        GraphMorphism { domain: g.clone(), codomain: g, vertex_map: vmap, edge_map: emap }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertex_map.len() != self.domain.n_vertices()
            || self.edge_map.len() != self.domain.n_geom_edges()
        {
            return Err(Error::Internal("morphism map sizes".into()));
        }
        for (g, e) in self.domain.geom_edges().iter().enumerate() {
            let img = &self.codomain.geom_edges()[self.edge_map[g]];
            if img.label != e.label
                || img.src != self.vertex_map[e.src]
                || img.dst != self.vertex_map[e.dst]
            {
                return Err(Error::Internal(format!("morphism does not commute at edge {g}")));
            }
        }
        Ok(())
    }

    /// Oriented-edge image, preserving orientation.
    pub fn orient_image(&self, oe: usize) -> usize {
        2 * self.edge_map[oe / 2] + oe % 2
    }

    /// `self: A -> B` composed with `then: B -> C`.
    pub fn compose(&self, then: &GraphMorphism) -> GraphMorphism {
        debug_assert_eq!(self.codomain.as_ref(), then.domain.as_ref());
        GraphMorphism {
            domain: self.domain.clone(),
            codomain: then.codomain.clone(),
            vertex_map: self.vertex_map.iter().map(|&v| then.vertex_map[v]).collect(),
            edge_map: self.edge_map.iter().map(|&e| then.edge_map[e]).collect(),
        }
    }

    pub fn is_surjective(&self) -> bool {
        let mut v_hit = vec![false; self.codomain.n_vertices()];
        for &v in &self.vertex_map {
            v_hit[v] = true;
        }
        let mut e_hit = vec![false; self.codomain.n_geom_edges()];
        for &e in &self.edge_map {
            e_hit[e] = true;
        }
        v_hit.into_iter().all(|b| b) && e_hit.into_iter().all(|b| b)
    }

    pub fn is_isomorphism(&self) -> bool {
        if self.domain.n_vertices() != self.codomain.n_vertices()
            || self.domain.n_geom_edges() != self.codomain.n_geom_edges()
        {
            return false;
        }
        let mut seen = vec![false; self.codomain.n_vertices()];
        for &v in &self.vertex_map {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        let mut eseen = vec![false; self.codomain.n_geom_edges()];
        for &e in &self.edge_map {
            if eseen[e] {
                return false;
            }
            eseen[e] = true;
        }
        true
    }

    /// Restriction over one codomain component (given by its vertex list):
    /// the morphism from the preimage subgraph to the component subgraph.
    pub fn restrict_to_component(&self, comp: &[usize]) -> GraphMorphism {
        let in_comp: std::collections::HashSet<usize> = comp.iter().copied().collect();
        let dom_vs: Vec<usize> = (0..self.domain.n_vertices())
            .filter(|&v| in_comp.contains(&self.vertex_map[v]))
            .collect();
        let (dom_sub, dom_kept_v, dom_kept_e) = self.domain.subgraph(&dom_vs);
        let (cod_sub, cod_kept_v, cod_kept_e) = self.codomain.subgraph(comp);
        let mut cod_vidx = HashMap::new();
        for (i, &v) in cod_kept_v.iter().enumerate() {
            cod_vidx.insert(v, i);
        }
        let mut cod_eidx = HashMap::new();
        for (i, &e) in cod_kept_e.iter().enumerate() {
            cod_eidx.insert(e, i);
        }
        let vmap = dom_kept_v.iter().map(|&v| cod_vidx[&self.vertex_map[v]]).collect();
        let emap = dom_kept_e.iter().map(|&e| cod_eidx[&self.edge_map[e]]).collect();
        GraphMorphism::new(Arc::new(dom_sub), Arc::new(cod_sub), vmap, emap)
    }

    /// True if the restriction over some codomain component is an isomorphism.
    pub fn iso_on_some_component(&self) -> bool {
        self.codomain
            .components()
            .iter()
            .any(|c| self.restrict_to_component(c).is_isomorphism())
    }

    /// Dedupe key with the domain held pointwise fixed; two quotients of the
    /// same graph get equal keys iff they differ by an isomorphism of the
    /// codomain commuting with the maps.
    pub fn fixed_domain_key(&self) -> Result<CanonKey> {
        let canon = self.codomain.canonical();
        let mut best: Option<Vec<i64>> = None;
        for ord in canon.orderings(20_000)? {
            let mut ser: Vec<i64> = canon.key.0.clone();
            ser.push(-3);
            ser.extend(self.vertex_map.iter().map(|&v| ord[v] as i64));
            if best.as_ref().map_or(true, |b| ser < *b) {
                best = Some(ser);
            }
        }
        Ok(CanonKey(best.unwrap_or_default()))
    }

    /// Key up to commuting isomorphisms of both domain and codomain.
    pub fn canonical_key(&self) -> Result<CanonKey> {
        let dcanon = self.domain.canonical();
        let ccanon = self.codomain.canonical();
        let dords = dcanon.orderings(20_000)?;
        let cords = ccanon.orderings(20_000)?;
        let n = self.domain.n_vertices();
        let mut best: Option<Vec<i64>> = None;
        for dord in &dords {
            // new domain index -> old domain index
            let mut dinv = vec![usize::MAX; n];
            for (old, &new) in dord.iter().enumerate() {
                dinv[new] = old;
            }
            for cord in &cords {
                let mut ser: Vec<i64> = Vec::with_capacity(dcanon.key.0.len() + ccanon.key.0.len() + n + 2);
                ser.extend_from_slice(&dcanon.key.0);
                ser.push(-3);
                ser.extend_from_slice(&ccanon.key.0);
                ser.push(-3);
                ser.extend((0..n).map(|new| cord[self.vertex_map[dinv[new]]] as i64));
                if best.as_ref().map_or(true, |b| ser < *b) {
                    best = Some(ser);
                }
            }
        }
        Ok(CanonKey(best.unwrap_or_default()))
    }
}

/// All label-preserving morphisms `a -> b` (both folded). Propagation per
/// component of `a`; at most one extension per choice of base image.
pub fn find_morphisms(a: &CoreGraph, b: &CoreGraph) -> Vec<GraphMorphism> {
    let a_arc = Arc::new(a.clone());
    let b_arc = Arc::new(b.clone());
    let comps = a.components();
    if a.is_empty() {
        return vec![GraphMorphism::new(a_arc, b_arc, Vec::new(), Vec::new())];
    }
    let a_out = a.out_edges();
    let b_out = b.out_edges();
    // b transition table: (vertex, dir) -> oriented edge
    let mut b_trans: HashMap<(usize, u32), usize> = HashMap::new();
    for v in 0..b.n_vertices() {
        for &oe in &b_out[v] {
            b_trans.insert((v, b.orient_dir(oe)), oe);
        }
    }
    // Per component, list the consistent (vmap, emap) partial assignments.
    let mut per_comp: Vec<Vec<(HashMap<usize, usize>, HashMap<usize, usize>)>> = Vec::new();
    for comp in &comps {
        let mut choices = Vec::new();
        let base = comp[0];
        for b0 in 0..b.n_vertices() {
            let mut vmap: HashMap<usize, usize> = HashMap::new();
            let mut emap: HashMap<usize, usize> = HashMap::new();
            vmap.insert(base, b0);
            let mut stack = vec![base];
            let mut ok = true;
            while let Some(v) = stack.pop() {
                let bv = vmap[&v];
                for &oe in &a_out[v] {
                    let dir = a.orient_dir(oe);
                    let Some(&boe) = b_trans.get(&(bv, dir)) else {
                        ok = false;
                        break;
                    };
                    let tgt = a.orient_dst(oe);
                    let btgt = b.orient_dst(boe);
                    match vmap.get(&tgt) {
                        Some(&bt) if bt != btgt => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            vmap.insert(tgt, btgt);
                            stack.push(tgt);
                        }
                    }
                    let (g, bg) = (oe / 2, boe / 2);
                    if let Some(&prev) = emap.get(&g) {
                        if prev != bg {
                            ok = false;
                            break;
                        }
                    } else {
                        emap.insert(g, bg);
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                choices.push((vmap, emap));
            }
        }
        per_comp.push(choices);
    }
    // Cartesian product over components.
    let mut results = Vec::new();
    let mut idx = vec![0usize; comps.len()];
    'outer: loop {
        let mut vmap = vec![usize::MAX; a.n_vertices()];
        let mut emap = vec![usize::MAX; a.n_geom_edges()];
        for (c, &i) in idx.iter().enumerate() {
            if per_comp[c].is_empty() {
                break 'outer;
            }
            let (vm, em) = &per_comp[c][i];
            for (&k, &v) in vm {
                vmap[k] = v;
            }
            for (&k, &v) in em {
                emap[k] = v;
            }
        }
        results.push(GraphMorphism::new(a_arc.clone(), b_arc.clone(), vmap, emap));
        // advance
        let mut c = 0;
        loop {
            if c == comps.len() {
                break 'outer;
            }
            idx[c] += 1;
            if idx[c] < per_comp[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
    results
}

/// All isomorphisms `a -> b`.
pub fn find_isomorphisms(a: &CoreGraph, b: &CoreGraph) -> Vec<GraphMorphism> {
    if a.n_vertices() != b.n_vertices() || a.n_geom_edges() != b.n_geom_edges() {
        return Vec::new();
    }
    find_morphisms(a, b).into_iter().filter(|m| m.is_isomorphism()).collect()
}

/// Lifts of `f: A -> C` through `p: B -> C` (p an immersion): morphisms
/// `g: A -> B` with `p ∘ g = f`.
pub fn find_lifts(f: &GraphMorphism, p: &GraphMorphism) -> Vec<GraphMorphism> {
    debug_assert_eq!(f.codomain.as_ref(), p.codomain.as_ref());
    let a = f.domain.as_ref();
    let b = p.domain.as_ref();
    if a.is_empty() {
        return vec![GraphMorphism::new(f.domain.clone(), p.domain.clone(), Vec::new(), Vec::new())];
    }
    let a_out = a.out_edges();
    let b_out = b.out_edges();
    // (b-vertex, oriented c-edge) -> oriented b-edge
    let mut b_over: HashMap<(usize, usize), usize> = HashMap::new();
    for v in 0..b.n_vertices() {
        for &oe in &b_out[v] {
            b_over.insert((v, p.orient_image(oe)), oe);
        }
    }
    let comps = a.components();
    let mut per_comp: Vec<Vec<(HashMap<usize, usize>, HashMap<usize, usize>)>> = Vec::new();
    for comp in &comps {
        let base = comp[0];
        let mut choices = Vec::new();
        for b0 in 0..b.n_vertices() {
            if p.vertex_map[b0] != f.vertex_map[base] {
                continue;
            }
            let mut vmap = HashMap::new();
            let mut emap = HashMap::new();
            vmap.insert(base, b0);
            let mut stack = vec![base];
            let mut ok = true;
            while let Some(v) = stack.pop() {
                let bv = vmap[&v];
                for &oe in &a_out[v] {
                    let coe = f.orient_image(oe);
                    let Some(&boe) = b_over.get(&(bv, coe)) else {
                        ok = false;
                        break;
                    };
                    let tgt = a.orient_dst(oe);
                    let btgt = b.orient_dst(boe);
                    match vmap.get(&tgt) {
                        Some(&bt) if bt != btgt => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            vmap.insert(tgt, btgt);
                            stack.push(tgt);
                        }
                    }
                    emap.insert(oe / 2, boe / 2);
                }
                if !ok {
                    break;
                }
            }
            if ok {
                choices.push((vmap, emap));
            }
        }
        per_comp.push(choices);
    }
    let mut results = Vec::new();
    fn cartesian(
        per_comp: &[Vec<(HashMap<usize, usize>, HashMap<usize, usize>)>],
        c: usize,
        vmap: &mut Vec<usize>,
        emap: &mut Vec<usize>,
        f: &GraphMorphism,
        p: &GraphMorphism,
        results: &mut Vec<GraphMorphism>,
    ) {
        if c == per_comp.len() {
            results.push(GraphMorphism::new(
                f.domain.clone(),
                p.domain.clone(),
                vmap.clone(),
                emap.clone(),
            ));
            return;
        }
        for (vm, em) in &per_comp[c] {
            for (&k, &v) in vm {
                vmap[k] = v;
            }
            for (&k, &v) in em {
                emap[k] = v;
            }
            cartesian(per_comp, c + 1, vmap, emap, f, p, results);
        }
    }
    let mut vmap = vec![usize::MAX; a.n_vertices()];
    let mut emap = vec![usize::MAX; a.n_geom_edges()];
    cartesian(&per_comp, 0, &mut vmap, &mut emap, f, p, &mut results);
    results
}

/// Stallings folding: identifies same-label edges at a vertex until the
/// immersion condition holds; idempotent on folded input.
pub fn fold(g: &CoreGraph) -> (CoreGraph, GraphMorphism) {
    let mut parent: Vec<usize> = (0..g.n_vertices()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Flat (vertex, direction) table with generation stamps; rebuilt per pass.
    let dirs = 2 * g.rank() as usize;
    let mut slot_gen = vec![0u32; g.n_vertices() * dirs];
    let mut slot_val = vec![0usize; g.n_vertices() * dirs];
    let mut generation = 0u32;
    loop {
        generation += 1;
        let mut changed = false;
        for oe in 0..2 * g.n_geom_edges() {
            let src = find(&mut parent, g.orient_src(oe));
            let dir = g.orient_dir(oe) as usize;
            let dst = find(&mut parent, g.orient_dst(oe));
            let slot = src * dirs + dir;
            if slot_gen[slot] == generation {
                let d0 = find(&mut parent, slot_val[slot]);
                if d0 != dst {
                    parent[d0.max(dst)] = d0.min(dst);
                    changed = true;
                }
            } else {
                slot_gen[slot] = generation;
                slot_val[slot] = dst;
            }
        }
        if !changed {
            break;
        }
    }
    // Compress vertex classes.
    let mut class_idx: HashMap<usize, usize> = HashMap::new();
    let mut vmap = vec![0usize; g.n_vertices()];
    for v in 0..g.n_vertices() {
        let root = find(&mut parent, v);
        let next = class_idx.len();
        let idx = *class_idx.entry(root).or_insert(next);
        vmap[v] = idx;
    }
    // Dedupe geometric edges.
    let mut edge_idx: HashMap<(usize, usize, u32), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut emap = vec![0usize; g.n_geom_edges()];
    for (i, e) in g.geom_edges().iter().enumerate() {
        let key = (vmap[e.src], vmap[e.dst], e.label);
        let idx = *edge_idx.entry(key).or_insert_with(|| {
            edges.push(GeomEdge { src: key.0, dst: key.1, label: key.2 });
            edges.len() - 1
        });
        emap[i] = idx;
    }
    let folded = CoreGraph { rank: g.rank(), n_vertices: class_idx.len(), edges };
    debug_assert!(folded.is_folded());
    let m = GraphMorphism::new(Arc::new(g.clone()), Arc::new(folded.clone()), vmap, emap);
    (folded, m)
}

/// Quotient of `g` merging one vertex pair, then folded; returns the
/// composite surjection.
pub fn merge_pair_and_fold(g: &Arc<CoreGraph>, u: usize, v: usize) -> (CoreGraph, GraphMorphism) {
    let (lo, hi) = (u.min(v), u.max(v));
    let vmap: Vec<usize> = (0..g.n_vertices())
        .map(|x| {
            if x == hi {
                lo
            } else if x > hi {
                x - 1
            } else {
                x
            }
        })
        .collect();
    let edges = g
        .geom_edges()
        .iter()
        .map(|e| GeomEdge { src: vmap[e.src], dst: vmap[e.dst], label: e.label })
        .collect();
    let raw = CoreGraph { rank: g.rank(), n_vertices: g.n_vertices() - 1, edges };
    let quo = GraphMorphism::new(
        g.clone(),
        Arc::new(raw.clone()),
        vmap,
        (0..g.n_geom_edges()).collect(),
    );
    let (folded, fm) = fold(&raw);
    (folded, quo.compose(&fm))
}

/// The cycle graph of a nontrivial cyclically reduced word together with its
/// immersion to the bouquet and the oriented edge sequence reading the word.
fn word_cycle(core: &Word) -> (CoreGraph, Vec<usize>) {
    let n = core.len();
    debug_assert!(n > 0);
    let mut edges = Vec::with_capacity(n);
    let mut oriented = Vec::with_capacity(n);
    for (i, l) in core.letters().iter().enumerate() {
        let (src, dst) = (i, (i + 1) % n);
        if l.sign > 0 {
            edges.push(GeomEdge { src, dst, label: l.index });
            oriented.push(2 * i);
        } else {
            edges.push(GeomEdge { src: dst, dst: src, label: l.index });
            oriented.push(2 * i + 1);
        }
    }
    (CoreGraph { rank: core.ambient_rank(), n_vertices: n, edges }, oriented)
}

/// Covering data for `Γ_{w^ν} -> Γ_w` with ordered vertex fibers.
#[derive(Debug, Clone)]
pub struct CoveringData {
    pub rho: GraphMorphism,
    pub degree: usize,
    pub vertex_fibers: Vec<Vec<usize>>,
}

/// `Γ_{w^ν}` together with `η: Γ_{w^ν} -> Ω`, the covering over `Γ_w`, and
/// the oriented cycles reading the powers of `w`.
#[derive(Debug, Clone)]
pub struct GammaPower {
    pub graph: Arc<CoreGraph>,
    pub eta: GraphMorphism,
    pub cover: CoveringData,
    /// One oriented edge sequence per part, spelling `w^{ν_i}`.
    pub cycles: Vec<Vec<usize>>,
}

/// Builds `Γ_{w^ν}`: one cycle of length `ν_i · |w_cyc|` per part. Empty
/// word or empty shape yields the empty graph.
pub fn gamma_power(w: &Word, shape: &[usize]) -> GammaPower {
    let rank = w.ambient_rank();
    let omega = Arc::new(CoreGraph::bouquet(rank).expect("rank >= 1"));
    let (core, _) = w.cyclic_reduce();
    if core.is_empty() || shape.is_empty() {
        let empty = Arc::new(CoreGraph::empty(rank));
        let base = if core.is_empty() {
            empty.clone()
        } else {
            Arc::new(word_cycle(&core).0)
        };
        let eta = GraphMorphism::new(empty.clone(), omega, Vec::new(), Vec::new());
        let rho = GraphMorphism::new(empty.clone(), base.clone(), Vec::new(), Vec::new());
        return GammaPower {
            graph: empty,
            eta,
            cover: CoveringData {
                rho,
                degree: shape.iter().sum(),
                vertex_fibers: vec![Vec::new(); base.n_vertices()],
            },
            cycles: Vec::new(),
        };
    }
    let (base_graph, _) = word_cycle(&core);
    let base = Arc::new(base_graph);
    let ell = core.len();
    let mut vertices = 0usize;
    let mut edges: Vec<GeomEdge> = Vec::new();
    let mut vmap_cover: Vec<usize> = Vec::new();
    let mut emap_cover: Vec<usize> = Vec::new();
    let mut cycles = Vec::new();
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); ell];
    for &part in shape {
        debug_assert!(part >= 1);
        let n = part * ell;
        let offset = vertices;
        let mut cyc = Vec::with_capacity(n);
        for i in 0..n {
            let l = core.letters()[i % ell];
            let (src, dst) = (offset + i, offset + (i + 1) % n);
            let g = edges.len();
            if l.sign > 0 {
                edges.push(GeomEdge { src, dst, label: l.index });
                cyc.push(2 * g);
            } else {
                edges.push(GeomEdge { src: dst, dst: src, label: l.index });
                cyc.push(2 * g + 1);
            }
            emap_cover.push(i % ell);
        }
        for i in 0..n {
            vmap_cover.push(i % ell);
            fibers[i % ell].push(offset + i);
        }
        vertices += n;
        cycles.push(cyc);
    }
    let graph = Arc::new(CoreGraph { rank, n_vertices: vertices, edges });
    debug_assert!(graph.is_folded());
    let eta_v = vec![0usize; vertices];
    let eta_e: Vec<usize> = graph.geom_edges().iter().map(|e| (e.label - 1) as usize).collect();
    let eta = GraphMorphism::new(graph.clone(), omega, eta_v, eta_e);
    let rho = GraphMorphism::new(graph.clone(), base, vmap_cover, emap_cover);
    GammaPower {
        graph,
        eta,
        cover: CoveringData { rho, degree: shape.iter().sum(), vertex_fibers: fibers },
        cycles,
    }
}

/// `Γ_w` with its immersion to the bouquet (via the cyclic reduction).
pub fn gamma_w(w: &Word) -> GammaPower {
    gamma_power(w, &[1])
}

/// Disjoint union of the `Γ_{w_i}` with the immersion to the bouquet,
/// plus per-word oriented cycles. All words must be nontrivial.
pub fn gamma_multi(words: &[Word]) -> Result<(Arc<CoreGraph>, GraphMorphism, Vec<Vec<usize>>)> {
    let rank = words.iter().map(|w| w.ambient_rank()).max().unwrap_or(1);
    let mut vertices = 0usize;
    let mut edges = Vec::new();
    let mut cycles = Vec::new();
    for w in words {
        let (core, _) = w.cyclic_reduce();
        if core.is_empty() {
            return Err(Error::Domain("trivial word in multiset".into()));
        }
        let n = core.len();
        let mut cyc = Vec::with_capacity(n);
        for (i, l) in core.letters().iter().enumerate() {
            let (src, dst) = (vertices + i, vertices + (i + 1) % n);
            let g = edges.len();
            if l.sign > 0 {
                edges.push(GeomEdge { src, dst, label: l.index });
                cyc.push(2 * g);
            } else {
                edges.push(GeomEdge { src: dst, dst: src, label: l.index });
                cyc.push(2 * g + 1);
            }
        }
        vertices += n;
        cycles.push(cyc);
    }
    let graph = Arc::new(CoreGraph { rank, n_vertices: vertices, edges });
    let omega = Arc::new(CoreGraph::bouquet(rank)?);
    let eta_e: Vec<usize> = graph.geom_edges().iter().map(|e| (e.label - 1) as usize).collect();
    let eta = GraphMorphism::new(graph.clone(), omega, vec![0; vertices], eta_e);
    Ok((graph, eta, cycles))
}

/// The Stallings core graph of `⟨generators⟩` with its immersion to the
/// bouquet: wedge of generator cycles, folded, pruned to the core.
pub fn stallings_graph(generators: &[Word]) -> Result<(Arc<CoreGraph>, GraphMorphism)> {
    let nontrivial: Vec<&Word> = generators.iter().filter(|w| !w.is_identity()).collect();
    if nontrivial.is_empty() {
        return Err(Error::Domain("all generators trivial".into()));
    }
    let rank = nontrivial.iter().map(|w| w.ambient_rank()).max().unwrap();
    // Wedge at vertex 0; each generator contributes a closed path.
    let mut vertices = 1usize;
    let mut edges = Vec::new();
    for w in &nontrivial {
        let n = w.len();
        let path: Vec<usize> = (0..=n)
            .map(|i| {
                if i == 0 || i == n {
                    0
                } else {
                    let v = vertices;
                    vertices += 1;
                    v
                }
            })
            .collect();
        for (i, l) in w.letters().iter().enumerate() {
            let (src, dst) = (path[i], path[i + 1]);
            if l.sign > 0 {
                edges.push(GeomEdge { src, dst, label: l.index });
            } else {
                edges.push(GeomEdge { src: dst, dst: src, label: l.index });
            }
        }
    }
    let raw = CoreGraph { rank, n_vertices: vertices, edges };
    let (folded, _) = fold(&raw);
    let (core, _, _) = folded.prune_to_core();
    let omega = Arc::new(CoreGraph::bouquet(rank)?);
    let eta_e: Vec<usize> = core.geom_edges().iter().map(|e| (e.label - 1) as usize).collect();
    let graph = Arc::new(core);
    let eta = GraphMorphism::new(graph.clone(), omega, vec![0; graph.n_vertices()], eta_e);
    Ok((graph, eta))
}

/// True iff `eta1` is injective on every vertex fiber of the covering.
pub fn is_efficient(eta1: &GraphMorphism, cover: &CoveringData) -> Result<bool> {
    if eta1.domain.as_ref() != cover.rho.domain.as_ref() {
        return Err(Error::Input("efficiency: domain mismatch with covering".into()));
    }
    for fiber in &cover.vertex_fibers {
        let mut images: Vec<usize> = fiber.iter().map(|&v| eta1.vertex_map[v]).collect();
        images.sort_unstable();
        images.dedup();
        if images.len() != fiber.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn w(s: &str, r: u32) -> Word {
        parse_word(s, r).unwrap()
    }

    #[test]
    fn bouquet_basics() {
        let b = CoreGraph::bouquet(2).unwrap();
        assert_eq!((b.n_vertices(), b.n_geom_edges()), (1, 2));
        assert_eq!(b.euler_characteristic(), -1);
        assert!(b.is_folded() && b.is_core());
        assert_eq!(CoreGraph::bouquet(1).unwrap().euler_characteristic(), 0);
        assert_eq!(CoreGraph::bouquet(3).unwrap().euler_characteristic(), -2);
        assert!(CoreGraph::bouquet(0).is_err());
    }

    #[test]
    fn gamma_of_commutator() {
        let g = gamma_w(&w("abAB", 2));
        assert_eq!(g.graph.n_vertices(), 4);
        assert_eq!(g.graph.euler_characteristic(), 0);
        assert!(g.graph.is_folded());
        assert_eq!(g.cover.degree, 1);
    }

    #[test]
    fn gamma_power_shapes() {
        let g = gamma_power(&w("abAB", 2), &[2, 1]);
        let comps = g.graph.components();
        let mut sizes: Vec<usize> = comps.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![4, 8]);
        assert_eq!(g.cover.degree, 3);
        for fiber in &g.cover.vertex_fibers {
            assert_eq!(fiber.len(), 3);
        }
        assert_eq!(g.graph.euler_characteristic(), 0);

        let g = gamma_power(&w("a", 1), &[3]);
        assert_eq!(g.graph.n_vertices(), 3);
        assert!(g.graph.geom_edges().iter().all(|e| e.label == 1));

        let g = gamma_power(&Word::identity(2), &[2]);
        assert!(g.graph.is_empty());
        let g = gamma_power(&w("ab", 2), &[]);
        assert!(g.graph.is_empty());
    }

    #[test]
    fn folding_wedge_of_equal_words() {
        // Two copies of "ab" wedged: folds to a single ab-path (cycle after wedge).
        let (g, _) = stallings_graph(&[w("ab", 2), w("ab", 2)]).unwrap();
        let single = stallings_graph(&[w("ab", 2)]).unwrap().0;
        assert!(g.isomorphic(&single));
    }

    #[test]
    fn fold_idempotent_on_folded() {
        let g = gamma_w(&w("abAB", 2)).graph;
        let (f, m) = fold(&g);
        assert!(f.isomorphic(&g));
        assert!(m.is_isomorphism());
    }

    #[test]
    fn fold_two_loops() {
        let raw = CoreGraph::new(
            1,
            1,
            vec![
                GeomEdge { src: 0, dst: 0, label: 1 },
                GeomEdge { src: 0, dst: 0, label: 1 },
            ],
        );
        let (f, m) = fold(&raw);
        assert_eq!((f.n_vertices(), f.n_geom_edges()), (1, 1));
        assert!(m.is_surjective());
    }

    #[test]
    fn stallings_examples() {
        let (g, _) = stallings_graph(&[w("a", 2), w("b", 2)]).unwrap();
        assert!(g.isomorphic(&CoreGraph::bouquet(2).unwrap()));

        let (g, _) = stallings_graph(&[w("abAB", 2)]).unwrap();
        assert_eq!((g.n_vertices(), g.n_geom_edges()), (4, 4));

        // ⟨a², ab⟩, folded by hand: the two outgoing a-edges at the wedge
        // point identify, leaving 2 vertices, 3 geometric edges, χ = −1.
        // Membership check: a², ab read as loops; ba does not.
        let (g, _) = stallings_graph(&[w("aa", 2), w("ab", 2)]).unwrap();
        assert_eq!((g.n_vertices(), g.n_geom_edges()), (2, 3));
        assert_eq!(g.euler_characteristic(), -1);

        assert!(stallings_graph(&[Word::identity(2)]).is_err());
    }

    #[test]
    fn canonical_distinguishes_and_identifies() {
        let c4 = gamma_w(&w("abAB", 2)).graph;
        let c4b = gamma_w(&w("bABa", 2)).graph; // same cyclic word, rotated
        assert_eq!(c4.canonical_key(), c4b.canonical_key());
        let c8 = gamma_power(&w("abAB", 2), &[2]).graph;
        assert_ne!(c4.canonical_key(), c8.canonical_key());
    }

    #[test]
    fn canonical_key_invariant_under_storage_permutation() {
        // Rebuild Γ_{abAB} with shuffled vertex names and edge order.
        let perm = [2usize, 0, 3, 1];
        let g = gamma_w(&w("abAB", 2)).graph;
        let mut edges: Vec<GeomEdge> = g
            .geom_edges()
            .iter()
            .map(|e| GeomEdge { src: perm[e.src], dst: perm[e.dst], label: e.label })
            .collect();
        edges.reverse();
        let h = CoreGraph::new(2, 4, edges);
        assert_eq!(g.canonical_key(), h.canonical_key());
    }

    #[test]
    fn efficiency_cases() {
        let g1 = gamma_power(&w("abAB", 2), &[1]);
        assert!(is_efficient(&g1.eta, &g1.cover).unwrap());

        // Degree-2 cover mapped down by the covering itself: fibers collapse.
        let g2 = gamma_power(&w("abAB", 2), &[2]);
        assert!(!is_efficient(&g2.cover.rho.clone(), &g2.cover).unwrap());

        // Γ_{w^{(1,1)}} identifying both components onto one copy: fibers collapse.
        let g11 = gamma_power(&w("abAB", 2), &[1, 1]);
        let target = gamma_w(&w("abAB", 2));
        let ms = find_morphisms(&g11.graph, &target.graph);
        assert!(!ms.is_empty());
        for m in ms {
            assert!(!is_efficient(&m, &g11.cover).unwrap());
        }
    }

    #[test]
    fn prune_leaves() {
        // Path with a hanging edge: wedge of "aba" type word gives leaves before pruning.
        let (g, _) = stallings_graph(&[w("abA", 2)]).unwrap();
        // ⟨abA⟩ conjugacy class core is the cycle of b.
        let b_cycle = gamma_w(&w("b", 2)).graph;
        assert!(g.isomorphic(&b_cycle));
    }

    #[test]
    fn morphism_composition_degrees() {
        let g4 = gamma_power(&w("abAB", 2), &[4]);
        let g2 = gamma_power(&w("abAB", 2), &[2]);
        // Covering Γ_{w⁴} -> Γ_{w²} -> Γ_w composes degrees 2 · 2 = 4.
        let down = find_morphisms(&g4.graph, &g2.graph);
        assert!(!down.is_empty());
        let m = down[0].compose(&g2.cover.rho);
        assert_eq!(m.vertex_map.len(), g4.graph.n_vertices());
        // every Γ_w vertex has 4 preimages
        let mut counts = vec![0usize; m.codomain.n_vertices()];
        for &v in &m.vertex_map {
            counts[v] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4));
    }
}
