//! Stable irreducible characters of wreath products `G ≀ S_N`: the
//! partition-valued labels, exact evaluation of the induced-character
//! formula over σ-invariant ordered set-partitions, dimension polynomials,
//! and the label expectations `E_η[·]` over Haar-random G-labelings.

use super::groups::{CmSpec, FiniteGroupTable, Perm};
use super::partitions::Partition;
use crate::error::{Error, Result};
use crate::graphs::{CoreGraph, GraphMorphism};
use crate::ratfun::{Poly, RatFun};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Finitely supported map from irreducible labels of `G` to partitions;
/// empty partitions are excluded from the support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMap {
    /// `(irreducible index, nonempty partition)`, sorted by index.
    pub assignments: Vec<(usize, Partition)>,
}

impl PartitionMap {
    pub fn new(mut assignments: Vec<(usize, Partition)>) -> Result<Self> {
        assignments.retain(|(_, p)| !p.is_empty());
        assignments.sort_by_key(|(i, _)| *i);
        for w in assignments.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Input("repeated irreducible label in partition map".into()));
            }
        }
        Ok(PartitionMap { assignments })
    }

    pub fn empty() -> Self {
        PartitionMap { assignments: Vec::new() }
    }

    pub fn total_size(&self) -> usize {
        self.assignments.iter().map(|(_, p)| p.size()).sum()
    }

    pub fn get(&self, irr: usize) -> Partition {
        self.assignments
            .iter()
            .find(|(i, _)| *i == irr)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Partition::empty)
    }

    pub fn triv_part(&self, table: &FiniteGroupTable) -> Partition {
        self.get(table.trivial_irr())
    }

    pub fn supported_off_triv(&self, table: &FiniteGroupTable) -> bool {
        let t = table.trivial_irr();
        self.assignments.iter().all(|(i, _)| *i != t)
    }

    /// `→μ[N]`: pad the trivial-label partition so the total size is `N`.
    pub fn pad_to(&self, n: usize, table: &FiniteGroupTable) -> Result<PartitionMap> {
        let triv = table.trivial_irr();
        let t_part = self.triv_part(table);
        let rest: usize = self
            .assignments
            .iter()
            .filter(|(i, _)| *i != triv)
            .map(|(_, p)| p.size())
            .sum();
        if n < rest {
            return Err(Error::Domain(format!("→μ[N] undefined for N = {n}")));
        }
        let padded = t_part.pad_to(n - rest)?;
        let mut assignments: Vec<(usize, Partition)> = self
            .assignments
            .iter()
            .filter(|(i, _)| *i != triv)
            .cloned()
            .collect();
        assignments.push((triv, padded));
        PartitionMap::new(assignments)
    }

    /// Parses `label:p1,p2;label:p1` with labels resolved in the group table.
    pub fn parse(text: &str, table: &FiniteGroupTable) -> Result<PartitionMap> {
        let mut assignments = Vec::new();
        for piece in text.split(';') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (label, parts) = piece
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("partition map entry {piece:?}")))?;
            let irr = table.irr_by_name(label.trim())?;
            let partition = super::partitions::parse_partition(parts)?;
            assignments.push((irr, partition));
        }
        PartitionMap::new(assignments)
    }

    pub fn display(&self, table: &FiniteGroupTable) -> String {
        self.assignments
            .iter()
            .map(|(i, p)| format!("{}:{}", table.irreducibles[*i], p))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// χ^{→μ}(v, σ) by the induced-character formula: sum over σ-invariant
/// ordered set-partitions (assignments of whole σ-cycles to blocks) of the
/// per-block symmetric-group character times the G-character of the cycle
/// products.
pub fn wreath_character_eval(
    table: &FiniteGroupTable,
    arrm: &PartitionMap,
    v: &[usize],
    sigma: &Perm,
) -> Result<BigInt> {
    let n = arrm.total_size();
    if v.len() != n || sigma.degree() != n {
        return Err(Error::Input(format!(
            "wreath character size mismatch: |→μ| = {n}, element degree {}",
            sigma.degree()
        )));
    }
    let blocks: Vec<(usize, usize)> = arrm
        .assignments
        .iter()
        .map(|(irr, p)| (*irr, p.size()))
        .collect();
    let cycles = sigma.cycles();
    // Product along each cycle: v_{x_ℓ} ⋯ v_{x_1}.
    let cycle_products: Vec<usize> = cycles
        .iter()
        .map(|cyc| {
            let mut acc = table.identity;
            for &x in cyc {
                acc = table.mul(v[x], acc);
            }
            acc
        })
        .collect();
    let cycle_lens: Vec<usize> = cycles.iter().map(|c| c.len()).collect();
    let mut total = BigInt::zero();
    // Assign each cycle to a block, respecting capacities.
    fn rec(
        table: &FiniteGroupTable,
        arrm: &PartitionMap,
        blocks: &[(usize, usize)],
        cycle_lens: &[usize],
        cycle_products: &[usize],
        idx: usize,
        remaining: &mut Vec<usize>,
        assigned: &mut Vec<usize>,
        total: &mut BigInt,
    ) -> Result<()> {
        if idx == cycle_lens.len() {
            let mut term = BigInt::one();
            for (b, &(irr, _)) in blocks.iter().enumerate() {
                let mut lens: Vec<usize> = assigned
                    .iter()
                    .enumerate()
                    .filter(|(_, &blk)| blk == b)
                    .map(|(c, _)| cycle_lens[c])
                    .collect();
                lens.sort_unstable_by(|a, b| b.cmp(a));
                let ty = Partition::new(lens).unwrap();
                let chi = super::symmetric::mn_character(&arrm.assignments[b].1, &ty)?;
                term *= BigInt::from(chi);
                for (c, &blk) in assigned.iter().enumerate() {
                    if blk == b {
                        term *= BigInt::from(table.char_value(irr, cycle_products[c]));
                    }
                }
            }
            *total += term;
            return Ok(());
        }
        for b in 0..blocks.len() {
            if remaining[b] >= cycle_lens[idx] {
                remaining[b] -= cycle_lens[idx];
                assigned.push(b);
                rec(
                    table,
                    arrm,
                    blocks,
                    cycle_lens,
                    cycle_products,
                    idx + 1,
                    remaining,
                    assigned,
                    total,
                )?;
                assigned.pop();
                remaining[b] += cycle_lens[idx];
            }
        }
        Ok(())
    }
    let mut remaining: Vec<usize> = blocks.iter().map(|(_, d)| *d).collect();
    rec(
        table,
        arrm,
        &blocks,
        &cycle_lens,
        &cycle_products,
        0,
        &mut remaining,
        &mut Vec::new(),
        &mut total,
    )?;
    // Total cycle length equals Σ d_i, so at every leaf the capacities are
    // consumed exactly.
    Ok(total)
}

/// Exact polynomial (as a constant-denominator rational function) whose
/// value at `N` is `dim χ^{→μ[N]}`, of degree `|→μ|`.
pub fn wreath_dim_poly(table: &FiniteGroupTable, arrm: &PartitionMap) -> Result<RatFun> {
    let d = arrm.total_size();
    let triv = table.trivial_irr();
    let t_part = arrm.triv_part(table);
    let d_rest: usize = arrm
        .assignments
        .iter()
        .filter(|(i, _)| *i != triv)
        .map(|(_, p)| p.size())
        .sum();
    // [G_N : ∏ G_{d_i} × G_{N − d_rest}] = (N)_{d_rest} / ∏ d_i!
    let mut num = Poly::falling_factorial(d_rest);
    let mut den = Poly::constant(1);
    for (i, p) in &arrm.assignments {
        if *i == triv {
            continue;
        }
        let mut fact = BigInt::one();
        for j in 1..=p.size() {
            fact *= BigInt::from(j);
        }
        den = den.mul(&Poly::constant(fact));
        // dim of the block: f^{μ_i} (dim φ_i)^{d_i}
        num = num.mul(&Poly::constant(p.dimension()));
        let phi_dim = BigInt::from(table.char_value(*i, table.identity));
        let mut pw = BigInt::one();
        for _ in 0..p.size() {
            pw *= &phi_dim;
        }
        num = num.mul(&Poly::constant(pw));
    }
    // dim χ^{μ[M]} with M = N − d_rest, via the hook length formula:
    // (M)_{|μ|+μ₁} / (∏_{j ≤ μ₁} (M − |μ| − j + 1 + ℓ_j) · H_μ).
    let shift = |c: i64| Poly(vec![BigInt::from(c - d_rest as i64), BigInt::one()]); // N + (c − d_rest)
    let t = t_part.size() + t_part.mu_1();
    for i in 0..t as i64 {
        num = num.mul(&shift(-i));
    }
    for j in 1..=t_part.mu_1() {
        let leg = t_part.parts().iter().filter(|&&r| r >= j).count() as i64;
        den = den.mul(&shift(-(t_part.size() as i64) - j as i64 + 1 + leg));
    }
    den = den.mul(&Poly::constant(t_part.hook_product()));
    let f = RatFun::new(num, den, (d + arrm.triv_part(table).mu_1()) as i64);
    if f.den().degree() != Some(0) && !f.is_zero() {
        return Err(Error::Internal("wreath dimension is not polynomial".into()));
    }
    if f.degree() != Some(d as i64) {
        return Err(Error::Internal("wreath dimension has wrong degree".into()));
    }
    Ok(f)
}

/// Payload of an η-expectation: a single irreducible of `G` or a full
/// partition-valued label (a character of `G_d`).
pub enum Payload<'a> {
    Irreducible(usize),
    Map(&'a PartitionMap),
}

/// Image paths of the domain cycles under a morphism, as oriented codomain
/// edges in traversal order.
pub fn cycle_image_paths(cycles: &[Vec<usize>], b: &GraphMorphism) -> Vec<Vec<usize>> {
    cycles
        .iter()
        .map(|cyc| cyc.iter().map(|&oe| b.orient_image(oe)).collect())
        .collect()
}

/// Spanning forest marks per geometric edge.
fn spanning_forest(g: &CoreGraph) -> Vec<bool> {
    let out = g.out_edges();
    let mut tree = vec![false; g.n_geom_edges()];
    let mut seen = vec![false; g.n_vertices()];
    for root in 0..g.n_vertices() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut oes = out[v].clone();
            oes.sort_unstable();
            for oe in oes {
                let u = g.orient_dst(oe);
                if !seen[u] {
                    seen[u] = true;
                    tree[oe / 2] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    tree
}

/// Exact expectation over Haar-random `G`-labelings of the codomain, for a
/// finite group with an exact table: gauge-fix a spanning forest and
/// enumerate the `|G|^rank` assignments on the excess edges.
///
/// `sigma_parts` gives the permutation-cycle length of each domain cycle
/// (needed for `Payload::Map`, where the value is a character of `G_d`).
pub fn e_eta_table(
    table: &FiniteGroupTable,
    codomain: &CoreGraph,
    image_paths: &[Vec<usize>],
    sigma_parts: &[usize],
    payload: &Payload,
    tuple_limit: u64,
) -> Result<BigRational> {
    let tree = spanning_forest(codomain);
    let excess: Vec<usize> = (0..codomain.n_geom_edges()).filter(|&e| !tree[e]).collect();
    let order = table.order() as u64;
    let mut count = 1u64;
    for _ in &excess {
        count = count.saturating_mul(order);
        if count > tuple_limit {
            return Err(Error::resource("G-labeling enumeration", tuple_limit));
        }
    }
    let sigma = Perm::with_cycle_lengths(sigma_parts);
    let mut assignment = vec![0usize; excess.len()];
    let mut labels = vec![table.identity; codomain.n_geom_edges()];
    let mut total = BigRational::zero();
    loop {
        for (i, &e) in excess.iter().enumerate() {
            labels[e] = assignment[i];
        }
        // Product along each cycle image, in path order.
        let products: Vec<usize> = image_paths
            .iter()
            .map(|path| {
                let mut acc = table.identity;
                for &oe in path {
                    let g = labels[oe / 2];
                    let g = if oe % 2 == 0 { g } else { table.invert(g) };
                    acc = table.mul(acc, g);
                }
                acc
            })
            .collect();
        let term: BigInt = match payload {
            Payload::Irreducible(irr) => {
                let mut t = BigInt::one();
                for &p in &products {
                    t *= BigInt::from(table.char_value(*irr, p));
                }
                t
            }
            Payload::Map(arrm) => {
                // Haar labels per cycle: place the product on the last
                // element of the corresponding canonical cycle.
                let mut v = vec![table.identity; sigma.degree()];
                let mut base = 0;
                for (c, &l) in sigma_parts.iter().enumerate() {
                    v[base + l - 1] = products[c];
                    base += l;
                }
                wreath_character_eval(table, arrm, &v, &sigma)?
            }
        };
        total += BigRational::from(term);
        // Odometer.
        let mut i = 0;
        loop {
            if i == assignment.len() {
                let denom = BigInt::from(order).pow(excess.len() as u32);
                return Ok(total / BigRational::from(denom));
            }
            assignment[i] += 1;
            if assignment[i] < table.order() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

/// Signed winding number of every geometric codomain edge under the cycle
/// images: +1 for a traversal agreeing with the stored orientation.
pub fn winding_vector(codomain: &CoreGraph, image_paths: &[Vec<usize>]) -> Vec<i64> {
    let mut w = vec![0i64; codomain.n_geom_edges()];
    for path in image_paths {
        for &oe in path {
            if oe % 2 == 0 {
                w[oe / 2] += 1;
            } else {
                w[oe / 2] -= 1;
            }
        }
    }
    w
}

/// Winding-number fast path for a linear character of `C_m`: 1 when
/// `m | j·n_b(e)` for every geometric edge, else 0.
pub fn e_eta_cm(spec: &CmSpec, codomain: &CoreGraph, image_paths: &[Vec<usize>]) -> BigRational {
    let w = winding_vector(codomain, image_paths);
    if w.iter().all(|&n| spec.annihilates(n)) {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

/// Generic homomorphism-enumeration path for `C_m` (2 ≤ m ≤ 4): sums the
/// character over all labelings of the excess edges, reducing the root-of-
/// unity counts exactly. Agrees with the winding criterion; kept as an
/// independently computed cross-check.
pub fn e_eta_cm_generic(
    spec: &CmSpec,
    codomain: &CoreGraph,
    image_paths: &[Vec<usize>],
    tuple_limit: u64,
) -> Result<BigRational> {
    let m = spec.modulus as usize;
    if !(2..=4).contains(&m) {
        return Err(Error::UnsupportedGroup(format!(
            "generic cyclic path supports m in 2..=4, got {m}"
        )));
    }
    let tree = spanning_forest(codomain);
    let excess: Vec<usize> = (0..codomain.n_geom_edges()).filter(|&e| !tree[e]).collect();
    let mut count = 1u64;
    for _ in &excess {
        count = count.saturating_mul(m as u64);
        if count > tuple_limit {
            return Err(Error::resource("cyclic labeling enumeration", tuple_limit));
        }
    }
    // Per-assignment residue of j · Σ_cycles (winding along path).
    let mut counts = vec![BigInt::zero(); m];
    let mut assignment = vec![0i64; excess.len()];
    let mut edge_value = vec![0i64; codomain.n_geom_edges()];
    loop {
        for (i, &e) in excess.iter().enumerate() {
            edge_value[e] = assignment[i];
        }
        let mut total: i64 = 0;
        for path in image_paths {
            for &oe in path {
                let v = edge_value[oe / 2];
                total += if oe % 2 == 0 { v } else { -v };
            }
        }
        let r = (spec.exponent * total).rem_euclid(m as i64) as usize;
        counts[r] += 1;
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return reduce_root_of_unity_counts(&counts, excess.len() as u32, m);
            }
            assignment[i] += 1;
            if assignment[i] < m as i64 {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

/// `(Σ_t c_t ω^t) / m^rank` for a primitive m-th root ω, m ≤ 4, checked to
/// be rational.
fn reduce_root_of_unity_counts(counts: &[BigInt], rank: u32, m: usize) -> Result<BigRational> {
    let numer = match m {
        2 => &counts[0] - &counts[1],
        3 => {
            if counts[1] != counts[2] {
                return Err(Error::Internal("irrational cyclic expectation".into()));
            }
            &counts[0] - &counts[1]
        }
        4 => {
            if counts[1] != counts[3] {
                return Err(Error::Internal("irrational cyclic expectation".into()));
            }
            &counts[0] - &counts[2]
        }
        _ => unreachable!(),
    };
    Ok(BigRational::new(numer, BigInt::from(m as u64).pow(rank)))
}
