//! Top-level formulas: stable Fourier coefficients of w-random elements of
//! `S_N` and `G ≀ S_N` as exact rational functions, induced-character
//! expectations, the decay exponent β, and bounded-degree searches for
//! stable-primitivity diagrams.
//!
//! The S_N coefficient of `χ^{μ[N]}` is
//! `(1/d!) Σ_{ν ⊢ d} |class ν| · χ^μ(ν) · f_w(ν)` where `f_w(ν)` sums
//! `C^alg(η₂)` over algebraic triples of `η_{w^ν}` with efficient `η₁` and
//! cycle-free codomain of `η₂`. For proper powers the cycle-free condition
//! is replaced by `η₂ ∘ η₁` proper algebraic, and the variant used is
//! recorded.

use crate::algebraic::{is_proper_algebraic, quotient_algebraic_flags};
use crate::characters::{
    class_data, cycle_image_paths, e_eta_cm, e_eta_table, mn_character, winding_vector,
    CmSpec, FiniteGroupTable, Partition, PartitionMap, Payload,
};
use crate::enumerate::{factor_through, DecompMode};
use crate::error::{Error, Result};
use crate::graphs::{gamma_power, is_efficient, GammaPower, GraphMorphism};
use crate::mobius::{lb, lb_at, mobius, mobius_at};
use crate::ratfun::RatFun;
use crate::session::{MobiusKind, Session};
use crate::words::Word;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Which form of the stable-coefficient formula ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Variant {
    NonPowerNoCycles,
    ProperPowerProperAlgebraic,
}

/// An exact stable Fourier coefficient, valid as a rational function from
/// `ratfun.valid_from()` on and as tabulated exact values from the
/// theorem threshold (`d + μ₁`, resp. `d + →μ(triv)₁`) on.
#[derive(Debug, Clone)]
pub struct StableCoefficient {
    pub ratfun: RatFun,
    pub theorem_threshold: i64,
    pub variant_used: Variant,
    /// Exact values for `theorem_threshold ≤ N < ratfun.valid_from()`.
    pub small_values: BTreeMap<i64, BigRational>,
}

impl StableCoefficient {
    /// Exact value at `N ≥ theorem_threshold`.
    pub fn eval(&self, n: i64) -> Result<BigRational> {
        if n < self.theorem_threshold {
            return Err(Error::Domain(format!(
                "stable coefficient undefined at N = {n} < {}",
                self.theorem_threshold
            )));
        }
        if n >= self.ratfun.valid_from() {
            return self
                .ratfun
                .eval(n)
                .ok_or_else(|| Error::Internal("denominator vanished above threshold".into()));
        }
        self.small_values
            .get(&n)
            .cloned()
            .ok_or_else(|| Error::Internal(format!("missing tabulated value at N = {n}")))
    }
}

/// Decay exponent: `β = −deg(ratfun)/|label|`; the zero function gives ∞.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Beta {
    Finite(BigRational),
    Infinity,
}

impl Beta {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Beta::Finite(q) => serde_json::json!(q.to_string()),
            Beta::Infinity => serde_json::json!("infinity"),
        }
    }
}

pub fn beta(coeff: &StableCoefficient, label_size: usize) -> Beta {
    match coeff.ratfun.degree() {
        None => Beta::Infinity,
        Some(d) => Beta::Finite(BigRational::new(
            BigInt::from(-d),
            BigInt::from(label_size as i64),
        )),
    }
}

fn variant_tag(v: Variant) -> u8 {
    match v {
        Variant::NonPowerNoCycles => 0,
        Variant::ProperPowerProperAlgebraic => 1,
    }
}

/// Middle parts of the algebraic triples of `η_{w^ν}` passing the
/// side conditions of the stable-coefficient formula: first part efficient
/// and algebraic, middle algebraic, and cycle-free middle codomain (or
/// proper-algebraic composite for the proper-power variant). Memoized per
/// `(word, shape, variant)`.
fn fw_triples(
    w: &Word,
    shape: &[usize],
    variant: Variant,
    session: &Session,
) -> Result<std::sync::Arc<Vec<GraphMorphism>>> {
    let key = (w.to_string(), shape.to_vec(), variant_tag(variant));
    if let Some(hit) = session.fw_memo.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let gp: GammaPower = gamma_power(w, shape);
    let eta = &gp.eta;
    let mut middles = Vec::new();
    let flags1 = quotient_algebraic_flags(&gp.graph, session)?;
    for (q1, &alg1) in session.quotients(&gp.graph)?.iter().zip(flags1.iter()) {
        let Some(rest) = factor_through(eta, q1) else { continue };
        if !alg1 || !is_efficient(q1, &gp.cover)? {
            continue;
        }
        let flags2 = quotient_algebraic_flags(&q1.codomain, session)?;
        for (q2, &alg2) in session.quotients(&q1.codomain)?.iter().zip(flags2.iter()) {
            if !alg2 || factor_through(&rest, q2).is_none() {
                continue;
            }
            if variant == Variant::NonPowerNoCycles && q2.codomain.has_cycle_component() {
                continue;
            }
            let keep = match variant {
                Variant::NonPowerNoCycles => true,
                Variant::ProperPowerProperAlgebraic => {
                    is_proper_algebraic(&q1.compose(q2), session)?
                }
            };
            if keep {
                middles.push(q2.clone());
            }
        }
    }
    let middles = std::sync::Arc::new(middles);
    session.fw_memo.lock().unwrap().insert(key, middles.clone());
    Ok(middles)
}

/// `f_w(ν)` as an exact rational function.
pub fn f_w(w: &Word, shape: &[usize], variant: Variant, session: &Session) -> Result<RatFun> {
    let mut sum = RatFun::zero();
    for m in fw_triples(w, shape, variant, session)?.iter() {
        sum = &sum + &mobius(m, MobiusKind::CAlg, session)?;
    }
    Ok(sum)
}

/// Exact value of `f_w(ν)` at a specific `N`.
pub fn f_w_at(
    w: &Word,
    shape: &[usize],
    variant: Variant,
    n: i64,
    session: &Session,
) -> Result<BigRational> {
    let mut sum = BigRational::zero();
    for m in fw_triples(w, shape, variant, session)?.iter() {
        sum += mobius_at(m, MobiusKind::CAlg, n, session)?;
    }
    Ok(sum)
}

fn pick_variant(w: &Word) -> Result<Variant> {
    if w.is_identity() {
        return Err(Error::Domain("stable coefficient of the trivial word".into()));
    }
    Ok(if w.is_proper_power() {
        Variant::ProperPowerProperAlgebraic
    } else {
        Variant::NonPowerNoCycles
    })
}

fn factorial(d: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 1..=d {
        f *= BigInt::from(i);
    }
    f
}

fn assemble_coefficient(
    ratfun: RatFun,
    theorem_threshold: i64,
    variant: Variant,
    mut value_at: impl FnMut(i64) -> Result<BigRational>,
) -> Result<StableCoefficient> {
    let ratfun = if ratfun.valid_from() < theorem_threshold {
        ratfun.with_valid_from(theorem_threshold)
    } else {
        ratfun
    };
    let mut small_values = BTreeMap::new();
    for n in theorem_threshold..ratfun.valid_from() {
        if n >= 1 {
            small_values.insert(n, value_at(n)?);
        }
    }
    Ok(StableCoefficient { ratfun, theorem_threshold, variant_used: variant, small_values })
}

/// `E_w[χ^{μ[N]}]` as an exact rational function of `N`, valid for every
/// `N ≥ d + μ₁`.
pub fn stable_coefficient_sn(
    w: &Word,
    mu: &Partition,
    session: &Session,
) -> Result<StableCoefficient> {
    let variant = pick_variant(w)?;
    let d = mu.size();
    let dfact = factorial(d);
    let mut sum = RatFun::zero();
    for (nu, size) in class_data(d) {
        let chi = mn_character(mu, &nu)?;
        let coeff = BigRational::new(size * BigInt::from(chi), dfact.clone());
        if coeff.is_zero() {
            continue;
        }
        let f = f_w(w, nu.parts(), variant, session)?;
        sum = &sum + &f.scale(&coeff);
    }
    let threshold = (d + mu.mu_1()) as i64;
    assemble_coefficient(sum, threshold.max(1), variant, |n| {
        stable_coefficient_sn_at(w, mu, n, session)
    })
}

/// Exact value of `E_w[χ^{μ[N]}]` at a specific `N ≥ d + μ₁`.
pub fn stable_coefficient_sn_at(
    w: &Word,
    mu: &Partition,
    n: i64,
    session: &Session,
) -> Result<BigRational> {
    let variant = pick_variant(w)?;
    let d = mu.size();
    let dfact = factorial(d);
    let mut sum = BigRational::zero();
    for (nu, size) in class_data(d) {
        let chi = mn_character(mu, &nu)?;
        let coeff = BigRational::new(size * BigInt::from(chi), dfact.clone());
        if coeff.is_zero() {
            continue;
        }
        sum += coeff * f_w_at(w, nu.parts(), variant, n, session)?;
    }
    Ok(sum)
}

/// `E_w[Ind_{G_d × G_{N−d}}^{G_N}(χ ⊠ triv)]` for a character `χ` of `G_d`
/// given as a partition-valued label, via algebraic decompositions and
/// `L^alg`.
pub fn induction_coefficient(
    table: &FiniteGroupTable,
    w: &Word,
    chi: &PartitionMap,
    session: &Session,
) -> Result<RatFun> {
    induction_coefficient_impl(table, w, chi, session, DecompMode::Algebraic)
}

/// The same expectation via surjective decompositions and `L↠`; must agree
/// symbolically with the algebraic route.
pub fn induction_coefficient_surjective(
    table: &FiniteGroupTable,
    w: &Word,
    chi: &PartitionMap,
    session: &Session,
) -> Result<RatFun> {
    induction_coefficient_impl(table, w, chi, session, DecompMode::Surjective)
}

fn induction_coefficient_impl(
    table: &FiniteGroupTable,
    w: &Word,
    chi: &PartitionMap,
    session: &Session,
    mode: DecompMode,
) -> Result<RatFun> {
    if w.is_identity() {
        return Err(Error::Domain("induction coefficient of the trivial word".into()));
    }
    let d = chi.total_size();
    let dfact = factorial(d);
    let mut sum = RatFun::zero();
    for (nu, size) in class_data(d) {
        let gp = gamma_power(w, nu.parts());
        let class_coeff = BigRational::new(size, dfact.clone());
        let flags = if mode == DecompMode::Algebraic {
            Some(quotient_algebraic_flags(&gp.graph, session)?)
        } else {
            None
        };
        for (i, q) in session.quotients(&gp.graph)?.iter().enumerate() {
            if flags.as_ref().is_some_and(|f| !f[i]) {
                continue;
            }
            let Some(rest) = factor_through(&gp.eta, q) else { continue };
            if !is_efficient(q, &gp.cover)? {
                continue;
            }
            let paths = cycle_image_paths(&gp.cycles, q);
            let e_b = e_eta_table(
                table,
                q.codomain.as_ref(),
                &paths,
                nu.parts(),
                &Payload::Map(chi),
                session.tuple_limit,
            )?;
            if e_b.is_zero() {
                continue;
            }
            let l = match mode {
                DecompMode::Algebraic => mobius(&rest, MobiusKind::LAlg, session)?,
                DecompMode::Surjective => lb(&rest),
            };
            sum = &sum + &l.scale(&(class_coeff.clone() * e_b));
        }
    }
    Ok(sum)
}

/// Exact per-`N` value of the induction coefficient (algebraic route).
pub fn induction_coefficient_at(
    table: &FiniteGroupTable,
    w: &Word,
    chi: &PartitionMap,
    n: i64,
    session: &Session,
) -> Result<BigRational> {
    let d = chi.total_size();
    let dfact = factorial(d);
    let mut sum = BigRational::zero();
    for (nu, size) in class_data(d) {
        let gp = gamma_power(w, nu.parts());
        let class_coeff = BigRational::new(size, dfact.clone());
        let flags = quotient_algebraic_flags(&gp.graph, session)?;
        for (q, &alg) in session.quotients(&gp.graph)?.iter().zip(flags.iter()) {
            let Some(rest) = factor_through(&gp.eta, q) else { continue };
            if !alg || !is_efficient(q, &gp.cover)? {
                continue;
            }
            let paths = cycle_image_paths(&gp.cycles, q);
            let e_b = e_eta_table(
                table,
                q.codomain.as_ref(),
                &paths,
                nu.parts(),
                &Payload::Map(chi),
                session.tuple_limit,
            )?;
            if e_b.is_zero() {
                continue;
            }
            sum += class_coeff.clone() * e_b * mobius_at(&rest, MobiusKind::LAlg, n, session)?;
        }
    }
    Ok(sum)
}

/// `E_w[χ^{→μ[N]}]` for a finite group with an exact integer table, valid
/// for every `N ≥ d + →μ(triv)₁`.
pub fn stable_coefficient_wreath(
    table: &FiniteGroupTable,
    w: &Word,
    arrm: &PartitionMap,
    session: &Session,
) -> Result<StableCoefficient> {
    let variant = pick_variant(w)?;
    let d = arrm.total_size();
    let dfact = factorial(d);
    let mut sum = RatFun::zero();
    for (nu, size) in class_data(d) {
        let class_coeff = BigRational::new(size, dfact.clone());
        for (middle, e_b) in gw_terms(table, w, arrm, &nu, variant, session)?.iter() {
            let c = mobius(middle, MobiusKind::CAlg, session)?;
            sum = &sum + &c.scale(&(class_coeff.clone() * e_b.clone()));
        }
    }
    let threshold = (d + arrm.triv_part(table).mu_1()) as i64;
    assemble_coefficient(sum, threshold.max(1), variant, |n| {
        stable_coefficient_wreath_at(table, w, arrm, n, session)
    })
}

/// Exact value of the wreath coefficient at a specific `N`.
pub fn stable_coefficient_wreath_at(
    table: &FiniteGroupTable,
    w: &Word,
    arrm: &PartitionMap,
    n: i64,
    session: &Session,
) -> Result<BigRational> {
    let variant = pick_variant(w)?;
    let d = arrm.total_size();
    let dfact = factorial(d);
    let mut sum = BigRational::zero();
    for (nu, size) in class_data(d) {
        let class_coeff = BigRational::new(size, dfact.clone());
        for (middle, e_b) in gw_terms(table, w, arrm, &nu, variant, session)?.iter() {
            sum += class_coeff.clone()
                * e_b.clone()
                * mobius_at(middle, MobiusKind::CAlg, n, session)?;
        }
    }
    Ok(sum)
}

/// Terms of `g_w(→μ, ν)`: middle parts with their `E_{η₁}[χ^{→μ}]` weights.
fn gw_terms(
    table: &FiniteGroupTable,
    w: &Word,
    arrm: &PartitionMap,
    nu: &Partition,
    variant: Variant,
    session: &Session,
) -> Result<std::sync::Arc<Vec<(GraphMorphism, BigRational)>>> {
    let key = (
        table.name.clone(),
        w.to_string(),
        arrm.display(table),
        nu.parts().to_vec(),
        variant_tag(variant),
    );
    if let Some(hit) = session.gw_memo.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let gp = gamma_power(w, nu.parts());
    let mut out = Vec::new();
    let flags1 = quotient_algebraic_flags(&gp.graph, session)?;
    for (q1, &alg1) in session.quotients(&gp.graph)?.iter().zip(flags1.iter()) {
        let Some(rest) = factor_through(&gp.eta, q1) else { continue };
        if !alg1 || !is_efficient(q1, &gp.cover)? {
            continue;
        }
        let paths = cycle_image_paths(&gp.cycles, q1);
        let e_b = e_eta_table(
            table,
            q1.codomain.as_ref(),
            &paths,
            nu.parts(),
            &Payload::Map(arrm),
            session.tuple_limit,
        )?;
        if e_b.is_zero() {
            continue;
        }
        let flags2 = quotient_algebraic_flags(&q1.codomain, session)?;
        for (q2, &alg2) in session.quotients(&q1.codomain)?.iter().zip(flags2.iter()) {
            if !alg2 || factor_through(&rest, q2).is_none() {
                continue;
            }
            if variant == Variant::NonPowerNoCycles && q2.codomain.has_cycle_component() {
                continue;
            }
            let keep = match variant {
                Variant::NonPowerNoCycles => true,
                Variant::ProperPowerProperAlgebraic => {
                    is_proper_algebraic(&q1.compose(q2), session)?
                }
            };
            if keep {
                out.push((q2.clone(), e_b.clone()));
            }
        }
    }
    let out = std::sync::Arc::new(out);
    session.gw_memo.lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// Constraint for the stable-primitivity-rank diagram search.
#[derive(Debug, Clone)]
pub enum SpiConstraint {
    None,
    /// Winding number of every edge divisible by `m` (0 meaning zero winding).
    ModM(u32),
    /// `E_b[φ] ≠ 0` for an irreducible of a finite group with exact table.
    PhiTable(FiniteGroupTable, usize),
    /// `E_b[φ] ≠ 0` for a linear character of `C_m`.
    PhiCyclic(CmSpec),
}

/// Evidence that a diagram passed its constraint.
#[derive(Debug, Clone, serde::Serialize)]
pub enum Evidence {
    None,
    Winding(Vec<i64>),
    PhiExpectation(String),
}

/// One efficient proper-algebraic diagram found by the search.
#[derive(Debug, Clone)]
pub struct DiagramRecord {
    pub degree: usize,
    pub sigma_type: Partition,
    pub b: GraphMorphism,
    pub chi: i64,
    /// `−χ(Σ)/d`.
    pub ratio: BigRational,
    pub evidence: Evidence,
}

/// Per-degree minima of `−χ(Σ)/d` over the diagrams found; upper bounds for
/// the stable invariant, never the exact value.
#[derive(Debug)]
pub struct SpiSearchResult {
    pub per_degree_minima: BTreeMap<usize, Option<BigRational>>,
    pub overall_upper_bound: Option<BigRational>,
    pub witnesses: Vec<DiagramRecord>,
    /// `(degree, shape)` branches skipped because their graphs exceed the
    /// vertex guard. Skipping keeps the reported minima valid upper bounds.
    pub skipped_branches: Vec<(usize, Partition)>,
}

/// Enumerates efficient proper-algebraic diagrams `b: Γ_{w^ν} → Σ` of
/// degree `d ≤ d_max`, filtered by the constraint.
pub fn spi_search(
    w: &Word,
    d_max: usize,
    constraint: &SpiConstraint,
    session: &Session,
) -> Result<SpiSearchResult> {
    if w.is_identity() {
        return Err(Error::Domain("diagram search for the trivial word".into()));
    }
    if d_max < 1 {
        return Err(Error::Input("d_max must be ≥ 1".into()));
    }
    let mut per_degree: BTreeMap<usize, Option<BigRational>> = BTreeMap::new();
    let mut witnesses: Vec<DiagramRecord> = Vec::new();
    let mut skipped: Vec<(usize, Partition)> = Vec::new();
    for d in 1..=d_max {
        let mut best: Option<BigRational> = None;
        let mut found: Vec<DiagramRecord> = Vec::new();
        for nu in crate::characters::partitions_of(d) {
            let gp = gamma_power(w, nu.parts());
            if gp.graph.n_vertices() > session.vertex_limit {
                skipped.push((d, nu.clone()));
                continue;
            }
            let flags = quotient_algebraic_flags(&gp.graph, session)?;
            for (q, &alg) in session.quotients(&gp.graph)?.iter().zip(flags.iter()) {
                if !alg || factor_through(&gp.eta, q).is_none() {
                    continue;
                }
                if !is_efficient(q, &gp.cover)? || q.iso_on_some_component() {
                    continue;
                }
                let paths = cycle_image_paths(&gp.cycles, q);
                let evidence = match constraint {
                    SpiConstraint::None => Evidence::None,
                    SpiConstraint::ModM(m) => {
                        let wv = winding_vector(q.codomain.as_ref(), &paths);
                        let ok = wv.iter().all(|&x| {
                            if *m == 0 {
                                x == 0
                            } else {
                                x.rem_euclid(*m as i64) == 0
                            }
                        });
                        if !ok {
                            continue;
                        }
                        Evidence::Winding(wv)
                    }
                    SpiConstraint::PhiTable(table, irr) => {
                        let v = e_eta_table(
                            table,
                            q.codomain.as_ref(),
                            &paths,
                            nu.parts(),
                            &Payload::Irreducible(*irr),
                            session.tuple_limit,
                        )?;
                        if v.is_zero() {
                            continue;
                        }
                        Evidence::PhiExpectation(v.to_string())
                    }
                    SpiConstraint::PhiCyclic(spec) => {
                        let v = e_eta_cm(spec, q.codomain.as_ref(), &paths);
                        if v.is_zero() {
                            continue;
                        }
                        Evidence::PhiExpectation(v.to_string())
                    }
                };
                let chi = q.codomain.euler_characteristic();
                let ratio = BigRational::new(BigInt::from(-chi), BigInt::from(d as i64));
                if best.as_ref().map_or(true, |b| ratio < *b) {
                    best = Some(ratio.clone());
                }
                found.push(DiagramRecord {
                    degree: d,
                    sigma_type: nu.clone(),
                    b: q.clone(),
                    chi,
                    ratio,
                    evidence,
                });
            }
        }
        if let Some(best_ratio) = &best {
            witnesses.extend(found.into_iter().filter(|r| r.ratio == *best_ratio));
        }
        per_degree.insert(d, best);
    }
    let overall = per_degree.values().flatten().min().cloned();
    Ok(SpiSearchResult {
        per_degree_minima: per_degree,
        overall_upper_bound: overall,
        witnesses,
        skipped_branches: skipped,
    })
}

/// Re-validates a witness: the morphism must still be efficient, proper
/// algebraic, and satisfy its recorded constraint.
pub fn revalidate(record: &DiagramRecord, w: &Word, session: &Session) -> Result<bool> {
    let gp = gamma_power(w, record.sigma_type.parts());
    if gp.graph.as_ref() != record.b.domain.as_ref() {
        return Ok(false);
    }
    if !is_proper_algebraic(&record.b, session)? || !is_efficient(&record.b, &gp.cover)? {
        return Ok(false);
    }
    if record.b.codomain.euler_characteristic() != record.chi {
        return Ok(false);
    }
    if let Evidence::Winding(wv) = &record.evidence {
        let paths = cycle_image_paths(&gp.cycles, &record.b);
        if winding_vector(record.b.codomain.as_ref(), &paths) != *wv {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Consistency helper used by tests and the verify suite: the
/// trivial-group reduction and the Pieri consistency of the induction route.
pub fn induction_equals_pminus_sum(
    w: &Word,
    mu: &Partition,
    session: &Session,
) -> Result<(RatFun, RatFun)> {
    let triv = FiniteGroupTable::trivial();
    let chi = PartitionMap::new(vec![(0, mu.clone())])?;
    let lhs = induction_coefficient(&triv, w, &chi, session)?;
    let mut rhs = RatFun::zero();
    for nu in mu.p_minus() {
        rhs = &rhs + &stable_coefficient_sn(w, &nu, session)?.ratfun;
    }
    Ok((lhs, rhs))
}

/// `E_w[fix] − 1` per-`N` helper for cross checks.
pub fn phi_at(w: &Word, n: i64, session: &Session) -> Result<BigRational> {
    let gp = gamma_power(w, &[1]);
    mobius_at(&gp.eta, MobiusKind::Phi, n, session)
}

/// Exact `lb` value used by the verify harness.
pub fn lb_value_at(eta: &GraphMorphism, n: i64) -> BigRational {
    lb_at(eta, n)
}
