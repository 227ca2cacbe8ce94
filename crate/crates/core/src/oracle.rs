//! Independent ground truth: exact enumeration and seeded Monte Carlo of
//! word measures on `S_N` and `G ≀ S_N`, and random-cover lift counting.
//!
//! Nothing here touches the Möbius or character formulas; these are the
//! oracles the formulas are tested against.

use crate::characters::{
    all_perms, mn_stable, wreath_character_eval, FiniteGroupTable, Partition, PartitionMap, Perm,
};
use crate::error::{Error, Result};
use crate::graphs::GraphMorphism;
use crate::session::Session;
use crate::words::Word;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Class-function specification for the exact and sampled expectations.
#[derive(Debug, Clone)]
pub enum ClassFn {
    /// `∏_i fix(w_i(σ))`
    Fix,
    /// `∏_i (fix(w_i(σ)) − 1)`
    FixMinusOneProduct,
    /// `χ^{μ[N]}(w(σ))`; requires a single word.
    StableChar(Partition),
    /// `∏_i #fix(w(σ)^{ν_i})`; requires a single word.
    ZetaProduct(Partition),
}

fn eval_word_at(w: &Word, perms: &[Perm], n: usize) -> Perm {
    let mut acc = Perm::identity(n);
    for l in w.letters() {
        let p = &perms[(l.index - 1) as usize];
        let p = if l.sign > 0 { p.clone() } else { p.inverse() };
        acc = acc.compose(&p);
    }
    acc
}

fn used_rank(words: &[Word]) -> usize {
    words
        .iter()
        .flat_map(|w| w.letters().iter().map(|l| l.index as usize))
        .max()
        .unwrap_or(1)
}

fn class_fn_value(f: &ClassFn, words: &[Word], perms: &[Perm], n: usize) -> Result<BigInt> {
    match f {
        ClassFn::Fix => {
            let mut prod = BigInt::one();
            for w in words {
                prod *= BigInt::from(eval_word_at(w, perms, n).num_fixed());
            }
            Ok(prod)
        }
        ClassFn::FixMinusOneProduct => {
            let mut prod = BigInt::one();
            for w in words {
                prod *= BigInt::from(eval_word_at(w, perms, n).num_fixed() as i64 - 1);
            }
            Ok(prod)
        }
        ClassFn::StableChar(mu) => {
            if words.len() != 1 {
                return Err(Error::Input("stable character expects a single word".into()));
            }
            let sigma = eval_word_at(&words[0], perms, n);
            Ok(BigInt::from(mn_stable(mu, n, &sigma.cycle_type())?))
        }
        ClassFn::ZetaProduct(nu) => {
            if words.len() != 1 {
                return Err(Error::Input("zeta product expects a single word".into()));
            }
            let sigma = eval_word_at(&words[0], perms, n);
            let mut prod = BigInt::one();
            for &k in nu.parts() {
                let mut p = Perm::identity(n);
                for _ in 0..k {
                    p = p.compose(&sigma);
                }
                prod *= BigInt::from(p.num_fixed());
            }
            Ok(prod)
        }
    }
}

/// Exact average of the class function over all homomorphism tuples in
/// `(S_N)^r`, where `r` is the number of letters the words actually use.
pub fn exact_expectation_sn(
    words: &[Word],
    f: &ClassFn,
    n: usize,
    session: &Session,
) -> Result<BigRational> {
    let r = used_rank(words);
    let group = all_perms(n);
    let mut tuples = 1u64;
    for _ in 0..r {
        tuples = tuples.saturating_mul(group.len() as u64);
        if tuples > session.tuple_limit {
            return Err(Error::resource("exact S_N enumeration", session.tuple_limit));
        }
    }
    let mut sum = BigInt::zero();
    let mut idx = vec![0usize; r];
    let mut perms: Vec<Perm> = vec![Perm::identity(n); r];
    loop {
        for (i, &j) in idx.iter().enumerate() {
            perms[i] = group[j].clone();
        }
        sum += class_fn_value(f, words, &perms, n)?;
        let mut i = 0;
        loop {
            if i == r {
                let denom = BigInt::from(group.len() as u64).pow(r as u32);
                return Ok(BigRational::new(sum, denom));
            }
            idx[i] += 1;
            if idx[i] < group.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// A reproducible Monte Carlo estimate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_values(values: &[f64], seed: u64) -> McEstimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: values.len() as u64,
            seed,
        }
    }

    /// |mean − target| measured in standard errors (∞ when σ = 0 and off).
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.std_error == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        }
    }
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Perm {
    // Fisher–Yates, unbiased.
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    Perm(v)
}

/// Seeded Monte Carlo estimate of the same expectation (ChaCha8 stream;
/// identical seeds give identical estimates on every platform).
pub fn monte_carlo_sn(
    words: &[Word],
    f: &ClassFn,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Input("samples must be ≥ 1".into()));
    }
    let r = used_rank(words);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let perms: Vec<Perm> = (0..r).map(|_| random_perm(n, &mut rng)).collect();
        let v = class_fn_value(f, words, &perms, n)?;
        values.push(v.to_f64().unwrap_or(f64::NAN));
    }
    Ok(McEstimate::from_values(&values, seed))
}

/// An element of `G ≀ S_N` as `(v, σ)`.
#[derive(Clone)]
struct WreathElem {
    v: Vec<usize>,
    sigma: Perm,
}

fn wreath_mul(g: &FiniteGroupTable, a: &WreathElem, b: &WreathElem) -> WreathElem {
    let sigma_inv = a.sigma.inverse();
    let v = (0..a.v.len())
        .map(|i| g.mul(a.v[i], b.v[sigma_inv.apply(i)]))
        .collect();
    WreathElem { v, sigma: a.sigma.compose(&b.sigma) }
}

fn wreath_inv(g: &FiniteGroupTable, a: &WreathElem) -> WreathElem {
    let sigma = a.sigma.inverse();
    let v = (0..a.v.len()).map(|i| g.invert(a.v[a.sigma.apply(i)])).collect();
    WreathElem { v, sigma }
}

fn eval_word_wreath(g: &FiniteGroupTable, w: &Word, elems: &[WreathElem], n: usize) -> WreathElem {
    let mut acc = WreathElem { v: vec![g.identity; n], sigma: Perm::identity(n) };
    for l in w.letters() {
        let e = &elems[(l.index - 1) as usize];
        let e = if l.sign > 0 { e.clone() } else { wreath_inv(g, e) };
        acc = wreath_mul(g, &acc, &e);
    }
    acc
}

/// Exact average of `χ^{→μ[N]}` over all homomorphism tuples into `G ≀ S_N`.
pub fn exact_expectation_wreath(
    table: &FiniteGroupTable,
    words: &[Word],
    arrm: &PartitionMap,
    n: usize,
    session: &Session,
) -> Result<BigRational> {
    let r = used_rank(words);
    let padded = arrm.pad_to(n, table)?;
    let per_factor = (table.order() as u64)
        .checked_pow(n as u32)
        .and_then(|x| {
            let mut f = 1u64;
            for i in 1..=n as u64 {
                f = f.saturating_mul(i);
            }
            x.checked_mul(f)
        })
        .unwrap_or(u64::MAX);
    if per_factor > 10_000 {
        return Err(Error::resource("exact wreath enumeration per factor", 10_000));
    }
    if per_factor.saturating_pow(r as u32) > session.tuple_limit.saturating_mul(100) {
        return Err(Error::resource(
            "exact wreath enumeration total",
            session.tuple_limit * 100,
        ));
    }
    // Enumerate all elements of G ≀ S_N once.
    let perms = all_perms(n);
    let mut elements = Vec::new();
    let mut v = vec![0usize; n];
    loop {
        for sigma in &perms {
            elements.push(WreathElem { v: v.clone(), sigma: sigma.clone() });
        }
        let mut i = 0;
        loop {
            if i == n {
                // done
                v = Vec::new();
                break;
            }
            v[i] += 1;
            if v[i] < table.order() {
                break;
            }
            v[i] = 0;
            i += 1;
        }
        if v.is_empty() {
            break;
        }
    }
    let mut sum = BigInt::zero();
    let mut idx = vec![0usize; r];
    loop {
        let tuple: Vec<WreathElem> = idx.iter().map(|&j| elements[j].clone()).collect();
        let mut prod = BigInt::one();
        for w in words {
            let y = eval_word_wreath(table, w, &tuple, n);
            prod *= wreath_character_eval(table, &padded, &y.v, &y.sigma)?;
            if prod.is_zero() {
                break;
            }
        }
        // For multiple words the product semantics multiplies the character
        // values of each word's image (used with a single word in practice).
        sum += prod;
        let mut i = 0;
        loop {
            if i == r {
                let denom = BigInt::from(elements.len() as u64).pow(r as u32);
                return Ok(BigRational::new(sum, denom));
            }
            idx[i] += 1;
            if idx[i] < elements.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Samples random `N`-covers of the codomain (one uniform permutation per
/// geometric edge) and counts lifts, or injective lifts, of `eta`.
pub fn random_cover_lift_counts(
    eta: &GraphMorphism,
    n: usize,
    samples: u64,
    seed: u64,
    injective_only: bool,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Input("samples must be ≥ 1".into()));
    }
    let delta = eta.codomain.as_ref();
    let gamma = eta.domain.as_ref();
    let comps = gamma.components();
    let out = gamma.out_edges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let perms: Vec<Perm> = (0..delta.n_geom_edges()).map(|_| random_perm(n, &mut rng)).collect();
        // For each component and base sheet: propagate, collect assignment.
        let mut per_comp: Vec<Vec<Vec<usize>>> = Vec::new(); // comp -> list of sheet vectors (indexed by position in comp)
        for comp in &comps {
            let pos: std::collections::HashMap<usize, usize> =
                comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut lifts = Vec::new();
            'sheet: for s0 in 0..n {
                let mut sheet = vec![usize::MAX; comp.len()];
                sheet[0] = s0;
                let mut stack = vec![comp[0]];
                while let Some(x) = stack.pop() {
                    let sx = sheet[pos[&x]];
                    for &oe in &out[x] {
                        let y = gamma.orient_dst(oe);
                        let ce = eta.orient_image(oe);
                        let p = &perms[ce / 2];
                        let sy = if ce % 2 == 0 { p.apply(sx) } else { p.inverse().apply(sx) };
                        let py = pos[&y];
                        if sheet[py] == usize::MAX {
                            sheet[py] = sy;
                            stack.push(y);
                        } else if sheet[py] != sy {
                            continue 'sheet;
                        }
                    }
                }
                lifts.push(sheet);
            }
            per_comp.push(lifts);
        }
        let count = if !injective_only {
            per_comp.iter().map(|l| l.len() as f64).product::<f64>()
        } else {
            // Backtracking over components with per-codomain-vertex used sheets.
            fn count_injective(
                per_comp: &[Vec<Vec<usize>>],
                comps: &[Vec<usize>],
                eta: &GraphMorphism,
                c: usize,
                used: &mut std::collections::HashSet<(usize, usize)>,
            ) -> f64 {
                if c == per_comp.len() {
                    return 1.0;
                }
                let mut total = 0.0;
                'lift: for sheet in &per_comp[c] {
                    let mut added = Vec::new();
                    for (i, &v) in comps[c].iter().enumerate() {
                        let key = (eta.vertex_map[v], sheet[i]);
                        if used.contains(&key) {
                            for k in added {
                                used.remove(&k);
                            }
                            continue 'lift;
                        }
                        used.insert(key);
                        added.push(key);
                    }
                    total += count_injective(per_comp, comps, eta, c + 1, used);
                    for k in added {
                        used.remove(&k);
                    }
                }
                total
            }
            count_injective(
                &per_comp,
                &comps,
                eta,
                0,
                &mut std::collections::HashSet::new(),
            )
        };
        values.push(count);
    }
    Ok(McEstimate::from_values(&values, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{gamma_multi, gamma_w};
    use crate::words::parse_word;

    fn w(s: &str, r: u32) -> Word {
        parse_word(s, r).unwrap()
    }

    fn sess() -> Session {
        Session::new()
    }

    #[test]
    fn exact_fix_examples() {
        let s = sess();
        // E[fix([x,y])] over S₃ = 3/2.
        let v = exact_expectation_sn(&[w("abAB", 2)], &ClassFn::Fix, 3, &s).unwrap();
        assert_eq!(v, BigRational::new(3.into(), 2.into()));
        // Uniform word: E[fix] = 1.
        for n in 2..=4 {
            let v = exact_expectation_sn(&[w("a", 1)], &ClassFn::Fix, n, &s).unwrap();
            assert_eq!(v, BigRational::one());
        }
        // E[fix(σ²)] over S₃ = 2.
        let v = exact_expectation_sn(&[w("aa", 1)], &ClassFn::Fix, 3, &s).unwrap();
        assert_eq!(v, BigRational::from(BigInt::from(2)));
    }

    #[test]
    fn invariance_under_conjugation_and_inversion() {
        let s = sess();
        let base = w("abAB", 2);
        let conj = w("b", 2).concat(&base).concat(&w("B", 2));
        let inv = base.inverse();
        for f in [ClassFn::Fix, ClassFn::FixMinusOneProduct] {
            let v0 = exact_expectation_sn(std::slice::from_ref(&base), &f, 3, &s).unwrap();
            let v1 = exact_expectation_sn(std::slice::from_ref(&conj), &f, 3, &s).unwrap();
            let v2 = exact_expectation_sn(std::slice::from_ref(&inv), &f, 3, &s).unwrap();
            assert_eq!(v0, v1);
            assert_eq!(v0, v2);
        }
    }

    #[test]
    fn guard_blocks_large_enumerations() {
        let s = sess();
        assert!(matches!(
            exact_expectation_sn(&[w("abAB", 2)], &ClassFn::Fix, 6, &s),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn zeta_products() {
        let s = sess();
        // ζ_(2)(σ) = fix(σ²); single-word zeta for w = a over S₃: E[fix(σ²)] = 2.
        let v = exact_expectation_sn(
            &[w("a", 1)],
            &ClassFn::ZetaProduct(Partition::new(vec![2]).unwrap()),
            3,
            &s,
        )
        .unwrap();
        assert_eq!(v, BigRational::from(BigInt::from(2)));
    }

    #[test]
    fn monte_carlo_reproducible_and_sane() {
        let a = monte_carlo_sn(&[w("ab", 2)], &ClassFn::Fix, 50, 2_000, 7).unwrap();
        let b = monte_carlo_sn(&[w("ab", 2)], &ClassFn::Fix, 50, 2_000, 7).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_error, b.std_error);
        assert!(a.sigmas_from(1.0) < 4.0, "mean {} σ {}", a.mean, a.std_error);
        let c = monte_carlo_sn(&[w("ab", 2)], &ClassFn::Fix, 50, 2_000, 8).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn wreath_exact_examples() {
        let s = sess();
        let c2 = FiniteGroupTable::cyclic2();
        // (C₂, a², sign↦(1), N = 2) → 1: average of χ(g²) over the 8 elements.
        let arrm = PartitionMap::parse("sign:1", &c2).unwrap();
        let v = exact_expectation_wreath(&c2, &[w("aa", 1)], &arrm, 2, &s).unwrap();
        assert_eq!(v, BigRational::one());
        // (C₂, ab, sign↦(1), N = 2) → 0: uniform measure.
        let v = exact_expectation_wreath(&c2, &[w("ab", 2)], &arrm, 2, &s).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn wreath_trivial_group_reduces_to_sn() {
        let s = sess();
        let triv = FiniteGroupTable::trivial();
        let mu = Partition::new(vec![1]).unwrap();
        let arrm = PartitionMap::new(vec![(0, mu.clone())]).unwrap();
        for n in 2..=3usize {
            let lhs = exact_expectation_wreath(&triv, &[w("abAB", 2)], &arrm, n, &s).unwrap();
            let rhs =
                exact_expectation_sn(&[w("abAB", 2)], &ClassFn::StableChar(mu.clone()), n, &s)
                    .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cover_sampling_matches_lb_and_phi() {
        // Injective lifts of η_ab at N = 3 average (N−1)/N = 2/3.
        let g = gamma_w(&w("ab", 2));
        let est = random_cover_lift_counts(&g.eta, 3, 4_000, 11, true).unwrap();
        assert!(est.sigmas_from(2.0 / 3.0) < 4.0, "mean {}", est.mean);

        // All lifts of the identity on a cycle: always exactly 1 on average? — Φ = N^0 = 1.
        let idm = GraphMorphism::identity(g.graph.clone());
        let est = random_cover_lift_counts(&idm, 5, 500, 3, false).unwrap();
        assert!(est.sigmas_from(1.0) < 4.0);

        // Two disjoint a-circles, injective lifts: mean 1 (cross-check of lb).
        let (_, eta, _) = gamma_multi(&[w("a", 1), w("a", 1)]).unwrap();
        let est = random_cover_lift_counts(&eta, 4, 4_000, 5, true).unwrap();
        assert!(est.sigmas_from(1.0) < 4.0, "mean {}", est.mean);

        // All lifts of η_abAB at N = 4 match E[fix] = 4/3.
        let gc = gamma_w(&w("abAB", 2));
        let est = random_cover_lift_counts(&gc.eta, 4, 4_000, 13, false).unwrap();
        assert!(est.sigmas_from(4.0 / 3.0) < 4.0, "mean {}", est.mean);
    }
}
