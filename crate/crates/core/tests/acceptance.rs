//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line. All comparisons are exact unless a check is
//! explicitly a Monte Carlo concordance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use word_measures::algebraic::{chi_alg, primitivity_rank, ChiAlg, Pi};
use word_measures::characters::{
    class_data, cycle_image_paths, e_eta_cm, e_eta_cm_generic, induced_character_value,
    inverse_pieri_lhs, inverse_pieri_rhs, mn_stable, parse_partition, partitions_of, CmSpec,
    FiniteGroupTable, Partition, PartitionMap,
};
use word_measures::enumerate::{factor_through, DecompMode};
use word_measures::graphs::{gamma_power, gamma_w, GraphMorphism};
use word_measures::mobius::{
    lb, mobius, product_fix_minus_one, product_fix_minus_one_at,
};
use word_measures::oracle::{
    exact_expectation_sn, exact_expectation_wreath, random_cover_lift_counts, ClassFn,
};
use word_measures::ratfun::RatFun;
use word_measures::session::{MobiusKind, Session};
use word_measures::stable::{
    beta, induction_coefficient, spi_search, stable_coefficient_sn, stable_coefficient_wreath,
    Beta, SpiConstraint,
};
use word_measures::words::{parse_word, Word};

fn w(s: &str) -> Word {
    parse_word(s, 2).unwrap()
}

fn p(s: &str) -> Partition {
    parse_partition(s).unwrap()
}

fn pass(name: &str) {
    println!("PASS {name}");
}

/// Criterion 1: Theorem 1.3 oracle equivalence over the corpus, exact
/// rational equality at every admissible N ≤ 5.
#[test]
fn c01_stable_sn_matches_brute_force() {
    let s = Session::new();
    let corpus = ["abAB", "aa", "abab", "aabb"];
    let mus = ["1", "2", "1,1", "2,1"];
    for word_text in corpus {
        let word = w(word_text);
        for mu_text in mus {
            let mu = p(mu_text);
            let coeff = stable_coefficient_sn(&word, &mu, &s).unwrap();
            for n in coeff.theorem_threshold..=5 {
                let ours = coeff.eval(n).unwrap();
                let brute = exact_expectation_sn(
                    std::slice::from_ref(&word),
                    &ClassFn::StableChar(mu.clone()),
                    n as usize,
                    &s,
                )
                .unwrap();
                assert_eq!(ours, brute, "w = {word_text}, mu = {mu_text}, N = {n}");
            }
        }
    }
    pass("criterion 1: Theorem 1.3 equals exact S_N expectations on the corpus");
}

/// Criterion 2: primitive words give identically zero coefficients for
/// 1 ≤ |μ| ≤ 3 and the constant 1 for μ = ∅.
#[test]
fn c02_uniformity_for_primitive_words() {
    let s = Session::new();
    for word_text in ["a", "ab", "aB"] {
        let word = w(word_text);
        for d in 1..=3usize {
            for mu in partitions_of(d) {
                let coeff = stable_coefficient_sn(&word, &mu, &s).unwrap();
                assert!(
                    coeff.ratfun.is_zero(),
                    "w = {word_text}, mu = {mu}: {}",
                    coeff.ratfun
                );
            }
        }
        let coeff = stable_coefficient_sn(&word, &Partition::empty(), &s).unwrap();
        assert_eq!(coeff.ratfun, RatFun::constant(1), "w = {word_text}");
    }
    pass("criterion 2: uniformity for primitive words");
}

/// Criterion 3: −deg E_w[std] = π(w) − 1 with leading coefficient c_w.
#[test]
fn c03_degree_equals_primitivity_rank() {
    let s = Session::new();
    for word_text in ["aa", "abAB", "aabb"] {
        let word = w(word_text);
        let coeff = stable_coefficient_sn(&word, &p("1"), &s).unwrap();
        let (pi, c_w) = primitivity_rank(&word, &s).unwrap();
        let Pi::Value(pi) = pi else {
            panic!("corpus words are non-primitive")
        };
        assert_eq!(coeff.ratfun.degree(), Some(1 - pi), "w = {word_text}");
        assert_eq!(
            coeff.ratfun.leading_coefficient(),
            BigRational::from(BigInt::from(c_w as i64)),
            "w = {word_text}"
        );
        // β(w, χ^{(1)[•]}) = π(w) − 1.
        assert_eq!(
            beta(&coeff, 1),
            Beta::Finite(BigRational::from(BigInt::from(pi - 1)))
        );
    }
    pass("criterion 3: degrees and leading coefficients match π(w) and c_w");
}

/// Criterion 4: Theorem 1.6 for the three multisets: degree χ_alg, leading
/// coefficient |Crit|, and exact values at N = 3, 4.
#[test]
fn c04_product_fix_minus_one() {
    let s = Session::new();
    let multisets: Vec<Vec<Word>> = vec![
        vec![w("aa")],
        vec![w("abAB"), w("abAB")],
        vec![w("aa"), w("bb")],
    ];
    for words in &multisets {
        let f = product_fix_minus_one(words, &s).unwrap();
        let (value, crit) = chi_alg(words, &s).unwrap();
        let ChiAlg::Value(expected_deg) = value else {
            panic!("corpus multisets have proper algebraic extensions")
        };
        assert_eq!(f.degree(), Some(expected_deg), "{words:?}");
        assert_eq!(
            f.leading_coefficient(),
            BigRational::from(BigInt::from(crit.len() as i64)),
            "{words:?}"
        );
        for n in [3i64, 4] {
            let ours = product_fix_minus_one_at(words, n, &s).unwrap();
            let brute =
                exact_expectation_sn(words, &ClassFn::FixMinusOneProduct, n as usize, &s)
                    .unwrap();
            assert_eq!(ours, brute, "{words:?} at N = {n}");
        }
    }
    pass("criterion 4: Theorem 1.6 degrees, leading coefficients, and values");
}

/// Criterion 5: the worked Pieri identity on all 15 classes of S₇ and
/// inverse Pieri for all μ ⊢ d ≤ 5.
#[test]
fn c05_pieri_and_inverse_pieri() {
    let mu = p("2,1");
    let labels = mu.p_minus();
    assert_eq!(labels.len(), 4);
    let classes = class_data(7);
    assert_eq!(classes.len(), 15);
    for (lam, _) in &classes {
        let lhs = induced_character_value(&mu, lam).unwrap();
        let mut rhs = BigInt::zero();
        for nu in &labels {
            rhs += BigInt::from(mn_stable(nu, 7, lam).unwrap());
        }
        assert_eq!(lhs, rhs, "class {lam}");
    }
    for d in 0..=5usize {
        for mu in partitions_of(d) {
            for k in 0..=d {
                for tau in partitions_of(k) {
                    let lhs = inverse_pieri_lhs(&mu, k, &tau).unwrap();
                    let rhs = inverse_pieri_rhs(&mu, k, &tau).unwrap();
                    assert_eq!(lhs, BigRational::from(rhs), "mu={mu} k={k} tau={tau}");
                }
            }
        }
    }
    pass("criterion 5: Pieri at (2,1)[7] and inverse Pieri through d = 5");
}

fn decomp_poset(session: &Session, word: &Word, shapes: &[&[usize]]) -> Vec<GraphMorphism> {
    let mut seen = std::collections::HashSet::new();
    let mut poset = Vec::new();
    let mut push = |m: GraphMorphism, poset: &mut Vec<GraphMorphism>| {
        let key = m.canonical_key().unwrap();
        if seen.insert(key) {
            poset.push(m);
        }
    };
    for shape in shapes {
        let gp = gamma_power(word, shape);
        push(gp.eta.clone(), &mut poset);
        for q in session.quotients(&gp.graph).unwrap().iter() {
            if let Some(rest) = factor_through(&gp.eta, q) {
                push(q.clone(), &mut poset);
                push(rest, &mut poset);
            }
        }
    }
    poset
}

/// Criterion 6: the defining Möbius identities of both families hold as
/// rational-function identities over the decomposition poset of
/// Γ_{(abAB)^ν}, ν ⊢ d ≤ 2; multiplicativity on disconnected codomains;
/// C^alg vanishes on cycle coverings from the paper threshold; and
/// deg L^alg = χ(domain) with leading coefficient 1.
#[test]
fn c06_mobius_identities() {
    let s = Session::new();
    let word = w("abAB");
    let shapes: Vec<&[usize]> = vec![&[], &[1], &[2], &[1, 1]];
    let poset = decomp_poset(&s, &word, &shapes);
    assert!(poset.len() > 100, "poset size {}", poset.len());

    let decomp2 = |eta: &GraphMorphism, mode| {
        word_measures::enumerate::decomp2(eta, mode, s.vertex_limit, &mut |m| {
            word_measures::algebraic::is_algebraic(m, &s)
        })
        .unwrap()
    };
    let decomp3 = |eta: &GraphMorphism, mode| {
        word_measures::enumerate::decomp3(eta, mode, s.vertex_limit, &mut |m| {
            word_measures::algebraic::is_algebraic(m, &s)
        })
        .unwrap()
    };

    for eta in &poset {
        let phi = mobius(eta, MobiusKind::Phi, &s).unwrap();
        // Surjective family.
        let mut l_sum = RatFun::zero();
        let mut r_sum = RatFun::zero();
        for rec in decomp2(eta, DecompMode::Surjective) {
            l_sum = &l_sum + &mobius(&rec.parts[1], MobiusKind::LSurj, &s).unwrap();
            r_sum = &r_sum + &mobius(&rec.parts[0], MobiusKind::RSurj, &s).unwrap();
        }
        assert_eq!(l_sum, phi, "L↠ identity");
        assert_eq!(r_sum, phi, "R↠ identity");
        let mut c_sum = RatFun::zero();
        for rec in decomp3(eta, DecompMode::Surjective) {
            c_sum = &c_sum + &mobius(&rec.parts[1], MobiusKind::CSurj, &s).unwrap();
        }
        assert_eq!(c_sum, phi, "C↠ identity");
        // Algebraic family.
        let mut la_sum = RatFun::zero();
        let mut ra_sum = RatFun::zero();
        for rec in decomp2(eta, DecompMode::Algebraic) {
            la_sum = &la_sum + &mobius(&rec.parts[1], MobiusKind::LAlg, &s).unwrap();
            ra_sum = &ra_sum + &mobius(&rec.parts[0], MobiusKind::RAlg, &s).unwrap();
        }
        assert_eq!(la_sum, phi, "L^alg identity");
        assert_eq!(ra_sum, phi, "R^alg identity");
        let mut ca_sum = RatFun::zero();
        for rec in decomp3(eta, DecompMode::Algebraic) {
            ca_sum = &ca_sum + &mobius(&rec.parts[1], MobiusKind::CAlg, &s).unwrap();
        }
        assert_eq!(ca_sum, phi, "C^alg identity");

        // deg L^alg = χ(domain) with leading coefficient 1.
        let lalg = mobius(eta, MobiusKind::LAlg, &s).unwrap();
        assert_eq!(lalg.degree(), Some(eta.domain.euler_characteristic()));
        assert!(lalg.leading_coefficient().is_one());

        // Multiplicativity on disconnected codomains.
        let comps = eta.codomain.components();
        if comps.len() > 1 {
            let restrictions: Vec<GraphMorphism> =
                comps.iter().map(|c| eta.restrict_to_component(c)).collect();
            let mut kinds = vec![MobiusKind::Phi, MobiusKind::LSurj, MobiusKind::LAlg];
            if eta.is_surjective() {
                kinds.push(MobiusKind::CSurj);
                kinds.push(MobiusKind::RSurj);
            }
            if word_measures::algebraic::is_algebraic(eta, &s).unwrap() {
                kinds.push(MobiusKind::CAlg);
                kinds.push(MobiusKind::RAlg);
            }
            for kind in kinds {
                let whole = mobius(eta, kind, &s).unwrap();
                let mut prod = RatFun::constant(1);
                for r in &restrictions {
                    prod = &prod * &mobius(r, kind, &s).unwrap();
                }
                assert_eq!(whole, prod, "multiplicativity for {kind:?}");
            }
        }
    }

    // C^alg of non-isomorphism cycle coverings of degree ≤ 3 vanishes from
    // the maximal component degree on.
    for base in ["abAB", "a"] {
        let word = w(base);
        for k in [2usize, 3] {
            let gp = gamma_power(&word, &[k]);
            let target = gamma_w(&word);
            let covers = word_measures::graphs::find_morphisms(&gp.graph, &target.graph);
            assert!(!covers.is_empty());
            let f = mobius(&covers[0], MobiusKind::CAlg, &s).unwrap();
            assert!(f.is_zero(), "cover {base}^{k}");
            assert_eq!(f.valid_from(), k as i64, "threshold for {base}^{k}");
        }
    }
    pass("criterion 6: Möbius identities, multiplicativity, cycle vanishing, L^alg degree");
}

/// Criterion 7: wreath coefficients over C₂ match the exact oracle at
/// N = 2, 3, and the →μ(triv) = ∅ fast path equals the induction formula
/// symbolically.
#[test]
fn c07_wreath_formulas() {
    let s = Session::new();
    let c2 = FiniteGroupTable::cyclic2();
    for word_text in ["aa", "abAB", "abab"] {
        let word = w(word_text);
        for arrm_text in ["sign:1", "sign:1,1"] {
            let arrm = PartitionMap::parse(arrm_text, &c2).unwrap();
            let coeff = stable_coefficient_wreath(&c2, &word, &arrm, &s).unwrap();
            for n in 2..=3i64 {
                if n < coeff.theorem_threshold {
                    continue;
                }
                let ours = coeff.eval(n).unwrap();
                let brute =
                    exact_expectation_wreath(&c2, std::slice::from_ref(&word), &arrm, n as usize, &s)
                        .unwrap();
                assert_eq!(ours, brute, "w = {word_text}, arrm = {arrm_text}, N = {n}");
            }
            // →μ(triv) = ∅: the coefficient is the induction expectation.
            assert!(arrm.supported_off_triv(&c2));
            let ind = induction_coefficient(&c2, &word, &arrm, &s).unwrap();
            assert_eq!(coeff.ratfun, ind, "w = {word_text}, arrm = {arrm_text}");
        }
    }
    pass("criterion 7: wreath coefficients match the oracle and the induction route");
}

/// Criterion 8: the generic homomorphism enumeration agrees with the
/// winding criterion on an enumerated corpus of diagrams for m ∈ {2, 3}.
#[test]
fn c08_cm_consistency() {
    let s = Session::new();
    // Corpus: covers of cycles and the search diagrams of the sπ corpus.
    let mut corpus: Vec<(GraphMorphism, Vec<Vec<usize>>)> = Vec::new();
    for (base, shape) in [("a", vec![2usize]), ("a", vec![3]), ("abAB", vec![1]), ("abAB", vec![2])]
    {
        let gp = gamma_power(&w(base), &shape);
        let paths = cycle_image_paths(&gp.cycles, &gp.cover.rho);
        corpus.push((gp.cover.rho.clone(), paths));
        let eta_paths = cycle_image_paths(&gp.cycles, &gp.eta);
        corpus.push((gp.eta.clone(), eta_paths));
    }
    for word_text in ["aa", "abAB"] {
        let word = w(word_text);
        let r = spi_search(&word, 2, &SpiConstraint::None, &s).unwrap();
        for rec in &r.witnesses {
            let gp = gamma_power(&word, rec.sigma_type.parts());
            let paths = cycle_image_paths(&gp.cycles, &rec.b);
            corpus.push((rec.b.clone(), paths));
        }
    }
    assert!(corpus.len() >= 10);
    for (m, paths) in &corpus {
        for modulus in [2u32, 3] {
            for j in 0..modulus as i64 {
                let spec = CmSpec::new(modulus, j).unwrap();
                let fast = e_eta_cm(&spec, m.codomain.as_ref(), paths);
                let generic =
                    e_eta_cm_generic(&spec, m.codomain.as_ref(), paths, 200_000).unwrap();
                assert_eq!(fast, generic, "m = {modulus}, j = {j}");
            }
        }
    }
    pass("criterion 8: winding criterion equals generic enumeration for m in {2,3}");
}

/// Criterion 9: sπ upper bounds — 0 for proper powers, ≥ 1 minima for the
/// non-power corpus at d ≤ 2.
#[test]
fn c09_spi_bounds() {
    let s = Session::new();
    for u in ["a", "ab"] {
        for k in [2usize, 3] {
            let word = w(u).pow(k as u32);
            let r = spi_search(&word, k, &SpiConstraint::None, &s).unwrap();
            assert_eq!(
                r.overall_upper_bound,
                Some(BigRational::zero()),
                "u = {u}, k = {k}"
            );
            for rec in &r.witnesses {
                assert!(word_measures::stable::revalidate(rec, &word, &s).unwrap());
            }
        }
    }
    for word_text in ["abAB", "aabb"] {
        let word = w(word_text);
        let r = spi_search(&word, 2, &SpiConstraint::None, &s).unwrap();
        assert!(r.skipped_branches.is_empty());
        for (d, min) in &r.per_degree_minima {
            if let Some(min) = min {
                assert!(
                    *min >= BigRational::one(),
                    "w = {word_text}, degree {d}: {min}"
                );
            }
        }
        assert_eq!(r.overall_upper_bound, Some(BigRational::one()));
    }
    pass("criterion 9: sπ bounds are 0 for proper powers and ≥ 1 for non-powers");
}

/// Criterion 10: the Theorem 1.2 witness for w = abAB over S₃.
#[test]
fn c10_thm12_witness() {
    let s = Session::new();
    let s3 = FiniteGroupTable::symmetric(3).unwrap();
    let word = w("abAB");
    // E_b[std₃] = 1/2 for the critical diagram b = η_w (36-term enumeration).
    let gp = gamma_w(&word);
    let paths = cycle_image_paths(&gp.cycles, &gp.eta);
    let std3 = s3.irr_by_name("std").unwrap();
    let value = word_measures::characters::e_eta_table(
        &s3,
        gp.eta.codomain.as_ref(),
        &paths,
        &[1],
        &word_measures::characters::Payload::Irreducible(std3),
        100_000,
    )
    .unwrap();
    assert_eq!(value, BigRational::new(1.into(), 2.into()));

    // The wreath coefficient over S₃ with →μ = std↦(1) has β = 1, matching
    // the degree-1 search minimum.
    let arrm = PartitionMap::parse("std:1", &s3).unwrap();
    let coeff = stable_coefficient_wreath(&s3, &word, &arrm, &s).unwrap();
    assert_eq!(beta(&coeff, 1), Beta::Finite(BigRational::one()));
    let r = spi_search(&word, 1, &SpiConstraint::None, &s).unwrap();
    assert_eq!(
        r.per_degree_minima.get(&1).cloned().flatten(),
        Some(BigRational::one())
    );
    pass("criterion 10: Theorem 1.2 witness over S₃ with β = 1 at degree 1");
}

/// Criterion 11 (full suite): Monte Carlo concordance of Φ and L↠ at
/// N = 10 with 10⁵ random covers, within 4 standard errors; seeded reruns
/// are bit-identical.
#[test]
fn c11_monte_carlo_concordance() {
    use num_traits::ToPrimitive;
    let s = Session::new();
    let seed = 20_260_809;
    for word_text in ["ab", "abAB"] {
        let gp = gamma_w(&w(word_text));
        let phi = mobius(&gp.eta, MobiusKind::Phi, &s).unwrap();
        let phi_target = phi.eval(10).unwrap().to_f64().unwrap();
        let est = random_cover_lift_counts(&gp.eta, 10, 100_000, seed, false).unwrap();
        assert!(
            est.sigmas_from(phi_target) < 4.0,
            "Φ for {word_text}: mean {} target {phi_target} σ {}",
            est.mean,
            est.std_error
        );
        let lb_target = lb(&gp.eta).eval(10).unwrap().to_f64().unwrap();
        let est_inj = random_cover_lift_counts(&gp.eta, 10, 100_000, seed, true).unwrap();
        assert!(
            est_inj.sigmas_from(lb_target) < 4.0,
            "L↠ for {word_text}: mean {} target {lb_target}",
            est_inj.mean
        );
        let rerun = random_cover_lift_counts(&gp.eta, 10, 100_000, seed, false).unwrap();
        assert_eq!(est.mean.to_bits(), rerun.mean.to_bits());
        assert_eq!(est.std_error.to_bits(), rerun.std_error.to_bits());
    }
    pass("criterion 11: Monte Carlo concordance at N = 10 with seeded determinism");
}

/// Spec invariant: the induction route equals the P⁻ sum of stable
/// coefficients symbolically, for all μ ⊢ d ≤ 3 over the corpus.
#[test]
fn induction_consistency_over_corpus() {
    let s = Session::new();
    let triv = FiniteGroupTable::trivial();
    for word_text in ["abAB", "aa", "abab", "aabb"] {
        let word = w(word_text);
        for d in 1..=3usize {
            for mu in partitions_of(d) {
                let chi = PartitionMap::new(vec![(0, mu.clone())]).unwrap();
                let lhs = induction_coefficient(&triv, &word, &chi, &s).unwrap();
                let mut rhs = RatFun::zero();
                for nu in mu.p_minus() {
                    rhs = &rhs + &stable_coefficient_sn(&word, &nu, &s).unwrap().ratfun;
                }
                assert_eq!(lhs, rhs, "w = {word_text}, mu = {mu}");
            }
        }
    }
    pass("invariant: induction route equals the P⁻ sum over the corpus");
}

/// Spec invariant (Theorem 1.4 at the literally-true level): for →μ with
/// →μ(triv) = ∅, the wreath coefficient degree is at most the maximal χ(Σ)
/// over efficient proper-algebraic diagrams of degree |→μ|.
#[test]
fn wreath_degree_bounded_by_search_maximum() {
    let s = Session::new();
    let c2 = FiniteGroupTable::cyclic2();
    for word_text in ["aa", "abAB", "abab"] {
        let word = w(word_text);
        for arrm_text in ["sign:1", "sign:1,1"] {
            let arrm = PartitionMap::parse(arrm_text, &c2).unwrap();
            let d = arrm.total_size();
            let coeff = stable_coefficient_wreath(&c2, &word, &arrm, &s).unwrap();
            let Some(deg) = coeff.ratfun.degree() else {
                continue; // zero coefficient satisfies any bound
            };
            let search = spi_search(&word, d, &SpiConstraint::None, &s).unwrap();
            let min_ratio = search
                .per_degree_minima
                .get(&d)
                .cloned()
                .flatten()
                .expect("corpus words admit degree-d diagrams");
            // max χ(Σ) at degree d equals −d · min(−χ/d).
            let max_chi = -(min_ratio * BigRational::from(BigInt::from(d as i64)));
            assert!(
                BigRational::from(BigInt::from(deg)) <= max_chi,
                "w = {word_text}, arrm = {arrm_text}: deg {deg} vs max χ {max_chi}"
            );
        }
    }
    pass("invariant: wreath coefficient degree bounded by the degree-d search maximum");
}
