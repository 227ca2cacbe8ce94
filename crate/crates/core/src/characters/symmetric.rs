//! Symmetric-group characters by the Murnaghan–Nakayama rule, the stable
//! characters χ^{μ[N]}, Pieri decomposition and its inverse, and the direct
//! induced-character evaluation used as an oracle.

use super::partitions::{partitions_of, Partition};
use crate::error::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::Mutex;

static MN_MEMO: Mutex<Option<HashMap<(Vec<usize>, Vec<usize>), i64>>> = Mutex::new(None);

/// χ^μ at the class of cycle type `rho`; requires `|μ| = |rho|`.
pub fn mn_character(mu: &Partition, rho: &Partition) -> Result<i64> {
    if mu.size() != rho.size() {
        return Err(crate::error::Error::Input(format!(
            "character size mismatch: |{mu}| != |{rho}|"
        )));
    }
    let mut parts = rho.parts().to_vec();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(mn_rec(mu.parts(), &parts))
}

fn mn_rec(mu: &[usize], rho: &[usize]) -> i64 {
    if mu.is_empty() {
        return 1;
    }
    let key = (mu.to_vec(), rho.to_vec());
    if let Some(map) = MN_MEMO.lock().unwrap().as_ref() {
        if let Some(&v) = map.get(&key) {
            return v;
        }
    }
    let t = rho[0];
    let rest = &rho[1..];
    // Beta-numbers: strictly decreasing first-column hook lengths.
    let ell = mu.len();
    let beta: Vec<i64> = mu
        .iter()
        .enumerate()
        .map(|(i, &m)| m as i64 + (ell - 1 - i) as i64)
        .collect();
    let mut sum = 0i64;
    for (i, &b) in beta.iter().enumerate() {
        let nb = b - t as i64;
        if nb < 0 || beta.contains(&nb) {
            continue;
        }
        let height = beta.iter().filter(|&&x| nb < x && x < b).count();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        let mut nbeta = beta.clone();
        nbeta[i] = nb;
        nbeta.sort_unstable_by(|a, b| b.cmp(a));
        let nmu: Vec<usize> = nbeta
            .iter()
            .enumerate()
            .map(|(j, &x)| (x - (ell - 1 - j) as i64) as usize)
            .filter(|&p| p != 0)
            .collect();
        sum += sign * mn_rec(&nmu, rest);
    }
    let mut guard = MN_MEMO.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(key, sum);
    sum
}

/// χ^{μ[N]} at a class of `S_N`; errors when `N < |μ| + μ₁`.
pub fn mn_stable(mu: &Partition, n: usize, rho: &Partition) -> Result<i64> {
    mn_character(&mu.pad_to(n)?, rho)
}

/// All cycle types of `S_d` with exact class sizes.
pub fn class_data(d: usize) -> Vec<(Partition, BigInt)> {
    partitions_of(d)
        .into_iter()
        .map(|p| {
            let s = p.class_size();
            (p, s)
        })
        .collect()
}

/// Stable labels in the Pieri decomposition of the induced character
/// `Ind(χ^μ ⊠ triv)` of `S_N`; errors when the right hand side is undefined.
pub fn pieri_decompose(mu: &Partition, n: usize) -> Result<Vec<Partition>> {
    if n < mu.size() + mu.mu_1() {
        return Err(crate::error::Error::Domain(format!(
            "Pieri decomposition undefined: N = {n} < |μ| + μ₁"
        )));
    }
    Ok(mu.p_minus())
}

/// `(1/(d−k)!) Σ_{α ∈ S_{d−k}} χ^μ(τ ⊔ α)`, computed by class grouping.
pub fn inverse_pieri_lhs(mu: &Partition, k: usize, tau: &Partition) -> Result<BigRational> {
    let d = mu.size();
    if k > d || tau.size() != k {
        return Err(crate::error::Error::Input(format!(
            "inverse Pieri sizes: |μ| = {d}, k = {k}, |τ| = {}",
            tau.size()
        )));
    }
    let m = d - k;
    let mut fact = BigInt::one();
    for i in 1..=m {
        fact *= BigInt::from(i);
    }
    let mut sum = BigRational::zero();
    for (theta, size) in class_data(m) {
        let value = mn_character(mu, &tau.union(&theta))?;
        sum += BigRational::new(size * BigInt::from(value), fact.clone());
    }
    Ok(sum)
}

/// Right hand side of inverse Pieri: `Σ_{ν ∈ P⁻(μ), |ν| = k} χ^ν(τ)`.
pub fn inverse_pieri_rhs(mu: &Partition, k: usize, tau: &Partition) -> Result<BigInt> {
    let mut sum = BigInt::zero();
    for nu in mu.p_minus() {
        if nu.size() == k {
            sum += BigInt::from(mn_character(&nu, tau)?);
        }
    }
    Ok(sum)
}

/// Direct evaluation of `Ind_{S_d × S_{N−d}}^{S_N}(χ^μ ⊠ triv)` at the class
/// of cycle type `lambda ⊢ N`: sum over invariant d-subsets, i.e. over
/// sub-multisets of the cycles with total length `d`.
pub fn induced_character_value(mu: &Partition, lambda: &Partition) -> Result<BigInt> {
    let d = mu.size();
    let mults: Vec<(usize, usize)> = lambda.multiplicities().into_iter().collect();
    let mut sum = BigInt::zero();
    // Choose j_ℓ cycles of each length ℓ with Σ ℓ·j_ℓ = d.
    fn rec(
        mults: &[(usize, usize)],
        idx: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        mu: &Partition,
        sum: &mut BigInt,
    ) -> Result<()> {
        if idx == mults.len() {
            if remaining == 0 {
                let mut parts = Vec::new();
                let mut count = BigInt::one();
                for (&(len, avail), &take) in mults.iter().zip(chosen.iter()) {
                    for _ in 0..take {
                        parts.push(len);
                    }
                    count *= binomial(avail, take);
                }
                parts.sort_unstable_by(|a, b| b.cmp(a));
                let tp = Partition::new(parts).unwrap();
                *sum += count * BigInt::from(mn_character(mu, &tp)?);
            }
            return Ok(());
        }
        let (len, avail) = mults[idx];
        for take in 0..=avail.min(remaining / len) {
            chosen.push(take);
            rec(mults, idx + 1, remaining - take * len, chosen, mu, sum)?;
            chosen.pop();
        }
        Ok(())
    }
    rec(&mults, 0, d, &mut Vec::new(), mu, &mut sum)?;
    Ok(sum)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}
