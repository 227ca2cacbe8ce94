//! Integer partitions: enumeration, conjugacy-class sizes in symmetric
//! groups, hook products, and the column-removal set P⁻.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::One;
use std::fmt;

/// Weakly decreasing positive parts; the empty partition is allowed and
/// `mu_1()` of it is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p != 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Input(format!("parts not weakly decreasing: {parts:?}")));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First part, 0 for the empty partition.
    pub fn mu_1(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    /// `μ[N] = (N − |μ|, μ₁, …)`: Young diagram with `μ` outside the first row.
    pub fn pad_to(&self, n: usize) -> Result<Partition> {
        if n < self.size() + self.mu_1() {
            return Err(Error::Domain(format!(
                "μ[N] undefined: N = {n} < |μ| + μ₁ = {}",
                self.size() + self.mu_1()
            )));
        }
        let mut parts = vec![n - self.size()];
        parts.extend_from_slice(&self.0);
        Partition::new(parts)
    }

    /// Multiplicities of each part value.
    pub fn multiplicities(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut m = std::collections::BTreeMap::new();
        for &p in &self.0 {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// Conjugacy-class size of this cycle type in `S_{|λ|}`.
    pub fn class_size(&self) -> BigInt {
        let n = self.size();
        let mut num = BigInt::one();
        for i in 1..=n {
            num *= BigInt::from(i);
        }
        let mut den = BigInt::one();
        for (part, mult) in self.multiplicities() {
            for _ in 0..mult {
                den *= BigInt::from(part);
            }
            for i in 1..=mult {
                den *= BigInt::from(i);
            }
        }
        num / den
    }

    /// Hook length product of the diagram.
    pub fn hook_product(&self) -> BigInt {
        let mut prod = BigInt::one();
        for (i, &row) in self.0.iter().enumerate() {
            for j in 1..=row {
                let arm = row - j;
                let leg = self.0[i + 1..].iter().filter(|&&r| r >= j).count();
                prod *= BigInt::from(arm + leg + 1);
            }
        }
        prod
    }

    /// Number of standard Young tableaux (dimension of the irreducible).
    pub fn dimension(&self) -> BigInt {
        let mut fact = BigInt::one();
        for i in 1..=self.size() {
            fact *= BigInt::from(i);
        }
        fact / self.hook_product()
    }

    /// All partitions obtained by removing at most one cell from every
    /// column; contains `self`, which is the unique member of maximal size.
    pub fn p_minus(&self) -> Vec<Partition> {
        // ν_i ranges over [μ_{i+1}, μ_i]: exactly the shapes where the
        // removed cells form disjoint column intervals.
        let ell = self.0.len();
        let mut out = Vec::new();
        let mut current = vec![0usize; ell];
        fn rec(
            mu: &[usize],
            i: usize,
            current: &mut Vec<usize>,
            out: &mut Vec<Partition>,
        ) {
            if i == mu.len() {
                out.push(Partition::new(current.clone()).unwrap());
                return;
            }
            let lo = if i + 1 < mu.len() { mu[i + 1] } else { 0 };
            for v in lo..=mu[i] {
                current[i] = v;
                rec(mu, i + 1, current, out);
            }
        }
        rec(&self.0, 0, &mut current, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Union of two cycle types (concatenate and sort).
    pub fn union(&self, other: &Partition) -> Partition {
        let mut parts = self.0.clone();
        parts.extend_from_slice(&other.0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.0.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
        )
    }
}

/// All partitions of `n`, in descending lexicographic order.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            rec(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n.max(1), &mut Vec::new(), &mut out);
    if n == 0 {
        return vec![Partition::empty()];
    }
    out
}

/// Parses `"2,1"` (or `""`/`"0"` for the empty partition).
pub fn parse_partition(text: &str) -> Result<Partition> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    if t.is_empty() || t == "0" {
        return Ok(Partition::empty());
    }
    let parts: std::result::Result<Vec<usize>, _> =
        t.split(',').map(|p| p.trim().parse::<usize>()).collect();
    Partition::new(parts.map_err(|e| Error::Parse(format!("partition {text:?}: {e}")))?)
}
