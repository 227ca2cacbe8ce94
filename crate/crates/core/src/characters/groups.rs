//! Finite groups with exact integer character tables (symmetric groups up
//! to S₅, which covers the cyclic group of order 2), and the cyclic-group
//! specification handled through the winding-number fast path.

use super::partitions::{partitions_of, Partition};
use super::symmetric::mn_character;
use crate::error::{Error, Result};

/// A permutation of `0..n` by its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Perm(inv)
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.0[start];
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.0[x];
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        let mut lens: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(lens).unwrap()
    }

    pub fn num_fixed(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, &x)| *i == x).count()
    }

    /// Canonical permutation with the given cycle lengths on `0..Σ`.
    pub fn with_cycle_lengths(lens: &[usize]) -> Perm {
        let n: usize = lens.iter().sum();
        let mut img = vec![0usize; n];
        let mut base = 0;
        for &l in lens {
            for i in 0..l {
                img[base + i] = base + (i + 1) % l;
            }
            base += l;
        }
        Perm(img)
    }
}

pub fn all_perms(n: usize) -> Vec<Perm> {
    fn rec(remaining: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Perm>) {
        if remaining.is_empty() {
            out.push(Perm(prefix.clone()));
            return;
        }
        for i in 0..remaining.len() {
            let x = remaining.remove(i);
            prefix.push(x);
            rec(remaining, prefix, out);
            prefix.pop();
            remaining.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// A finite group with elements, exact multiplication, conjugacy classes,
/// and an exact integer irreducible character table.
#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    pub name: String,
    pub elements: Vec<Perm>,
    pub identity: usize,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    pub class_of: Vec<usize>,
    pub class_sizes: Vec<usize>,
    /// Irreducible labels (partitions of m for S_m).
    pub irreducibles: Vec<Partition>,
    /// `char_table[irr][class]`, exact integers.
    pub char_table: Vec<Vec<i64>>,
}

impl FiniteGroupTable {
    /// The symmetric group S_m with characters from the MN rule; the
    /// integer-character-table requirement restricts m ≤ 5.
    pub fn symmetric(m: usize) -> Result<FiniteGroupTable> {
        if m > 5 {
            return Err(Error::UnsupportedGroup(format!(
                "S{m}: only symmetric groups up to S5 are built by default"
            )));
        }
        let elements = all_perms(m);
        let index: std::collections::HashMap<Perm, usize> =
            elements.iter().cloned().zip(0..).collect();
        let mult: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&a.compose(b)]).collect())
            .collect();
        let inv: Vec<usize> = elements.iter().map(|a| index[&a.inverse()]).collect();
        let types = partitions_of(m);
        let type_index: std::collections::HashMap<Partition, usize> =
            types.iter().cloned().zip(0..).collect();
        let class_of: Vec<usize> = elements.iter().map(|a| type_index[&a.cycle_type()]).collect();
        let mut class_sizes = vec![0usize; types.len()];
        for &c in &class_of {
            class_sizes[c] += 1;
        }
        let irreducibles = partitions_of(m);
        let char_table = irreducibles
            .iter()
            .map(|mu| {
                types
                    .iter()
                    .map(|ty| mn_character(mu, ty).unwrap())
                    .collect()
            })
            .collect();
        Ok(FiniteGroupTable {
            name: format!("S{m}"),
            elements,
            identity: index[&Perm::identity(m)],
            mult,
            inv,
            class_of,
            class_sizes,
            irreducibles,
            char_table,
        })
    }

    /// The trivial group (S₁).
    pub fn trivial() -> FiniteGroupTable {
        FiniteGroupTable::symmetric(1).unwrap()
    }

    /// The order-2 cyclic group, realized as S₂ (its character table is the
    /// same: triv = (2), sign = (1,1)).
    pub fn cyclic2() -> FiniteGroupTable {
        let mut g = FiniteGroupTable::symmetric(2).unwrap();
        g.name = "C2".into();
        g
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn invert(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn char_value(&self, irr: usize, element: usize) -> i64 {
        self.char_table[irr][self.class_of[element]]
    }

    /// Index of the irreducible with the given name: `triv`, `sign`, `std`,
    /// or an explicit partition like `[2,1]`.
    pub fn irr_by_name(&self, name: &str) -> Result<usize> {
        let m = self.irreducibles[0].size();
        let target = match name {
            "triv" => Partition::new(vec![m])?,
            "sign" => Partition::new(vec![1; m])?,
            "std" => {
                if m < 2 {
                    return Err(Error::Input("std undefined for the trivial group".into()));
                }
                Partition::new(vec![m - 1, 1])?
            }
            other => super::partitions::parse_partition(other)?,
        };
        self.irreducibles
            .iter()
            .position(|p| *p == target)
            .ok_or_else(|| Error::Input(format!("no irreducible {name:?} in {}", self.name)))
    }

    pub fn trivial_irr(&self) -> usize {
        let m = self.irreducibles[0].size();
        self.irreducibles
            .iter()
            .position(|p| *p == Partition::new(vec![m]).unwrap())
            .unwrap()
    }
}

/// Cyclic group `C_m` (m = 0 meaning the circle group) with the linear
/// character `z ↦ z^exponent`, handled by the winding-number criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmSpec {
    pub modulus: u32,
    pub exponent: i64,
}

impl CmSpec {
    pub fn new(modulus: u32, exponent: i64) -> Result<Self> {
        if modulus == 1 {
            return Err(Error::Input("C_1 is excluded (m ≠ 1)".into()));
        }
        Ok(CmSpec { modulus, exponent })
    }

    /// Whether `m | exponent · n` (with m = 0 meaning `exponent · n = 0`).
    pub fn annihilates(&self, winding: i64) -> bool {
        let t = self.exponent * winding;
        if self.modulus == 0 {
            t == 0
        } else {
            t.rem_euclid(self.modulus as i64) == 0
        }
    }
}

/// Group specification in CLI/text form: `S3`, `C2`, `C0`, `C3`, `trivial`.
#[derive(Debug, Clone)]
pub enum GroupSpec {
    Table(FiniteGroupTable),
    Cyclic(u32),
}

pub fn parse_group(text: &str) -> Result<GroupSpec> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("trivial") || t == "S1" || t == "1" {
        return Ok(GroupSpec::Table(FiniteGroupTable::trivial()));
    }
    if let Some(m) = t.strip_prefix('S') {
        let m: usize = m
            .parse()
            .map_err(|e| Error::Parse(format!("group {text:?}: {e}")))?;
        return Ok(GroupSpec::Table(FiniteGroupTable::symmetric(m)?));
    }
    if let Some(m) = t.strip_prefix('C') {
        let m: u32 = m
            .parse()
            .map_err(|e| Error::Parse(format!("group {text:?}: {e}")))?;
        if m == 1 {
            return Err(Error::Input("C1 is excluded".into()));
        }
        if m == 2 {
            return Ok(GroupSpec::Table(FiniteGroupTable::cyclic2()));
        }
        return Ok(GroupSpec::Cyclic(m));
    }
    Err(Error::Parse(format!("unrecognized group {text:?}")))
}
