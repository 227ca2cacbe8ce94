//! Shared run configuration: size guards and memo tables. All cached
//! functions are pure, so concurrent access through the mutexes cannot
//! change results, only costs.

use crate::graphs::{CanonKey, CoreGraph, GraphMorphism};
use crate::ratfun::RatFun;
use num_rational::BigRational;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MobiusKind {
    Phi,
    LSurj,
    CSurj,
    RSurj,
    LAlg,
    CAlg,
    RAlg,
}

pub struct Session {
    /// Max vertices in a quotient-enumeration domain.
    pub vertex_limit: usize,
    /// Max states in a Whitehead level-set exploration.
    pub orbit_limit: usize,
    /// Max homomorphism tuples in exact oracle enumerations.
    pub tuple_limit: u64,
    pub(crate) alg_memo: Mutex<HashMap<CanonKey, bool>>,
    pub(crate) quotient_memo: Mutex<HashMap<CoreGraph, Arc<Vec<GraphMorphism>>>>,
    pub(crate) mobius_memo: Mutex<HashMap<(CanonKey, MobiusKind), RatFun>>,
    pub(crate) mobius_at_memo: Mutex<HashMap<(CanonKey, MobiusKind, i64), BigRational>>,
    pub(crate) in_progress: Mutex<std::collections::HashSet<(CanonKey, MobiusKind)>>,
    /// Per-quotient algebraicity flags, aligned with `quotient_memo` lists.
    pub(crate) alg_flags_memo: Mutex<HashMap<CoreGraph, Arc<Vec<bool>>>>,
    /// Separability verdicts keyed by (rank, permutation-invariant state key).
    pub(crate) sep_memo: Mutex<HashMap<(u32, CanonKey), bool>>,
    /// Middle parts of the filtered algebraic triples, per (word, shape, variant).
    pub(crate) fw_memo: Mutex<HashMap<(String, Vec<usize>, u8), Arc<Vec<GraphMorphism>>>>,
    /// Weighted middle parts for the wreath formula, per (group, word, arrm, shape, variant).
    #[allow(clippy::type_complexity)]
    pub(crate) gw_memo:
        Mutex<HashMap<(String, String, String, Vec<usize>, u8), Arc<Vec<(GraphMorphism, BigRational)>>>>,
}

impl Default for Session {
    fn default() -> Self {
        Session {
            vertex_limit: 14,
            orbit_limit: 20_000,
            tuple_limit: 20_000,
            alg_memo: Mutex::new(HashMap::new()),
            quotient_memo: Mutex::new(HashMap::new()),
            mobius_memo: Mutex::new(HashMap::new()),
            mobius_at_memo: Mutex::new(HashMap::new()),
            in_progress: Mutex::new(std::collections::HashSet::new()),
            alg_flags_memo: Mutex::new(HashMap::new()),
            sep_memo: Mutex::new(HashMap::new()),
            fw_memo: Mutex::new(HashMap::new()),
            gw_memo: Mutex::new(HashMap::new()),
        }
    }
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    pub fn with_limits(vertex_limit: usize, orbit_limit: usize, tuple_limit: u64) -> Self {
        Session { vertex_limit, orbit_limit, tuple_limit, ..Session::default() }
    }

    /// Memoized surjective-quotient enumeration (see [`crate::enumerate::quotients`]).
    pub fn quotients(&self, g: &Arc<CoreGraph>) -> crate::Result<Arc<Vec<GraphMorphism>>> {
        if let Some(hit) = self.quotient_memo.lock().unwrap().get(g.as_ref()) {
            return Ok(hit.clone());
        }
        let qs = Arc::new(crate::enumerate::quotients(g, self.vertex_limit)?);
        self.quotient_memo
            .lock()
            .unwrap()
            .insert(g.as_ref().clone(), qs.clone());
        Ok(qs)
    }

    /// Snapshot of the Möbius memo, for the optional on-disk cache.
    pub fn export_mobius(&self) -> Vec<(CanonKey, MobiusKind, RatFun)> {
        self.mobius_memo
            .lock()
            .unwrap()
            .iter()
            .map(|((k, kind), f)| (k.clone(), *kind, f.clone()))
            .collect()
    }

    pub fn import_mobius(&self, entries: Vec<(CanonKey, MobiusKind, RatFun)>) {
        let mut memo = self.mobius_memo.lock().unwrap();
        for (k, kind, f) in entries {
            memo.insert((k, kind), f);
        }
    }
}
