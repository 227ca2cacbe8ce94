//! Python bindings: words, primitivity invariants, stable Fourier
//! coefficients, diagram searches, and the exact oracles. Reports are
//! returned as plain Python dicts mirroring the CLI JSON schema.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use word_measures::characters::{parse_group, parse_partition, FiniteGroupTable, GroupSpec, PartitionMap};
use word_measures::error::Error;
use word_measures::oracle::ClassFn;
use word_measures::session::Session;
use word_measures::stable::{beta, SpiConstraint};
use word_measures::words::{infer_rank, parse_word};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into()
            } else {
                n.as_f64().unwrap().into_pyobject(py)?.unbind().into()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.unbind().into(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.unbind().into()
        }
    })
}

fn word_of(text: &str, rank: Option<u32>) -> PyResult<word_measures::words::Word> {
    let rank = rank.unwrap_or_else(|| infer_rank(text)).max(1);
    parse_word(text, rank).map_err(py_err)
}

fn table_of(group: &str) -> PyResult<FiniteGroupTable> {
    match parse_group(group).map_err(py_err)? {
        GroupSpec::Table(t) => Ok(t),
        GroupSpec::Cyclic(m) => Err(PyValueError::new_err(format!(
            "C{m} has an irrational character table; use S2..S5, C2 or trivial"
        ))),
    }
}

/// Freely reduced form of a word.
#[pyfunction]
#[pyo3(signature = (word, rank=None))]
fn reduce(word: &str, rank: Option<u32>) -> PyResult<String> {
    Ok(word_of(word, rank)?.to_string())
}

/// Maximal-root decomposition: (root, exponent, conjugator).
#[pyfunction]
#[pyo3(signature = (word, rank=None))]
fn power_decomposition(word: &str, rank: Option<u32>) -> PyResult<(String, u32, String)> {
    let d = word_of(word, rank)?.power_decomposition().map_err(py_err)?;
    Ok((d.root.to_string(), d.exponent, d.conjugator.to_string()))
}

/// Primitivity rank: (pi, c_w) with pi = None meaning infinity.
#[pyfunction]
#[pyo3(signature = (word, rank=None))]
fn pi(word: &str, rank: Option<u32>) -> PyResult<(Option<i64>, usize)> {
    let session = Session::new();
    let w = word_of(word, rank)?;
    let (p, c) = word_measures::algebraic::primitivity_rank(&w, &session).map_err(py_err)?;
    Ok(match p {
        word_measures::algebraic::Pi::Infinite => (None, c),
        word_measures::algebraic::Pi::Value(v) => (Some(v), c),
    })
}

/// χ_alg of a word multiset: (value, crit_count) with value = None for −∞.
#[pyfunction]
#[pyo3(signature = (words, rank=None))]
fn chi_alg(words: Vec<String>, rank: Option<u32>) -> PyResult<(Option<i64>, usize)> {
    let session = Session::new();
    let rank = rank
        .unwrap_or_else(|| words.iter().map(|t| infer_rank(t)).max().unwrap_or(1))
        .max(1);
    let ws: Result<Vec<_>, _> = words.iter().map(|t| parse_word(t, rank)).collect();
    let (v, crit) = word_measures::algebraic::chi_alg(&ws.map_err(py_err)?, &session).map_err(py_err)?;
    Ok(match v {
        word_measures::algebraic::ChiAlg::NegInfinity => (None, crit.len()),
        word_measures::algebraic::ChiAlg::Value(x) => (Some(x), crit.len()),
    })
}

fn coefficient_dict(
    py: Python<'_>,
    c: &word_measures::stable::StableCoefficient,
    label_size: usize,
) -> PyResult<Py<PyAny>> {
    let mut j = c.ratfun.to_json();
    j["beta"] = beta(c, label_size.max(1)).to_json();
    j["variant"] = serde_json::json!(format!("{:?}", c.variant_used));
    j["theorem_threshold"] = serde_json::json!(c.theorem_threshold);
    j["display"] = serde_json::json!(c.ratfun.to_string());
    json_to_py(py, &j)
}

/// Stable Fourier coefficient E_w[χ^{μ[N]}] of S_N as an exact rational
/// function dict.
#[pyfunction]
#[pyo3(signature = (word, mu, rank=None))]
fn stable_sn(py: Python<'_>, word: &str, mu: &str, rank: Option<u32>) -> PyResult<Py<PyAny>> {
    let session = Session::new();
    let w = word_of(word, rank)?;
    let mu = parse_partition(mu).map_err(py_err)?;
    let c = word_measures::stable::stable_coefficient_sn(&w, &mu, &session).map_err(py_err)?;
    coefficient_dict(py, &c, mu.size())
}

/// Stable Fourier coefficient of G ≀ S_N for a finite group with an exact
/// integer character table.
#[pyfunction]
#[pyo3(signature = (group, word, arrm, rank=None))]
fn stable_wreath(
    py: Python<'_>,
    group: &str,
    word: &str,
    arrm: &str,
    rank: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let session = Session::new();
    let table = table_of(group)?;
    let w = word_of(word, rank)?;
    let arrm = PartitionMap::parse(arrm, &table).map_err(py_err)?;
    let c = word_measures::stable::stable_coefficient_wreath(&table, &w, &arrm, &session)
        .map_err(py_err)?;
    coefficient_dict(py, &c, arrm.total_size())
}

/// Exact value of E_w[χ^{μ[N]}] at a specific N, as a decimal fraction string.
#[pyfunction]
#[pyo3(signature = (word, mu, n, rank=None))]
fn stable_sn_at(word: &str, mu: &str, n: i64, rank: Option<u32>) -> PyResult<String> {
    let session = Session::new();
    let w = word_of(word, rank)?;
    let mu = parse_partition(mu).map_err(py_err)?;
    let c = word_measures::stable::stable_coefficient_sn(&w, &mu, &session).map_err(py_err)?;
    Ok(c.eval(n).map_err(py_err)?.to_string())
}

/// Exact brute-force E over (S_N)^rank of fix / stable characters.
#[pyfunction]
#[pyo3(signature = (word, n, mu=None, rank=None))]
fn exact_expectation(word: &str, n: usize, mu: Option<&str>, rank: Option<u32>) -> PyResult<String> {
    let session = Session::new();
    let w = word_of(word, rank)?;
    let f = match mu {
        None => ClassFn::Fix,
        Some(m) => ClassFn::StableChar(parse_partition(m).map_err(py_err)?),
    };
    let v = word_measures::oracle::exact_expectation_sn(&[w], &f, n, &session).map_err(py_err)?;
    Ok(v.to_string())
}

/// Bounded-degree diagram search; reports per-degree minima of −χ/d as
/// fraction strings (None when no diagram was found at that degree).
#[pyfunction]
#[pyo3(signature = (word, dmax, modulus=None, rank=None))]
fn spi_bound(
    py: Python<'_>,
    word: &str,
    dmax: usize,
    modulus: Option<u32>,
    rank: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let session = Session::new();
    let w = word_of(word, rank)?;
    let constraint = match modulus {
        None => SpiConstraint::None,
        Some(m) => SpiConstraint::ModM(m),
    };
    let r = word_measures::stable::spi_search(&w, dmax, &constraint, &session).map_err(py_err)?;
    let dict = PyDict::new(py);
    let minima = PyDict::new(py);
    for (d, m) in &r.per_degree_minima {
        minima.set_item(d, m.as_ref().map(|q| q.to_string()))?;
    }
    dict.set_item("per_degree_minima", minima)?;
    dict.set_item(
        "overall_upper_bound",
        r.overall_upper_bound.as_ref().map(|q| q.to_string()),
    )?;
    dict.set_item("witnesses", r.witnesses.len())?;
    dict.set_item("skipped_branches", r.skipped_branches.len())?;
    Ok(dict.unbind().into())
}

/// Number of surjective quotients of the multi core graph of the words.
#[pyfunction]
#[pyo3(signature = (words, rank=None))]
fn quotient_count(words: Vec<String>, rank: Option<u32>) -> PyResult<usize> {
    let session = Session::new();
    let rank = rank
        .unwrap_or_else(|| words.iter().map(|t| infer_rank(t)).max().unwrap_or(1))
        .max(1);
    let ws: Result<Vec<_>, _> = words.iter().map(|t| parse_word(t, rank)).collect();
    let (graph, _, _) = word_measures::graphs::gamma_multi(&ws.map_err(py_err)?).map_err(py_err)?;
    Ok(session.quotients(&graph).map_err(py_err)?.len())
}

/// Runs the quick verification harness; returns the report dict.
#[pyfunction]
fn verify_quick(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let session = Session::new();
    let report = word_measures::cli::verify_suite(false, 1, &session).map_err(py_err)?;
    json_to_py(py, &report)
}

#[pymodule]
fn word_measures_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(power_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(pi, m)?)?;
    m.add_function(wrap_pyfunction!(chi_alg, m)?)?;
    m.add_function(wrap_pyfunction!(stable_sn, m)?)?;
    m.add_function(wrap_pyfunction!(stable_sn_at, m)?)?;
    m.add_function(wrap_pyfunction!(stable_wreath, m)?)?;
    m.add_function(wrap_pyfunction!(exact_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(spi_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_count, m)?)?;
    m.add_function(wrap_pyfunction!(verify_quick, m)?)?;
    Ok(())
}
