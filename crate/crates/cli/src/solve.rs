//! `solve`: dispatch an instance document to a solver.

use detmax_core::format::{Document, Meta};
use detmax_core::gridtiling::{bcsp_bruteforce, consistency, gt_block_approx, gt_bruteforce};
use detmax_core::linalg::gram;
use detmax_core::solvers::{
    find_orthogonal_set, find_orthogonal_set_nonneg, maxdet_additive_approx, maxdet_bruteforce, maxdet_greedy,
};
use detmax_core::{DetMaxSolution, GramMatrix, GtAssignment, IndexSet, Rat, RatVectorSet};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const ALGORITHMS: [&str; 8] = [
    "brute",
    "greedy",
    "additive",
    "ortho",
    "ortho-nonneg",
    "grid-exact",
    "grid-block",
    "bcsp-exact",
];

fn need_k(cfg: &RunConfig, doc_k: Option<usize>) -> Result<usize, CliError> {
    cfg.k
        .or(doc_k)
        .ok_or_else(|| CliError::Validation("--k is required (the input names no k)".into()))
}

fn need_eps(cfg: &RunConfig) -> Result<Rat, CliError> {
    cfg.eps
        .clone()
        .ok_or_else(|| CliError::Validation("--eps is required for this algorithm".into()))
}

fn wrong_input(alg: &str, doc: &Document) -> CliError {
    CliError::Validation(format!("algorithm {alg} cannot take a {} document", doc.kind()))
}

fn vectors_of(alg: &str, doc: &Document) -> Result<(RatVectorSet, Option<usize>), CliError> {
    match doc {
        Document::Vectors(v) => Ok((v.to_set()?, v.k)),
        other => Err(wrong_input(alg, other)),
    }
}

fn matrix_of(alg: &str, doc: &Document) -> Result<(GramMatrix, Option<usize>, Option<Meta>), CliError> {
    match doc {
        Document::Vectors(v) => Ok((gram(&v.to_set()?), v.k, v.meta.clone())),
        Document::Gram(g) => Ok((g.to_gram()?, g.k, g.meta.clone())),
        other => Err(wrong_input(alg, other)),
    }
}

fn solution_json(cfg: &RunConfig, sol: &DetMaxSolution) -> Value {
    json!({
        "config": cfg,
        "subset": sol.subset.one_based(),
        "value": sol.value,
    })
}

fn assignment_json(sigma: &GtAssignment) -> Value {
    let k = sigma.k();
    let pairs = sigma.to_pairs().unwrap_or_default();
    Value::Array(
        pairs
            .chunks(k)
            .map(|row| row.iter().map(|&(x, y)| json!([x, y])).collect())
            .collect(),
    )
}

fn subset_json(s: &Option<IndexSet>) -> Value {
    match s {
        Some(s) => json!(s.one_based()),
        None => Value::Null,
    }
}

pub fn solve(cfg: &RunConfig, doc: &Document) -> Result<Value, CliError> {
    let alg = cfg.selector.as_deref().unwrap_or_default();
    let limits = cfg.limits();
    match alg {
        "brute" => {
            let (g, doc_k, meta) = matrix_of(alg, doc)?;
            let k = need_k(cfg, doc_k)?;
            let sol = maxdet_bruteforce(&g, k, &limits)?;
            let mut out = solution_json(cfg, &sol);
            if let Some(theta) = meta.as_ref().and_then(|m| m.get("theta")) {
                let theta: Rat = theta.parse()?;
                out["theta"] = json!(theta);
                out["meets_threshold"] = json!(sol.value >= theta);
            }
            Ok(out)
        }
        "greedy" => {
            let (v, doc_k) = vectors_of(alg, doc)?;
            let sol = maxdet_greedy(&v, need_k(cfg, doc_k)?)?;
            Ok(solution_json(cfg, &sol))
        }
        "additive" => {
            let (v, doc_k) = vectors_of(alg, doc)?;
            let sol = maxdet_additive_approx(&v, need_k(cfg, doc_k)?, &need_eps(cfg)?, &limits)?;
            Ok(solution_json(cfg, &sol))
        }
        "ortho" | "ortho-nonneg" => {
            let (v, doc_k) = vectors_of(alg, doc)?;
            let k = need_k(cfg, doc_k)?;
            let found = if alg == "ortho" {
                find_orthogonal_set(&v, k, &limits)?
            } else {
                find_orthogonal_set_nonneg(&v, k, &limits)?
            };
            Ok(json!({
                "config": cfg,
                "found": found.is_some(),
                "subset": subset_json(&found),
            }))
        }
        "grid-exact" | "grid-block" => {
            let Document::Gridtiling(g) = doc else {
                return Err(wrong_input(alg, doc));
            };
            let inst = g.to_instance()?;
            let sigma = if alg == "grid-exact" {
                gt_bruteforce(&inst, &limits)?.0
            } else {
                gt_block_approx(&inst, &need_eps(cfg)?, &limits)?
            };
            let cons = consistency(&inst, &sigma)?;
            Ok(json!({
                "config": cfg,
                "assignment": assignment_json(&sigma),
                "consistency": cons,
                "inconsistency": 2 * inst.k() * inst.k() - cons,
            }))
        }
        "bcsp-exact" => {
            let Document::Bcsp(b) = doc else {
                return Err(wrong_input(alg, doc));
            };
            let inst = b.to_instance()?;
            let (psi, value) = bcsp_bruteforce(&inst, &limits)?;
            Ok(json!({
                "config": cfg,
                "assignment": psi,
                "value": value,
            }))
        }
        other => Err(CliError::Validation(format!(
            "unknown algorithm {other:?}; expected one of {}",
            ALGORITHMS.join(", ")
        ))),
    }
}
