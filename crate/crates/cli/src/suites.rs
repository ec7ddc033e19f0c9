//! Named verification suites. Each trial either passes or records a failure
//! with the offending instance serialized as a document.

use std::collections::BTreeSet;
use std::time::Instant;

use detmax_core::format::{BcspDoc, Document, GramDoc, GridTilingDoc, KSumDoc, VectorsDoc};
use detmax_core::gridtiling::{
    adjacencies, bcsp_eval, bcsp_to_gridtiling, consistency, gt_block_approx, gt_bruteforce, inconsistency,
    lift_assignment, project_assignment,
};
use detmax_core::linalg::{arrowhead_det, det, gram, principal_minor, principal_submatrix, vol_squared};
use detmax_core::rational::{approx_exp, approx_sqrt};
use detmax_core::reductions::{
    arrowhead_closed_form, gridtiling_to_detmax, gridtiling_to_orthovectors, hadamard_gadget, ksum_normalize,
    ksum_to_arrowhead,
};
use detmax_core::solvers::{
    additive_grid_step, find_orthogonal_set, find_orthogonal_set_nonneg, maxdet_additive_approx, maxdet_bruteforce,
    maxdet_greedy, round_to_grid, rounding_error_bound,
};
use detmax_core::{GridTilingInstance, GtAssignment, IndexSet, Limits, Rat, RatMatrix, RatVectorSet};
use itertools::Itertools;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::gen::{sample_vectors, planted_grid, random_bcsp, random_grid, rng_for, sample_grid};
use crate::oracle::{
    cofactor_det, dot, factorial, gram_minor, gt_opt_oracle, ksum_oracle, maxdet_oracle, scan_consistency, submatrix,
};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    pub counterexample: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub failures: Vec<Failure>,
    pub wall_time_seconds: f64,
}

/// A failed check: message plus the instance that produced it.
struct Fail(String, Value);

type Check = Result<(), Fail>;

struct Ctx {
    rng: ChaCha8Rng,
    limits: Limits,
}

type TrialFn = fn(&mut Ctx, usize) -> Check;

/// Name, default trial count, trial body.
const SUITES: [(&str, usize, TrialFn); 19] = [
    ("fig1-golden", 1, vectors_golden),
    ("table1-golden", 1, grid_golden),
    ("rational-approx", 1000, rational_approx),
    ("oracle-equivalence", 1000, oracle_equivalence),
    ("brute-exhaustive", 100, brute_exhaustive),
    ("greedy", 200, greedy),
    ("obs5-additive", 200, obs5_additive),
    ("corollary-orthogonal", 200, equal_norm_orthogonal),
    ("gt-consistency", 200, gt_consistency),
    ("obs3-block", 50, obs3_block),
    ("bcsp-reduction", 100, bcsp_reduction),
    ("lemma2-closed-form", 100, closed_form),
    ("lemma4-endtoend", 100, ksum_endtoend),
    ("lemma6-gadget", 3, gadget_identities),
    ("orthovectors", 100, orthovectors),
    ("gap-completeness", 3, gap_completeness),
    ("gap-soundness", 1, gap_soundness),
    ("lemma9-volume", 500, volume_accounting),
    ("roundtrip", 100, roundtrip),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    let (_, default_trials, body) = SUITES.iter().find(|s| s.0 == name).ok_or_else(|| {
        CliError::Validation(format!("unknown suite {name:?}; expected one of {}", suite_names().join(", ")))
    })?;
    Ok(run_trials(name, cfg.trials.unwrap_or(*default_trials), *body, cfg))
}

fn run_trials(name: &str, trials: usize, body: TrialFn, cfg: &RunConfig) -> Report {
    let mut ctx = Ctx {
        rng: rng_for(cfg.seed),
        limits: cfg.limits(),
    };
    let start = Instant::now();
    let mut failures = Vec::new();
    for trial in 0..trials {
        if let Err(Fail(message, counterexample)) = body(&mut ctx, trial) {
            failures.push(Failure {
                trial,
                message,
                counterexample,
            });
        }
    }
    Report {
        suite: name.to_string(),
        seed: cfg.seed,
        trials,
        failures,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String, ce: impl FnOnce() -> Value) -> Check {
    if cond {
        Ok(())
    } else {
        Err(Fail(msg(), ce()))
    }
}

/// Lift a core error into a failure carrying `ce`.
fn lift<T>(r: detmax_core::Result<T>, ce: impl FnOnce() -> Value) -> Result<T, Fail> {
    r.map_err(|e| Fail(e.to_string(), ce()))
}

fn doc_value(doc: Document) -> Value {
    serde_json::to_value(doc).unwrap_or(Value::Null)
}

fn vectors_ce(set: &RatVectorSet) -> Value {
    doc_value(Document::Vectors(VectorsDoc::new(set)))
}

fn matrix_ce(m: &RatMatrix) -> Value {
    serde_json::to_value(m.to_rows()).unwrap_or(Value::Null)
}

fn grid_ce(inst: &GridTilingInstance) -> Value {
    doc_value(Document::Gridtiling(GridTilingDoc::new(inst)))
}

fn rand_rat(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Rat {
    let q = rng.gen_range(1..=den);
    Rat::ratio(rng.gen_range(-bound * q..=bound * q), q)
}

fn rand_set(rng: &mut ChaCha8Rng, n: usize, d: usize, bound: i64, den: i64) -> RatVectorSet {
    RatVectorSet::new((0..n).map(|_| (0..d).map(|_| rand_rat(rng, bound, den)).collect()).collect())
        .expect("n, d >= 1")
}

fn vectors_golden(ctx: &mut Ctx, _: usize) -> Check {
    let vs = sample_vectors();
    let ce = || vectors_ce(&sample_vectors());
    let g = gram(&vs);
    let expected = RatMatrix::from_int_rows(&[&[25, 10, 5, 15], &[10, 13, 5, 9], &[5, 5, 11, 7], &[15, 9, 7, 11]])
        .expect("fixture");
    ensure(*g.matrix() == expected, || "gram matrix differs from the fixture".into(), ce)?;
    let m123 = cofactor_det(&submatrix(&expected, &[0, 1, 2]));
    let m124 = cofactor_det(&submatrix(&expected, &[0, 1, 3]));
    let d123 = lift(principal_minor(g.matrix(), &IndexSet::full(3)), ce)?;
    ensure(m123 == 2025 && m124 == 225 && d123 == m123, || format!("minors {m123}, {m124}, {d123}"), ce)?;
    let best = lift(maxdet_bruteforce(&g, 3, &ctx.limits), ce)?;
    ensure(
        best.subset.one_based() == vec![1, 2, 3] && best.value == 2025,
        || format!("maxdet returned {:?} with {}", best.subset.one_based(), best.value),
        ce,
    )
}

fn grid_golden(ctx: &mut Ctx, _: usize) -> Check {
    let (inst, sigma) = sample_grid();
    let ce = || grid_ce(&sample_grid().0);
    let (found, opt) = lift(gt_bruteforce(&inst, &ctx.limits), ce)?;
    let oracle = gt_opt_oracle(&inst);
    ensure(opt == 18 && oracle == 18, || format!("opt {opt}, oracle {oracle}"), ce)?;
    let pairs = found.to_pairs().unwrap_or_default();
    ensure(scan_consistency(3, &pairs) == 18, || "returned assignment is not optimal".into(), ce)?;
    ensure(lift(consistency(&inst, &sigma), ce)? == 18, || "listed solution is not consistent".into(), ce)?;
    let ortho = lift(gridtiling_to_orthovectors(&inst), ce)?;
    let set = lift(find_orthogonal_set(&ortho.vectors, 9, &ctx.limits), ce)?;
    let set = set.ok_or_else(|| Fail("no orthogonal 9-set".into(), ce()))?;
    ensure(
        set.as_slice().iter().tuple_combinations().all(|(a, b)| dot(ortho.vectors.vector(*a), ortho.vectors.vector(*b)).is_zero()),
        || "returned set is not orthogonal".into(),
        ce,
    )?;
    let gap = lift(gridtiling_to_detmax(&inst, &ctx.limits), ce)?;
    let best = lift(maxdet_bruteforce(&gap.normalized, 9, &ctx.limits), ce)?;
    ensure(best.value == 1, || format!("maxdet of the normalized matrix is {}", best.value), ce)
}

fn rational_approx(ctx: &mut Ctx, trial: usize) -> Check {
    let rng = &mut ctx.rng;
    let den = rng.gen_range(1..=1000i64);
    let x = Rat::ratio(rng.gen_range(1..=100 * den), den);
    let eps = Rat::ratio(1, 10i64.pow(rng.gen_range(1..=6)));
    let ce = || serde_json::json!({ "x": x, "eps": eps });
    let r = lift(approx_sqrt(&x, &eps), ce)?;
    let ratio = &r * &r / &x;
    let one = Rat::one();
    ensure(
        (&one - &eps).pow(2) <= ratio && ratio <= (&one + &eps).pow(2),
        || format!("sqrt({x}) ~ {r} outside the relative band"),
        ce,
    )?;
    if trial % 10 == 0 {
        let sq = &x * &x;
        ensure(lift(approx_sqrt(&sq, &eps), ce)? == x, || format!("sqrt of the square {sq} not exact"), ce)?;
    }
    let a = Rat::ratio(rng.gen_range(0..=den), den);
    let b = Rat::ratio(rng.gen_range(0..=den), den);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let ce = || serde_json::json!({ "x_lo": lo, "x_hi": hi, "eps": eps });
    let e_lo = lift(approx_exp(&lo, &eps), ce)?;
    let e_hi = lift(approx_exp(&hi, &eps), ce)?;
    ensure(
        e_hi >= &e_lo * &(&one - &(&eps * &Rat::from_int(2))),
        || format!("exp not monotone: {e_lo} at {lo}, {e_hi} at {hi}"),
        ce,
    )?;
    for v in [&r, &ratio, &e_lo, &e_hi] {
        let g = Rat::from_int(v.numer().gcd(v.denom()));
        ensure(
            g == one && Rat::from_int(v.denom().clone()).is_positive(),
            || format!("{v} is not in canonical form"),
            ce,
        )?;
    }
    Ok(())
}

fn oracle_equivalence(ctx: &mut Ctx, trial: usize) -> Check {
    let rng = &mut ctx.rng;
    let n = rng.gen_range(0..=5usize);
    let rows: Vec<Vec<Rat>> = (0..n).map(|_| (0..n).map(|_| rand_rat(rng, 9, 5)).collect()).collect();
    let m = RatMatrix::from_rows(rows.clone()).expect("square");
    ensure(det(&m) == cofactor_det(&rows), || "elimination and cofactor determinants differ".into(), || {
        matrix_ce(&m)
    })?;

    let n = rng.gen_range(1..=6usize);
    let mut a = RatMatrix::zeros(n + 1);
    a.set(0, 0, rand_rat(rng, 9, 4));
    for i in 1..=n {
        let mut diag = rand_rat(rng, 9, 4);
        if diag.is_zero() {
            diag = Rat::one();
        }
        a.set(i, i, diag);
        if rng.gen_bool(0.8) {
            let v = rand_rat(rng, 9, 4);
            a.set(0, i, v.clone());
            a.set(i, 0, v);
        }
    }
    let s: Vec<usize> = (0..=n).filter(|_| rng.gen_bool(0.6)).collect();
    let subset = IndexSet::new(s.clone()).expect("sorted");
    let ce = || matrix_ce(&a);
    let fast = lift(arrowhead_det(&a, &subset), ce)?;
    let slow = det(&lift(principal_submatrix(&a, &subset), ce)?);
    ensure(fast == slow && fast == cofactor_det(&submatrix(&a, &s)), || format!("arrowhead det on {s:?}"), ce)?;

    let d = rng.gen_range(1..=6usize);
    let n = rng.gen_range(1..=8usize);
    let set = rand_set(rng, n, d, 4, 3);
    let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let subset = IndexSet::new(s.clone()).expect("sorted");
    let ce = || vectors_ce(&set);
    let g = gram(&set);
    let vol = lift(vol_squared(&set, &subset), ce)?;
    ensure(vol == lift(principal_minor(g.matrix(), &subset), ce)?, || format!("volume on {s:?}"), ce)?;
    let gm = g.matrix();
    ensure(
        gm.is_symmetric() && (0..n).all(|i| !gm.get(i, i).is_negative()),
        || "gram not symmetric with nonnegative diagonal".into(),
        ce,
    )?;
    let c = rand_rat(rng, 3, 4);
    let scaled = lift(principal_minor(&gm.scaled(&c), &subset), ce)?;
    ensure(
        scaled == c.pow(s.len() as i32) * lift(principal_minor(gm, &subset), ce)?,
        || format!("det(cM_S) != c^|S| det(M_S) for c = {c}"),
        ce,
    )?;

    if trial % 5 == 0 {
        let d = rng.gen_range(1..=6usize);
        let n = rng.gen_range(1..=8usize);
        let vs: Vec<Vec<Rat>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| if rng.gen_bool(0.6) { Rat::zero() } else { Rat::from_int(rng.gen_range(1..4)) })
                    .collect()
            })
            .collect();
        let set = RatVectorSet::new(vs).expect("n, d >= 1");
        let k = rng.gen_range(1..=n);
        let ce = || vectors_ce(&set);
        let generic = lift(find_orthogonal_set(&set, k, &ctx.limits), ce)?;
        let packed = lift(find_orthogonal_set_nonneg(&set, k, &ctx.limits), ce)?;
        ensure(generic.is_some() == packed.is_some(), || format!("k = {k}: {generic:?} vs {packed:?}"), ce)?;
        if let Some(p) = packed {
            ensure(
                p.len() == k
                    && p.as_slice().iter().tuple_combinations().all(|(a, b)| dot(set.vector(*a), set.vector(*b)).is_zero()),
                || format!("nonnegative search returned a bad set {p:?}"),
                ce,
            )?;
        }
    }
    Ok(())
}

fn brute_exhaustive(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let n = rng.gen_range(1..=10usize);
    let d = rng.gen_range(1..=5usize);
    let k = rng.gen_range(1..=n.min(5));
    let set = rand_set(rng, n, d, 3, 4);
    let ce = || vectors_ce(&set);
    let g = gram(&set);
    let best = lift(maxdet_bruteforce(&g, k, &ctx.limits), ce)?;
    let (oracle_set, oracle_val) = maxdet_oracle(g.matrix(), k, cofactor_det);
    ensure(best.value == oracle_val, || format!("k = {k}: value {} vs enumeration {oracle_val}", best.value), ce)?;
    ensure(
        best.subset.as_slice() == oracle_set.as_slice(),
        || format!("k = {k}: subset {:?} is not the lexicographically first optimum {oracle_set:?}", best.subset),
        ce,
    )
}

fn greedy(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let d = rng.gen_range(1..=4usize);
    let n = rng.gen_range(1..=8usize);
    let k = rng.gen_range(1..=3usize.min(n));
    let set = rand_set(rng, n, d, 5, 3);
    let ce = || vectors_ce(&set);
    let sol = lift(maxdet_greedy(&set, k), ce)?;
    let (_, opt) = maxdet_oracle(gram(&set).matrix(), k, cofactor_det);
    let f = Rat::from_int(factorial(k));
    ensure(gram_minor(set.vectors(), sol.subset.as_slice()) == sol.value, || "reported value differs".into(), ce)?;
    ensure(&sol.value * &f * &f >= opt, || format!("k = {k}: {} (k!)^2 < {opt}", sol.value), ce)
}

fn obs5_additive(ctx: &mut Ctx, trial: usize) -> Check {
    let rng = &mut ctx.rng;
    let d = rng.gen_range(1..=3usize);
    let k = rng.gen_range(1..=d);
    let n = rng.gen_range(k..=8usize);
    let eps = [Rat::one(), Rat::ratio(1, 2), Rat::ratio(1, 4)][trial % 3].clone();
    let set = rand_set(rng, n, d, 1, 12);
    let ce = || {
        let mut doc = VectorsDoc::new(&set);
        doc.k = Some(k);
        doc.meta = Some([("eps".to_string(), eps.to_string())].into_iter().collect());
        doc_value(Document::Vectors(doc))
    };
    let sol = lift(maxdet_additive_approx(&set, k, &eps, &ctx.limits), ce)?;
    let (_, opt) = maxdet_oracle(gram(&set).matrix(), k, cofactor_det);
    let got = gram_minor(set.vectors(), sol.subset.as_slice());
    ensure(got == sol.value, || "reported value is not the original minor".into(), ce)?;
    ensure(got >= &opt - &eps, || format!("det {got} < maxdet {opt} - {eps}"), ce)?;
    let step = lift(additive_grid_step(d, &eps), ce)?;
    let bound = rounding_error_bound(d, &step);
    let rounded = lift(round_to_grid(&set, &step), ce)?;
    let distinct: BTreeSet<&Vec<Rat>> = rounded.vectors().iter().collect();
    let grid_points = (Rat::from_int(2) / &step + Rat::one()).pow(d as i32);
    ensure(
        Rat::from_int(distinct.len() as i64) <= grid_points,
        || "more distinct rounded vectors than grid points".into(),
        ce,
    )?;
    for s in (0..n).combinations(k) {
        let diff = (gram_minor(set.vectors(), &s) - gram_minor(rounded.vectors(), &s)).abs();
        ensure(diff <= bound, || format!("rounding moved det{s:?} by {diff} > {bound}"), ce)?;
    }
    Ok(())
}

/// Sign patterns with a fixed number of nonzeros share one squared norm.
fn equal_norm_orthogonal(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let d = rng.gen_range(2..=5usize);
    let m = rng.gen_range(1..=d.min(2));
    let n = rng.gen_range(2..=7usize);
    let k = rng.gen_range(1..=n.min(d));
    let vs: Vec<Vec<Rat>> = (0..n)
        .map(|_| {
            let mut coords: Vec<usize> = (0..d).collect();
            coords.shuffle(rng);
            let mut v = vec![Rat::zero(); d];
            for &c in &coords[..m] {
                v[c] = Rat::from_int(if rng.gen_bool(0.5) { 1 } else { -1 });
            }
            v
        })
        .collect();
    let set = RatVectorSet::new(vs).expect("n, d >= 1");
    let ce = || vectors_ce(&set);
    let best = lift(maxdet_bruteforce(&gram(&set), k, &ctx.limits), ce)?;
    let ortho = lift(find_orthogonal_set(&set, k, &ctx.limits), ce)?;
    let top = Rat::from_int(m as i64).pow(k as i32);
    ensure(
        (best.value == top) == ortho.is_some(),
        || format!("k = {k}: maxdet {} vs c^(2k) = {top}, orthogonal set {ortho:?}", best.value),
        ce,
    )
}

fn random_assignment(rng: &mut ChaCha8Rng, inst: &GridTilingInstance) -> GtAssignment {
    let values = inst.cells().iter().map(|c| *c.choose(rng).expect("nonempty")).collect();
    GtAssignment::total(inst.k(), values).expect("k^2 values")
}

fn gt_consistency(ctx: &mut Ctx, trial: usize) -> Check {
    let rng = &mut ctx.rng;
    let k = rng.gen_range(3..=5usize);
    let n = rng.gen_range(1..=4u32);
    let inst = random_grid(rng, k, n, 3).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || grid_ce(&inst);
    let edges = adjacencies(k);
    let distinct: BTreeSet<_> = edges.iter().map(|a| (a.from, a.to, a.direction)).collect();
    ensure(edges.len() == 2 * k * k && distinct.len() == edges.len(), || "adjacency count".into(), ce)?;
    let sigma = random_assignment(rng, &inst);
    let cons = lift(consistency(&inst, &sigma), ce)?;
    let inc = lift(inconsistency(&inst, &sigma), ce)?;
    let scan = scan_consistency(k, &sigma.to_pairs().unwrap_or_default());
    ensure(cons + inc == 2 * k * k && cons == scan, || format!("cons {cons}, incons {inc}, scan {scan}"), ce)?;
    if trial % 4 == 0 {
        let small = random_grid(rng, 3, n, 2).map_err(|e| Fail(e.to_string(), Value::Null))?;
        let ce = || grid_ce(&small);
        let (best, opt) = lift(gt_bruteforce(&small, &ctx.limits), ce)?;
        let oracle = gt_opt_oracle(&small);
        ensure(opt == oracle, || format!("dynamic program {opt}, enumeration {oracle}"), ce)?;
        ensure(lift(consistency(&small, &best), ce)? == opt, || "returned assignment misses its value".into(), ce)?;
    }
    Ok(())
}

fn obs3_block(ctx: &mut Ctx, _: usize) -> Check {
    let inst = random_grid(&mut ctx.rng, 4, 3, 3).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || grid_ce(&inst);
    let (_, opt) = lift(gt_bruteforce(&inst, &ctx.limits), ce)?;
    for e in [1i64, 2] {
        let sigma = lift(gt_block_approx(&inst, &Rat::from_int(e), &ctx.limits), ce)?;
        let cons = scan_consistency(4, &sigma.to_pairs().unwrap_or_default()) as i64;
        ensure(cons >= opt as i64 - 16 * e, || format!("eps {e}: cons {cons} < opt {opt} - {}", 16 * e), ce)?;
    }
    Ok(())
}

fn bcsp_reduction(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let k = rng.gen_range(3..=4usize);
    let n = rng.gen_range(1..=3u32);
    let psi: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=n)).collect();
    let inst = random_bcsp(rng, k, n, 3, Some(&psi)).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || {
        let mut doc = BcspDoc::new(&inst);
        doc.witness = Some(psi.clone());
        doc_value(Document::Bcsp(doc))
    };
    ensure(lift(bcsp_eval(&inst, &psi), ce)? == 1, || "planted assignment violates a constraint".into(), ce)?;
    let gt = lift(bcsp_to_gridtiling(&inst), ce)?;
    let lifted = lift_assignment(&psi);
    ensure(lift(consistency(&gt, &lifted), ce)? == 2 * k * k, || "lifted assignment is not a solution".into(), ce)?;
    let (best, opt) = lift(gt_bruteforce(&gt, &ctx.limits), ce)?;
    ensure(opt == 2 * k * k, || format!("grid optimum {opt} < {}", 2 * k * k), ce)?;
    let back = lift(project_assignment(&best), ce)?;
    ensure(lift(bcsp_eval(&inst, &back), ce)? == 1, || format!("projected {back:?} does not satisfy"), ce)
}

/// The minor of the unrounded construction, from the similarity-transformed
/// arrowhead whose off-diagonal entries are the exact squares
/// `25 x_i e^{x_i}`, against the closed form.
fn closed_form(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let n = rng.gen_range(2..=5usize);
    let k = rng.gen_range(1..n);
    let values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=8)).collect();
    let total: i64 = values.iter().sum();
    let t = rng.gen_range(1..total);
    let inst = ksum_normalize(&values, t, k).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || doc_value(Document::Ksum(KSumDoc::new(&inst)));
    let eta = Rat::ratio(1, 1_000_000_000);
    let exps: Vec<Rat> = inst.x().iter().map(|x| approx_exp(x, &eta)).collect::<detmax_core::Result<_>>().map_err(|e| Fail(e.to_string(), ce()))?;
    let tt = inst.t();
    let one = Rat::one();
    let s: Vec<usize> = (0..=n).filter(|_| rng.gen_bool(0.5)).collect();
    let members: Vec<usize> = s.iter().filter(|&&i| i > 0).map(|&i| i - 1).collect();
    let contains_zero = s.first() == Some(&0);
    let size = s.len();
    let mut m = vec![vec![Rat::zero(); size]; size];
    for (r, &i) in s.iter().enumerate() {
        if i == 0 {
            m[r][r] = Rat::from_int(25) * inst.x().iter().cloned().sum::<Rat>();
        } else {
            m[r][r] = &exps[i - 1] * &(&one + tt);
            if contains_zero {
                m[0][r] = Rat::one();
                m[r][0] = Rat::from_int(25) * &inst.x()[i - 1] * &exps[i - 1];
            }
        }
    }
    let symbolic = cofactor_det(&m);
    let sum: Rat = members.iter().map(|&i| inst.x()[i].clone()).sum();
    let prod: Rat = members.iter().map(|&i| exps[i].clone()).product();
    let exact = arrowhead_closed_form(tt, size, contains_zero, &sum, &prod);
    ensure(symbolic == exact, || format!("subset {s:?}: {symbolic} vs closed form {exact}"), ce)?;
    let direct = lift(approx_exp(&sum, &eta), ce)?;
    let approx = arrowhead_closed_form(tt, size, contains_zero, &sum, &direct);
    let tol = Rat::from_int(3 * (size as i64 + 1)) * &eta * exact.abs();
    ensure(
        (&approx - &exact).abs() <= tol,
        || format!("subset {s:?}: closed form with exp(X) {approx} vs product of exps {exact}"),
        ce,
    )
}

fn ksum_endtoend(ctx: &mut Ctx, _: usize) -> Check {
    let rng = &mut ctx.rng;
    let n = rng.gen_range(2..=5usize);
    let k = rng.gen_range(1..=n.min(3));
    let values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=8)).collect();
    let total: i64 = values.iter().sum();
    let t = rng.gen_range(1..total);
    let inst = ksum_normalize(&values, t, k).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || doc_value(Document::Ksum(KSumDoc::new(&inst)));
    let red = lift(ksum_to_arrowhead(&inst, &ctx.limits), ce)?;
    let cert = &red.certificate;
    ensure(
        cert.soundness_hi < red.theta && red.theta < cert.completeness_lo,
        || "threshold is not strictly inside the certified gap".into(),
        ce,
    )?;
    let decided = lift(red.decide(&ctx.limits), ce)?;
    let truth = ksum_oracle(&values, t, k);
    ensure(decided == truth, || format!("reduction says {decided}, enumeration says {truth}"), ce)
}

fn gadget_identities(ctx: &mut Ctx, trial: usize) -> Check {
    let ell = 2 * (trial % 3 + 1) as u32;
    let ce = || serde_json::json!({ "ell": ell });
    let g = lift(hadamard_gadget(ell, &ctx.limits), ce)?;
    let size = 1usize << ell;
    ensure(g.len() == size && g.vectors().dim() == 2 * size, || format!("shape at ell {ell}"), ce)?;
    let half = Rat::ratio(1, 2);
    let comps: Vec<Vec<Rat>> = (0..size).map(|j| g.complement(j)).collect();
    for i in 0..size {
        let b = g.member(i);
        ensure(dot(b, b) == 1, || format!("|b_{i}|^2 != 1"), ce)?;
        ensure(dot(b, &comps[i]).is_zero(), || format!("<b_{i}, comp b_{i}> != 0"), ce)?;
        for j in (0..size).filter(|&j| j != i) {
            ensure(dot(b, g.member(j)) == half, || format!("<b_{i}, b_{j}> != 1/2"), ce)?;
            ensure(dot(b, &comps[j]) == half, || format!("<b_{i}, comp b_{j}> != 1/2"), ce)?;
            ensure(dot(&comps[i], &comps[j]) == half, || format!("<comp b_{i}, comp b_{j}> != 1/2"), ce)?;
        }
    }
    Ok(())
}

fn orthovectors(ctx: &mut Ctx, trial: usize) -> Check {
    let rng = &mut ctx.rng;
    let k = rng.gen_range(3..=4usize);
    let n = rng.gen_range(1..=4u32);
    let (inst, planted) = if trial % 2 == 0 {
        let (i, s) = planted_grid(rng, 3, n, 2).map_err(|e| Fail(e.to_string(), Value::Null))?;
        (i, Some(s))
    } else {
        (random_grid(rng, k, n, 3).map_err(|e| Fail(e.to_string(), Value::Null))?, None)
    };
    let ce = || grid_ce(&inst);
    let red = lift(gridtiling_to_orthovectors(&inst), ce)?;
    let v = &red.vectors;
    ensure(v.vectors().iter().all(|x| dot(x, x) == 4), || "a squared norm differs from 4".into(), ce)?;
    for adj in adjacencies(inst.k()) {
        for (a, oa) in red.origins.iter().enumerate().filter(|(_, o)| o.cell == adj.from) {
            for (b, ob) in red.origins.iter().enumerate().filter(|(_, o)| o.cell == adj.to) {
                let ip = dot(v.vector(a), v.vector(b));
                ensure(
                    ip.is_zero() == adj.consistent(oa.pair, ob.pair),
                    || format!("{:?} -> {:?}: pairs {:?}, {:?} give inner product {ip}", adj.from, adj.to, oa.pair, ob.pair),
                    ce,
                )?;
            }
        }
    }
    if planted.is_some() {
        let found = lift(find_orthogonal_set(v, red.target, &ctx.limits), ce)?;
        ensure(found.is_some(), || "planted instance has no orthogonal k^2-set".into(), ce)?;
    }
    Ok(())
}

fn gap_completeness(ctx: &mut Ctx, _: usize) -> Check {
    let n = ctx.rng.gen_range(2..=4u32);
    let (inst, sigma) = planted_grid(&mut ctx.rng, 3, n, 2).map_err(|e| Fail(e.to_string(), Value::Null))?;
    let ce = || doc_value(Document::Gridtiling(GridTilingDoc::new(&inst).with_witness(&sigma)));
    let gap = lift(gridtiling_to_detmax(&inst, &ctx.limits), ce)?;
    let a = gap.normalized.matrix();
    ensure((0..a.order()).all(|i| *a.get(i, i) == 1), || "normalized diagonal is not 1".into(), ce)?;
    let witness: Vec<usize> =
        (0..gap.origins.len()).filter(|&i| sigma.get(gap.origins[i].cell) == Some(gap.origins[i].pair)).collect();
    let wdet = lift(principal_minor(a, &IndexSet::new(witness).expect("sorted")), ce)?;
    ensure(wdet == 1, || format!("witness minor {wdet}"), ce)?;
    let best = lift(maxdet_bruteforce(&gap.normalized, 9, &ctx.limits), ce)?;
    ensure(best.value == 1, || format!("maxdet {} != 1", best.value), ce)
}

/// The sample grid with one cell replaced so that no solution exists, then random
/// grids without one.
fn gap_soundness(ctx: &mut Ctx, trial: usize) -> Check {
    let inst = if trial == 0 {
        let mut cells = sample_grid().0.cells().to_vec();
        cells[0] = vec![(2, 3)];
        GridTilingInstance::new(3, 4, cells).expect("fixture")
    } else {
        loop {
            let g = random_grid(&mut ctx.rng, 3, 2, 2).map_err(|e| Fail(e.to_string(), Value::Null))?;
            if gt_opt_oracle(&g) < 18 {
                break g;
            }
        }
    };
    let ce = || grid_ce(&inst);
    let (_, opt) = lift(gt_bruteforce(&inst, &ctx.limits), ce)?;
    ensure(opt < 18, || format!("fixture is satisfiable (opt {opt})"), ce)?;
    let gap = lift(gridtiling_to_detmax(&inst, &ctx.limits), ce)?;
    if gap.normalized.order() < 9 {
        return Ok(());
    }
    let best = lift(maxdet_bruteforce(&gap.normalized, 9, &ctx.limits), ce)?;
    let bound = Rat::ratio(999, 1000).pow((18 - opt) as i32);
    ensure(best.value <= bound, || format!("opt {opt}: maxdet {} > 0.999^{}", best.value, 18 - opt), ce)
}

fn volume_accounting(ctx: &mut Ctx, _: usize) -> Check {
    let (inst, _) = sample_grid();
    let ce = || grid_ce(&sample_grid().0);
    let gap = lift(gridtiling_to_detmax(&inst, &ctx.limits), ce)?;
    let all: Vec<usize> = (0..gap.vectors.len()).collect();
    let (pick, cells) = loop {
        let mut pick: Vec<usize> = all.choose_multiple(&mut ctx.rng, 9).copied().collect();
        pick.sort_unstable();
        let cells: BTreeSet<_> = pick.iter().map(|&i| gap.origins[i].cell).collect();
        if 9 - cells.len() <= 4 {
            break (pick, cells);
        }
    };
    let dup = 9 - cells.len();
    let subset = IndexSet::new(pick.clone()).expect("sorted");
    let ce = || serde_json::json!({ "instance": grid_ce(&sample_grid().0), "subset": subset.one_based() });
    let (cov, d) = lift(gap.coverage(&subset), ce)?;
    ensure(cov == cells.len() && d == dup && cov + d == 9, || format!("coverage ({cov}, {d})"), ce)?;
    let vol = lift(vol_squared(&gap.vectors, &subset), ce)?;
    let bound = Rat::from_int(4).pow(9) * Rat::ratio(3, 4).pow(dup as i32);
    ensure(vol <= bound, || format!("vol^2 {vol} > 4^9 (3/4)^{dup}"), ce)
}

/// Generated documents survive serialization and re-validation.
fn roundtrip(ctx: &mut Ctx, trial: usize) -> Check {
    use detmax_core::format::{parse_document, to_canonical_json};
    let rng = &mut ctx.rng;
    let doc = match trial % 4 {
        0 => Document::Vectors(VectorsDoc::new(&rand_set(rng, 4, 3, 1, 6))),
        1 => Document::Gram(GramDoc::new(&gram(&rand_set(rng, 3, 2, 2, 5)))),
        2 => {
            let (inst, sigma) = planted_grid(rng, 3, 4, 3).map_err(|e| Fail(e.to_string(), Value::Null))?;
            Document::Gridtiling(GridTilingDoc::new(&inst).with_witness(&sigma))
        }
        _ => Document::Bcsp(BcspDoc::new(
            &random_bcsp(rng, 4, 3, 4, None).map_err(|e| Fail(e.to_string(), Value::Null))?,
        )),
    };
    let ce = || doc_value(doc.clone());
    let text = lift(to_canonical_json(&doc), ce)?;
    let back = lift(parse_document(&text), ce)?;
    crate::gen::revalidate(&back).map_err(|e| Fail(e.to_string(), ce()))?;
    let again = lift(to_canonical_json(&back), ce)?;
    ensure(text == again, || "serialization is not stable".into(), ce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names = suite_names();
        let set: BTreeSet<_> = names.iter().collect();
        assert_eq!(set.len(), names.len());
    }

    fn odd_trials_fail(_: &mut Ctx, trial: usize) -> Check {
        let set = sample_vectors();
        ensure(trial % 2 == 0, || format!("trial {trial} is odd"), || vectors_ce(&set))
    }

    #[test]
    fn failures_carry_counterexamples() {
        let cfg = RunConfig {
            command: "verify".into(),
            selector: None,
            k: None,
            eps: None,
            trials: None,
            seed: 0,
            max_subsets: 10,
            max_bits: 64,
        };
        let report = run_trials("probe", 4, odd_trials_fail, &cfg);
        assert_eq!(report.trials, 4);
        assert_eq!(report.failures.iter().map(|f| f.trial).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(report.failures[0].counterexample["type"], "vectors");
    }
}
