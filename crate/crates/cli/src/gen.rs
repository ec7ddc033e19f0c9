//! Seeded instance generators. Planted kinds embed a witness; every emitted
//! document is re-validated before it is returned.

use detmax_core::format::{BcspDoc, Document, GramDoc, GridTilingDoc, KSumDoc, VectorsDoc};
use detmax_core::gridtiling::{consistency, Pair};
use detmax_core::linalg::gram;
use detmax_core::reductions::ksum_normalize;
use detmax_core::{BcspInstance, GridTilingInstance, GtAssignment, Rat, RatVectorSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::CliError;

pub const KINDS: [&str; 8] = [
    "ksum",
    "ksum-planted",
    "gridtiling",
    "gridtiling-planted",
    "bcsp",
    "bcsp-planted",
    "vectors",
    "gram",
];

#[derive(Clone, Debug, Default)]
pub struct GenParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub max_value: Option<u64>,
    pub cell_size: Option<usize>,
    pub fixture: Option<String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn sample_vectors() -> RatVectorSet {
    RatVectorSet::from_ints(&[&[5, 0, 0], &[2, 3, 0], &[1, 1, 3], &[3, 1, 1]]).expect("fixture")
}

/// The 3x3 instance over `[4]` with its known solution.
pub fn sample_grid() -> (GridTilingInstance, GtAssignment) {
    let s = |v: &[(u32, u32)]| v.to_vec();
    let inst = GridTilingInstance::new(
        3,
        4,
        vec![
            s(&[(1, 1), (3, 2)]),
            s(&[(3, 4), (4, 3)]),
            s(&[(3, 2), (4, 1)]),
            s(&[(1, 2), (2, 2)]),
            s(&[(1, 4), (3, 1)]),
            s(&[(1, 2), (1, 3)]),
            s(&[(1, 2), (4, 2)]),
            s(&[(2, 1), (4, 4)]),
            s(&[(3, 3), (4, 2)]),
        ],
    )
    .expect("fixture");
    let sigma = GtAssignment::total(
        3,
        vec![(3, 2), (3, 4), (3, 2), (1, 2), (1, 4), (1, 2), (4, 2), (4, 4), (4, 2)],
    )
    .expect("fixture");
    (inst, sigma)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[-1, 1]` with denominator at most `den`.
pub fn unit_rat(rng: &mut ChaCha8Rng, den: i64) -> Rat {
    let q = rng.gen_range(1..=den);
    Rat::ratio(rng.gen_range(-q..=q), q)
}

pub fn random_vectors(rng: &mut ChaCha8Rng, n: usize, d: usize, den: i64) -> RatVectorSet {
    RatVectorSet::new((0..n).map(|_| (0..d).map(|_| unit_rat(rng, den)).collect()).collect()).expect("n, d >= 1")
}

/// `size` distinct pairs from `[n]^2`, always containing `must` when given.
pub fn random_pairs(rng: &mut ChaCha8Rng, n: u32, size: usize, must: Option<Pair>) -> Vec<Pair> {
    let mut pool: Vec<Pair> = (1..=n)
        .flat_map(|a| (1..=n).map(move |b| (a, b)))
        .filter(|p| Some(*p) != must)
        .collect();
    pool.shuffle(rng);
    let mut out: Vec<Pair> = must.into_iter().collect();
    out.extend(pool.into_iter().take(size.saturating_sub(out.len())));
    out.shuffle(rng);
    out
}

pub fn random_grid(rng: &mut ChaCha8Rng, k: usize, n: u32, max_cell: usize) -> Result<GridTilingInstance, CliError> {
    let cells = (0..k * k)
        .map(|_| {
            let size = rng.gen_range(1..=max_cell);
            random_pairs(rng, n, size, None)
        })
        .collect();
    Ok(GridTilingInstance::new(k, n, cells)?)
}

/// Grid with `sigma(i, j) = (X_i, Y_j)` planted in every cell.
pub fn planted_grid(
    rng: &mut ChaCha8Rng,
    k: usize,
    n: u32,
    max_cell: usize,
) -> Result<(GridTilingInstance, GtAssignment), CliError> {
    let xs: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=n)).collect();
    let ys: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=n)).collect();
    let mut cells = Vec::with_capacity(k * k);
    let mut planted = Vec::with_capacity(k * k);
    for &x in &xs {
        for &y in &ys {
            let size = rng.gen_range(1..=max_cell);
            cells.push(random_pairs(rng, n, size, Some((x, y))));
            planted.push((x, y));
        }
    }
    let inst = GridTilingInstance::new(k, n, cells)?;
    let sigma = GtAssignment::total(k, planted)?;
    Ok((inst, sigma))
}

pub fn random_bcsp(
    rng: &mut ChaCha8Rng,
    k: usize,
    n: u32,
    max_rel: usize,
    planted: Option<&[u32]>,
) -> Result<BcspInstance, CliError> {
    let mut cons = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let size = rng.gen_range(1..=max_rel);
            let must = planted.map(|psi| (psi[i], psi[j]));
            cons.push((i, j, random_pairs(rng, n, size, must)));
        }
    }
    Ok(BcspInstance::new(k, n, cons)?)
}

pub fn generate(kind: &str, p: &GenParams, cfg: &RunConfig) -> Result<Document, CliError> {
    let mut rng = rng_for(cfg.seed);
    if let Some(fixture) = &p.fixture {
        return match (kind, fixture.as_str()) {
            ("vectors", "fig1") => Ok(Document::Vectors(VectorsDoc::new(&sample_vectors()))),
            ("gram", "fig1") => Ok(Document::Gram(GramDoc::new(&gram(&sample_vectors())))),
            ("gridtiling" | "gridtiling-planted", "table1") => {
                let (inst, sigma) = sample_grid();
                Ok(Document::Gridtiling(GridTilingDoc::new(&inst).with_witness(&sigma)))
            }
            _ => Err(bad(format!("no fixture {fixture:?} for kind {kind}"))),
        };
    }
    let doc = match kind {
        "ksum" | "ksum-planted" => {
            let n = p.n.unwrap_or(4);
            let k = p.k.unwrap_or(2);
            let max = p.max_value.unwrap_or(8).max(1) as i64;
            if n < 2 || k == 0 || k > n {
                return Err(bad(format!("k-Sum needs n >= 2 and 1 <= k <= n (n = {n}, k = {k})")));
            }
            let values: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max)).collect();
            let total: i64 = values.iter().sum();
            let (t, witness) = if kind == "ksum-planted" {
                if k == n {
                    return Err(bad("planted k-Sum with k = n has target equal to the total, outside (0, total)"));
                }
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let mut chosen: Vec<usize> = idx[..k].to_vec();
                chosen.sort_unstable();
                let t: i64 = chosen.iter().map(|&i| values[i]).sum();
                (t, Some(chosen.into_iter().map(|i| i + 1).collect()))
            } else {
                (rng.gen_range(1..total), None)
            };
            let inst = ksum_normalize(&values, t, k)?;
            let mut doc = KSumDoc::new(&inst);
            doc.witness = witness;
            let ints = values.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            doc.meta = Some(
                [("integers".to_string(), ints), ("integer_target".to_string(), t.to_string())]
                    .into_iter()
                    .collect(),
            );
            Document::Ksum(doc)
        }
        "gridtiling" | "gridtiling-planted" => {
            let k = p.k.unwrap_or(3);
            let n = p.n.unwrap_or(3) as u32;
            let max_cell = p.cell_size.unwrap_or(2).max(1);
            if n == 0 {
                return Err(bad("alphabet size must be positive"));
            }
            if kind == "gridtiling" {
                Document::Gridtiling(GridTilingDoc::new(&random_grid(&mut rng, k, n, max_cell)?))
            } else {
                let (inst, sigma) = planted_grid(&mut rng, k, n, max_cell)?;
                debug_assert_eq!(consistency(&inst, &sigma)?, 2 * k * k);
                Document::Gridtiling(GridTilingDoc::new(&inst).with_witness(&sigma))
            }
        }
        "bcsp" | "bcsp-planted" => {
            let k = p.k.unwrap_or(3);
            let n = p.n.unwrap_or(3) as u32;
            if n == 0 {
                return Err(bad("alphabet size must be positive"));
            }
            let max_rel = p.cell_size.unwrap_or(n as usize).max(1);
            if kind == "bcsp" {
                Document::Bcsp(BcspDoc::new(&random_bcsp(&mut rng, k, n, max_rel, None)?))
            } else {
                let psi: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=n)).collect();
                let inst = random_bcsp(&mut rng, k, n, max_rel, Some(&psi))?;
                let mut doc = BcspDoc::new(&inst);
                doc.witness = Some(psi);
                Document::Bcsp(doc)
            }
        }
        "vectors" | "gram" => {
            let n = p.n.unwrap_or(4);
            let d = p.d.unwrap_or(3);
            let den = p.max_value.unwrap_or(4).max(1) as i64;
            if n == 0 || d == 0 {
                return Err(bad("vector sets need n >= 1 and d >= 1"));
            }
            let set = random_vectors(&mut rng, n, d, den);
            if kind == "vectors" {
                let mut doc = VectorsDoc::new(&set);
                doc.k = p.k;
                Document::Vectors(doc)
            } else {
                let mut doc = GramDoc::new(&gram(&set));
                doc.k = p.k;
                Document::Gram(doc)
            }
        }
        other => {
            return Err(bad(format!("unknown kind {other:?}; expected one of {}", KINDS.join(", "))));
        }
    };
    revalidate(&doc)?;
    Ok(doc)
}

/// Parse the emitted document back into its domain type.
pub fn revalidate(doc: &Document) -> Result<(), CliError> {
    match doc {
        Document::Vectors(v) => {
            v.to_set()?;
        }
        Document::Gram(g) => {
            g.to_gram()?;
        }
        Document::Gridtiling(g) => {
            let inst = g.to_instance()?;
            if let Some(sigma) = g.witness_assignment()? {
                consistency(&inst, &sigma)?;
            }
        }
        Document::Bcsp(b) => {
            let inst = b.to_instance()?;
            if let Some(psi) = &b.witness {
                detmax_core::gridtiling::bcsp_eval(&inst, psi)?;
            }
        }
        Document::Ksum(k) => {
            k.to_instance()?;
        }
        Document::KsumInt(k) => {
            k.to_instance()?;
        }
    }
    Ok(())
}
