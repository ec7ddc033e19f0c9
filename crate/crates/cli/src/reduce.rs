//! `reduce`: apply a reduction and emit the target instance with its
//! parameters in `meta` and any witness carried across.

use detmax_core::format::{encode_origins, Document, GramDoc, GridTilingDoc, Meta, VectorsDoc};
use detmax_core::gridtiling::{bcsp_eval, bcsp_to_gridtiling_with, lift_assignment, DiagonalCells};
use detmax_core::reductions::{gridtiling_to_detmax, gridtiling_to_orthovectors, ksum_to_arrowhead, VectorOrigin};
use detmax_core::{GtAssignment, KSumInstance};

use crate::config::RunConfig;
use crate::CliError;

fn ksum_of(doc: &Document) -> Result<(KSumInstance, Option<Vec<usize>>), CliError> {
    match doc {
        Document::Ksum(d) => Ok((d.to_instance()?, d.witness.clone())),
        Document::KsumInt(d) => Ok((d.to_instance()?, d.witness.clone())),
        other => Err(CliError::Validation(format!("expected a ksum document, got {}", other.kind()))),
    }
}

/// 1-based vector indices selecting the witness pair in every cell.
fn witness_indices(origins: &[VectorOrigin], sigma: &GtAssignment) -> Option<Vec<usize>> {
    let w: Vec<usize> = origins
        .iter()
        .enumerate()
        .filter(|(_, o)| sigma.get(o.cell) == Some(o.pair))
        .map(|(i, _)| i + 1)
        .collect();
    (w.len() == sigma.values().len()).then_some(w)
}

fn meta(entries: &[(&str, String)]) -> Meta {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn reduce(cfg: &RunConfig, from: &str, to: &str, diagonal: &str, doc: &Document) -> Result<Document, CliError> {
    let limits = cfg.limits();
    match (from, to) {
        ("ksum", "arrowhead") => {
            let (inst, witness) = ksum_of(doc)?;
            let red = ksum_to_arrowhead(&inst, &limits)?;
            let mut m = red.meta();
            m.insert("n".into(), inst.n().to_string());
            m.insert("k".into(), inst.k().to_string());
            m.insert("index_base".into(), "row 0 of the arrowhead matrix is index 1".into());
            let mut out = GramDoc::new(&red.gram);
            out.k = Some(red.target);
            out.meta = Some(m);
            out.witness = witness.map(|w| std::iter::once(1).chain(w.into_iter().map(|i| i + 1)).collect());
            Ok(Document::Gram(out))
        }
        ("gridtiling", "orthovectors") | ("gridtiling", "detmax") => {
            let Document::Gridtiling(g) = doc else {
                return Err(CliError::Validation(format!("expected a gridtiling document, got {}", doc.kind())));
            };
            let inst = g.to_instance()?;
            let sigma = g.witness_assignment()?;
            if to == "orthovectors" {
                let red = gridtiling_to_orthovectors(&inst)?;
                let mut out = VectorsDoc::new(&red.vectors);
                out.k = Some(red.target);
                out.origins = Some(encode_origins(&red.origins));
                out.witness = sigma.as_ref().and_then(|s| witness_indices(&red.origins, s));
                out.meta = Some(meta(&[("grid_k", inst.k().to_string()), ("grid_n", inst.n().to_string())]));
                Ok(Document::Vectors(out))
            } else {
                let red = gridtiling_to_detmax(&inst, &limits)?;
                let mut out = GramDoc::new(&red.normalized);
                out.k = Some(red.target);
                out.witness = sigma.as_ref().and_then(|s| witness_indices(&red.origins, s));
                out.meta = Some(meta(&[
                    ("ell", red.ell.to_string()),
                    ("scale", "1/4".into()),
                    ("grid_k", inst.k().to_string()),
                    ("grid_n", inst.n().to_string()),
                    ("dim", red.vectors.dim().to_string()),
                ]));
                Ok(Document::Gram(out))
            }
        }
        ("bcsp", "gridtiling") => {
            let Document::Bcsp(b) = doc else {
                return Err(CliError::Validation(format!("expected a bcsp document, got {}", doc.kind())));
            };
            let mode = match diagonal {
                "equality" => DiagonalCells::Equality,
                "unrestricted" => DiagonalCells::Unrestricted,
                other => return Err(CliError::Validation(format!("unknown diagonal mode {other:?}"))),
            };
            let inst = b.to_instance()?;
            let gt = bcsp_to_gridtiling_with(&inst, mode)?;
            let mut out = GridTilingDoc::new(&gt);
            if let Some(psi) = &b.witness {
                bcsp_eval(&inst, psi)?;
                out = out.with_witness(&lift_assignment(psi));
            }
            out.meta = Some(meta(&[("diagonal", diagonal.to_string())]));
            Ok(Document::Gridtiling(out))
        }
        _ => Err(CliError::Validation(format!(
            "unsupported reduction {from} -> {to}; expected ksum->arrowhead, gridtiling->orthovectors, gridtiling->detmax or bcsp->gridtiling"
        ))),
    }
}
