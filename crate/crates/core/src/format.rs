//! JSON documents. Every document carries a `"type"` tag; rationals are
//! canonical `"p/q"` strings; indices and alphabet values are 1-based.
//! Writers emit keys in sorted order so equal documents are byte-equal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridtiling::{BcspInstance, GridTilingInstance, GtAssignment, Pair};
use crate::linalg::{GramMatrix, Provenance, RatMatrix, RatVectorSet};
use crate::rational::Rat;
use crate::reductions::{ksum_normalize, KSumInstance, VectorOrigin};

pub type Meta = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Document {
    Vectors(VectorsDoc),
    Gram(GramDoc),
    Gridtiling(GridTilingDoc),
    Bcsp(BcspDoc),
    Ksum(KSumDoc),
    KsumInt(KSumIntDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Vectors(_) => "vectors",
            Document::Gram(_) => "gram",
            Document::Gridtiling(_) => "gridtiling",
            Document::Bcsp(_) => "bcsp",
            Document::Ksum(_) => "ksum",
            Document::KsumInt(_) => "ksum-int",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorsDoc {
    pub d: usize,
    pub vectors: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    /// 1-based indices of a known solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    /// `[i, j, x, y]` (all 1-based) for vectors emitted by a Grid Tiling
    /// reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origins: Option<Vec<[u32; 4]>>,
}

impl VectorsDoc {
    pub fn new(set: &RatVectorSet) -> Self {
        VectorsDoc {
            d: set.dim(),
            vectors: set.vectors().to_vec(),
            k: None,
            meta: None,
            witness: None,
            origins: None,
        }
    }

    pub fn to_set(&self) -> Result<RatVectorSet> {
        let set = RatVectorSet::new(self.vectors.clone())?;
        if set.dim() != self.d {
            return Err(Error::Invalid(format!(
                "declared d = {} but vectors have dimension {}",
                self.d,
                set.dim()
            )));
        }
        Ok(set)
    }
}

pub fn encode_origins(origins: &[VectorOrigin]) -> Vec<[u32; 4]> {
    origins
        .iter()
        .map(|o| [o.cell.i as u32 + 1, o.cell.j as u32 + 1, o.pair.0, o.pair.1])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramDoc {
    pub n: usize,
    pub entries: Vec<Vec<Rat>>,
    pub psd: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

impl GramDoc {
    pub fn new(g: &GramMatrix) -> Self {
        GramDoc {
            n: g.order(),
            entries: g.matrix().to_rows(),
            psd: g.provenance(),
            k: None,
            meta: None,
            witness: None,
        }
    }

    /// Symmetry and the nonnegative diagonal are checked for both
    /// provenances; a "constructed" tag is carried through as given.
    pub fn to_gram(&self) -> Result<GramMatrix> {
        if self.entries.len() != self.n {
            return Err(Error::Invalid(format!(
                "declared n = {} but {} rows given",
                self.n,
                self.entries.len()
            )));
        }
        let m = RatMatrix::from_rows(self.entries.clone())?;
        let g = GramMatrix::asserted(m)?;
        Ok(match self.psd {
            Provenance::Asserted => g,
            Provenance::Constructed => g.with_provenance(Provenance::Constructed),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridTilingDoc {
    pub k: usize,
    pub n: u32,
    /// `cells[i-1][j-1]` is the set of cell `(i, j)`.
    pub cells: Vec<Vec<Vec<[u32; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<[u32; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

fn pair_of(p: [u32; 2]) -> Pair {
    (p[0], p[1])
}

impl GridTilingDoc {
    pub fn new(inst: &GridTilingInstance) -> Self {
        let k = inst.k();
        let cells = inst
            .cells()
            .chunks(k)
            .map(|row| row.iter().map(|c| c.iter().map(|&(x, y)| [x, y]).collect()).collect())
            .collect();
        GridTilingDoc {
            k,
            n: inst.n(),
            cells,
            witness: None,
            meta: None,
        }
    }

    pub fn with_witness(mut self, sigma: &GtAssignment) -> Self {
        let k = sigma.k();
        self.witness = sigma.to_pairs().map(|ps| {
            ps.chunks(k)
                .map(|row| row.iter().map(|&(x, y)| [x, y]).collect())
                .collect()
        });
        self
    }

    pub fn to_instance(&self) -> Result<GridTilingInstance> {
        if self.cells.len() != self.k || self.cells.iter().any(|r| r.len() != self.k) {
            return Err(Error::Invalid(format!("cells must form a {0}x{0} array", self.k)));
        }
        let cells = self
            .cells
            .iter()
            .flatten()
            .map(|c| c.iter().copied().map(pair_of).collect())
            .collect();
        GridTilingInstance::new(self.k, self.n, cells)
    }

    pub fn witness_assignment(&self) -> Result<Option<GtAssignment>> {
        let Some(w) = &self.witness else {
            return Ok(None);
        };
        if w.len() != self.k || w.iter().any(|r| r.len() != self.k) {
            return Err(Error::Invalid("witness must be a k x k array".into()));
        }
        let values = w.iter().flatten().copied().map(pair_of).collect();
        GtAssignment::total(self.k, values).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub i: usize,
    pub j: usize,
    pub pairs: Vec<[u32; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BcspDoc {
    pub k: usize,
    pub n: u32,
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl BcspDoc {
    pub fn new(inst: &BcspInstance) -> Self {
        let constraints = inst
            .constraints()
            .iter()
            .map(|(&(i, j), pairs)| ConstraintDoc {
                i: i + 1,
                j: j + 1,
                pairs: pairs.iter().map(|&(a, b)| [a, b]).collect(),
            })
            .collect();
        BcspDoc {
            k: inst.k(),
            n: inst.n(),
            constraints,
            witness: None,
            meta: None,
        }
    }

    pub fn to_instance(&self) -> Result<BcspInstance> {
        let mut cons = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            if c.i == 0 || c.j == 0 {
                return Err(Error::Invalid("constraint variables are 1-based".into()));
            }
            cons.push((c.i - 1, c.j - 1, c.pairs.iter().copied().map(pair_of).collect()));
        }
        BcspInstance::new(self.k, self.n, cons)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSumDoc {
    pub x: Vec<Rat>,
    pub t: Rat,
    pub k: usize,
    pub granularity: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl KSumDoc {
    pub fn new(inst: &KSumInstance) -> Self {
        KSumDoc {
            x: inst.x().to_vec(),
            t: inst.t().clone(),
            k: inst.k(),
            granularity: inst.granularity().clone(),
            witness: None,
            meta: None,
        }
    }

    pub fn to_instance(&self) -> Result<KSumInstance> {
        KSumInstance::new(self.x.clone(), self.t.clone(), self.k, self.granularity.clone())
    }
}

/// Integer k-Sum, normalized on load by dividing by the total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSumIntDoc {
    pub x: Vec<i64>,
    pub t: i64,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl KSumIntDoc {
    pub fn to_instance(&self) -> Result<KSumInstance> {
        ksum_normalize(&self.x, self.t, self.k)
    }
}

pub fn parse_document(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram;

    #[test]
    fn vectors_round_trip() {
        let set = RatVectorSet::from_ints(&[&[5, 0, 0], &[2, 3, 0]]).unwrap();
        let text = to_canonical_json(&Document::Vectors(VectorsDoc::new(&set))).unwrap();
        assert_eq!(
            text,
            "{\n  \"d\": 3,\n  \"type\": \"vectors\",\n  \"vectors\": [\n    [\n      \"5\",\n      \"0\",\n      \"0\"\n    ],\n    [\n      \"2\",\n      \"3\",\n      \"0\"\n    ]\n  ]\n}\n"
        );
        match parse_document(&text).unwrap() {
            Document::Vectors(doc) => assert_eq!(doc.to_set().unwrap(), set),
            other => panic!("wrong kind {}", other.kind()),
        }
    }

    #[test]
    fn gram_round_trip_keeps_provenance() {
        let set = RatVectorSet::from_ints(&[&[1, 2], &[0, 1]]).unwrap();
        let g = gram(&set);
        let text = to_canonical_json(&Document::Gram(GramDoc::new(&g))).unwrap();
        assert!(text.contains("\"psd\": \"constructed\""));
        let Document::Gram(doc) = parse_document(&text).unwrap() else { panic!() };
        assert_eq!(doc.to_gram().unwrap(), g);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_document("{"), Err(Error::Format(_))));
        assert!(matches!(parse_document("{\"type\":\"nope\"}"), Err(Error::Format(_))));
        let doc = parse_document(r#"{"type":"vectors","d":2,"vectors":[["1","2","3"]]}"#).unwrap();
        let Document::Vectors(v) = doc else { panic!() };
        assert!(v.to_set().is_err());
        let doc = parse_document(r#"{"type":"vectors","d":2,"vectors":[["1","1/0"]]}"#);
        assert!(doc.is_err());
    }

    #[test]
    fn gridtiling_and_bcsp_round_trip() {
        let text = r#"{"type":"gridtiling","k":3,"n":2,"cells":[
            [[[1,1]],[[1,2]],[[2,2]]],
            [[[1,1]],[[1,1],[2,1]],[[2,2]]],
            [[[1,1]],[[1,2]],[[2,2]]]]}"#;
        let Document::Gridtiling(doc) = parse_document(text).unwrap() else { panic!() };
        let inst = doc.to_instance().unwrap();
        assert_eq!(inst.cell(crate::Cell::new(1, 1)), &[(1, 1), (2, 1)]);
        assert_eq!(GridTilingDoc::new(&inst).to_instance().unwrap(), inst);

        let text = r#"{"type":"bcsp","k":3,"n":2,"constraints":[{"i":2,"j":1,"pairs":[[1,2]]}]}"#;
        let Document::Bcsp(doc) = parse_document(text).unwrap() else { panic!() };
        let inst = doc.to_instance().unwrap();
        assert!(inst.allows(0, 1, 2, 1));
        let back = BcspDoc::new(&inst);
        assert_eq!(back.constraints[0].i, 1);
        assert_eq!(back.constraints[0].pairs, vec![[2, 1]]);
    }

    #[test]
    fn ksum_documents() {
        let text = r#"{"type":"ksum-int","x":[1,2,3],"t":3,"k":2}"#;
        let Document::KsumInt(doc) = parse_document(text).unwrap() else { panic!() };
        let inst = doc.to_instance().unwrap();
        let out = to_canonical_json(&Document::Ksum(KSumDoc::new(&inst))).unwrap();
        assert!(out.contains("\"granularity\": \"1/6\""));
        let Document::Ksum(back) = parse_document(&out).unwrap() else { panic!() };
        assert_eq!(back.to_instance().unwrap(), inst);
    }
}
