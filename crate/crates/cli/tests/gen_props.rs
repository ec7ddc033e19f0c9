use detmax_core::format::{parse_document, to_canonical_json, Document};
use detmax_core::gridtiling::{bcsp_eval, consistency};
use detmax_core::Rat;
use detmax_lab::config::RunConfig;
use detmax_lab::gen::{generate, revalidate, GenParams, KINDS};
use proptest::prelude::*;

fn cfg(seed: u64) -> RunConfig {
    RunConfig {
        command: "gen".into(),
        selector: None,
        k: None,
        eps: None,
        trials: None,
        seed,
        max_subsets: 1_000_000,
        max_bits: 4096,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seed_determines_output(seed in any::<u64>(), kind in 0..KINDS.len()) {
        let p = GenParams::default();
        let a = to_canonical_json(&generate(KINDS[kind], &p, &cfg(seed)).unwrap()).unwrap();
        let b = to_canonical_json(&generate(KINDS[kind], &p, &cfg(seed)).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn emitted_documents_revalidate(seed in any::<u64>(), kind in 0..KINDS.len(), n in 2usize..6, k in 3usize..5) {
        let p = GenParams { n: Some(n), k: Some(if KINDS[kind].starts_with("ksum") { n - 1 } else { k }), ..Default::default() };
        let doc = generate(KINDS[kind], &p, &cfg(seed)).unwrap();
        let back = parse_document(&to_canonical_json(&doc).unwrap()).unwrap();
        revalidate(&back).unwrap();
        match back {
            Document::Gridtiling(g) => {
                if let Some(sigma) = g.witness_assignment().unwrap() {
                    prop_assert_eq!(consistency(&g.to_instance().unwrap(), &sigma).unwrap(), 2 * k * k);
                }
            }
            Document::Bcsp(b) => {
                if let Some(psi) = &b.witness {
                    prop_assert_eq!(bcsp_eval(&b.to_instance().unwrap(), psi).unwrap(), Rat::one());
                }
            }
            Document::Ksum(d) => {
                let inst = d.to_instance().unwrap();
                if let Some(w) = &d.witness {
                    let s: Rat = w.iter().map(|&i| inst.x()[i - 1].clone()).sum();
                    prop_assert_eq!(&s, inst.t());
                }
            }
            _ => {}
        }
    }
}
