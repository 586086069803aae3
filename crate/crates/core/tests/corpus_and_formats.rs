use std::path::PathBuf;

use cbdec::algebra::{AlgebraElement, AlgebraShape};
use cbdec::instance::{instance_to_json, parse_instance, Instance, Params, Problem};
use cbdec::report::{run_instance, RunOptions};
use cbdec::suite::{manifest, Profile, SuiteConfig};
use cbdec::testkit::{format_manifest, parse_manifest, random_element, random_free_tensor, SeededGenerator};
use proptest::prelude::*;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn checked_in_manifests_are_current() {
    for (file, profile) in [("seed42-full.manifest", Profile::Full), ("seed42-quick.manifest", Profile::Quick)] {
        let text = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
        let expect = manifest(&SuiteConfig::new(42, profile));
        assert_eq!(parse_manifest(&text).unwrap(), expect, "{file} is stale");
        assert_eq!(text, format_manifest(&expect));
    }
}

#[test]
fn example_instances() {
    let dir = corpus_dir().join("instances");
    let run = |name: &str| {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let inst = parse_instance(&text).unwrap();
        run_instance(&inst, text.as_bytes(), &RunOptions::default()).unwrap()
    };
    let r = run("scalars_dec_linf.json");
    assert!((r.result["value"].as_f64().unwrap() - 6.0).abs() <= 1e-8);
    let r = run("free_tensor_unit.json");
    assert!((r.result["max"].as_f64().unwrap() - 1.0).abs() <= 1e-7);
    assert!((r.result["min_lower"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    let r = run("cb_linf_pauli.json");
    assert_eq!(r.verdict.as_deref(), Some("agree"));
    assert!((r.result["upper"].as_f64().unwrap() - 2.0).abs() <= 1e-6);
    let r = run("trace_functional.json");
    assert!((r.result["value"].as_f64().unwrap() - 2.0).abs() <= 1e-7);
    let r = run("pinching_mult_domain.json");
    assert_eq!(r.result["dimension"].as_u64(), Some(2));
    let text = std::fs::read_to_string(dir.join("malformed_dimensions.json")).unwrap();
    let e = parse_instance(&text).unwrap_err().to_string();
    assert!(e.contains("coefficients[0][0][1]"), "{e}");
}

fn shapes() -> impl Strategy<Value = AlgebraShape> {
    prop::collection::vec(1usize..=3, 1..=2).prop_map(|d| AlgebraShape::new(d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instances_round_trip(seed in any::<u64>(), shape in shapes(), n in 1usize..=4, kind in 0usize..3) {
        let mut g = SeededGenerator::new(seed);
        let coeffs: Vec<AlgebraElement> = (0..n).map(|_| random_element(&mut g, &shape)).collect();
        let problem = match kind {
            0 => Problem::DecLinf(coeffs),
            1 => Problem::FreeTensor(cbdec::tensor::FreeTensor::new(coeffs).unwrap()),
            _ => Problem::DecMatrix(cbdec::testkit::random_map(&mut g, &AlgebraShape::matrix(2), &shape)),
        };
        let inst = Instance { problem, params: Params { seed: Some(seed), ..Default::default() } };
        let text = instance_to_json(&inst).to_string();
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn manifests_round_trip(seed in any::<u64>(), count in 0usize..20) {
        let mut g = SeededGenerator::new(seed);
        let entries: Vec<_> = (0..count)
            .map(|i| cbdec::testkit::ManifestEntry {
                id: format!("x-{i}"),
                family: "fam".into(),
                n: 1 + g.index(5),
                d: 1 + g.index(5),
                seed: g.next_u64(),
            })
            .collect();
        prop_assert_eq!(parse_manifest(&format_manifest(&entries)).unwrap(), entries);
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = parse_instance(&text);
        let _ = parse_manifest(&text);
    }

    #[test]
    fn generators_are_pure(seed in any::<u64>(), n in 1usize..=3, d in 1usize..=3) {
        let a = random_free_tensor(&mut SeededGenerator::new(seed), n, d);
        let b = random_free_tensor(&mut SeededGenerator::new(seed), n, d);
        prop_assert_eq!(a, b);
    }
}
