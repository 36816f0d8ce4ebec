//! The JSON files under fixtures/ are the built-in fixtures written out as
//! specs. Set CARTAN_BLESS=1 to regenerate them.

use std::fs;
use std::path::PathBuf;

use cartan_cli::{parse_with_override, run_file, Status};
use cartan_core::coeff::{q, Policy, Ring};
use cartan_core::hoch::{a2, ainf_check, kx2, trivial, Category};
use cartan_core::models::{dubrovin_ring, qh_p1, HypercomData};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn golden(name: &str, text: String) {
    let path = dir().join(format!("{name}.json"));
    if std::env::var_os("CARTAN_BLESS").is_some() {
        fs::write(&path, &text).unwrap();
    }
    let on_disk = fs::read_to_string(&path).unwrap_or_else(|_| panic!("{} missing; run with CARTAN_BLESS=1", path.display()));
    assert_eq!(on_disk, text, "{name} drifted from the built-in fixture");
}

macro_rules! pretty {
    ($v:expr) => {
        serde_json::to_string_pretty(&$v).unwrap() + "\n"
    };
}

#[test]
fn categories_match_files() {
    let r = Ring::plain();
    for c in [kx2(&r), a2(&r), trivial(&r)] {
        golden(&c.name, pretty!(c.to_spec(&r)));
        let back = Category::from_json(&fs::read_to_string(dir().join(format!("{}.json", c.name))).unwrap(), &r).unwrap();
        assert!(ainf_check(&back, &r).passed());
    }
}

#[test]
fn qh_p1_matches_file() {
    let h = qh_p1(q(1), 5);
    let r = dubrovin_ring(&h, Policy { z_order: 3, energy_cut: q(8), t_order: 3, e_window: (-16, 16) }).unwrap();
    golden("qh-p1", pretty!(h.to_spec(&r)));
    let back = HypercomData::from_json(&fs::read_to_string(dir().join("qh-p1.json")).unwrap(), &r).unwrap();
    assert!(back.validate(&r).passed());
}

#[test]
fn inline_specs_run_like_names() {
    let spec = fs::read_to_string(dir().join("kx2.json")).unwrap();
    let ring = r#"{"z_order": 3, "energy_cut": "8", "e_window": [-16, 16], "t": [], "norm_constant": "2"}"#;
    let by = |input: &str| {
        let text = format!(r#"{{"ring": {ring}, "inputs": {{"category": {input}}}, "tasks": [{{"name": "c", "kind": "ch-check", "params": {{"word_bound": 4}}}}]}}"#);
        let out = tempfile::tempdir().unwrap();
        let res = run_file(&parse_with_override(&text, None).unwrap(), out.path(), 1).unwrap();
        assert_eq!(res[0].status, Status::Pass);
        res[0].report["checks"].clone()
    };
    assert_eq!(by(&spec), by(r#""kx2""#));
}
