use std::process::{Command, Output};

use serde_json::Value;

fn varcong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varcong"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).expect("UTF-8")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("JSON on stdout")
}

#[test]
fn congruences_both_agree_on_the_headline_case() {
    let v = json_of(&varcong(&["congruences", "--a", "4: 1 2 3 3", "--method", "both"]));
    assert_eq!(v["oracle_count"], 271);
    assert_eq!(v["structural_count"], 271);
    assert_eq!(v["diff"]["empty"], true);
    assert_eq!(v["height"], 16);
    assert!(v["timings_ms"]["oracle"].is_u64() && v["timings_ms"]["structural"].is_u64());
    assert_eq!(v["lattice"]["nodes"].as_array().unwrap().len(), 271);
    assert_eq!(v["layer_cover_violations"].as_array().unwrap().len(), 0);
    assert_eq!(v["chain"]["entries"].as_array().unwrap().len(), 7);
}

#[test]
fn congruences_rank_one() {
    let v = json_of(&varcong(&["congruences", "--a", "2: 1 1", "--method", "both"]));
    assert_eq!(v["oracle_count"], 2);
    assert_eq!(v["structural_count"], 2);
    assert_eq!(v["diff"]["empty"], true);
}

#[test]
fn non_idempotent_sandwich_is_normalized() {
    let v = json_of(&varcong(&["congruences", "--a", "3: 2 1 1", "--method", "both"]));
    assert_eq!(v["diff"]["empty"], true);
    assert_ne!(v["normalizer"], "3: 1 2 3");
}

#[test]
fn json_output_is_stable_and_key_sorted() {
    let args = ["congruences", "--a", "3: 1 2 2", "--method", "structural"];
    let first = stdout(&varcong(&args));
    assert_eq!(first, stdout(&varcong(&args)));
    let v: Value = serde_json::from_str(&first).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn full_variant_is_oracle_only() {
    let out = varcong(&[
        "congruences",
        "--a",
        "2: 1 1",
        "--semigroup",
        "full-variant",
        "--method",
        "both",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("only available"));
    let v = json_of(&varcong(&[
        "congruences",
        "--a",
        "2: 1 1",
        "--semigroup",
        "full-variant",
        "--method",
        "oracle",
    ]));
    assert_eq!(v["size"], 4);
    assert!(v["oracle_count"].as_u64().unwrap() >= 2);
}

#[test]
fn caps_are_surfaced() {
    let out = varcong(&[
        "congruences",
        "--a",
        "4: 1 2 3 3",
        "--method",
        "oracle",
        "--cap-elements",
        "50",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap of 50"), "{err}");
    let out = varcong(&[
        "congruences",
        "--a",
        "4: 1 2 3 3",
        "--method",
        "structural",
        "--cap-systems",
        "100",
    ]);
    assert!(!out.status.success());
    let out = varcong(&["congruences", "--a", "4: 1 2 3 3", "--cap-elements", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_sandwich_is_rejected() {
    let out = varcong(&["height", "--a", "3: 1 4 2"]);
    assert!(!out.status.success());
    let out = varcong(&["height", "--a", "nonsense"]);
    assert!(!out.status.success());
}

#[test]
fn principal_count_on_a_small_variant() {
    let v = json_of(&varcong(&[
        "congruences",
        "--a",
        "2: 1 2",
        "--semigroup",
        "full-variant",
        "--principal",
    ]));
    // R_1, R_{S_2} and ∇ out of the 6 pairs of T_2
    assert_eq!(v["principal"], 3);
}

#[test]
fn eggbox_writes_three_dot_files() {
    let dir = tempfile::tempdir().unwrap();
    let summary = json_of(&varcong(&[
        "eggbox",
        "--a",
        "4: 1 2 3 3",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    for name in ["full-variant", "regular-part", "image-T"] {
        let body = std::fs::read_to_string(dir.path().join(format!("{name}.dot"))).unwrap();
        assert!(body.starts_with("digraph"));
    }
    assert_eq!(summary["regular-part"]["d_classes"], 3);
    assert_eq!(summary["regular-part"]["d_classes_form_chain"], true);
    assert_eq!(summary["full-variant"]["d_classes_form_chain"], false);
}

#[test]
fn eggbox_of_t2() {
    let text = stdout(&varcong(&[
        "eggbox",
        "--a",
        "2: 1 2",
        "--semigroup",
        "regular-part",
        "--format",
        "text",
    ]));
    assert_eq!(text.matches("D-class").count(), 2);
    let v = json_of(&varcong(&[
        "eggbox",
        "--a",
        "2: 1 2",
        "--semigroup",
        "image-T",
        "--format",
        "json",
    ]));
    assert_eq!(v["summary"]["size"], 4);
}

#[test]
fn classify_kappa_and_delta() {
    let v = json_of(&varcong(&["classify", "--a", "4: 1 2 3 3", "--congruence", "kappa"]));
    assert_eq!(v["q"], 1);
    assert_eq!(v["N"], "triv");
    assert_eq!(v["round_trip"], true);
    for psi in v["psystem"]["psi"].as_object().unwrap().values() {
        assert_eq!(psi.as_array().unwrap().len(), 1, "κ gives all-∇ systems");
    }
    for psi in v["csystem"]["psi"].as_object().unwrap().values() {
        assert_eq!(psi.as_array().unwrap().len(), 1);
    }
    let d = json_of(&varcong(&["classify", "--a", "4: 1 2 3 3", "--congruence", "delta"]));
    assert_eq!(d["q"], 1);
    assert_eq!(d["chain_index"], 0);
}

#[test]
fn classify_by_index_and_file_round_trip() {
    let dump = json_of(&varcong(&[
        "congruences",
        "--a",
        "4: 1 2 3 3",
        "--method",
        "structural",
        "--blocks",
    ]));
    let dir = tempfile::tempdir().unwrap();
    for i in [0usize, 17, 100, 200, 269] {
        let by_index = json_of(&varcong(&["classify", "--a", "4: 1 2 3 3", "--index", &i.to_string()]));
        assert_eq!(by_index["round_trip"], true);
        let path = dir.path().join(format!("c{i}.json"));
        std::fs::write(&path, dump["lattice"]["nodes"][i]["blocks"].to_string()).unwrap();
        let by_file = json_of(&varcong(&[
            "classify",
            "--a",
            "4: 1 2 3 3",
            "--congruence",
            path.to_str().unwrap(),
        ]));
        assert_eq!(by_index, by_file);
    }
    let universal = varcong(&["classify", "--a", "4: 1 2 3 3", "--index", "270"]);
    assert!(!universal.status.success());
}

#[test]
fn classify_rejects_non_congruences_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"[["4: 1 1 1 1", "4: 2 2 2 2"]]"#).unwrap();
    let out = varcong(&["classify", "--a", "4: 1 2 3 3", "--congruence", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("not a congruence") && err.contains("translation by"),
        "{err}"
    );
}

#[test]
fn height_reports_formula_search_and_witness() {
    let v = json_of(&varcong(&["height", "--a", "4: 1 2 3 3"]));
    assert_eq!(v["formula"], "16");
    assert_eq!(v["search"], 16);
    assert_eq!(v["height_lambda"], "6");
    assert_eq!(v["height_rho"], "5");
    assert_eq!(v["witness"].as_array().unwrap().len(), 16);
    assert_eq!(v["agree"], true);
    let sizes: Vec<u64> = v["witness_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert!(sizes.windows(2).all(|w| w[0] < w[1]));
    let id = json_of(&varcong(&["height", "--a", "3: 1 2 3"]));
    assert_eq!(id["search"], 7);
    assert_eq!(id["height_lambda"], "1");
    assert_eq!(id["height_rho"], "1");
}

#[test]
fn dot_and_text_formats() {
    let dot = stdout(&varcong(&[
        "congruences",
        "--a",
        "3: 1 2 2",
        "--method",
        "structural",
        "--format",
        "dot",
    ]));
    assert!(dot.starts_with("digraph") && dot.contains("cluster_0"));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.txt");
    let out = varcong(&[
        "--threads",
        "2",
        "height",
        "--a",
        "3: 1 2 2",
        "--format",
        "text",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(file).unwrap().contains("formula:"));
}
