use std::path::Path;
use std::process::Command;

use vb_cli::pipeline::content_at_floor;
use vb_core::visibility::VisibilityResult;

fn vb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vb"))
}

fn write_config(dir: &Path, out: &Path, eta: f64) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "domain": { "kind": "disk", "radius": 1.0, "h": 1.0 / 128.0 },
        "z0": { "rule": "point", "at": [0.0, 0.0] },
        "s": 1.0, "eps": 0.2, "eta": eta, "depth": 1, "eta_policy": "report",
        "visibility": { "c_ladder": [1.0, 2.0] },
        "output": out,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn run_is_reproducible_and_report_arithmetic_holds() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = write_config(tmp.path(), &a, 0.125);
    assert!(vb().args(["run", "--config"]).arg(&cfg).status().unwrap().success());
    assert!(vb().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&b).status().unwrap().success());
    for name in ["report.json", "tree.json", "visibility.json", "paths.json", "mask.pbm", "distance.raw"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    let vis: VisibilityResult = serde_json::from_slice(&std::fs::read(a.join("visibility.json")).unwrap()).unwrap();
    let mask = vb_core::io::read_mask::<f64>(&a.join("mask.pbm")).unwrap();
    let (space, dist) = vb_core::io::read_field_raw::<f64>(&a.join("distance.raw")).unwrap();
    let z0 = report["z0"].as_u64().unwrap() as usize;
    let t = 0.8;
    let content = content_at_floor(mask.space(), &vis.visible, t, None);
    let ratio = content / dist[z0].powf(t);
    assert_eq!(space.len(), mask.space().len());
    assert!((ratio - report["theorem"]["ratio"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(report["containment"]["fraction"].as_f64().unwrap(), 1.0);
}

#[test]
fn invalid_eta_fails_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let cfg = write_config(tmp.path(), &out, 1.5);
    let status = vb().args(["run", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn subcommands_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let p = |n: &str| tmp.path().join(n);
    let domain = r#"{"kind": "square", "side": 1.0, "h": 0.0078125}"#;
    assert!(vb().args(["gen", "--domain", domain, "--out"]).arg(p("sq.pbm")).status().unwrap().success());
    let ok = vb()
        .args(["construct", "--z0", "0.5,0.5", "--eta", "0.125", "--depth", "1", "--eta-policy", "report", "--mask"])
        .arg(p("sq.pbm"))
        .arg("--out")
        .arg(p("tree.json"))
        .arg("--paths")
        .arg(p("paths.json"))
        .status()
        .unwrap();
    assert!(ok.success());
    let verify = vb().arg("verify").arg("--mask").arg(p("sq.pbm")).arg("--tree").arg(p("tree.json")).output().unwrap();
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stdout));
    let v: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(v["chain_failures"], 0);
    let vis = vb()
        .args(["visibility", "--z0", "0.5,0.5", "--c", "2", "--mask"])
        .arg(p("sq.pbm"))
        .arg("--out")
        .arg(p("vis.json"))
        .status()
        .unwrap();
    assert!(vis.success());
    for name in ["a.svg", "b.svg"] {
        let r = vb()
            .arg("render")
            .arg("--mask")
            .arg(p("sq.pbm"))
            .arg("--tree")
            .arg(p("tree.json"))
            .arg("--vis")
            .arg(p("vis.json"))
            .arg("--paths")
            .arg(p("paths.json"))
            .arg("--out")
            .arg(p(name))
            .status()
            .unwrap();
        assert!(r.success());
    }
    let svg = std::fs::read_to_string(p("a.svg")).unwrap();
    assert_eq!(svg, std::fs::read_to_string(p("b.svg")).unwrap());
    let tree: serde_json::Value = serde_json::from_slice(&std::fs::read(p("tree.json")).unwrap()).unwrap();
    assert_eq!(svg.matches("<circle id=\"ball-").count(), tree["nodes"].as_array().unwrap().len());
    let content = vb().args(["content", "--exponent", "1", "--mask"]).arg(p("sq.pbm")).output().unwrap();
    assert!(content.status.success());
    let c: serde_json::Value = serde_json::from_slice(&content.stdout).unwrap();
    assert!(c["dyadic"].as_f64().unwrap() > 0.0);
}

#[test]
fn workers_env_is_accepted_and_missing_inputs_error() {
    let out = vb().env("VB_WORKERS", "1").args(["visibility", "--c", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mask or --config"));
}
