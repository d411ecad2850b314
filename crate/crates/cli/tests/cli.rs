use std::path::Path;
use std::process::Command;

use vesseltok_core::graph::{load_graph, save_graph};
use vesseltok_core::metrics::read_reports_csv;
use vesseltok_core::synth::{synth_graph, SynthSpec};
use vesseltok_core::SpatialGraph;
use vesseltok_tokenizer::compression_ratio;

fn vesseltok(args: &[&str]) -> (i32, String, String) {
    vesseltok_env(args, &[])
}

fn vesseltok_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vesseltok"))
        .args(args)
        .envs(env.iter().copied())
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_graph(dir: &Path, name: &str, g: &SpatialGraph) -> String {
    let p = dir.join(name);
    save_graph(g, &p).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn synth_writes_graphs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let (code, _, err) = vesseltok(&["synth", "--kind", "loop", "--count", "10", "--jitter", "0.01", "--seed", "3", "--out", s(out)]);
        assert_eq!(code, 0, "{err}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let entries = manifest["graphs"].as_array().unwrap();
    assert_eq!(entries.len(), 10);
    for e in entries {
        assert_eq!((e["beta0"].as_u64(), e["beta1"].as_u64()), (Some(1), Some(1)));
        let file = e["file"].as_str().unwrap();
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
        assert_eq!(load_graph(a.join(file)).unwrap().node_count(), 24);
    }
    let (code, _, _) = vesseltok(&["synth", "--kind", "tree", "--count", "0", "--out", s(&a)]);
    assert_eq!(code, 1);
}

#[test]
fn roundtrip_exit_codes_follow_topology() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let tree = write_graph(dir.path(), "tree.json", &synth_graph(&SynthSpec::Tree { depth: 2, branching: 3 }, 0.0, 0).unwrap());
    let (code, out, err) = vesseltok(&["roundtrip", &tree, "--radius", "0.016", "--grid", "128", "--out", s(&csv)]);
    assert_eq!(code, 0, "{out}{err}");

    // tubes closer than 2r fuse into one component
    let tubes = SynthSpec::ParallelTubes { tubes: 2, separation: 0.02, nodes_per_tube: 9, bridged: false };
    let tubes = write_graph(dir.path(), "tubes.json", &synth_graph(&tubes, 0.0, 0).unwrap());
    let (code, _, _) = vesseltok(&["roundtrip", &tubes, "--radius", "0.016", "--grid", "128", "--out", s(&csv)]);
    assert_eq!(code, 3);

    let rows = read_reports_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].case.as_str(), rows[0].d_beta0, rows[0].d_beta1), ("tree", 0, 0));
    assert_eq!((rows[1].case.as_str(), rows[1].d_beta0), ("tubes", 1));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().matches("case,").count(), 1);

    let (code, _, err) = vesseltok(&["roundtrip", &tree, "--grid", "128", "--chunked", "48"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"nodes": [], "edges": []}"#).unwrap();
    assert_eq!(vesseltok(&["roundtrip", s(&empty)]).0, 1);
    assert_eq!(vesseltok(&["roundtrip", "/nonexistent/graph.json"]).0, 1);
    assert_eq!(vesseltok(&["roundtrip"]).0, 1);
    let out = dir.path().join("r.csv");
    assert_eq!(vesseltok(&["ablate-radius", "--radii", "0.016,-0.01", "--out", s(&out)]).0, 1);
    assert_eq!(vesseltok(&["ablate-radius", "--radii", "0", "--out", s(&out)]).0, 1);
    let tree = write_graph(dir.path(), "t.json", &synth_graph(&SynthSpec::Tree { depth: 1, branching: 2 }, 0.0, 0).unwrap());
    assert_eq!(vesseltok(&["rasterize", &tree, "--radius", "-1", "--out", s(&dir.path().join("g"))]).0, 1);
    assert_eq!(vesseltok_env(&["roundtrip", &tree], &[("VESSELTOK_THREADS", "zero")]).0, 1);
    assert_eq!(vesseltok_env(&["roundtrip", &tree], &[("VESSELTOK_THREADS", "1")]).0, 0);
}

#[test]
fn single_radius_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let (code, stdout, err) = vesseltok(&["ablate-radius", "--radii", "0.016", "--grid", "128", "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    assert!(!stdout.contains("trend"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("radius,cases,mean_d_beta0,mean_d_beta1,mean_cldice,merged\n"));
}

#[test]
fn train_encode_decode_extract_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = write_graph(d, "loop.json", &synth_graph(&SynthSpec::Loop { nodes: 12 }, 0.0, 0).unwrap());
    let model = d.join("model");
    let (code, _, err) = vesseltok(&[
        "train", &g, "--preset", "micro", "--k", "6", "--epochs", "3", "--queries", "64", "--radius", "0.06", "--out", s(&model),
    ]);
    assert_eq!(code, 0, "{err}");
    for f in ["model.vtck", "loss.csv", "config.txt"] {
        assert!(model.join(f).is_file(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(model.join("loss.csv")).unwrap().lines().count(), 4);
    let config = std::fs::read_to_string(model.join("config.txt")).unwrap();
    assert!(config.contains("token_count = 6"), "{config}");

    // retraining from the written config file reproduces the checkpoint
    let again = d.join("again");
    let (code, _, err) = vesseltok(&["train", &g, "--config", s(&model.join("config.txt")), "--out", s(&again)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read(model.join("model.vtck")).unwrap(), std::fs::read(again.join("model.vtck")).unwrap());

    let ck = model.join("model.vtck");
    let tokens = d.join("z.vttk");
    assert_eq!(vesseltok(&["encode", &g, "--checkpoint", s(&ck), "--seed", "1", "--out", s(&tokens)]).0, 0);
    let field = d.join("field.vtgr");
    assert_eq!(vesseltok(&["decode", s(&tokens), "--checkpoint", s(&ck), "--c", "3", "--grid", "16", "--out", s(&field)]).0, 1);
    let (code, _, err) = vesseltok(&["decode", s(&tokens), "--checkpoint", s(&ck), "--c", "2", "--grid", "16", "--out", s(&field)]);
    assert_eq!(code, 0, "{err}");

    // tokens from a model with another channel count are rejected
    let wide = d.join("wide");
    assert_eq!(vesseltok(&["train", &g, "--preset", "micro", "--c", "3", "--epochs", "1", "--queries", "16", "--out", s(&wide)]).0, 0);
    assert_eq!(vesseltok(&["decode", s(&tokens), "--checkpoint", s(&wide.join("model.vtck")), "--grid", "16", "--out", s(&field)]).0, 1);

    let pred = d.join("pred.json");
    let (code, _, err) = vesseltok(&["extract", s(&field), "--out", s(&pred)]);
    assert_eq!(code, 0, "{err}");
    let report = d.join("eval.csv");
    let (code, _, err) = vesseltok(&["eval", "--pred", &g, "--gt", &g, "--grid", "64", "--out", s(&report)]);
    assert_eq!(code, 0, "{err}");
    let rows = read_reports_csv(&report).unwrap();
    assert_eq!(rows[0].cldice, 1.0);
    assert_eq!(rows[0].chamfer, 0.0);

    assert_eq!(vesseltok(&["decode", s(&tokens), "--checkpoint", s(&d.join("missing.vtck")), "--out", s(&field)]).0, 1);
}

#[test]
fn latent_sweep_reports_kappa_from_its_own_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let graphs: Vec<String> = [(SynthSpec::Loop { nodes: 10 }, "a"), (SynthSpec::Tree { depth: 3, branching: 2 }, "b")]
        .iter()
        .map(|(spec, name)| write_graph(d, &format!("{name}.json"), &synth_graph(spec, 0.0, 0).unwrap()))
        .collect();
    let out = d.join("latent.csv");
    let mut args = vec!["ablate-latent"];
    args.extend(graphs.iter().map(String::as_str));
    args.extend(["--ks", "4,8", "--cs", "2", "--epochs", "1", "--queries", "32", "--grid", "16", "--out", s(&out)]);
    let (code, _, err) = vesseltok(&args);
    assert_eq!(code, 0, "{err}");

    let mut reader = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let kappa = |i: usize| rows[i][8].parse::<f64>().unwrap();
    assert_eq!(kappa(0), compression_ratio(&[10, 15], 4, 2).unwrap());
    assert_eq!(kappa(0), 2.0 * kappa(1));
    assert_eq!(&rows[2][0], "reference");
    assert_eq!((&rows[2][1], &rows[2][2], &rows[2][4], &rows[2][8]), ("512", "4", "96.61", "7.03"));

    let (code, _, _) = vesseltok(&["ablate-latent", &graphs[0], "--ks", "11", "--out", s(&out)]);
    assert_eq!(code, 1);
}
