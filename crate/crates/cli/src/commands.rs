use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use vesseltok_core::extract::extract_graph;
use vesseltok_core::field::{self, read_grid, write_grid, GridGeometry};
use vesseltok_core::graph::{load_graph, save_graph, save_graph_with_meta};
use vesseltok_core::metrics::{append_reports_csv, evaluate, write_reports_csv, MetricsReport};
use vesseltok_core::pipeline::roundtrip as run_roundtrip;
use vesseltok_core::synth::{densify, synth_graph, SynthSpec};
use vesseltok_core::{betti_numbers, SpatialGraph};
use vesseltok_tokenizer::{
    compression_ratio, decode_field, parse_config_text, read_checkpoint, read_tokens, reparameterize,
    train_with_progress, write_checkpoint, write_config_text, write_loss_csv, write_tokens, Error as TokError,
    ModelConfig, Params, TrainConfig,
};

use crate::args::*;
use crate::{invalid, Outcome};

pub fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(invalid(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

pub fn require_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(invalid(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load(path: &Path) -> anyhow::Result<SpatialGraph> {
    require_file(path)?;
    load_graph(path).with_context(|| format!("loading {}", path.display()))
}

pub fn print_report(r: &MetricsReport) {
    println!(
        "{}: cldice={:.4} chamfer={:.6} d_beta0={} d_beta1={}{}",
        r.case,
        r.cldice,
        r.chamfer,
        r.delta_beta0,
        r.delta_beta1,
        r.kappa.map(|k| format!(" kappa={k:.4}")).unwrap_or_default()
    );
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    nodes: usize,
    edges: usize,
    beta0: usize,
    beta1: usize,
}

#[derive(Serialize)]
struct Manifest {
    generator: SynthSpec,
    jitter: f64,
    densify: Option<usize>,
    graphs: Vec<ManifestEntry>,
}

pub fn synth(a: SynthArgs) -> anyhow::Result<Outcome> {
    if a.count == 0 {
        return Err(invalid("--count must be at least 1"));
    }
    let spec = match a.kind {
        SynthKind::Tree => SynthSpec::Tree {
            depth: a.depth,
            branching: a.branching,
        },
        SynthKind::Loop => SynthSpec::Loop { nodes: a.nodes },
        SynthKind::Tubes => SynthSpec::ParallelTubes {
            tubes: a.tubes,
            separation: a.separation,
            nodes_per_tube: a.nodes_per_tube,
            bridged: a.bridged,
        },
        SynthKind::Grid => SynthSpec::Grid { nx: a.nx, ny: a.ny },
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut graphs = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i as u64);
        let mut g = synth_graph(&spec, a.jitter, seed)?;
        if let Some(n) = a.densify {
            g = densify(&g, n)?;
        }
        let beta = betti_numbers(&g);
        debug_assert_eq!(beta, spec.expected_betti());
        let file = format!("{}_{i:04}.json", spec.kind_name());
        let meta = serde_json::json!({ "generator": spec, "seed": seed, "beta0": beta.beta0, "beta1": beta.beta1 });
        save_graph_with_meta(&g, Some(meta), a.out.join(&file))?;
        graphs.push(ManifestEntry {
            file,
            seed,
            nodes: g.node_count(),
            edges: g.edge_count(),
            beta0: beta.beta0,
            beta1: beta.beta1,
        });
    }
    let manifest = Manifest {
        generator: spec,
        jitter: a.jitter,
        densify: a.densify,
        graphs,
    };
    let path = a.out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} graphs to {}", a.count, a.out.display());
    Ok(Outcome::Done)
}

pub fn rasterize(a: RasterizeArgs) -> anyhow::Result<Outcome> {
    let g = load(&a.graph)?;
    require_parent(&a.out)?;
    let grid = field::rasterize(&g, &a.field.field_config())?;
    write_grid(&grid, &a.out)?;
    println!("{} occupied voxels of {}", grid.count_occupied(), grid.geometry().len());
    Ok(Outcome::Done)
}

pub fn roundtrip(a: RoundtripArgs) -> anyhow::Result<Outcome> {
    let g = load(&a.graph)?;
    for p in a.out.iter().chain(a.graph_out.iter()) {
        require_parent(p)?;
    }
    if a.chunked == Some(0) {
        return Err(invalid("--chunked must be at least 1"));
    }
    let rt = run_roundtrip(&g, &a.field.metrics_config(), a.chunked)?;
    let report = rt.report.with_case(a.case.unwrap_or_else(|| stem(&a.graph)));
    print_report(&report);
    println!(
        "betti {} -> {}",
        betti_numbers(&g),
        betti_numbers(&rt.extracted)
    );
    if let Some(p) = &a.out {
        append_reports_csv(std::slice::from_ref(&report), p)?;
    }
    if let Some(p) = &a.graph_out {
        save_graph(&rt.extracted, p)?;
    }
    Ok(if report.topology_exact() {
        Outcome::Done
    } else {
        Outcome::TopologyChanged
    })
}

fn base_model(preset: Option<Preset>) -> ModelConfig {
    match preset {
        Some(Preset::Micro) => ModelConfig::micro(),
        _ => ModelConfig::default(),
    }
}

/// Applies explicitly given model flags on top of `base`.
pub fn model_config(base: ModelConfig, m: &ModelArgs) -> ModelConfig {
    ModelConfig {
        token_count: m.k.unwrap_or(base.token_count),
        channel_dim: m.c.unwrap_or(base.channel_dim),
        hidden_dim: m.hidden.unwrap_or(base.hidden_dim),
        heads: m.heads.unwrap_or(base.heads),
        encoder_self_layers: m.encoder_layers.unwrap_or(base.encoder_self_layers),
        decoder_self_layers: m.decoder_layers.unwrap_or(base.decoder_self_layers),
        fourier_frequencies: m.frequencies.unwrap_or(base.fourier_frequencies),
        kl_weight: m.lambda_kl.unwrap_or(base.kl_weight),
        seed: m.seed.unwrap_or(base.seed),
        ..base
    }
}

pub fn train(a: TrainArgs) -> anyhow::Result<Outcome> {
    let (base_m, base_t) = match &a.config {
        Some(path) => {
            require_file(path)?;
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config_text(&text)?
        }
        None => (base_model(a.model.preset), TrainConfig::default()),
    };
    let model = model_config(base_m, &a.model);
    let cfg = TrainConfig {
        epochs: a.epochs.unwrap_or(base_t.epochs),
        lr_peak: a.lr_peak.unwrap_or(base_t.lr_peak),
        lr_min: a.lr_min.unwrap_or(base_t.lr_min),
        weight_decay: a.weight_decay.unwrap_or(base_t.weight_decay),
        queries: a.queries.unwrap_or(base_t.queries),
        pseudo_radius: a.radius.unwrap_or(base_t.pseudo_radius),
        data_seed: a.data_seed.unwrap_or(base_t.data_seed),
        rotate: a.rotate || base_t.rotate,
        ..base_t
    };
    model.validate()?;
    cfg.validate()?;
    let dataset = a.graphs.iter().map(|p| load(p)).collect::<anyhow::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let counts: Vec<usize> = dataset.iter().map(|g| g.node_count()).collect();
    let kappa = compression_ratio(&counts, model.token_count, model.channel_dim)?;
    println!(
        "training on {} graphs, {} parameters, compression {kappa:.3}",
        dataset.len(),
        Params::init(&model)?.scalar_count()
    );
    let every = (cfg.epochs / 10).max(1);
    let outcome = train_with_progress(&dataset, &model, &cfg, Params::init(&model)?, |e| {
        if e.epoch % every == 0 || e.epoch + 1 == cfg.epochs {
            eprintln!("epoch {:>5}  bce {:.5}  kl {:.4}  total {:.5}", e.epoch, e.bce, e.kl, e.total);
        }
    })?;
    write_checkpoint(&model, &outcome.params, a.out.join("model.vtck"))?;
    write_loss_csv(&outcome.history, a.out.join("loss.csv"))?;
    let config_path = a.out.join("config.txt");
    fs::write(&config_path, write_config_text(&model, &cfg))
        .with_context(|| format!("writing {}", config_path.display()))?;
    println!("wrote {}", a.out.display());
    Ok(Outcome::Done)
}

pub fn encode(a: EncodeArgs) -> anyhow::Result<Outcome> {
    require_file(&a.checkpoint)?;
    let g = load(&a.graph)?;
    require_parent(&a.out)?;
    let (model, params) = read_checkpoint(&a.checkpoint)?;
    let latent = reparameterize(&vesseltok_tokenizer::encode(g.nodes(), &model, &params)?, a.seed)?;
    write_tokens(&latent, &a.out)?;
    println!(
        "{} nodes -> {}x{} tokens",
        g.node_count(),
        model.token_count,
        model.channel_dim
    );
    Ok(Outcome::Done)
}

pub fn decode(a: DecodeArgs) -> anyhow::Result<Outcome> {
    require_file(&a.tokens)?;
    require_file(&a.checkpoint)?;
    require_parent(&a.out)?;
    let (model, params) = read_checkpoint(&a.checkpoint)?;
    let tokens = read_tokens(&a.tokens)?;
    let expect = |flag: Option<usize>, have: usize, name: &str| match flag {
        Some(v) if v != have => Err(TokError::Config(format!("--{name} {v} but the checkpoint has {have}"))),
        _ => Ok(()),
    };
    expect(a.k, model.token_count, "k")?;
    expect(a.c, model.channel_dim, "c")?;
    if (tokens.token_count(), tokens.channel_dim()) != (model.token_count, model.channel_dim) {
        return Err(TokError::Config(format!(
            "tokens are {}x{} but the checkpoint expects {}x{}",
            tokens.token_count(),
            tokens.channel_dim(),
            model.token_count,
            model.channel_dim
        ))
        .into());
    }
    let z = tokens.sample.as_ref().unwrap_or(&tokens.mu);
    let geometry = GridGeometry::cube(a.grid)?;
    let field = decode_field(z, &geometry, &model, &params)?;
    write_grid(&field, &a.out)?;
    println!("decoded {}³ grid, {} voxels above 0.5", a.grid, field.count_occupied());
    Ok(Outcome::Done)
}

pub fn extract(a: ExtractArgs) -> anyhow::Result<Outcome> {
    require_file(&a.grid)?;
    require_parent(&a.out)?;
    let grid = read_grid(&a.grid)?;
    let g = extract_graph(&grid, a.tau, a.min_component)?;
    save_graph(&g, &a.out)?;
    println!(
        "{} nodes, {} edges, betti {}",
        g.node_count(),
        g.edge_count(),
        betti_numbers(&g)
    );
    Ok(Outcome::Done)
}

pub fn eval(a: EvalArgs) -> anyhow::Result<Outcome> {
    let pred = load(&a.pred)?;
    let gt = load(&a.gt)?;
    require_parent(&a.out)?;
    let report = evaluate(&pred, &gt, &a.field.metrics_config())?.with_case(a.case.unwrap_or_else(|| stem(&a.pred)));
    print_report(&report);
    write_reports_csv(std::slice::from_ref(&report), &a.out)?;
    Ok(Outcome::Done)
}
