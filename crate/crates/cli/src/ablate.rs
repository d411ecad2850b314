//! The pseudo-radius and latent-size sweeps.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use vesseltok_core::extract::{extract_graph, DEFAULT_TAU};
use vesseltok_core::field::GridGeometry;
use vesseltok_core::metrics::{evaluate, write_reports_csv, MetricsConfig, MetricsReport, CLDICE_EPSILON};
use vesseltok_core::pipeline::roundtrip;
use vesseltok_core::synth::{densify, radius_phantoms, synth_graph, SynthSpec};
use vesseltok_core::{betti_numbers, SpatialGraph};
use vesseltok_tokenizer::{compression_ratio, decode_field, encode, reparameterize, train, ModelConfig, TrainConfig};

use crate::args::{AblateLatentArgs, AblateRadiusArgs};
use crate::commands::{load, require_parent, stem};
use crate::{invalid, Outcome};

/// Full-scale operating point quoted next to the toy sweep.
const REFERENCE_K: usize = 512;
const REFERENCE_C: usize = 4;
const REFERENCE_CLDICE_PCT: f64 = 96.61;
const REFERENCE_KAPPA: f64 = 7.03;

#[derive(Serialize)]
struct RadiusRow {
    radius: f64,
    cases: usize,
    mean_d_beta0: f64,
    mean_d_beta1: f64,
    mean_cldice: f64,
    merged: usize,
}

fn named_graphs(paths: &[std::path::PathBuf]) -> anyhow::Result<Vec<(String, SpatialGraph)>> {
    paths.iter().map(|p| Ok((stem(p), load(p)?))).collect()
}

pub fn radius(a: AblateRadiusArgs) -> anyhow::Result<Outcome> {
    if a.radii.is_empty() {
        return Err(invalid("--radii must not be empty"));
    }
    if let Some(r) = a.radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(invalid(format!("radius {r} must be positive")));
    }
    require_parent(&a.out)?;
    if let Some(p) = &a.cases_out {
        require_parent(p)?;
    }
    let cases = if a.graphs.is_empty() {
        radius_phantoms()
            .into_iter()
            .map(|(name, spec)| Ok((name, synth_graph(&spec, 0.0, 0)?)))
            .collect::<anyhow::Result<Vec<_>>>()?
    } else {
        named_graphs(&a.graphs)?
    };

    let mut rows = Vec::with_capacity(a.radii.len());
    let mut reports = Vec::new();
    for &r in &a.radii {
        let cfg = MetricsConfig {
            epsilon: CLDICE_EPSILON,
            pseudo_radius: r,
            grid_dims: [a.grid; 3],
            tau: a.tau,
        };
        let mut merged = 0;
        let mut sums = (0.0, 0.0, 0.0);
        for (name, g) in &cases {
            let rt = roundtrip(g, &cfg, None).with_context(|| format!("round trip of {name} at r={r}"))?;
            let (truth, got) = (betti_numbers(g), betti_numbers(&rt.extracted));
            if got.beta0 < truth.beta0 || got.beta1 < truth.beta1 {
                merged += 1;
            }
            sums.0 += rt.report.delta_beta0 as f64;
            sums.1 += rt.report.delta_beta1 as f64;
            sums.2 += rt.report.cldice;
            reports.push(rt.report.with_case(format!("{name}@r={r}")));
        }
        let n = cases.len() as f64;
        let row = RadiusRow {
            radius: r,
            cases: cases.len(),
            mean_d_beta0: sums.0 / n,
            mean_d_beta1: sums.1 / n,
            mean_cldice: sums.2 / n,
            merged,
        };
        println!(
            "r={:<6} mean|d_beta1|={:.3} mean|d_beta0|={:.3} cldice={:.4} merged={}/{}",
            row.radius, row.mean_d_beta1, row.mean_d_beta0, row.mean_cldice, row.merged, row.cases
        );
        rows.push(row);
    }

    let mut w = csv::Writer::from_path(&a.out)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    if let Some(p) = &a.cases_out {
        write_reports_csv(&reports, p)?;
    }

    if rows.len() > 1 {
        let mut by_radius: Vec<&RadiusRow> = rows.iter().collect();
        by_radius.sort_by(|x, y| x.radius.total_cmp(&y.radius));
        if let Some(w) = by_radius.windows(2).find(|w| w[0].mean_d_beta1 > w[1].mean_d_beta1) {
            bail!(
                "loop error grows as the radius shrinks: {} at r={} vs {} at r={}",
                w[0].mean_d_beta1,
                w[0].radius,
                w[1].mean_d_beta1,
                w[1].radius
            );
        }
        println!("trend ok: loop error is non-increasing as r decreases");
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct LatentRow {
    case: String,
    k: usize,
    c: usize,
    cldice: Option<f64>,
    cldice_pct: f64,
    chamfer: Option<f64>,
    d_beta0: Option<f64>,
    d_beta1: Option<f64>,
    kappa: f64,
    source: &'static str,
}

fn toy_dataset() -> anyhow::Result<Vec<(String, SpatialGraph)>> {
    let specs = [
        ("tree", SynthSpec::Tree { depth: 3, branching: 2 }),
        ("loop", SynthSpec::Loop { nodes: 12 }),
        (
            "tubes",
            SynthSpec::ParallelTubes {
                tubes: 2,
                separation: 0.5,
                nodes_per_tube: 8,
                bridged: true,
            },
        ),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| Ok((name.to_string(), densify(&synth_graph(&spec, 0.0, 0)?, 40)?)))
        .collect()
}

/// Small model used for every cell of the sweep.
fn cell_model(k: usize, c: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        token_count: k,
        channel_dim: c,
        hidden_dim: 32,
        heads: 4,
        encoder_self_layers: 1,
        decoder_self_layers: 2,
        fourier_frequencies: 6,
        seed,
        ..ModelConfig::default()
    }
}

pub fn latent(a: AblateLatentArgs) -> anyhow::Result<Outcome> {
    if a.ks.is_empty() || a.cs.is_empty() {
        return Err(invalid("--ks and --cs must not be empty"));
    }
    if a.ks.iter().chain(&a.cs).any(|&v| v == 0) {
        return Err(invalid("K and C must be at least 1"));
    }
    require_parent(&a.out)?;
    let dataset = if a.graphs.is_empty() {
        toy_dataset()?
    } else {
        named_graphs(&a.graphs)?
    };
    let graphs: Vec<SpatialGraph> = dataset.iter().map(|(_, g)| g.clone()).collect();
    let counts: Vec<usize> = graphs.iter().map(|g| g.node_count()).collect();
    let smallest = counts.iter().copied().min().unwrap_or(0);
    if let Some(k) = a.ks.iter().find(|&&k| k > smallest) {
        return Err(invalid(format!("K={k} exceeds the smallest graph ({smallest} nodes)")));
    }
    let train_cfg = TrainConfig {
        epochs: a.epochs,
        queries: a.queries,
        lr_peak: a.lr_peak,
        lr_min: a.lr_min,
        pseudo_radius: a.radius,
        data_seed: a.seed,
        ..TrainConfig::default()
    };
    train_cfg.validate()?;
    let metrics = MetricsConfig {
        epsilon: CLDICE_EPSILON,
        pseudo_radius: a.radius,
        grid_dims: [a.grid; 3],
        tau: DEFAULT_TAU,
    };
    let geometry = GridGeometry::cube(a.grid)?;
    let cells: Vec<(usize, usize)> = a.ks.iter().flat_map(|&k| a.cs.iter().map(move |&c| (k, c))).collect();

    let results = cells
        .par_iter()
        .map(|&(k, c)| -> anyhow::Result<LatentRow> {
            let model = cell_model(k, c, a.seed);
            let trained = train(&graphs, &model, &train_cfg)?;
            let reports = graphs
                .iter()
                .map(|g| -> anyhow::Result<MetricsReport> {
                    let z = reparameterize(&encode(g.nodes(), &model, &trained.params)?, a.seed)?;
                    let sample = z.sample.as_ref().unwrap_or(&z.mu);
                    let field = decode_field(sample, &geometry, &model, &trained.params)?;
                    let pred = extract_graph(&field, DEFAULT_TAU, 0)?;
                    Ok(evaluate(&pred, g, &metrics)?)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let n = reports.len() as f64;
            let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
            let cldice = mean(&|r| r.cldice);
            Ok(LatentRow {
                case: format!("K{k}_C{c}"),
                k,
                c,
                cldice: Some(cldice),
                cldice_pct: 100.0 * cldice,
                chamfer: Some(mean(&|r| r.chamfer)),
                d_beta0: Some(mean(&|r| r.delta_beta0 as f64)),
                d_beta1: Some(mean(&|r| r.delta_beta1 as f64)),
                kappa: compression_ratio(&counts, k, c)?,
                source: "toy",
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let reference = LatentRow {
        case: "reference".into(),
        k: REFERENCE_K,
        c: REFERENCE_C,
        cldice: Some(REFERENCE_CLDICE_PCT / 100.0),
        cldice_pct: REFERENCE_CLDICE_PCT,
        chamfer: None,
        d_beta0: None,
        d_beta1: None,
        kappa: REFERENCE_KAPPA,
        source: "full-scale citation",
    };
    println!("{:<12} {:>5} {:>3} {:>9} {:>10} {:>8}", "case", "K", "C", "clDice%", "chamfer", "kappa");
    let mut w = csv::Writer::from_path(&a.out)?;
    for row in results.iter().chain(std::iter::once(&reference)) {
        println!(
            "{:<12} {:>5} {:>3} {:>9.2} {:>10} {:>8.3}  {}",
            row.case,
            row.k,
            row.c,
            row.cldice_pct,
            row.chamfer.map_or("-".into(), |v| format!("{v:.5}")),
            row.kappa,
            row.source
        );
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(Outcome::Done)
}
