use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vesseltok_core::synth::{densify, synth_graph, SynthSpec};
use vesseltok_tokenizer::*;

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn compression_ratio_matches_reduced_fraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let m = rng.random_range(1..30);
        let counts: Vec<usize> = (0..m).map(|_| rng.random_range(1..100_000)).collect();
        let (k, c) = (rng.random_range(1..1024), rng.random_range(1..16));
        let num: u128 = counts.iter().map(|&n| n as u128).sum::<u128>() * 3;
        let den = (k * c * m) as u128;
        let g = gcd(num, den);
        let expected = (num / g) as f64 / (den / g) as f64;
        let got = compression_ratio(&counts, k, c).unwrap();
        assert!((got - expected).abs() <= f64::EPSILON * expected, "{got} vs {expected}");
    }
    assert_eq!(compression_ratio(&[1000], 10, 3).unwrap(), 100.0);
    assert!(compression_ratio(&[10], 0, 4).is_err());
}

#[test]
fn training_artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let g = densify(&synth_graph(&SynthSpec::Loop { nodes: 10 }, 0.0, 3).unwrap(), 12).unwrap();
    let model = ModelConfig::micro();
    let cfg = TrainConfig { epochs: 5, queries: 64, ..TrainConfig::default() };
    let run = |tag: &str| {
        let out = train(std::slice::from_ref(&g), &model, &cfg).unwrap();
        let ck = dir.path().join(format!("{tag}.vtck"));
        let tk = dir.path().join(format!("{tag}.vttk"));
        let loss = dir.path().join(format!("{tag}.csv"));
        write_checkpoint(&model, &out.params, &ck).unwrap();
        let z = reparameterize(&encode(g.nodes(), &model, &out.params).unwrap(), 4).unwrap();
        write_tokens(&z, &tk).unwrap();
        write_loss_csv(&out.history, &loss).unwrap();
        [ck, tk, loss].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn checkpoint_rejects_config_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.vtck");
    let model = ModelConfig::micro();
    let params = Params::init(&model).unwrap();
    write_checkpoint(&model, &params, &p).unwrap();
    let (loaded, params) = read_checkpoint(&p).unwrap();
    let other = ModelConfig { channel_dim: 3, ..loaded };
    let tensors = params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    assert!(Params::from_tensors(&other, tensors).is_err());
}
