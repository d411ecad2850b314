use diffkit::{finite_diff_check, DiffError, Result, Tape, Tensor, Var, LAYER_NORM_EPS};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: Vec<usize>, scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

/// Contracts any tensor to a scalar with fixed pseudo-random weights, so
/// that every output coordinate influences the checked gradient.
fn weighted_sum(t: &mut Tape, y: Var, seed: u64) -> Result<Var> {
    let shape = t.shape(y).to_vec();
    let w = random(&mut ChaCha8Rng::seed_from_u64(seed), shape, 1.0);
    let wv = t.constant(w);
    let p = t.mul(y, wv)?;
    t.sum(p)
}

const FD_EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matmul_gradients(seed in any::<u64>(), m in 1usize..5, k in 1usize..5, n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random(&mut rng, vec![m, k], 1.0);
        let b = random(&mut rng, vec![k, n], 1.0);
        let bc = b.clone();
        let err = finite_diff_check(|t, x| {
            let bv = t.constant(bc.clone());
            let y = t.matmul(x, bv)?;
            weighted_sum(t, y, seed)
        }, &a, FD_EPS).unwrap();
        prop_assert!(err < TOL, "lhs {}", err);
        let ac = a.clone();
        let err = finite_diff_check(|t, x| {
            let av = t.constant(ac.clone());
            let y = t.matmul(av, x)?;
            weighted_sum(t, y, seed)
        }, &b, FD_EPS).unwrap();
        prop_assert!(err < TOL, "rhs {}", err);
    }

    #[test]
    fn elementwise_gradients(seed in any::<u64>(), rows in 1usize..4, cols in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&mut rng, vec![rows, cols], 2.0);
        let other = random(&mut rng, vec![rows, cols], 2.0);
        let row = random(&mut rng, vec![cols], 1.0);
        let unary: Vec<(&str, Box<dyn Fn(&mut Tape, Var) -> Result<Var>>)> = vec![
            ("exp", Box::new(|t, v| t.exp(v))),
            ("sigmoid", Box::new(|t, v| t.sigmoid(v))),
            ("gelu", Box::new(|t, v| t.gelu(v))),
            ("scale", Box::new(|t, v| t.scale(v, -1.7))),
            ("add_scalar", Box::new(|t, v| t.add_scalar(v, 0.3))),
            ("log", Box::new(|t, v| { let e = t.exp(v)?; t.log(e) })),
            ("square", Box::new(|t, v| t.mul(v, v))),
            ("softmax0", Box::new(|t, v| t.softmax(v, 0))),
            ("softmax1", Box::new(|t, v| t.softmax(v, 1))),
            ("mean", Box::new(|t, v| t.mean(v))),
        ];
        for (name, f) in &unary {
            let err = finite_diff_check(|t, v| { let y = f(t, v)?; weighted_sum(t, y, seed) }, &x, FD_EPS).unwrap();
            prop_assert!(err < TOL, "{} {}", name, err);
        }
        let o = other.clone();
        let binary: Vec<(&str, Box<dyn Fn(&mut Tape, Var, Var) -> Result<Var>>)> = vec![
            ("add", Box::new(|t, a, b| t.add(a, b))),
            ("sub", Box::new(|t, a, b| t.sub(a, b))),
            ("mul", Box::new(|t, a, b| t.mul(a, b))),
        ];
        for (name, f) in &binary {
            let err = finite_diff_check(|t, v| {
                let ov = t.constant(o.clone());
                let y = f(t, v, ov)?;
                weighted_sum(t, y, seed)
            }, &x, FD_EPS).unwrap();
            prop_assert!(err < TOL, "{} {}", name, err);
            let xc = x.clone();
            let err = finite_diff_check(|t, v| {
                let xv = t.constant(xc.clone());
                let y = f(t, xv, v)?;
                weighted_sum(t, y, seed)
            }, &other, FD_EPS).unwrap();
            prop_assert!(err < TOL, "{} rhs {}", name, err);
        }
        let xc = x.clone();
        let err = finite_diff_check(|t, v| {
            let xv = t.constant(xc.clone());
            let y = t.add_row(xv, v)?;
            weighted_sum(t, y, seed)
        }, &row, FD_EPS).unwrap();
        prop_assert!(err < TOL, "add_row {}", err);
    }

    #[test]
    fn layout_op_gradients(seed in any::<u64>(), rows in 1usize..4, cols in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&mut rng, vec![rows, cols], 1.0);
        let err = finite_diff_check(|t, v| { let y = t.transpose(v)?; weighted_sum(t, y, seed) }, &x, FD_EPS).unwrap();
        prop_assert!(err < TOL);
        let err = finite_diff_check(|t, v| {
            let a = t.slice_cols(v, 0, 1)?;
            let b = t.slice_cols(v, 1, cols - 1)?;
            let y = t.concat_cols(&[b, a, b])?;
            weighted_sum(t, y, seed)
        }, &x, FD_EPS).unwrap();
        prop_assert!(err < TOL);
        let err = finite_diff_check(|t, v| {
            let c = t.clamp(v, -0.5, 0.5)?;
            weighted_sum(t, c, seed)
        }, &x, FD_EPS).unwrap();
        // only coordinates within eps of a clamp bound could disagree
        let near_bound = x.data().iter().any(|v| (v.abs() - 0.5).abs() < 2.0 * FD_EPS);
        prop_assert!(near_bound || err < TOL);
    }

    #[test]
    fn layer_norm_gradients(seed in any::<u64>(), rows in 1usize..4, cols in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&mut rng, vec![rows, cols], 1.0);
        let gamma = random(&mut rng, vec![cols], 1.5);
        let beta = random(&mut rng, vec![cols], 0.5);
        let (g, b) = (gamma.clone(), beta.clone());
        let err = finite_diff_check(|t, v| {
            let gv = t.constant(g.clone());
            let bv = t.constant(b.clone());
            let y = t.layer_norm(v, gv, bv)?;
            weighted_sum(t, y, seed)
        }, &x, FD_EPS).unwrap();
        prop_assert!(err < TOL, "x {}", err);
        let (xc, b) = (x.clone(), beta.clone());
        let err = finite_diff_check(|t, v| {
            let xv = t.constant(xc.clone());
            let bv = t.constant(b.clone());
            let y = t.layer_norm(xv, v, bv)?;
            weighted_sum(t, y, seed)
        }, &gamma, FD_EPS).unwrap();
        prop_assert!(err < TOL, "gamma {}", err);
        let (xc, g) = (x.clone(), gamma.clone());
        let err = finite_diff_check(|t, v| {
            let xv = t.constant(xc.clone());
            let gv = t.constant(g.clone());
            let y = t.layer_norm(xv, gv, v)?;
            weighted_sum(t, y, seed)
        }, &beta, FD_EPS).unwrap();
        prop_assert!(err < TOL, "beta {}", err);
    }

    #[test]
    fn softmax_rows_sum_to_one(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&mut rng, vec![rows, cols], 30.0);
        let mut t = Tape::new();
        let xv = t.constant(x.clone());
        let s = t.softmax(xv, 1).unwrap();
        let y = t.value(s);
        for r in 0..rows {
            let row = &x.data()[r * cols..(r + 1) * cols];
            let total: f64 = row.iter().map(|v| v.exp()).sum();
            let sum: f64 = (0..cols).map(|c| y.at(r, c)).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            for c in 0..cols {
                prop_assert!((y.at(r, c) - row[c].exp() / total).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn matmul_matches_naive_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random(&mut rng, vec![4, 5], 1.0);
    let b = random(&mut rng, vec![5, 3], 1.0);
    let mut t = Tape::new();
    let (av, bv) = (t.constant(a.clone()), t.constant(b.clone()));
    let c = t.matmul(av, bv).unwrap();
    for i in 0..4 {
        for j in 0..3 {
            let naive: f64 = (0..5).map(|p| a.at(i, p) * b.at(p, j)).sum();
            assert!((t.value(c).at(i, j) - naive).abs() <= 1e-12);
        }
    }
}

#[test]
fn batched_matmul_flattens_leading_axes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random(&mut rng, vec![2, 3, 4], 1.0);
    let b = random(&mut rng, vec![4, 2], 1.0);
    let mut t = Tape::new();
    let (av, bv) = (t.constant(a), t.constant(b));
    let c = t.matmul(av, bv).unwrap();
    assert_eq!(t.shape(c), &[2, 3, 2]);
}

#[test]
fn layer_norm_output_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random(&mut rng, vec![6, 16], 4.0);
    let mut t = Tape::new();
    let xv = t.constant(x.clone());
    let g = t.constant(Tensor::filled(vec![16], 1.0));
    let b = t.constant(Tensor::zeros(vec![16]));
    let y = t.layer_norm(xv, g, b).unwrap();
    for r in 0..6 {
        let row: Vec<f64> = (0..16).map(|c| t.value(y).at(r, c)).collect();
        let mean = row.iter().sum::<f64>() / 16.0;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 16.0;
        let xr: Vec<f64> = (0..16).map(|c| x.at(r, c)).collect();
        let xm = xr.iter().sum::<f64>() / 16.0;
        let xvar = xr.iter().map(|v| (v - xm).powi(2)).sum::<f64>() / 16.0;
        assert!(mean.abs() < 1e-10);
        // unit variance up to the stabilizer inside the square root
        assert!((var - xvar / (xvar + LAYER_NORM_EPS)).abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-4);
    }
}

#[test]
fn gradient_check_reference_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random(&mut rng, vec![7], 3.0);
    let err = finite_diff_check(|t, v| { let s = t.mul(v, v)?; t.sum(s) }, &x, 1e-5).unwrap();
    assert!(err < 1e-8, "{err}");
    let err = finite_diff_check(|t, v| { let s = t.scale(v, 2.5)?; t.sum(s) }, &x, 1e-5).unwrap();
    assert!(err < 1e-10, "{err}");
}

/// Single-head attention with a residual, layer norm and GELU projection.
fn attention_block(t: &mut Tape, x: Var, w: &[Tensor; 4]) -> Result<Var> {
    let [wq, wk, wv, wo] = w.clone().map(|m| t.constant(m));
    let q = t.matmul(x, wq)?;
    let k = t.matmul(x, wk)?;
    let v = t.matmul(x, wv)?;
    let kt = t.transpose(k)?;
    let s = t.matmul(q, kt)?;
    let s = t.scale(s, 0.5)?;
    let a = t.softmax(s, 1)?;
    let h = t.matmul(a, v)?;
    let h = t.add(h, x)?;
    let d = t.shape(x)[1];
    let g = t.constant(Tensor::filled(vec![d], 1.1));
    let b = t.constant(Tensor::filled(vec![d], -0.1));
    let h = t.layer_norm(h, g, b)?;
    let h = t.matmul(h, wo)?;
    let h = t.gelu(h)?;
    let h = t.sigmoid(h)?;
    t.mean(h)
}

#[test]
fn attention_block_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random(&mut rng, vec![5, 4], 1.0);
    let w = [0, 1, 2, 3].map(|_| random(&mut rng, vec![4, 4], 0.8));
    let err = finite_diff_check(|t, v| attention_block(t, v, &w), &x, 1e-5).unwrap();
    assert!(err < 1e-6, "{err}");
}

#[test]
fn backward_is_bit_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random(&mut rng, vec![5, 4], 1.0);
    let w = [0, 1, 2, 3].map(|_| random(&mut rng, vec![4, 4], 0.8));
    let run = || {
        let mut t = Tape::new();
        let v = t.leaf(x.clone());
        let y = attention_block(&mut t, v, &w).unwrap();
        t.backward(y).unwrap().get(v).unwrap().clone()
    };
    assert_eq!(run(), run());
}

#[test]
fn errors_name_shapes() {
    let mut t = Tape::new();
    let a = t.constant(Tensor::zeros(vec![2, 3]));
    let b = t.constant(Tensor::zeros(vec![3, 2]));
    match t.add(a, b) {
        Err(DiffError::ShapeMismatch { lhs, rhs, .. }) => {
            assert_eq!((lhs, rhs), (vec![2, 3], vec![3, 2]));
        }
        other => panic!("{other:?}"),
    }
    assert!(t.slice_cols(a, 2, 2).is_err());
    assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
}
