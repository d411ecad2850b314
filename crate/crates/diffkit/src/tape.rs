use crate::error::{DiffError, Result};
use crate::gemm::gemm;
use crate::tensor::Tensor;

/// Variance stabilizer inside the layer-norm square root.
pub const LAYER_NORM_EPS: f64 = 1e-5;

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Exp(Var),
    Log(Var),
    Sigmoid(Var),
    Gelu(Var),
    Clamp(Var, f64, f64),
    Softmax { x: Var, axis: usize },
    LayerNorm { x: Var, gamma: Var, beta: Var, xhat: Vec<f64>, inv_std: Vec<f64> },
    Transpose(Var),
    SliceCols { x: Var, start: usize },
    ConcatCols(Vec<Var>),
    Sum(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records operations for a single forward/backward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every recorded value that needs one.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> DiffError {
    DiffError::ShapeMismatch {
        op,
        lhs: a.shape().to_vec(),
        rhs: b.shape().to_vec(),
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `(outer, axis_len, inner)` strides for iterating along `axis`.
fn axis_split(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records a differentiable input.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push_raw(value, Op::Leaf, true)
    }

    /// Records an input that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_raw(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// The single element of a one-element value.
    pub fn scalar(&self, v: Var) -> Result<f64> {
        let t = self.value(v);
        if t.len() != 1 {
            return Err(DiffError::NotScalar(t.shape().to_vec()));
        }
        Ok(t.data()[0])
    }

    fn push_raw(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, name: &'static str, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(DiffError::NonFinite { op: name });
        }
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push_raw(value, op, requires_grad))
    }

    /// `a · b` with `a` of shape `[.., k]` (leading axes flattened into rows)
    /// and `b` of shape `[k, n]`; the result keeps `a`'s leading axes.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape().is_empty() || tb.shape().len() != 2 || ta.cols() != tb.shape()[0] {
            return Err(mismatch("matmul", ta, tb));
        }
        let (m, k, n) = (ta.rows(), ta.cols(), tb.shape()[1]);
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, ta.data(), false, tb.data(), false, &mut out, false);
        let mut shape = ta.shape().to_vec();
        *shape.last_mut().unwrap() = n;
        let value = Tensor::new(shape, out)?;
        self.push("matmul", value, Op::MatMul(a, b), &[a, b])
    }

    fn zip_same(&mut self, name: &'static str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch(name, ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("add", a, b, |x, y| x + y)?;
        self.push("add", v, Op::Add(a, b), &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("sub", a, b, |x, y| x - y)?;
        self.push("sub", v, Op::Sub(a, b), &[a, b])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_same("mul", a, b, |x, y| x * y)?;
        self.push("mul", v, Op::Mul(a, b), &[a, b])
    }

    /// Adds a vector of length `cols` to every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        let (tx, tr) = (self.value(x), self.value(row));
        if tr.len() != tx.cols() || tr.rows() != 1 {
            return Err(mismatch("add_row", tx, tr));
        }
        let n = tx.cols();
        let data = tx
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| v + tr.data()[i % n])
            .collect();
        let v = Tensor::new(tx.shape().to_vec(), data)?;
        self.push("add_row", v, Op::AddRow(x, row), &[x, row])
    }

    pub fn scale(&mut self, x: Var, s: f64) -> Result<Var> {
        let v = self.value(x).map(|v| v * s);
        self.push("scale", v, Op::Scale(x, s), &[x])
    }

    pub fn add_scalar(&mut self, x: Var, s: f64) -> Result<Var> {
        let v = self.value(x).map(|v| v + s);
        self.push("add_scalar", v, Op::AddScalar(x), &[x])
    }

    pub fn exp(&mut self, x: Var) -> Result<Var> {
        let v = self.value(x).map(f64::exp);
        self.push("exp", v, Op::Exp(x), &[x])
    }

    pub fn log(&mut self, x: Var) -> Result<Var> {
        let v = self.value(x).map(f64::ln);
        self.push("log", v, Op::Log(x), &[x])
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let v = self.value(x).map(sigmoid);
        self.push("sigmoid", v, Op::Sigmoid(x), &[x])
    }

    /// GELU, tanh approximation.
    pub fn gelu(&mut self, x: Var) -> Result<Var> {
        let v = self
            .value(x)
            .map(|x| 0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh()));
        self.push("gelu", v, Op::Gelu(x), &[x])
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping was active.
    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Result<Var> {
        if lo > hi {
            return Err(DiffError::Invalid(format!("clamp bounds {lo} > {hi}")));
        }
        let v = self.value(x).map(|v| v.clamp(lo, hi));
        self.push("clamp", v, Op::Clamp(x, lo, hi), &[x])
    }

    /// Max-subtracted softmax along `axis`.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var> {
        let tx = self.value(x);
        if axis >= tx.shape().len() {
            return Err(DiffError::InvalidAxis {
                axis,
                shape: tx.shape().to_vec(),
            });
        }
        let (outer, len, inner) = axis_split(tx.shape(), axis);
        let src = tx.data();
        let mut out = vec![0.0; src.len()];
        for o in 0..outer {
            for i in 0..inner {
                let at = |t: usize| (o * len + t) * inner + i;
                let max = (0..len).map(|t| src[at(t)]).fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for t in 0..len {
                    let e = (src[at(t)] - max).exp();
                    out[at(t)] = e;
                    total += e;
                }
                for t in 0..len {
                    out[at(t)] /= total;
                }
            }
        }
        let v = Tensor::new(tx.shape().to_vec(), out)?;
        self.push("softmax", v, Op::Softmax { x, axis }, &[x])
    }

    /// Normalizes every row over the last axis, then applies `gamma`, `beta`.
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Result<Var> {
        let (tx, tg, tb) = (self.value(x), self.value(gamma), self.value(beta));
        let n = tx.cols();
        if tg.len() != n || tg.rows() != 1 {
            return Err(mismatch("layer_norm", tx, tg));
        }
        if tb.len() != n || tb.rows() != 1 {
            return Err(mismatch("layer_norm", tx, tb));
        }
        let rows = tx.rows();
        let mut xhat = vec![0.0; tx.len()];
        let mut inv_std = vec![0.0; rows];
        let mut out = vec![0.0; tx.len()];
        for r in 0..rows {
            let row = &tx.data()[r * n..(r + 1) * n];
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let s = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std[r] = s;
            for c in 0..n {
                let h = (row[c] - mean) * s;
                xhat[r * n + c] = h;
                out[r * n + c] = h * tg.data()[c] + tb.data()[c];
            }
        }
        let v = Tensor::new(tx.shape().to_vec(), out)?;
        self.push(
            "layer_norm",
            v,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            },
            &[x, gamma, beta],
        )
    }

    /// Transpose of a matrix.
    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let tx = self.value(x);
        if tx.shape().len() != 2 {
            return Err(DiffError::Invalid(format!(
                "transpose needs a matrix, got shape {:?}",
                tx.shape()
            )));
        }
        let (m, n) = (tx.shape()[0], tx.shape()[1]);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = tx.data()[i * n + j];
            }
        }
        let v = Tensor::new(vec![n, m], out)?;
        self.push("transpose", v, Op::Transpose(x), &[x])
    }

    /// Columns `start..start + width` of the last axis.
    pub fn slice_cols(&mut self, x: Var, start: usize, width: usize) -> Result<Var> {
        let tx = self.value(x);
        let n = tx.cols();
        if start + width > n {
            return Err(DiffError::Invalid(format!(
                "column slice {start}..{} outside width {n}",
                start + width
            )));
        }
        let mut out = Vec::with_capacity(tx.rows() * width);
        for r in 0..tx.rows() {
            out.extend_from_slice(&tx.data()[r * n + start..r * n + start + width]);
        }
        let mut shape = tx.shape().to_vec();
        *shape.last_mut().unwrap() = width;
        let v = Tensor::new(shape, out)?;
        self.push("slice_cols", v, Op::SliceCols { x, start }, &[x])
    }

    /// Concatenates along the last axis; leading axes must agree.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(DiffError::Invalid("concat of nothing".into()));
        };
        let lead = self.value(first).shape()[..self.value(first).shape().len() - 1].to_vec();
        let rows = self.value(first).rows();
        let mut width = 0;
        for &p in parts {
            let t = self.value(p);
            if t.shape()[..t.shape().len() - 1] != lead[..] {
                return Err(mismatch("concat_cols", self.value(first), t));
            }
            width += t.cols();
        }
        let mut out = vec![0.0; rows * width];
        let mut offset = 0;
        for &p in parts {
            let t = self.value(p);
            let w = t.cols();
            for r in 0..rows {
                out[r * width + offset..r * width + offset + w].copy_from_slice(&t.data()[r * w..(r + 1) * w]);
            }
            offset += w;
        }
        let mut shape = lead;
        shape.push(width);
        let v = Tensor::new(shape, out)?;
        self.push("concat_cols", v, Op::ConcatCols(parts.to_vec()), parts)
    }

    /// Sum of all elements, as a one-element tensor.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let total = self.value(x).data().iter().sum();
        self.push("sum", Tensor::scalar(total), Op::Sum(x), &[x])
    }

    pub fn mean(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x).len();
        if n == 0 {
            return Err(DiffError::Invalid("mean of an empty tensor".into()));
        }
        let s = self.sum(x)?;
        self.scale(s, 1.0 / n as f64)
    }

    /// Gradients of the one-element value `output` with respect to every
    /// recorded value on its dependency path.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        let out = self.value(output);
        if out.len() != 1 {
            return Err(DiffError::NotScalar(out.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::filled(out.shape().to_vec(), 1.0));

        for id in (0..=output.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if node.requires_grad {
                self.propagate(id, &g, &mut grads);
            }
            grads[id] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, id: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[id];
        let y = &node.value;
        let mut send = |v: Var, t: Tensor| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            match &mut grads[v.0] {
                Some(acc) => acc.add_assign(&t),
                slot => *slot = Some(t),
            }
        };
        let same = |f: &dyn Fn(usize) -> f64| {
            Tensor::new(g.shape().to_vec(), (0..g.len()).map(f).collect()).expect("same shape")
        };
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(a), self.value(b));
                let (m, k, n) = (ta.rows(), ta.cols(), tb.shape()[1]);
                if self.nodes[a.0].requires_grad {
                    let mut ga = vec![0.0; m * k];
                    gemm(m, n, k, g.data(), false, tb.data(), true, &mut ga, false);
                    send(a, Tensor::new(ta.shape().to_vec(), ga).expect("shape"));
                }
                if self.nodes[b.0].requires_grad {
                    let mut gb = vec![0.0; k * n];
                    gemm(k, m, n, ta.data(), true, g.data(), false, &mut gb, false);
                    send(b, Tensor::new(tb.shape().to_vec(), gb).expect("shape"));
                }
            }
            &Op::Add(a, b) => {
                send(a, g.clone());
                send(b, g.clone());
            }
            &Op::Sub(a, b) => {
                send(a, g.clone());
                send(b, g.map(|v| -v));
            }
            &Op::Mul(a, b) => {
                let (ta, tb) = (self.value(a), self.value(b));
                send(a, same(&|i| g.data()[i] * tb.data()[i]));
                send(b, same(&|i| g.data()[i] * ta.data()[i]));
            }
            &Op::AddRow(x, row) => {
                send(x, g.clone());
                let tr = self.value(row);
                let n = tr.len();
                let mut gr = vec![0.0; n];
                for (i, v) in g.data().iter().enumerate() {
                    gr[i % n] += v;
                }
                send(row, Tensor::new(tr.shape().to_vec(), gr).expect("shape"));
            }
            &Op::Scale(x, s) => send(x, g.map(|v| v * s)),
            &Op::AddScalar(x) => send(x, g.clone()),
            &Op::Exp(x) => send(x, same(&|i| g.data()[i] * y.data()[i])),
            &Op::Log(x) => {
                let tx = self.value(x);
                send(x, same(&|i| g.data()[i] / tx.data()[i]));
            }
            &Op::Sigmoid(x) => send(x, same(&|i| {
                let s = y.data()[i];
                g.data()[i] * s * (1.0 - s)
            })),
            &Op::Gelu(x) => {
                let tx = self.value(x);
                send(x, same(&|i| {
                    let x = tx.data()[i];
                    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
                    let d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x);
                    g.data()[i] * d
                }));
            }
            &Op::Clamp(x, lo, hi) => {
                let tx = self.value(x);
                send(x, same(&|i| {
                    let v = tx.data()[i];
                    if v >= lo && v <= hi {
                        g.data()[i]
                    } else {
                        0.0
                    }
                }));
            }
            &Op::Softmax { x, axis } => {
                let (outer, len, inner) = axis_split(y.shape(), axis);
                let mut gx = vec![0.0; y.len()];
                for o in 0..outer {
                    for i in 0..inner {
                        let at = |t: usize| (o * len + t) * inner + i;
                        let dot: f64 = (0..len).map(|t| g.data()[at(t)] * y.data()[at(t)]).sum();
                        for t in 0..len {
                            gx[at(t)] = y.data()[at(t)] * (g.data()[at(t)] - dot);
                        }
                    }
                }
                send(x, Tensor::new(y.shape().to_vec(), gx).expect("shape"));
            }
            Op::LayerNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            } => {
                let tg = self.value(*gamma);
                let n = y.cols();
                let rows = y.rows();
                let mut gx = vec![0.0; y.len()];
                let mut ggamma = vec![0.0; n];
                let mut gbeta = vec![0.0; n];
                for r in 0..rows {
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for c in 0..n {
                        let i = r * n + c;
                        let dh = g.data()[i] * tg.data()[c];
                        s1 += dh;
                        s2 += dh * xhat[i];
                        ggamma[c] += g.data()[i] * xhat[i];
                        gbeta[c] += g.data()[i];
                    }
                    for c in 0..n {
                        let i = r * n + c;
                        let dh = g.data()[i] * tg.data()[c];
                        gx[i] = inv_std[r] / n as f64 * (n as f64 * dh - s1 - xhat[i] * s2);
                    }
                }
                send(*x, Tensor::new(y.shape().to_vec(), gx).expect("shape"));
                send(*gamma, Tensor::new(tg.shape().to_vec(), ggamma).expect("shape"));
                send(*beta, Tensor::new(self.value(*beta).shape().to_vec(), gbeta).expect("shape"));
            }
            &Op::Transpose(x) => {
                let (n, m) = (y.shape()[0], y.shape()[1]);
                let mut gx = vec![0.0; m * n];
                for i in 0..m {
                    for j in 0..n {
                        gx[i * n + j] = g.data()[j * m + i];
                    }
                }
                send(x, Tensor::new(vec![m, n], gx).expect("shape"));
            }
            &Op::SliceCols { x, start } => {
                let tx = self.value(x);
                let (n, w) = (tx.cols(), y.cols());
                let mut gx = vec![0.0; tx.len()];
                for r in 0..tx.rows() {
                    gx[r * n + start..r * n + start + w].copy_from_slice(&g.data()[r * w..(r + 1) * w]);
                }
                send(x, Tensor::new(tx.shape().to_vec(), gx).expect("shape"));
            }
            Op::ConcatCols(parts) => {
                let width = y.cols();
                let rows = y.rows();
                let mut offset = 0;
                for &p in parts {
                    let tp = self.value(p);
                    let w = tp.cols();
                    let mut gp = vec![0.0; tp.len()];
                    for r in 0..rows {
                        gp[r * w..(r + 1) * w].copy_from_slice(&g.data()[r * width + offset..r * width + offset + w]);
                    }
                    offset += w;
                    send(p, Tensor::new(tp.shape().to_vec(), gp).expect("shape"));
                }
            }
            &Op::Sum(x) => {
                let tx = self.value(x);
                send(x, Tensor::filled(tx.shape().to_vec(), g.data()[0]));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gradient() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(3.0));
        let y = t.mul(x, x).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn matmul_examples() {
        let mut t = Tape::new();
        let m = Tensor::matrix(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let i = t.constant(Tensor::identity(3));
        let mv = t.constant(m.clone());
        let p = t.matmul(i, mv).unwrap();
        assert_eq!(t.value(p), &m);
        let a = t.constant(Tensor::matrix(1, 2, vec![1.0, 2.0]).unwrap());
        let b = t.constant(Tensor::matrix(2, 1, vec![3.0, 4.0]).unwrap());
        let ab = t.matmul(a, b).unwrap();
        assert_eq!(t.value(ab).data(), &[11.0]);
        let err = t.matmul(a, a).unwrap_err();
        assert!(matches!(err, DiffError::ShapeMismatch { op: "matmul", .. }));
        assert!(err.to_string().contains("[1, 2]"));
    }

    #[test]
    fn softmax_examples() {
        let mut t = Tape::new();
        let z = t.constant(Tensor::new(vec![2], vec![0.0, 0.0]).unwrap());
        let s = t.softmax(z, 0).unwrap();
        assert_eq!(t.value(s).data(), &[0.5, 0.5]);
        let big = t.constant(Tensor::new(vec![2], vec![1000.0, 1000.0]).unwrap());
        let s = t.softmax(big, 0).unwrap();
        assert_eq!(t.value(s).data(), &[0.5, 0.5]);
        assert!(matches!(t.softmax(big, 1), Err(DiffError::InvalidAxis { .. })));
    }

    #[test]
    fn sum_of_softmax_has_zero_gradient() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(vec![4], vec![0.3, -1.2, 2.0, 0.1]).unwrap());
        let s = t.softmax(x, 0).unwrap();
        let total = t.sum(s).unwrap();
        let g = t.backward(total).unwrap();
        assert!(g.get(x).unwrap().data().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn non_finite_is_an_error() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(-1.0));
        assert_eq!(t.log(x), Err(DiffError::NonFinite { op: "log" }));
        let big = t.leaf(Tensor::scalar(1000.0));
        assert!(t.exp(big).is_err());
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut t = Tape::new();
        let c = t.constant(Tensor::scalar(2.0));
        let x = t.leaf(Tensor::scalar(5.0));
        let y = t.mul(c, x).unwrap();
        let g = t.backward(y).unwrap();
        assert!(g.get(c).is_none());
        assert_eq!(g.get(x).unwrap().data(), &[2.0]);
    }

    #[test]
    fn backward_needs_scalar() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::zeros(vec![2, 2]));
        assert!(matches!(t.backward(x), Err(DiffError::NotScalar(_))));
    }
}
