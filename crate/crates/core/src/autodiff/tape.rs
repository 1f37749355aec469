//! Operation recording and reverse-mode differentiation.
//!
//! Every operation appends a node holding its forward value and enough
//! information to push gradients back to its inputs. Nodes are only ever
//! appended after their inputs, so walking the tape backwards visits them in
//! reverse topological order.

use super::params::{ParamId, ParamStore};
use super::tensor::{gemm, Tensor};
use super::AutodiffError;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Broadcast {
    Full,
    /// Right operand is `rows × 1`.
    Column,
    /// Right operand is `1 × cols`.
    Row,
    /// Right operand is `1 × 1`.
    Scalar,
}

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var, Broadcast),
    Mul(Var, Var, Broadcast),
    Scale(Var, f64),
    AddScalar(Var),
    Tanh(Var),
    Sigmoid(Var),
    Relu(Var),
    Log(Var),
    SoftmaxRows(Var),
    SoftmaxCols(Var),
    Transpose(Var),
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    SliceRows(Var, usize),
    GatherColumns(Var, Vec<usize>),
    UpperTriangular(Var),
    Element(Var, usize, usize),
    Sum(Var),
    Unfold { x: Var, seg: usize, width: usize },
    MaxPoolSegments { x: Var, argmax: Vec<usize> },
    MaskMul(Var, Vec<f64>),
}

enum Value {
    Owned(Tensor),
    Param(ParamId),
}

struct Node {
    value: Value,
    op: Op,
    requires_grad: bool,
}

/// Records a forward computation. Parameter leaves borrow their values from
/// the [`ParamStore`] instead of copying them.
pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
}

/// Result of [`Tape::backward`]: gradients per tape node and per parameter.
pub struct Gradients {
    nodes: Vec<Option<Tensor>>,
    params: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn of(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].as_ref()
    }

    pub fn param(&self, id: ParamId) -> Option<&Tensor> {
        self.params.get(id.index()).and_then(Option::as_ref)
    }

    /// Per-parameter gradients, indexed like the store. Parameters the loss
    /// does not depend on are `None`.
    pub fn into_param_grads(self) -> Vec<Option<Tensor>> {
        self.params
    }
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> AutodiffError {
    AutodiffError::Shape {
        op,
        left: a.shape(),
        right: b.shape(),
    }
}

fn broadcast_kind(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Broadcast, AutodiffError> {
    match (a.shape(), b.shape()) {
        (x, y) if x == y => Ok(Broadcast::Full),
        ((r, _), (r2, 1)) if r == r2 => Ok(Broadcast::Column),
        ((_, c), (1, c2)) if c == c2 => Ok(Broadcast::Row),
        (_, (1, 1)) => Ok(Broadcast::Scalar),
        _ => Err(shape_err(op, a, b)),
    }
}

#[inline]
fn bidx(kind: Broadcast, b: &Tensor, r: usize, c: usize) -> usize {
    match kind {
        Broadcast::Full => r * b.cols() + c,
        Broadcast::Column => r,
        Broadcast::Row => c,
        Broadcast::Scalar => 0,
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

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(existing) => existing.add_assign(&g),
        None => *slot = Some(g),
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        match &self.nodes[v.0].value {
            Value::Owned(t) => t,
            Value::Param(id) => self.params.get(*id),
        }
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.value(v).shape()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        debug_assert!(value.all_finite(), "non-finite value produced by {op:?}");
        self.nodes.push(Node {
            value: Value::Owned(value),
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// A constant input; no gradient flows into it unless `requires_grad`.
    pub fn input(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Input, requires_grad)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.input(value, false)
    }

    /// A trainable parameter leaf.
    pub fn param(&mut self, id: ParamId) -> Var {
        self.nodes.push(Node {
            value: Value::Param(id),
            op: Op::Param(id),
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let out = self.value(a).matmul(self.value(b))?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    fn broadcast_binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<(Tensor, Broadcast), AutodiffError> {
        let (ta, tb) = (self.value(a), self.value(b));
        let kind = broadcast_kind(name, ta, tb)?;
        let out = Tensor::from_fn(ta.rows(), ta.cols(), |r, c| {
            f(ta.get(r, c), tb.data()[bidx(kind, tb, r, c)])
        });
        Ok((out, kind))
    }

    /// `a + b`; `b` may also be a column vector, a row vector or a scalar
    /// broadcast across `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (out, kind) = self.broadcast_binary("add", a, b, |x, y| x + y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Add(a, b, kind), rg))
    }

    /// Element-wise product with the same broadcasting rules as [`Tape::add`].
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (out, kind) = self.broadcast_binary("mul", a, b, |x, y| x * y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Mul(a, b, kind), rg))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let out = self.value(a).map(|x| x * k);
        let rg = self.rg(a);
        self.push(out, Op::Scale(a, k), rg)
    }

    pub fn add_scalar(&mut self, a: Var, k: f64) -> Var {
        let out = self.value(a).map(|x| x + k);
        let rg = self.rg(a);
        self.push(out, Op::AddScalar(a), rg)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        let rg = self.rg(a);
        self.push(out, Op::Tanh(a), rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        let rg = self.rg(a);
        self.push(out, Op::Sigmoid(a), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.max(0.0));
        let rg = self.rg(a);
        self.push(out, Op::Relu(a), rg)
    }

    pub fn log(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::ln);
        let rg = self.rg(a);
        self.push(out, Op::Log(a), rg)
    }

    /// Softmax within each row; every row of the result sums to one.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut out = x.clone();
        for r in 0..x.rows() {
            let row = &mut out.data_mut()[r * x.cols()..(r + 1) * x.cols()];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let rg = self.rg(a);
        self.push(out, Op::SoftmaxRows(a), rg)
    }

    /// Softmax within each column; every column of the result sums to one.
    pub fn softmax_cols(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let (rows, cols) = x.shape();
        let mut out = x.clone();
        for c in 0..cols {
            let max = (0..rows).map(|r| x.get(r, c)).fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for r in 0..rows {
                let e = (x.get(r, c) - max).exp();
                out.set(r, c, e);
                total += e;
            }
            for r in 0..rows {
                out.set(r, c, out.get(r, c) / total);
            }
        }
        let rg = self.rg(a);
        self.push(out, Op::SoftmaxCols(a), rg)
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        let rg = self.rg(a);
        self.push(out, Op::Transpose(a), rg)
    }

    /// Stacks inputs vertically (`[a; b; ...]`). Column counts must agree.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let first = self.value(parts[0]);
        let cols = first.cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.cols() != cols {
                return Err(shape_err("concat_rows", first, t));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let out = Tensor::from_vec(rows, cols, data)?;
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(out, Op::ConcatRows(parts.to_vec()), rg))
    }

    /// Places inputs side by side (`[a, b, ...]`). Row counts must agree.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let first = self.value(parts[0]);
        let rows = first.rows();
        let mut cols = 0;
        for &p in parts {
            let t = self.value(p);
            if t.rows() != rows {
                return Err(shape_err("concat_cols", first, t));
            }
            cols += t.cols();
        }
        let mut out = Tensor::zeros(rows, cols);
        let mut offset = 0;
        for &p in parts {
            let t = self.value(p);
            for r in 0..rows {
                for c in 0..t.cols() {
                    out.set(r, offset + c, t.get(r, c));
                }
            }
            offset += t.cols();
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), rg))
    }

    /// Rows `start..start + len`.
    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if start + len > x.rows() || len == 0 {
            return Err(AutodiffError::Index {
                op: "slice_rows",
                index: start + len,
                bound: x.rows(),
            });
        }
        let cols = x.cols();
        let out = Tensor::from_vec(len, cols, x.data()[start * cols..(start + len) * cols].to_vec())?;
        let rg = self.rg(a);
        Ok(self.push(out, Op::SliceRows(a, start), rg))
    }

    /// Columns of `a` at the given 0-based indices, in order (repeats allowed).
    pub fn gather_columns(&mut self, a: Var, indices: &[usize]) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if let Some(&bad) = indices.iter().find(|&&i| i >= x.cols()) {
            return Err(AutodiffError::Index {
                op: "gather_columns",
                index: bad,
                bound: x.cols(),
            });
        }
        if indices.is_empty() {
            return Err(AutodiffError::Empty("gather_columns"));
        }
        let out = Tensor::from_fn(x.rows(), indices.len(), |r, c| x.get(r, indices[c]));
        let rg = self.rg(a);
        Ok(self.push(out, Op::GatherColumns(a, indices.to_vec()), rg))
    }

    pub fn column(&mut self, a: Var, c: usize) -> Result<Var, AutodiffError> {
        self.gather_columns(a, &[c])
    }

    /// Keeps the upper triangle (diagonal included) and zeroes the rest.
    pub fn upper_triangular(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let out = Tensor::from_fn(x.rows(), x.cols(), |r, c| if c >= r { x.get(r, c) } else { 0.0 });
        let rg = self.rg(a);
        self.push(out, Op::UpperTriangular(a), rg)
    }

    /// The single element at (r, c) as a 1×1 tensor.
    pub fn element(&mut self, a: Var, r: usize, c: usize) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if r >= x.rows() || c >= x.cols() {
            return Err(AutodiffError::Index {
                op: "element",
                index: r.max(c),
                bound: x.rows().min(x.cols()),
            });
        }
        let out = Tensor::scalar(x.get(r, c));
        let rg = self.rg(a);
        Ok(self.push(out, Op::Element(a, r, c), rg))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let out = Tensor::scalar(self.value(a).sum());
        let rg = self.rg(a);
        self.push(out, Op::Sum(a), rg)
    }

    /// Sliding windows for a 1-d convolution. The columns of `a` form
    /// consecutive segments of `seg` columns each; for every segment and
    /// every window start `t` in `0..=seg - width` the output column stacks
    /// columns `t..t + width` of that segment vertically.
    pub fn unfold(&mut self, a: Var, seg: usize, width: usize) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if width == 0 || width > seg || !x.cols().is_multiple_of(seg) {
            return Err(AutodiffError::Config(format!(
                "cannot unfold {}x{} with segment {seg} and width {width}",
                x.rows(),
                x.cols()
            )));
        }
        let segments = x.cols() / seg;
        let steps = seg - width + 1;
        let e = x.rows();
        let out = Tensor::from_fn(e * width, segments * steps, |r, c| {
            let (k, row) = (r / e, r % e);
            let (s, t) = (c / steps, c % steps);
            x.get(row, s * seg + t + k)
        });
        let rg = self.rg(a);
        Ok(self.push(out, Op::Unfold { x: a, seg, width }, rg))
    }

    /// Maximum over each consecutive segment of `seg` columns, per row.
    pub fn max_pool_segments(&mut self, a: Var, seg: usize) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if seg == 0 || !x.cols().is_multiple_of(seg) {
            return Err(AutodiffError::Config(format!(
                "cannot pool {} columns in segments of {seg}",
                x.cols()
            )));
        }
        let segments = x.cols() / seg;
        let mut out = Tensor::zeros(x.rows(), segments);
        let mut argmax = vec![0; x.rows() * segments];
        for r in 0..x.rows() {
            for s in 0..segments {
                let mut best = s * seg;
                for c in s * seg + 1..(s + 1) * seg {
                    if x.get(r, c) > x.get(r, best) {
                        best = c;
                    }
                }
                out.set(r, s, x.get(r, best));
                argmax[r * segments + s] = best;
            }
        }
        let rg = self.rg(a);
        Ok(self.push(out, Op::MaxPoolSegments { x: a, argmax }, rg))
    }

    /// Multiplies element-wise by a fixed mask (used for dropout).
    pub fn mask_mul(&mut self, a: Var, mask: Vec<f64>) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        if mask.len() != x.len() {
            return Err(AutodiffError::DataLength {
                shape: x.shape(),
                len: mask.len(),
            });
        }
        let data = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let out = Tensor::from_vec(x.rows(), x.cols(), data)?;
        let rg = self.rg(a);
        Ok(self.push(out, Op::MaskMul(a, mask), rg))
    }

    /// Back-propagates from a 1×1 `loss`.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.shape(loss), (1, 1), "backward needs a scalar loss");
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        let mut params: Vec<Option<Tensor>> = Vec::new();
        params.resize_with(self.params.len(), || None);
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let out = self.value(Var(i));
            self.propagate(&node.op, out, &g, &mut grads, &mut params);
            grads[i] = Some(g);
        }
        Gradients { nodes: grads, params }
    }

    fn propagate(
        &self,
        op: &Op,
        out: &Tensor,
        g: &Tensor,
        grads: &mut [Option<Tensor>],
        params: &mut [Option<Tensor>],
    ) {
        let send = |v: Var, t: Tensor, grads: &mut [Option<Tensor>]| {
            if self.rg(v) {
                accumulate(&mut grads[v.0], t);
            }
        };
        match op {
            Op::Input => {}
            Op::Param(id) => accumulate(&mut params[id.index()], g.clone()),
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                if self.rg(*a) {
                    let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                    gemm(g, false, tb, true, &mut ga, 0.0);
                    send(*a, ga, grads);
                }
                if self.rg(*b) {
                    let mut gb = Tensor::zeros(tb.rows(), tb.cols());
                    gemm(ta, true, g, false, &mut gb, 0.0);
                    send(*b, gb, grads);
                }
            }
            Op::Add(a, b, kind) => {
                send(*a, g.clone(), grads);
                if self.rg(*b) {
                    let tb = self.value(*b);
                    let mut gb = Tensor::zeros(tb.rows(), tb.cols());
                    for r in 0..g.rows() {
                        for c in 0..g.cols() {
                            gb.data_mut()[bidx(*kind, tb, r, c)] += g.get(r, c);
                        }
                    }
                    send(*b, gb, grads);
                }
            }
            Op::Mul(a, b, kind) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                if self.rg(*a) {
                    let ga = Tensor::from_fn(g.rows(), g.cols(), |r, c| {
                        g.get(r, c) * tb.data()[bidx(*kind, tb, r, c)]
                    });
                    send(*a, ga, grads);
                }
                if self.rg(*b) {
                    let mut gb = Tensor::zeros(tb.rows(), tb.cols());
                    for r in 0..g.rows() {
                        for c in 0..g.cols() {
                            gb.data_mut()[bidx(*kind, tb, r, c)] += g.get(r, c) * ta.get(r, c);
                        }
                    }
                    send(*b, gb, grads);
                }
            }
            Op::Scale(a, k) => send(*a, g.map(|x| x * k), grads),
            Op::AddScalar(a) => send(*a, g.clone(), grads),
            Op::Tanh(a) => {
                let d = zip_map(g, out, |gv, y| gv * (1.0 - y * y));
                send(*a, d, grads);
            }
            Op::Sigmoid(a) => {
                let d = zip_map(g, out, |gv, y| gv * y * (1.0 - y));
                send(*a, d, grads);
            }
            Op::Relu(a) => {
                let d = zip_map(g, out, |gv, y| if y > 0.0 { gv } else { 0.0 });
                send(*a, d, grads);
            }
            Op::Log(a) => {
                let d = zip_map(g, self.value(*a), |gv, x| gv / x);
                send(*a, d, grads);
            }
            Op::SoftmaxRows(a) => {
                let mut d = Tensor::zeros(out.rows(), out.cols());
                for r in 0..out.rows() {
                    let dot: f64 = (0..out.cols()).map(|c| g.get(r, c) * out.get(r, c)).sum();
                    for c in 0..out.cols() {
                        d.set(r, c, out.get(r, c) * (g.get(r, c) - dot));
                    }
                }
                send(*a, d, grads);
            }
            Op::SoftmaxCols(a) => {
                let mut d = Tensor::zeros(out.rows(), out.cols());
                for c in 0..out.cols() {
                    let dot: f64 = (0..out.rows()).map(|r| g.get(r, c) * out.get(r, c)).sum();
                    for r in 0..out.rows() {
                        d.set(r, c, out.get(r, c) * (g.get(r, c) - dot));
                    }
                }
                send(*a, d, grads);
            }
            Op::Transpose(a) => send(*a, g.transpose(), grads),
            Op::ConcatRows(parts) => {
                let cols = g.cols();
                let mut offset = 0;
                for &p in parts {
                    let rows = self.value(p).rows();
                    if self.rg(p) {
                        let slice = g.data()[offset * cols..(offset + rows) * cols].to_vec();
                        send(p, Tensor::from_vec(rows, cols, slice).unwrap(), grads);
                    }
                    offset += rows;
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let cols = self.value(p).cols();
                    if self.rg(p) {
                        let part = Tensor::from_fn(g.rows(), cols, |r, c| g.get(r, offset + c));
                        send(p, part, grads);
                    }
                    offset += cols;
                }
            }
            Op::SliceRows(a, start) => {
                let x = self.value(*a);
                let mut d = Tensor::zeros(x.rows(), x.cols());
                let cols = x.cols();
                d.data_mut()[start * cols..start * cols + g.len()].copy_from_slice(g.data());
                send(*a, d, grads);
            }
            Op::GatherColumns(a, indices) => {
                let x = self.value(*a);
                let mut d = Tensor::zeros(x.rows(), x.cols());
                for (c, &src) in indices.iter().enumerate() {
                    for r in 0..x.rows() {
                        d.data_mut()[r * x.cols() + src] += g.get(r, c);
                    }
                }
                send(*a, d, grads);
            }
            Op::UpperTriangular(a) => {
                let d = Tensor::from_fn(g.rows(), g.cols(), |r, c| if c >= r { g.get(r, c) } else { 0.0 });
                send(*a, d, grads);
            }
            Op::Element(a, r, c) => {
                let x = self.value(*a);
                let mut d = Tensor::zeros(x.rows(), x.cols());
                d.set(*r, *c, g.item());
                send(*a, d, grads);
            }
            Op::Sum(a) => {
                let x = self.value(*a);
                send(*a, Tensor::filled(x.rows(), x.cols(), g.item()), grads);
            }
            Op::Unfold { x: a, seg, width } => {
                let x = self.value(*a);
                let e = x.rows();
                let steps = seg - width + 1;
                let mut d = Tensor::zeros(e, x.cols());
                for r in 0..g.rows() {
                    let (k, row) = (r / e, r % e);
                    for c in 0..g.cols() {
                        let (s, t) = (c / steps, c % steps);
                        d.data_mut()[row * x.cols() + s * seg + t + k] += g.get(r, c);
                    }
                }
                send(*a, d, grads);
            }
            Op::MaxPoolSegments { x: a, argmax } => {
                let x = self.value(*a);
                let mut d = Tensor::zeros(x.rows(), x.cols());
                let segments = g.cols();
                for r in 0..g.rows() {
                    for s in 0..segments {
                        d.data_mut()[r * x.cols() + argmax[r * segments + s]] += g.get(r, s);
                    }
                }
                send(*a, d, grads);
            }
            Op::MaskMul(a, mask) => {
                let data = g.data().iter().zip(mask).map(|(gv, m)| gv * m).collect();
                send(*a, Tensor::from_vec(g.rows(), g.cols(), data).unwrap(), grads);
            }
        }
    }
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_vec(a.rows(), a.cols(), data).unwrap()
}
