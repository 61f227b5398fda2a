use super::kernels::{self, ConvGeometry};
use super::{Element, Tensor};
use crate::error::{dim_err, usage_err, Error, Result};

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Conv2d { input: Var, weight: Var, bias: Option<Var>, geo: ConvGeometry },
    Matmul { a: Var, b: Var, batch: usize, m: usize, k: usize, n: usize },
    Transpose { x: Var, batch: usize, rows: usize, cols: usize },
    Reshape { x: Var },
    Softmax { x: Var, outer: usize, len: usize, inner: usize },
    Sigmoid { x: Var },
    LeakyRelu { x: Var, slope: f64 },
    Concat { xs: Vec<Var>, outer: usize, inner: usize },
    Narrow { x: Var, outer: usize, len: usize, inner: usize, start: usize },
    Add { a: Var, b: Var },
    Mul { a: Var, b: Var },
    Scale { x: Var, factor: f64 },
    Upsample { x: Var, planes: usize, h: usize, w: usize, factor: usize },
    Downsample { x: Var, planes: usize, h: usize, w: usize, factor: usize },
    Sum { x: Var },
    MeanAbsDiff { a: Var, b: Var },
    SpectralAngle { a: Var, b: Var, outer: usize, len: usize, inner: usize, eps: f64 },
}

struct Node<T> {
    value: Tensor<T>,
    op: Op,
    requires_grad: bool,
    grad: Option<Vec<T>>,
}

/// Recorded computation graph.
///
/// One graph per forward pass. `backward` may run once; call
/// [`Graph::zero_grad`] before running it again.
pub struct Graph<T> {
    nodes: Vec<Node<T>>,
    backward_done: bool,
}

impl<T: Element> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> Graph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), backward_done: false }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&mut self, value: Tensor<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, requires_grad, grad: None });
        Var(self.nodes.len() - 1)
    }

    /// Constant input; never receives a gradient.
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, false)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, true)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn grad(&self, v: Var) -> Option<Tensor<T>> {
        let node = &self.nodes[v.0];
        node.grad.as_ref().map(|g| Tensor::new(node.value.shape(), g.clone()).expect("grad shape"))
    }

    pub fn zero_grad(&mut self) {
        for node in &mut self.nodes {
            node.grad = None;
        }
        self.backward_done = false;
    }

    fn push(&mut self, name: &'static str, value: Tensor<T>, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite { op: name });
        }
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node { value, op, requires_grad, grad: None });
        Ok(Var(self.nodes.len() - 1))
    }

    fn same_shape(&self, op: &str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(dim_err!("{op}: shapes {sa:?} and {sb:?} differ"));
        }
        Ok(())
    }

    /// 2-D convolution over an NCHW input with weight `(Cout, Cin/groups, kh, kw)`.
    pub fn conv2d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
        groups: usize,
    ) -> Result<Var> {
        let xs = self.shape(input).to_vec();
        let ws = self.shape(weight).to_vec();
        if xs.len() != 4 || ws.len() != 4 {
            return Err(dim_err!("conv2d expects 4-d input and weight, got {xs:?} and {ws:?}"));
        }
        if groups == 0 || stride == 0 {
            return Err(dim_err!("conv2d: stride and groups must be positive"));
        }
        let (cin, cout) = (xs[1], ws[0]);
        if cin % groups != 0 || cout % groups != 0 {
            return Err(dim_err!(
                "conv2d: channels in={cin} out={cout} not divisible by groups={groups}"
            ));
        }
        if ws[1] != cin / groups {
            return Err(dim_err!(
                "conv2d: weight expects {} input channels per group, input gives {}",
                ws[1],
                cin / groups
            ));
        }
        let geo = ConvGeometry {
            batch: xs[0],
            in_channels: cin,
            out_channels: cout,
            height: xs[2],
            width: xs[3],
            kernel_h: ws[2],
            kernel_w: ws[3],
            stride,
            padding,
            groups,
        };
        for (extent, k) in [(geo.height, geo.kernel_h), (geo.width, geo.kernel_w)] {
            let padded = extent + 2 * padding;
            if padded < k || !(padded - k).is_multiple_of(stride) {
                return Err(dim_err!(
                    "conv2d: extent {extent} with padding {padding}, kernel {k}, stride {stride} \
                     does not give an integer output extent"
                ));
            }
        }
        if let Some(b) = bias {
            if self.shape(b) != [cout] {
                return Err(dim_err!("conv2d: bias shape {:?}, expected [{cout}]", self.shape(b)));
            }
        }
        let out = kernels::conv2d_forward(
            &geo,
            self.value(input).data(),
            self.value(weight).data(),
            bias.map(|b| self.value(b).data()),
        );
        let value = Tensor::new(&[geo.batch, cout, geo.out_h(), geo.out_w()], out)?;
        let mut inputs = vec![input, weight];
        inputs.extend(bias);
        self.push("conv2d", value, Op::Conv2d { input, weight, bias, geo }, &inputs)
    }

    /// Batched matrix product `(…, m, k) × (…, k, n)`; batch extents must match.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() < 2 || sa.len() != sb.len() {
            return Err(dim_err!("matmul: incompatible ranks {sa:?} and {sb:?}"));
        }
        let r = sa.len();
        let (m, k, k2, n) = (sa[r - 2], sa[r - 1], sb[r - 2], sb[r - 1]);
        if k != k2 || sa[..r - 2] != sb[..r - 2] {
            return Err(dim_err!("matmul: cannot contract {sa:?} with {sb:?}"));
        }
        let batch: usize = sa[..r - 2].iter().product();
        let (da, db) = (self.value(a).data(), self.value(b).data());
        let mut out = vec![T::zero(); batch * m * n];
        for i in 0..batch {
            T::gemm(
                m,
                k,
                n,
                T::one(),
                &da[i * m * k..(i + 1) * m * k],
                (k as isize, 1),
                &db[i * k * n..(i + 1) * k * n],
                (n as isize, 1),
                T::zero(),
                &mut out[i * m * n..(i + 1) * m * n],
                (n as isize, 1),
            );
        }
        let mut shape = sa[..r - 2].to_vec();
        shape.extend([m, n]);
        let value = Tensor::new(&shape, out)?;
        self.push("matmul", value, Op::Matmul { a, b, batch, m, k, n }, &[a, b])
    }

    /// Swap the last two axes.
    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let s = self.shape(x).to_vec();
        if s.len() < 2 {
            return Err(dim_err!("transpose needs at least 2 axes, got {s:?}"));
        }
        let r = s.len();
        let (rows, cols) = (s[r - 2], s[r - 1]);
        let batch = s[..r - 2].iter().product();
        let out = transpose_last2(self.value(x).data(), batch, rows, cols);
        let mut shape = s[..r - 2].to_vec();
        shape.extend([cols, rows]);
        let value = Tensor::new(&shape, out)?;
        self.push("transpose", value, Op::Transpose { x, batch, rows, cols }, &[x])
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(x).clone().reshaped(shape)?;
        self.push("reshape", value, Op::Reshape { x }, &[x])
    }

    /// Max-subtracted softmax along `axis`.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var> {
        let s = self.shape(x).to_vec();
        if axis >= s.len() {
            return Err(dim_err!("softmax: axis {axis} out of range for {s:?}"));
        }
        let (outer, len, inner) = kernels::split_axis(&s, axis);
        let out = kernels::softmax(self.value(x).data(), outer, len, inner);
        let value = Tensor::new(&s, out)?;
        self.push("softmax", value, Op::Softmax { x, outer, len, inner }, &[x])
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        let value = self.value(x).map(sigmoid);
        self.push("sigmoid", value, Op::Sigmoid { x }, &[x])
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Result<Var> {
        let s = T::from_f64(slope);
        let value = self.value(x).map(|v| if v > T::zero() { v } else { v * s });
        self.push("leaky_relu", value, Op::LeakyRelu { x, slope }, &[x])
    }

    pub fn concat(&mut self, xs: &[Var], axis: usize) -> Result<Var> {
        let Some(&first) = xs.first() else {
            return Err(dim_err!("concat of zero tensors"));
        };
        let base = self.shape(first).to_vec();
        if axis >= base.len() {
            return Err(dim_err!("concat: axis {axis} out of range for {base:?}"));
        }
        let mut total = 0;
        for &v in xs {
            let s = self.shape(v);
            let agrees = s.len() == base.len()
                && s.iter().zip(&base).enumerate().all(|(i, (a, b))| i == axis || a == b);
            if !agrees {
                return Err(dim_err!("concat on axis {axis}: {s:?} does not match {base:?}"));
            }
            total += s[axis];
        }
        let (outer, _, inner) = kernels::split_axis(&base, axis);
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for &v in xs {
                let len = self.shape(v)[axis];
                let d = self.value(v).data();
                out.extend_from_slice(&d[o * len * inner..(o + 1) * len * inner]);
            }
        }
        let mut shape = base;
        shape[axis] = total;
        let value = Tensor::new(&shape, out)?;
        self.push("concat", value, Op::Concat { xs: xs.to_vec(), outer, inner }, xs)
    }

    /// Slice `[start, start+len)` along `axis`.
    pub fn narrow(&mut self, x: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let s = self.shape(x).to_vec();
        if axis >= s.len() || start + len > s[axis] || len == 0 {
            return Err(dim_err!("narrow [{start}, {}) on axis {axis} of {s:?}", start + len));
        }
        let (outer, full, inner) = kernels::split_axis(&s, axis);
        let d = self.value(x).data();
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            out.extend_from_slice(&d[(o * full + start) * inner..(o * full + start + len) * inner]);
        }
        let mut shape = s;
        shape[axis] = len;
        let value = Tensor::new(&shape, out)?;
        self.push("narrow", value, Op::Narrow { x, outer, len: full, inner, start }, &[x])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x + y);
        let value = Tensor::new(self.shape(a), data)?;
        self.push("add", value, Op::Add { a, b }, &[a, b])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x * y);
        let value = Tensor::new(self.shape(a), data)?;
        self.push("mul", value, Op::Mul { a, b }, &[a, b])
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Result<Var> {
        let f = T::from_f64(factor);
        let value = self.value(x).map(|v| v * f);
        self.push("scale", value, Op::Scale { x, factor }, &[x])
    }

    /// Bilinear upsampling of the two trailing (spatial) axes.
    pub fn upsample(&mut self, x: Var, factor: usize) -> Result<Var> {
        let (planes, h, w) = self.planes("upsample", x, factor)?;
        if factor == 1 {
            return self.reshape(x, &self.shape(x).to_vec());
        }
        let out = kernels::upsample_bilinear(self.value(x).data(), planes, h, w, factor);
        let mut shape = self.shape(x).to_vec();
        let r = shape.len();
        shape[r - 2] *= factor;
        shape[r - 1] *= factor;
        let value = Tensor::new(&shape, out)?;
        self.push("upsample", value, Op::Upsample { x, planes, h, w, factor }, &[x])
    }

    /// Area-average downsampling of the two trailing (spatial) axes.
    pub fn downsample(&mut self, x: Var, factor: usize) -> Result<Var> {
        let (planes, h, w) = self.planes("downsample", x, factor)?;
        if h % factor != 0 || w % factor != 0 {
            return Err(dim_err!("downsample: {h}x{w} not divisible by factor {factor}"));
        }
        let out = kernels::downsample_area(self.value(x).data(), planes, h, w, factor);
        let mut shape = self.shape(x).to_vec();
        let r = shape.len();
        shape[r - 2] /= factor;
        shape[r - 1] /= factor;
        let value = Tensor::new(&shape, out)?;
        self.push("downsample", value, Op::Downsample { x, planes, h, w, factor }, &[x])
    }

    fn planes(&self, op: &str, x: Var, factor: usize) -> Result<(usize, usize, usize)> {
        let s = self.shape(x);
        if s.len() < 2 {
            return Err(dim_err!("{op}: needs spatial axes, got {s:?}"));
        }
        if factor == 0 {
            return Err(dim_err!("{op}: factor must be >= 1"));
        }
        let r = s.len();
        Ok((s[..r - 2].iter().product(), s[r - 2], s[r - 1]))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let total = self.value(x).data().iter().copied().fold(T::zero(), |a, b| a + b);
        self.push("sum", Tensor::scalar(total), Op::Sum { x }, &[x])
    }

    /// `mean(|a - b|)`.
    pub fn mean_abs_diff(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mean_abs_diff", a, b)?;
        let (da, db) = (self.value(a).data(), self.value(b).data());
        let total: f64 = da.iter().zip(db).map(|(x, y)| (x.as_f64() - y.as_f64()).abs()).sum();
        let value = Tensor::scalar(T::from_f64(total / da.len() as f64));
        self.push("mean_abs_diff", value, Op::MeanAbsDiff { a, b }, &[a, b])
    }

    /// Mean angle (radians) between the axis-1 vectors of `a` and `b`.
    ///
    /// Uses `2·atan2(|â − b̂|, |â + b̂|)`, which equals `arccos(⟨â, b̂⟩)` but
    /// stays accurate and differentiable as the angle goes to zero. Norms
    /// are clamped below at `eps`.
    pub fn spectral_angle(&mut self, a: Var, b: Var, eps: f64) -> Result<Var> {
        self.same_shape("spectral_angle", a, b)?;
        let s = self.shape(a).to_vec();
        if s.len() < 2 {
            return Err(dim_err!("spectral_angle: needs a channel axis, got {s:?}"));
        }
        let (outer, len, inner) = kernels::split_axis(&s, 1);
        let (da, db) = (self.value(a).data(), self.value(b).data());
        let mut total = 0.0;
        for o in 0..outer {
            for i in 0..inner {
                let at = |j: usize| (o * len + j) * inner + i;
                let pa: Vec<f64> = (0..len).map(|j| da[at(j)].as_f64()).collect();
                let pb: Vec<f64> = (0..len).map(|j| db[at(j)].as_f64()).collect();
                total += AngleTerms::new(&pa, &pb, eps).angle;
            }
        }
        let value = Tensor::scalar(T::from_f64(total / (outer * inner) as f64));
        self.push(
            "spectral_angle",
            value,
            Op::SpectralAngle { a, b, outer, len, inner, eps },
            &[a, b],
        )
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.backward_done {
            return Err(usage_err!("backward already ran on this graph; call zero_grad first"));
        }
        if self.value(loss).numel() != 1 {
            return Err(usage_err!(
                "backward root must be a scalar, got shape {:?}",
                self.shape(loss)
            ));
        }
        self.backward_done = true;
        if !self.nodes[loss.0].requires_grad {
            return Ok(());
        }
        self.nodes[loss.0].grad = Some(vec![T::one()]);
        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].requires_grad || matches!(self.nodes[idx].op, Op::Leaf) {
                continue;
            }
            let Some(grad) = self.nodes[idx].grad.take() else { continue };
            let contributions = self.local_grads(idx, &grad);
            self.nodes[idx].grad = Some(grad);
            for (v, g) in contributions {
                let node = &mut self.nodes[v.0];
                if !node.requires_grad {
                    continue;
                }
                match node.grad.as_mut() {
                    Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a = *a + *b),
                    None => node.grad = Some(g),
                }
            }
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn local_grads(&self, idx: usize, g: &[T]) -> Vec<(Var, Vec<T>)> {
        let node = &self.nodes[idx];
        let mut out = Vec::new();
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d { input, weight, bias, geo } => {
                let want = (
                    self.wants(*input),
                    self.wants(*weight),
                    bias.is_some_and(|b| self.wants(b)),
                );
                let grads = kernels::conv2d_backward(
                    geo,
                    self.value(*input).data(),
                    self.value(*weight).data(),
                    g,
                    want,
                );
                out.extend(grads.input.map(|d| (*input, d)));
                out.extend(grads.weight.map(|d| (*weight, d)));
                if let (Some(b), Some(d)) = (bias, grads.bias) {
                    out.push((*b, d));
                }
            }
            Op::Matmul { a, b, batch, m, k, n } => {
                let (m, k, n) = (*m, *k, *n);
                let (da, db) = (self.value(*a).data(), self.value(*b).data());
                if self.wants(*a) {
                    let mut ga = vec![T::zero(); batch * m * k];
                    for i in 0..*batch {
                        T::gemm(
                            m,
                            n,
                            k,
                            T::one(),
                            &g[i * m * n..(i + 1) * m * n],
                            (n as isize, 1),
                            &db[i * k * n..(i + 1) * k * n],
                            (1, n as isize),
                            T::zero(),
                            &mut ga[i * m * k..(i + 1) * m * k],
                            (k as isize, 1),
                        );
                    }
                    out.push((*a, ga));
                }
                if self.wants(*b) {
                    let mut gb = vec![T::zero(); batch * k * n];
                    for i in 0..*batch {
                        T::gemm(
                            k,
                            m,
                            n,
                            T::one(),
                            &da[i * m * k..(i + 1) * m * k],
                            (1, k as isize),
                            &g[i * m * n..(i + 1) * m * n],
                            (n as isize, 1),
                            T::zero(),
                            &mut gb[i * k * n..(i + 1) * k * n],
                            (n as isize, 1),
                        );
                    }
                    out.push((*b, gb));
                }
            }
            Op::Transpose { x, batch, rows, cols } => {
                out.push((*x, transpose_last2(g, *batch, *cols, *rows)));
            }
            Op::Reshape { x } => out.push((*x, g.to_vec())),
            Op::Softmax { x, outer, len, inner } => {
                let y = node.value.data();
                out.push((*x, kernels::softmax_backward(y, g, *outer, *len, *inner)));
            }
            Op::Sigmoid { x } => {
                let y = node.value.data();
                out.push((*x, zip_map(y, g, |s, gi| gi * s * (T::one() - s))));
            }
            Op::LeakyRelu { x, slope } => {
                let s = T::from_f64(*slope);
                let xv = self.value(*x).data();
                out.push((*x, zip_map(xv, g, |v, gi| if v > T::zero() { gi } else { gi * s })));
            }
            Op::Concat { xs, outer, inner } => {
                let total = node.value.numel() / (outer * inner);
                let mut offset = 0;
                for &v in xs {
                    let len = self.value(v).numel() / (outer * inner);
                    if self.wants(v) {
                        let mut gv = Vec::with_capacity(outer * len * inner);
                        for o in 0..*outer {
                            let start = (o * total + offset) * inner;
                            gv.extend_from_slice(&g[start..start + len * inner]);
                        }
                        out.push((v, gv));
                    }
                    offset += len;
                }
            }
            Op::Narrow { x, outer, len, inner, start } => {
                let part = g.len() / (outer * inner);
                let mut gx = vec![T::zero(); outer * len * inner];
                for o in 0..*outer {
                    let dst = (o * len + start) * inner;
                    gx[dst..dst + part * inner]
                        .copy_from_slice(&g[o * part * inner..(o + 1) * part * inner]);
                }
                out.push((*x, gx));
            }
            Op::Add { a, b } => {
                out.push((*a, g.to_vec()));
                out.push((*b, g.to_vec()));
            }
            Op::Mul { a, b } => {
                let (da, db) = (self.value(*a).data(), self.value(*b).data());
                if self.wants(*a) {
                    out.push((*a, zip_map(db, g, |y, gi| y * gi)));
                }
                if self.wants(*b) {
                    out.push((*b, zip_map(da, g, |x, gi| x * gi)));
                }
            }
            Op::Scale { x, factor } => {
                let f = T::from_f64(*factor);
                out.push((*x, g.iter().map(|&v| v * f).collect()));
            }
            Op::Upsample { x, planes, h, w, factor } => {
                out.push((*x, kernels::upsample_bilinear_backward(g, *planes, *h, *w, *factor)));
            }
            Op::Downsample { x, planes, h, w, factor } => {
                out.push((*x, kernels::downsample_area_backward(g, *planes, *h, *w, *factor)));
            }
            Op::Sum { x } => out.push((*x, vec![g[0]; self.value(*x).numel()])),
            Op::MeanAbsDiff { a, b } => {
                let (da, db) = (self.value(*a).data(), self.value(*b).data());
                let scale = g[0].as_f64() / da.len() as f64;
                let ga: Vec<T> = da
                    .iter()
                    .zip(db)
                    .map(|(x, y)| {
                        let d = x.as_f64() - y.as_f64();
                        T::from_f64(if d > 0.0 {
                            scale
                        } else if d < 0.0 {
                            -scale
                        } else {
                            0.0
                        })
                    })
                    .collect();
                if self.wants(*b) {
                    out.push((*b, ga.iter().map(|&v| -v).collect()));
                }
                out.push((*a, ga));
            }
            Op::SpectralAngle { a, b, outer, len, inner, eps } => {
                let (outer, len, inner) = (*outer, *len, *inner);
                let (da, db) = (self.value(*a).data(), self.value(*b).data());
                let scale = g[0].as_f64() / (outer * inner) as f64;
                let mut ga = vec![T::zero(); da.len()];
                let mut gb = vec![T::zero(); db.len()];
                for o in 0..outer {
                    for i in 0..inner {
                        let at = |j: usize| (o * len + j) * inner + i;
                        let pa: Vec<f64> = (0..len).map(|j| da[at(j)].as_f64()).collect();
                        let pb: Vec<f64> = (0..len).map(|j| db[at(j)].as_f64()).collect();
                        let (dpa, dpb) = AngleTerms::new(&pa, &pb, *eps).gradients();
                        for j in 0..len {
                            ga[at(j)] = T::from_f64(scale * dpa[j]);
                            gb[at(j)] = T::from_f64(scale * dpb[j]);
                        }
                    }
                }
                out.push((*a, ga));
                out.push((*b, gb));
            }
        }
        out
    }
}

fn sigmoid<T: Element>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

fn zip_map<T: Element>(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

fn transpose_last2<T: Element>(x: &[T], batch: usize, rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    for bi in 0..batch {
        let src = &x[bi * rows * cols..(bi + 1) * rows * cols];
        let dst = &mut out[bi * rows * cols..(bi + 1) * rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }
    out
}

/// Intermediate quantities of the half-angle spectral angle formula for one
/// pixel pair.
struct AngleTerms {
    a_hat: Vec<f64>,
    b_hat: Vec<f64>,
    norm_a: f64,
    norm_b: f64,
    a_clamped: bool,
    b_clamped: bool,
    diff: f64,
    sum: f64,
    angle: f64,
}

impl AngleTerms {
    fn new(a: &[f64], b: &[f64], eps: f64) -> Self {
        let raw_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let raw_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (norm_a, norm_b) = (raw_a.max(eps), raw_b.max(eps));
        let a_hat: Vec<f64> = a.iter().map(|v| v / norm_a).collect();
        let b_hat: Vec<f64> = b.iter().map(|v| v / norm_b).collect();
        let diff = a_hat.iter().zip(&b_hat).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let sum = a_hat.iter().zip(&b_hat).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt();
        Self {
            a_hat,
            b_hat,
            norm_a,
            norm_b,
            a_clamped: raw_a < eps,
            b_clamped: raw_b < eps,
            diff,
            sum,
            angle: 2.0 * diff.atan2(sum),
        }
    }

    fn gradients(&self) -> (Vec<f64>, Vec<f64>) {
        let (p, q) = (self.diff, self.sum);
        let denom = p * p + q * q;
        if denom == 0.0 {
            return (vec![0.0; self.a_hat.len()], vec![0.0; self.b_hat.len()]);
        }
        // d angle / dp and d angle / dq, folded with 1/p and 1/q; a zero
        // norm contributes a zero subgradient.
        let cp = if p > 0.0 { 2.0 * q / denom / p } else { 0.0 };
        let cq = if q > 0.0 { -2.0 * p / denom / q } else { 0.0 };
        let n = self.a_hat.len();
        let mut g_ahat = vec![0.0; n];
        let mut g_bhat = vec![0.0; n];
        for j in 0..n {
            let u = self.a_hat[j] - self.b_hat[j];
            let v = self.a_hat[j] + self.b_hat[j];
            g_ahat[j] = cp * u + cq * v;
            g_bhat[j] = -cp * u + cq * v;
        }
        (
            through_normalize(&self.a_hat, &g_ahat, self.norm_a, self.a_clamped),
            through_normalize(&self.b_hat, &g_bhat, self.norm_b, self.b_clamped),
        )
    }
}

/// Pull a gradient on `x / max(|x|, eps)` back to `x`.
fn through_normalize(x_hat: &[f64], g_hat: &[f64], norm: f64, clamped: bool) -> Vec<f64> {
    if clamped {
        return g_hat.iter().map(|g| g / norm).collect();
    }
    let proj: f64 = x_hat.iter().zip(g_hat).map(|(x, g)| x * g).sum();
    x_hat.iter().zip(g_hat).map(|(x, g)| (g - x * proj) / norm).collect()
}
