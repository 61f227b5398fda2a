//! Slice-level forward and backward kernels. Shape validation happens in the
//! graph layer; everything here assumes consistent extents.

use super::Element;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvGeometry {
    pub batch: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
}

impl ConvGeometry {
    pub fn out_h(&self) -> usize {
        (self.height + 2 * self.padding - self.kernel_h) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.width + 2 * self.padding - self.kernel_w) / self.stride + 1
    }

    fn in_per_group(&self) -> usize {
        self.in_channels / self.groups
    }

    fn out_per_group(&self) -> usize {
        self.out_channels / self.groups
    }

    /// Rows of the unfolded patch matrix for one group.
    fn patch_len(&self) -> usize {
        self.in_per_group() * self.kernel_h * self.kernel_w
    }

    fn is_pointwise(&self) -> bool {
        self.kernel_h == 1 && self.kernel_w == 1 && self.stride == 1 && self.padding == 0
    }

    /// Output columns `[lo, hi)` whose input column `ow*stride + k - padding`
    /// lands inside `[0, extent)`.
    fn valid_range(&self, k: usize, extent: usize, out_extent: usize) -> (usize, usize) {
        let s = self.stride as isize;
        let offset = k as isize - self.padding as isize;
        // smallest o with o*s + offset >= 0
        let lo = if offset >= 0 { 0 } else { ((-offset) + s - 1) / s };
        // largest o with o*s + offset <= extent-1
        let top = extent as isize - 1 - offset;
        let hi = if top < 0 { 0 } else { (top / s + 1).min(out_extent as isize) };
        let lo = lo.min(out_extent as isize);
        (lo as usize, hi.max(lo) as usize)
    }

    /// Unfold one group of one image into a `(patch_len, out_h*out_w)` matrix.
    fn im2col<T: Element>(&self, image: &[T], group: usize, col: &mut [T]) {
        let (oh_n, ow_n) = (self.out_h(), self.out_w());
        let plane = self.height * self.width;
        let cols = oh_n * ow_n;
        let c0 = group * self.in_per_group();
        for ci in 0..self.in_per_group() {
            let src = &image[(c0 + ci) * plane..(c0 + ci + 1) * plane];
            for ki in 0..self.kernel_h {
                let (oh_lo, oh_hi) = self.valid_range(ki, self.height, oh_n);
                for kj in 0..self.kernel_w {
                    let (ow_lo, ow_hi) = self.valid_range(kj, self.width, ow_n);
                    let row = (ci * self.kernel_h + ki) * self.kernel_w + kj;
                    let dst = &mut col[row * cols..(row + 1) * cols];
                    dst.fill(T::zero());
                    for oh in oh_lo..oh_hi {
                        let ih = oh * self.stride + ki - self.padding;
                        let src_row = &src[ih * self.width..(ih + 1) * self.width];
                        let dst_row = &mut dst[oh * ow_n..(oh + 1) * ow_n];
                        if self.stride == 1 {
                            let iw0 = ow_lo + kj - self.padding;
                            dst_row[ow_lo..ow_hi]
                                .copy_from_slice(&src_row[iw0..iw0 + (ow_hi - ow_lo)]);
                        } else {
                            for ow in ow_lo..ow_hi {
                                dst_row[ow] = src_row[ow * self.stride + kj - self.padding];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Accumulate a patch-matrix gradient back onto the image gradient.
    fn col2im<T: Element>(&self, col: &[T], group: usize, image: &mut [T]) {
        let (oh_n, ow_n) = (self.out_h(), self.out_w());
        let plane = self.height * self.width;
        let cols = oh_n * ow_n;
        let c0 = group * self.in_per_group();
        for ci in 0..self.in_per_group() {
            let dst = &mut image[(c0 + ci) * plane..(c0 + ci + 1) * plane];
            for ki in 0..self.kernel_h {
                let (oh_lo, oh_hi) = self.valid_range(ki, self.height, oh_n);
                for kj in 0..self.kernel_w {
                    let (ow_lo, ow_hi) = self.valid_range(kj, self.width, ow_n);
                    let row = (ci * self.kernel_h + ki) * self.kernel_w + kj;
                    let src = &col[row * cols..(row + 1) * cols];
                    for oh in oh_lo..oh_hi {
                        let ih = oh * self.stride + ki - self.padding;
                        let dst_row = &mut dst[ih * self.width..(ih + 1) * self.width];
                        let src_row = &src[oh * ow_n..(oh + 1) * ow_n];
                        for ow in ow_lo..ow_hi {
                            let iw = ow * self.stride + kj - self.padding;
                            dst_row[iw] = dst_row[iw] + src_row[ow];
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn conv2d_forward<T: Element>(
    geo: &ConvGeometry,
    input: &[T],
    weight: &[T],
    bias: Option<&[T]>,
) -> Vec<T> {
    let (oh_n, ow_n) = (geo.out_h(), geo.out_w());
    let cols = oh_n * ow_n;
    let k = geo.patch_len();
    let opg = geo.out_per_group();
    let in_image = geo.in_channels * geo.height * geo.width;
    let out_image = geo.out_channels * cols;
    let mut out = vec![T::zero(); geo.batch * out_image];
    let mut col = if geo.is_pointwise() { Vec::new() } else { vec![T::zero(); k * cols] };

    for n in 0..geo.batch {
        let image = &input[n * in_image..(n + 1) * in_image];
        let out_n = &mut out[n * out_image..(n + 1) * out_image];
        for g in 0..geo.groups {
            let patches: &[T] = if geo.is_pointwise() {
                let c0 = g * geo.in_per_group() * cols;
                &image[c0..c0 + k * cols]
            } else {
                geo.im2col(image, g, &mut col);
                &col
            };
            let w = &weight[g * opg * k..(g + 1) * opg * k];
            let dst = &mut out_n[g * opg * cols..(g + 1) * opg * cols];
            if let Some(b) = bias {
                for (co, row) in dst.chunks_mut(cols).enumerate() {
                    row.fill(b[g * opg + co]);
                }
            }
            let beta = if bias.is_some() { T::one() } else { T::zero() };
            T::gemm(
                opg,
                k,
                cols,
                T::one(),
                w,
                (k as isize, 1),
                patches,
                (cols as isize, 1),
                beta,
                dst,
                (cols as isize, 1),
            );
        }
    }
    out
}

pub(crate) struct ConvGrads<T> {
    pub input: Option<Vec<T>>,
    pub weight: Option<Vec<T>>,
    pub bias: Option<Vec<T>>,
}

pub(crate) fn conv2d_backward<T: Element>(
    geo: &ConvGeometry,
    input: &[T],
    weight: &[T],
    grad_out: &[T],
    want: (bool, bool, bool),
) -> ConvGrads<T> {
    let (want_input, want_weight, want_bias) = want;
    let cols = geo.out_h() * geo.out_w();
    let k = geo.patch_len();
    let opg = geo.out_per_group();
    let in_image = geo.in_channels * geo.height * geo.width;
    let out_image = geo.out_channels * cols;

    let mut d_input = want_input.then(|| vec![T::zero(); input.len()]);
    let mut d_weight = want_weight.then(|| vec![T::zero(); weight.len()]);
    let mut d_bias = want_bias.then(|| vec![T::zero(); geo.out_channels]);
    let pointwise = geo.is_pointwise();
    let mut col = if pointwise || !want_weight { Vec::new() } else { vec![T::zero(); k * cols] };
    let mut d_col = if pointwise || !want_input { Vec::new() } else { vec![T::zero(); k * cols] };

    for n in 0..geo.batch {
        let image = &input[n * in_image..(n + 1) * in_image];
        let g_out_n = &grad_out[n * out_image..(n + 1) * out_image];
        for g in 0..geo.groups {
            let g_out = &g_out_n[g * opg * cols..(g + 1) * opg * cols];
            if let Some(db) = d_bias.as_mut() {
                for (co, row) in g_out.chunks(cols).enumerate() {
                    let s = row.iter().copied().fold(T::zero(), |a, b| a + b);
                    db[g * opg + co] = db[g * opg + co] + s;
                }
            }
            if let Some(dw) = d_weight.as_mut() {
                let patches: &[T] = if pointwise {
                    let c0 = g * geo.in_per_group() * cols;
                    &image[c0..c0 + k * cols]
                } else {
                    geo.im2col(image, g, &mut col);
                    &col
                };
                T::gemm(
                    opg,
                    cols,
                    k,
                    T::one(),
                    g_out,
                    (cols as isize, 1),
                    patches,
                    (1, cols as isize),
                    T::one(),
                    &mut dw[g * opg * k..(g + 1) * opg * k],
                    (k as isize, 1),
                );
            }
            if let Some(di) = d_input.as_mut() {
                let w = &weight[g * opg * k..(g + 1) * opg * k];
                let di_n = &mut di[n * in_image..(n + 1) * in_image];
                if pointwise {
                    let c0 = g * geo.in_per_group() * cols;
                    T::gemm(
                        k,
                        opg,
                        cols,
                        T::one(),
                        w,
                        (1, k as isize),
                        g_out,
                        (cols as isize, 1),
                        T::one(),
                        &mut di_n[c0..c0 + k * cols],
                        (cols as isize, 1),
                    );
                } else {
                    T::gemm(
                        k,
                        opg,
                        cols,
                        T::one(),
                        w,
                        (1, k as isize),
                        g_out,
                        (cols as isize, 1),
                        T::zero(),
                        &mut d_col,
                        (cols as isize, 1),
                    );
                    geo.col2im(&d_col, g, di_n);
                }
            }
        }
    }
    ConvGrads { input: d_input, weight: d_weight, bias: d_bias }
}

/// Per-output-index source taps for half-pixel-centred linear interpolation.
fn linear_taps(in_extent: usize, factor: usize) -> Vec<(usize, usize, f64, f64)> {
    let out_extent = in_extent * factor;
    (0..out_extent)
        .map(|o| {
            let src = ((o as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(in_extent - 1);
            let i1 = (i0 + 1).min(in_extent - 1);
            let frac = src - i0 as f64;
            (i0, i1, 1.0 - frac, frac)
        })
        .collect()
}

/// Bilinear upsampling of every `(h, w)` plane in `x`.
pub(crate) fn upsample_bilinear<T: Element>(
    x: &[T],
    planes: usize,
    h: usize,
    w: usize,
    factor: usize,
) -> Vec<T> {
    let (oh_n, ow_n) = (h * factor, w * factor);
    let rows = linear_taps(h, factor);
    let cols = linear_taps(w, factor);
    let mut out = vec![T::zero(); planes * oh_n * ow_n];
    let mut tmp = vec![0.0f64; ow_n * h];
    for p in 0..planes {
        let src = &x[p * h * w..(p + 1) * h * w];
        // horizontal pass
        for i in 0..h {
            for (o, &(j0, j1, a, b)) in cols.iter().enumerate() {
                tmp[i * ow_n + o] = a * src[i * w + j0].as_f64() + b * src[i * w + j1].as_f64();
            }
        }
        let dst = &mut out[p * oh_n * ow_n..(p + 1) * oh_n * ow_n];
        for (oh, &(i0, i1, a, b)) in rows.iter().enumerate() {
            for ow in 0..ow_n {
                dst[oh * ow_n + ow] = T::from_f64(a * tmp[i0 * ow_n + ow] + b * tmp[i1 * ow_n + ow]);
            }
        }
    }
    out
}

pub(crate) fn upsample_bilinear_backward<T: Element>(
    grad_out: &[T],
    planes: usize,
    h: usize,
    w: usize,
    factor: usize,
) -> Vec<T> {
    let (oh_n, ow_n) = (h * factor, w * factor);
    let rows = linear_taps(h, factor);
    let cols = linear_taps(w, factor);
    let mut grad = vec![T::zero(); planes * h * w];
    let mut tmp = vec![0.0f64; ow_n * h];
    for p in 0..planes {
        let g = &grad_out[p * oh_n * ow_n..(p + 1) * oh_n * ow_n];
        tmp.fill(0.0);
        for (oh, &(i0, i1, a, b)) in rows.iter().enumerate() {
            for ow in 0..ow_n {
                let v = g[oh * ow_n + ow].as_f64();
                tmp[i0 * ow_n + ow] += a * v;
                tmp[i1 * ow_n + ow] += b * v;
            }
        }
        let dst = &mut grad[p * h * w..(p + 1) * h * w];
        for i in 0..h {
            let mut acc = vec![0.0f64; w];
            for (o, &(j0, j1, a, b)) in cols.iter().enumerate() {
                let v = tmp[i * ow_n + o];
                acc[j0] += a * v;
                acc[j1] += b * v;
            }
            for (j, v) in acc.into_iter().enumerate() {
                dst[i * w + j] = T::from_f64(v);
            }
        }
    }
    grad
}

/// Mean over non-overlapping `factor×factor` blocks of every plane.
pub(crate) fn downsample_area<T: Element>(
    x: &[T],
    planes: usize,
    h: usize,
    w: usize,
    factor: usize,
) -> Vec<T> {
    let (oh_n, ow_n) = (h / factor, w / factor);
    let norm = 1.0 / (factor * factor) as f64;
    let mut out = vec![T::zero(); planes * oh_n * ow_n];
    for p in 0..planes {
        let src = &x[p * h * w..(p + 1) * h * w];
        let dst = &mut out[p * oh_n * ow_n..(p + 1) * oh_n * ow_n];
        for oh in 0..oh_n {
            for ow in 0..ow_n {
                let mut acc = 0.0;
                for di in 0..factor {
                    let row = &src[(oh * factor + di) * w + ow * factor..][..factor];
                    acc += row.iter().map(|v| v.as_f64()).sum::<f64>();
                }
                dst[oh * ow_n + ow] = T::from_f64(acc * norm);
            }
        }
    }
    out
}

pub(crate) fn downsample_area_backward<T: Element>(
    grad_out: &[T],
    planes: usize,
    h: usize,
    w: usize,
    factor: usize,
) -> Vec<T> {
    let (oh_n, ow_n) = (h / factor, w / factor);
    let norm = T::from_f64(1.0 / (factor * factor) as f64);
    let mut grad = vec![T::zero(); planes * h * w];
    for p in 0..planes {
        let g = &grad_out[p * oh_n * ow_n..(p + 1) * oh_n * ow_n];
        let dst = &mut grad[p * h * w..(p + 1) * h * w];
        for i in 0..h {
            for j in 0..w {
                dst[i * w + j] = g[(i / factor) * ow_n + j / factor] * norm;
            }
        }
    }
    grad
}

/// `(outer, axis_len, inner)` decomposition of a shape around `axis`.
pub(crate) fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

pub(crate) fn softmax<T: Element>(x: &[T], outer: usize, len: usize, inner: usize) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    if inner == 1 {
        for (src, dst) in x.chunks(len).zip(out.chunks_mut(len)) {
            let max = src.iter().copied().fold(T::neg_infinity(), T::max);
            let mut total = T::zero();
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = (s - max).exp();
                total = total + *d;
            }
            let inv = T::one() / total;
            dst.iter_mut().for_each(|d| *d = *d * inv);
        }
        return out;
    }
    for o in 0..outer {
        for i in 0..inner {
            let at = |j: usize| (o * len + j) * inner + i;
            let max = (0..len).map(|j| x[at(j)]).fold(T::neg_infinity(), T::max);
            let mut total = T::zero();
            for j in 0..len {
                let e = (x[at(j)] - max).exp();
                out[at(j)] = e;
                total = total + e;
            }
            for j in 0..len {
                out[at(j)] = out[at(j)] / total;
            }
        }
    }
    out
}

pub(crate) fn softmax_backward<T: Element>(
    y: &[T],
    grad_out: &[T],
    outer: usize,
    len: usize,
    inner: usize,
) -> Vec<T> {
    let mut grad = vec![T::zero(); y.len()];
    for o in 0..outer {
        for i in 0..inner {
            let at = |j: usize| (o * len + j) * inner + i;
            let dot = (0..len).fold(T::zero(), |acc, j| acc + y[at(j)] * grad_out[at(j)]);
            for j in 0..len {
                grad[at(j)] = y[at(j)] * (grad_out[at(j)] - dot);
            }
        }
    }
    grad
}
