//! 3-D convolutions with 4×4×4 kernels, lowered to GEMM via im2col.

use rand::Rng;

use super::gemm::{gemm, MatRef};
use super::{Module, Param, Tensor};
use crate::error::{Error, Result};

pub const KERNEL: usize = 4;
const TAPS: usize = KERNEL * KERNEL * KERNEL;
/// Upper bound on the im2col scratch buffer, in floats.
const SCRATCH_FLOATS: usize = 1 << 22;

/// Which gradients a backward pass should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grads {
    pub input: bool,
    pub weight: bool,
    pub bias: bool,
}

impl Grads {
    pub const ALL: Grads = Grads {
        input: true,
        weight: true,
        bias: true,
    };
    pub const INPUT_ONLY: Grads = Grads {
        input: true,
        weight: false,
        bias: false,
    };
}

/// Index relation between an "image" volume and a "column" volume: column
/// voxel `o` along an axis reads image voxel `o * stride + k - pad`.
#[derive(Clone, Copy, Debug)]
struct Geometry {
    channels: usize,
    image: [usize; 3],
    column: [usize; 3],
    stride: usize,
    pad: usize,
}

impl Geometry {
    fn image_len(&self) -> usize {
        self.image.iter().product()
    }

    fn plane(&self) -> usize {
        self.column[1] * self.column[2]
    }

    fn column_len(&self) -> usize {
        self.column.iter().product()
    }

    fn rows(&self) -> usize {
        self.channels * TAPS
    }

    /// Column slices per chunk so the scratch buffer stays bounded.
    fn chunk(&self) -> usize {
        (SCRATCH_FLOATS / (self.rows() * self.plane()).max(1)).clamp(1, self.column[0])
    }

    /// Column index range `[lo, hi)` whose tap `k` lands inside the image.
    fn valid(&self, k: usize, axis: usize) -> (usize, usize) {
        let (s, p, big, small) = (self.stride, self.pad, self.image[axis], self.column[axis]);
        let lo = if k >= p { 0 } else { (p - k).div_ceil(s) };
        let hi = if big + p < k + 1 {
            0
        } else {
            ((big - 1 + p - k) / s + 1).min(small)
        };
        (lo.min(hi), hi)
    }

    /// Gather image taps for column slices `d0..d1` into `cols` (`rows × (d1-d0)·plane`).
    fn im2col(&self, img: &[f32], d0: usize, d1: usize, cols: &mut [f32]) {
        let plane = self.plane();
        let pc = (d1 - d0) * plane;
        let [_, bh, bw] = self.image;
        let sw = self.column[2];
        let vol = self.image_len();
        for c in 0..self.channels {
            let img_c = &img[c * vol..(c + 1) * vol];
            for kd in 0..KERNEL {
                for kh in 0..KERNEL {
                    let (hlo, hhi) = self.valid(kh, 1);
                    for kw in 0..KERNEL {
                        let (wlo, whi) = self.valid(kw, 2);
                        let row = ((c * KERNEL + kd) * KERNEL + kh) * KERNEL + kw;
                        let dst = &mut cols[row * pc..(row + 1) * pc];
                        for od in d0..d1 {
                            let out = &mut dst[(od - d0) * plane..(od - d0 + 1) * plane];
                            let id = (od * self.stride + kd) as isize - self.pad as isize;
                            if id < 0 || id as usize >= self.image[0] {
                                out.fill(0.0);
                                continue;
                            }
                            for (oh, o_row) in out.chunks_exact_mut(sw).enumerate() {
                                if oh < hlo || oh >= hhi {
                                    o_row.fill(0.0);
                                    continue;
                                }
                                let ih = oh * self.stride + kh - self.pad;
                                let src = &img_c[(id as usize * bh + ih) * bw..][..bw];
                                o_row[..wlo].fill(0.0);
                                o_row[whi..].fill(0.0);
                                if self.stride == 1 {
                                    let off = wlo + kw - self.pad;
                                    o_row[wlo..whi].copy_from_slice(&src[off..off + whi - wlo]);
                                } else {
                                    for ow in wlo..whi {
                                        o_row[ow] = src[ow * self.stride + kw - self.pad];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Adjoint of `im2col`: scatter-add `cols` back into `img`.
    fn col2im_add(&self, cols: &[f32], d0: usize, d1: usize, img: &mut [f32]) {
        let plane = self.plane();
        let pc = (d1 - d0) * plane;
        let [_, bh, bw] = self.image;
        let sw = self.column[2];
        let vol = self.image_len();
        for c in 0..self.channels {
            let img_c = &mut img[c * vol..(c + 1) * vol];
            for kd in 0..KERNEL {
                for kh in 0..KERNEL {
                    let (hlo, hhi) = self.valid(kh, 1);
                    for kw in 0..KERNEL {
                        let (wlo, whi) = self.valid(kw, 2);
                        let row = ((c * KERNEL + kd) * KERNEL + kh) * KERNEL + kw;
                        let src = &cols[row * pc..(row + 1) * pc];
                        for od in d0..d1 {
                            let id = (od * self.stride + kd) as isize - self.pad as isize;
                            if id < 0 || id as usize >= self.image[0] {
                                continue;
                            }
                            let s_plane = &src[(od - d0) * plane..(od - d0 + 1) * plane];
                            for oh in hlo..hhi {
                                let ih = oh * self.stride + kh - self.pad;
                                let dst = &mut img_c[(id as usize * bh + ih) * bw..][..bw];
                                let s_row = &s_plane[oh * sw..(oh + 1) * sw];
                                if self.stride == 1 {
                                    let off = kw as isize - self.pad as isize;
                                    for ow in wlo..whi {
                                        dst[(ow as isize + off) as usize] += s_row[ow];
                                    }
                                } else {
                                    for ow in wlo..whi {
                                        dst[ow * self.stride + kw - self.pad] += s_row[ow];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn spatial(t: &Tensor, layer: &str, channels: usize) -> Result<[usize; 3]> {
    let s = t.shape();
    if s.len() != 5 || s[1] != channels {
        return Err(Error::Shape {
            layer: layer.to_string(),
            expected: vec![s.first().copied().unwrap_or(0), channels, 0, 0, 0],
            got: s.to_vec(),
        });
    }
    Ok([s[2], s[3], s[4]])
}

fn add_channel_bias(out: &mut Tensor, bias: &[f32]) {
    let per = out.shape()[2..].iter().product::<usize>();
    for b in 0..out.batch() {
        for (ch, &bv) in out.item_mut(b).chunks_exact_mut(per).zip(bias) {
            ch.iter_mut().for_each(|v| *v += bv);
        }
    }
}

fn accumulate_channel_sums(dy: &Tensor, grad: &mut [f32]) {
    let per = dy.shape()[2..].iter().product::<usize>();
    for b in 0..dy.batch() {
        for (ch, g) in dy.item(b).chunks_exact(per).zip(grad.iter_mut()) {
            *g += ch.iter().sum::<f32>();
        }
    }
}

/// Strided 3-D convolution. Weight layout `[out, in, 4, 4, 4]`.
#[derive(Clone, Debug)]
pub struct Conv3d {
    pub name: String,
    pub weight: Param,
    pub bias: Param,
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
    pub pad_lo: usize,
    pub pad_hi: usize,
}

impl Conv3d {
    pub fn new<R: Rng + ?Sized>(
        name: &str,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        pad_lo: usize,
        pad_hi: usize,
        rng: &mut R,
    ) -> Self {
        Conv3d {
            name: name.to_string(),
            weight: Param::gaussian(
                format!("{name}.weight"),
                &[out_channels, in_channels, KERNEL, KERNEL, KERNEL],
                rng,
            ),
            bias: Param::zeros(format!("{name}.bias"), &[out_channels]),
            in_channels,
            out_channels,
            stride,
            pad_lo,
            pad_hi,
        }
    }

    /// Stride 1 with asymmetric padding (1 before, 2 after) so size is preserved.
    pub fn same<R: Rng + ?Sized>(name: &str, cin: usize, cout: usize, rng: &mut R) -> Self {
        Conv3d::new(name, cin, cout, 1, 1, 2, rng)
    }

    /// Stride 2, padding 1: halves every spatial axis.
    pub fn down<R: Rng + ?Sized>(name: &str, cin: usize, cout: usize, rng: &mut R) -> Self {
        Conv3d::new(name, cin, cout, 2, 1, 1, rng)
    }

    pub fn output_dims(&self, input: [usize; 3]) -> [usize; 3] {
        input.map(|i| (i + self.pad_lo + self.pad_hi - KERNEL) / self.stride + 1)
    }

    fn geometry(&self, input: [usize; 3]) -> Geometry {
        Geometry {
            channels: self.in_channels,
            image: input,
            column: self.output_dims(input),
            stride: self.stride,
            pad: self.pad_lo,
        }
    }

    pub fn forward(&self, x: &Tensor, with_bias: bool) -> Result<Tensor> {
        let dims = spatial(x, &self.name, self.in_channels)?;
        let g = self.geometry(dims);
        let b = x.batch();
        let p_total = g.column_len();
        let mut out = Tensor::zeros(&[b, self.out_channels, g.column[0], g.column[1], g.column[2]]);
        let chunk = g.chunk();
        let mut cols = vec![0.0f32; g.rows() * chunk * g.plane()];
        let w = MatRef::row_major(&self.weight.value, self.out_channels, g.rows());
        for bi in 0..b {
            let xin = x.item(bi);
            let y = out.item_mut(bi);
            let mut d0 = 0;
            while d0 < g.column[0] {
                let d1 = (d0 + chunk).min(g.column[0]);
                let pc = (d1 - d0) * g.plane();
                g.im2col(xin, d0, d1, &mut cols);
                let cm = MatRef::row_major(&cols[..g.rows() * pc], g.rows(), pc);
                gemm(1.0, w, cm, 0.0, &mut y[d0 * g.plane()..], p_total, 1);
                d0 = d1;
            }
        }
        if with_bias {
            add_channel_bias(&mut out, &self.bias.value);
        }
        Ok(out)
    }

    /// Accumulates the requested parameter gradients and optionally returns `dL/dx`.
    pub fn backward(&mut self, x: &Tensor, dy: &Tensor, grads: Grads) -> Result<Option<Tensor>> {
        let dims = spatial(x, &self.name, self.in_channels)?;
        let g = self.geometry(dims);
        let p_total = g.column_len();
        dy.expect_shape(
            &self.name,
            &[x.batch(), self.out_channels, g.column[0], g.column[1], g.column[2]],
        )?;
        if grads.bias {
            accumulate_channel_sums(dy, &mut self.bias.grad);
        }
        let mut dx = grads.input.then(|| Tensor::zeros(x.shape()));
        if !grads.input && !grads.weight {
            return Ok(dx);
        }
        let chunk = g.chunk();
        let mut cols = vec![0.0f32; g.rows() * chunk * g.plane()];
        for bi in 0..x.batch() {
            let dyb = dy.item(bi);
            let mut d0 = 0;
            while d0 < g.column[0] {
                let d1 = (d0 + chunk).min(g.column[0]);
                let pc = (d1 - d0) * g.plane();
                let dyc = MatRef::strided(&dyb[d0 * g.plane()..], self.out_channels, pc, p_total, 1);
                if grads.weight {
                    g.im2col(x.item(bi), d0, d1, &mut cols);
                    let cm = MatRef::row_major(&cols[..g.rows() * pc], g.rows(), pc);
                    gemm(1.0, dyc, cm.t(), 1.0, &mut self.weight.grad, g.rows(), 1);
                }
                if let Some(dx) = dx.as_mut() {
                    let w = MatRef::row_major(&self.weight.value, self.out_channels, g.rows());
                    gemm(1.0, w.t(), dyc, 0.0, &mut cols[..g.rows() * pc], pc, 1);
                    g.col2im_add(&cols[..g.rows() * pc], d0, d1, dx.item_mut(bi));
                }
                d0 = d1;
            }
        }
        Ok(dx)
    }
}

impl Module for Conv3d {
    fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }
    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Transposed convolution, stride 2, padding 1: doubles every spatial axis.
/// Weight layout `[in, out, 4, 4, 4]`.
#[derive(Clone, Debug)]
pub struct ConvTranspose3d {
    pub name: String,
    pub weight: Param,
    pub bias: Param,
    pub in_channels: usize,
    pub out_channels: usize,
}

impl ConvTranspose3d {
    pub fn new<R: Rng + ?Sized>(name: &str, in_channels: usize, out_channels: usize, rng: &mut R) -> Self {
        ConvTranspose3d {
            name: name.to_string(),
            weight: Param::gaussian(
                format!("{name}.weight"),
                &[in_channels, out_channels, KERNEL, KERNEL, KERNEL],
                rng,
            ),
            bias: Param::zeros(format!("{name}.bias"), &[out_channels]),
            in_channels,
            out_channels,
        }
    }

    pub fn output_dims(&self, input: [usize; 3]) -> [usize; 3] {
        input.map(|i| 2 * i)
    }

    fn geometry(&self, input: [usize; 3]) -> Geometry {
        Geometry {
            channels: self.out_channels,
            image: self.output_dims(input),
            column: input,
            stride: 2,
            pad: 1,
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let dims = spatial(x, &self.name, self.in_channels)?;
        let g = self.geometry(dims);
        let p_total = g.column_len();
        let mut out = Tensor::zeros(&[x.batch(), self.out_channels, g.image[0], g.image[1], g.image[2]]);
        let chunk = g.chunk();
        let mut cols = vec![0.0f32; g.rows() * chunk * g.plane()];
        let w = MatRef::row_major(&self.weight.value, self.in_channels, g.rows());
        for bi in 0..x.batch() {
            let xb = x.item(bi);
            let mut d0 = 0;
            while d0 < g.column[0] {
                let d1 = (d0 + chunk).min(g.column[0]);
                let pc = (d1 - d0) * g.plane();
                let xc = MatRef::strided(&xb[d0 * g.plane()..], self.in_channels, pc, p_total, 1);
                gemm(1.0, w.t(), xc, 0.0, &mut cols[..g.rows() * pc], pc, 1);
                g.col2im_add(&cols[..g.rows() * pc], d0, d1, out.item_mut(bi));
                d0 = d1;
            }
        }
        add_channel_bias(&mut out, &self.bias.value);
        Ok(out)
    }

    pub fn backward(&mut self, x: &Tensor, dy: &Tensor, grads: Grads) -> Result<Option<Tensor>> {
        let dims = spatial(x, &self.name, self.in_channels)?;
        let g = self.geometry(dims);
        let p_total = g.column_len();
        dy.expect_shape(
            &self.name,
            &[x.batch(), self.out_channels, g.image[0], g.image[1], g.image[2]],
        )?;
        if grads.bias {
            accumulate_channel_sums(dy, &mut self.bias.grad);
        }
        let mut dx = grads.input.then(|| Tensor::zeros(x.shape()));
        if !grads.input && !grads.weight {
            return Ok(dx);
        }
        let chunk = g.chunk();
        let mut cols = vec![0.0f32; g.rows() * chunk * g.plane()];
        for bi in 0..x.batch() {
            let mut d0 = 0;
            while d0 < g.column[0] {
                let d1 = (d0 + chunk).min(g.column[0]);
                let pc = (d1 - d0) * g.plane();
                g.im2col(dy.item(bi), d0, d1, &mut cols);
                let cm = MatRef::row_major(&cols[..g.rows() * pc], g.rows(), pc);
                if grads.weight {
                    let xc = MatRef::strided(&x.item(bi)[d0 * g.plane()..], self.in_channels, pc, p_total, 1);
                    gemm(1.0, xc, cm.t(), 1.0, &mut self.weight.grad, g.rows(), 1);
                }
                if let Some(dx) = dx.as_mut() {
                    let w = MatRef::row_major(&self.weight.value, self.in_channels, g.rows());
                    gemm(1.0, w, cm, 0.0, &mut dx.item_mut(bi)[d0 * g.plane()..], p_total, 1);
                }
                d0 = d1;
            }
        }
        Ok(dx)
    }
}

impl Module for ConvTranspose3d {
    fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }
    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Direct six-loop convolution used as the reference.
    fn naive_conv(conv: &Conv3d, x: &Tensor) -> Vec<f64> {
        let s = x.shape();
        let od = conv.output_dims([s[2], s[3], s[4]]);
        let mut out = Vec::new();
        for b in 0..s[0] {
            for co in 0..conv.out_channels {
                for z in 0..od[0] {
                    for y in 0..od[1] {
                        for xx in 0..od[2] {
                            let mut acc = conv.bias.value[co] as f64;
                            for ci in 0..conv.in_channels {
                                for kd in 0..4 {
                                    for kh in 0..4 {
                                        for kw in 0..4 {
                                            let iz = (z * conv.stride + kd) as isize - conv.pad_lo as isize;
                                            let iy = (y * conv.stride + kh) as isize - conv.pad_lo as isize;
                                            let ix = (xx * conv.stride + kw) as isize - conv.pad_lo as isize;
                                            if iz < 0 || iy < 0 || ix < 0 {
                                                continue;
                                            }
                                            let (iz, iy, ix) = (iz as usize, iy as usize, ix as usize);
                                            if iz >= s[2] || iy >= s[3] || ix >= s[4] {
                                                continue;
                                            }
                                            let xi = (((b * s[1] + ci) * s[2] + iz) * s[3] + iy) * s[4] + ix;
                                            let wi = (((co * conv.in_channels + ci) * 4 + kd) * 4 + kh) * 4 + kw;
                                            acc += conv.weight.value[wi] as f64 * x.data()[xi] as f64;
                                        }
                                    }
                                }
                            }
                            out.push(acc);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn conv_matches_naive_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for conv in [Conv3d::same("s", 2, 3, &mut rng), Conv3d::down("d", 2, 3, &mut rng)] {
            let mut conv = conv;
            conv.bias.value = vec![0.1, -0.2, 0.3];
            for v in &mut conv.weight.value {
                *v *= 20.0;
            }
            let x = random_tensor(&[2, 2, 6, 4, 8], &mut rng);
            let y = conv.forward(&x, true).unwrap();
            let reference = naive_conv(&conv, &x);
            assert_eq!(y.numel(), reference.len());
            for (a, b) in y.data().iter().zip(&reference) {
                assert!((*a as f64 - b).abs() < 1e-4, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn output_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(Conv3d::same("a", 1, 1, &mut rng).output_dims([64, 32, 16]), [64, 32, 16]);
        assert_eq!(Conv3d::down("b", 1, 1, &mut rng).output_dims([64, 32, 16]), [32, 16, 8]);
        assert_eq!(ConvTranspose3d::new("c", 1, 1, &mut rng).output_dims([2, 4, 8]), [4, 8, 16]);
    }

    /// <A x, y> = <x, Aᵀ y> ties the transposed conv to the strided conv.
    #[test]
    fn transpose_is_adjoint_of_strided_conv() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut down = Conv3d::down("d", 3, 2, &mut rng);
        let mut up = ConvTranspose3d::new("u", 2, 3, &mut rng);
        // same weights: conv [out=2,in=3,...] equals transpose [in=2,out=3,...]
        up.weight.value = down.weight.value.clone();
        down.bias.value.fill(0.0);
        let x = random_tensor(&[1, 3, 8, 8, 8], &mut rng);
        let y = random_tensor(&[1, 2, 4, 4, 4], &mut rng);
        let ax = down.forward(&x, false).unwrap();
        let aty = up.forward(&y).unwrap();
        let lhs: f64 = ax.data().iter().zip(y.data()).map(|(a, b)| (*a as f64) * (*b as f64)).sum();
        let rhs: f64 = x.data().iter().zip(aty.data()).map(|(a, b)| (*a as f64) * (*b as f64)).sum();
        assert!((lhs - rhs).abs() < 1e-4 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    /// Checks backward against central differences of `sum(r ⊙ f(x))`.
    fn check_grads<F, B>(x: &Tensor, params: &mut [f32], forward: F, backward: B)
    where
        F: Fn(&Tensor, &[f32]) -> Tensor,
        B: Fn(&Tensor, &[f32], &Tensor) -> (Tensor, Vec<f32>),
    {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = forward(x, params);
        let r = random_tensor(y.shape(), &mut rng);
        let loss = |x: &Tensor, p: &[f32]| -> f64 {
            forward(x, p).data().iter().zip(r.data()).map(|(a, b)| (*a as f64) * (*b as f64)).sum()
        };
        let (dx, dp) = backward(x, params, &r);
        let h = 1e-2f32;
        for i in (0..x.numel()).step_by(7) {
            let mut xp = x.clone();
            xp.data_mut()[i] += h;
            let mut xm = x.clone();
            xm.data_mut()[i] -= h;
            let fd = (loss(&xp, params) - loss(&xm, params)) / (2.0 * h as f64);
            assert!((fd - dx.data()[i] as f64).abs() < 2e-3, "dx[{i}] fd {fd} vs {}", dx.data()[i]);
        }
        for i in (0..params.len()).step_by(5) {
            let orig = params[i];
            params[i] = orig + h;
            let lp = loss(x, params);
            params[i] = orig - h;
            let lm = loss(x, params);
            params[i] = orig;
            let fd = (lp - lm) / (2.0 * h as f64);
            assert!((fd - dp[i] as f64).abs() < 2e-3, "dw[{i}] fd {fd} vs {}", dp[i]);
        }
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for stride in [1, 2] {
            let conv = if stride == 1 {
                Conv3d::same("c", 2, 3, &mut rng)
            } else {
                Conv3d::down("c", 2, 3, &mut rng)
            };
            let x = random_tensor(&[2, 2, 4, 6, 4], &mut rng);
            let mut w = conv.weight.value.clone();
            let c1 = conv.clone();
            let c2 = conv.clone();
            check_grads(
                &x,
                &mut w,
                move |x, w| {
                    let mut c = c1.clone();
                    c.weight.value = w.to_vec();
                    c.forward(x, true).unwrap()
                },
                move |x, w, dy| {
                    let mut c = c2.clone();
                    c.weight.value = w.to_vec();
                    let dx = c.backward(x, dy, Grads::ALL).unwrap().unwrap();
                    (dx, c.weight.grad)
                },
            );
        }
    }

    #[test]
    fn transpose_backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let up = ConvTranspose3d::new("u", 3, 2, &mut rng);
        let x = random_tensor(&[2, 3, 2, 3, 2], &mut rng);
        let mut w = up.weight.value.clone();
        let u1 = up.clone();
        let u2 = up;
        check_grads(
            &x,
            &mut w,
            move |x, w| {
                let mut u = u1.clone();
                u.weight.value = w.to_vec();
                u.forward(x).unwrap()
            },
            move |x, w, dy| {
                let mut u = u2.clone();
                u.weight.value = w.to_vec();
                let dx = u.backward(x, dy, Grads::ALL).unwrap().unwrap();
                (dx, u.weight.grad)
            },
        );
    }

    #[test]
    fn bias_gradient_is_channel_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut conv = Conv3d::down("c", 1, 2, &mut rng);
        let x = random_tensor(&[3, 1, 4, 4, 4], &mut rng);
        let dy = Tensor::from_vec(&[3, 2, 2, 2, 2], vec![0.5; 48]).unwrap();
        conv.backward(&x, &dy, Grads::ALL).unwrap();
        assert_eq!(conv.bias.grad, vec![12.0, 12.0]);
    }

    #[test]
    fn wrong_channel_count_names_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let conv = Conv3d::same("enc0", 2, 3, &mut rng);
        match conv.forward(&Tensor::zeros(&[1, 1, 4, 4, 4]), true) {
            Err(Error::Shape { layer, .. }) => assert_eq!(layer, "enc0"),
            other => panic!("{other:?}"),
        }
    }
}
