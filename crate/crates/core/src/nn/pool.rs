use super::Tensor;
use crate::error::{Error, Result};

/// 2×2×2 max pooling with stride 2. Returns the pooled tensor and, per output
/// element, the flat in-item index of the winning input.
pub fn max_pool2(x: &Tensor, layer: &str) -> Result<(Tensor, Vec<u32>)> {
    let s = x.shape();
    if s.len() != 5 || s[2..].iter().any(|d| d % 2 != 0) {
        return Err(Error::Shape {
            layer: layer.to_string(),
            expected: vec![s.first().copied().unwrap_or(0), s.get(1).copied().unwrap_or(0), 2, 2, 2],
            got: s.to_vec(),
        });
    }
    let (c, d, h, w) = (s[1], s[2], s[3], s[4]);
    let (od, oh, ow) = (d / 2, h / 2, w / 2);
    let mut out = Tensor::zeros(&[s[0], c, od, oh, ow]);
    let mut idx = vec![0u32; out.numel()];
    let out_item = c * od * oh * ow;
    for b in 0..s[0] {
        let xin = x.item(b);
        let y = out.item_mut(b);
        let mut o = 0;
        for ch in 0..c {
            for z in 0..od {
                for yy in 0..oh {
                    for xx in 0..ow {
                        let mut best = f32::NEG_INFINITY;
                        let mut arg = 0;
                        for dz in 0..2 {
                            for dy in 0..2 {
                                let base = ((ch * d + 2 * z + dz) * h + 2 * yy + dy) * w + 2 * xx;
                                for i in base..base + 2 {
                                    if xin[i] > best {
                                        best = xin[i];
                                        arg = i;
                                    }
                                }
                            }
                        }
                        y[o] = best;
                        idx[b * out_item + o] = arg as u32;
                        o += 1;
                    }
                }
            }
        }
    }
    Ok((out, idx))
}

pub fn max_pool2_backward(dy: &Tensor, idx: &[u32], input_shape: &[usize]) -> Tensor {
    let mut dx = Tensor::zeros(input_shape);
    let per = dy.item_len();
    for b in 0..dy.batch() {
        let g = dy.item(b);
        let d = dx.item_mut(b);
        for (o, &i) in idx[b * per..(b + 1) * per].iter().enumerate() {
            d[i as usize] += g[o];
        }
    }
    dx
}
