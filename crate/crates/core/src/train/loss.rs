use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-7;

fn check_len(target: &[f32], output: &[f32]) -> Result<()> {
    if target.len() != output.len() || target.is_empty() {
        return Err(Error::Shape {
            layer: "loss_ae".into(),
            expected: vec![target.len()],
            got: vec![output.len()],
        });
    }
    Ok(())
}

/// Class-weighted binary cross-entropy, averaged over voxels.
pub fn loss_ae(target: &[f32], output: &[f32], alpha: f64) -> Result<f64> {
    Ok(loss_ae_grad(target, output, alpha)?.0)
}

/// `loss_ae` together with its gradient with respect to `output`. Where the
/// clamp is active the gradient is zero.
pub fn loss_ae_grad(target: &[f32], output: &[f32], alpha: f64) -> Result<(f64, Vec<f32>)> {
    check_len(target, output)?;
    let n = target.len() as f64;
    let mut sum = 0.0;
    let mut grad = Vec::with_capacity(target.len());
    for (&t, &o) in target.iter().zip(output) {
        let (t, raw) = (t as f64, o as f64);
        let o = raw.clamp(PROB_EPS, 1.0 - PROB_EPS);
        sum += -alpha * t * o.ln() - (1.0 - alpha) * (1.0 - t) * (1.0 - o).ln();
        let g = if raw == o {
            (-alpha * t / o + (1.0 - alpha) * (1.0 - t) / (1.0 - o)) / n
        } else {
            0.0
        };
        grad.push(g as f32);
    }
    Ok((sum / n, grad))
}

/// `β·L_AE + (1−β)·L_gan`.
pub fn loss_total(l_ae: f64, l_gan_g: f64, beta: f64) -> f64 {
    beta * l_ae + (1.0 - beta) * l_gan_g
}

/// Partial derivatives of `loss_total` with respect to `(l_ae, l_gan_g)`.
pub fn loss_total_grad(beta: f64) -> (f64, f64) {
    (beta, 1.0 - beta)
}

/// `λ · mean((‖g‖ − 1)²)` over per-sample input-gradient norms.
pub fn gradient_penalty(grad_norms: &[f64], lambda: f64) -> f64 {
    if grad_norms.is_empty() {
        return 0.0;
    }
    lambda * grad_norms.iter().map(|n| (n - 1.0).powi(2)).sum::<f64>() / grad_norms.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GanLosses {
    pub d_loss: f64,
    pub g_loss: f64,
    pub gp: f64,
}

fn mean(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64).sum::<f64>() / v.len().max(1) as f64
}

/// Wasserstein critic and generator objectives with gradient penalty.
pub fn loss_gan(real_scores: &[f32], fake_scores: &[f32], grad_norms: &[f64], lambda: f64) -> GanLosses {
    let gp = gradient_penalty(grad_norms, lambda);
    GanLosses {
        d_loss: mean(fake_scores) - mean(real_scores) + gp,
        g_loss: -mean(fake_scores),
        gp,
    }
}
