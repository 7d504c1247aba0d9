//! Elementwise activations. Backward passes read the forward output, which
//! carries the same sign information as the pre-activation.

use super::Tensor;

pub const LEAKY_SLOPE: f32 = 0.2;

pub fn leaky_relu(t: &mut Tensor) {
    for v in t.data_mut() {
        if *v < 0.0 {
            *v *= LEAKY_SLOPE;
        }
    }
}

pub fn leaky_relu_backward(out: &Tensor, dy: &mut Tensor) {
    for (g, &o) in dy.data_mut().iter_mut().zip(out.data()) {
        if o < 0.0 {
            *g *= LEAKY_SLOPE;
        }
    }
}

pub fn relu(t: &mut Tensor) {
    for v in t.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes `dy` wherever the unit was inactive.
pub fn relu_backward(out: &Tensor, dy: &mut Tensor) {
    for (g, &o) in dy.data_mut().iter_mut().zip(out.data()) {
        if o <= 0.0 {
            *g = 0.0;
        }
    }
}

pub fn sigmoid_scalar(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(t: &mut Tensor) {
    for v in t.data_mut() {
        *v = sigmoid_scalar(*v);
    }
}

pub fn sigmoid_backward(out: &Tensor, dy: &mut Tensor) {
    for (g, &o) in dy.data_mut().iter_mut().zip(out.data()) {
        *g *= o * (1.0 - o);
    }
}
