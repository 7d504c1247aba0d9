//! Minimal CPU tensor engine: just the layers the generator and critic need.

mod act;
mod conv;
mod gemm;
mod linear;
mod optim;
mod param;
mod pool;
mod tensor;

pub use act::{
    leaky_relu, leaky_relu_backward, relu, relu_backward, sigmoid, sigmoid_backward, sigmoid_scalar,
    LEAKY_SLOPE,
};
pub use conv::{Conv3d, ConvTranspose3d, Grads, KERNEL};
pub use linear::Linear;
pub use optim::Adam;
pub use param::{Module, Param, INIT_STD};
pub use pool::{max_pool2, max_pool2_backward};
pub use tensor::Tensor;
