use crate::error::{Error, Result};

/// Dense row-major f32 array. Activations use `[batch, channels, d, h, w]`
/// or `[batch, features]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f32>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::Shape {
                layer: "tensor".into(),
                expected: shape.to_vec(),
                got: vec![data.len()],
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    /// Elements per batch item.
    pub fn item_len(&self) -> usize {
        self.data.len() / self.shape[0].max(1)
    }

    pub fn item(&self, b: usize) -> &[f32] {
        let l = self.item_len();
        &self.data[b * l..(b + 1) * l]
    }

    pub fn item_mut(&mut self, b: usize) -> &mut [f32] {
        let l = self.item_len();
        &mut self.data[b * l..(b + 1) * l]
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::Shape {
                layer: "reshape".into(),
                expected: shape.to_vec(),
                got: self.shape,
            });
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn expect_shape(&self, layer: &str, expected: &[usize]) -> Result<()> {
        if self.shape != expected {
            return Err(Error::Shape {
                layer: layer.to_string(),
                expected: expected.to_vec(),
                got: self.shape.clone(),
            });
        }
        Ok(())
    }

    /// Concatenate along axis 1; all other axes must agree.
    pub fn concat_channels(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.shape.len() < 2
            || a.shape.len() != b.shape.len()
            || a.shape[0] != b.shape[0]
            || a.shape[2..] != b.shape[2..]
        {
            return Err(Error::Shape {
                layer: "concat".into(),
                expected: a.shape.clone(),
                got: b.shape.clone(),
            });
        }
        let mut shape = a.shape.clone();
        shape[1] += b.shape[1];
        let mut data = Vec::with_capacity(a.data.len() + b.data.len());
        for i in 0..a.batch() {
            data.extend_from_slice(a.item(i));
            data.extend_from_slice(b.item(i));
        }
        Ok(Tensor { shape, data })
    }

    /// Inverse of `concat_channels`: split axis 1 after `first` channels.
    pub fn split_channels(&self, first: usize) -> (Tensor, Tensor) {
        let per_channel: usize = self.shape[2..].iter().product();
        let la = first * per_channel;
        let mut sa = self.shape.clone();
        sa[1] = first;
        let mut sb = self.shape.clone();
        sb[1] -= first;
        let mut da = Vec::with_capacity(self.batch() * la);
        let mut db = Vec::with_capacity(self.data.len() - self.batch() * la);
        for i in 0..self.batch() {
            let item = self.item(i);
            da.extend_from_slice(&item[..la]);
            db.extend_from_slice(&item[la..]);
        }
        (Tensor { shape: sa, data: da }, Tensor { shape: sb, data: db })
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f32) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
