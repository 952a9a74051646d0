use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn randn<R: Rng + ?Sized>(shape: &[usize], std: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * std
            })
            .collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        if self.shape.len() < 2 {
            1
        } else {
            self.shape[0]
        }
    }

    pub fn cols(&self) -> usize {
        *self.shape.last().unwrap_or(&1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    /// Build a `[rows.len(), width]` matrix from row slices.
    pub fn from_rows(rows: &[&[f64]], width: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            debug_assert_eq!(r.len(), width);
            data.extend_from_slice(r);
        }
        Tensor {
            shape: vec![rows.len(), width],
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `[n, k] x [k, m] -> [n, m]`
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        let (n, k, m) = (self.rows(), self.cols(), other.cols());
        debug_assert_eq!(k, other.rows(), "matmul inner dims");
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let a_row = &self.data[i * k..(i + 1) * k];
            let o_row = &mut out[i * m..(i + 1) * m];
            for (p, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * m..(p + 1) * m];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Tensor {
            shape: vec![n, m],
            data: out,
        }
    }

    /// `self^T x other`: `[k, n]^T x [k, m] -> [n, m]`
    pub fn matmul_tn(&self, other: &Tensor) -> Tensor {
        let (k, n, m) = (self.rows(), self.cols(), other.cols());
        debug_assert_eq!(k, other.rows(), "matmul_tn inner dims");
        let mut out = vec![0.0; n * m];
        for p in 0..k {
            let a_row = &self.data[p * n..(p + 1) * n];
            let b_row = &other.data[p * m..(p + 1) * m];
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let o_row = &mut out[i * m..(i + 1) * m];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Tensor {
            shape: vec![n, m],
            data: out,
        }
    }

    /// `self x other^T`: `[n, k] x [m, k]^T -> [n, m]`
    pub fn matmul_nt(&self, other: &Tensor) -> Tensor {
        let (n, k, m) = (self.rows(), self.cols(), other.rows());
        debug_assert_eq!(k, other.cols(), "matmul_nt inner dims");
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let a_row = &self.data[i * k..(i + 1) * k];
            for j in 0..m {
                let b_row = &other.data[j * k..(j + 1) * k];
                out[i * m + j] = dot(a_row, b_row);
            }
        }
        Tensor {
            shape: vec![n, m],
            data: out,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out += x W` for a row vector `x` and matrix `W: [x.len(), out.len()]`.
pub fn vec_mat_acc(x: &[f64], w: &Tensor, out: &mut [f64]) {
    let m = out.len();
    debug_assert_eq!(w.cols(), m);
    for (p, &a) in x.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = &w.data()[p * m..(p + 1) * m];
        for (o, &b) in out.iter_mut().zip(row) {
            *o += a * b;
        }
    }
}

/// `out += W y` for `W: [out.len(), y.len()]` (the transpose product).
pub fn mat_vec_acc(w: &Tensor, y: &[f64], out: &mut [f64]) {
    let m = y.len();
    for (p, o) in out.iter_mut().enumerate() {
        *o += dot(&w.data()[p * m..(p + 1) * m], y);
    }
}

/// `G += x^T y` (outer product) for `G: [x.len(), y.len()]`.
pub fn outer_acc(g: &mut Tensor, x: &[f64], y: &[f64]) {
    let m = y.len();
    for (p, &a) in x.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = &mut g.data_mut()[p * m..(p + 1) * m];
        for (o, &b) in row.iter_mut().zip(y) {
            *o += a * b;
        }
    }
}
