//! Parameter tensors, initialization, and flat-coordinate access used by
//! the optimizer and the gradient checker.

use std::ops::{Index, IndexMut};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Matrix<S> {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Matrix<S> {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

/// LSTM weights for one direction. Gate rows are stacked input, forget,
/// cell candidate, output; each block is `hidden` rows tall.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionParams<S> {
    /// 4*hidden x embedding_dim
    pub w: Matrix<S>,
    /// 4*hidden x hidden
    pub u: Matrix<S>,
    /// 4*hidden
    pub b: Vec<S>,
}

/// All trainable tensors of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<S> {
    /// vocab_size x embedding_dim
    pub embedding: Matrix<S>,
    pub fwd: DirectionParams<S>,
    pub bwd: DirectionParams<S>,
    /// local head: 2 x 2*hidden; global head: max_len x 2*hidden
    pub head_w: Matrix<S>,
    pub head_b: Vec<S>,
}

/// Gradients with the exact shapes of [`ModelParams`].
pub type GradientSet<S> = ModelParams<S>;

impl<S: Scalar> ModelParams<S> {
    pub fn zeros(config: &ModelConfig) -> ModelParams<S> {
        let h = config.hidden_units;
        let direction = || DirectionParams {
            w: Matrix::zeros(4 * h, config.embedding_dim),
            u: Matrix::zeros(4 * h, h),
            b: vec![S::zero(); 4 * h],
        };
        ModelParams {
            embedding: Matrix::zeros(config.vocab_size, config.embedding_dim),
            fwd: direction(),
            bwd: direction(),
            head_w: Matrix::zeros(config.head_rows(), 2 * h),
            head_b: vec![S::zero(); config.head_rows()],
        }
    }

    pub fn zeros_like(&self) -> ModelParams<S> {
        let direction = |d: &DirectionParams<S>| DirectionParams {
            w: Matrix::zeros(d.w.rows, d.w.cols),
            u: Matrix::zeros(d.u.rows, d.u.cols),
            b: vec![S::zero(); d.b.len()],
        };
        ModelParams {
            embedding: Matrix::zeros(self.embedding.rows, self.embedding.cols),
            fwd: direction(&self.fwd),
            bwd: direction(&self.bwd),
            head_w: Matrix::zeros(self.head_w.rows, self.head_w.cols),
            head_b: vec![S::zero(); self.head_b.len()],
        }
    }

    /// Tensors in a fixed order; flat coordinates index this order.
    pub fn tensors(&self) -> [(&'static str, &[S]); 9] {
        [
            ("embedding", self.embedding.as_slice()),
            ("fwd.w", self.fwd.w.as_slice()),
            ("fwd.u", self.fwd.u.as_slice()),
            ("fwd.b", &self.fwd.b),
            ("bwd.w", self.bwd.w.as_slice()),
            ("bwd.u", self.bwd.u.as_slice()),
            ("bwd.b", &self.bwd.b),
            ("head.w", self.head_w.as_slice()),
            ("head.b", &self.head_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [S]); 9] {
        [
            ("embedding", self.embedding.as_mut_slice()),
            ("fwd.w", self.fwd.w.as_mut_slice()),
            ("fwd.u", self.fwd.u.as_mut_slice()),
            ("fwd.b", &mut self.fwd.b),
            ("bwd.w", self.bwd.w.as_mut_slice()),
            ("bwd.u", self.bwd.u.as_mut_slice()),
            ("bwd.b", &mut self.bwd.b),
            ("head.w", self.head_w.as_mut_slice()),
            ("head.b", &mut self.head_b),
        ]
    }

    pub fn flat_len(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn flat_get(&self, mut index: usize) -> S {
        for (_, t) in self.tensors() {
            if index < t.len() {
                return t[index];
            }
            index -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_add(&mut self, mut index: usize, delta: S) {
        for (_, t) in self.tensors_mut() {
            if index < t.len() {
                t[index] += delta;
                return;
            }
            index -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_set(&mut self, mut index: usize, value: S) {
        for (_, t) in self.tensors_mut() {
            if index < t.len() {
                t[index] = value;
                return;
            }
            index -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}

fn fill_uniform<S: Scalar>(slice: &mut [S], radius: f64, rng: &mut ChaCha8Rng) {
    for x in slice {
        let draw = rng.random::<f64>() * 2.0 * radius - radius;
        *x = S::from_f64(draw).expect("uniform draw fits scalar");
    }
}

fn glorot_radius(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Deterministic initialization: uniform(-r, r) with
/// r = sqrt(6 / (fan_in + fan_out)) for weight matrices, zero biases except
/// the LSTM forget-gate block, which starts at 1.
pub fn init_params<S: Scalar>(config: &ModelConfig, seed: u64) -> ModelParams<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = config.hidden_units;
    let mut params = ModelParams::zeros(config);

    fill_uniform(
        params.embedding.as_mut_slice(),
        glorot_radius(config.vocab_size, config.embedding_dim),
        &mut rng,
    );
    let w_radius = glorot_radius(config.embedding_dim, 4 * h);
    let u_radius = glorot_radius(h, 4 * h);
    for direction in [&mut params.fwd, &mut params.bwd] {
        fill_uniform(direction.w.as_mut_slice(), w_radius, &mut rng);
        fill_uniform(direction.u.as_mut_slice(), u_radius, &mut rng);
        // forget-gate block sits at rows h..2h
        for g in h..2 * h {
            direction.b[g] = S::one();
        }
    }
    fill_uniform(
        params.head_w.as_mut_slice(),
        glorot_radius(2 * h, config.head_rows()),
        &mut rng,
    );
    params
}
