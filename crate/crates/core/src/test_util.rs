use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{standardize, Dataset};
use crate::linalg::Matrix;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

}

/// Standardized Gaussian design with a sparse, partly tied signal.
pub fn random_dataset(rng: &mut Rng, n: usize, p: usize) -> Dataset {
    let x: Vec<f64> = (0..n * p).map(|_| rng.normal()).collect();
    let x = Matrix::from_row_major(n, p, &x).unwrap();
    let beta: Vec<f64> = (0..p)
        .map(|j| match j % 3 {
            0 => 1.5,
            1 => 0.0,
            _ => rng.normal(),
        })
        .collect();
    let mut y = x.mul_vec(&beta);
    for v in y.iter_mut() {
        *v += 0.5 * rng.normal();
    }
    standardize(&x, &y).unwrap().0
}
