#![allow(dead_code)]

use horses_core::{standardize, Dataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Gen(pub ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..=hi)
    }

    pub fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.0.random_range(0..xs.len())]
    }

    /// Standardized design whose columns share a common factor of random
    /// strength, with a sparse tied signal plus noise.
    pub fn dataset(&mut self, n: usize, p: usize) -> Dataset {
        let shared = self.0.random_range(0.0..0.9);
        let mut x = Matrix::zeros(n, p);
        for i in 0..n {
            let z = self.normal();
            for j in 0..p {
                let e = self.normal();
                x.set(i, j, shared * z + (1.0 - shared) * e);
            }
        }
        let beta: Vec<f64> = (0..p)
            .map(|j| match j % 4 {
                0 | 1 => 2.0,
                2 => 0.0,
                _ => self.normal(),
            })
            .collect();
        let mut y = x.mul_vec(&beta);
        for v in y.iter_mut() {
            *v += self.normal();
        }
        standardize(&x, &y).unwrap().0
    }
}
