//! Per-action ridge state: exact Gram/moment sums plus a lower Cholesky
//! factor kept current by rank-1 updates.

use crate::error::{BanditError, Result};

/// Rank-1 updates applied before the factor is rebuilt from the exact Gram
/// matrix.
pub(crate) const REFACTOR_EVERY: usize = 64;

/// Relative pivot floor used to declare an unregularized system singular.
const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct RidgeBlock {
    dim: usize,
    lambda: f64,
    /// `λI + Σ x xᵀ`, row-major.
    gram: Vec<f64>,
    /// `Σ ℓ x`.
    moment: Vec<f64>,
    /// Lower-triangular `L` with `L Lᵀ = gram`; `None` when it must be rebuilt.
    factor: Option<Vec<f64>>,
    since_refactor: usize,
    samples: usize,
}

impl RidgeBlock {
    pub(crate) fn new(dim: usize, lambda: f64) -> Self {
        let mut gram = vec![0.0; dim * dim];
        let mut factor = vec![0.0; dim * dim];
        let root = lambda.sqrt();
        for i in 0..dim {
            gram[i * dim + i] = lambda;
            factor[i * dim + i] = root;
        }
        Self {
            dim,
            lambda,
            gram,
            moment: vec![0.0; dim],
            factor: (lambda > 0.0).then_some(factor),
            since_refactor: 0,
            samples: 0,
        }
    }

    pub(crate) fn samples(&self) -> usize {
        self.samples
    }

    pub(crate) fn add(&mut self, x: &[f64], loss: f64) {
        let d = self.dim;
        for i in 0..d {
            self.moment[i] += loss * x[i];
            for j in 0..d {
                self.gram[i * d + j] += x[i] * x[j];
            }
        }
        self.samples += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.factor = None;
        }
        if let Some(l) = self.factor.as_mut() {
            rank_one_update(l, d, x);
        }
    }

    /// Solves `gram · w = moment`.
    pub(crate) fn solve(&mut self) -> Result<Vec<f64>> {
        if self.factor.is_none() {
            self.factor = Some(factorize(&self.gram, self.dim, self.lambda == 0.0)?);
            self.since_refactor = 0;
        }
        let l = self.factor.as_ref().expect("factor present");
        Ok(cholesky_solve(l, self.dim, &self.moment))
    }
}

/// Dense Cholesky `A = L Lᵀ`.
pub(crate) fn factorize(a: &[f64], n: usize, strict: bool) -> Result<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        let floor = if strict { SINGULAR_PIVOT * scale } else { 0.0 };
        if diag.is_nan() || diag <= floor {
            return Err(BanditError::IllPosed);
        }
        let root = diag.sqrt();
        l[j * n + j] = root;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / root;
        }
    }
    Ok(l)
}

/// Updates `L` in place so that `L Lᵀ` gains `x xᵀ`.
fn rank_one_update(l: &mut [f64], n: usize, x: &[f64]) {
    let mut x = x.to_vec();
    for k in 0..n {
        let lkk = l[k * n + k];
        let r = lkk.hypot(x[k]);
        let c = r / lkk;
        let s = x[k] / lkk;
        l[k * n + k] = r;
        for i in k + 1..n {
            l[i * n + k] = (l[i * n + k] + s * x[i]) / c;
            x[i] = c * x[i] - s * l[i * n + k];
        }
    }
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(l: &[f64], n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
            }
        }
        a
    }

    #[test]
    fn rank_one_update_matches_refactorization() {
        let n = 3;
        let mut block = RidgeBlock::new(n, 0.5);
        let xs = [[1.0, 0.2, -0.3], [0.0, 2.0, 1.0], [-1.5, 0.5, 0.25]];
        for x in &xs {
            block.add(x, 0.4);
        }
        let updated = block.factor.clone().unwrap();
        let fresh = factorize(&block.gram, n, false).unwrap();
        for (u, f) in updated.iter().zip(&fresh) {
            assert!((u - f).abs() < 1e-12);
        }
        let rebuilt = reconstruct(&updated, n);
        for (r, g) in rebuilt.iter().zip(&block.gram) {
            assert!((r - g).abs() < 1e-12);
        }
    }

    #[test]
    fn one_by_one_system() {
        let mut block = RidgeBlock::new(1, 1e-12);
        block.add(&[1.0], 0.3);
        let w = block.solve().unwrap();
        assert!((w[0] - 0.3).abs() < 1e-10);
    }

    #[test]
    fn unregularized_rank_deficient_is_ill_posed() {
        let mut block = RidgeBlock::new(2, 0.0);
        block.add(&[1.0, 1.0], 0.5);
        assert!(matches!(block.solve(), Err(BanditError::IllPosed)));
        block.add(&[1.0, -1.0], 0.1);
        let w = block.solve().unwrap();
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn refactor_cadence() {
        let mut block = RidgeBlock::new(2, 1.0);
        for i in 0..REFACTOR_EVERY {
            block.add(&[1.0, i as f64 * 0.01], 0.5);
        }
        assert!(block.factor.is_none());
        block.solve().unwrap();
        assert!(block.factor.is_some());
        assert_eq!(block.since_refactor, 0);
    }
}
