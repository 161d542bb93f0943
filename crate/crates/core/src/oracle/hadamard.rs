use serde::Serialize;

use crate::constraints::moment_matrix;
use crate::error::{domain, Result};
use crate::pauli::PauliString;
use crate::states::{moments_from_distribution, parity_sign, Distribution};

/// Largest collection for which the factorization is checked.
pub const MAX_FACTOR_SIZE: usize = 6;

/// `K = B P Bᵀ` with `P = diag(p)` and `[B]_ij = 2^{-m/2} (-1)^{i·j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardFactorization {
    m: usize,
    p: Vec<f64>,
    b: Vec<f64>,
}

impl HadamardFactorization {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        if !d.is_power_of_two() || d < 2 || d > 1 << MAX_FACTOR_SIZE {
            return Err(domain(format!("distribution length {d} is not 2^m with 1 <= m <= {MAX_FACTOR_SIZE}")));
        }
        let m = d.trailing_zeros() as usize;
        let norm = (d as f64).sqrt().recip();
        let b = (0..d * d).map(|k| norm * parity_sign(k / d, k % d)).collect();
        Ok(HadamardFactorization { m, p: probs.to_vec(), b })
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `B P Bᵀ`, row-major.
    pub fn product(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = (0..d).map(|k| self.b[i * d + k] * self.p[k] * self.b[j * d + k]).sum();
            }
        }
        out
    }

    /// `max |B Bᵀ - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let v: f64 = (0..d).map(|k| self.b[i * d + k] * self.b[j * d + k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Compares the scaled moment matrix of `c` under `probs` with `B P Bᵀ`.
pub fn hadamard_factorization_check(c: &[PauliString], probs: &[f64]) -> Result<FactorizationCheck> {
    let f = HadamardFactorization::new(probs)?;
    if c.len() != f.m {
        return Err(domain(format!("{} measurements but a 2^{} outcome table", c.len(), f.m)));
    }
    let moments = moments_from_distribution(&Distribution::new(c.to_vec(), probs.to_vec())?)?;
    let k = moment_matrix(c, &moments, true)?;
    let bpb = f.product();
    let max_deviation = k.data().iter().zip(&bpb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(FactorizationCheck { holds: max_deviation <= 1e-12, max_deviation })
}
