use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::pauli::PauliString;
use crate::states::{CliffordCircuit, CoefficientState, Gate};
use crate::tol;

/// Largest system count realized densely.
pub const MAX_DENSE_SYSTEMS: usize = 6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major complex `d x d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    d: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(d: usize) -> Self {
        DenseMatrix { d, data: vec![ZERO; d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(domain("matrix rows must form a square"));
        }
        Ok(DenseMatrix { d, data: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.d + j] = v;
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.d != other.d {
            return Err(Error::Dimension { expected: self.d, found: other.d });
        }
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.d != other.d {
            return Err(Error::Dimension { expected: self.d, found: other.d });
        }
        Ok(DenseMatrix { d: self.d, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix { d: self.d, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// `A ⊗ B`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let (da, db) = (self.d, other.d);
        let d = da * db;
        let mut out = Self::zeros(d);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * d + j * db + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_SYSTEMS {
        return Err(Error::Resource(format!("dense realization needs 1..={MAX_DENSE_SYSTEMS} systems, got {n}")));
    }
    Ok(())
}

/// The 2x2 matrices `I, X, Y, Z` as rows.
pub fn single_pauli(x: bool, z: bool) -> DenseMatrix {
    let i = Complex64::new(0.0, 1.0);
    let rows = match (x, z) {
        (false, false) => [[ONE, ZERO], [ZERO, ONE]],
        (true, false) => [[ZERO, ONE], [ONE, ZERO]],
        (false, true) => [[ONE, ZERO], [ZERO, -ONE]],
        (true, true) => [[ZERO, -i], [i, ZERO]],
    };
    DenseMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("square")
}

/// Dense `i^k sigma(x, z)` by explicit Kronecker products, system 0 leftmost.
pub fn dense_pauli(p: &PauliString) -> Result<DenseMatrix> {
    let n = p.num_systems();
    check_size(n)?;
    let mut m = DenseMatrix::identity(1);
    for j in 0..n {
        m = m.kron(&single_pauli(p.x_bits() >> j & 1 == 1, p.z_bits() >> j & 1 == 1));
    }
    let phase = Complex64::new(0.0, 1.0).powu(p.phase() as u32);
    Ok(m.scale(phase))
}

/// `rho = (I + sum s sigma) / 2^n`.
pub fn dense_state(state: &CoefficientState) -> Result<DenseMatrix> {
    let n = state.num_systems();
    check_size(n)?;
    let d = 1usize << n;
    let mut rho = DenseMatrix::identity(d);
    for (s, c) in state.terms() {
        rho = rho.add(&dense_pauli(&s)?.scale(Complex64::new(c, 0.0)))?;
    }
    Ok(rho.scale(Complex64::new(1.0 / d as f64, 0.0)))
}

fn embed(n: usize, ops: &[(usize, &DenseMatrix)]) -> DenseMatrix {
    let mut m = DenseMatrix::identity(1);
    for j in 0..n {
        let op =
            ops.iter().find(|(t, _)| *t == j).map(|(_, m)| (*m).clone()).unwrap_or_else(|| DenseMatrix::identity(2));
        m = m.kron(&op);
    }
    m
}

fn dense_gate(n: usize, g: &Gate) -> DenseMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::I(_) => DenseMatrix::identity(1 << n),
        Gate::X(t) => embed(n, &[(t, &single_pauli(true, false))]),
        Gate::Y(t) => embed(n, &[(t, &single_pauli(true, true))]),
        Gate::Z(t) => embed(n, &[(t, &single_pauli(false, true))]),
        Gate::H(t) => {
            let hm = DenseMatrix::from_rows(vec![
                vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ])
            .expect("square");
            embed(n, &[(t, &hm)])
        }
        Gate::Cnot { control, target } => {
            // |0><0| ⊗ I + |1><1| ⊗ X on the two systems
            let p0 = DenseMatrix::from_rows(vec![vec![ONE, ZERO], vec![ZERO, ZERO]]).expect("square");
            let p1 = DenseMatrix::from_rows(vec![vec![ZERO, ZERO], vec![ZERO, ONE]]).expect("square");
            let x = single_pauli(true, false);
            embed(n, &[(control, &p0)]).add(&embed(n, &[(control, &p1), (target, &x)])).expect("same size")
        }
    }
}

/// The unitary `U = G_last ⋯ G_first` of a circuit.
pub fn dense_circuit(circuit: &CliffordCircuit) -> Result<DenseMatrix> {
    let n = circuit.num_systems();
    check_size(n)?;
    let mut u = DenseMatrix::identity(1 << n);
    for g in circuit.gates() {
        u = dense_gate(n, g).matmul(&u)?;
    }
    Ok(u)
}

/// `Tr(rho S)`, real part.
pub fn dense_expectation(rho: &DenseMatrix, s: &DenseMatrix) -> Result<f64> {
    Ok(rho.matmul(s)?.trace().re)
}

/// True when `P Q + Q P = 0`.
pub fn dense_anticommute(p: &DenseMatrix, q: &DenseMatrix) -> Result<bool> {
    let ac = p.matmul(q)?.add(&q.matmul(p)?)?;
    Ok(ac.max_abs_diff(&DenseMatrix::zeros(p.dim())) <= tol::EXACT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_y() {
        assert_eq!(dense_pauli(&"II".parse().unwrap()).unwrap(), DenseMatrix::identity(4));
        let y = dense_pauli(&"Y".parse().unwrap()).unwrap();
        assert_eq!(y.get(0, 1), Complex64::new(0.0, -1.0));
        assert_eq!(y.get(1, 0), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn xz_is_minus_i_y() {
        let x = dense_pauli(&"X".parse().unwrap()).unwrap();
        let z = dense_pauli(&"Z".parse().unwrap()).unwrap();
        let y = dense_pauli(&"-i Y".parse().unwrap()).unwrap();
        assert!(x.matmul(&z).unwrap().max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn cnot_matrix() {
        let c = CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let u = dense_circuit(&c).unwrap();
        // |10> -> |11> with system 0 the most significant bit of the row index
        assert_eq!(u.get(3, 2), ONE);
        assert_eq!(u.get(2, 3), ONE);
        assert_eq!(u.get(0, 0), ONE);
    }

    #[test]
    fn oversize_is_refused() {
        let p = PauliString::identity(7);
        assert!(matches!(dense_pauli(&p), Err(Error::Resource(_))));
    }
}
