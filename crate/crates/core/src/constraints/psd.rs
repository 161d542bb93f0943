use nalgebra::DMatrix;

use super::report::ValidationReport;
use crate::error::{domain, Error, Result};
use crate::pauli::{pauli_product, symplectic_form, PauliString};
use crate::states::{expectation, CoefficientState, MomentTable};

/// Largest base set for a moment matrix (a `4096 x 4096` matrix).
pub const MAX_MOMENT_SIZE: usize = 12;

/// `s_k = M_0^{k_0} M_1^{k_1} ⋯` for `k in {0,1}^m`, bit `t` of `k` selecting `M_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SVector {
    base: Vec<PauliString>,
    entries: Vec<PauliString>,
}

impl SVector {
    pub fn new(base: &[PauliString]) -> Result<Self> {
        let m = base.len();
        if m == 0 {
            return Err(domain("the base set is empty"));
        }
        if m > MAX_MOMENT_SIZE {
            return Err(Error::Resource(format!("moment matrices support at most {MAX_MOMENT_SIZE} measurements")));
        }
        for (i, a) in base.iter().enumerate() {
            if !a.is_hermitian() {
                return Err(domain(format!("{a} is not Hermitian")));
            }
            for b in &base[i + 1..] {
                if symplectic_form(a, b)? != 0 {
                    return Err(domain(format!("{a} and {b} do not commute")));
                }
            }
        }
        let n = base[0].num_systems();
        let mut entries = vec![PauliString::identity(n)];
        for (t, mt) in base.iter().enumerate() {
            for k in 0..1usize << t {
                let e = pauli_product(&entries[k], mt)?;
                entries.push(e);
            }
        }
        Ok(SVector { base: base.to_vec(), entries })
    }

    pub fn base(&self) -> &[PauliString] {
        &self.base
    }

    pub fn entries(&self) -> &[PauliString] {
        &self.entries
    }
}

/// `[K]_ij = m(s_i s_j)`, optionally divided by `2^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    dim: usize,
    data: Vec<f64>,
    scaled: bool,
    base: Vec<PauliString>,
}

impl MomentMatrix {
    /// Arbitrary square matrix, for checks on externally built data.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(domain("moment matrix rows must form a non-empty square"));
        }
        Ok(MomentMatrix { dim, data: rows.into_iter().flatten().collect(), scaled: false, base: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn base(&self) -> &[PauliString] {
        &self.base
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_symmetric(1e-12) {
            return Err(domain("moment matrix is not symmetric"));
        }
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

fn build<F>(base: &[PauliString], scaled: bool, moment_of: F) -> Result<MomentMatrix>
where
    F: Fn(usize, &PauliString) -> Result<f64>,
{
    let s = SVector::new(base)?;
    let dim = s.entries.len();
    // s_i s_j = s_{i xor j} for commuting involutions
    let values = s.entries.iter().enumerate().map(|(k, e)| moment_of(k, e)).collect::<Result<Vec<f64>>>()?;
    let factor = if scaled { 1.0 / dim as f64 } else { 1.0 };
    let data = (0..dim * dim).map(|idx| factor * values[(idx / dim) ^ (idx % dim)]).collect();
    Ok(MomentMatrix { dim, data, scaled, base: base.to_vec() })
}

/// Moment matrix of the commuting set `c`, reading `m(s_k)` as the moment of
/// the sub-collection `{M_t : bit t of k}`.
pub fn moment_matrix(c: &[PauliString], moments: &MomentTable, scaled: bool) -> Result<MomentMatrix> {
    build(c, scaled, |k, _| {
        let members: Vec<PauliString> = (0..c.len()).filter(|t| k >> t & 1 == 1).map(|t| c[t].clone()).collect();
        moments.get(&members)?.ok_or_else(|| {
            let shown: Vec<String> = members.iter().map(|s| s.label_string()).collect();
            Error::IncompleteMoments(shown.join(", "))
        })
    })
}

/// Moment matrix of the commuting set `c` on a coefficient state, where the
/// moment of a product string is its expectation.
pub fn moment_matrix_from_state(c: &[PauliString], state: &CoefficientState, scaled: bool) -> Result<MomentMatrix> {
    build(c, scaled, |_, e| expectation(state, e))
}

/// Passes iff the smallest eigenvalue is at least `-tol`; margin is that eigenvalue.
pub fn check_psd(m: &MomentMatrix, tol: f64) -> Result<ValidationReport> {
    let ev = m.eigenvalues()?;
    let min = ev[0];
    let report = ValidationReport::new("moment-matrix-psd", min, tol, Vec::new());
    Ok(if report.passed { report } else { ValidationReport { worst_set: m.base.clone(), ..report } })
}

/// The `4 x 4` moment matrix of `{M_1, M_2}` with `a = m(M_1)`, `b = m(M_2)`,
/// `c = m(M_1 M_2)`: rows `(1,a,b,c), (a,1,c,b), (b,c,1,a), (c,b,a,1)`.
pub fn two_measurement_matrix(a: f64, b: f64, c: f64) -> MomentMatrix {
    MomentMatrix::from_rows(vec![vec![1.0, a, b, c], vec![a, 1.0, c, b], vec![b, c, 1.0, a], vec![c, b, a, 1.0]])
        .expect("square")
}

/// Closed-form spectrum of [`two_measurement_matrix`], ascending.
pub fn two_measurement_eigenvalues(a: f64, b: f64, c: f64) -> [f64; 4] {
    let mut ev = [1.0 + a + b + c, 1.0 + a - b - c, 1.0 - a + b - c, 1.0 - a - b + c];
    ev.sort_by(f64::total_cmp);
    ev
}

/// Leading-minor conditions equivalent to positivity of
/// [`two_measurement_matrix`]: `|a|,|b|,|c| <= 1`,
/// `1 - a² - b² - c² + 2abc >= 0` and the full determinant `>= 0`.
pub fn sylvester_conditions(a: f64, b: f64, c: f64, tol: f64) -> bool {
    let det3 = 1.0 - a * a - b * b - c * c + 2.0 * a * b * c;
    let det4: f64 = two_measurement_eigenvalues(a, b, c).iter().product();
    a.abs() <= 1.0 + tol && b.abs() <= 1.0 + tol && c.abs() <= 1.0 + tol && det3 >= -tol && det4 >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn s_vector_order() {
        let s = SVector::new(&[ps("XI"), ps("IZ")]).unwrap();
        let labels: Vec<_> = s.entries().iter().map(|e| e.label_string()).collect();
        assert_eq!(labels, ["II", "XI", "IZ", "XZ"]);
        assert!(SVector::new(&[ps("X"), ps("Z")]).is_err());
    }

    #[test]
    fn two_measurement_layout() {
        let (a, b, c) = (0.1, 0.2, 0.3);
        let mut t = MomentTable::new(2);
        t.insert(&[ps("XI")], a).unwrap();
        t.insert(&[ps("IX")], b).unwrap();
        t.insert(&[ps("XI"), ps("IX")], c).unwrap();
        let k = moment_matrix(&[ps("XI"), ps("IX")], &t, false).unwrap();
        assert_eq!(k, MomentMatrix { base: vec![ps("XI"), ps("IX")], ..two_measurement_matrix(a, b, c) });
    }

    #[test]
    fn identity_when_moments_vanish() {
        let s = CoefficientState::maximally_mixed(2).unwrap();
        let k = moment_matrix_from_state(&[ps("XI"), ps("IX")], &s, false).unwrap();
        assert_eq!(k.eigenvalues().unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn psd_examples() {
        let r = check_psd(&two_measurement_matrix(1.0, 1.0, 1.0), tol::PSD).unwrap();
        assert!(r.passed);
        let ev = two_measurement_matrix(1.0, 1.0, 1.0).eigenvalues().unwrap();
        assert!(ev[..3].iter().all(|v| v.abs() < 1e-12) && (ev[3] - 4.0).abs() < 1e-12);
        let r = check_psd(&two_measurement_matrix(1.0, 1.0, -1.0), tol::PSD).unwrap();
        assert!(!r.passed);
        assert!((r.margin + 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_spectrum() {
        for &(a, b, c) in &[(0.3, -0.2, 0.9), (-0.7, 0.5, 0.1), (1.0, -1.0, 0.0)] {
            let ev = two_measurement_matrix(a, b, c).eigenvalues().unwrap();
            for (x, y) in ev.iter().zip(two_measurement_eigenvalues(a, b, c)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_by_three_minor_alone_is_not_enough() {
        let (a, b, c) = (-0.4, -0.4, -0.4);
        let det3 = 1.0 - 3.0 * 0.16 + 2.0 * a * b * c;
        assert!(det3 > 0.0);
        assert!(!check_psd(&two_measurement_matrix(a, b, c), tol::PSD).unwrap().passed);
        assert!(!sylvester_conditions(a, b, c, 0.0));
    }

    #[test]
    fn non_symmetric_is_rejected() {
        let m = MomentMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(check_psd(&m, tol::PSD).is_err());
    }
}
