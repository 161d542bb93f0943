use super::dense::DenseMatrix;
use crate::error::{domain, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric matrix (row-major, `d x d`) by cyclic
/// Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(d: usize, data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != d * d {
        return Err(domain("matrix data does not match its dimension"));
    }
    let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..i {
            if (data[i * d + j] - data[j * d + i]).abs() > 1e-12 * scale {
                return Err(domain(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    let mut a = data.to_vec();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a Hermitian matrix, ascending. `A + iB` is embedded as the
/// real symmetric `[[A, -B], [B, A]]`, whose spectrum repeats each eigenvalue.
pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_hermitian(1e-12) {
        return Err(domain("matrix is not Hermitian"));
    }
    let d = m.dim();
    let big = 2 * d;
    let mut data = vec![0.0; big * big];
    for i in 0..d {
        for j in 0..d {
            let v = m.get(i, j);
            data[i * big + j] = v.re;
            data[(i + d) * big + j + d] = v.re;
            data[i * big + j + d] = -v.im;
            data[(i + d) * big + j] = v.im;
        }
    }
    let doubled = symmetric_eigenvalues(big, &data)?;
    Ok(doubled.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_spectrum() {
        let ev = hermitian_eigenvalues(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(ev, vec![1.0; 4]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = super::super::dense::single_pauli(true, true);
        let ev = hermitian_eigenvalues(&y).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn known_symmetric_spectrum() {
        let ev = symmetric_eigenvalues(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!(symmetric_eigenvalues(2, &[1.0, 2.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DenseMatrix::from_rows(vec![
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(hermitian_eigenvalues(&m).is_err());
    }
}
