use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::pauli::{PauliString, MAX_SYSTEMS};
use crate::tol;

/// `rho = (I + sum s_ab sigma_ab) / 2^n` stored as the sparse map
/// `(x, z) -> s_ab`. The identity coefficient is implicit and equal to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientState {
    n: usize,
    coeffs: BTreeMap<(u64, u64), f64>,
}

impl CoefficientState {
    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SYSTEMS {
            return Err(domain(format!("system count must be in 1..={MAX_SYSTEMS}, got {n}")));
        }
        Ok(CoefficientState { n, coeffs: BTreeMap::new() })
    }

    /// Builds a state from signed Hermitian strings. A `-1` phase on a string
    /// flips the sign of its coefficient; repeated strings are summed.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut state = Self::maximally_mixed(n)?;
        for (s, c) in terms {
            state.add_term(&s, c)?;
        }
        state.check_bounds()?;
        Ok(state)
    }

    fn add_term(&mut self, s: &PauliString, c: f64) -> Result<()> {
        if s.num_systems() != self.n {
            return Err(Error::Dimension { expected: self.n, found: s.num_systems() });
        }
        let sign = s.sign().ok_or_else(|| domain(format!("{s} is not Hermitian")))?;
        if s.is_identity() {
            return Err(domain("the identity coefficient is fixed to 1"));
        }
        if !c.is_finite() {
            return Err(domain(format!("non-finite coefficient on {s}")));
        }
        *self.coeffs.entry(s.key()).or_insert(0.0) += sign * c;
        Ok(())
    }

    fn check_bounds(&mut self) -> Result<()> {
        self.coeffs.retain(|_, c| *c != 0.0);
        for (&(x, z), &c) in &self.coeffs {
            if c.abs() > 1.0 + tol::EXACT {
                let s = PauliString::hermitian(self.n, x, z)?;
                return Err(Error::Validation(format!("coefficient {c} on {s} exceeds 1 in magnitude")));
            }
        }
        Ok(())
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    /// Coefficient of the basis element with masks `(x, z)`; 0 when absent.
    pub fn coefficient_of(&self, x: u64, z: u64) -> f64 {
        if x == 0 && z == 0 {
            return 1.0;
        }
        self.coeffs.get(&(x, z)).copied().unwrap_or(0.0)
    }

    /// Non-zero terms as `(sigma_ab, s_ab)` in `(x, z)` order.
    pub fn terms(&self) -> impl Iterator<Item = (PauliString, f64)> + '_ {
        self.coeffs.iter().map(move |(&(x, z), &c)| (PauliString::hermitian(self.n, x, z).expect("masks fit n"), c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The same state with every coefficient multiplied by `factor` (`|factor| <= 1`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.abs() <= 1.0) {
            return Err(domain(format!("scale factor {factor} outside [-1, 1]")));
        }
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|c| *c *= factor);
        out.check_bounds()?;
        Ok(out)
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &CoefficientState, w: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(domain(format!("mixing weight {w} outside [0, 1]")));
        }
        let mut out = Self::maximally_mixed(self.n)?;
        for (&k, &c) in &self.coeffs {
            *out.coeffs.entry(k).or_insert(0.0) += w * c;
        }
        for (&k, &c) in &other.coeffs {
            *out.coeffs.entry(k).or_insert(0.0) += (1.0 - w) * c;
        }
        out.check_bounds()?;
        Ok(out)
    }

    /// Largest coefficient difference to `other` over the union of supports.
    pub fn max_deviation(&self, other: &CoefficientState) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&(x, z)| (self.coefficient_of(x, z) - other.coefficient_of(x, z)).abs())
            .fold(0.0, f64::max)
    }
}

/// `Tr(rho S)` for a Hermitian string `S`, i.e. its signed coefficient.
pub fn expectation(state: &CoefficientState, s: &PauliString) -> Result<f64> {
    if s.num_systems() != state.n {
        return Err(Error::Dimension { expected: state.n, found: s.num_systems() });
    }
    let sign = s.sign().ok_or_else(|| domain(format!("{s} is not Hermitian")))?;
    Ok(sign * state.coefficient_of(s.x_bits(), s.z_bits()))
}

/// `s1 ⊗ s2`, with `s2` on the trailing systems.
pub fn tensor(s1: &CoefficientState, s2: &CoefficientState) -> Result<CoefficientState> {
    let n = s1.n + s2.n;
    if n > MAX_SYSTEMS {
        return Err(domain(format!("tensor product exceeds {MAX_SYSTEMS} systems")));
    }
    let shift = s1.n;
    let mut coeffs = BTreeMap::new();
    let left = std::iter::once(((0, 0), 1.0)).chain(s1.coeffs.iter().map(|(&k, &c)| (k, c)));
    let left: Vec<_> = left.collect();
    let right: Vec<_> = std::iter::once(((0u64, 0u64), 1.0)).chain(s2.coeffs.iter().map(|(&k, &c)| (k, c))).collect();
    for &((x1, z1), c1) in &left {
        for &((x2, z2), c2) in &right {
            let key = (x1 | x2 << shift, z1 | z2 << shift);
            if key != (0, 0) {
                coeffs.insert(key, c1 * c2);
            }
        }
    }
    Ok(CoefficientState { n, coeffs })
}
