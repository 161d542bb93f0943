use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Per-system choice among the three fiducial measurements of a gbit:
/// `1 -> X`, `2 -> Z`, `3 -> XZ` (realized by the Hermitian `Y`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct FiducialSetting {
    k: Vec<u8>,
}

impl FiducialSetting {
    pub fn new(k: Vec<u8>) -> Result<Self> {
        if k.is_empty() {
            return Err(domain("a setting needs at least one system"));
        }
        if let Some(bad) = k.iter().find(|&&v| !(1..=3).contains(&v)) {
            return Err(domain(format!("fiducial label {bad} outside 1..=3")));
        }
        Ok(FiducialSetting { k })
    }

    /// Setting number `index` in base-3 lexicographic order, system 0 most
    /// significant (`[1,1,..,1]` is index 0).
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        let total = count_settings(n)?;
        if index >= total {
            return Err(Error::IndexOutOfRange { index, len: total });
        }
        let mut k = vec![1u8; n];
        let mut rest = index;
        for slot in k.iter_mut().rev() {
            *slot = (rest % 3) as u8 + 1;
            rest /= 3;
        }
        Ok(FiducialSetting { k })
    }

    pub fn index(&self) -> usize {
        self.k.iter().fold(0, |acc, &v| acc * 3 + (v as usize - 1))
    }

    pub fn labels(&self) -> &[u8] {
        &self.k
    }

    pub fn num_systems(&self) -> usize {
        self.k.len()
    }

    pub fn label_pauli(label: u8) -> Pauli {
        match label {
            1 => Pauli::X,
            2 => Pauli::Z,
            _ => Pauli::Y,
        }
    }

    pub fn pauli_label(p: Pauli) -> Option<u8> {
        match p {
            Pauli::X => Some(1),
            Pauli::Z => Some(2),
            Pauli::Y => Some(3),
            Pauli::I => None,
        }
    }

    /// The full-support string measured by this setting.
    pub fn pauli(&self) -> PauliString {
        let labels: Vec<_> = self.k.iter().map(|&v| Self::label_pauli(v)).collect();
        PauliString::from_labels(&labels).expect("setting length is within range")
    }

    /// The single-system measurements `W_{i,k_i}` embedded in `n` systems.
    pub fn measurements(&self) -> Vec<PauliString> {
        let n = self.k.len();
        self.k
            .iter()
            .enumerate()
            .map(|(i, &v)| PauliString::single(n, i, Self::label_pauli(v)).expect("index in range"))
            .collect()
    }

    /// Restriction to `systems`, in the given order.
    pub fn restrict(&self, systems: &[usize]) -> Self {
        FiducialSetting { k: systems.iter().map(|&s| self.k[s]).collect() }
    }

    /// All `3^n` settings in index order.
    pub fn all(n: usize) -> Result<impl Iterator<Item = FiducialSetting>> {
        let total = count_settings(n)?;
        Ok((0..total).map(move |i| FiducialSetting::from_index(n, i).expect("index in range")))
    }
}

impl TryFrom<Vec<u8>> for FiducialSetting {
    type Error = Error;

    fn try_from(k: Vec<u8>) -> Result<Self> {
        FiducialSetting::new(k)
    }
}

impl From<FiducialSetting> for Vec<u8> {
    fn from(s: FiducialSetting) -> Self {
        s.k
    }
}

/// Number of fiducial settings `3^n`, refusing sizes that overflow.
pub fn count_settings(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(domain("system count must be positive"));
    }
    3usize
        .checked_pow(n as u32)
        .filter(|_| n <= 20)
        .ok_or_else(|| Error::Resource(format!("3^{n} settings do not fit in memory")))
}

/// Outcomes `A in {-1, +1}^m` of `m` simultaneous measurements.
///
/// Outcome vectors are indexed little-endian: bit `t` of the index is set
/// exactly when `A_t = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    a: Vec<i8>,
}

impl OutcomeVector {
    pub fn new(a: Vec<i8>) -> Result<Self> {
        if a.iter().any(|&v| v != 1 && v != -1) {
            return Err(domain("outcomes must be +1 or -1"));
        }
        Ok(OutcomeVector { a })
    }

    pub fn from_index(m: usize, index: usize) -> Self {
        OutcomeVector { a: (0..m).map(|t| if index >> t & 1 == 1 { -1 } else { 1 }).collect() }
    }

    pub fn index(&self) -> usize {
        self.a.iter().enumerate().fold(0, |acc, (t, &v)| if v < 0 { acc | 1 << t } else { acc })
    }

    pub fn values(&self) -> &[i8] {
        &self.a
    }

    /// `A* = prod_i A_i`.
    pub fn product(&self) -> i8 {
        if self.a.iter().filter(|&&v| v < 0).count() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// `prod_{t in subset} A_t` for outcome index `index`.
#[inline]
pub(crate) fn parity_sign(index: usize, subset: usize) -> f64 {
    if (index & subset).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in 0..27 {
            let s = FiducialSetting::from_index(3, i).unwrap();
            assert_eq!(s.index(), i);
        }
        assert_eq!(FiducialSetting::from_index(2, 1).unwrap().labels(), &[1, 2]);
        assert_eq!(FiducialSetting::from_index(2, 3).unwrap().labels(), &[2, 1]);
        assert!(FiducialSetting::from_index(2, 9).is_err());
    }

    #[test]
    fn setting_strings() {
        let s = FiducialSetting::new(vec![1, 2, 3]).unwrap();
        assert_eq!(s.pauli().label_string(), "XZY");
        let ms: Vec<_> = s.measurements().iter().map(|m| m.label_string()).collect();
        assert_eq!(ms, ["XII", "IZI", "IIY"]);
        assert!(FiducialSetting::new(vec![0]).is_err());
    }

    #[test]
    fn outcome_product() {
        let a = OutcomeVector::from_index(3, 0b101);
        assert_eq!(a.values(), &[-1, 1, -1]);
        assert_eq!(a.product(), 1);
        assert_eq!(a.index(), 0b101);
        assert!(OutcomeVector::new(vec![0]).is_err());
    }
}
