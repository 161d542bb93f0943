use std::collections::BTreeMap;

use super::fiducial::parity_sign;
use super::gnst::GnstTable;
use crate::error::{domain, Error, Result};
use crate::pauli::PauliString;
use crate::tol;

/// Largest collection handled by the moment/probability conversions.
pub const MAX_COLLECTION: usize = 12;

/// A set of simultaneously measured Hermitian basis strings, kept sorted.
pub type Collection = Vec<PauliString>;

/// Normalizes `items` into a [`Collection`], returning the product of the
/// member signs (a `-1` string reads the negated outcome).
fn normalize(items: &[PauliString]) -> Result<(Collection, f64)> {
    let mut sign = 1.0;
    let mut out = Vec::with_capacity(items.len());
    for s in items {
        sign *= s.sign().ok_or_else(|| domain(format!("{s} is not Hermitian")))?;
        if !s.is_identity() {
            out.push(s.basis());
        }
    }
    out.sort_unstable();
    let len = out.len();
    out.dedup();
    if out.len() != len {
        return Err(domain("a collection lists the same measurement twice"));
    }
    Ok((out, sign))
}

/// Moments `m(C) = sum_A p(A|C) A*` of measurement collections; `m(∅) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    n: usize,
    moments: BTreeMap<Collection, f64>,
}

impl MomentTable {
    pub fn new(n: usize) -> Self {
        MomentTable { n, moments: BTreeMap::new() }
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    /// Stores `m(items) = value`, replacing any previous value.
    pub fn insert(&mut self, items: &[PauliString], value: f64) -> Result<()> {
        if let Some(s) = items.iter().find(|s| s.num_systems() != self.n) {
            return Err(Error::Dimension { expected: self.n, found: s.num_systems() });
        }
        if !(value.abs() <= 1.0 + tol::EXACT) {
            return Err(Error::Validation(format!("moment {value} outside [-1, 1]")));
        }
        let (c, sign) = normalize(items)?;
        if c.is_empty() {
            return if (value * sign - 1.0).abs() <= tol::EXACT {
                Ok(())
            } else {
                Err(Error::Validation("the empty collection has moment 1".into()))
            };
        }
        self.moments.insert(c, sign * value);
        Ok(())
    }

    /// Stores `m(items)` unless a conflicting value is already present.
    pub fn insert_consistent(&mut self, items: &[PauliString], value: f64) -> Result<()> {
        if let Some(old) = self.get(items)? {
            if (old - value).abs() > tol::PROBABILITY {
                let shown: Vec<String> = items.iter().map(|s| s.label_string()).collect();
                return Err(Error::Inconsistent(format!(
                    "collection {{{}}} has moments {old} and {value}",
                    shown.join(", ")
                )));
            }
            return Ok(());
        }
        self.insert(items, value)
    }

    /// `m(items)`, `Some(1)` for the empty collection, `None` when unknown.
    pub fn get(&self, items: &[PauliString]) -> Result<Option<f64>> {
        let (c, sign) = normalize(items)?;
        if c.is_empty() {
            return Ok(Some(sign));
        }
        Ok(self.moments.get(&c).map(|m| sign * m))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Collection, f64)> {
        self.moments.iter().map(|(c, &m)| (c, m))
    }
}

/// Outcome distribution of one ordered collection `C = (M_0, ..., M_{m-1})`,
/// indexed little-endian over outcome vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub collection: Vec<PauliString>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn new(collection: Vec<PauliString>, probs: Vec<f64>) -> Result<Self> {
        if collection.is_empty() || collection.len() > MAX_COLLECTION {
            return Err(Error::Resource(format!(
                "collections hold 1..={MAX_COLLECTION} measurements, got {}",
                collection.len()
            )));
        }
        if probs.len() != 1 << collection.len() {
            return Err(Error::Dimension { expected: 1 << collection.len(), found: probs.len() });
        }
        Ok(Distribution { collection, probs })
    }

    fn check_axioms(&self) -> Result<()> {
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > tol::PROBABILITY {
            return Err(Error::Validation(format!("distribution sums to {total}")));
        }
        if let Some(p) = self.probs.iter().find(|&&p| p < -tol::PROBABILITY || !p.is_finite()) {
            return Err(Error::Validation(format!("distribution has entry {p}")));
        }
        Ok(())
    }
}

/// Every sub-collection moment of one distribution.
pub fn moments_from_distribution(dist: &Distribution) -> Result<MomentTable> {
    moments_from_distributions(std::slice::from_ref(dist))
}

/// Merged moments of several distributions. Shared sub-collections must agree.
pub fn moments_from_distributions(dists: &[Distribution]) -> Result<MomentTable> {
    let n = dists
        .first()
        .and_then(|d| d.collection.first())
        .map(PauliString::num_systems)
        .ok_or_else(|| domain("no distributions given"))?;
    let mut table = MomentTable::new(n);
    for d in dists {
        d.check_axioms()?;
        let m = d.collection.len();
        for subset in 1usize..1 << m {
            let members: Vec<PauliString> =
                (0..m).filter(|t| subset >> t & 1 == 1).map(|t| d.collection[t].clone()).collect();
            let value: f64 = d.probs.iter().enumerate().map(|(i, p)| p * parity_sign(i, subset)).sum();
            table.insert_consistent(&members, value)?;
        }
    }
    Ok(table)
}

/// Moments of all sub-collections of the fiducial settings in `table`.
pub fn moments_from_probabilities(table: &GnstTable) -> Result<MomentTable> {
    let dists =
        table.iter().map(|(k, p)| Distribution::new(k.measurements(), p.to_vec())).collect::<Result<Vec<_>>>()?;
    if dists.is_empty() {
        return Ok(MomentTable::new(table.num_systems()));
    }
    moments_from_distributions(&dists)
}

/// `p(Â|C) = 2^{-m} sum_{C' ⊆ C} m(C') prod_{i in C'} Â_i`, without checking
/// the sign of the result.
pub fn recover_probabilities(moments: &MomentTable, c: &[PauliString]) -> Result<Vec<f64>> {
    let m = c.len();
    if m > MAX_COLLECTION {
        return Err(Error::Resource(format!("collection of {m} exceeds {MAX_COLLECTION}")));
    }
    let values = (0usize..1 << m)
        .map(|subset| {
            let members: Vec<PauliString> = (0..m).filter(|t| subset >> t & 1 == 1).map(|t| c[t].clone()).collect();
            moments.get(&members)?.ok_or_else(|| {
                let shown: Vec<String> = members.iter().map(|s| s.label_string()).collect();
                Error::IncompleteMoments(format!("missing m({{{}}})", shown.join(", ")))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let scale = 1.0 / (1u64 << m) as f64;
    Ok((0usize..1 << m)
        .map(|idx| scale * values.iter().enumerate().map(|(subset, v)| v * parity_sign(idx, subset)).sum::<f64>())
        .collect())
}

/// The outcome distribution of `c` implied by `moments`; negative entries
/// beyond tolerance are reported as an inconsistency.
pub fn probabilities_from_moments(moments: &MomentTable, c: &[PauliString]) -> Result<Vec<f64>> {
    let probs = recover_probabilities(moments, c)?;
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, &p)| p < -tol::PROBABILITY) {
        return Err(Error::Inconsistent(format!("outcome {i} would have probability {p}; check the moment matrix")));
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::gnst::pr_box;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_measurement_recovery() {
        let mut t = MomentTable::new(1);
        t.insert(&[ps("X")], 0.5).unwrap();
        assert_eq!(probabilities_from_moments(&t, &[ps("X")]).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn zero_moments_give_uniform() {
        let mut t = MomentTable::new(2);
        t.insert(&[ps("XI")], 0.0).unwrap();
        t.insert(&[ps("IZ")], 0.0).unwrap();
        t.insert(&[ps("XI"), ps("IZ")], 0.0).unwrap();
        assert_eq!(probabilities_from_moments(&t, &[ps("XI"), ps("IZ")]).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn uniform_distribution_has_zero_moment() {
        let d = Distribution::new(vec![ps("Z")], vec![0.5, 0.5]).unwrap();
        assert_eq!(moments_from_distribution(&d).unwrap().get(&[ps("Z")]).unwrap(), Some(0.0));
    }

    #[test]
    fn pr_box_round_trip() {
        let b = pr_box();
        let t = b.to_table().unwrap();
        let m = moments_from_probabilities(&t).unwrap();
        for (pair, v) in [(["XI", "IX"], 1.0), (["XI", "IZ"], 1.0), (["ZI", "IX"], 1.0), (["ZI", "IZ"], -1.0)] {
            assert_eq!(m.get(&[ps(pair[0]), ps(pair[1])]).unwrap(), Some(v));
        }
        for (k, p) in t.iter() {
            assert_eq!(probabilities_from_moments(&m, &k.measurements()).unwrap(), p);
        }
    }

    #[test]
    fn missing_subset_is_reported() {
        let mut t = MomentTable::new(2);
        t.insert(&[ps("XI"), ps("IX")], 1.0).unwrap();
        assert!(matches!(probabilities_from_moments(&t, &[ps("XI"), ps("IX")]), Err(Error::IncompleteMoments(_))));
    }

    #[test]
    fn inconsistent_moments_are_reported() {
        let mut t = MomentTable::new(1);
        t.insert(&[ps("X")], 0.2).unwrap();
        assert!(t.insert_consistent(&[ps("X")], 0.3).is_err());
        let mut bad = MomentTable::new(2);
        bad.insert(&[ps("XI")], 1.0).unwrap();
        bad.insert(&[ps("IX")], 1.0).unwrap();
        bad.insert(&[ps("XI"), ps("IX")], -1.0).unwrap();
        assert!(matches!(probabilities_from_moments(&bad, &[ps("XI"), ps("IX")]), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn signed_members_flip_moments() {
        let mut t = MomentTable::new(1);
        t.insert(&[ps("-1 X")], 0.4).unwrap();
        assert_eq!(t.get(&[ps("X")]).unwrap(), Some(-0.4));
    }
}
