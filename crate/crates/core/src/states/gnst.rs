use std::collections::BTreeMap;

use rand::Rng;

use super::fiducial::{count_settings, parity_sign, FiducialSetting, OutcomeVector};
use crate::error::{domain, Error, Result};
use crate::pauli::PauliString;
use crate::tol;

/// Largest gbit count for which probability tables are materialized.
pub const MAX_TABLE_SYSTEMS: usize = 10;

/// Outcome probabilities per fiducial setting, not yet checked against the
/// probability axioms. Settings may be a subset of all `3^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GnstTable {
    n: usize,
    settings: BTreeMap<FiducialSetting, Vec<f64>>,
}

impl GnstTable {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_SYSTEMS {
            return Err(Error::Resource(format!("tables support 1..={MAX_TABLE_SYSTEMS} gbits, got {n}")));
        }
        Ok(GnstTable { n, settings: BTreeMap::new() })
    }

    /// Adds the distribution for `setting`; `probs` is indexed by outcome
    /// vector (little-endian, bit `t` set when system `t` reads `-1`).
    pub fn insert(&mut self, setting: FiducialSetting, probs: Vec<f64>) -> Result<()> {
        if setting.num_systems() != self.n {
            return Err(Error::Dimension { expected: self.n, found: setting.num_systems() });
        }
        if probs.len() != 1 << self.n {
            return Err(Error::Dimension { expected: 1 << self.n, found: probs.len() });
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(domain("non-finite probability"));
        }
        if self.settings.insert(setting.clone(), probs).is_some() {
            return Err(domain(format!("duplicate setting {:?}", setting.labels())));
        }
        Ok(())
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn get(&self, setting: &FiducialSetting) -> Option<&[f64]> {
        self.settings.get(setting).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FiducialSetting, &[f64])> {
        self.settings.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Largest `|sum_A p(A|C) - 1|` and the setting attaining it.
    pub fn normalization_deviation(&self) -> (f64, Option<FiducialSetting>) {
        self.iter()
            .map(|(k, p)| ((p.iter().sum::<f64>() - 1.0).abs(), Some(k.clone())))
            .fold((0.0, None), |best, cur| if cur.0 > best.0 { cur } else { best })
    }

    /// Smallest entry and the setting holding it.
    pub fn min_probability(&self) -> (f64, Option<FiducialSetting>) {
        self.iter()
            .map(|(k, p)| (p.iter().cloned().fold(f64::INFINITY, f64::min), Some(k.clone())))
            .fold((f64::INFINITY, None), |best, cur| if cur.0 < best.0 { cur } else { best })
    }

    /// Worst no-signaling violation: for every proper subset of systems, the
    /// largest difference between marginals of settings that agree on it.
    pub fn signaling(&self) -> Option<SignalingViolation> {
        let n = self.n;
        let mut worst: Option<SignalingViolation> = None;
        for subset in 1usize..(1 << n) - 1 {
            let systems: Vec<usize> = (0..n).filter(|&s| subset >> s & 1 == 1).collect();
            let mut seen: BTreeMap<FiducialSetting, (FiducialSetting, Vec<f64>)> = BTreeMap::new();
            for (k, p) in self.iter() {
                let marginal = marginal_of(p, &systems);
                match seen.get(&k.restrict(&systems)) {
                    None => {
                        seen.insert(k.restrict(&systems), (k.clone(), marginal));
                    }
                    Some((first, reference)) => {
                        let dev = reference.iter().zip(&marginal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        if dev > worst.as_ref().map_or(0.0, |w| w.deviation) {
                            worst = Some(SignalingViolation {
                                systems: systems.clone(),
                                deviation: dev,
                                settings: (first.clone(), k.clone()),
                            });
                        }
                    }
                }
            }
        }
        worst
    }
}

/// A subsystem whose marginal depends on the settings of the others.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalingViolation {
    pub systems: Vec<usize>,
    pub deviation: f64,
    pub settings: (FiducialSetting, FiducialSetting),
}

/// Marginal of a `2^n` outcome distribution on `systems` (bit `t` of the
/// result index corresponds to `systems[t]`).
pub(crate) fn marginal_of(probs: &[f64], systems: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << systems.len()];
    for (i, &p) in probs.iter().enumerate() {
        let j = systems.iter().enumerate().fold(0, |acc, (t, &s)| acc | (i >> s & 1) << t);
        out[j] += p;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// `p(A|C) = (1 + sign_C * lambda * A*) / 2^n` for every setting `C`.
    Compact {
        lambda: f64,
        signs: Vec<i8>,
    },
    Table(GnstTable),
}

/// An n-gbit state satisfying normalization, positivity and no-signaling.
#[derive(Clone, Debug, PartialEq)]
pub struct GnstState {
    n: usize,
    repr: Repr,
}

impl GnstState {
    /// Compact form with one sign per setting, indexed as in
    /// [`FiducialSetting::from_index`].
    pub fn compact(n: usize, lambda: f64, signs: Vec<i8>) -> Result<Self> {
        let total = count_settings(n)?;
        if signs.len() != total {
            return Err(Error::Dimension { expected: total, found: signs.len() });
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(domain("compact signs must be +1 or -1"));
        }
        if !(lambda.abs() <= 1.0 + tol::EXACT) {
            return Err(Error::Validation(format!("|lambda| = {} exceeds 1", lambda.abs())));
        }
        Ok(GnstState { n, repr: Repr::Compact { lambda: lambda.clamp(-1.0, 1.0), signs } })
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.repr, Repr::Compact { .. })
    }

    /// `(lambda, signs)` for compact states.
    pub fn compact_parts(&self) -> Option<(f64, &[i8])> {
        match &self.repr {
            Repr::Compact { lambda, signs } => Some((*lambda, signs)),
            Repr::Table(_) => None,
        }
    }

    /// Settings with stored distributions, in index order.
    pub fn settings(&self) -> Vec<FiducialSetting> {
        match &self.repr {
            Repr::Compact { signs, .. } => {
                (0..signs.len()).map(|i| FiducialSetting::from_index(self.n, i).expect("index in range")).collect()
            }
            Repr::Table(t) => t.settings.keys().cloned().collect(),
        }
    }

    pub fn has_setting(&self, setting: &FiducialSetting) -> bool {
        match &self.repr {
            Repr::Compact { .. } => setting.num_systems() == self.n,
            Repr::Table(t) => t.settings.contains_key(setting),
        }
    }

    fn check_setting(&self, setting: &FiducialSetting) -> Result<()> {
        if setting.num_systems() != self.n {
            return Err(Error::Dimension { expected: self.n, found: setting.num_systems() });
        }
        if !self.has_setting(setting) {
            return Err(domain(format!("setting {:?} is not part of this state", setting.labels())));
        }
        Ok(())
    }

    pub fn probability(&self, setting: &FiducialSetting, outcome: &OutcomeVector) -> Result<f64> {
        self.check_setting(setting)?;
        let idx = outcome.index();
        match &self.repr {
            Repr::Compact { lambda, signs } => {
                let s = signs[setting.index()] as f64 * outcome.product() as f64;
                Ok((1.0 + s * lambda) / (1u64 << self.n) as f64)
            }
            Repr::Table(t) => Ok(t.settings[setting][idx]),
        }
    }

    /// Outcome distribution for `setting`, expanding compact storage.
    pub fn probabilities(&self, setting: &FiducialSetting) -> Result<Vec<f64>> {
        self.check_setting(setting)?;
        match &self.repr {
            Repr::Compact { lambda, signs } => {
                if self.n > MAX_TABLE_SYSTEMS {
                    return Err(Error::Resource(format!("{} gbits are too many to expand", self.n)));
                }
                let d = (1usize << self.n) as f64;
                let s = signs[setting.index()] as f64;
                Ok((0..1usize << self.n).map(|i| (1.0 + s * lambda * parity_sign(i, usize::MAX)) / d).collect())
            }
            Repr::Table(t) => Ok(t.settings[setting].clone()),
        }
    }

    /// Moment of the sub-collection `{W_{t,k_t} : bit t of subset}` of `setting`.
    pub fn moment(&self, setting: &FiducialSetting, subset: usize) -> Result<f64> {
        self.check_setting(setting)?;
        let full = (1usize << self.n) - 1;
        let subset = subset & full;
        match &self.repr {
            Repr::Compact { lambda, signs } => Ok(if subset == 0 {
                1.0
            } else if subset == full {
                signs[setting.index()] as f64 * lambda
            } else {
                0.0
            }),
            Repr::Table(t) => Ok(t.settings[setting].iter().enumerate().map(|(i, p)| p * parity_sign(i, subset)).sum()),
        }
    }

    /// Moment of the product of all measurements of `setting`.
    pub fn full_moment(&self, setting: &FiducialSetting) -> Result<f64> {
        self.moment(setting, usize::MAX)
    }

    /// Moment attached to a signed Hermitian string built from fiducial
    /// labels and identities; identity positions may take any stored setting.
    pub fn moment_of(&self, s: &PauliString) -> Result<f64> {
        if s.num_systems() != self.n {
            return Err(Error::Dimension { expected: self.n, found: s.num_systems() });
        }
        let sign = s.sign().ok_or_else(|| domain(format!("{s} is not Hermitian")))?;
        let wanted: Vec<Option<u8>> = s.labels().into_iter().map(FiducialSetting::pauli_label).collect();
        let subset = s.support() as usize;
        let matches = |k: &FiducialSetting| k.labels().iter().zip(&wanted).all(|(&a, w)| w.is_none_or(|w| w == a));
        let setting = match &self.repr {
            Repr::Compact { .. } => FiducialSetting::new(wanted.iter().map(|w| w.unwrap_or(1)).collect())?,
            Repr::Table(t) => t
                .settings
                .keys()
                .find(|k| matches(k))
                .cloned()
                .ok_or_else(|| domain(format!("no stored setting measures {s}")))?,
        };
        Ok(sign * self.moment(&setting, subset)?)
    }

    /// Samples one outcome vector of `setting`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, setting: &FiducialSetting, rng: &mut R) -> Result<OutcomeVector> {
        self.check_setting(setting)?;
        match &self.repr {
            Repr::Compact { lambda, signs } => {
                let s = signs[setting.index()] as f64;
                let product_plus = rng.random::<f64>() < (1.0 + s * lambda) / 2.0;
                // uniform over outcome vectors with the drawn parity
                let mut a: Vec<i8> = (0..self.n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
                let parity: i8 = a.iter().product();
                if (parity == 1) != product_plus {
                    a[0] = -a[0];
                }
                OutcomeVector::new(a)
            }
            Repr::Table(t) => {
                let probs = &t.settings[setting];
                let u = rng.random::<f64>() * probs.iter().sum::<f64>();
                let mut acc = 0.0;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return Ok(OutcomeVector::from_index(self.n, i));
                    }
                }
                Ok(OutcomeVector::from_index(self.n, probs.len() - 1))
            }
        }
    }

    /// Explicit table over the stored settings.
    pub fn to_table(&self) -> Result<GnstTable> {
        match &self.repr {
            Repr::Table(t) => Ok(t.clone()),
            Repr::Compact { .. } => {
                let mut t = GnstTable::new(self.n)?;
                for k in self.settings() {
                    let p = self.probabilities(&k)?;
                    t.insert(k, p)?;
                }
                Ok(t)
            }
        }
    }
}

impl TryFrom<GnstTable> for GnstState {
    type Error = Error;

    /// Accepts tables satisfying normalization, positivity and no-signaling.
    fn try_from(table: GnstTable) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Validation("a state needs at least one setting".into()));
        }
        let (dev, k) = table.normalization_deviation();
        if dev > tol::PROBABILITY {
            return Err(Error::Validation(format!(
                "setting {:?} sums to 1 {:+e}",
                k.map(|k| k.labels().to_vec()).unwrap_or_default(),
                dev
            )));
        }
        let (min, k) = table.min_probability();
        if min < -tol::PROBABILITY {
            return Err(Error::Validation(format!(
                "negative probability {min} in setting {:?}",
                k.map(|k| k.labels().to_vec()).unwrap_or_default()
            )));
        }
        if let Some(v) = table.signaling() {
            if v.deviation > tol::PROBABILITY {
                return Err(Error::NoSignaling { systems: v.systems, deviation: v.deviation });
            }
        }
        Ok(GnstState { n: table.n, repr: Repr::Table(table) })
    }
}

/// Marginal state on `systems` (in the given order). Fails when the marginal
/// depends on the settings of discarded systems.
pub fn marginalize(state: &GnstState, systems: &[usize]) -> Result<GnstState> {
    if systems.is_empty() {
        return Err(domain("marginal needs at least one system"));
    }
    let mut sorted = systems.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != systems.len() {
        return Err(domain("marginal systems must be distinct"));
    }
    if let Some(&bad) = sorted.iter().find(|&&s| s >= state.n) {
        return Err(Error::IndexOutOfRange { index: bad, len: state.n });
    }
    let mut groups: BTreeMap<FiducialSetting, Vec<f64>> = BTreeMap::new();
    for k in state.settings() {
        let marginal = marginal_of(&state.probabilities(&k)?, systems);
        let key = k.restrict(systems);
        if let Some(reference) = groups.get(&key) {
            let dev = reference.iter().zip(&marginal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dev > tol::PROBABILITY {
                return Err(Error::NoSignaling { systems: systems.to_vec(), deviation: dev });
            }
        } else {
            groups.insert(key, marginal);
        }
    }
    let mut table = GnstTable::new(systems.len())?;
    for (k, p) in groups {
        table.insert(k, p)?;
    }
    GnstState::try_from(table)
}

/// The two-gbit box of the CHSH game: perfectly correlated outcomes for
/// `{X,X}`, `{X,Z}`, `{Z,X}` and anti-correlated for `{Z,Z}`.
pub fn pr_box() -> GnstState {
    let correlated = vec![0.5, 0.0, 0.0, 0.5];
    let anti = vec![0.0, 0.5, 0.5, 0.0];
    let mut t = GnstTable::new(2).expect("two gbits");
    for (k, p) in [(vec![1, 1], &correlated), (vec![1, 2], &correlated), (vec![2, 1], &correlated), (vec![2, 2], &anti)]
    {
        t.insert(FiducialSetting::new(k).expect("valid labels"), p.clone()).expect("well-formed row");
    }
    GnstState::try_from(t).expect("the PR box is a valid state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setting(k: &[u8]) -> FiducialSetting {
        FiducialSetting::new(k.to_vec()).unwrap()
    }

    #[test]
    fn pr_box_moments() {
        let b = pr_box();
        assert_eq!(b.full_moment(&setting(&[1, 1])).unwrap(), 1.0);
        assert_eq!(b.full_moment(&setting(&[2, 2])).unwrap(), -1.0);
        assert_eq!(b.moment(&setting(&[1, 2]), 0b01).unwrap(), 0.0);
        assert_eq!(b.moment_of(&"XZ".parse().unwrap()).unwrap(), 1.0);
        assert_eq!(b.moment_of(&"-1 ZZ".parse().unwrap()).unwrap(), 1.0);
        assert_eq!(b.moment_of(&"ZI".parse().unwrap()).unwrap(), 0.0);
        assert!(b.moment_of(&"YY".parse().unwrap()).is_err());
    }

    #[test]
    fn pr_box_marginals_uniform() {
        let b = pr_box();
        for s in [0, 1] {
            let m = marginalize(&b, &[s]).unwrap();
            for k in m.settings() {
                assert_eq!(m.probabilities(&k).unwrap(), vec![0.5, 0.5]);
            }
            assert_eq!(m.settings().len(), 2);
        }
    }

    #[test]
    fn signaling_table_is_refused() {
        let mut t = GnstTable::new(2).unwrap();
        t.insert(setting(&[1, 1]), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        t.insert(setting(&[1, 2]), vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let v = t.signaling().unwrap();
        assert_eq!(v.systems, vec![0]);
        assert_eq!(v.deviation, 1.0);
        assert!(matches!(GnstState::try_from(t), Err(Error::NoSignaling { .. })));
    }

    #[test]
    fn unnormalized_table_is_refused() {
        let mut t = GnstTable::new(1).unwrap();
        t.insert(setting(&[1]), vec![0.5, 0.4]).unwrap();
        assert!(matches!(GnstState::try_from(t), Err(Error::Validation(_))));
    }

    #[test]
    fn compact_expansion_matches_formula() {
        let signs = vec![1, -1, 1, 1, -1, -1, 1, 1, -1];
        let s = GnstState::compact(2, 0.5, signs.clone()).unwrap();
        let t = GnstState::try_from(s.to_table().unwrap()).unwrap();
        for k in s.settings() {
            assert_eq!(s.probabilities(&k).unwrap(), t.probabilities(&k).unwrap());
            assert!((t.full_moment(&k).unwrap() - 0.5 * signs[k.index()] as f64).abs() < 1e-15);
            assert_eq!(t.moment(&k, 0b01).unwrap(), 0.0);
        }
    }

    #[test]
    fn sampled_outcomes_follow_parity() {
        let s = GnstState::compact(3, 1.0, vec![-1; 27]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..27 {
            let k = FiducialSetting::from_index(3, i).unwrap();
            for _ in 0..20 {
                assert_eq!(s.sample_outcome(&k, &mut rng).unwrap().product(), -1);
            }
        }
    }
}
