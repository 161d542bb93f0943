use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::ValidationReport;
use crate::error::{Error, Result};
use crate::pauli::{
    enumerate_anticommuting_sets, gamma_set, max_weight_anticommuting_subset, pauli_product, symplectic_bits,
    PauliString, MAX_ENUMERATION_SYSTEMS,
};
use crate::pnorm::PNorm;
use crate::states::{random_circuit, CoefficientState, GnstState, MomentTable};
use crate::tol;

/// Number of Clifford conjugates of the ladder set checked by default.
pub const DEFAULT_CLIFFORD_SAMPLES: usize = 64;

/// Largest support searched exactly beyond the enumeration range.
pub const MAX_CLIQUE_SUPPORT: usize = 64;

/// Which anti-commuting sets the uncertainty check ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncertaintyMode {
    /// The ladder set plus `samples` images under seeded random circuits.
    Canonical { samples: usize, seed: u64 },
    /// Every maximal set (enumerated for `n <= 3`, exact clique search on the
    /// support above that).
    Exhaustive,
    /// `samples` seeded greedy maximal sets over the support.
    Randomized { samples: usize, seed: u64 },
}

impl Default for UncertaintyMode {
    fn default() -> Self {
        UncertaintyMode::Canonical { samples: DEFAULT_CLIFFORD_SAMPLES, seed: 0 }
    }
}

/// Anything carrying magnitudes `|<S>|` attached to Hermitian basis strings.
pub trait UncertaintySubject {
    fn num_systems(&self) -> usize;

    /// `(sigma, |value|)` pairs with distinct basis strings and non-zero weight.
    fn weighted_strings(&self) -> Result<Vec<(PauliString, f64)>>;
}

fn dedup_max(items: impl IntoIterator<Item = (PauliString, f64)>) -> Vec<(PauliString, f64)> {
    let mut best: HashMap<(u64, u64), (PauliString, f64)> = HashMap::new();
    for (s, w) in items {
        let w = w.abs();
        if w == 0.0 || s.is_identity() {
            continue;
        }
        best.entry(s.key()).and_modify(|e| e.1 = e.1.max(w)).or_insert((s.basis(), w));
    }
    let mut out: Vec<_> = best.into_values().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

impl UncertaintySubject for CoefficientState {
    fn num_systems(&self) -> usize {
        CoefficientState::num_systems(self)
    }

    fn weighted_strings(&self) -> Result<Vec<(PauliString, f64)>> {
        Ok(dedup_max(self.terms()))
    }
}

impl UncertaintySubject for MomentTable {
    fn num_systems(&self) -> usize {
        MomentTable::num_systems(self)
    }

    /// Each collection is imagined as the product of its members.
    fn weighted_strings(&self) -> Result<Vec<(PauliString, f64)>> {
        let n = self.num_systems();
        let items = self
            .iter()
            .map(|(c, m)| {
                let product = c.iter().try_fold(PauliString::identity(n), |acc, s| pauli_product(&acc, s))?;
                Ok((product, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(dedup_max(items))
    }
}

impl UncertaintySubject for GnstState {
    fn num_systems(&self) -> usize {
        GnstState::num_systems(self)
    }

    /// Every sub-collection of a stored setting, imagined as its Pauli string.
    fn weighted_strings(&self) -> Result<Vec<(PauliString, f64)>> {
        let n = GnstState::num_systems(self);
        let mut items = Vec::new();
        for k in self.settings() {
            let full = k.pauli();
            if self.is_compact() {
                items.push((full, self.full_moment(&k)?));
                continue;
            }
            for subset in 1usize..1 << n {
                let mask = subset as u64;
                let s = PauliString::new(n, full.x_bits() & mask, full.z_bits() & mask, 0)?;
                items.push((s, self.moment(&k, subset)?));
            }
        }
        Ok(dedup_max(items))
    }
}

/// Ranges over anti-commuting sets and reports the largest `sum |.|^p`
/// (or `max |.|` at infinity); margin is `1 - sum`.
pub fn check_p_uncertainty<S: UncertaintySubject + ?Sized>(
    state: &S,
    p: PNorm,
    mode: UncertaintyMode,
) -> Result<ValidationReport> {
    let n = state.num_systems();
    let weighted = state.weighted_strings()?;
    let weights: HashMap<(u64, u64), f64> = weighted.iter().map(|(s, w)| (s.key(), *w)).collect();
    let score =
        |members: &[PauliString]| p.power_sum(members.iter().map(|m| weights.get(&m.key()).copied().unwrap_or(0.0)));

    let (best, worst): (f64, Vec<PauliString>) = match mode {
        UncertaintyMode::Exhaustive if n <= MAX_ENUMERATION_SYSTEMS => enumerate_anticommuting_sets(n)?
            .iter()
            .map(|set| (score(set.members()), set.members().to_vec()))
            .fold((0.0, Vec::new()), keep_max),
        UncertaintyMode::Exhaustive => {
            if weighted.len() > MAX_CLIQUE_SUPPORT {
                return Err(Error::Resource(format!(
                    "exhaustive check beyond {MAX_ENUMERATION_SYSTEMS} systems needs a support of at most \
                     {MAX_CLIQUE_SUPPORT} strings (got {}); use randomized mode",
                    weighted.len()
                )));
            }
            let strings: Vec<PauliString> = weighted.iter().map(|(s, _)| s.clone()).collect();
            if p.is_infinite() {
                weighted.iter().map(|(s, w)| (*w, vec![s.clone()])).fold((0.0, Vec::new()), keep_max)
            } else {
                let w: Vec<f64> = weighted.iter().map(|(_, w)| p.power_sum([*w])).collect();
                let (idx, total) = max_weight_anticommuting_subset(&strings, &w);
                (total, idx.into_iter().map(|i| strings[i].clone()).collect())
            }
        }
        UncertaintyMode::Canonical { samples, seed } => {
            let base = gamma_set(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = (score(base.members()), base.members().to_vec());
            for _ in 0..samples {
                let circuit = random_circuit(n, 4 * n + 4, &mut rng);
                let image = base.members().iter().map(|g| circuit.conjugate(g)).collect::<Result<Vec<_>>>()?;
                acc = keep_max(acc, (score(&image), image));
            }
            acc
        }
        UncertaintyMode::Randomized { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<&PauliString> = weighted.iter().map(|(s, _)| s).collect();
            let mut acc = (0.0, Vec::new());
            for _ in 0..samples.max(1) {
                order.shuffle(&mut rng);
                let mut set: Vec<PauliString> = Vec::new();
                for s in &order {
                    if set.iter().all(|m| symplectic_bits(m.x_bits(), m.z_bits(), s.x_bits(), s.z_bits())) {
                        set.push((*s).clone());
                    }
                }
                acc = keep_max(acc, (score(&set), set));
            }
            acc
        }
    };

    let worst_set: Vec<PauliString> =
        worst.into_iter().filter(|s| weights.get(&s.key()).is_some_and(|w| *w > 0.0)).map(|s| s.basis()).collect();
    let name = format!("p-uncertainty(p={p})");
    Ok(ValidationReport::new(name, 1.0 - best, tol::UNCERTAINTY, worst_set))
}

fn keep_max(a: (f64, Vec<PauliString>), b: (f64, Vec<PauliString>)) -> (f64, Vec<PauliString>) {
    if b.0 > a.0 {
        b
    } else {
        a
    }
}
