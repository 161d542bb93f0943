use rand::seq::SliceRandom;
use rand::Rng;

use crate::constraints::{check_p_uncertainty, UncertaintyMode};
use crate::error::Result;
use crate::pauli::{hermitian_basis, PauliString};
use crate::pnorm::PNorm;
use crate::states::{
    random_circuit, CoefficientState, Distribution, FiducialSetting, GnstTable, MomentTable, MAX_COLLECTION,
};

/// Up to `terms` random strings with coefficients uniform in `[-1, 1]`.
pub fn random_coefficient_state<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> Result<CoefficientState> {
    let mut basis = hermitian_basis(n)?;
    basis.shuffle(rng);
    basis.truncate(terms);
    CoefficientState::from_terms(n, basis.into_iter().map(|s| (s, rng.random_range(-1.0..=1.0))))
}

/// A random state rescaled to satisfy the exhaustive `p`-uncertainty check
/// (`n <= 3`), sometimes exactly on the boundary.
pub fn random_pbin_state<R: Rng + ?Sized>(n: usize, p: PNorm, rng: &mut R) -> Result<CoefficientState> {
    let terms = rng.random_range(1..=(1usize << (2 * n)) - 1);
    let s = random_coefficient_state(n, terms, rng)?;
    let worst = 1.0 - check_p_uncertainty(&s, p, UncertaintyMode::Exhaustive)?.margin;
    let shrink = if rng.random_bool(0.2) { 1.0 } else { rng.random_range(0.5..1.0) };
    // power sums scale as c^p, or as c at infinity
    let reach = if p.is_infinite() { worst } else { p.root(worst) };
    let factor = if worst > 0.0 { shrink / reach } else { 1.0 };
    s.scaled(factor.min(1.0) * (1.0 - 1e-12))
}

/// The stabilizer state `|0..0><0..0|` moved by a random Clifford circuit.
pub fn random_stabilizer_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoefficientState> {
    let zs = (1u64..1 << n).map(|z| (PauliString::hermitian(n, 0, z).expect("in range"), 1.0));
    let zero = CoefficientState::from_terms(n, zs)?;
    let c = random_circuit(n, 6 * n + 4, rng);
    crate::states::apply_clifford(&c, &zero)
}

/// A random mixture of stabilizer states and the maximally mixed state.
pub fn random_quantum_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoefficientState> {
    let mut s = CoefficientState::maximally_mixed(n)?;
    let parts = rng.random_range(1..=3);
    for i in 0..parts {
        let w = if i == 0 { rng.random_range(0.3..=1.0) } else { rng.random_range(0.0..0.5) };
        s = s.mix(&random_stabilizer_state(n, rng)?, w)?;
    }
    Ok(s)
}

/// `2^m` probabilities; a fifth of the draws are deterministic.
pub fn random_probabilities<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let d = 1usize << m;
    if rng.random_bool(0.2) {
        let mut p = vec![0.0; d];
        p[rng.random_range(0..d)] = 1.0;
        return p;
    }
    let w: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Commuting collection of `m` single-system measurements on `m` systems.
pub fn random_local_collection<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<PauliString> {
    (0..m)
        .map(|j| {
            let (x, z) = match rng.random_range(0..3) {
                0 => (1u64 << j, 0),
                1 => (0, 1u64 << j),
                _ => (1u64 << j, 1u64 << j),
            };
            PauliString::hermitian(m, x, z).expect("in range")
        })
        .collect()
}

/// Moments of a random distribution over `c`, optionally with one subset
/// moment pushed so that some recovered probability turns negative.
pub fn random_moment_table<R: Rng + ?Sized>(c: &[PauliString], perturb: bool, rng: &mut R) -> Result<MomentTable> {
    assert!(c.len() <= MAX_COLLECTION);
    let probs = random_probabilities(c.len(), rng);
    let mut t = crate::states::moments_from_distribution(&Distribution::new(c.to_vec(), probs)?)?;
    if perturb {
        let subset = rng.random_range(1usize..1 << c.len());
        let items: Vec<PauliString> = (0..c.len()).filter(|t| subset >> t & 1 == 1).map(|t| c[t].clone()).collect();
        let old = t.get(&items)?.expect("stored");
        let new = (old + rng.random_range(-1.0..1.0)).clamp(-1.0, 1.0);
        t.insert(&items, new)?;
    }
    Ok(t)
}

/// A convex mixture of product tables (each gbit answers every setting with
/// its own bias), hence a valid no-signaling table on all `3^n` settings.
pub fn random_local_table<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GnstTable> {
    let parts = rng.random_range(1..=3);
    let weights: Vec<f64> = (0..parts).map(|_| rng.random_range(0.1..1.0)).collect();
    // bias[part][system][label-1] = Pr[+1]
    let bias: Vec<Vec<[f64; 3]>> =
        (0..parts).map(|_| (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()).collect();
    let mut t = GnstTable::new(n)?;
    for k in FiducialSetting::all(n)? {
        let mut probs = vec![0.0; 1 << n];
        for (part, b) in bias.iter().enumerate() {
            for (a, slot) in probs.iter_mut().enumerate() {
                let pr: f64 = (0..n)
                    .map(|s| {
                        let plus = b[s][k.labels()[s] as usize - 1];
                        if a >> s & 1 == 0 {
                            plus
                        } else {
                            1.0 - plus
                        }
                    })
                    .product();
                *slot += weights[part] * pr;
            }
        }
        let total: f64 = weights.iter().sum();
        t.insert(k, probs.into_iter().map(|v| v / total).collect())?;
    }
    Ok(t)
}
