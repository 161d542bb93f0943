//! Random access codes: perfect gbit codes, their p-norm relaxations,
//! coefficient-state codes over Pauli strings, and the repetition booster.
//!
//! Bit `j` of `x` is carried by setting (or string) `f^{-1}(j)` with bias
//! `(-1)^{x_j} lambda`; the decoder reads `D(A) = (1 - A*)/2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pauli::PauliString;
use crate::pnorm::PNorm;
use crate::states::{count_settings, expectation, CoefficientState, FiducialSetting, GnstState};

/// Which theory a code lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theory {
    Gnst,
    PGnst,
    PBin,
    PBox,
}

/// An `[N, n, q]` code in a given theory at parameter `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RacParams {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub q: f64,
    pub p: PNorm,
    pub theory: Theory,
}

impl RacParams {
    pub fn new(big_n: usize, n: usize, q: f64, p: PNorm, theory: Theory) -> Result<Self> {
        if big_n == 0 || n == 0 {
            return Err(domain("codes need N >= 1 and n >= 1"));
        }
        if !(0.5..=1.0).contains(&q) {
            return Err(domain(format!("recovery probability {q} outside [1/2, 1]")));
        }
        Ok(RacParams { big_n, n, q, p, theory })
    }

    /// The code built by this module for `theory` on `n` carriers.
    pub fn of(theory: Theory, n: usize, p: PNorm) -> Result<Self> {
        let (big_n, q) = match theory {
            Theory::Gnst => (count_settings(n)?, 1.0),
            Theory::PGnst | Theory::PBox => (count_settings(n)?, recovery_probability(n, p)),
            Theory::PBin => {
                if 2 * n >= usize::BITS as usize {
                    return Err(Error::Resource(format!("4^{n} strings do not fit in an index")));
                }
                ((1usize << (2 * n)) - 1, recovery_probability(n, p))
            }
        };
        RacParams::new(big_n, n, q, p, theory)
    }
}

/// `lambda = (2n+1)^{-1/p}`, the largest bias allowed on every member of a
/// `2n+1` anti-commuting set.
pub fn rac_lambda(n: usize, p: PNorm) -> f64 {
    p.root(1.0 / (2 * n + 1) as f64)
}

/// `1/2 + lambda/2`.
pub fn recovery_probability(n: usize, p: PNorm) -> f64 {
    0.5 + 0.5 * rac_lambda(n, p)
}

/// Bijection between carrier positions (settings or strings) and bit indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    bit_of: Vec<usize>,
    position_of: Vec<usize>,
}

impl IndexMap {
    /// Position `i` carries bit `i`.
    pub fn identity(len: usize) -> Self {
        IndexMap { bit_of: (0..len).collect(), position_of: (0..len).collect() }
    }

    /// `bit_of[position]`; must be a permutation.
    pub fn from_permutation(bit_of: Vec<usize>) -> Result<Self> {
        let mut position_of = vec![usize::MAX; bit_of.len()];
        for (pos, &b) in bit_of.iter().enumerate() {
            if b >= bit_of.len() || position_of[b] != usize::MAX {
                return Err(domain("index map is not a permutation"));
            }
            position_of[b] = pos;
        }
        Ok(IndexMap { bit_of, position_of })
    }

    pub fn len(&self) -> usize {
        self.bit_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bit_of.is_empty()
    }

    pub fn bit_of(&self, position: usize) -> usize {
        self.bit_of[position]
    }

    pub fn position_of(&self, bit: usize) -> Result<usize> {
        self.position_of.get(bit).copied().ok_or(Error::IndexOutOfRange { index: bit, len: self.len() })
    }
}

fn check_bits(x: &[u8], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension { expected, found: x.len() });
    }
    if x.iter().any(|&b| b > 1) {
        return Err(domain("bit strings hold 0 or 1 only"));
    }
    Ok(())
}

fn sign(bit: u8) -> i8 {
    if bit == 0 {
        1
    } else {
        -1
    }
}

/// Compact gbit state with bias `lambda` and sign `(-1)^{x_f(C)}` per setting.
pub fn rac_encode_with(x: &[u8], n: usize, lambda: f64, f: &IndexMap) -> Result<GnstState> {
    let total = count_settings(n)?;
    check_bits(x, total)?;
    if f.len() != total {
        return Err(Error::Dimension { expected: total, found: f.len() });
    }
    let signs = (0..total).map(|c| sign(x[f.bit_of(c)])).collect();
    GnstState::compact(n, lambda, signs)
}

/// `[3^n, n, 1]` code: `p_x(A|C) = (1 + A* (-1)^{x_f(C)}) / 2^n`.
pub fn rac_encode_gnst(x: &[u8], n: usize) -> Result<GnstState> {
    rac_encode_with(x, n, 1.0, &IndexMap::identity(count_settings(n)?))
}

/// `[3^n, n, 1/2 + lambda/2]` code with `lambda = (2n+1)^{-1/p}`.
pub fn rac_encode_pgnst(x: &[u8], n: usize, p: PNorm) -> Result<GnstState> {
    rac_encode_with(x, n, rac_lambda(n, p), &IndexMap::identity(count_settings(n)?))
}

/// Decoder output: the likelier bit and its probability `(1 + |m|)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decoded {
    pub bit: u8,
    pub probability: f64,
    /// Moment of the measured setting or string.
    pub moment: f64,
}

impl Decoded {
    fn from_moment(moment: f64) -> Self {
        // ties go to bit 0
        Decoded { bit: u8::from(moment < 0.0), probability: 0.5 * (1.0 + moment.abs()), moment }
    }

    /// Probability that the decoder returns `bit`.
    pub fn probability_of(&self, bit: u8) -> f64 {
        0.5 * (1.0 + if bit == 0 { self.moment } else { -self.moment })
    }
}

/// Measures setting `f^{-1}(j)` and applies `D(A) = (1 - A*)/2`.
pub fn rac_decode(state: &GnstState, j: usize, f: &IndexMap) -> Result<Decoded> {
    let setting = FiducialSetting::from_index(state.num_systems(), f.position_of(j)?)?;
    Ok(Decoded::from_moment(state.full_moment(&setting)?))
}

/// Strings carrying the bits of a coefficient-state code. Unrestricted:
/// every non-identity string, ordered by base-4 digits `I=0, X=1, Z=2, Y=3`
/// with system 0 most significant. Restricted: `{X,Z,Y}^n` in fiducial
/// setting order.
pub fn pbin_strings(n: usize, restrict_to_xyz: bool) -> Result<Vec<PauliString>> {
    if restrict_to_xyz {
        return FiducialSetting::all(n).map(|it| it.map(|k| k.pauli()).collect());
    }
    if n == 0 || 2 * n > 24 {
        return Err(Error::Resource(format!("unrestricted codes list 4^n strings; n = {n} is out of range")));
    }
    Ok((1usize..1 << (2 * n))
        .map(|code| {
            let (mut x, mut z) = (0u64, 0u64);
            for j in 0..n {
                let digit = code >> (2 * (n - 1 - j)) & 3;
                if digit == 1 || digit == 3 {
                    x |= 1 << j;
                }
                if digit == 2 || digit == 3 {
                    z |= 1 << j;
                }
            }
            PauliString::hermitian(n, x, z).expect("in range")
        })
        .collect())
}

/// `(I + lambda sum_k (-1)^{x_k} S_k) / d` over [`pbin_strings`].
pub fn rac_encode_pbin(x: &[u8], n: usize, p: PNorm, restrict_to_xyz: bool) -> Result<CoefficientState> {
    let strings = pbin_strings(n, restrict_to_xyz)?;
    check_bits(x, strings.len())?;
    let lambda = rac_lambda(n, p);
    let terms = strings.into_iter().zip(x).map(|(s, &b)| (s, f64::from(sign(b)) * lambda));
    CoefficientState::from_terms(n, terms)
}

/// Measures string `j` of [`pbin_strings`].
pub fn rac_decode_pbin(state: &CoefficientState, j: usize, restrict_to_xyz: bool) -> Result<Decoded> {
    let strings = pbin_strings(state.num_systems(), restrict_to_xyz)?;
    let s = strings.get(j).ok_or(Error::IndexOutOfRange { index: j, len: strings.len() })?;
    Ok(Decoded::from_moment(expectation(state, s)?))
}

/// Copies and failure bound of the majority-vote booster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepetitionParams {
    /// Copies used (odd).
    pub k: usize,
    /// `2 exp(-(2n+1)^{1/p} / 2)`.
    pub epsilon: f64,
    /// `(2n+1)^{3/p}` before rounding.
    pub k_exact: f64,
    /// Set when the ceiling was even and `k` was incremented.
    pub forced_odd: bool,
    /// `k * n`.
    pub carriers: usize,
}

/// `k = ceil((2n+1)^{3/p})`, made odd; `p = inf` needs a single copy.
pub fn rac_repetition_params(n: usize, p: PNorm) -> Result<RepetitionParams> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    let base = (2 * n + 1) as f64;
    let (k_exact, epsilon) = match p {
        PNorm::Infinity => (1.0, 0.0),
        PNorm::Finite(q) => (base.powf(3.0 / q), 2.0 * (-base.powf(1.0 / q) / 2.0).exp()),
    };
    // values within rounding noise of an integer are that integer
    let ceil = if (k_exact - k_exact.round()).abs() < 1e-9 { k_exact.round() } else { k_exact.ceil() };
    if ceil > 1e12 {
        return Err(Error::Resource(format!("{ceil} copies are too many")));
    }
    let ceil = ceil as usize;
    let forced_odd = ceil % 2 == 0;
    let k = if forced_odd { ceil + 1 } else { ceil };
    Ok(RepetitionParams { k, epsilon, k_exact, forced_odd, carriers: k * n })
}

/// Exact probability that a majority of `k` independent copies, each right
/// with probability `q`, is right. Ties count as right only when `tie_wins`.
pub fn majority_success_probability(k: usize, q: f64, tie_wins: bool) -> f64 {
    if q >= 1.0 {
        return 1.0;
    }
    if q <= 0.0 {
        return if k == 0 && tie_wins { 1.0 } else { 0.0 };
    }
    let (lq, lr) = (q.ln(), (1.0 - q).ln());
    let mut log_pmf = k as f64 * lr;
    let mut total = 0.0;
    for i in 0..=k {
        if 2 * i > k || (2 * i == k && tie_wins) {
            total += log_pmf.exp();
        }
        if i < k {
            log_pmf += ((k - i) as f64 / (i + 1) as f64).ln() + lq - lr;
        }
    }
    total.min(1.0)
}

/// Monte Carlo result of the majority-vote decoder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepetitionOutcome {
    pub k: usize,
    pub per_copy: f64,
    pub exact: f64,
    pub empirical: f64,
    pub trials: u64,
    pub epsilon: f64,
}

const CHUNK: u64 = 4096;

/// Each trial draws the number of correct copies among `k` independent
/// copies of the `p`-GNST code of `x` and takes the majority (ties toward
/// bit 0). Chunks of trials use independent streams of one seed, so the
/// result does not depend on the thread count.
pub fn rac_repetition_decode(
    x: &[u8],
    n: usize,
    p: PNorm,
    j: usize,
    trials: u64,
    seed: u64,
) -> Result<RepetitionOutcome> {
    if trials == 0 {
        return Err(domain("trials must be positive"));
    }
    let params = rac_repetition_params(n, p)?;
    let state = rac_encode_pgnst(x, n, p)?;
    let per_copy = rac_decode(&state, j, &IndexMap::identity(x.len()))?.probability_of(x[j]);
    let k = params.k;
    let tie_wins = x[j] == 0;
    let binom = Binomial::new(k as u64, per_copy.clamp(0.0, 1.0)).map_err(|e| domain(e.to_string()))?;
    let chunks = trials.div_ceil(CHUNK);
    let wins: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(trials - c * CHUNK);
            (0..count)
                .filter(|_| {
                    let right = binom.sample(&mut rng) as usize;
                    2 * right > k || (2 * right == k && tie_wins)
                })
                .count() as u64
        })
        .sum();
    Ok(RepetitionOutcome {
        k,
        per_copy,
        exact: majority_success_probability(k, per_copy, tie_wins),
        empirical: wins as f64 / trials as f64,
        trials,
        epsilon: params.epsilon,
    })
}

/// Size `n` of each code and the copy count of the learning construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LearningCode {
    pub n: usize,
    /// `ceil(ln(4/(1/2-gamma)^2) (2n+1)^{2/p})`.
    pub k: usize,
    /// `k * n`; may exceed the budget because `(2n+1)^{2/p} >= (2n)^{2/p}`.
    pub carriers: usize,
    pub within_budget: bool,
}

/// `ln(4/(1/2 - gamma)^2)`.
pub fn learning_log_factor(gamma: f64) -> f64 {
    (4.0 / (0.5 - gamma).powi(2)).ln()
}

/// Smallest budget accepted by [`rac_learning_params`]: `2^{2/p} ln(4/(1/2-gamma)^2)`.
pub fn learning_threshold(p: PNorm, gamma: f64) -> f64 {
    2f64.powf(2.0 * p.reciprocal()) * learning_log_factor(gamma)
}

/// `floor((n_hat 2^{-2/p} / ln(4/(1/2-gamma)^2))^{1/(2/p+1)})`.
pub fn rac_learning_params(n_hat: f64, p: PNorm, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(domain(format!("gamma = {gamma} outside (0, 1/2)")));
    }
    let threshold = learning_threshold(p, gamma);
    if !(n_hat >= threshold) {
        return Err(domain(format!("n_hat = {n_hat} is below the minimum {threshold:.6}")));
    }
    let two_p = 2.0 * p.reciprocal();
    let base = n_hat * 2f64.powf(-two_p) / learning_log_factor(gamma);
    let n = base.powf(1.0 / (two_p + 1.0));
    // guard against values a rounding step below an integer
    let n = if (n - n.round()).abs() < 1e-9 { n.round() } else { n.floor() };
    Ok(n as usize)
}

/// The repetition code realizing [`rac_learning_params`].
pub fn learning_code(n_hat: f64, p: PNorm, gamma: f64) -> Result<LearningCode> {
    let n = rac_learning_params(n_hat, p, gamma)?;
    let k_exact = learning_log_factor(gamma) * ((2 * n + 1) as f64).powf(2.0 * p.reciprocal());
    let k = k_exact.ceil().max(1.0) as usize;
    Ok(LearningCode { n, k, carriers: k * n, within_budget: (k * n) as f64 <= n_hat })
}

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    [q, 1.0 - q].iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// `(1 - h(q)) N`, the fewest qubits any quantum `[N, n, q]` code can use.
pub fn nayak_bound(big_n: usize, q: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&q) {
        return Err(domain(format!("q = {q} outside [1/2, 1]")));
    }
    Ok((1.0 - binary_entropy(q)) * big_n as f64)
}
