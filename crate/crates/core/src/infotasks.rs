//! One-way communication, single-server PIR and learnability bounds built
//! on the random access codes of [`crate::rac`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::pnorm::PNorm;
use crate::rac::{
    rac_decode, rac_encode_pgnst, rac_learning_params, rac_repetition_decode, rac_repetition_params,
    recovery_probability, IndexMap, Theory,
};
use crate::states::FiducialSetting;

/// Largest input length of the inner-product protocol (a `2^12`-bit table).
pub const MAX_IP_BITS: usize = 12;

/// Smallest `k` with `3^k >= size`.
pub fn gbits_for(size: usize) -> usize {
    let mut k = 0;
    let mut cap = 1usize;
    while cap < size {
        cap = cap.saturating_mul(3);
        k += 1;
    }
    k.max(1)
}

/// Carriers Alice sends so that Bob can read any `f(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommProtocolResult {
    pub function: String,
    pub n: usize,
    pub theory: Theory,
    pub p: PNorm,
    pub carriers: usize,
    /// Per-query recovery probability of the code used.
    pub correctness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Gbit theories send the `2^n`-bit truth table in `ceil(log_3 2^n)`
/// carriers. The Pauli-string code sends `ceil(n/2)`: its `4^k - 1` strings
/// hold every `y != 0`, and `IP(x, 0) = 0` needs no carrier.
pub fn ip_oneway_cost(n: usize, p: PNorm, theory: Theory) -> Result<CommProtocolResult> {
    if n == 0 || n >= usize::BITS as usize - 1 {
        return Err(domain(format!("input length {n} out of range")));
    }
    let carriers = match theory {
        Theory::PBin => n.div_ceil(2),
        Theory::Gnst | Theory::PGnst | Theory::PBox => gbits_for(1 << n),
    };
    let (correctness, warning) = if p.is_infinite() || theory == Theory::Gnst {
        (1.0, None)
    } else {
        (
            recovery_probability(carriers, p),
            Some(format!("p = {p} is finite: bits are recovered with probability below 1")),
        )
    };
    Ok(CommProtocolResult { function: "inner-product".into(), n, theory, p, carriers, correctness, warning })
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().enumerate().map(|(t, &b)| (b as usize) << t).sum()
}

/// `x · y mod 2`.
pub fn inner_product(x: &[u8], y: &[u8]) -> u8 {
    x.iter().zip(y).map(|(a, b)| a & b).fold(0, |acc, v| acc ^ v)
}

/// One protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IpRun {
    pub bit: u8,
    pub carriers: usize,
}

/// Alice encodes `m_y = IP(x, y)` for every `y` (bit `t` of the index is
/// `y_t`) into a gbit code; Bob samples the setting of his `y` and applies
/// the decoder.
pub fn simulate_ip_protocol(x: &[u8], y: &[u8], seed: u64) -> Result<IpRun> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    if n == 0 || n > MAX_IP_BITS {
        return Err(Error::Resource(format!("inner-product protocol supports 1 <= n <= {MAX_IP_BITS}")));
    }
    if x.iter().chain(y).any(|&b| b > 1) {
        return Err(domain("inputs are bit strings"));
    }
    let k = gbits_for(1 << n);
    let mut message = vec![0u8; 3usize.pow(k as u32)];
    for (yi, slot) in message.iter_mut().enumerate().take(1 << n) {
        let ybits: Vec<u8> = (0..n).map(|t| (yi >> t & 1) as u8).collect();
        *slot = inner_product(x, &ybits);
    }
    let state = rac_encode_pgnst(&message, k, PNorm::Infinity)?;
    let setting = FiducialSetting::from_index(k, bits_to_index(y))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = state.sample_outcome(&setting, &mut rng)?;
    Ok(IpRun { bit: u8::from(a.product() < 0), carriers: k })
}

/// Result of one retrieval plus the code's exact and sampled correctness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PirResult {
    pub bit: u8,
    /// Carriers sent from server to user.
    pub comm_cost: usize,
    /// Gbits per copy of the code.
    pub n: usize,
    pub copies: usize,
    pub exact_correctness: f64,
    pub empirical_correctness: f64,
    pub trials: u64,
    /// `N` bits, what the trivial protocol sends (optimal for quantum and
    /// classical carriers).
    pub baseline: usize,
}

/// Single-server PIR: the server sends a (repetition-boosted) code of the
/// padded database; the user never sends anything, so the query is private
/// by construction.
pub fn pir_simulate(db: &[u8], i: usize, p: PNorm, trials: u64, seed: u64) -> Result<PirResult> {
    if db.is_empty() {
        return Err(domain("the database is empty"));
    }
    if i >= db.len() {
        return Err(Error::IndexOutOfRange { index: i, len: db.len() });
    }
    if db.iter().any(|&b| b > 1) {
        return Err(domain("the database holds bits"));
    }
    let n = gbits_for(db.len());
    let mut padded = db.to_vec();
    padded.resize(3usize.pow(n as u32), 0);
    let reps = rac_repetition_params(n, p)?;
    let state = rac_encode_pgnst(&padded, n, p)?;
    let f = IndexMap::identity(padded.len());
    let setting = FiducialSetting::from_index(n, f.position_of(i)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ones = 0usize;
    for _ in 0..reps.k {
        if state.sample_outcome(&setting, &mut rng)?.product() < 0 {
            ones += 1;
        }
    }
    // ties toward 0; k is odd so they do not occur
    let bit = u8::from(2 * ones > reps.k);
    let (exact, empirical) = if p.is_infinite() {
        let q = rac_decode(&state, i, &f)?.probability_of(db[i]);
        (q, q)
    } else {
        let r = rac_repetition_decode(&padded, n, p, i, trials, seed)?;
        (r.exact, r.empirical)
    };
    Ok(PirResult {
        bit,
        comm_cost: reps.carriers,
        n,
        copies: reps.k,
        exact_correctness: exact,
        empirical_correctness: empirical,
        trials: if p.is_infinite() { 0 } else { trials },
        baseline: db.len(),
    })
}

/// Shattering witness from a `[N, n, 1/2 + gamma]` code: samples
/// `(C_i, D)` with `D(A) = (1 - A*)/2` and thresholds `alpha_i = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FatBound {
    /// `fat(gamma) >= bound`.
    pub bound: usize,
    pub gamma: f64,
    pub alpha: f64,
}

pub fn fat_shattering_lower_bound(rac: &crate::rac::RacParams) -> Result<FatBound> {
    let gamma = rac.q - 0.5;
    if !(gamma > 0.0) {
        return Err(domain("q must exceed 1/2 to shatter with a positive margin"));
    }
    Ok(FatBound { bound: rac.big_n, gamma, alpha: 0.5 })
}

/// `rho_x(C_i, D) = sum_A D(A) p_x(A|C_i)` for every index `i`, using the
/// `p`-GNST code of `x` on `n` gbits.
pub fn fat_witness_values(x: &[u8], n: usize, p: PNorm) -> Result<Vec<f64>> {
    let state = rac_encode_pgnst(x, n, p)?;
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let setting = FiducialSetting::from_index(n, i)?;
        let probs = state.probabilities(&setting)?;
        out.push(probs.iter().enumerate().filter(|(a, _)| a.count_ones() % 2 == 1).map(|(_, q)| q).sum());
    }
    Ok(out)
}

/// Both branches of the sample-size lower bound and its precondition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleBound {
    pub d: f64,
    /// `(1/32 eps)(d / (2 ln^2(4d/gamma^2)) - 1)`.
    pub fat_branch: f64,
    /// `(1/eps) ln(1/delta)`.
    pub confidence_branch: f64,
    pub value: f64,
    /// `gamma^2 >= 4 d 2^{-sqrt(d/6)}`; the bound is only guaranteed when set.
    pub precondition_holds: bool,
    pub precondition_rhs: f64,
}

pub fn sample_complexity_lower_bound(d: f64, gamma: f64, epsilon: f64, delta: f64) -> Result<SampleBound> {
    if !(d >= 1.0) {
        return Err(domain(format!("d = {d} must be at least 1")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma = {gamma} outside (0, 1)")));
    }
    for (name, v) in [("epsilon", epsilon), ("delta", delta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(domain(format!("{name} = {v} outside (0, 1]")));
        }
    }
    // in logs so that 4d/gamma^2 cannot overflow
    let l = 4f64.ln() + d.ln() - 2.0 * gamma.ln();
    let fat_branch = (d / (2.0 * l * l) - 1.0) / (32.0 * epsilon);
    let confidence_branch = (1.0 / delta).ln() / epsilon;
    let precondition_rhs = (4f64.ln() + d.ln() - (d / 6.0).sqrt() * 2f64.ln()).exp();
    Ok(SampleBound {
        d,
        fat_branch,
        confidence_branch,
        value: fat_branch.max(confidence_branch),
        precondition_holds: gamma * gamma >= precondition_rhs,
        precondition_rhs,
    })
}

/// Which ordering of `gamma` and `eta` the parameters fall in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginRegime {
    /// `gamma < eta`, as the sample bound assumes.
    GammaBelowEta,
    /// `gamma > eta`, as the learning definition states.
    GammaAboveEta,
    Equal,
}

/// Sample sizes below `bound.value` cannot learn `n_hat`-gbit states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnParams {
    pub n_hat: f64,
    pub p: PNorm,
    pub gamma: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub regime: MarginRegime,
    /// Gbits per code copy.
    pub n: usize,
    pub bound: SampleBound,
    pub asymptotic: String,
}

pub fn learnability_threshold(
    n_hat: f64,
    p: PNorm,
    gamma: f64,
    eta: f64,
    epsilon: f64,
    delta: f64,
) -> Result<LearnParams> {
    let n = rac_learning_params(n_hat, p, gamma)?;
    let d = 3f64.powi(n as i32);
    if !d.is_finite() {
        return Err(Error::Resource(format!("3^{n} overflows a double")));
    }
    let bound = sample_complexity_lower_bound(d, gamma, epsilon, delta)?;
    let regime = if gamma < eta {
        MarginRegime::GammaBelowEta
    } else if gamma > eta {
        MarginRegime::GammaAboveEta
    } else {
        MarginRegime::Equal
    };
    let e = 1.0 / (2.0 * p.reciprocal() + 1.0);
    let asymptotic = if p == PNorm::TWO {
        "O(3^(sqrt(n_hat)) / n_hat)".to_string()
    } else {
        format!("O(3^(n_hat^{e:.6}) / n_hat^{:.6})", 2.0 * e)
    };
    Ok(LearnParams { n_hat, p, gamma, eta, epsilon, delta, regime, n, bound, asymptotic })
}
