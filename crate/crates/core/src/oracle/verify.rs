use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::dense::{dense_circuit, dense_pauli, dense_state, DenseMatrix};
use super::sample::random_pbin_state;
use crate::constraints::{check_commuting_moments, check_local_moments, check_p_uncertainty, UncertaintyMode};
use crate::error::{domain, Error, Result};
use crate::games::{build_eta1, chsh_value, chsh_win_probability, pgnst_chsh_state, SharedState};
use crate::pauli::{hermitian_basis, PauliString};
use crate::pnorm::PNorm;
use crate::rac::{pbin_strings, rac_decode, rac_encode_gnst, rac_encode_pbin, rac_encode_pgnst, rac_lambda, IndexMap};
use crate::states::{
    apply_clifford, count_settings, random_circuit, tensor, CliffordCircuit, CoefficientState, FiducialSetting, Gate,
    GnstState, StateDocument,
};
use crate::tol;

/// Claim ids accepted by [`exhaustive_verify`].
pub const CLAIMS: [&str; 9] = [
    "inclusion",
    "operations",
    "operations-pbox-counterexample",
    "tensor",
    "pgnstRAC",
    "pRAC",
    "pbinRAC",
    "pnonlocalRAC",
    "chsh",
];

/// Largest system count for the state claims (exhaustive uncertainty).
const MAX_CLAIM_SYSTEMS: usize = 3;
/// Strings enumerated exhaustively up to this many bits; beyond, `cases` are sampled.
const MAX_EXHAUSTIVE_BITS: usize = 15;
const SEARCH_ATTEMPTS: usize = 200_000;
/// Agreement between main path and dense realization.
const AGREEMENT: f64 = 1e-9;

/// Knobs shared by all claims; each claim reads the ones it needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyParams {
    pub p: PNorm,
    /// Second parameter of the inclusion claim; every listed `q >= p` when absent.
    pub q: Option<PNorm>,
    /// System count; each claim picks a default when absent.
    pub n: Option<usize>,
    pub cases: usize,
    pub seed: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams { p: PNorm::TWO, q: None, n: None, cases: 500, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// First failing case (or, for search claims, the witness found).
    pub counterexample: Option<Value>,
    pub seed: u64,
    pub detail: String,
}

impl ClaimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Runs the named claim check.
pub fn exhaustive_verify(claim: &str, params: &VerifyParams) -> Result<ClaimReport> {
    let (cases, failures, counterexample, detail) = match claim {
        "inclusion" => inclusion(params)?,
        "operations" => operations(params)?,
        "operations-pbox-counterexample" => pbox_counterexample(params)?,
        "tensor" => tensor_closure(params)?,
        "pgnstRAC" => pgnst_rac(params)?,
        "pRAC" => p_rac(params)?,
        "pbinRAC" => pbin_rac(params)?,
        "pnonlocalRAC" => pnonlocal_rac(params)?,
        "chsh" => chsh(params)?,
        other => {
            return Err(domain(format!("unknown claim '{other}'; expected one of {}", CLAIMS.join(", "))));
        }
    };
    let passed = if claim == "operations-pbox-counterexample" { counterexample.is_some() } else { failures == 0 };
    Ok(ClaimReport { claim: claim.to_string(), passed, cases, failures, counterexample, seed: params.seed, detail })
}

type Outcome = (usize, usize, Option<Value>, String);

/// Runs `cases` independent cases in parallel, each with its own stream of
/// the seeded generator; returns the failure count and the earliest failure.
fn run_cases<F>(cases: usize, seed: u64, check: F) -> Result<(usize, Option<Value>)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<Value>> + Sync,
{
    let results: Vec<Option<Value>> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            check(&mut rng)
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|r| r.is_some()).count();
    Ok((failures, results.into_iter().flatten().next()))
}

fn p_value(p: PNorm) -> f64 {
    match p {
        PNorm::Finite(v) => v,
        PNorm::Infinity => f64::INFINITY,
    }
}

fn systems(params: &VerifyParams, default: usize) -> Result<usize> {
    let n = params.n.unwrap_or(default);
    if n == 0 || n > MAX_CLAIM_SYSTEMS {
        return Err(Error::Resource(format!("this claim is checked for 1 <= n <= {MAX_CLAIM_SYSTEMS}, got {n}")));
    }
    Ok(n)
}

fn doc(s: &CoefficientState) -> Value {
    serde_json::to_value(StateDocument::from(s)).expect("documents serialize")
}

fn circuit_doc(c: &CliffordCircuit) -> Value {
    Value::from(c.gates().iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn uncertainty_passes(s: &CoefficientState, p: PNorm) -> Result<bool> {
    Ok(check_p_uncertainty(s, p, UncertaintyMode::Exhaustive)?.passed)
}

/// Draws `n` from `1..=max` when unspecified, else uses it.
fn case_systems<R: Rng + ?Sized>(params: &VerifyParams, rng: &mut R) -> Result<usize> {
    match params.n {
        Some(_) => systems(params, 1),
        None => Ok(rng.random_range(1..=MAX_CLAIM_SYSTEMS)),
    }
}

fn inclusion(params: &VerifyParams) -> Result<Outcome> {
    let p = params.p;
    let qs: Vec<PNorm> = match params.q {
        Some(q) if p_value(q) < p_value(p) => return Err(domain("inclusion needs q >= p")),
        Some(q) => vec![q],
        None => [PNorm::Finite(1.0), PNorm::TWO, PNorm::Finite(3.0), PNorm::Infinity]
            .into_iter()
            .filter(|q| p_value(*q) >= p_value(p))
            .collect(),
    };
    let n = systems(params, 1)?;
    let (failures, cx) = run_cases(params.cases, params.seed, |rng| {
        let s = random_pbin_state(n, p, rng)?;
        if !uncertainty_passes(&s, p)? {
            return Ok(Some(json!({ "reason": "sampler produced an invalid state", "state": doc(&s) })));
        }
        for &q in &qs {
            if !uncertainty_passes(&s, q)? {
                return Ok(Some(json!({ "state": doc(&s), "q": q })));
            }
        }
        Ok(None)
    })?;
    let qs: Vec<String> = qs.iter().map(ToString::to_string).collect();
    Ok((params.cases, failures, cx, format!("p = {p}, q in [{}], n = {n}", qs.join(", "))))
}

fn dense_conjugation_gap(c: &CliffordCircuit, s: &CoefficientState, image: &CoefficientState) -> Result<f64> {
    let u = dense_circuit(c)?;
    let rho = u.matmul(&dense_state(s)?)?.matmul(&u.adjoint())?;
    Ok(rho.max_abs_diff(&dense_state(image)?) * (1u64 << s.num_systems()) as f64)
}

/// Shrinks toward the maximally mixed state until every commuting moment
/// matrix is PSD (the maximally mixed state itself always is).
fn pnonlocal_sample<R: Rng + ?Sized>(n: usize, p: PNorm, rng: &mut R) -> Result<CoefficientState> {
    let mut s = random_pbin_state(n, p, rng)?;
    while !check_commuting_moments(&s)?.passed {
        s = s.scaled(0.8)?;
    }
    Ok(s)
}

fn operations(params: &VerifyParams) -> Result<Outcome> {
    let p = params.p;
    let (failures, cx) = run_cases(params.cases, params.seed, |rng| {
        let n = case_systems(params, rng)?;
        let c = random_circuit(n, rng.random_range(1..=4 * n + 4), rng);
        let bin = random_pbin_state(n, p, rng)?;
        let image = apply_clifford(&c, &bin)?;
        if !uncertainty_passes(&image, p)? {
            return Ok(Some(json!({ "property": "p-bin closure", "state": doc(&bin), "circuit": circuit_doc(&c) })));
        }
        let gap = dense_conjugation_gap(&c, &bin, &image)?;
        if gap > AGREEMENT {
            return Ok(Some(json!({ "property": "dense agreement", "gap": gap, "state": doc(&bin) })));
        }
        let nonlocal = pnonlocal_sample(n, p, rng)?;
        let image = apply_clifford(&c, &nonlocal)?;
        if !uncertainty_passes(&image, p)? || !check_commuting_moments(&image)?.passed {
            return Ok(Some(
                json!({ "property": "p-nonlocal closure", "state": doc(&nonlocal), "circuit": circuit_doc(&c) }),
            ));
        }
        Ok(None)
    })?;
    Ok((params.cases, failures, cx, format!("p = {p}; p-bin and p-nonlocal closure plus dense conjugation")))
}

/// The witness recorded on first discovery: `0.9 (XX + YY + ZZ)` is a
/// p-box at `p = 2` (no anti-commuting set holds two of its strings), and
/// CNOT maps it to `0.9 (XI + IZ - XZ)`, whose `{X1, Z2}` moment matrix has
/// the eigenvalue `1 - 0.9 - 0.9 - 0.9`.
pub(crate) fn frozen_pbox_witness() -> (CoefficientState, CliffordCircuit) {
    let terms = ["XX", "YY", "ZZ"].map(|l| (l.parse::<PauliString>().expect("label"), 0.9));
    let s = CoefficientState::from_terms(2, terms).expect("valid");
    let c = CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 0, target: 1 }]).expect("valid");
    (s, c)
}

/// True when `s` is a p-box state whose image under `c` fails the E_L check.
fn is_pbox_witness(s: &CoefficientState, c: &CliffordCircuit, p: PNorm) -> Result<Option<f64>> {
    if !uncertainty_passes(s, p)? || !check_local_moments(s)?.passed {
        return Ok(None);
    }
    let image = check_local_moments(&apply_clifford(c, s)?)?;
    Ok((!image.passed).then_some(image.margin))
}

fn pbox_counterexample(params: &VerifyParams) -> Result<Outcome> {
    let p = params.p;
    let basis = hermitian_basis(2)?;
    let levels = [0.5, 0.6, 0.7, 0.8, 0.9];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (frozen, frozen_c) = frozen_pbox_witness();
    let frozen_ok = is_pbox_witness(&frozen, &frozen_c, p)?.is_some();
    for attempt in 1..=SEARCH_ATTEMPTS {
        let strings: Vec<&PauliString> = basis.choose_multiple(&mut rng, 3).collect();
        let c = *levels.choose(&mut rng).expect("nonempty");
        let terms = strings.into_iter().map(|s| (s.clone(), if rng.random_bool(0.5) { c } else { -c }));
        let s = CoefficientState::from_terms(2, terms)?;
        let control = rng.random_range(0..2);
        let circuit = CliffordCircuit::from_gates(2, vec![Gate::Cnot { control, target: 1 - control }])?;
        if let Some(margin) = is_pbox_witness(&s, &circuit, p)? {
            let image = apply_clifford(&circuit, &s)?;
            let cx = json!({
                "state": doc(&s),
                "circuit": circuit_doc(&circuit),
                "image": doc(&image),
                "image_local_margin": margin,
                "frozen_witness_holds": frozen_ok,
            });
            let detail = format!("p = {p}; witness after {attempt} attempts; frozen witness holds: {frozen_ok}");
            return Ok((attempt, usize::from(!frozen_ok), frozen_ok.then_some(cx), detail));
        }
    }
    Ok((SEARCH_ATTEMPTS, 1, None, format!("p = {p}; no witness in {SEARCH_ATTEMPTS} attempts")))
}

fn tensor_closure(params: &VerifyParams) -> Result<Outcome> {
    let p = params.p;
    let (failures, cx) = run_cases(params.cases, params.seed, |rng| {
        let n = case_systems(params, rng)?.max(2);
        let factors = (0..n).map(|_| random_pbin_state(1, p, rng)).collect::<Result<Vec<_>>>()?;
        let mut s = factors[0].clone();
        for f in &factors[1..] {
            s = tensor(&s, f)?;
        }
        if !uncertainty_passes(&s, p)? {
            return Ok(Some(json!({ "factors": factors.iter().map(doc).collect::<Vec<_>>() })));
        }
        Ok(None)
    })?;
    Ok((params.cases, failures, cx, format!("p = {p}; products of 2 or 3 single-system p-bin states")))
}

/// Bit strings to check: all of them up to `2^MAX_EXHAUSTIVE_BITS`, else
/// `cases` seeded draws.
fn bit_strings(len: usize, params: &VerifyParams) -> Vec<Vec<u8>> {
    if len <= MAX_EXHAUSTIVE_BITS {
        (0..1usize << len).map(|code| (0..len).map(|j| (code >> j & 1) as u8).collect()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        (0..params.cases).map(|_| (0..len).map(|_| rng.random_range(0..=1u8)).collect()).collect()
    }
}

/// `Pr[(1 - A*)/2 = bit]` summed straight from the outcome table.
fn table_recovery(state: &GnstState, setting: &FiducialSetting, bit: u8) -> Result<f64> {
    Ok(state
        .probabilities(setting)?
        .iter()
        .enumerate()
        .filter(|(a, _)| (a.count_ones() & 1) as u8 == bit)
        .map(|(_, pr)| pr)
        .sum())
}

/// Every index of every string decodes with probability `q`, both through
/// the decoder and through the raw table.
fn check_gnst_code<E>(n: usize, q: f64, params: &VerifyParams, encode: E) -> Result<(usize, usize, Option<Value>)>
where
    E: Fn(&[u8]) -> Result<GnstState> + Sync,
{
    let len = count_settings(n)?;
    let strings = bit_strings(len, params);
    let f = IndexMap::identity(len);
    let results: Vec<Option<Value>> = strings
        .par_iter()
        .map(|x| {
            let state = encode(x)?;
            for (j, &bit) in x.iter().enumerate() {
                let decoded = rac_decode(&state, j, &f)?.probability_of(bit);
                let raw = table_recovery(&state, &FiducialSetting::from_index(n, j)?, bit)?;
                if (decoded - q).abs() > tol::EXACT || (raw - q).abs() > tol::EXACT {
                    return Ok(Some(json!({ "x": x, "index": j, "decoded": decoded, "table": raw, "expected": q })));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|r| r.is_some()).count();
    Ok((strings.len(), failures, results.into_iter().flatten().next()))
}

fn pgnst_rac(params: &VerifyParams) -> Result<Outcome> {
    let n = systems(params, 2)?;
    let (cases, failures, cx) = check_gnst_code(n, 1.0, params, |x| rac_encode_gnst(x, n))?;
    Ok((cases, failures, cx, format!("n = {n}; {cases} strings x {} indices", count_settings(n)?)))
}

fn p_rac(params: &VerifyParams) -> Result<Outcome> {
    let (n, p) = (systems(params, 2)?, params.p);
    let q = 0.5 + 0.5 * rac_lambda(n, p);
    let (cases, failures, cx) = check_gnst_code(n, q, params, |x| rac_encode_pgnst(x, n, p))?;
    Ok((cases, failures, cx, format!("n = {n}, p = {p}; recovery {q}")))
}

/// Decoding probabilities of coefficient codes via `Tr((I + (-1)^b S) rho) / 2`.
fn check_pbin_code(n: usize, p: PNorm, restrict: bool, params: &VerifyParams) -> Result<(usize, usize, Option<Value>)> {
    let strings = pbin_strings(n, restrict)?;
    let dense: Vec<DenseMatrix> = strings.iter().map(dense_pauli).collect::<Result<_>>()?;
    let q = 0.5 + 0.5 * rac_lambda(n, p);
    let xs = bit_strings(strings.len(), params);
    let results: Vec<Option<Value>> = xs
        .par_iter()
        .map(|x| {
            let state = rac_encode_pbin(x, n, p, restrict)?;
            let rho = dense_state(&state)?;
            for (j, (s, &bit)) in dense.iter().zip(x).enumerate() {
                let t = rho.matmul(s)?.trace();
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let pr = 0.5 * (1.0 + sign * t.re);
                if (pr - q).abs() > AGREEMENT || t.im.abs() > AGREEMENT {
                    return Ok(Some(json!({ "x": x, "index": j, "probability": pr, "expected": q })));
                }
            }
            if !uncertainty_passes(&state, p)? {
                return Ok(Some(json!({ "x": x, "reason": "uncertainty fails" })));
            }
            if restrict && !check_local_moments(&state)?.passed {
                return Ok(Some(json!({ "x": x, "reason": "local moment check fails" })));
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|r| r.is_some()).count();
    Ok((xs.len(), failures, results.into_iter().flatten().next()))
}

fn pbin_rac(params: &VerifyParams) -> Result<Outcome> {
    let (n, p) = (systems(params, 2)?, params.p);
    let (cases, failures, cx) = check_pbin_code(n, p, false, params)?;
    Ok((cases, failures, cx, format!("n = {n}, p = {p}; dense-trace decoding and p-uncertainty")))
}

fn pnonlocal_rac(params: &VerifyParams) -> Result<Outcome> {
    let (n, p) = (systems(params, 2)?, params.p);
    let (cases, failures, cx) = check_pbin_code(n, p, true, params)?;
    Ok((cases, failures, cx, format!("n = {n}, p = {p}; {{X,Y,Z}}^n code, decoding plus p-box checks")))
}

fn chsh(_params: &VerifyParams) -> Result<Outcome> {
    let grid = [PNorm::Finite(1.0), PNorm::TWO, PNorm::Finite(3.0), PNorm::Finite(10.0), PNorm::Infinity];
    let x: PauliString = "X".parse()?;
    let y: PauliString = "Y".parse()?;
    let z: PauliString = "Z".parse()?;
    let mut failures = 0;
    let mut first = None;
    for p in grid {
        let expected = 0.5 + 0.5 * 0.5f64.powf(1.0 / p_value(p));
        let direct = chsh_win_probability(p);
        let eta = 0.5 + chsh_value(&SharedState::Coeff(build_eta1(p)), [&x, &y], [&x, &y])? / 8.0;
        let gnst = 0.5 + chsh_value(&SharedState::Gnst(pgnst_chsh_state(p)), [&x, &z], [&x, &z])? / 8.0;
        let dense = 0.5 + dense_eta1_chsh(p)? / 8.0;
        let values = [direct, eta, gnst, dense];
        if values.iter().any(|v| (v - expected).abs() > tol::PROBABILITY) {
            failures += 1;
            first.get_or_insert_with(|| json!({ "p": p, "expected": expected, "values": values }));
        }
    }
    Ok((grid.len(), failures, first, "p in {1, 2, 3, 10, inf}; closed form, eta_1, gbit box, dense".into()))
}

/// CHSH sum of `eta_1` built directly as `U (rho_p ⊗ |0><0|) U†`.
fn dense_eta1_chsh(p: PNorm) -> Result<f64> {
    let c = Complex64::new(0.5f64.powf(1.0 / p_value(p)), 0.0);
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // (I + c(X + Y))/2 and |0><0|
    let rho_p = DenseMatrix::from_rows(vec![vec![half, half * c * (one - i)], vec![half * c * (one + i), half]])?;
    let ket0 = DenseMatrix::from_rows(vec![vec![one, zero], vec![zero, zero]])?;
    let u = dense_circuit(&CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 0, target: 1 }])?)?;
    let rho = u.matmul(&rho_p.kron(&ket0))?.matmul(&u.adjoint())?;
    let corr = |a: &str| -> Result<f64> { Ok(rho.matmul(&dense_pauli(&a.parse()?)?)?.trace().re) };
    Ok(corr("XX")? + corr("XY")? + corr("YX")? - corr("YY")?)
}
