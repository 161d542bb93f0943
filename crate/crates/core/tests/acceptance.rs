//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line (written straight to stdout so it survives capture).
//! Tolerances are pinned below; none of them is loosened per case.

use std::io::Write;

use boxworld::constraints::{
    check_local_moments, check_p_uncertainty, check_psd, classify_state, moment_matrix, two_measurement_eigenvalues,
    two_measurement_matrix, HierarchyLevel, UncertaintyMode,
};
use boxworld::games::{
    build_eta1, build_xor_game_state, chsh_value, chsh_win_probability, four_moment_feasible, four_moment_objective,
    pgnst_chsh_state, tsirelson_optimize, xor_game_value, SharedState, XorGame,
};
use boxworld::infotasks::{
    inner_product, learnability_threshold, pir_simulate, sample_complexity_lower_bound, simulate_ip_protocol,
};
use boxworld::oracle::{
    dense_anticommute, dense_pauli, exhaustive_verify, hadamard_factorization_check, random_local_collection,
    random_moment_table, random_probabilities, symmetric_eigenvalues, ClaimReport, VerifyParams,
};
use boxworld::pauli::{pauli_product, symplectic_form, PauliString};
use boxworld::pnorm::PNorm;
use boxworld::rac::{
    rac_decode, rac_encode_pbin, rac_encode_pgnst, rac_learning_params, rac_repetition_decode, rac_repetition_params,
    IndexMap,
};
use boxworld::states::{
    apply_clifford, count_settings, moments_from_distribution, recover_probabilities, CliffordCircuit, Distribution,
    Gate, LoadedState, StateDocument,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed forms and exact constructions.
const EXACT: f64 = 1e-12;
/// Game values and probability comparisons.
const VALUE: f64 = 1e-9;
/// Optimizer value against 2√2.
const OPT_VALUE: f64 = 1e-8;
/// Optimizer location against 1/√2, and the grid oracle's allowance.
const OPT_POINT: f64 = 1e-6;
/// Recovered probabilities counted as non-negative.
const PROB_FLOOR: f64 = 1e-9;
/// Eigensolver against the closed-form spectrum.
const EIGEN: f64 = 1e-10;
/// Formula oracle for the learnability calculators.
const FORMULA: f64 = 1e-6;
const SEED: u64 = 20_240_601;

type Verdict = Result<String, String>;

fn report(id: u32, name: &str, verdict: Verdict) {
    let line = match &verdict {
        Ok(detail) => format!("PASS [{id:>2}] {name}: {detail}\n"),
        Err(why) => format!("FAIL [{id:>2}] {name}: {why}\n"),
    };
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    if let Err(why) = verdict {
        panic!("criterion {id} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ps(label: &str) -> PauliString {
    label.parse().unwrap()
}

fn p_grid() -> [PNorm; 5] {
    [PNorm::Finite(1.0), PNorm::TWO, PNorm::Finite(3.0), PNorm::Finite(10.0), PNorm::Infinity]
}

fn inv_p(p: PNorm) -> f64 {
    match p {
        PNorm::Finite(v) => 1.0 / v,
        PNorm::Infinity => 0.0,
    }
}

fn claim(name: &str, params: VerifyParams) -> Result<ClaimReport, String> {
    let r = exhaustive_verify(name, &params).map_err(|e| e.to_string())?;
    ensure(r.passed, || format!("{name}: {} failures, first {:?}", r.failures, r.counterexample))?;
    Ok(r)
}

#[test]
fn criterion_01_chsh_values() {
    let verdict = (|| -> Verdict {
        let (x, y, z) = (ps("X"), ps("Y"), ps("Z"));
        for p in p_grid() {
            let expected = 0.5 + 1.0 / (2.0 * 2f64.powf(inv_p(p)));
            let direct = chsh_win_probability(p);
            let eta = 0.5 + chsh_value(&SharedState::Coeff(build_eta1(p)), [&x, &y], [&x, &y]).unwrap() / 8.0;
            let gbit = 0.5 + chsh_value(&SharedState::Gnst(pgnst_chsh_state(p)), [&x, &z], [&x, &z]).unwrap() / 8.0;
            for (what, v) in [("closed form", direct), ("eta_1", eta), ("gbit box", gbit)] {
                ensure((v - expected).abs() <= VALUE, || format!("p = {p}: {what} gives {v}, expected {expected}"))?;
            }
        }
        let two = chsh_win_probability(PNorm::TWO);
        ensure((two - 0.8535534).abs() <= 5e-8, || format!("p = 2 gives {two}"))?;
        let inf = chsh_win_probability(PNorm::Infinity);
        ensure(inf == 1.0, || format!("p = inf gives {inf}"))?;
        Ok(format!("p in {{1,2,3,10,inf}} agree within {VALUE:e}; p=2 -> {two:.7}; p=inf -> {inf}"))
    })();
    report(1, "CHSH values", verdict);
}

#[test]
fn criterion_02_tsirelson_optimization() {
    let verdict = (|| -> Verdict {
        let r = tsirelson_optimize(1e-12);
        let bound = 2.0 * 2f64.sqrt();
        let h = 0.5f64.sqrt();
        ensure((r.value - bound).abs() <= OPT_VALUE, || format!("value {} vs {bound}", r.value))?;
        ensure((r.x - h).abs() <= OPT_POINT && (r.y - h).abs() <= OPT_POINT, || format!("at ({}, {})", r.x, r.y))?;
        ensure(four_moment_feasible(r.moments, PNorm::TWO, EXACT), || "optimum infeasible".into())?;
        // 1000 x 1000 grid over moments (x, y, y, -x)
        let steps = 1000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..steps {
            for j in 0..steps {
                let x = -1.0 + 2.0 * i as f64 / (steps - 1) as f64;
                let y = -1.0 + 2.0 * j as f64 / (steps - 1) as f64;
                let m = [x, y, y, -x];
                if four_moment_feasible(m, PNorm::TWO, 0.0) {
                    best = best.max(four_moment_objective(m));
                }
            }
        }
        ensure(best <= r.value + OPT_POINT, || format!("grid reaches {best} above {}", r.value))?;
        ensure(best >= r.value - 1e-2, || format!("grid maximum {best} is suspiciously low"))?;
        Ok(format!("value {:.12} at ({:.9}, {:.9}); grid max {best:.9} over 10^6 points", r.value, r.x, r.y))
    })();
    report(2, "Tsirelson optimization", verdict);
}

#[test]
fn criterion_03_moment_matrix_iff() {
    let verdict = (|| -> Verdict {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut negative = 0;
        let mut worst_bpb = 0.0f64;
        for m in 1..=3usize {
            for i in 0..200 {
                let c = random_local_collection(m, &mut rng);
                // factorization on a genuine distribution
                let probs = random_probabilities(m, &mut rng);
                let f = hadamard_factorization_check(&c, &probs).map_err(|e| e.to_string())?;
                worst_bpb = worst_bpb.max(f.max_deviation);
                ensure(f.max_deviation <= EXACT, || format!("m = {m}, case {i}: |K - BPB^T| = {}", f.max_deviation))?;
                let genuine =
                    moments_from_distribution(&Distribution::new(c.clone(), probs).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                // and on a table with one moment pushed
                let pushed = random_moment_table(&c, true, &mut rng).map_err(|e| e.to_string())?;
                for t in [&genuine, &pushed] {
                    let k = moment_matrix(&c, t, true).map_err(|e| e.to_string())?;
                    let psd = check_psd(&k, PROB_FLOOR).map_err(|e| e.to_string())?.passed;
                    let recovered = recover_probabilities(t, &c).map_err(|e| e.to_string())?;
                    let nonneg = recovered.iter().all(|&p| p >= -PROB_FLOOR);
                    negative += usize::from(!nonneg);
                    ensure(psd == nonneg, || format!("m = {m}, case {i}: psd {psd} but probabilities {recovered:?}"))?;
                }
            }
        }
        ensure(negative > 0, || "no table with a negative probability was drawn".into())?;
        for i in 0..20 {
            let [a, b, c] = [(); 3].map(|_| rng.random_range(-1.0..=1.0));
            let k = two_measurement_matrix(a, b, c);
            let jacobi = symmetric_eigenvalues(k.dim(), k.data()).map_err(|e| e.to_string())?;
            let closed = two_measurement_eigenvalues(a, b, c);
            for (u, v) in jacobi.iter().zip(closed) {
                ensure((u - v).abs() <= EIGEN, || format!("grid point {i} ({a}, {b}, {c}): {jacobi:?} vs {closed:?}"))?;
            }
        }
        Ok(format!(
            "1200 tables (m = 1..3, {negative} with negative outcomes) agree; max |K - BPB^T| = {worst_bpb:.1e}; \
             20 closed-form spectra match"
        ))
    })();
    report(3, "Moment-matrix iff-claim", verdict);
}

#[test]
fn criterion_04_perfect_rac() {
    let verdict = (|| -> Verdict {
        let mut counts = Vec::new();
        for (n, cases) in [(1usize, 8usize), (2, 512), (3, 1000)] {
            let r = claim("pgnstRAC", VerifyParams { n: Some(n), cases: 1000, seed: SEED, ..Default::default() })?;
            ensure(r.cases == cases, || format!("n = {n}: {} strings checked, expected {cases}", r.cases))?;
            counts.push(format!("n={n}: {}x{}", r.cases, count_settings(n).unwrap()));
        }
        Ok(format!("every index decodes with probability 1 ({})", counts.join(", ")))
    })();
    report(4, "Perfect RAC", verdict);
}

#[test]
fn criterion_05_pgnst_rac_recovery() {
    let verdict = (|| -> Verdict {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for n in 1..=3usize {
            for p in [PNorm::Finite(1.0), PNorm::TWO, PNorm::Finite(3.0), PNorm::Infinity] {
                let expected = 0.5 + 0.5 * ((2 * n + 1) as f64).powf(-inv_p(p));
                let len = count_settings(n).unwrap();
                for _ in 0..20 {
                    let x: Vec<u8> = (0..len).map(|_| rng.random_range(0..=1u8)).collect();
                    let s = rac_encode_pgnst(&x, n, p).map_err(|e| e.to_string())?;
                    for (j, &bit) in x.iter().enumerate() {
                        let q = rac_decode(&s, j, &IndexMap::identity(len)).unwrap().probability_of(bit);
                        ensure((q - expected).abs() <= EXACT, || format!("n = {n}, p = {p}, j = {j}: {q}"))?;
                    }
                }
            }
        }
        let p1 = PNorm::Finite(1.0);
        let params = rac_repetition_params(3, p1).map_err(|e| e.to_string())?;
        let trials = 100_000u64;
        let x: Vec<u8> = (0..27).map(|j| (j % 2) as u8).collect();
        let out = rac_repetition_decode(&x, 3, p1, 1, trials, SEED).map_err(|e| e.to_string())?;
        let eps = 2.0 * (-(7f64).powf(1.0) / 2.0).exp();
        ensure((params.epsilon - eps).abs() <= EXACT, || format!("epsilon {} vs {eps}", params.epsilon))?;
        let sigma = (eps * (1.0 - eps) / trials as f64).sqrt();
        let failure = 1.0 - out.empirical;
        ensure(failure <= eps + 3.0 * sigma, || format!("failure rate {failure} above {eps} + 3*{sigma}"))?;
        Ok(format!(
            "exact recovery on the 3x4 grid within {EXACT:e}; k = {}, failure {failure:.5} <= eps + 3 sigma = {:.5}",
            out.k,
            eps + 3.0 * sigma
        ))
    })();
    report(5, "p-GNST RAC recovery", verdict);
}

fn parse_gate(text: &str) -> Gate {
    let inner = text.trim_start_matches("CNOT(").trim_end_matches(')');
    let (c, t) = inner.split_once(',').expect("two targets");
    Gate::Cnot { control: c.parse().unwrap(), target: t.parse().unwrap() }
}

#[test]
fn criterion_06_hierarchy_separation() {
    let verdict = (|| -> Verdict {
        let s = rac_encode_pbin(&[0; 15], 2, PNorm::TWO, false).map_err(|e| e.to_string())?;
        let c = classify_state(&s, PNorm::TWO).map_err(|e| e.to_string())?;
        let names: Vec<String> = c.reports.iter().map(|r| format!("{}={}", r.constraint, r.passed)).collect();
        let passes: Vec<bool> = c.reports.iter().map(|r| r.passed).collect();
        ensure(passes == [true, true, false, false], || format!("checks {names:?}"))?;
        ensure(c.level == HierarchyLevel::PBox, || format!("level {}", c.level))?;

        let r = claim("operations-pbox-counterexample", VerifyParams { seed: SEED, ..Default::default() })?;
        let cx = r.counterexample.clone().ok_or("no witness")?;
        let doc: StateDocument = serde_json::from_value(cx["state"].clone()).map_err(|e| e.to_string())?;
        let LoadedState::Coeff(state) = doc.load().map_err(|e| e.to_string())? else {
            return Err("witness is not a coefficient state".into());
        };
        let gates: Vec<Gate> =
            cx["circuit"].as_array().unwrap().iter().map(|g| parse_gate(g.as_str().unwrap())).collect();
        ensure(gates.iter().all(|g| matches!(g, Gate::Cnot { .. })), || "circuit is not CNOT only".into())?;
        let circuit = CliffordCircuit::from_gates(2, gates).map_err(|e| e.to_string())?;
        let before = check_p_uncertainty(&state, PNorm::TWO, UncertaintyMode::Exhaustive).unwrap().passed
            && check_local_moments(&state).unwrap().passed;
        let after = check_local_moments(&apply_clifford(&circuit, &state).unwrap()).unwrap();
        ensure(before && !after.passed, || format!("witness does not separate: {cx}"))?;
        let terms: Vec<String> = state.terms().map(|(s, v)| format!("{v:+} {}", s.label_string())).collect();
        Ok(format!(
            "p-bin RAC (n=2, p=2, x=0) is p-box only, E_C margin {:.4}; witness {} under {} -> E_L margin {:.3} \
             (found after {} draws)",
            c.reports[2].margin,
            terms.join(" "),
            cx["circuit"],
            after.margin,
            r.cases
        ))
    })();
    report(6, "Hierarchy separation", verdict);
}

#[test]
fn criterion_07_claim_property_suites() {
    let verdict = (|| -> Verdict {
        let cases = 500;
        let mut total = 0;
        for p in [PNorm::Finite(1.0), PNorm::TWO, PNorm::Finite(3.0)] {
            for n in 1..=3 {
                let r = claim("inclusion", VerifyParams { p, n: Some(n), cases, seed: SEED, ..Default::default() })?;
                total += r.cases;
            }
        }
        for p in [PNorm::Finite(1.0), PNorm::TWO, PNorm::Infinity] {
            total += claim("operations", VerifyParams { p, cases, seed: SEED, ..Default::default() })?.cases;
            total += claim("tensor", VerifyParams { p, cases, seed: SEED, ..Default::default() })?.cases;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for i in 0..cases {
            let n = 1 + i % 3;
            let mut draw = || {
                PauliString::new(
                    n,
                    rng.random_range(0..1u64 << n),
                    rng.random_range(0..1u64 << n),
                    rng.random_range(0..4),
                )
                .unwrap()
            };
            let (a, b) = (draw(), draw());
            let (da, db) = (dense_pauli(&a).unwrap(), dense_pauli(&b).unwrap());
            let anti = dense_anticommute(&da, &db).unwrap();
            ensure((symplectic_form(&a, &b).unwrap() == 1) == anti, || format!("commutation of {a}, {b}"))?;
            let product = dense_pauli(&pauli_product(&a, &b).unwrap()).unwrap();
            let gap = product.max_abs_diff(&da.matmul(&db).unwrap());
            ensure(gap <= EXACT, || format!("product of {a}, {b} off by {gap}"))?;
        }
        total += 2 * cases;
        Ok(format!("{total} cases over inclusion, Clifford closure, tensor, commutation and products; 0 failures"))
    })();
    report(7, "Claim property suites", verdict);
}

#[test]
fn criterion_08_unique_xor_games() {
    let verdict = (|| -> Verdict {
        let mut worst = 1.0f64;
        for code in 0..16u8 {
            let c = vec![vec![code & 1, code >> 1 & 1], vec![code >> 2 & 1, code >> 3 & 1]];
            let game = XorGame::uniform_unique(c).map_err(|e| e.to_string())?;
            let (_, strategy) = build_xor_game_state(&game, PNorm::Infinity).map_err(|e| e.to_string())?;
            worst = worst.min(xor_game_value(&game, &strategy).map_err(|e| e.to_string())?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..50 {
            let w: Vec<f64> = (0..9).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            let pi: Vec<Vec<f64>> = w.chunks(3).map(|r| r.iter().map(|v| v / total).collect()).collect();
            let v = (0..3)
                .map(|_| (0..3).map(|_| boxworld::games::Predicate::Unique(rng.random_range(0..=1))).collect())
                .collect();
            let game = XorGame::new(pi, v).map_err(|e| e.to_string())?;
            let (_, strategy) = build_xor_game_state(&game, PNorm::Infinity).map_err(|e| e.to_string())?;
            worst = worst.min(xor_game_value(&game, &strategy).map_err(|e| e.to_string())?);
        }
        ensure(worst >= 1.0 - VALUE, || format!("lowest win probability {worst}"))?;
        Ok(format!("16 CHSH-type and 50 random 3x3 games won with probability >= {worst:.15}"))
    })();
    report(8, "Unique XOR games", verdict);
}

fn bits_of(v: usize, n: usize) -> Vec<u8> {
    (0..n).map(|t| (v >> t & 1) as u8).collect()
}

#[test]
fn criterion_09_communication_and_pir() {
    let verdict = (|| -> Verdict {
        let carriers_for = |n: usize| (n as f64 * 2f64.ln() / 3f64.ln() - 1e-12).ceil() as usize;
        let mut runs = 0;
        for n in 1..=4usize {
            for a in 0..1usize << n {
                for b in 0..1usize << n {
                    let (x, y) = (bits_of(a, n), bits_of(b, n));
                    let r = simulate_ip_protocol(&x, &y, SEED + runs as u64).map_err(|e| e.to_string())?;
                    ensure(r.bit == inner_product(&x, &y), || format!("IP({x:?}, {y:?})"))?;
                    ensure(r.carriers == carriers_for(n).max(1), || format!("n = {n}: {} carriers", r.carriers))?;
                    runs += 1;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..1000 {
            let (x, y) = (bits_of(rng.random_range(0..1024), 10), bits_of(rng.random_range(0..1024), 10));
            let r = simulate_ip_protocol(&x, &y, rng.random()).map_err(|e| e.to_string())?;
            ensure(r.bit == inner_product(&x, &y), || format!("IP({x:?}, {y:?})"))?;
            ensure(r.carriers == carriers_for(10), || format!("n = 10: {} carriers", r.carriers))?;
            runs += 1;
        }
        let mut retrievals = 0;
        for _ in 0..20 {
            let db: Vec<u8> = (0..9).map(|_| rng.random_range(0..=1u8)).collect();
            for i in 0..9 {
                let r = pir_simulate(&db, i, PNorm::Infinity, 1, rng.random()).map_err(|e| e.to_string())?;
                ensure(r.comm_cost == 2, || format!("N = 9 used {} carriers", r.comm_cost))?;
                ensure(r.bit == db[i] && r.exact_correctness == 1.0, || format!("db {db:?}, index {i}: {r:?}"))?;
                retrievals += 1;
            }
        }
        Ok(format!(
            "{runs} inner products exact (7 carriers at n=10); {retrievals} PIR retrievals exact with 2 carriers"
        ))
    })();
    report(9, "Communication and PIR", verdict);
}

fn fat_formula(d: f64, gamma: f64, eps: f64) -> f64 {
    (d / (2.0 * (4.0 * d / (gamma * gamma)).ln().powi(2)) - 1.0) / (32.0 * eps)
}

#[test]
fn criterion_10_learnability_calculators() {
    let verdict = (|| -> Verdict {
        let n = rac_learning_params(100.0, PNorm::TWO, 0.25).map_err(|e| e.to_string())?;
        ensure(n == 3, || format!("rac_learning_params(100, 2, 1/4) = {n}"))?;
        let conf = (100f64).ln() / 0.1;
        let small = sample_complexity_lower_bound(27.0, 0.25, 0.1, 0.01).map_err(|e| e.to_string())?;
        let fat = fat_formula(27.0, 0.25, 0.1);
        ensure((small.fat_branch - fat).abs() <= FORMULA, || format!("d = 27 fat branch {}", small.fat_branch))?;
        ensure((small.fat_branch - -0.2366).abs() <= 1e-4, || format!("d = 27 fat branch {}", small.fat_branch))?;
        ensure((small.confidence_branch - conf).abs() <= FORMULA, || "confidence branch".into())?;
        ensure((small.value - 46.0517).abs() <= 1e-4, || format!("d = 27 bound {}", small.value))?;
        ensure(!small.precondition_holds, || "precondition should fail at d = 27".into())?;
        ensure((small.precondition_rhs - 24.8).abs() <= 0.05, || format!("rhs {}", small.precondition_rhs))?;
        let d = 3f64.powi(10);
        let big = sample_complexity_lower_bound(d, 0.25, 0.1, 0.01).map_err(|e| e.to_string())?;
        ensure((big.fat_branch - fat_formula(d, 0.25, 0.1)).abs() <= FORMULA, || "d = 3^10 fat branch".into())?;
        ensure((big.fat_branch - 39.9).abs() <= 0.05, || format!("d = 3^10 fat branch {}", big.fat_branch))?;
        ensure(big.precondition_holds, || "precondition should hold at d = 3^10".into())?;
        ensure((big.value - conf).abs() <= FORMULA, || format!("d = 3^10 bound {}", big.value))?;
        // monotonicity sweep standing in for the asymptotic statement
        let mut last = 0.0;
        let mut grew = 0;
        for n_hat in (1..=60).map(|k| 10.0 * 1.12f64.powi(k)) {
            let t = learnability_threshold(n_hat, PNorm::TWO, 0.25, 0.3, 0.1, 0.01).map_err(|e| e.to_string())?;
            ensure(t.bound.d >= last, || format!("d fell at n_hat = {n_hat}"))?;
            grew += usize::from(t.bound.d > last);
            last = t.bound.d;
        }
        ensure(grew >= 5, || format!("d grew only {grew} times"))?;
        Ok(format!(
            "n = 3; d=27 -> ({:.4}, {:.4}) max {:.4}, precondition fails (rhs {:.2}); d=3^10 -> fat {:.3}, \
             precondition holds; d non-decreasing over 60 budgets",
            small.fat_branch, small.confidence_branch, small.value, small.precondition_rhs, big.fat_branch
        ))
    })();
    report(10, "Learnability calculators", verdict);
}
