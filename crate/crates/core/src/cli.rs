//! The `boxworld` command line: experiment runners plus a front end to every
//! module. Output is JSON by default or CSV (comma separated, header row,
//! 12 significant digits); exit codes are 0 on pass, 1 on a failed check and
//! 2 on usage or input errors.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::constraints::{check_p_uncertainty, classify_state, validate_gnst, HierarchyLevel, UncertaintyMode};
use crate::error::{domain, Error, Result};
use crate::games::{
    build_eta1, build_xor_game_state, chsh_value, chsh_win_probability, p_tsirelson_optimize, pgnst_chsh_state,
    xor_game_value, SharedState, XorGame,
};
use crate::infotasks::{
    fat_shattering_lower_bound, inner_product, ip_oneway_cost, learnability_threshold, pir_simulate,
    simulate_ip_protocol, MAX_IP_BITS,
};
use crate::pauli::{PauliString, MAX_ENUMERATION_SYSTEMS};
use crate::pnorm::PNorm;
use crate::rac::{
    learning_code, nayak_bound, pbin_strings, rac_decode, rac_decode_pbin, rac_encode_gnst, rac_encode_pbin,
    rac_encode_pgnst, rac_repetition_params, recovery_probability, IndexMap, RacParams, Theory,
};
use crate::states::{count_settings, FiducialSetting, GnstState, LoadedState, StateDocument};
use crate::tol;

pub const DEFAULT_TRIALS: u64 = 100_000;
/// Claim checks draw this many cases unless `--trials` says otherwise.
pub const DEFAULT_CLAIM_CASES: usize = 500;
/// Codes with at most this many bits are verified on every string.
const MAX_EXHAUSTIVE_BITS: usize = 15;
const SAMPLED_STRINGS: usize = 1000;
const MAX_VERIFY_SYSTEMS: usize = 4;
const DEFAULT_PSPHERE: [f64; 5] = [1.0, 2.0, 3.0, 10.0, 10_000.0];

#[derive(Parser, Debug)]
#[command(name = "boxworld", version, about = "Generalized non-signaling theories workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Theory parameter: a real number >= 1 or `inf` (default 2).
    #[arg(long, global = true)]
    pub p: Option<PNorm>,
    /// System count (or database size for `pir`).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, global = true, env = "BOXWORLD_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials, or cases for `oracle verify`.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Numerical tolerance for feasibility checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON state or game document.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
    /// Claim id for `oracle verify`.
    #[arg(long, global = true)]
    pub claim: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TheoryArg {
    Gnst,
    PGnst,
    PBin,
    PBox,
}

impl From<TheoryArg> for Theory {
    fn from(t: TheoryArg) -> Self {
        match t {
            TheoryArg::Gnst => Theory::Gnst,
            TheoryArg::PGnst => Theory::PGnst,
            TheoryArg::PBin => Theory::PBin,
            TheoryArg::PBox => Theory::PBox,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Properties and results per theory, computed where possible.
    Table1,
    /// Points on the p-norm unit circle per p.
    Psphere {
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// CHSH win probability through every construction.
    Chsh,
    /// Value of an XOR game (JSON via --file, CHSH otherwise).
    Xor,
    /// Random access codes: encode, decode, verify, parameters.
    #[command(subcommand)]
    Rac(RacCommand),
    /// Communication complexity protocols.
    #[command(subcommand)]
    Comm(CommCommand),
    /// Private information retrieval from a seeded database of --n bits.
    Pir {
        #[arg(long)]
        index: Option<usize>,
    },
    /// Learnability calculators.
    Learn {
        #[arg(long, default_value_t = 100.0)]
        n_hat: f64,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 0.3)]
        eta: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Classify or validate the state in --file.
    Validate,
    /// Independent checks of the library's claims.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug)]
pub enum RacCommand {
    /// Encode a bit string (seeded random when --bits is absent).
    Encode {
        #[arg(long, value_enum, default_value_t = TheoryArg::PGnst)]
        theory: TheoryArg,
        #[arg(long)]
        bits: Option<String>,
    },
    /// Decode one index of the state in --file.
    Decode {
        #[arg(long)]
        index: usize,
        /// Coefficient states use the {X,Y,Z}^n string order.
        #[arg(long)]
        restrict: bool,
    },
    /// Recovery of every index, exact and sampled.
    Verify {
        #[arg(long, value_enum, default_value_t = TheoryArg::PGnst)]
        theory: TheoryArg,
    },
    /// Code parameters per theory.
    Params,
}

#[derive(Subcommand, Debug)]
pub enum CommCommand {
    /// One-way inner product.
    Ip {
        #[arg(long, value_enum, default_value_t = TheoryArg::Gnst)]
        theory: TheoryArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Run a claim check by id.
    Verify {
        /// Second parameter of the inclusion claim.
        #[arg(long)]
        q: Option<PNorm>,
    },
}

/// A command result: the JSON document, an optional explicit CSV table and
/// the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub json: Value,
    pub table: Option<(Vec<String>, Vec<Vec<Value>>)>,
    pub passed: bool,
}

impl Output {
    fn new<T: Serialize>(doc: &T, passed: bool) -> Self {
        Output { json: serde_json::to_value(doc).expect("outputs serialize"), table: None, passed }
    }

    fn with_table(mut self, columns: &[&str], rows: Vec<Vec<Value>>) -> Self {
        self.table = Some((columns.iter().map(ToString::to_string).collect(), rows));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("outputs serialize") + "\n",
            Format::Csv => {
                let (columns, rows) = self.table.clone().unwrap_or_else(|| {
                    let mut rows = Vec::new();
                    flatten("", &self.json, &mut rows);
                    (vec!["field".into(), "value".into()], rows)
                });
                let mut out = columns.join(",") + "\n";
                for row in rows {
                    out += &row.iter().map(csv_cell).collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<Value>>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        other => rows.push(vec![Value::from(prefix), other.clone()]),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format_number(n.as_f64().expect("float")),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => csv_cell(&Value::from(other.to_string())),
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        format!("{}e{exp}", trim(mantissa))
    } else {
        trim(&format!("{v:.*}", (11 - exp) as usize))
    }
}

fn p_or_default(cli: &Cli) -> PNorm {
    cli.p.unwrap_or(PNorm::TWO)
}

fn require_file(cli: &Cli) -> Result<String> {
    let path = cli.file.as_ref().ok_or_else(|| domain("this command needs --file"))?;
    Ok(std::fs::read_to_string(path)?)
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Table1 => run_table1(p_or_default(cli)),
        Command::Psphere { samples } => {
            let ps: Vec<PNorm> = match cli.p {
                Some(p) => vec![p],
                None => DEFAULT_PSPHERE.iter().map(|&p| PNorm::new(p)).collect::<Result<_>>()?,
            };
            run_psphere(&ps, *samples)
        }
        Command::Chsh => run_chsh(p_or_default(cli), cli.tol),
        Command::Xor => run_xor(cli),
        Command::Rac(sub) => match sub {
            RacCommand::Encode { theory, bits } => run_rac_encode(cli, *theory, bits.as_deref()),
            RacCommand::Decode { index, restrict } => run_rac_decode(cli, *index, *restrict),
            RacCommand::Verify { theory } => run_rac_verify(cli, *theory),
            RacCommand::Params => run_rac_params(cli.n.unwrap_or(2), p_or_default(cli)),
        },
        Command::Comm(CommCommand::Ip { theory }) => run_comm_ip(cli, *theory),
        Command::Pir { index } => run_pir(cli, *index),
        Command::Learn { n_hat, gamma, eta, epsilon, delta } => {
            run_learn(*n_hat, p_or_default(cli), *gamma, *eta, *epsilon, *delta)
        }
        Command::Validate => run_validate(&require_file(cli)?, p_or_default(cli)),
        Command::Oracle(OracleCommand::Verify { q }) => {
            let claim = cli.claim.as_deref().ok_or_else(|| domain("oracle verify needs --claim"))?;
            let params = crate::oracle::VerifyParams {
                p: p_or_default(cli),
                q: *q,
                n: cli.n,
                cases: cli.trials.map_or(DEFAULT_CLAIM_CASES, |t| t as usize),
                seed: cli.seed,
            };
            let report = crate::oracle::exhaustive_verify(claim, &params)?;
            Ok(Output::new(&report, report.passed))
        }
    }
}

/// Parses `args`, runs the command and returns `(exit code, stdout, stderr)`.
pub fn run_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    match run(&cli) {
        Ok(out) => (if out.passed { 0 } else { 1 }, out.render(cli.format), String::new()),
        Err(e) => (2, String::new(), format!("error: {e}\n")),
    }
}

#[derive(Serialize)]
struct Cell {
    theory: &'static str,
    value: Value,
    source: &'static str,
}

const THEORIES: [&str; 5] = ["p-bin", "p-GNST/p-box", "p-nonlocal", "quantum", "classical"];

fn claimed(values: [&str; 5]) -> Vec<Cell> {
    THEORIES.iter().zip(values).map(|(&theory, v)| Cell { theory, value: v.into(), source: "claimed" }).collect()
}

/// Best classical CHSH win probability over the 16 deterministic strategies.
fn classical_chsh() -> f64 {
    let mut best = 0.0f64;
    for a in 0..4u8 {
        for b in 0..4u8 {
            let wins = (0..2u8)
                .flat_map(|s| (0..2u8).map(move |t| (s, t)))
                .filter(|&(s, t)| ((a >> s) ^ (b >> t)) & 1 == s & t)
                .count();
            best = best.max(wins as f64 / 4.0);
        }
    }
    best
}

fn eta1_win(p: PNorm) -> Result<f64> {
    let (x, y): (PauliString, PauliString) = ("X".parse()?, "Y".parse()?);
    Ok(0.5 + chsh_value(&SharedState::Coeff(build_eta1(p)), [&x, &y], [&x, &y])? / 8.0)
}

fn gbit_win(p: PNorm) -> Result<f64> {
    let (x, z): (PauliString, PauliString) = ("X".parse()?, "Z".parse()?);
    Ok(0.5 + chsh_value(&SharedState::Gnst(pgnst_chsh_state(p)), [&x, &z], [&x, &z])? / 8.0)
}

fn yes_no(b: bool) -> Value {
    Value::from(if b { "yes" } else { "no" })
}

pub fn run_table1(p: PNorm) -> Result<Output> {
    let gbit = pgnst_chsh_state(p);
    let eta = build_eta1(p);
    let computed = |theory, value| Cell { theory, value, source: "computed" };
    let mut non_signaling = claimed(["yes"; 5]);
    non_signaling[1] = computed(THEORIES[1], yes_no(validate_gnst(&gbit.to_table()?).passed));
    let eta_uncertain = check_p_uncertainty(&eta, p, UncertaintyMode::Exhaustive)?.passed;
    let gbit_uncertain = check_p_uncertainty(&gbit, p, UncertaintyMode::Exhaustive)?.passed;
    let mut uncertainty = claimed(["yes", "yes", "yes", "p=2", "n/a"]);
    uncertainty[0] = computed(THEORIES[0], yes_no(eta_uncertain));
    uncertainty[1] = computed(THEORIES[1], yes_no(gbit_uncertain));
    uncertainty[2] = computed(THEORIES[2], yes_no(eta_uncertain));
    let chsh = vec![
        computed(THEORIES[0], eta1_win(p)?.into()),
        computed(THEORIES[1], gbit_win(p)?.into()),
        computed(THEORIES[2], eta1_win(p)?.into()),
        computed(THEORIES[3], eta1_win(PNorm::TWO)?.into()),
        computed(THEORIES[4], classical_chsh().into()),
    ];
    let rows = [
        ("non-signaling", non_signaling),
        ("satisfies p-uncertainty", uncertainty),
        ("simultaneous measurements", claimed(["no", "local", "commuting", "commuting", "all"])),
        ("CHSH win probability", chsh),
        ("RAC bits to encode N bits", claimed(["O(polylog(N))", "O(polylog(N))", "?", "Ω(N)", "Ω(N)"])),
        ("PIR from N bits", claimed(["O(polylog(N))", "O(polylog(N))", "?", "Ω(N)", "Ω(N)"])),
        ("learning states", claimed(["hard", "hard", "?", "easy", "easy"])),
    ];
    let mut table = Vec::new();
    let mut doc = Vec::new();
    for (property, cells) in rows {
        for c in &cells {
            table.push(vec![Value::from(property), Value::from(c.theory), c.value.clone(), Value::from(c.source)]);
        }
        doc.push(json!({ "property": property, "cells": cells }));
    }
    Ok(Output::new(&json!({ "p": p, "rows": doc }), true).with_table(&["property", "theory", "value", "source"], table))
}

/// `samples` (rounded up to a multiple of 4) points per `p`, so the axis
/// points are always included; each quadrant is the first one rotated.
pub fn psphere_points(p: PNorm, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 4 {
        return Err(domain("psphere needs at least 4 samples"));
    }
    let quarter = samples.div_ceil(4);
    let mut first = Vec::with_capacity(quarter);
    for i in 0..quarter {
        let t = FRAC_PI_2 * i as f64 / quarter as f64;
        let (c, s) = if i == 0 { (1.0, 0.0) } else { (t.cos(), t.sin()) };
        first.push(match p {
            PNorm::Finite(q) => (c.powf(2.0 / q), s.powf(2.0 / q)),
            PNorm::Infinity => (c / c.max(s), s / c.max(s)),
        });
    }
    let mut out = Vec::with_capacity(4 * quarter);
    for k in 0..4 {
        for &(x, y) in &first {
            out.push(match k {
                0 => (x, y),
                1 => (-y, x),
                2 => (-x, -y),
                _ => (y, -x),
            });
        }
    }
    Ok(out)
}

pub fn run_psphere(ps: &[PNorm], samples: usize) -> Result<Output> {
    let mut rows = Vec::new();
    let mut doc = Vec::new();
    for &p in ps {
        let pts = psphere_points(p, samples)?;
        for &(x, y) in &pts {
            rows.push(vec![json!(p), x.into(), y.into()]);
        }
        doc.push(json!({ "p": p, "points": pts }));
    }
    Ok(Output::new(&doc, true).with_table(&["p", "x", "y"], rows))
}

pub fn run_chsh(p: PNorm, tol: f64) -> Result<Output> {
    let win = chsh_win_probability(p);
    let eta = eta1_win(p)?;
    let gbit = gbit_win(p)?;
    let opt = p_tsirelson_optimize(p, 1e-12);
    let optimized = 0.5 + opt.value / 8.0;
    let passed = [eta, gbit, optimized].iter().all(|v| (v - win).abs() <= tol);
    let doc = json!({
        "p": p,
        "win_probability": win,
        "eta1": eta,
        "gbit_box": gbit,
        "optimized": optimized,
        "optimum": opt,
        "classical": classical_chsh(),
        "passed": passed,
    });
    Ok(Output::new(&doc, passed))
}

fn run_xor(cli: &Cli) -> Result<Output> {
    let p = p_or_default(cli);
    let game: XorGame = match &cli.file {
        Some(_) => serde_json::from_str(&require_file(cli)?)?,
        None => XorGame::chsh(),
    };
    let (state, strategy) = build_xor_game_state(&game, p)?;
    let value = xor_game_value(&game, &strategy)?;
    let passed = !p.is_infinite() || value >= 1.0 - cli.tol;
    let doc = json!({
        "p": p,
        "questions": game.questions(),
        "unique": game.is_unique(),
        "systems": state.num_systems(),
        "terms": state.len(),
        "value": value,
        "passed": passed,
    });
    Ok(Output::new(&doc, passed))
}

fn parse_bits(text: &str) -> Result<Vec<u8>> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("bit strings use 0 and 1, found '{other}'"))),
        })
        .collect()
}

fn code_length(theory: Theory, n: usize) -> Result<usize> {
    match theory {
        Theory::Gnst | Theory::PGnst => count_settings(n),
        Theory::PBin => Ok(pbin_strings(n, false)?.len()),
        Theory::PBox => Ok(pbin_strings(n, true)?.len()),
    }
}

enum Encoded {
    Gbit(GnstState),
    Coeff(crate::states::CoefficientState),
}

fn encode(theory: Theory, x: &[u8], n: usize, p: PNorm) -> Result<Encoded> {
    Ok(match theory {
        Theory::Gnst => Encoded::Gbit(rac_encode_gnst(x, n)?),
        Theory::PGnst => Encoded::Gbit(rac_encode_pgnst(x, n, p)?),
        Theory::PBin => Encoded::Coeff(rac_encode_pbin(x, n, p, false)?),
        Theory::PBox => Encoded::Coeff(rac_encode_pbin(x, n, p, true)?),
    })
}

fn run_rac_encode(cli: &Cli, theory: TheoryArg, bits: Option<&str>) -> Result<Output> {
    let theory = Theory::from(theory);
    let (n, p) = (cli.n.unwrap_or(1), p_or_default(cli));
    let len = code_length(theory, n)?;
    let x = match bits {
        Some(b) => parse_bits(b)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            (0..len).map(|_| rng.random_range(0..=1u8)).collect()
        }
    };
    let doc = match encode(theory, &x, n, p)? {
        Encoded::Gbit(s) => StateDocument::try_from(&s)?,
        Encoded::Coeff(s) => StateDocument::from(&s),
    };
    Ok(Output::new(&doc, true))
}

fn run_rac_decode(cli: &Cli, index: usize, restrict: bool) -> Result<Output> {
    let decoded = match StateDocument::parse(&require_file(cli)?)?.load()? {
        LoadedState::Coeff(s) => rac_decode_pbin(&s, index, restrict)?,
        LoadedState::Gnst(s) => rac_decode(&s, index, &IndexMap::identity(count_settings(s.num_systems())?))?,
        LoadedState::Table(t) => {
            let s = GnstState::try_from(t)?;
            rac_decode(&s, index, &IndexMap::identity(count_settings(s.num_systems())?))?
        }
    };
    Ok(Output::new(&json!({ "index": index, "decoded": decoded }), true))
}

#[derive(Serialize)]
struct IndexRecovery {
    index: usize,
    exact_q: f64,
    empirical_q: f64,
    trials: u64,
}

fn run_rac_verify(cli: &Cli, theory: TheoryArg) -> Result<Output> {
    let theory = Theory::from(theory);
    let (n, p) = (cli.n.unwrap_or(2), p_or_default(cli));
    if n == 0 || n > MAX_VERIFY_SYSTEMS {
        return Err(Error::Resource(format!("rac verify supports 1 <= n <= {MAX_VERIFY_SYSTEMS}")));
    }
    let trials = cli.trials.unwrap_or(DEFAULT_TRIALS);
    let len = code_length(theory, n)?;
    let expected = if theory == Theory::Gnst { 1.0 } else { recovery_probability(n, p) };
    let exhaustive = len <= MAX_EXHAUSTIVE_BITS;
    let strings: Vec<Vec<u8>> = if exhaustive {
        (0..1usize << len).map(|c| (0..len).map(|j| (c >> j & 1) as u8).collect()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        (0..SAMPLED_STRINGS).map(|_| (0..len).map(|_| rng.random_range(0..=1u8)).collect()).collect()
    };
    let states: Vec<Encoded> = strings.iter().map(|x| encode(theory, x, n, p)).collect::<Result<_>>()?;
    let identity = IndexMap::identity(len);
    let exact_of = |s: &Encoded, x: &[u8], j: usize| -> Result<f64> {
        Ok(match s {
            Encoded::Gbit(g) => rac_decode(g, j, &identity)?.probability_of(x[j]),
            Encoded::Coeff(c) => rac_decode_pbin(c, j, theory == Theory::PBox)?.probability_of(x[j]),
        })
    };
    // exact[i][j]: recovery of index j from string i
    let exact: Vec<Vec<f64>> = strings
        .par_iter()
        .zip(&states)
        .map(|(x, s)| (0..len).map(|j| exact_of(s, x, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let perfect = exact.iter().filter(|row| row.iter().all(|&q| q >= 1.0 - tol::EXACT)).count();
    let records: Vec<IndexRecovery> = (0..len)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            rng.set_stream(j as u64 + 1);
            let mut correct = 0u64;
            for _ in 0..trials {
                let i = rng.random_range(0..strings.len());
                let bit = match &states[i] {
                    Encoded::Gbit(g) => {
                        let setting = FiducialSetting::from_index(n, j)?;
                        u8::from(g.sample_outcome(&setting, &mut rng)?.product() < 0)
                    }
                    Encoded::Coeff(_) => {
                        let right = rng.random::<f64>() < exact[i][j];
                        if right {
                            strings[i][j]
                        } else {
                            1 - strings[i][j]
                        }
                    }
                };
                correct += u64::from(bit == strings[i][j]);
            }
            let exact_q = exact.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min);
            Ok(IndexRecovery { index: j, exact_q, empirical_q: correct as f64 / trials.max(1) as f64, trials })
        })
        .collect::<Result<_>>()?;
    let passed = records.iter().all(|r| r.exact_q >= expected - cli.tol)
        && (expected < 1.0 || records.iter().all(|r| r.empirical_q == 1.0));
    let rows =
        records.iter().map(|r| vec![r.index.into(), r.exact_q.into(), r.empirical_q.into(), r.trials.into()]).collect();
    let doc = json!({
        "theory": theory,
        "n": n,
        "p": p,
        "bits": len,
        "expected_q": expected,
        "exhaustive": exhaustive,
        "strings_checked": strings.len(),
        "perfect_strings": perfect,
        "indices": records,
        "passed": passed,
    });
    Ok(Output::new(&doc, passed).with_table(&["index", "exact_q", "empirical_q", "trials"], rows))
}

fn run_rac_params(n: usize, p: PNorm) -> Result<Output> {
    let mut codes = Vec::new();
    for theory in [Theory::Gnst, Theory::PGnst, Theory::PBin, Theory::PBox] {
        let params = RacParams::of(theory, n, p)?;
        let mut entry = Map::new();
        entry.insert("code".into(), serde_json::to_value(params)?);
        // fewest qubits any quantum code with the same N and q needs
        entry.insert("quantum_qubits_at_least".into(), nayak_bound(params.big_n, params.q)?.into());
        codes.push(Value::Object(entry));
    }
    let repetition = match p {
        PNorm::Finite(_) => serde_json::to_value(rac_repetition_params(n, p)?)?,
        PNorm::Infinity => Value::Null,
    };
    Ok(Output::new(&json!({ "n": n, "p": p, "codes": codes, "repetition": repetition }), true))
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..=1u8)).collect()
}

fn run_comm_ip(cli: &Cli, theory: TheoryArg) -> Result<Output> {
    let (n, p) = (cli.n.unwrap_or(4), p_or_default(cli));
    if n == 0 || n > MAX_IP_BITS {
        return Err(Error::Resource(format!("inner product runs for 1 <= n <= {MAX_IP_BITS}")));
    }
    let cost = ip_oneway_cost(n, p, theory.into())?;
    let trials = cli.trials.unwrap_or(DEFAULT_TRIALS);
    let exhaustive = (1u64 << (2 * n)) <= trials;
    let pairs: Vec<(Vec<u8>, Vec<u8>)> = if exhaustive {
        let bits = |c: usize| (0..n).map(|t| (c >> t & 1) as u8).collect::<Vec<u8>>();
        (0..1usize << n).flat_map(|a| (0..1usize << n).map(move |b| (bits(a), bits(b)))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        (0..trials).map(|_| (random_bits(n, &mut rng), random_bits(n, &mut rng))).collect()
    };
    let runs: Vec<(bool, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let run = simulate_ip_protocol(x, y, cli.seed.wrapping_add(i as u64))?;
            Ok((run.bit == inner_product(x, y), run.carriers))
        })
        .collect::<Result<_>>()?;
    let mismatches = runs.iter().filter(|r| !r.0).count();
    let carriers = runs.first().map_or(0, |r| r.1);
    let passed = mismatches == 0;
    let doc = json!({
        "cost": cost,
        "simulated_carriers": carriers,
        "pairs": pairs.len(),
        "exhaustive": exhaustive,
        "mismatches": mismatches,
        "passed": passed,
    });
    Ok(Output::new(&doc, passed))
}

fn run_pir(cli: &Cli, index: Option<usize>) -> Result<Output> {
    let (big_n, p) = (cli.n.unwrap_or(9), p_or_default(cli));
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let db = random_bits(big_n, &mut rng);
    let i = index.unwrap_or_else(|| rng.random_range(0..big_n.max(1)));
    let result = pir_simulate(&db, i, p, cli.trials.unwrap_or(DEFAULT_TRIALS), cli.seed)?;
    let passed = result.bit == db[i];
    let doc = json!({ "database": db, "index": i, "expected": db[i], "result": result, "passed": passed });
    Ok(Output::new(&doc, passed))
}

fn run_learn(n_hat: f64, p: PNorm, gamma: f64, eta: f64, epsilon: f64, delta: f64) -> Result<Output> {
    let threshold = learnability_threshold(n_hat, p, gamma, eta, epsilon, delta)?;
    let code = learning_code(n_hat, p, gamma)?;
    let fat = fat_shattering_lower_bound(&RacParams::of(Theory::PGnst, threshold.n, p)?)?;
    Ok(Output::new(&json!({ "threshold": threshold, "code": code, "fat_shattering": fat }), true))
}

fn run_validate(text: &str, p: PNorm) -> Result<Output> {
    let doc = match StateDocument::parse(text)?.load()? {
        LoadedState::Coeff(s) if s.num_systems() <= MAX_ENUMERATION_SYSTEMS => {
            let c = classify_state(&s, p)?;
            let passed = c.level > HierarchyLevel::Invalid;
            return Ok(Output::new(&json!({ "kind": "coeff", "p": p, "classification": c }), passed));
        }
        LoadedState::Coeff(s) => {
            let r = check_p_uncertainty(&s, p, UncertaintyMode::Exhaustive)?;
            let note = format!("the full hierarchy is classified for n <= {MAX_ENUMERATION_SYSTEMS}");
            (json!({ "kind": "coeff", "p": p, "reports": [r], "note": note }), r.passed)
        }
        LoadedState::Gnst(s) => {
            let r = vec![validate_gnst(&s.to_table()?), check_p_uncertainty(&s, p, UncertaintyMode::Exhaustive)?];
            let passed = r.iter().all(|r| r.passed);
            (json!({ "kind": "gnst", "p": p, "reports": r }), passed)
        }
        LoadedState::Table(t) => {
            let mut r = vec![validate_gnst(&t)];
            if r[0].passed {
                r.push(check_p_uncertainty(&GnstState::try_from(t)?, p, UncertaintyMode::Exhaustive)?);
            }
            let passed = r.iter().all(|r| r.passed);
            (json!({ "kind": "gnst-table", "p": p, "reports": r }), passed)
        }
    };
    Ok(Output::new(&doc.0, doc.1))
}
