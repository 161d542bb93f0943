//! CHSH and XOR games over every state representation.
//!
//! A bipartite correlator `<A ⊗ B>` is the expectation of the tensor string
//! for coefficient states and the moment of the joint setting for gbit
//! states; Alice holds the leading systems.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pauli::{gamma_set, PauliString};
use crate::pnorm::PNorm;
use crate::states::{
    apply_clifford, expectation, tensor, CliffordCircuit, CoefficientState, FiducialSetting, Gate, GnstState, GnstTable,
};

/// `1/2 + 1/(2 · 2^{1/p})`; 1 at `p = inf`.
pub fn chsh_win_probability(p: PNorm) -> f64 {
    0.5 + 0.5 * p.root(0.5)
}

/// `CNOT (rho_p ⊗ |0><0|) CNOT†` with `rho_p = (I + 2^{-1/p}(X + Y))/2`:
/// `2^{-1/p}` on XX, XY, YX, `-2^{-1/p}` on YY and 1 on ZZ.
pub fn build_eta1(p: PNorm) -> CoefficientState {
    let c = p.root(0.5);
    let rho = CoefficientState::from_terms(1, [("X".parse().expect("label"), c), ("Y".parse().expect("label"), c)])
        .expect("valid single-system state");
    let zero = CoefficientState::from_terms(1, [("Z".parse().expect("label"), 1.0)]).expect("valid");
    let cnot = CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 0, target: 1 }]).expect("valid circuit");
    apply_clifford(&cnot, &tensor(&rho, &zero).expect("two systems")).expect("same size")
}

/// Source of bipartite correlators.
#[derive(Clone, Debug, PartialEq)]
pub enum SharedState {
    Coeff(CoefficientState),
    Gnst(GnstState),
}

impl SharedState {
    pub fn num_systems(&self) -> usize {
        match self {
            SharedState::Coeff(s) => s.num_systems(),
            SharedState::Gnst(s) => s.num_systems(),
        }
    }

    /// `<A ⊗ B>` with `A` on the leading `A.num_systems()` systems.
    pub fn correlation(&self, a: &PauliString, b: &PauliString) -> Result<f64> {
        for o in [a, b] {
            if !o.is_hermitian() {
                return Err(domain(format!("observable {o} does not square to the identity")));
            }
        }
        let n = a.num_systems() + b.num_systems();
        if n != self.num_systems() {
            return Err(Error::Dimension { expected: self.num_systems(), found: n });
        }
        let ab = a.tensor(b)?;
        match self {
            SharedState::Coeff(s) => expectation(s, &ab),
            SharedState::Gnst(s) => s.moment_of(&ab),
        }
    }
}

impl From<CoefficientState> for SharedState {
    fn from(s: CoefficientState) -> Self {
        SharedState::Coeff(s)
    }
}

impl From<GnstState> for SharedState {
    fn from(s: GnstState) -> Self {
        SharedState::Gnst(s)
    }
}

/// `<A1 B1> + <A1 B2> + <A2 B1> - <A2 B2>`; win probability is `1/2 + value/8`.
pub fn chsh_value(state: &SharedState, alice: [&PauliString; 2], bob: [&PauliString; 2]) -> Result<f64> {
    Ok(state.correlation(alice[0], bob[0])?
        + state.correlation(alice[0], bob[1])?
        + state.correlation(alice[1], bob[0])?
        - state.correlation(alice[1], bob[1])?)
}

/// Two gbits with `lambda = 2^{-1/p}` correlations on the X/Z settings (ZZ
/// anti-correlated) and uniform outcomes on every setting involving the
/// third fiducial measurement. At `p = inf` the X/Z block is the PR box.
pub fn pgnst_chsh_state(p: PNorm) -> GnstState {
    let lambda = p.root(0.5);
    let mut t = GnstTable::new(2).expect("two gbits");
    for k in FiducialSetting::all(2).expect("two gbits") {
        let probs = match k.labels() {
            [a, b] if *a != 3 && *b != 3 => {
                let sign = if *a == 2 && *b == 2 { -1.0 } else { 1.0 };
                // outcome index bit t set <=> system t reads -1
                (0..4usize)
                    .map(|i| {
                        let parity = if (i.count_ones() & 1) == 1 { -1.0 } else { 1.0 };
                        0.25 * (1.0 + sign * lambda * parity)
                    })
                    .collect()
            }
            _ => vec![0.25; 4],
        };
        t.insert(k, probs).expect("well-formed row");
    }
    GnstState::try_from(t).expect("no-signaling by construction")
}

/// Optimum of `2(x + y)` subject to `|x|^p + |y|^p <= 1`, with the
/// four-moment program it reduces to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TsirelsonResult {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// `(<M1>, <M2>, <M3>, <M4>) = (x, y, y, -x)`.
    pub moments: [f64; 4],
}

/// Objective `<M1> + <M2> + <M3> - <M4>` of the four-moment program.
pub fn four_moment_objective(m: [f64; 4]) -> f64 {
    m[0] + m[1] + m[2] - m[3]
}

/// The four pairwise constraints over anti-commuting pairs
/// `{M1,M2}, {M1,M3}, {M2,M4}, {M3,M4}`, each `|a|^p + |b|^p <= 1`.
pub fn four_moment_feasible(m: [f64; 4], p: PNorm, tol: f64) -> bool {
    [(0, 1), (0, 2), (1, 3), (2, 3)].iter().all(|&(i, j)| p.power_sum([m[i], m[j]]) <= 1.0 + tol)
}

/// Golden-section search over `theta` in `[0, pi/2]` with
/// `(x, y) = (cos^{2/p}, sin^{2/p})`, which traces `|x|^p + |y|^p = 1`.
pub fn p_tsirelson_optimize(p: PNorm, tol: f64) -> TsirelsonResult {
    let finish = |x: f64, y: f64| TsirelsonResult { x, y, value: 2.0 * (x + y), moments: [x, y, y, -x] };
    let q = match p {
        PNorm::Infinity => return finish(1.0, 1.0),
        PNorm::Finite(q) => q,
    };
    let point = |t: f64| (t.cos().abs().powf(2.0 / q), t.sin().abs().powf(2.0 / q));
    let f = |t: f64| {
        let (x, y) = point(t);
        x + y
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, std::f64::consts::FRAC_PI_2);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol.max(1e-15) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let (x, y) = point((a + b) / 2.0);
    finish(x, y)
}

/// The quantum program (`p = 2`): optimum `2√2` at `x = y = 1/√2`.
pub fn tsirelson_optimize(tol: f64) -> TsirelsonResult {
    p_tsirelson_optimize(PNorm::TWO, tol)
}

/// Winning answers `c = a xor b` for one question pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predicate {
    /// Exactly this XOR wins.
    Unique(u8),
    /// `[V(0|s,t), V(1|s,t)]`.
    Table([u8; 2]),
}

impl Predicate {
    pub fn wins(&self, c: u8) -> bool {
        match *self {
            Predicate::Unique(w) => w == c,
            Predicate::Table(v) => v[c as usize] == 1,
        }
    }

    /// The single winning XOR, if exactly one wins.
    pub fn unique_answer(&self) -> Option<u8> {
        match (self.wins(0), self.wins(1)) {
            (true, false) => Some(0),
            (false, true) => Some(1),
            _ => None,
        }
    }
}

/// A two-player XOR game with `S` and `T` questions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "XorGameDoc", into = "XorGameDoc")]
pub struct XorGame {
    s: usize,
    t: usize,
    pi: Vec<Vec<f64>>,
    v: Vec<Vec<Predicate>>,
}

#[derive(Serialize, Deserialize)]
struct XorGameDoc {
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "T")]
    t: usize,
    pi: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    v: Vec<Vec<Predicate>>,
}

impl TryFrom<XorGameDoc> for XorGame {
    type Error = Error;

    fn try_from(d: XorGameDoc) -> Result<Self> {
        let g = XorGame::new(d.pi, d.v)?;
        if g.s != d.s || g.t != d.t {
            return Err(domain(format!("declared {}x{} questions but tables are {}x{}", d.s, d.t, g.s, g.t)));
        }
        Ok(g)
    }
}

impl From<XorGame> for XorGameDoc {
    fn from(g: XorGame) -> Self {
        XorGameDoc { s: g.s, t: g.t, pi: g.pi, v: g.v }
    }
}

impl XorGame {
    pub fn new(pi: Vec<Vec<f64>>, v: Vec<Vec<Predicate>>) -> Result<Self> {
        let s = pi.len();
        let t = pi.first().map_or(0, Vec::len);
        if s == 0 || t == 0 {
            return Err(domain("a game needs at least one question per player"));
        }
        if pi.iter().any(|r| r.len() != t) || v.len() != s || v.iter().any(|r| r.len() != t) {
            return Err(domain("pi and V must both be S x T"));
        }
        if pi.iter().flatten().any(|&x| !(x >= 0.0)) {
            return Err(domain("question probabilities must be non-negative"));
        }
        let total: f64 = pi.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("question distribution sums to {total}")));
        }
        for p in v.iter().flatten() {
            let ok = match *p {
                Predicate::Unique(c) => c <= 1,
                Predicate::Table(t) => t.iter().all(|&b| b <= 1),
            };
            if !ok {
                return Err(domain("predicate entries must be 0 or 1"));
            }
        }
        Ok(XorGame { s, t, pi, v })
    }

    /// Uniform questions with winning XOR `c[s][t]`.
    pub fn uniform_unique(c: Vec<Vec<u8>>) -> Result<Self> {
        let s = c.len();
        let t = c.first().map_or(0, Vec::len);
        let w = 1.0 / (s * t).max(1) as f64;
        let v = c.into_iter().map(|r| r.into_iter().map(Predicate::Unique).collect()).collect();
        XorGame::new(vec![vec![w; t]; s], v)
    }

    /// CHSH: the answers must satisfy `a xor b = s · t`.
    pub fn chsh() -> Self {
        XorGame::uniform_unique(vec![vec![0, 0], vec![0, 1]]).expect("valid game")
    }

    pub fn questions(&self) -> (usize, usize) {
        (self.s, self.t)
    }

    pub fn pi(&self, s: usize, t: usize) -> f64 {
        self.pi[s][t]
    }

    pub fn predicate(&self, s: usize, t: usize) -> Predicate {
        self.v[s][t]
    }

    pub fn is_unique(&self) -> bool {
        self.v.iter().flatten().all(|p| p.unique_answer().is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("games serialize")
    }
}

/// Per-question observables for both players and the shared state.
#[derive(Clone, Debug, PartialEq)]
pub struct XorStrategy {
    pub alice: Vec<PauliString>,
    pub bob: Vec<PauliString>,
    pub state: SharedState,
}

impl XorStrategy {
    pub fn new(alice: Vec<PauliString>, bob: Vec<PauliString>, state: SharedState) -> Result<Self> {
        for o in alice.iter().chain(&bob) {
            if !o.is_hermitian() {
                return Err(domain(format!("observable {o} does not square to the identity")));
            }
        }
        Ok(XorStrategy { alice, bob, state })
    }

    /// The PR box answering X on question 0 and Z on question 1.
    pub fn pr_box() -> Self {
        let obs: Vec<PauliString> = vec!["X".parse().expect("label"), "Z".parse().expect("label")];
        XorStrategy { alice: obs.clone(), bob: obs, state: crate::states::pr_box().into() }
    }

    /// `eta_1` with `A_0 = B_0 = X`, `A_1 = B_1 = Y`.
    pub fn eta1(p: PNorm) -> Self {
        let obs: Vec<PauliString> = vec!["X".parse().expect("label"), "Y".parse().expect("label")];
        XorStrategy { alice: obs.clone(), bob: obs, state: build_eta1(p).into() }
    }
}

/// The correlation coefficient used for every question pair of
/// [`build_xor_game_state`]: `1` at `p = inf`, `k^{-1/p}` otherwise.
/// Feasible, not proven optimal for finite `p`.
pub fn xor_correlation_scale(k: usize, p: PNorm) -> f64 {
    p.root(1.0 / k as f64)
}

/// `(I + sum_st v_st Γ_s ⊗ Γ_t)/d` over `gamma_set(ceil(k/2))` on each side,
/// `k = max(S, T)`, with `v_st = (-1)^{c_st} k^{-1/p}` (0 where the winning
/// XOR is not unique at finite `p`).
pub fn build_xor_game_state(game: &XorGame, p: PNorm) -> Result<(CoefficientState, XorStrategy)> {
    if p.is_infinite() && !game.is_unique() {
        return Err(domain("certain wins need a unique game at p = inf"));
    }
    let (s_count, t_count) = game.questions();
    let k = s_count.max(t_count);
    let m = k.div_ceil(2);
    let gammas = gamma_set(m)?;
    let g = gammas.members();
    let scale = xor_correlation_scale(k, p);
    let mut terms = Vec::new();
    for s in 0..s_count {
        for t in 0..t_count {
            if let Some(c) = game.predicate(s, t).unique_answer() {
                let v = if c == 0 { scale } else { -scale };
                terms.push((g[s].tensor(&g[t])?, v));
            }
        }
    }
    let state = CoefficientState::from_terms(2 * m, terms)?;
    let strategy =
        XorStrategy { alice: g[..s_count].to_vec(), bob: g[..t_count].to_vec(), state: state.clone().into() };
    Ok((state, strategy))
}

/// `sum_st pi(s,t) sum_c V(c|s,t) p(c|s,t)` with
/// `p(c|s,t) = (1 + (-1)^c <A_s ⊗ B_t>)/2`.
pub fn xor_game_value(game: &XorGame, strategy: &XorStrategy) -> Result<f64> {
    let (s_count, t_count) = game.questions();
    if strategy.alice.len() < s_count || strategy.bob.len() < t_count {
        return Err(domain(format!(
            "strategy has {}x{} observables for a {s_count}x{t_count} game",
            strategy.alice.len(),
            strategy.bob.len()
        )));
    }
    let mut value = 0.0;
    for s in 0..s_count {
        for t in 0..t_count {
            let corr = strategy.state.correlation(&strategy.alice[s], &strategy.bob[t])?;
            let pred = game.predicate(s, t);
            let win: f64 = [0u8, 1]
                .iter()
                .filter(|&&c| pred.wins(c))
                .map(|&c| 0.5 * (1.0 + if c == 0 { corr } else { -corr }))
                .sum();
            value += game.pi(s, t) * win;
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn eta1_coefficients() {
        let e = build_eta1(PNorm::TWO);
        let c = std::f64::consts::FRAC_1_SQRT_2;
        for (s, v) in [("XX", c), ("XY", c), ("YX", c), ("YY", -c), ("ZZ", 1.0)] {
            assert!((expectation(&e, &ps(s)).unwrap() - v).abs() < 1e-15);
        }
    }

    #[test]
    fn chsh_values() {
        let pr = SharedState::from(crate::states::pr_box());
        let (x, z) = (ps("X"), ps("Z"));
        assert_eq!(chsh_value(&pr, [&x, &z], [&x, &z]).unwrap(), 4.0);
        let mixed = SharedState::from(CoefficientState::maximally_mixed(2).unwrap());
        assert_eq!(chsh_value(&mixed, [&x, &z], [&x, &z]).unwrap(), 0.0);
        assert_eq!(chsh_win_probability(PNorm::Finite(1.0)), 0.75);
        assert_eq!(chsh_win_probability(PNorm::Infinity), 1.0);
    }

    #[test]
    fn pgnst_chsh_table() {
        let s = pgnst_chsh_state(PNorm::Infinity);
        let pr = crate::states::pr_box();
        for k in pr.settings() {
            assert_eq!(s.probabilities(&k).unwrap(), pr.probabilities(&k).unwrap());
        }
        let s = pgnst_chsh_state(PNorm::Finite(1.0));
        let (x, z) = (ps("X"), ps("Z"));
        let v = chsh_value(&s.into(), [&x, &z], [&x, &z]).unwrap();
        assert!((0.5 + v / 8.0 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tsirelson() {
        let r = tsirelson_optimize(1e-9);
        assert!((r.value - 2.0 * 2f64.sqrt()).abs() < 1e-8);
        assert!(r.x * r.x + r.y * r.y <= 1.0 + 1e-12);
        assert!(four_moment_feasible(r.moments, PNorm::TWO, 1e-12));
        assert!((four_moment_objective(r.moments) - r.value).abs() < 1e-15);
        let r = p_tsirelson_optimize(PNorm::Finite(3.0), 1e-9);
        assert!((r.value - 4.0 * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-8);
    }

    #[test]
    fn xor_game_json_round_trip() {
        let text = r#"{"S":2,"T":2,"pi":[[0.25,0.25],[0.25,0.25]],"V":[[0,0],[0,[0,1]]]}"#;
        let g: XorGame = serde_json::from_str(text).unwrap();
        assert!(g.is_unique());
        let back: XorGame = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<XorGame>(r#"{"S":1,"T":1,"pi":[[0.5]],"V":[[0]]}"#).is_err());
    }

    #[test]
    fn strategies_on_chsh() {
        let g = XorGame::chsh();
        assert_eq!(xor_game_value(&g, &XorStrategy::pr_box()).unwrap(), 1.0);
        let q = xor_game_value(&g, &XorStrategy::eta1(PNorm::TWO)).unwrap();
        assert!((q - chsh_win_probability(PNorm::TWO)).abs() < 1e-12);
        let (_, st) = build_xor_game_state(&g, PNorm::TWO).unwrap();
        let v = xor_game_value(&g, &st).unwrap();
        assert!((v - chsh_win_probability(PNorm::TWO)).abs() < 1e-12);
    }

    #[test]
    fn non_unique_game_at_infinity_is_rejected() {
        let v = vec![vec![Predicate::Table([1, 1])]];
        let g = XorGame::new(vec![vec![1.0]], v).unwrap();
        assert!(build_xor_game_state(&g, PNorm::Infinity).is_err());
        let (_, st) = build_xor_game_state(&g, PNorm::TWO).unwrap();
        assert_eq!(xor_game_value(&g, &st).unwrap(), 1.0);
    }
}
