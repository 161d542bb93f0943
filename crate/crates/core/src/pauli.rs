//! Exact symplectic algebra for strings of Paulis.
//!
//! A [`PauliString`] on `n` systems is stored as two bit masks (`x`, `z`) and
//! a phase exponent `k` mod 4, and denotes the operator `i^k * sigma(x, z)`,
//! where `sigma(x, z)` is the tensor product of the *Hermitian* single-system
//! Paulis: `I` for `(0,0)`, `X` for `(1,0)`, `Z` for `(0,1)` and `Y` for `(1,1)`.
//!
//! The bare product `X^a Z^b` used in the symplectic literature differs from
//! the Hermitian basis on every system carrying both bits, since `XZ = -iY`:
//!
//! ```text
//! X^a Z^b = i^(-|a & b|) sigma(a, b)      sigma(a, b) = i^(|a & b|) X^a Z^b
//! ```
//!
//! [`PauliString::from_xz_product`] and [`PauliString::xz_phase`] convert
//! between the two conventions. Bit `j` of each mask (and character `j` of the
//! text form) refers to system `j`; system 0 is the leftmost tensor factor.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Largest system count a [`PauliString`] can hold.
pub const MAX_SYSTEMS: usize = 64;

/// Largest system count accepted by [`enumerate_anticommuting_sets`].
pub const MAX_ENUMERATION_SYSTEMS: usize = 3;

/// Single-system Hermitian Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(x, z)` bits of the label.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// `i^phase * sigma(x, z)` on `n` systems.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn parity(v: u64) -> u32 {
    v.count_ones() & 1
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > MAX_SYSTEMS {
            return Err(domain(format!("system count must be in 1..={MAX_SYSTEMS}, got {n}")));
        }
        if (x | z) & !mask(n) != 0 {
            return Err(domain(format!("bit masks exceed {n} systems")));
        }
        Ok(PauliString { n, x, z, phase: phase % 4 })
    }

    /// The Hermitian basis element `sigma(x, z)`.
    pub fn hermitian(n: usize, x: u64, z: u64) -> Result<Self> {
        Self::new(n, x, z, 0)
    }

    /// The operator `X^a Z^b` (no Hermitian correction).
    pub fn from_xz_product(n: usize, a: u64, b: u64) -> Result<Self> {
        let k = (a & b).count_ones() as u8 % 4;
        Self::new(n, a, b, (4 - k) % 4)
    }

    /// `label` on system `system`, identity elsewhere.
    pub fn single(n: usize, system: usize, label: Pauli) -> Result<Self> {
        if system >= n {
            return Err(Error::IndexOutOfRange { index: system, len: n });
        }
        let (x, z) = label.bits();
        Self::new(n, (x as u64) << system, (z as u64) << system, 0)
    }

    pub fn from_labels(labels: &[Pauli]) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for (j, l) in labels.iter().enumerate() {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << j;
            z |= (bz as u64) << j;
        }
        Self::new(labels.len(), x, z, 0)
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Phase exponent relative to the Hermitian basis element.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Phase exponent relative to the bare product `X^a Z^b`.
    pub fn xz_phase(&self) -> u8 {
        ((self.phase as u32 + (self.x & self.z).count_ones()) % 4) as u8
    }

    /// `(x, z)` pair identifying the basis element regardless of phase.
    pub fn key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn label(&self, system: usize) -> Pauli {
        Pauli::from_bits(self.x >> system & 1 == 1, self.z >> system & 1 == 1)
    }

    pub fn labels(&self) -> Vec<Pauli> {
        (0..self.n).map(|j| self.label(j)).collect()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// True when the string is a multiple of the identity.
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian iff the phase is real (`+1` or `-1`).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `+1.0` or `-1.0` for Hermitian strings, `None` otherwise.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    /// The same basis element with phase `+1`.
    pub fn basis(&self) -> Self {
        PauliString { phase: 0, ..self.clone() }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        PauliString { phase: phase % 4, ..self.clone() }
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    /// `self ⊗ other`, with `other` occupying the trailing systems.
    pub fn tensor(&self, other: &PauliString) -> Result<Self> {
        let n = self.n + other.n;
        if n > MAX_SYSTEMS {
            return Err(domain(format!("tensor product exceeds {MAX_SYSTEMS} systems")));
        }
        Self::new(n, self.x | other.x << self.n, self.z | other.z << self.n, self.phase + other.phase)
    }

    /// Restriction to the systems `offset..offset + len`, phase dropped.
    pub fn restrict(&self, offset: usize, len: usize) -> Result<Self> {
        if offset + len > self.n {
            return Err(Error::Dimension { expected: self.n, found: offset + len });
        }
        Self::new(len, self.x >> offset & mask(len), self.z >> offset & mask(len), 0)
    }

    /// Label string without the phase tag, e.g. `XZY`.
    pub fn label_string(&self) -> String {
        (0..self.n).map(|j| self.label(j).symbol()).collect()
    }

    fn phase_tag(&self) -> &'static str {
        match self.phase {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.phase_tag(), self.label_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts `XZY`, `+1 XZY`, `-i XX`, `−1 Z` (unicode minus) and so on.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = match t.split_once(char::is_whitespace) {
            Some((tag, body)) => {
                let phase = match tag.replace('−', "-").as_str() {
                    "+1" | "1" => 0,
                    "+i" | "i" => 1,
                    "-1" => 2,
                    "-i" => 3,
                    other => return Err(Error::Parse(format!("unknown phase tag '{other}'"))),
                };
                (phase, body.trim())
            }
            None => (0, t),
        };
        let labels = body
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::Parse(format!("invalid Pauli symbol '{c}' in '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(Self::from_labels(&labels)?.with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.phase == 0 {
            serializer.serialize_str(&self.label_string())
        } else {
            serializer.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_same_size(p: &PauliString, q: &PauliString) -> Result<()> {
    if p.n != q.n {
        return Err(Error::Dimension { expected: p.n, found: q.n });
    }
    Ok(())
}

/// `f = a·b' + a'·b mod 2`: `0` when the strings commute, `1` when they anti-commute.
pub fn symplectic_form(p: &PauliString, q: &PauliString) -> Result<u8> {
    check_same_size(p, q)?;
    Ok(symplectic_bits(p.x, p.z, q.x, q.z) as u8)
}

#[inline]
pub(crate) fn symplectic_bits(x1: u64, z1: u64, x2: u64, z2: u64) -> bool {
    parity((x1 & z2) ^ (x2 & z1)) == 1
}

pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    Ok(symplectic_form(p, q)? == 0)
}

/// Exact product `p · q`, phase tracked mod 4.
pub fn pauli_product(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    check_same_size(p, q)?;
    let x = p.x ^ q.x;
    let z = p.z ^ q.z;
    let k = p.phase as u32
        + q.phase as u32
        + (p.x & p.z).count_ones()
        + (q.x & q.z).count_ones()
        + 2 * (p.z & q.x).count_ones()
        + 4 * 64
        - (x & z).count_ones();
    Ok(PauliString { n: p.n, x, z, phase: (k % 4) as u8 })
}

/// Mutually anti-commuting Pauli strings on a common system count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AntiCommutingSet {
    members: Vec<PauliString>,
}

impl AntiCommutingSet {
    pub fn new(members: Vec<PauliString>) -> Result<Self> {
        if let Some(first) = members.first() {
            let n = first.n;
            for (i, p) in members.iter().enumerate() {
                check_same_size(first, p)?;
                for q in &members[i + 1..] {
                    if symplectic_form(p, q)? != 1 {
                        return Err(domain(format!("{p} and {q} do not anti-commute")));
                    }
                }
            }
            if members.len() > 2 * n + 1 {
                return Err(domain(format!("{} anti-commuting strings on {n} systems", members.len())));
            }
        }
        Ok(AntiCommutingSet { members })
    }

    pub fn members(&self) -> &[PauliString] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Same members regardless of order and phase.
    pub fn same_basis_elements(&self, other: &AntiCommutingSet) -> bool {
        let mut a: Vec<_> = self.members.iter().map(PauliString::key).collect();
        let mut b: Vec<_> = other.members.iter().map(PauliString::key).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// The ladder construction of `2n + 1` anti-commuting observables, returned as
/// `[Γ_1, ..., Γ_2n, Γ_0]` with
/// `Γ_{2j-1} = Y^{⊗(j-1)} ⊗ X ⊗ I^{⊗(n-j)}`, `Γ_{2j} = Y^{⊗(j-1)} ⊗ Z ⊗ I^{⊗(n-j)}`.
///
/// `Γ_0` is the product `Γ_1 ⋯ Γ_{2n}` scaled by whichever of `1`, `i` makes it
/// Hermitian; the result is `±Y^{⊗n}`.
pub fn gamma_set(n: usize) -> Result<AntiCommutingSet> {
    if n == 0 || n > MAX_SYSTEMS {
        return Err(domain(format!("gamma_set needs 1 <= n <= {MAX_SYSTEMS}, got {n}")));
    }
    let mut members = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        let ys = mask(j);
        members.push(PauliString::new(n, ys | 1 << j, ys, 0)?);
        members.push(PauliString::new(n, ys, ys | 1 << j, 0)?);
    }
    let mut gamma0 = PauliString::identity(n);
    for g in &members {
        gamma0 = pauli_product(&gamma0, g)?;
    }
    if !gamma0.is_hermitian() {
        gamma0 = gamma0.with_phase(gamma0.phase + 1);
    }
    members.push(gamma0);
    AntiCommutingSet::new(members)
}

/// All non-identity Hermitian basis strings on `n` systems, ordered by the
/// integer `x | z << n`.
pub fn hermitian_basis(n: usize) -> Result<Vec<PauliString>> {
    if n == 0 || 2 * n > 63 {
        return Err(Error::Resource(format!("cannot list the 4^{n} basis strings")));
    }
    let m = mask(n);
    Ok((1u64..1 << (2 * n)).map(|v| PauliString { n, x: v & m, z: v >> n, phase: 0 }).collect())
}

/// Every maximal mutually anti-commuting set of Hermitian basis strings on
/// `n <= 3` systems (Bron–Kerbosch with pivoting over the anti-commutation graph).
pub fn enumerate_anticommuting_sets(n: usize) -> Result<Vec<AntiCommutingSet>> {
    if n == 0 || n > MAX_ENUMERATION_SYSTEMS {
        return Err(Error::Resource(format!(
            "exhaustive enumeration supports n <= {MAX_ENUMERATION_SYSTEMS} (got {n}); use randomized mode"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<AntiCommutingSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(sets) = cache.lock().expect("cache poisoned").get(&n) {
        return Ok(sets.clone());
    }

    let vertices = hermitian_basis(n)?;
    let adjacency = anticommutation_adjacency(&vertices);
    let all = if vertices.len() == 64 { u64::MAX } else { (1u64 << vertices.len()) - 1 };
    let mut cliques = Vec::new();
    bron_kerbosch(0, all, 0, &adjacency, &mut cliques);

    let sets = cliques
        .into_iter()
        .map(|c| AntiCommutingSet { members: bits_iter(c).map(|i| vertices[i].clone()).collect() })
        .collect::<Vec<_>>();
    cache.lock().expect("cache poisoned").insert(n, sets.clone());
    Ok(sets)
}

/// Adjacency masks of the anti-commutation graph over at most 64 strings.
pub(crate) fn anticommutation_adjacency(strings: &[PauliString]) -> Vec<u64> {
    assert!(strings.len() <= 64, "adjacency masks hold at most 64 vertices");
    strings
        .iter()
        .map(|p| {
            strings.iter().enumerate().fold(
                0u64,
                |acc, (j, q)| {
                    if symplectic_bits(p.x, p.z, q.x, q.z) {
                        acc | 1 << j
                    } else {
                        acc
                    }
                },
            )
        })
        .collect()
}

pub(crate) fn bits_iter(mut v: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if v == 0 {
            None
        } else {
            let i = v.trailing_zeros() as usize;
            v &= v - 1;
            Some(i)
        }
    })
}

fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, adj: &[u64], out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = bits_iter(p | x).max_by_key(|&u| (adj[u] & p).count_ones()).expect("nonempty");
    for v in bits_iter(p & !adj[pivot]) {
        bron_kerbosch(r | 1 << v, p & adj[v], x & adj[v], adj, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

/// Maximum of `sum weight[i]` over mutually anti-commuting subsets of
/// `strings` (at most 64). Returns the chosen indices and the total.
pub fn max_weight_anticommuting_subset(strings: &[PauliString], weights: &[f64]) -> (Vec<usize>, f64) {
    assert_eq!(strings.len(), weights.len());
    if strings.is_empty() {
        return (Vec::new(), 0.0);
    }
    let adj = anticommutation_adjacency(strings);
    let all = if strings.len() == 64 { u64::MAX } else { (1u64 << strings.len()) - 1 };
    let mut best = (0u64, f64::NEG_INFINITY);
    weighted_clique(0, 0.0, all, &adj, weights, &mut best);
    (bits_iter(best.0).collect(), best.1.max(0.0))
}

fn weighted_clique(r: u64, w: f64, p: u64, adj: &[u64], weights: &[f64], best: &mut (u64, f64)) {
    if w > best.1 {
        *best = (r, w);
    }
    let bound: f64 = bits_iter(p).map(|i| weights[i]).sum();
    if w + bound <= best.1 {
        return;
    }
    let mut p = p;
    while p != 0 {
        let bound: f64 = bits_iter(p).map(|i| weights[i]).sum();
        if w + bound <= best.1 {
            return;
        }
        let v = p.trailing_zeros() as usize;
        weighted_clique(r | 1 << v, w + weights[v], p & adj[v], adj, weights, best);
        p &= !(1 << v);
    }
}
