use std::fmt;

use rand::Rng;

use super::coeff::CoefficientState;
use crate::error::{domain, Error, Result};
use crate::pauli::{pauli_product, PauliString};

/// The allowed gate set. Conjugation by any of these maps basis strings to
/// signed basis strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    I(usize),
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// Parses a gate name (`I`, `X`, `Y`, `Z`, `H`, `CNOT`) with its targets.
    pub fn from_name(name: &str, targets: &[usize]) -> Result<Self> {
        let one = || match targets {
            [t] => Ok(*t),
            _ => Err(domain(format!("gate {name} takes one target, got {}", targets.len()))),
        };
        match name.to_ascii_uppercase().as_str() {
            "I" => Ok(Gate::I(one()?)),
            "X" => Ok(Gate::X(one()?)),
            "Y" => Ok(Gate::Y(one()?)),
            "Z" => Ok(Gate::Z(one()?)),
            "H" => Ok(Gate::H(one()?)),
            "CNOT" | "CX" => match targets {
                [c, t] => Ok(Gate::Cnot { control: *c, target: *t }),
                _ => Err(domain(format!("CNOT takes two targets, got {}", targets.len()))),
            },
            other => Err(domain(format!("unsupported gate '{other}'"))),
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            Gate::I(t) | Gate::X(t) | Gate::Y(t) | Gate::Z(t) | Gate::H(t) => t,
            Gate::Cnot { control, target } => control.max(target),
        }
    }

    /// Image of `X_j` (`z = false`) or `Z_j` (`z = true`) under `G · G†`.
    fn image(&self, n: usize, j: usize, z: bool) -> PauliString {
        let bit = 1u64 << j;
        let xj = PauliString::new(n, bit, 0, 0).expect("in range");
        let zj = PauliString::new(n, 0, bit, 0).expect("in range");
        let plain = if z { zj.clone() } else { xj.clone() };
        match *self {
            Gate::I(_) => plain,
            Gate::H(t) if t == j => {
                if z {
                    xj
                } else {
                    zj
                }
            }
            Gate::X(t) if t == j && z => plain.negated(),
            Gate::Z(t) if t == j && !z => plain.negated(),
            Gate::Y(t) if t == j => plain.negated(),
            Gate::Cnot { control, target } => {
                let (c, t) = (1u64 << control, 1u64 << target);
                match (j == control, j == target, z) {
                    (true, _, false) => PauliString::new(n, c | t, 0, 0).expect("in range"),
                    (_, true, true) => PauliString::new(n, 0, c | t, 0).expect("in range"),
                    _ => plain,
                }
            }
            _ => plain,
        }
    }

    /// `G P G†`.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let n = p.num_systems();
        // i^k sigma(a,b) = i^(k + |a&b|) prod_j X_j^{a_j} Z_j^{b_j}
        let mut r = PauliString::identity(n).with_phase(p.xz_phase());
        for j in 0..n {
            if p.x_bits() >> j & 1 == 1 {
                r = pauli_product(&r, &self.image(n, j, false)).expect("same size");
            }
            if p.z_bits() >> j & 1 == 1 {
                r = pauli_product(&r, &self.image(n, j, true)).expect("same size");
            }
        }
        r
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::I(t) => write!(f, "I({t})"),
            Gate::X(t) => write!(f, "X({t})"),
            Gate::Y(t) => write!(f, "Y({t})"),
            Gate::Z(t) => write!(f, "Z({t})"),
            Gate::H(t) => write!(f, "H({t})"),
            Gate::Cnot { control, target } => write!(f, "CNOT({control},{target})"),
        }
    }
}

/// A gate sequence on `n` systems, applied first to last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        CliffordCircuit { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_index() >= self.n {
            return Err(Error::IndexOutOfRange { index: gate.max_index(), len: self.n });
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(domain("CNOT needs distinct control and target"));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_systems(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// `U P U†` with `U = G_last ⋯ G_first`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_systems() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.num_systems() });
        }
        Ok(self.gates.iter().fold(p.clone(), |acc, g| g.conjugate(&acc)))
    }
}

/// A random gate sequence of length `depth` (Hadamards drawn twice as often).
pub fn random_circuit<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> CliffordCircuit {
    let mut c = CliffordCircuit::new(n);
    for _ in 0..depth {
        let t = rng.random_range(0..n);
        let g = match rng.random_range(0..if n > 1 { 6 } else { 5 }) {
            0 => Gate::H(t),
            1 => Gate::X(t),
            2 => Gate::Y(t),
            3 => Gate::Z(t),
            4 => Gate::H(t),
            _ => {
                let other = (t + rng.random_range(1..n)) % n;
                Gate::Cnot { control: t, target: other }
            }
        };
        c.push(g).expect("indices drawn in range");
    }
    c
}

/// `U rho U†`: each coefficient moves to the signed image of its string.
pub fn apply_clifford(circuit: &CliffordCircuit, state: &CoefficientState) -> Result<CoefficientState> {
    if circuit.n != state.num_systems() {
        return Err(Error::Dimension { expected: circuit.n, found: state.num_systems() });
    }
    let terms = state.terms().map(|(s, c)| Ok((circuit.conjugate(&s)?, c))).collect::<Result<Vec<_>>>()?;
    CoefficientState::from_terms(state.num_systems(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::coeff::{expectation, tensor};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_swaps_x_and_z_and_negates_y() {
        let h = CliffordCircuit::from_gates(1, vec![Gate::H(0)]).unwrap();
        assert_eq!(h.conjugate(&ps("X")).unwrap(), ps("Z"));
        assert_eq!(h.conjugate(&ps("Z")).unwrap(), ps("X"));
        assert_eq!(h.conjugate(&ps("Y")).unwrap(), ps("-1 Y"));
    }

    #[test]
    fn pauli_gates_flip_anticommuting_strings() {
        let cases = [
            (Gate::X(0), ["+1 X", "-1 Y", "-1 Z"]),
            (Gate::Y(0), ["-1 X", "+1 Y", "-1 Z"]),
            (Gate::Z(0), ["-1 X", "-1 Y", "+1 Z"]),
        ];
        for (g, images) in cases {
            for (p, img) in ["X", "Y", "Z"].iter().zip(images) {
                assert_eq!(g.conjugate(&ps(p)), ps(img), "{g} on {p}");
            }
        }
    }

    #[test]
    fn cnot_images() {
        let g = Gate::Cnot { control: 0, target: 1 };
        assert_eq!(g.conjugate(&ps("XI")), ps("XX"));
        assert_eq!(g.conjugate(&ps("IZ")), ps("ZZ"));
        assert_eq!(g.conjugate(&ps("ZI")), ps("ZI"));
        assert_eq!(g.conjugate(&ps("IX")), ps("IX"));
        assert_eq!(g.conjugate(&ps("YI")), ps("YX"));
        assert_eq!(g.conjugate(&ps("YZ")), ps("XY"));
        assert_eq!(g.conjugate(&ps("XZ")), ps("-1 YY"));
    }

    #[test]
    fn unsupported_gate_is_rejected() {
        assert!(Gate::from_name("T", &[0]).is_err());
        assert!(Gate::from_name("CNOT", &[0]).is_err());
        assert!(CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 1, target: 1 }]).is_err());
        assert_eq!(Gate::from_name("cnot", &[0, 1]).unwrap(), Gate::Cnot { control: 0, target: 1 });
    }

    #[test]
    fn cnot_on_rho_p_gives_eta1() {
        let c = 2f64.powf(-1.0 / 3.0);
        let rho = CoefficientState::from_terms(1, [(ps("X"), c), (ps("Y"), c)]).unwrap();
        let zero = CoefficientState::from_terms(1, [(ps("Z"), 1.0)]).unwrap();
        let circuit = CliffordCircuit::from_gates(2, vec![Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let eta = apply_clifford(&circuit, &tensor(&rho, &zero).unwrap()).unwrap();
        for (s, v) in [("XX", c), ("XY", c), ("YX", c), ("YY", -c), ("ZZ", 1.0)] {
            assert!((expectation(&eta, &ps(s)).unwrap() - v).abs() < 1e-15, "{s}");
        }
        assert_eq!(eta.len(), 5);
    }

    #[test]
    fn identity_circuit_is_trivial() {
        let s = CoefficientState::from_terms(2, [(ps("XY"), 0.3), (ps("ZI"), -0.2)]).unwrap();
        let c = CliffordCircuit::from_gates(2, vec![Gate::I(0), Gate::I(1)]).unwrap();
        assert_eq!(apply_clifford(&c, &s).unwrap(), s);
    }
}
