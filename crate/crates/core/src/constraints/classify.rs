use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::psd::{check_psd, moment_matrix_from_state};
use super::report::ValidationReport;
use super::uncertainty::{check_p_uncertainty, UncertaintyMode};
use crate::error::{Error, Result};
use crate::oracle::{dense_state, hermitian_eigenvalues};
use crate::pauli::{commutes, hermitian_basis, PauliString, MAX_ENUMERATION_SYSTEMS};
use crate::pnorm::PNorm;
use crate::states::CoefficientState;
use crate::tol;

/// Levels of the hierarchy, weakest first. Each level implies all lower ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HierarchyLevel {
    Invalid,
    PBin,
    PBox,
    PNonlocal,
    QuantumConsistent,
}

impl fmt::Display for HierarchyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HierarchyLevel::Invalid => "invalid",
            HierarchyLevel::PBin => "p-bin",
            HierarchyLevel::PBox => "p-box",
            HierarchyLevel::PNonlocal => "p-nonlocal",
            HierarchyLevel::QuantumConsistent => "quantum-consistent",
        })
    }
}

/// The strongest level reached plus one report per check, in chain order
/// (uncertainty, E_L, E_C, dense PSD). Every check runs even after a failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub level: HierarchyLevel,
    pub reports: Vec<ValidationReport>,
}

/// One single-system Pauli per system: `3^n` sets. Measurements on disjoint
/// blocks are products of these, so their moment matrices are principal
/// submatrices of the ones checked here.
pub fn local_measurement_sets(n: usize) -> Result<Vec<Vec<PauliString>>> {
    if n == 0 || n > MAX_ENUMERATION_SYSTEMS {
        return Err(Error::Resource(format!("local sets are listed for 1 <= n <= {MAX_ENUMERATION_SYSTEMS}")));
    }
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut set = Vec::with_capacity(n);
        for j in 0..n {
            let (x, z) = match c % 3 {
                0 => (1u64 << j, 0),
                1 => (0, 1u64 << j),
                _ => (1u64 << j, 1u64 << j),
            };
            c /= 3;
            set.push(PauliString::hermitian(n, x, z)?);
        }
        out.push(set);
    }
    Ok(out)
}

/// Independent generators of every maximal commuting subgroup (`n`
/// generators each; 3, 15 and 135 groups for `n = 1, 2, 3`). Any commuting
/// set generates a subgroup of one of these, and its moment matrix is a
/// signed compression of the generator matrix.
pub fn maximal_commuting_sets(n: usize) -> Result<Vec<Vec<PauliString>>> {
    if n == 0 || n > MAX_ENUMERATION_SYSTEMS {
        return Err(Error::Resource(format!("commuting sets are listed for 1 <= n <= {MAX_ENUMERATION_SYSTEMS}")));
    }
    let basis = hermitian_basis(n)?;
    let mut seen: BTreeSet<Vec<(u64, u64)>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<PauliString>, Vec<(u64, u64)>)> = vec![(Vec::new(), vec![(0, 0)])];
    while let Some((gens, span)) = stack.pop() {
        if gens.len() == n {
            let mut key = span.clone();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(gens);
            }
            continue;
        }
        for g in &basis {
            if span.contains(&g.key()) || !gens.iter().all(|h| commutes(h, g).expect("same size")) {
                continue;
            }
            // only extend with the smallest new element to limit duplicates
            if gens.last().is_some_and(|last| g.key() < last.key()) {
                continue;
            }
            let mut next_span = span.clone();
            next_span.extend(span.iter().map(|&(x, z)| (x ^ g.x_bits(), z ^ g.z_bits())));
            let mut next_gens = gens.clone();
            next_gens.push(g.clone());
            stack.push((next_gens, next_span));
        }
    }
    Ok(out)
}

fn worst_psd(name: &str, sets: &[Vec<PauliString>], state: &CoefficientState) -> Result<ValidationReport> {
    let mut worst: Option<ValidationReport> = None;
    for c in sets {
        let r = check_psd(&moment_matrix_from_state(c, state, false)?, tol::PSD)?;
        if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
            worst = Some(ValidationReport { worst_set: c.clone(), ..r });
        }
    }
    let w = worst.expect("at least one set");
    let worst_set = if w.passed { Vec::new() } else { w.worst_set };
    Ok(ValidationReport::new(name, w.margin, tol::PSD, worst_set).with_detail(format!("{} sets checked", sets.len())))
}

/// Worst moment-matrix eigenvalue over measurements on distinct systems
/// (the p-box condition); `n <= 3`.
pub fn check_local_moments(state: &CoefficientState) -> Result<ValidationReport> {
    worst_psd("moment-psd-local", &local_measurement_sets(state.num_systems())?, state)
}

/// Worst moment-matrix eigenvalue over all commuting sets (the p-nonlocal
/// condition); `n <= 3`.
pub fn check_commuting_moments(state: &CoefficientState) -> Result<ValidationReport> {
    worst_psd("moment-psd-commuting", &maximal_commuting_sets(state.num_systems())?, state)
}

/// Smallest eigenvalue of `2^n rho` (the dense realization); `n <= 6`.
pub fn check_density_psd(state: &CoefficientState) -> Result<ValidationReport> {
    let n = state.num_systems();
    let min_eig = hermitian_eigenvalues(&dense_state(state)?)?[0];
    Ok(ValidationReport::new("density-psd", min_eig * (1u64 << n) as f64, tol::PSD, Vec::new()))
}

/// Places `state` in the hierarchy at parameter `p` (exhaustive; `n <= 3`).
pub fn classify_state(state: &CoefficientState, p: PNorm) -> Result<Classification> {
    let n = state.num_systems();
    if n > MAX_ENUMERATION_SYSTEMS {
        return Err(Error::Resource(format!(
            "classification is exhaustive and supports n <= {MAX_ENUMERATION_SYSTEMS}"
        )));
    }
    let uncertainty = check_p_uncertainty(state, p, UncertaintyMode::Exhaustive)?;
    let reports =
        vec![uncertainty, check_local_moments(state)?, check_commuting_moments(state)?, check_density_psd(state)?];
    let levels =
        [HierarchyLevel::PBin, HierarchyLevel::PBox, HierarchyLevel::PNonlocal, HierarchyLevel::QuantumConsistent];
    let level =
        reports.iter().zip(levels).take_while(|(r, _)| r.passed).last().map_or(HierarchyLevel::Invalid, |(_, l)| l);
    Ok(Classification { level, reports })
}
