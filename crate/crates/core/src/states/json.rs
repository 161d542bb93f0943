use serde::{Deserialize, Serialize};

use super::coeff::CoefficientState;
use super::fiducial::FiducialSetting;
use super::gnst::{GnstState, GnstTable};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub pauli: PauliString,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingRow {
    pub k: FiducialSetting,
    pub p: Vec<f64>,
}

/// On-disk form of every state representation, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StateDocument {
    #[serde(rename = "coeff")]
    Coeff { n: usize, terms: Vec<Term> },
    #[serde(rename = "gnst")]
    Gnst { n: usize, lambda: f64, signs: Vec<i8> },
    #[serde(rename = "gnst-table")]
    GnstTable { n: usize, settings: Vec<SettingRow> },
}

/// A parsed state document, validated as far as its kind allows. Tables are
/// kept raw so validators can report on broken ones.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedState {
    Coeff(CoefficientState),
    Gnst(GnstState),
    Table(GnstTable),
}

impl StateDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn load(self) -> Result<LoadedState> {
        match self {
            StateDocument::Coeff { n, terms } => {
                Ok(LoadedState::Coeff(CoefficientState::from_terms(n, terms.into_iter().map(|t| (t.pauli, t.coeff)))?))
            }
            StateDocument::Gnst { n, lambda, signs } => Ok(LoadedState::Gnst(GnstState::compact(n, lambda, signs)?)),
            StateDocument::GnstTable { n, settings } => {
                let mut t = GnstTable::new(n)?;
                for row in settings {
                    t.insert(row.k, row.p)?;
                }
                Ok(LoadedState::Table(t))
            }
        }
    }
}

impl From<&CoefficientState> for StateDocument {
    fn from(s: &CoefficientState) -> Self {
        StateDocument::Coeff {
            n: s.num_systems(),
            terms: s.terms().map(|(pauli, coeff)| Term { pauli, coeff }).collect(),
        }
    }
}

impl From<&GnstTable> for StateDocument {
    fn from(t: &GnstTable) -> Self {
        StateDocument::GnstTable {
            n: t.num_systems(),
            settings: t.iter().map(|(k, p)| SettingRow { k: k.clone(), p: p.to_vec() }).collect(),
        }
    }
}

impl TryFrom<&GnstState> for StateDocument {
    type Error = Error;

    fn try_from(s: &GnstState) -> Result<Self> {
        match s.compact_parts() {
            Some((lambda, signs)) => Ok(StateDocument::Gnst { n: s.num_systems(), lambda, signs: signs.to_vec() }),
            None => Ok(StateDocument::from(&s.to_table()?)),
        }
    }
}
