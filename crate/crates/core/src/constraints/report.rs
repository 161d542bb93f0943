use serde::Serialize;

use crate::pauli::PauliString;

/// Outcome of one constraint check. `passed` iff `margin >= -tolerance`;
/// negative margins are violations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub constraint: String,
    pub passed: bool,
    pub margin: f64,
    pub worst_set: Vec<PauliString>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ValidationReport>,
}

impl ValidationReport {
    pub fn new(constraint: impl Into<String>, margin: f64, tolerance: f64, worst_set: Vec<PauliString>) -> Self {
        ValidationReport {
            constraint: constraint.into(),
            passed: margin >= -tolerance,
            margin,
            worst_set,
            detail: None,
            children: Vec::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Conjunction of `children`; margin and worst set come from the child
    /// with the smallest margin among the failing ones (or overall).
    pub fn aggregate(constraint: impl Into<String>, children: Vec<ValidationReport>) -> Self {
        let passed = children.iter().all(|c| c.passed);
        let pick = children.iter().filter(|c| passed || !c.passed).min_by(|a, b| a.margin.total_cmp(&b.margin));
        let (margin, worst_set) = pick.map_or((0.0, Vec::new()), |c| (c.margin, c.worst_set.clone()));
        ValidationReport { constraint: constraint.into(), passed, margin, worst_set, detail: None, children }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_boundary() {
        assert!(ValidationReport::new("c", -1e-10, 1e-9, vec![]).passed);
        assert!(!ValidationReport::new("c", -1e-8, 1e-9, vec![]).passed);
    }

    #[test]
    fn aggregate_prefers_failures() {
        let a = ValidationReport::new("a", 0.5, 0.0, vec![]);
        let b = ValidationReport::new("b", -0.1, 0.0, vec!["X".parse().unwrap()]);
        let agg = ValidationReport::aggregate("all", vec![a, b]);
        assert!(!agg.passed);
        assert_eq!(agg.margin, -0.1);
        assert_eq!(agg.worst_set.len(), 1);
        let json = agg.to_json();
        assert!(json.contains("\"worst_set\""));
        assert!(json.contains("\"X\""));
    }
}
