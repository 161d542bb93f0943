use super::report::ValidationReport;
use crate::pauli::PauliString;
use crate::states::{FiducialSetting, GnstTable};
use crate::tol;

fn strings(settings: &[&FiducialSetting]) -> Vec<PauliString> {
    settings.iter().map(|k| k.pauli()).collect()
}

/// Normalization, positivity and no-signaling of a probability table. On
/// fiducial tables every measurement collection is a sub-collection of one
/// setting, so independence across overlapping collections reduces to the
/// no-signaling check over subsystems.
pub fn validate_gnst(table: &GnstTable) -> ValidationReport {
    let (dev, k) = table.normalization_deviation();
    let normalization = ValidationReport::new(
        "normalization",
        -dev,
        tol::PROBABILITY,
        if dev > tol::PROBABILITY { strings(&k.iter().collect::<Vec<_>>()) } else { Vec::new() },
    );

    let (min, k) = table.min_probability();
    let min = if min.is_finite() { min } else { 0.0 };
    let positivity = ValidationReport::new(
        "positivity",
        min,
        tol::PROBABILITY,
        if min < -tol::PROBABILITY { strings(&k.iter().collect::<Vec<_>>()) } else { Vec::new() },
    );

    let no_signaling = match table.signaling() {
        None => ValidationReport::new("no-signaling", 0.0, tol::PROBABILITY, Vec::new()),
        Some(v) => {
            let failed = v.deviation > tol::PROBABILITY;
            let report = ValidationReport::new(
                "no-signaling",
                -v.deviation,
                tol::PROBABILITY,
                if failed { strings(&[&v.settings.0, &v.settings.1]) } else { Vec::new() },
            );
            if failed {
                report.with_detail(format!(
                    "marginal on systems {:?} differs between settings {:?} and {:?}",
                    v.systems,
                    v.settings.0.labels(),
                    v.settings.1.labels()
                ))
            } else {
                report
            }
        }
    };

    ValidationReport::aggregate("gnst", vec![normalization, positivity, no_signaling])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::pr_box;

    fn setting(k: &[u8]) -> FiducialSetting {
        FiducialSetting::new(k.to_vec()).unwrap()
    }

    #[test]
    fn pr_box_passes() {
        let r = validate_gnst(&pr_box().to_table().unwrap());
        assert!(r.passed);
        assert_eq!(r.children.len(), 3);
    }

    #[test]
    fn short_column_fails_normalization() {
        let mut t = GnstTable::new(1).unwrap();
        t.insert(setting(&[1]), vec![0.5, 0.4]).unwrap();
        let r = validate_gnst(&t);
        assert!(!r.passed);
        assert!(!r.children[0].passed);
        assert!((r.children[0].margin + 0.1).abs() < 1e-12);
    }

    #[test]
    fn signaling_fixture_names_subsystem() {
        let mut t = GnstTable::new(2).unwrap();
        t.insert(setting(&[1, 1]), vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        t.insert(setting(&[1, 2]), vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        t.insert(setting(&[2, 2]), vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        let r = validate_gnst(&t);
        let ns = &r.children[2];
        assert!(!ns.passed);
        assert!(ns.detail.as_ref().unwrap().contains("[0]"));
        assert!(r.children[0].passed && r.children[1].passed);
    }
}
