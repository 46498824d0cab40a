//! Distance cases and the source/device power split under a total-power
//! budget.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Devices midway between source and end device.
    CaseI,
    /// Devices close to the end device.
    CaseII,
    /// Devices close to the source.
    CaseIII,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::CaseI, CaseId::CaseII, CaseId::CaseIII];

    pub fn number(self) -> u8 {
        match self {
            Self::CaseI => 1,
            Self::CaseII => 2,
            Self::CaseIII => 3,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "i" | "case1" | "casei" => Ok(Self::CaseI),
            "2" | "ii" | "case2" | "caseii" => Ok(Self::CaseII),
            "3" | "iii" | "case3" | "caseiii" => Ok(Self::CaseIII),
            other => Err(Error::Parameter(format!("unknown distance case '{other}'"))),
        }
    }
}

/// A distance case with its source-device and device-end-device link
/// variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceCase {
    case_id: CaseId,
    sigma_sd_sq: f64,
    sigma_de_sq: f64,
}

impl DistanceCase {
    pub fn new(case_id: CaseId, sigma_sd_sq: f64, sigma_de_sq: f64) -> Result<Self> {
        for (name, v) in [("sigma_sd_sq", sigma_sd_sq), ("sigma_de_sq", sigma_de_sq)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
            }
        }
        let consistent = match case_id {
            CaseId::CaseI => sigma_sd_sq == sigma_de_sq,
            CaseId::CaseII => sigma_sd_sq < sigma_de_sq,
            CaseId::CaseIII => sigma_sd_sq > sigma_de_sq,
        };
        if !consistent {
            return Err(Error::Configuration(format!(
                "variances ({sigma_sd_sq}, {sigma_de_sq}) contradict distance case {case_id}"
            )));
        }
        Ok(Self { case_id, sigma_sd_sq, sigma_de_sq })
    }

    pub fn case_id(&self) -> CaseId {
        self.case_id
    }

    pub fn sigma_sd_sq(&self) -> f64 {
        self.sigma_sd_sq
    }

    pub fn sigma_de_sq(&self) -> f64 {
        self.sigma_de_sq
    }

    /// Source-to-end-device variance implied by placing the devices on the
    /// straight line between source and end device, with every link
    /// variance falling as `d^-exponent`.
    pub fn collinear_direct_variance(&self, exponent: f64) -> f64 {
        let distance = |variance: f64| variance.powf(-1.0 / exponent);
        (distance(self.sigma_sd_sq) + distance(self.sigma_de_sq)).powf(-exponent)
    }
}

/// Free-space path-loss exponent.
pub const FREE_SPACE_EXPONENT: f64 = 2.0;

/// Default link variances of each distance case.
pub fn case_variances(case_id: CaseId) -> DistanceCase {
    let (sd, de) = match case_id {
        CaseId::CaseI => (1.0, 1.0),
        CaseId::CaseII => (1.0, 10.0),
        CaseId::CaseIII => (10.0, 1.0),
    };
    DistanceCase { case_id, sigma_sd_sq: sd, sigma_de_sq: de }
}

/// Source power and the identical per-device power for `n_devices` relays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub p_total: f64,
    pub p_source: f64,
    pub p_device: f64,
    pub n_devices: usize,
}

impl PowerAllocation {
    /// Source power carrying the whole budget, as in direct transmission.
    pub fn direct(p_total: f64) -> Result<Self> {
        check_budget(p_total, 1)?;
        Ok(Self { p_total, p_source: p_total, p_device: 0.0, n_devices: 1 })
    }

    pub fn total_device_power(&self) -> f64 {
        self.n_devices as f64 * self.p_device
    }
}

fn check_budget(p_total: f64, n_devices: usize) -> Result<()> {
    if !(p_total > 0.0 && p_total.is_finite()) {
        return Err(Error::Configuration(format!("total power must be positive, got {p_total}")));
    }
    if n_devices == 0 {
        return Err(Error::Configuration("at least one device is required".into()));
    }
    Ok(())
}

/// Splits `p_total` between the source and `n_devices` equal-power relays.
///
/// Case I fixes half the budget at the source and shares the rest equally.
/// Cases II and III use the high-SNR optimum for AF cooperation, with the
/// formula symbols read as standard deviations of the stored variances; the
/// two cases swap the roles of the numerator terms.
pub fn allocate_power(case: &DistanceCase, p_total: f64, n_devices: usize) -> Result<PowerAllocation> {
    check_budget(p_total, n_devices)?;
    // re-validate in case the value was built by hand
    let case = DistanceCase::new(case.case_id, case.sigma_sd_sq, case.sigma_de_sq)?;
    let n = n_devices as f64;

    let source_share = match case.case_id {
        CaseId::CaseI => 0.5,
        CaseId::CaseII | CaseId::CaseIII => {
            let s_sd = case.sigma_sd_sq.sqrt();
            let root = (case.sigma_sd_sq + 8.0 * case.sigma_de_sq).sqrt();
            let denom = 3.0 * s_sd + root;
            if case.case_id == CaseId::CaseII {
                (s_sd + root) / denom
            } else {
                2.0 * s_sd / denom
            }
        }
    };
    let p_source = source_share * p_total;
    let p_device = (1.0 - source_share) * p_total / n;
    Ok(PowerAllocation { p_total, p_source, p_device, n_devices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collinear_direct_variance_examples() {
        let one = case_variances(CaseId::CaseI);
        assert!((one.collinear_direct_variance(2.0) - 0.25).abs() < 1e-15);
        assert!((one.collinear_direct_variance(3.0) - 0.125).abs() < 1e-15);
        let two = case_variances(CaseId::CaseII).collinear_direct_variance(FREE_SPACE_EXPONENT);
        let three = case_variances(CaseId::CaseIII).collinear_direct_variance(FREE_SPACE_EXPONENT);
        assert!((two - (1.0 + 0.1f64.sqrt()).powi(-2)).abs() < 1e-15);
        assert!((two - three).abs() < 1e-15);
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn case_one_half_split() {
        let a = allocate_power(&case_variances(CaseId::CaseI), 1.0, 5).unwrap();
        assert!(close(a.p_source, 0.5, 1e-12));
        assert!(close(a.p_device, 0.1, 1e-12));
    }

    #[test]
    fn case_two_closed_form() {
        let a = allocate_power(&case_variances(CaseId::CaseII), 1.0, 5).unwrap();
        // sigma_sd = 1, sqrt(1 + 80) = 9
        assert!(close(a.p_source, 5.0 / 6.0, 1e-12));
        assert!(close(a.p_device, 1.0 / 30.0, 1e-12));
        assert!(close(a.p_source + 5.0 * a.p_device, 1.0, 1e-12));
    }

    #[test]
    fn case_three_closed_form() {
        let a = allocate_power(&case_variances(CaseId::CaseIII), 1.0, 5).unwrap();
        let s = 10f64.sqrt();
        let expected = 2.0 * s / (3.0 * s + 18f64.sqrt());
        assert!(close(a.p_source, expected, 1e-12));
        assert!((a.p_source - 0.4607).abs() < 1e-4);
        assert!((a.total_device_power() - 0.5393).abs() < 1e-4);
    }

    #[test]
    fn case_variance_table() {
        let c2 = case_variances(CaseId::CaseII);
        assert_eq!((c2.sigma_sd_sq(), c2.sigma_de_sq()), (1.0, 10.0));
        let c3 = case_variances(CaseId::CaseIII);
        assert_eq!((c3.sigma_sd_sq(), c3.sigma_de_sq()), (10.0, 1.0));
        let c1 = case_variances(CaseId::CaseI);
        assert_eq!((c1.sigma_sd_sq(), c1.sigma_de_sq()), (1.0, 1.0));
    }

    #[test]
    fn inconsistent_case_rejected() {
        assert!(matches!(DistanceCase::new(CaseId::CaseII, 10.0, 1.0), Err(Error::Configuration(_))));
        assert!(matches!(DistanceCase::new(CaseId::CaseI, 1.0, 2.0), Err(Error::Configuration(_))));
        assert!(DistanceCase::new(CaseId::CaseIII, 0.0, -1.0).is_err());
        let bad = DistanceCase { case_id: CaseId::CaseIII, sigma_sd_sq: 1.0, sigma_de_sq: 10.0 };
        assert!(allocate_power(&bad, 1.0, 5).is_err());
        assert!(allocate_power(&case_variances(CaseId::CaseI), 0.0, 5).is_err());
        assert!(allocate_power(&case_variances(CaseId::CaseI), 1.0, 0).is_err());
    }

    #[test]
    fn case_two_favours_source_over_case_three() {
        let two = allocate_power(&case_variances(CaseId::CaseII), 1.0, 5).unwrap();
        let three = allocate_power(&case_variances(CaseId::CaseIII), 1.0, 5).unwrap();
        assert!(two.p_source > three.p_source);
    }

    proptest! {
        #[test]
        fn total_power_conserved(case in 0usize..3, n in 1usize..=64, p in 1e-3f64..1e3) {
            let a = allocate_power(&case_variances(CaseId::ALL[case]), p, n).unwrap();
            prop_assert!(a.p_source >= 0.0 && a.p_device >= 0.0);
            prop_assert!(close(a.p_source + n as f64 * a.p_device, p, 1e-9));
        }

        #[test]
        fn scale_equivariant(case in 0usize..3, n in 1usize..=64, p in 1e-3f64..1e3, c in 1e-3f64..1e3) {
            let cs = case_variances(CaseId::ALL[case]);
            let a = allocate_power(&cs, p, n).unwrap();
            let b = allocate_power(&cs, c * p, n).unwrap();
            prop_assert!(close(b.p_source, c * a.p_source, 1e-9));
            prop_assert!(close(b.p_device, c * a.p_device, 1e-9));
        }
    }
}
