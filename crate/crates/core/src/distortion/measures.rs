use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight local distortion measures, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionMeasure {
    /// As-rigid-as-possible: `(s1^2 - 1)^2 + (s2^2 - 1)^2`.
    Arap,
    /// Symmetric Dirichlet: `(s1^2 + s1^-2 + s2^2 + s2^-2) / 4`.
    #[serde(rename = "sd")]
    SymmetricDirichlet,
    /// Quasi-isometric dilatation: `max(s1, 1/s2)`.
    #[serde(rename = "qi")]
    QuasiIsometric,
    /// Quasi-conformal dilatation: `max(s1/s2, s2/s1)`.
    #[serde(rename = "qc")]
    QuasiConformal,
    /// MIPS: `(s1^2 + s2^2) / (s1 s2)`.
    Mips,
    /// Unsigned area distortion: `max(s1 s2, 1/(s1 s2))`.
    #[serde(rename = "ad")]
    AreaDistortion,
    /// Dirichlet: `(s1^2 + s2^2) / 2`.
    Dirichlet,
    /// Conformal factor: `(s1 + s2) / 2`.
    #[serde(rename = "cf")]
    ConformalFactor,
}

impl DistortionMeasure {
    pub const ALL: [DistortionMeasure; 8] = [
        DistortionMeasure::Arap,
        DistortionMeasure::SymmetricDirichlet,
        DistortionMeasure::QuasiIsometric,
        DistortionMeasure::QuasiConformal,
        DistortionMeasure::Mips,
        DistortionMeasure::AreaDistortion,
        DistortionMeasure::Dirichlet,
        DistortionMeasure::ConformalFactor,
    ];

    pub fn ordinal(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).expect("listed")
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Arap => "arap",
            Self::SymmetricDirichlet => "sd",
            Self::QuasiIsometric => "qi",
            Self::QuasiConformal => "qc",
            Self::Mips => "mips",
            Self::AreaDistortion => "ad",
            Self::Dirichlet => "dirichlet",
            Self::ConformalFactor => "cf",
        }
    }

    /// Value at the identity map, which is each measure's minimum.
    pub fn identity_value(self) -> f64 {
        match self {
            Self::Arap => 0.0,
            Self::Mips => 2.0,
            _ => 1.0,
        }
    }

    /// Formula evaluation without domain checks.
    pub fn eval(self, s1: f64, s2: f64) -> f64 {
        match self {
            Self::Arap => (s1 * s1 - 1.0).powi(2) + (s2 * s2 - 1.0).powi(2),
            Self::SymmetricDirichlet => {
                (s1 * s1 + 1.0 / (s1 * s1) + s2 * s2 + 1.0 / (s2 * s2)) / 4.0
            }
            Self::QuasiIsometric => s1.max(1.0 / s2),
            Self::QuasiConformal => (s1 / s2).max(s2 / s1),
            Self::Mips => (s1 * s1 + s2 * s2) / (s1 * s2),
            Self::AreaDistortion => {
                let a = (s1 * s2).abs();
                a.max(1.0 / a)
            }
            Self::Dirichlet => (s1 * s1 + s2 * s2) / 2.0,
            Self::ConformalFactor => (s1 + s2) / 2.0,
        }
    }
}

impl fmt::Display for DistortionMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistortionMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown distortion measure {s:?}")))
    }
}

/// Local distortion of a triangle whose Jacobian has singular values `(s1, s2)`.
pub fn local_distortion(measure: DistortionMeasure, s1: f64, s2: f64) -> Result<f64> {
    if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::Domain(format!(
            "singular values must be positive and finite, got ({s1}, {s2})"
        )));
    }
    Ok(measure.eval(s1, s2))
}

#[cfg(test)]
mod tests {
    use super::DistortionMeasure::*;
    use super::*;

    #[test]
    fn identity_values() {
        for m in DistortionMeasure::ALL {
            assert_eq!(
                local_distortion(m, 1.0, 1.0).unwrap(),
                m.identity_value(),
                "{m}"
            );
        }
    }

    #[test]
    fn worked_values() {
        assert_eq!(Mips.eval(2.0, 1.0), 2.5);
        assert_eq!(QuasiConformal.eval(2.0, 1.0), 2.0);
        assert_eq!(Dirichlet.eval(2.0, 1.0), 2.5);
        assert_eq!(ConformalFactor.eval(2.0, 1.0), 1.5);
        assert_eq!(AreaDistortion.eval(2.0, 0.5), 1.0);
        assert_eq!(QuasiIsometric.eval(2.0, 0.5), 2.0);
        assert_eq!(Arap.eval(2.0, 0.5), 9.5625);
    }

    #[test]
    fn non_positive_sigma_is_a_domain_error() {
        assert!(matches!(
            local_distortion(Arap, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            local_distortion(Mips, 1.0, -0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn names_round_trip() {
        for m in DistortionMeasure::ALL {
            assert_eq!(m.name().parse::<DistortionMeasure>().unwrap(), m);
        }
        assert_eq!(DistortionMeasure::Dirichlet.ordinal(), 6);
    }
}
