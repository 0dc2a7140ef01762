//! Built-in demonstration problems with frozen reference eigenvalues.
//!
//! Each preset pairs coefficient formulas with the eigenvalues the solver
//! is expected to reproduce on the canonical interval, both for the
//! ordinary (classical) run and for staircase indices 0.8, 0.9, and 1.0.
//! Reference rows have different lengths on purpose: shrinking the index
//! compresses the staircase span, so fewer eigenvalues fit below π.

use crate::dirac::DiracProblem;
use crate::error::{Error, Result};
use crate::expr::parse_coefficient;
use crate::scaling::ScalingModel;

/// Staircase indices the reference tables cover.
pub const REFERENCE_ALPHAS: [f64; 3] = [0.8, 0.9, 1.0];

/// Absolute tolerance for classical and index-1.0 reference comparisons.
pub const CLASSICAL_TOL: f64 = 2e-3;

/// Relative tolerance for sub-unit-index reference comparisons.
pub const SUB_UNIT_TOL: f64 = 1e-2;

#[derive(Debug)]
pub struct Preset {
    pub number: u8,
    pub label: &'static str,
    pub p: &'static str,
    pub r: &'static str,
    classical: &'static [f64],
    fractal_08: &'static [f64],
    fractal_09: &'static [f64],
    fractal_10: &'static [f64],
}

static PRESETS: [Preset; 3] = [
    Preset {
        number: 1,
        label: "rational",
        p: "1/(1+x)",
        r: "1/(1+x^2)",
        classical: &[0.347524, 1.176747, 2.055970, 3.020643],
        fractal_08: &[0.413400, 1.438434, 2.566015],
        fractal_09: &[0.378385, 1.301643, 2.296227],
        fractal_10: &[0.347685, 1.176925, 2.056040, 3.020692],
    },
    Preset {
        number: 2,
        label: "polynomial",
        p: "x+1",
        r: "x^2+1",
        classical: &[1.544759],
        fractal_08: &[1.516625],
        fractal_09: &[1.530339],
        fractal_10: &[1.544186],
    },
    Preset {
        number: 3,
        label: "exponential",
        p: "exp(x)",
        r: "exp(-x)",
        classical: &[0.148677, 0.458639, 0.865004, 1.452401, 2.170184, 2.965759],
        fractal_08: &[0.210897, 0.644622, 1.301299, 2.201887],
        fractal_09: &[0.175896, 0.542309, 1.057334, 1.790641, 2.656072],
        fractal_10: &[0.148792, 0.458986, 0.865601, 1.453235, 2.171232, 2.966991],
    },
];

impl Preset {
    /// Instantiate the preset as a problem at the given staircase index.
    pub fn problem(&self, alpha: f64, steps: usize) -> Result<DiracProblem> {
        let p = parse_coefficient(self.p)?;
        let r = parse_coefficient(self.r)?;
        let model = ScalingModel::power_law(alpha)?;
        DiracProblem::new(p, r, model, steps)
    }

    /// Reference eigenvalues of the ordinary (non-staircase) run.
    pub fn classical_reference(&self) -> &'static [f64] {
        self.classical
    }

    /// Reference eigenvalues for one of the covered staircase indices.
    pub fn fractal_reference(&self, alpha: f64) -> Option<&'static [f64]> {
        if (alpha - 0.8).abs() < 1e-12 {
            Some(self.fractal_08)
        } else if (alpha - 0.9).abs() < 1e-12 {
            Some(self.fractal_09)
        } else if (alpha - 1.0).abs() < 1e-12 {
            Some(self.fractal_10)
        } else {
            None
        }
    }
}

pub fn preset(number: u8) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.number == number)
        .ok_or(Error::UnknownExample(number))
}

pub fn all_presets() -> &'static [Preset; 3] {
    &PRESETS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_rejection() {
        assert_eq!(preset(1).unwrap().label, "rational");
        assert_eq!(preset(3).unwrap().p, "exp(x)");
        assert!(matches!(preset(4), Err(Error::UnknownExample(4))));
        assert!(matches!(preset(0), Err(Error::UnknownExample(0))));
    }

    #[test]
    fn reference_row_shapes() {
        let lens: Vec<[usize; 4]> = all_presets()
            .iter()
            .map(|p| {
                [
                    p.classical_reference().len(),
                    p.fractal_reference(0.8).unwrap().len(),
                    p.fractal_reference(0.9).unwrap().len(),
                    p.fractal_reference(1.0).unwrap().len(),
                ]
            })
            .collect();
        assert_eq!(lens, vec![[4, 3, 3, 4], [1, 1, 1, 1], [6, 4, 5, 6]]);
        assert!(preset(1).unwrap().fractal_reference(0.85).is_none());
    }

    #[test]
    fn rows_are_sorted_ascending() {
        for p in all_presets() {
            for row in [
                p.classical_reference(),
                p.fractal_reference(0.8).unwrap(),
                p.fractal_reference(0.9).unwrap(),
                p.fractal_reference(1.0).unwrap(),
            ] {
                assert!(row.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn presets_build_problems() {
        for p in all_presets() {
            for alpha in REFERENCE_ALPHAS {
                let problem = p.problem(alpha, 64).unwrap();
                assert_eq!(problem.steps(), 64);
                assert_eq!(problem.a(), 0.0);
            }
        }
    }
}
