//! Invariant suites over the built-in presets.
//!
//! Each suite turns one mathematical property of the solver into a list of
//! named defect checks: orthogonality of eigenfunctions, symmetry of the
//! operator, x-independence of the Wronskian, the norming identity between
//! β_n·α_n and the λ-slope of the characteristic function, and empirical
//! convergence order. The CLI prints the checks; the acceptance tests gate
//! on them.

use std::fmt;
use std::str::FromStr;

use crate::dirac::{lagrange_defect, State2};
use crate::error::{Error, Result};
use crate::expr::parse_coefficient;
use crate::integrate::IntegratorConfig;
use crate::presets::{all_presets, Preset, REFERENCE_ALPHAS};
use crate::spectral::{
    build_propagator, check_norming_identity, convergence_study, delta_of, orthogonality_matrix,
    solve_spectrum, DEFAULT_SCAN_POINTS, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Orthogonality,
    Lagrange,
    Wronskian,
    Norming,
    Convergence,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "orthogonality" => Suite::Orthogonality,
            "lagrange" => Suite::Lagrange,
            "wronskian" => Suite::Wronskian,
            "norming" => Suite::Norming,
            "convergence" => Suite::Convergence,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown suite '{other}'; expected orthogonality, lagrange, wronskian, \
                     norming, convergence, or all"
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Orthogonality => "orthogonality",
            Suite::Lagrange => "lagrange",
            Suite::Wronskian => "wronskian",
            Suite::Norming => "norming",
            Suite::Convergence => "convergence",
            Suite::All => "all",
        })
    }
}

/// One named defect measurement with its pass bound.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub defect: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: String, defect: f64, bound: f64) -> Self {
        let pass = defect.is_finite() && defect < bound;
        Check {
            name,
            defect,
            bound,
            pass,
        }
    }
}

const WINDOW: (f64, f64) = (0.0, std::f64::consts::PI);

fn fractal_config(steps: usize) -> Result<IntegratorConfig> {
    IntegratorConfig::fractal(steps)
}

fn solve_preset(preset: &Preset, alpha: f64, steps: usize) -> Result<crate::spectral::Spectrum> {
    let problem = preset.problem(alpha, steps)?;
    solve_spectrum(
        WINDOW,
        &problem,
        &fractal_config(steps)?,
        DEFAULT_SCAN_POINTS,
        DEFAULT_TOL,
    )
}

fn orthogonality_checks(steps: usize, out: &mut Vec<Check>) -> Result<()> {
    for preset in all_presets() {
        for alpha in REFERENCE_ALPHAS {
            let spectrum = solve_preset(preset, alpha, steps)?;
            if spectrum.pairs.is_empty() {
                out.push(Check::new(
                    format!("orthogonality preset-{} alpha-{alpha}", preset.number),
                    f64::INFINITY,
                    1e-4,
                ));
                continue;
            }
            let gram = orthogonality_matrix(&spectrum.pairs)?;
            let mut worst = 0.0f64;
            for i in 0..gram.len() {
                for j in 0..gram.len() {
                    if i != j {
                        worst = worst.max(gram[i][j].abs());
                    }
                }
            }
            out.push(Check::new(
                format!("orthogonality preset-{} alpha-{alpha}", preset.number),
                worst,
                1e-4,
            ));

            // boundary satisfaction: left end exact, right end within
            // 10x the refinement tolerance relative to the sup norm
            let mut boundary = 0.0f64;
            for pair in &spectrum.pairs {
                boundary = boundary
                    .max(pair.phi.first().f1.abs())
                    .max(pair.phi.last().f1.abs() / pair.phi.max_abs());
            }
            out.push(Check::new(
                format!("boundary preset-{} alpha-{alpha}", preset.number),
                boundary,
                10.0 * DEFAULT_TOL,
            ));
        }
    }
    Ok(())
}

const LAGRANGE_PAIRS: [(&str, (&str, &str), (&str, &str)); 3] = [
    ("pair-a", ("sin(S)", "cos(S)"), ("S", "S^2")),
    ("pair-b", ("S^2", "S"), ("cos(S)", "sin(S)")),
    ("pair-c", ("sin(S)", "S"), ("S^2", "cos(S)")),
];

fn lagrange_checks(out: &mut Vec<Check>) -> Result<()> {
    for preset in all_presets() {
        for alpha in [0.9, 1.0] {
            for (tag, f, g) in LAGRANGE_PAIRS {
                let f = (parse_coefficient(f.0)?, parse_coefficient(f.1)?);
                let g = (parse_coefficient(g.0)?, parse_coefficient(g.1)?);
                let defect_at = |steps: usize| -> Result<f64> {
                    let problem = preset.problem(alpha, steps)?;
                    let grid = problem.make_grid()?;
                    lagrange_defect((&f.0, &f.1), (&g.0, &g.1), &problem, &grid)
                };
                let coarse = defect_at(512)?;
                let fine = defect_at(1024)?;
                let ratio = coarse / fine;
                out.push(Check::new(
                    format!(
                        "lagrange preset-{} alpha-{alpha} {tag} order",
                        preset.number
                    ),
                    (ratio - 4.0).abs(),
                    1.0,
                ));
                out.push(Check::new(
                    format!(
                        "lagrange preset-{} alpha-{alpha} {tag} defect",
                        preset.number
                    ),
                    fine,
                    1e-3,
                ));
            }
        }
    }
    Ok(())
}

fn lower_open_lambdas(points: usize) -> Vec<f64> {
    let (min, max) = WINDOW;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                max
            } else {
                min + (i + 1) as f64 / points as f64 * (max - min)
            }
        })
        .collect()
}

fn wronskian_checks(steps: usize, out: &mut Vec<Check>) -> Result<()> {
    for preset in all_presets() {
        for alpha in REFERENCE_ALPHAS {
            let problem = preset.problem(alpha, steps)?;
            let prop = build_propagator(&problem, &fractal_config(steps)?)?;

            // two-sided agreement of the characteristic value across the
            // full scan resolution
            let mut agreement = 0.0f64;
            for lambda in lower_open_lambdas(DEFAULT_SCAN_POINTS) {
                let via_phi = delta_of(&prop, lambda)?;
                let via_psi = prop.psi_initial(lambda)?.f1;
                agreement = agreement.max((via_phi - via_psi).abs() / (1.0 + via_phi.abs()));
            }
            out.push(Check::new(
                format!("agreement preset-{} alpha-{alpha}", preset.number),
                agreement,
                1e-6,
            ));

            // x-independence of the Wronskian on a coarser λ sample
            let mut variation = 0.0f64;
            for lambda in lower_open_lambdas(21) {
                let phi = prop.sweep_forward(State2::new(0.0, 1.0), lambda)?;
                let psi = prop.sweep_backward(State2::new(0.0, 1.0), lambda)?;
                let mut max = f64::MIN;
                let mut min = f64::MAX;
                for (a, b) in phi.states().iter().zip(psi.states()) {
                    let w = a.f2 * b.f1 - a.f1 * b.f2;
                    max = max.max(w);
                    min = min.min(w);
                }
                let delta = delta_of(&prop, lambda)?;
                variation = variation.max((max - min) / (1.0 + delta.abs()));
            }
            out.push(Check::new(
                format!("wronskian preset-{} alpha-{alpha}", preset.number),
                variation,
                1e-5,
            ));
        }
    }
    Ok(())
}

fn norming_checks(steps: usize, out: &mut Vec<Check>) -> Result<()> {
    for preset in all_presets() {
        for alpha in REFERENCE_ALPHAS {
            let problem = preset.problem(alpha, steps)?;
            let config = fractal_config(steps)?;
            let spectrum = solve_spectrum(
                WINDOW,
                &problem,
                &config,
                DEFAULT_SCAN_POINTS,
                DEFAULT_TOL,
            )?;
            for pair in &spectrum.pairs {
                let defect = check_norming_identity(pair, &problem, &config)?;
                out.push(Check::new(
                    format!(
                        "norming preset-{} alpha-{alpha} n-{}",
                        preset.number, pair.index
                    ),
                    defect,
                    1e-3,
                ));
            }
        }
    }
    Ok(())
}

fn convergence_checks(out: &mut Vec<Check>) -> Result<()> {
    let levels = [128usize, 256, 512, 1024];
    for preset in all_presets() {
        for (tag, config) in [
            ("fractal", IntegratorConfig::fractal(levels[0])?),
            ("classical", IntegratorConfig::classical(levels[0])?),
        ] {
            let problem = preset.problem(1.0, levels[0])?;
            let study = convergence_study(&problem, &config, WINDOW, &levels)?;
            let order = study.observed_order.unwrap_or(f64::NAN);
            out.push(Check::new(
                format!("convergence preset-{} {tag} order", preset.number),
                (order - 4.0).abs(),
                1.0,
            ));
        }
    }
    Ok(())
}

/// Run one suite (or all of them) at the given grid resolution.
pub fn run_suite(suite: Suite, steps: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    match suite {
        Suite::Orthogonality => orthogonality_checks(steps, &mut out)?,
        Suite::Lagrange => lagrange_checks(&mut out)?,
        Suite::Wronskian => wronskian_checks(steps, &mut out)?,
        Suite::Norming => norming_checks(steps, &mut out)?,
        Suite::Convergence => convergence_checks(&mut out)?,
        Suite::All => {
            orthogonality_checks(steps, &mut out)?;
            lagrange_checks(&mut out)?;
            wronskian_checks(steps, &mut out)?;
            norming_checks(steps, &mut out)?;
            convergence_checks(&mut out)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for suite in [
            Suite::Orthogonality,
            Suite::Lagrange,
            Suite::Wronskian,
            Suite::Norming,
            Suite::Convergence,
            Suite::All,
        ] {
            assert_eq!(suite.to_string().parse::<Suite>().unwrap(), suite);
        }
        assert!(matches!(
            "bogus".parse::<Suite>(),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn lagrange_suite_passes_at_moderate_resolution() {
        let checks = run_suite(Suite::Lagrange, 1024).unwrap();
        assert_eq!(checks.len(), 3 * 2 * 3 * 2);
        for c in &checks {
            assert!(c.pass, "{}: defect {:e} bound {:e}", c.name, c.defect, c.bound);
        }
    }

    #[test]
    fn wronskian_suite_passes_at_moderate_resolution() {
        let checks = run_suite(Suite::Wronskian, 1024).unwrap();
        assert_eq!(checks.len(), 3 * 3 * 2);
        for c in &checks {
            assert!(c.pass, "{}: defect {:e} bound {:e}", c.name, c.defect, c.bound);
        }
    }

    #[test]
    fn orthogonality_suite_passes_at_moderate_resolution() {
        let checks = run_suite(Suite::Orthogonality, 2048).unwrap();
        assert_eq!(checks.len(), 3 * 3 * 2);
        for c in &checks {
            assert!(c.pass, "{}: defect {:e} bound {:e}", c.name, c.defect, c.bound);
        }
    }

    #[test]
    fn norming_suite_passes_at_moderate_resolution() {
        let checks = run_suite(Suite::Norming, 2048).unwrap();
        // 3+3+4 pairs for preset 1, 1+1+1 for preset 2, 4+5+6 for preset 3
        assert_eq!(checks.len(), 10 + 3 + 15);
        for c in &checks {
            assert!(c.pass, "{}: defect {:e} bound {:e}", c.name, c.defect, c.bound);
        }
    }

    #[test]
    fn convergence_suite_passes() {
        let checks = run_suite(Suite::Convergence, 1024).unwrap();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            assert!(c.pass, "{}: defect {:e} bound {:e}", c.name, c.defect, c.bound);
        }
    }
}
