//! Eigenvalue machinery: the characteristic function, window scanning,
//! bracket refinement, eigenpair assembly, and the identity checks used by
//! the verification suite.
//!
//! The characteristic function is Δ(λ) = −φ1(b, λ), where φ is the left
//! fundamental solution; its zeros are the eigenvalues. A solve scans a
//! λ-window on a uniform grid, brackets every sign change, drives each
//! bracket down by bisection, polishes once with a secant step, and then
//! assembles the eigenpair data (trajectory, weight, proportionality
//! constant between the two fundamental solutions, residual, λ-slope).

use crate::dirac::{inner_product, DiracProblem, State2, Trajectory};
use crate::error::{Error, Result};
use crate::integrate::{effective, IntegratorConfig, Propagator};
use crate::scaling::{falpha_integral, staircase_eval};

/// Uniform λ-resolution used by a default window sweep.
pub const DEFAULT_SCAN_POINTS: usize = 311;
/// Default bracket-width target for refinement.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Smallest |β| accepted as a genuine proportionality constant.
pub const BETA_FLOOR: f64 = 1e-12;
/// Smallest |dΔ/dλ| accepted as a non-degenerate slope.
pub const SLOPE_FLOOR: f64 = 1e-12;
/// Step for the central-difference λ-slope of Δ.
pub const SLOPE_STEP: f64 = 1e-5;

const MAX_REFINE_ITER: usize = 200;

/// One probe of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSample {
    pub lambda: f64,
    pub delta: f64,
}

/// A λ-sample the sweep could not evaluate (diverged propagation).
#[derive(Debug, Clone)]
pub struct ScanFailure {
    pub lambda: f64,
    pub reason: String,
}

/// Result of a window sweep: the finite samples in ascending λ order plus
/// any per-sample failures. Failures do not abort the sweep.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub samples: Vec<CharacteristicSample>,
    pub failures: Vec<ScanFailure>,
}

/// Everything known about one converged eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// 1-based position within the solved window, ascending in λ.
    pub index: usize,
    pub lambda_n: f64,
    /// Left fundamental solution at λ_n.
    pub phi: Trajectory,
    /// Squared norm of `phi` under the staircase-weighted inner product.
    pub weight_alpha_n: f64,
    /// Proportionality constant: ψ(·, λ_n) = β_n · φ(·, λ_n).
    pub beta_n: f64,
    /// |Δ(λ_n)| after refinement.
    pub residual: f64,
    /// Central-difference dΔ/dλ at λ_n.
    pub delta_slope: f64,
}

/// A bracket the solver could not turn into an eigenpair.
#[derive(Debug, Clone)]
pub struct BracketFailure {
    pub lo: f64,
    pub hi: f64,
    pub reason: String,
}

/// Outcome of a window solve: converged pairs plus per-bracket failures,
/// so no sign change is ever silently dropped.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    pub failures: Vec<BracketFailure>,
}

pub(crate) fn build_propagator(problem: &DiracProblem, config: &IntegratorConfig) -> Result<Propagator> {
    let eff = effective(problem, config.method());
    Propagator::new(eff.as_ref(), config.steps())
}

pub(crate) fn delta_of(prop: &Propagator, lambda: f64) -> Result<f64> {
    Ok(-prop.phi_terminal(lambda)?.f1)
}

/// Δ(λ) from one forward propagation: the value of φ1 at the right
/// endpoint, negated.
pub fn characteristic(
    lambda: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    delta_of(&prop, lambda)
}

/// The same quantity from the other side: ψ1 at the left endpoint, via a
/// backward propagation. Agreement with [`characteristic`] is a
/// consistency check on the integrator.
pub fn characteristic_via_psi(
    lambda: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    Ok(prop.psi_initial(lambda)?.f1)
}

/// φ2ψ1 − φ1ψ2 at every grid node. Analytically this is constant in x
/// (equal to Δ(λ)), so its variation measures integrator consistency.
pub fn wronskian_profile(
    lambda: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let prop = build_propagator(problem, config)?;
    let phi = prop.sweep_forward(State2::new(0.0, 1.0), lambda)?;
    let psi = prop.sweep_backward(State2::new(0.0, 1.0), lambda)?;
    Ok(phi
        .states()
        .iter()
        .zip(psi.states())
        .map(|(a, b)| a.f2 * b.f1 - a.f1 * b.f2)
        .collect())
}

fn scan_with(prop: &Propagator, lambda_min: f64, lambda_max: f64, points: usize) -> ScanOutcome {
    let mut samples = Vec::with_capacity(points);
    let mut failures = Vec::new();
    let width = lambda_max - lambda_min;
    // Lower-open sampling: the first sample sits one stride above
    // lambda_min and the last lands exactly on lambda_max, so a window
    // like (0, pi] never probes the excluded left endpoint.
    for i in 0..points {
        let frac = (i + 1) as f64 / points as f64;
        let lambda = if i + 1 == points {
            lambda_max
        } else {
            lambda_min + frac * width
        };
        match delta_of(prop, lambda) {
            Ok(delta) => samples.push(CharacteristicSample { lambda, delta }),
            Err(e) => failures.push(ScanFailure {
                lambda,
                reason: e.to_string(),
            }),
        }
    }
    ScanOutcome { samples, failures }
}

/// Probe Δ on a uniform λ-grid over `(lambda_min, lambda_max]`.
pub fn scan_characteristic(
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<ScanOutcome> {
    if !(lambda_min < lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(Error::InvalidWindow {
            min: lambda_min,
            max: lambda_max,
        });
    }
    if points < 2 {
        return Err(Error::TooFewScanPoints { got: points });
    }
    let prop = build_propagator(problem, config)?;
    Ok(scan_with(&prop, lambda_min, lambda_max, points))
}

/// Adjacent-sample sign changes in a sweep, as (λ_lo, λ_hi) brackets. A
/// sample that is exactly zero yields a degenerate bracket (λ, λ).
pub fn sign_change_brackets(samples: &[CharacteristicSample]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.delta == 0.0 {
            out.push((s.lambda, s.lambda));
            continue;
        }
        if i + 1 < samples.len() {
            let next = &samples[i + 1];
            if next.delta != 0.0 && s.delta.signum() != next.delta.signum() {
                out.push((s.lambda, next.lambda));
            }
        }
    }
    out
}

fn refine_with(prop: &Propagator, bracket: (f64, f64), tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance { tol });
    }
    let (mut lo, mut hi) = bracket;
    if lo == hi {
        // degenerate bracket from an exact-zero sample
        return Ok(lo);
    }
    if !(lo < hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let mut d_lo = delta_of(prop, lo)?;
    let mut d_hi = delta_of(prop, hi)?;
    if d_lo == 0.0 {
        return Ok(lo);
    }
    if d_hi == 0.0 {
        return Ok(hi);
    }
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::InvalidBracket { lo, hi });
    }

    let mut iter = 0;
    while hi - lo >= tol {
        iter += 1;
        if iter > MAX_REFINE_ITER {
            return Err(Error::IterationCap {
                cap: MAX_REFINE_ITER,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket no longer splittable in f64
        }
        let d_mid = delta_of(prop, mid)?;
        if d_mid == 0.0 {
            return Ok(mid);
        }
        if d_mid.signum() == d_lo.signum() {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
            d_hi = d_mid;
        }
    }

    let mid = 0.5 * (lo + hi);
    let d_mid = delta_of(prop, mid)?;
    // One secant polish across the final bracket; keep it only if it
    // actually lands better than the midpoint.
    let denom = d_hi - d_lo;
    if denom != 0.0 {
        let secant = (lo * d_hi - hi * d_lo) / denom;
        if secant.is_finite() && secant >= lo && secant <= hi {
            if let Ok(d_secant) = delta_of(prop, secant) {
                if d_secant.abs() < d_mid.abs() {
                    return Ok(secant);
                }
            }
        }
    }
    Ok(mid)
}

/// Shrink a sign-change bracket to an eigenvalue: bisection until the
/// bracket is narrower than `tol`, then one secant polish.
pub fn refine_eigenvalue(
    bracket: (f64, f64),
    tol: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    refine_with(&prop, bracket, tol)
}

fn beta_with(prop: &Propagator, lambda: f64) -> Result<f64> {
    let phi = prop.sweep_forward(State2::new(0.0, 1.0), lambda)?;
    let psi = prop.sweep_backward(State2::new(0.0, 1.0), lambda)?;
    // φ2(a) = 1, so the proportionality constant is ψ2(a) directly.
    let direct = psi.first().f2;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in phi.states().iter().zip(psi.states()) {
        num += b.f1 * a.f1 + b.f2 * a.f2;
        den += a.f1 * a.f1 + a.f2 * a.f2;
    }
    let least_squares = num / den;
    if (direct - least_squares).abs() > 1e-4 * direct.abs().max(1e-300) {
        return Err(Error::BetaInconsistent {
            direct,
            least_squares,
        });
    }
    Ok(direct)
}

/// Proportionality constant between the two fundamental solutions at an
/// eigenvalue, read off at the left endpoint and cross-checked against the
/// least-squares ratio over all nodes.
pub fn beta_constant(
    lambda_n: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    beta_with(&prop, lambda_n)
}

/// Squared norm of an eigenfunction trajectory under the staircase
/// inner product.
pub fn weight_number(phi: &Trajectory) -> Result<f64> {
    let integrand: Vec<f64> = phi
        .states()
        .iter()
        .map(|s| s.f1 * s.f1 + s.f2 * s.f2)
        .collect();
    falpha_integral(phi.grid(), &integrand)
}

fn slope_with(prop: &Propagator, lambda: f64) -> Result<f64> {
    let hi = delta_of(prop, lambda + SLOPE_STEP)?;
    let lo = delta_of(prop, lambda - SLOPE_STEP)?;
    Ok((hi - lo) / (2.0 * SLOPE_STEP))
}

fn assemble_pair(
    prop: &Propagator,
    lambda: f64,
    tol: f64,
) -> Result<(Trajectory, f64, f64, f64, f64)> {
    let phi = prop.sweep_forward(State2::new(0.0, 1.0), lambda)?;
    let residual = phi.last().f1.abs();
    let weight = weight_number(&phi)?;
    let beta = beta_with(prop, lambda)?;
    let slope = slope_with(prop, lambda)?;
    if !(weight > 0.0) {
        return Err(Error::NonPositiveWeight { lambda, weight });
    }
    if beta.abs() < BETA_FLOOR {
        return Err(Error::BetaInconsistent {
            direct: beta,
            least_squares: beta,
        });
    }
    // the residual is a characteristic-function value; dividing by the
    // local slope converts it into an implied eigenvalue error, which is
    // what the refinement tolerance bounds
    let implied = residual / slope.abs().max(1.0);
    if implied > tol {
        return Err(Error::ResidualTooLarge {
            lambda,
            residual: implied,
            tol,
        });
    }
    Ok((phi, weight, beta, residual, slope))
}

/// Find every eigenvalue in the window: sweep, bracket, refine, and
/// assemble eigenpairs. Brackets that fail to converge are reported in the
/// outcome rather than dropped.
pub fn solve_spectrum(
    window: (f64, f64),
    problem: &DiracProblem,
    config: &IntegratorConfig,
    scan_points: usize,
    tol: f64,
) -> Result<Spectrum> {
    let (lambda_min, lambda_max) = window;
    if !(lambda_min < lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(Error::InvalidWindow {
            min: lambda_min,
            max: lambda_max,
        });
    }
    if scan_points < 2 {
        return Err(Error::TooFewScanPoints { got: scan_points });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance { tol });
    }
    let prop = build_propagator(problem, config)?;
    let scan = scan_with(&prop, lambda_min, lambda_max, scan_points);
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for bracket in sign_change_brackets(&scan.samples) {
        let lambda = match refine_with(&prop, bracket, tol) {
            Ok(l) => l,
            Err(e) => {
                failures.push(BracketFailure {
                    lo: bracket.0,
                    hi: bracket.1,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match assemble_pair(&prop, lambda, tol) {
            Ok((phi, weight, beta, residual, slope)) => pairs.push(Eigenpair {
                index: 0,
                lambda_n: lambda,
                phi,
                weight_alpha_n: weight,
                beta_n: beta,
                residual,
                delta_slope: slope,
            }),
            Err(e) => failures.push(BracketFailure {
                lo: bracket.0,
                hi: bracket.1,
                reason: e.to_string(),
            }),
        }
    }
    pairs.sort_by(|a, b| a.lambda_n.total_cmp(&b.lambda_n));
    for (i, p) in pairs.iter_mut().enumerate() {
        p.index = i + 1;
    }
    Ok(Spectrum { pairs, failures })
}

/// Relative defect of the norming identity β_n·α_n = dΔ/dλ(λ_n), with the
/// slope taken as a central finite difference.
pub fn check_norming_identity(
    pair: &Eigenpair,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    let slope = slope_with(&prop, pair.lambda_n)?;
    if slope.abs() < SLOPE_FLOOR {
        return Err(Error::DegenerateSlope {
            lambda: pair.lambda_n,
            slope,
        });
    }
    Ok((pair.beta_n * pair.weight_alpha_n - slope).abs() / slope.abs())
}

/// Secondary diagnostic for sub-unit scaling indices: the difference
/// quotient of Δ taken against the staircase image of λ rather than λ
/// itself, (Δ(λ+e) − Δ(λ−e)) / (S(λ+e) − S(λ−e)).
pub fn staircase_slope_quotient(
    lambda_n: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<f64> {
    let prop = build_propagator(problem, config)?;
    let model = problem.model();
    let (lo, hi) = if lambda_n - SLOPE_STEP >= 0.0 {
        (lambda_n - SLOPE_STEP, lambda_n + SLOPE_STEP)
    } else {
        (lambda_n, lambda_n + SLOPE_STEP)
    };
    let d_hi = delta_of(&prop, hi)?;
    let d_lo = delta_of(&prop, lo)?;
    let s_hi = staircase_eval(hi, model)?;
    let s_lo = staircase_eval(lo, model)?;
    let ds = s_hi - s_lo;
    if ds.abs() < f64::EPSILON {
        return Err(Error::DegenerateSlope {
            lambda: lambda_n,
            slope: ds,
        });
    }
    Ok((d_hi - d_lo) / ds)
}

/// Gram matrix of the eigenfunctions, normalized by the weights:
/// G[i][j] = ⟨φ_i, φ_j⟩ / sqrt(α_i α_j). The diagonal is 1 by
/// construction; off-diagonal magnitudes measure orthogonality defect.
pub fn orthogonality_matrix(pairs: &[Eigenpair]) -> Result<Vec<Vec<f64>>> {
    if pairs.is_empty() {
        return Err(Error::NoEigenpairs);
    }
    let n = pairs.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        out[i][i] = 1.0;
        for j in i + 1..n {
            let ip = inner_product(&pairs[i].phi, &pairs[j].phi)?;
            let norm = (pairs[i].weight_alpha_n * pairs[j].weight_alpha_n).sqrt();
            let val = ip / norm;
            out[i][j] = val;
            out[j][i] = val;
        }
    }
    Ok(out)
}

/// Internal refinement target used by [`convergence_study`]; much tighter
/// than the default so that level-to-level differences measure scheme
/// error, not root-finder slack.
const STUDY_TOL: f64 = 1e-12;

/// Grid-refinement study of the first eigenvalue in a window.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// Step counts that produced an eigenvalue.
    pub levels: Vec<usize>,
    /// First eigenvalue per converged level.
    pub estimates: Vec<f64>,
    /// log2 ratios of successive estimate differences.
    pub orders: Vec<f64>,
    /// Last entry of `orders`, the headline observed order.
    pub observed_order: Option<f64>,
}

/// Track the first window eigenvalue across doubling grids and report the
/// empirically observed convergence order.
pub fn convergence_study(
    problem: &DiracProblem,
    config: &IntegratorConfig,
    window: (f64, f64),
    levels: &[usize],
) -> Result<ConvergenceStudy> {
    if levels.len() < 3 {
        return Err(Error::BadStudyLevels);
    }
    for pair in levels.windows(2) {
        if pair[1] != pair[0] * 2 || pair[0] < 2 {
            return Err(Error::BadStudyLevels);
        }
    }
    let mut converged_levels = Vec::new();
    let mut estimates = Vec::new();
    for &steps in levels {
        let level_config = IntegratorConfig::new(config.method(), steps)?;
        let spectrum = solve_spectrum(
            window,
            problem,
            &level_config,
            DEFAULT_SCAN_POINTS,
            STUDY_TOL,
        )?;
        if let Some(first) = spectrum.pairs.first() {
            converged_levels.push(steps);
            estimates.push(first.lambda_n);
        }
    }
    if estimates.len() < 2 {
        return Err(Error::StudyUnconverged {
            converged: estimates.len(),
        });
    }
    let mut orders = Vec::new();
    for w in estimates.windows(3) {
        let d1 = (w[0] - w[1]).abs();
        let d2 = (w[1] - w[2]).abs();
        if d1 > 0.0 && d2 > 0.0 {
            orders.push((d1 / d2).log2());
        }
    }
    let observed_order = orders.last().copied();
    Ok(ConvergenceStudy {
        levels: converged_levels,
        estimates,
        orders,
        observed_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_coefficient;
    use crate::scaling::{make_uniform_grid, ScalingModel};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn problem(p: &str, r: &str, alpha: f64, steps: usize) -> DiracProblem {
        DiracProblem::new(
            parse_coefficient(p).unwrap(),
            parse_coefficient(r).unwrap(),
            ScalingModel::power_law(alpha).unwrap(),
            steps,
        )
        .unwrap()
    }

    fn free(alpha: f64, steps: usize) -> DiracProblem {
        problem("0", "0", alpha, steps)
    }

    fn cfg(steps: usize) -> IntegratorConfig {
        IntegratorConfig::fractal(steps).unwrap()
    }

    #[test]
    fn characteristic_free_system() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        assert_abs_diff_eq!(characteristic(0.5, &pr, &c).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(characteristic(1.0, &pr, &c).unwrap(), 0.0, epsilon = 1e-8);
        for lambda in [0.3, 1.7, 2.4] {
            assert_abs_diff_eq!(
                characteristic(lambda, &pr, &c).unwrap(),
                (lambda * PI).sin(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn characteristic_changes_sign_at_first_eigenvalue() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 1.0, 2048);
        let c = cfg(2048);
        let below = characteristic(0.34, &pr, &c).unwrap();
        let above = characteristic(0.36, &pr, &c).unwrap();
        assert!(below < 0.0 && above > 0.0, "Δ(0.34)={below}, Δ(0.36)={above}");
    }

    #[test]
    fn characteristic_from_both_sides() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        assert_abs_diff_eq!(
            characteristic_via_psi(0.5, &pr, &c).unwrap(),
            1.0,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(
            characteristic_via_psi(2.0, &pr, &c).unwrap(),
            0.0,
            epsilon = 1e-8
        );
        let pr = problem("exp(x)", "exp(-x)", 1.0, 4096);
        let lambda = 0.148792;
        let via_phi = characteristic(lambda, &pr, &c).unwrap();
        let via_psi = characteristic_via_psi(lambda, &pr, &c).unwrap();
        assert_abs_diff_eq!(via_phi, via_psi, epsilon = 1e-6);
    }

    #[test]
    fn wronskian_profile_is_flat() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        let profile = wronskian_profile(0.5, &pr, &c).unwrap();
        let max = profile.iter().cloned().fold(f64::MIN, f64::max);
        let min = profile.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 1e-7, "variation {:e}", max - min);

        // at an eigenvalue the profile is the zero constant
        let profile = wronskian_profile(1.0, &pr, &c).unwrap();
        assert!(profile.iter().all(|v| v.abs() < 1e-8));

        let pr = problem("1/(1+x)", "1/(1+x^2)", 0.9, 4096);
        let lambda = 1.0;
        let profile = wronskian_profile(lambda, &pr, &c).unwrap();
        let max = profile.iter().cloned().fold(f64::MIN, f64::max);
        let min = profile.iter().cloned().fold(f64::MAX, f64::min);
        let delta = characteristic(lambda, &pr, &c).unwrap();
        assert!(
            max - min < 1e-5 * (1.0 + delta.abs()),
            "variation {:e}",
            max - min
        );
    }

    #[test]
    fn scan_brackets_free_integers() {
        let pr = free(1.0, 1024);
        let scan = scan_characteristic(0.2, 3.5, 34, &pr, &cfg(1024)).unwrap();
        assert_eq!(scan.samples.len(), 34);
        assert!(scan.failures.is_empty());
        let brackets = sign_change_brackets(&scan.samples);
        assert_eq!(brackets.len(), 3);
        for (b, n) in brackets.iter().zip([1.0, 2.0, 3.0]) {
            assert!(b.0 < n && n < b.1, "bracket {b:?} should contain {n}");
        }
    }

    #[test]
    fn scan_without_zero_crossings_is_empty() {
        let pr = free(1.0, 512);
        let scan = scan_characteristic(0.2, 0.8, 13, &pr, &cfg(512)).unwrap();
        assert!(sign_change_brackets(&scan.samples).is_empty());
    }

    #[test]
    fn scan_finds_four_brackets_for_rational_coefficients() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 1.0, 2048);
        let scan = scan_characteristic(0.05, 3.14, 311, &pr, &cfg(2048)).unwrap();
        assert_eq!(sign_change_brackets(&scan.samples).len(), 4);
    }

    #[test]
    fn scan_validates_arguments() {
        let pr = free(1.0, 64);
        assert!(matches!(
            scan_characteristic(2.0, 1.0, 10, &pr, &cfg(64)),
            Err(Error::InvalidWindow { .. })
        ));
        assert!(matches!(
            scan_characteristic(0.0, 1.0, 1, &pr, &cfg(64)),
            Err(Error::TooFewScanPoints { .. })
        ));
    }

    #[test]
    fn exact_zero_sample_becomes_degenerate_bracket() {
        let samples = vec![
            CharacteristicSample {
                lambda: 0.5,
                delta: 0.3,
            },
            CharacteristicSample {
                lambda: 1.0,
                delta: 0.0,
            },
            CharacteristicSample {
                lambda: 1.5,
                delta: -0.2,
            },
        ];
        let brackets = sign_change_brackets(&samples);
        assert_eq!(brackets, vec![(1.0, 1.0)]);
    }

    #[test]
    fn refine_free_bracket() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        let lambda = refine_eigenvalue((0.9, 1.1), DEFAULT_TOL, &pr, &c).unwrap();
        assert_abs_diff_eq!(lambda, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn refine_rational_bracket_matches_reference_value() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 1.0, 4096);
        let lambda = refine_eigenvalue((0.34, 0.36), DEFAULT_TOL, &pr, &cfg(4096)).unwrap();
        assert_abs_diff_eq!(lambda, 0.347524, epsilon = 2e-3);
    }

    #[test]
    fn refine_polynomial_bracket_at_low_index() {
        let pr = problem("x+1", "x^2+1", 0.8, 4096);
        let lambda = refine_eigenvalue((1.4, 1.6), DEFAULT_TOL, &pr, &cfg(4096)).unwrap();
        assert_relative_eq!(lambda, 1.516625, max_relative = 1e-2);
    }

    #[test]
    fn refine_rejects_bad_input() {
        let pr = free(1.0, 512);
        let c = cfg(512);
        assert!(matches!(
            refine_eigenvalue((0.1, 0.2), DEFAULT_TOL, &pr, &c),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(matches!(
            refine_eigenvalue((0.9, 1.1), 0.0, &pr, &c),
            Err(Error::InvalidTolerance { .. })
        ));
        assert!(matches!(
            refine_eigenvalue((1.1, 0.9), DEFAULT_TOL, &pr, &c),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn solve_free_spectrum_unit_index() {
        let pr = free(1.0, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        assert!(spectrum.failures.is_empty());
        assert_eq!(spectrum.pairs.len(), 3);
        for (pair, n) in spectrum.pairs.iter().zip(1..) {
            assert_eq!(pair.index, n as usize);
            assert_abs_diff_eq!(pair.lambda_n, f64::from(n), epsilon = 1e-6);
            assert!(pair.residual <= DEFAULT_TOL);
            assert!(pair.weight_alpha_n > 0.0);
            assert!(pair.beta_n.abs() > BETA_FLOOR);
        }
    }

    #[test]
    fn solve_free_spectrum_half_index() {
        // With α = 0.5 the staircase span is π^0.5, so zeros of Δ sit at
        // multiples of π^0.5 and only the first lies inside (0, π].
        let pr = free(0.5, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        assert_eq!(spectrum.pairs.len(), 1);
        assert_abs_diff_eq!(spectrum.pairs[0].lambda_n, PI.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn solve_exponential_coefficients_unit_index() {
        let pr = problem("exp(x)", "exp(-x)", 1.0, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        let expected = [0.148792, 0.458986, 0.865601, 1.453235, 2.171232, 2.966991];
        assert_eq!(spectrum.pairs.len(), expected.len());
        for (pair, want) in spectrum.pairs.iter().zip(expected) {
            assert_abs_diff_eq!(pair.lambda_n, want, epsilon = 2e-3);
        }
    }

    #[test]
    fn solve_rational_coefficients_low_index_has_three() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 0.8, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        assert_eq!(spectrum.pairs.len(), 3);
        let expected = [0.413400, 1.438434, 2.566015];
        for (pair, want) in spectrum.pairs.iter().zip(expected) {
            assert_relative_eq!(pair.lambda_n, want, max_relative = 1e-2);
        }
    }

    #[test]
    fn weight_number_closed_forms() {
        let pr = free(1.0, 4096);
        let prop = build_propagator(&pr, &cfg(4096)).unwrap();
        for n in 1..=3 {
            let phi = prop
                .sweep_forward(State2::new(0.0, 1.0), f64::from(n))
                .unwrap();
            assert_abs_diff_eq!(weight_number(&phi).unwrap(), PI, epsilon = 1e-6);
        }

        let model = ScalingModel::power_law(0.8).unwrap();
        let grid = make_uniform_grid(0.0, PI, 4096, &model).unwrap();
        let ones = Trajectory::sample(grid.clone(), 0.0, |_, _| State2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(
            weight_number(&ones).unwrap(),
            PI.powf(0.8),
            max_relative = 1e-12
        );
        let zeros = Trajectory::sample(grid, 0.0, |_, _| State2::new(0.0, 0.0)).unwrap();
        assert_eq!(weight_number(&zeros).unwrap(), 0.0);
    }

    #[test]
    fn beta_free_system_alternates_sign() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        for n in 1..=3i32 {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            let beta = beta_constant(f64::from(n), &pr, &c).unwrap();
            assert_abs_diff_eq!(beta, expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn norming_identity_free_system() {
        let pr = free(1.0, 4096);
        let c = cfg(4096);
        let spectrum = solve_spectrum((0.0, PI), &pr, &c, DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        for pair in &spectrum.pairs {
            // both sides equal ±π in closed form
            let sign = if pair.index % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(
                pair.beta_n * pair.weight_alpha_n,
                sign * PI,
                epsilon = 1e-5
            );
            assert_abs_diff_eq!(pair.delta_slope, sign * PI, epsilon = 1e-4);
            let defect = check_norming_identity(pair, &pr, &c).unwrap();
            assert!(defect < 1e-4, "defect {defect:e}");
        }
    }

    #[test]
    fn norming_identity_rational_coefficients() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 1.0, 4096);
        let c = cfg(4096);
        let spectrum = solve_spectrum((0.0, PI), &pr, &c, DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        assert_eq!(spectrum.pairs.len(), 4);
        for pair in &spectrum.pairs {
            let defect = check_norming_identity(pair, &pr, &c).unwrap();
            assert!(defect < 1e-3, "n={}: defect {defect:e}", pair.index);
            assert!(pair.delta_slope.abs() > SLOPE_FLOOR);
        }
    }

    #[test]
    fn staircase_quotient_close_to_plain_slope_at_unit_index() {
        let pr = free(1.0, 2048);
        let c = cfg(2048);
        let plain = {
            let prop = build_propagator(&pr, &c).unwrap();
            slope_with(&prop, 1.0).unwrap()
        };
        let quotient = staircase_slope_quotient(1.0, &pr, &c).unwrap();
        assert_relative_eq!(plain, quotient, max_relative = 1e-6);
    }

    #[test]
    fn orthogonality_free_system() {
        let pr = free(1.0, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        let gram = orthogonality_matrix(&spectrum.pairs).unwrap();
        for i in 0..gram.len() {
            assert_eq!(gram[i][i], 1.0);
            for j in 0..gram.len() {
                if i != j {
                    assert!(gram[i][j].abs() < 1e-6, "G[{i}][{j}] = {:e}", gram[i][j]);
                }
            }
        }

        let single = orthogonality_matrix(&spectrum.pairs[..1]).unwrap();
        assert_eq!(single, vec![vec![1.0]]);
        assert!(matches!(
            orthogonality_matrix(&[]),
            Err(Error::NoEigenpairs)
        ));
    }

    #[test]
    fn orthogonality_exponential_sub_unit_index() {
        let pr = problem("exp(x)", "exp(-x)", 0.9, 4096);
        let spectrum =
            solve_spectrum((0.0, PI), &pr, &cfg(4096), DEFAULT_SCAN_POINTS, DEFAULT_TOL).unwrap();
        assert_eq!(spectrum.pairs.len(), 5);
        let gram = orthogonality_matrix(&spectrum.pairs).unwrap();
        for i in 0..gram.len() {
            for j in 0..gram.len() {
                if i != j {
                    assert!(gram[i][j].abs() < 1e-4, "G[{i}][{j}] = {:e}", gram[i][j]);
                }
            }
        }
    }

    #[test]
    fn convergence_study_free_system() {
        let pr = free(1.0, 128);
        let c = cfg(128);
        let study =
            convergence_study(&pr, &c, (0.5, 1.5), &[128, 256, 512, 1024]).unwrap();
        assert_eq!(study.estimates.len(), 4);
        let order = study.observed_order.unwrap();
        assert!((order - 4.0).abs() < 0.5, "observed order {order}");
        for (est, steps) in study.estimates.iter().zip(&study.levels) {
            assert_abs_diff_eq!(*est, 1.0, epsilon = 1e-6);
            assert!(*steps >= 128);
        }
    }

    #[test]
    fn convergence_study_rational_coefficients() {
        let pr = problem("1/(1+x)", "1/(1+x^2)", 1.0, 128);
        let c = cfg(128);
        let study = convergence_study(&pr, &c, (0.2, 0.5), &[128, 256, 512, 1024]).unwrap();
        let order = study.observed_order.unwrap();
        assert!((order - 4.0).abs() < 1.0, "observed order {order}");
    }

    #[test]
    fn convergence_study_validates_levels() {
        let pr = free(1.0, 128);
        let c = cfg(128);
        assert!(matches!(
            convergence_study(&pr, &c, (0.5, 1.5), &[128, 256]),
            Err(Error::BadStudyLevels)
        ));
        assert!(matches!(
            convergence_study(&pr, &c, (0.5, 1.5), &[100, 200, 300]),
            Err(Error::BadStudyLevels)
        ));
        assert!(matches!(
            convergence_study(&pr, &c, (0.2, 0.8), &[128, 256, 512]),
            Err(Error::StudyUnconverged { .. })
        ));
    }
}
