//! Problem statement for the first-order 2x2 system
//!
//! ```text
//!   D f2 - p(x) f1 = lambda f1
//!  -D f1 + r(x) f2 = lambda f2
//! ```
//!
//! on `[a, b]` with Dirichlet conditions on the first component at both
//! ends, where `D` differentiates with respect to the staircase coordinate
//! `S(x)`. Solving for the derivatives gives the form actually integrated:
//!
//! ```text
//!   d f1/dS = (r(x) - lambda) f2
//!   d f2/dS = (lambda + p(x)) f1
//! ```
//!
//! Coefficient formulas may mention both `S` (the staircase value) and `x`
//! (the physical abscissa); both are bound at every evaluation point.

use crate::error::{Error, Result};
use crate::expr::{differentiate_s, eval_coefficient, CoefficientExpr};
use crate::scaling::{falpha_integral, make_uniform_grid, staircase_eval, Grid, ScalingModel};

/// Immutable description of one boundary value problem.
#[derive(Debug, Clone)]
pub struct DiracProblem {
    a: f64,
    b: f64,
    p: CoefficientExpr,
    r: CoefficientExpr,
    model: ScalingModel,
    steps: usize,
}

impl DiracProblem {
    /// Problem on the canonical interval `[0, pi]`.
    pub fn new(
        p: CoefficientExpr,
        r: CoefficientExpr,
        model: ScalingModel,
        steps: usize,
    ) -> Result<Self> {
        Self::with_interval(0.0, std::f64::consts::PI, p, r, model, steps)
    }

    pub fn with_interval(
        a: f64,
        b: f64,
        p: CoefficientExpr,
        r: CoefficientExpr,
        model: ScalingModel,
        steps: usize,
    ) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::NegativeAbscissa { x: a });
        }
        if !(a < b) || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        if steps < 2 {
            return Err(Error::TooFewSteps { min: 2, got: steps });
        }
        Ok(Self {
            a,
            b,
            p,
            r,
            model,
            steps,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> &CoefficientExpr {
        &self.p
    }

    pub fn r(&self) -> &CoefficientExpr {
        &self.r
    }

    pub fn model(&self) -> &ScalingModel {
        &self.model
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Uniform grid with this problem's resolution.
    pub fn make_grid(&self) -> Result<Grid> {
        make_uniform_grid(self.a, self.b, self.steps, &self.model)
    }

    /// Same problem with a different step count.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        let mut out = self.clone();
        if steps < 2 {
            return Err(Error::TooFewSteps { min: 2, got: steps });
        }
        out.steps = steps;
        Ok(out)
    }

    /// Same coefficients and resolution on the identity staircase. This is
    /// the ordinary (non-staircase) version of the problem.
    pub fn classical_counterpart(&self) -> Self {
        let mut out = self.clone();
        out.model = ScalingModel::identity();
        out
    }

    pub(crate) fn p_at(&self, x: f64) -> Result<f64> {
        let s = staircase_eval(x, &self.model)?;
        eval_coefficient(&self.p, s, x).map_err(|source| Error::CoefficientEval { x, source })
    }

    pub(crate) fn r_at(&self, x: f64) -> Result<f64> {
        let s = staircase_eval(x, &self.model)?;
        eval_coefficient(&self.r, s, x).map_err(|source| Error::CoefficientEval { x, source })
    }
}

/// One value of the two-component unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State2 {
    pub f1: f64,
    pub f2: f64,
}

impl State2 {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite()
    }
}

/// A solution sampled along a grid, tagged with the spectral parameter it
/// was computed at.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    states: Vec<State2>,
    lambda: f64,
}

impl Trajectory {
    pub fn new(grid: Grid, states: Vec<State2>, lambda: f64) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: states.len(),
            });
        }
        if let Some(bad) = states.iter().position(|s| !s.is_finite()) {
            return Err(Error::Divergence {
                node: bad,
                x: grid.nodes()[bad],
                lambda,
            });
        }
        Ok(Self {
            grid,
            states,
            lambda,
        })
    }

    /// Build a trajectory by evaluating `f(x, S(x))` at every node.
    pub fn sample(grid: Grid, lambda: f64, f: impl Fn(f64, f64) -> State2) -> Result<Self> {
        let states: Vec<State2> = grid
            .nodes()
            .iter()
            .zip(grid.staircase_nodes())
            .map(|(&x, &s)| f(x, s))
            .collect();
        Self::new(grid, states, lambda)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn states(&self) -> &[State2] {
        &self.states
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn first(&self) -> State2 {
        self.states[0]
    }

    pub fn last(&self) -> State2 {
        *self.states.last().expect("grid has at least two nodes")
    }

    /// Largest component magnitude over the whole trajectory.
    pub fn max_abs(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.f1.abs().max(s.f2.abs()))
            .fold(0.0, f64::max)
    }
}

/// Derivative pair in the staircase coordinate at one point.
pub fn rhs(x: f64, state: State2, lambda: f64, problem: &DiracProblem) -> Result<State2> {
    let p = problem.p_at(x)?;
    let r = problem.r_at(x)?;
    Ok(State2 {
        f1: (r - lambda) * state.f2,
        f2: (lambda + p) * state.f1,
    })
}

fn sample_expr(expr: &CoefficientExpr, grid: &Grid) -> Result<Vec<f64>> {
    grid.nodes()
        .iter()
        .zip(grid.staircase_nodes())
        .map(|(&x, &s)| {
            eval_coefficient(expr, s, x).map_err(|source| Error::CoefficientEval { x, source })
        })
        .collect()
}

/// Apply the system operator to an analytic pair `(f1(S), f2(S))` and
/// sample the two result components on the grid.
///
/// The staircase derivative of an analytic formula in `S` is its ordinary
/// derivative with respect to `S`, taken symbolically; formulas outside the
/// differentiation rule table are rejected.
pub fn apply_operator(
    f1_of_s: &CoefficientExpr,
    f2_of_s: &CoefficientExpr,
    problem: &DiracProblem,
    grid: &Grid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let df1 = differentiate_s(f1_of_s)?;
    let df2 = differentiate_s(f2_of_s)?;
    let f1 = sample_expr(f1_of_s, grid)?;
    let f2 = sample_expr(f2_of_s, grid)?;
    let df1 = sample_expr(&df1, grid)?;
    let df2 = sample_expr(&df2, grid)?;
    let mut out1 = Vec::with_capacity(grid.len());
    let mut out2 = Vec::with_capacity(grid.len());
    for (i, &x) in grid.nodes().iter().enumerate() {
        let p = problem.p_at(x)?;
        let r = problem.r_at(x)?;
        out1.push(df2[i] - p * f1[i]);
        out2.push(-df1[i] + r * f2[i]);
    }
    Ok((out1, out2))
}

/// Staircase-weighted inner product of two trajectories on a shared grid.
pub fn inner_product(u: &Trajectory, v: &Trajectory) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let integrand: Vec<f64> = u
        .states
        .iter()
        .zip(&v.states)
        .map(|(a, b)| a.f1 * b.f1 + a.f2 * b.f2)
        .collect();
    falpha_integral(&u.grid, &integrand)
}

/// Residual of the symmetry identity
/// `<Lf, g> - <f, Lg> = [f2 g1 - f1 g2]` evaluated between the endpoints,
/// for analytic pairs. Zero up to quadrature error when the operator is
/// symmetric, which is what the built-in verification suite checks.
pub fn lagrange_defect(
    f: (&CoefficientExpr, &CoefficientExpr),
    g: (&CoefficientExpr, &CoefficientExpr),
    problem: &DiracProblem,
    grid: &Grid,
) -> Result<f64> {
    let (lf1, lf2) = apply_operator(f.0, f.1, problem, grid)?;
    let (lg1, lg2) = apply_operator(g.0, g.1, problem, grid)?;
    let f1 = sample_expr(f.0, grid)?;
    let f2 = sample_expr(f.1, grid)?;
    let g1 = sample_expr(g.0, grid)?;
    let g2 = sample_expr(g.1, grid)?;

    let n = grid.len();
    let mut lhs = Vec::with_capacity(n);
    let mut rhs_vals = Vec::with_capacity(n);
    for i in 0..n {
        lhs.push(lf1[i] * g1[i] + lf2[i] * g2[i]);
        rhs_vals.push(f1[i] * lg1[i] + f2[i] * lg2[i]);
    }
    let ip_lf_g = falpha_integral(grid, &lhs)?;
    let ip_f_lg = falpha_integral(grid, &rhs_vals)?;
    let bracket_at = |i: usize| f2[i] * g1[i] - f1[i] * g2[i];
    let bracket = bracket_at(n - 1) - bracket_at(0);
    Ok((ip_lf_g - ip_f_lg - bracket).abs())
}
