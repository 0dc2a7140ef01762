//! Fourth-order Runge-Kutta propagation in the staircase coordinate.
//!
//! One step advances the state by `h = S(x_next) - S(x_n)` with the classic
//! four-stage tableau; the two middle stages are evaluated at the staircase
//! midpoint `S(x_n) + h/2`, mapped back to a physical abscissa through the
//! inverse power map so coefficient formulas can be evaluated there. With
//! the identity staircase this is textbook RK4, and `ClassicalRK4` is
//! exactly that: the same code run with `S(x) = x`.

use std::borrow::Cow;

use crate::dirac::{DiracProblem, State2, Trajectory};
use crate::error::{Error, Result};
use crate::scaling::{staircase_eval, Grid};

/// Which geometry the sweep runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Integrate in the problem's own staircase coordinate.
    FractalRK4,
    /// Ignore the staircase: same scheme with S(x) = x.
    ClassicalRK4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    method: Method,
    steps: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::TooFewSteps { min: 2, got: steps });
        }
        Ok(Self { method, steps })
    }

    pub fn fractal(steps: usize) -> Result<Self> {
        Self::new(Method::FractalRK4, steps)
    }

    pub fn classical(steps: usize) -> Result<Self> {
        Self::new(Method::ClassicalRK4, steps)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// For a classical run, swap the problem's staircase for the identity so
/// every downstream evaluation (grid, coefficients, quadrature) sees S(x)=x.
pub(crate) fn effective(problem: &DiracProblem, method: Method) -> Cow<'_, DiracProblem> {
    match method {
        Method::FractalRK4 => Cow::Borrowed(problem),
        Method::ClassicalRK4 => Cow::Owned(problem.classical_counterpart()),
    }
}

fn deriv(p: f64, r: f64, lambda: f64, y: State2) -> State2 {
    State2 {
        f1: (r - lambda) * y.f2,
        f2: (lambda + p) * y.f1,
    }
}

/// Four-stage kernel shared by the single-step entry point and the sweeps,
/// so both follow the same arithmetic path. `c0`, `cm`, `c1` are the
/// coefficient pairs (p, r) at the start, staircase midpoint, and end of
/// the step; `h` is the staircase increment (negative when sweeping
/// backward).
fn rk4_kernel(
    y: State2,
    lambda: f64,
    h: f64,
    c0: (f64, f64),
    cm: (f64, f64),
    c1: (f64, f64),
) -> State2 {
    let k1 = deriv(c0.0, c0.1, lambda, y);
    let y2 = State2 {
        f1: y.f1 + 0.5 * h * k1.f1,
        f2: y.f2 + 0.5 * h * k1.f2,
    };
    let k2 = deriv(cm.0, cm.1, lambda, y2);
    let y3 = State2 {
        f1: y.f1 + 0.5 * h * k2.f1,
        f2: y.f2 + 0.5 * h * k2.f2,
    };
    let k3 = deriv(cm.0, cm.1, lambda, y3);
    let y4 = State2 {
        f1: y.f1 + h * k3.f1,
        f2: y.f2 + h * k3.f2,
    };
    let k4 = deriv(c1.0, c1.1, lambda, y4);
    State2 {
        f1: y.f1 + h * (k1.f1 + 2.0 * k2.f1 + 2.0 * k3.f1 + k4.f1) / 6.0,
        f2: y.f2 + h * (k1.f2 + 2.0 * k2.f2 + 2.0 * k3.f2 + k4.f2) / 6.0,
    }
}

/// One forward step from `x_n` to `x_next`.
pub fn frk4_step(
    x_n: f64,
    x_next: f64,
    y_n: State2,
    lambda: f64,
    problem: &DiracProblem,
) -> Result<State2> {
    if !(x_n < x_next) {
        return Err(Error::InvalidInterval { a: x_n, b: x_next });
    }
    let model = problem.model();
    let s_n = staircase_eval(x_n, model)?;
    let s_next = staircase_eval(x_next, model)?;
    let h = s_next - s_n;
    let t_mid = s_n + 0.5 * h;
    let x_mid = model.invert_unchecked(t_mid);
    let c0 = (problem.p_at(x_n)?, problem.r_at(x_n)?);
    let cm = (problem.p_at(x_mid)?, problem.r_at(x_mid)?);
    let c1 = (problem.p_at(x_next)?, problem.r_at(x_next)?);
    let y = rk4_kernel(y_n, lambda, h, c0, cm, c1);
    if !y.is_finite() {
        return Err(Error::Divergence {
            node: 0,
            x: x_n,
            lambda,
        });
    }
    Ok(y)
}

/// Grid plus coefficient tables precomputed once per (problem, resolution),
/// reused across every λ the solver probes. The tables hold exactly the
/// values the step-by-step path would compute, so sweeps through here are
/// bit-identical to chained `frk4_step` calls.
pub(crate) struct Propagator {
    grid: Grid,
    p_node: Vec<f64>,
    r_node: Vec<f64>,
    p_mid: Vec<f64>,
    r_mid: Vec<f64>,
    h: Vec<f64>,
}

impl Propagator {
    /// `problem` must already be the effective one (see [`effective`]).
    pub(crate) fn new(problem: &DiracProblem, steps: usize) -> Result<Self> {
        let config_guard = IntegratorConfig::new(Method::FractalRK4, steps)?;
        let problem = problem.with_steps(config_guard.steps())?;
        let grid = problem.make_grid()?;
        let model = problem.model();
        let n = grid.len();
        let mut p_node = Vec::with_capacity(n);
        let mut r_node = Vec::with_capacity(n);
        for &x in grid.nodes() {
            p_node.push(problem.p_at(x)?);
            r_node.push(problem.r_at(x)?);
        }
        let s = grid.staircase_nodes();
        let mut p_mid = Vec::with_capacity(n - 1);
        let mut r_mid = Vec::with_capacity(n - 1);
        let mut h = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hi = s[i + 1] - s[i];
            let t_mid = s[i] + 0.5 * hi;
            let x_mid = model.invert_unchecked(t_mid);
            p_mid.push(problem.p_at(x_mid)?);
            r_mid.push(problem.r_at(x_mid)?);
            h.push(hi);
        }
        Ok(Self {
            grid,
            p_node,
            r_node,
            p_mid,
            r_mid,
            h,
        })
    }

    fn step_forward(&self, i: usize, y: State2, lambda: f64) -> State2 {
        rk4_kernel(
            y,
            lambda,
            self.h[i],
            (self.p_node[i], self.r_node[i]),
            (self.p_mid[i], self.r_mid[i]),
            (self.p_node[i + 1], self.r_node[i + 1]),
        )
    }

    fn step_backward(&self, i: usize, y: State2, lambda: f64) -> State2 {
        rk4_kernel(
            y,
            lambda,
            -self.h[i],
            (self.p_node[i + 1], self.r_node[i + 1]),
            (self.p_mid[i], self.r_mid[i]),
            (self.p_node[i], self.r_node[i]),
        )
    }

    fn check(&self, y: State2, node: usize, lambda: f64) -> Result<State2> {
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Divergence {
                node,
                x: self.grid.nodes()[node],
                lambda,
            })
        }
    }

    /// Forward sweep storing every node, from `initial` at the left end.
    pub(crate) fn sweep_forward(&self, initial: State2, lambda: f64) -> Result<Trajectory> {
        let n = self.grid.len();
        let mut states = Vec::with_capacity(n);
        states.push(initial);
        for i in 0..n - 1 {
            let y = self.step_forward(i, states[i], lambda);
            states.push(self.check(y, i + 1, lambda)?);
        }
        Trajectory::new(self.grid.clone(), states, lambda)
    }

    /// Backward sweep from `terminal` at the right end; states are stored
    /// in ascending-x order.
    pub(crate) fn sweep_backward(&self, terminal: State2, lambda: f64) -> Result<Trajectory> {
        let n = self.grid.len();
        let mut states = vec![State2::new(0.0, 0.0); n];
        states[n - 1] = terminal;
        for i in (0..n - 1).rev() {
            let y = self.step_backward(i, states[i + 1], lambda);
            states[i] = self.check(y, i, lambda)?;
        }
        Trajectory::new(self.grid.clone(), states, lambda)
    }

    /// Endpoint state of the forward sweep without storing the trajectory.
    pub(crate) fn phi_terminal(&self, lambda: f64) -> Result<State2> {
        let n = self.grid.len();
        let mut y = State2::new(0.0, 1.0);
        for i in 0..n - 1 {
            y = self.check(self.step_forward(i, y, lambda), i + 1, lambda)?;
        }
        Ok(y)
    }

    /// Left-endpoint state of the backward sweep without storing it.
    pub(crate) fn psi_initial(&self, lambda: f64) -> Result<State2> {
        let n = self.grid.len();
        let mut y = State2::new(0.0, 1.0);
        for i in (0..n - 1).rev() {
            y = self.check(self.step_backward(i, y, lambda), i, lambda)?;
        }
        Ok(y)
    }
}

/// Left fundamental solution: starts from `(0, 1)` at the left endpoint.
pub fn propagate_phi(
    lambda: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let eff = effective(problem, config.method);
    let prop = Propagator::new(eff.as_ref(), config.steps)?;
    prop.sweep_forward(State2::new(0.0, 1.0), lambda)
}

/// Right fundamental solution: starts from `(0, 1)` at the right endpoint
/// and sweeps backward; returned in ascending-x order.
pub fn propagate_psi(
    lambda: f64,
    problem: &DiracProblem,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let eff = effective(problem, config.method);
    let prop = Propagator::new(eff.as_ref(), config.steps)?;
    prop.sweep_backward(State2::new(0.0, 1.0), lambda)
}
