//! Staircase scaling models, grids, and quadrature in the staircase coordinate.
//!
//! The geometry of the whole crate is carried by a single map `S`: a
//! strictly increasing "staircase" that sends the physical abscissa `x ≥ 0`
//! to the coordinate the differential system actually lives in. Only the
//! power law `S(x) = x^alpha` with `alpha ∈ (0, 1]` is implemented; at
//! `alpha = 1` it degenerates to the identity and everything in the crate
//! reduces to ordinary calculus on `[a, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order of the scaling map, restricted to `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ScalingIndex(f64);

impl ScalingIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(ScalingIndex(alpha))
        } else {
            Err(Error::InvalidScalingIndex { alpha })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_unit(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for ScalingIndex {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        ScalingIndex::new(alpha)
    }
}

impl From<ScalingIndex> for f64 {
    fn from(idx: ScalingIndex) -> f64 {
        idx.0
    }
}

/// The staircase map itself. The enumeration leaves room for other
/// staircase constructions; only the power law is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScalingModel {
    PowerLaw { alpha: ScalingIndex },
}

impl ScalingModel {
    pub fn power_law(alpha: f64) -> Result<Self> {
        Ok(ScalingModel::PowerLaw {
            alpha: ScalingIndex::new(alpha)?,
        })
    }

    /// The identity staircase `S(x) = x`, i.e. the power law at order 1.
    pub fn identity() -> Self {
        ScalingModel::PowerLaw {
            alpha: ScalingIndex(1.0),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            ScalingModel::PowerLaw { alpha } => alpha.value(),
        }
    }

    /// `S(x)` without the domain check; callers guarantee `x ≥ 0`.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let a = self.alpha();
        // x^1 is not guaranteed to be a no-op through powf on every libm,
        // so the identity case is special-cased; this also makes the
        // alpha = 1 reduction exact rather than merely close.
        if a == 1.0 {
            x
        } else {
            x.powf(a)
        }
    }

    /// Inverse map `S^{-1}(t) = t^{1/alpha}` for `t ≥ 0`.
    pub(crate) fn invert_unchecked(&self, t: f64) -> f64 {
        let a = self.alpha();
        if a == 1.0 {
            t
        } else {
            t.powf(1.0 / a)
        }
    }
}

/// Evaluate the staircase at `x ≥ 0`.
pub fn staircase_eval(x: f64, model: &ScalingModel) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::NegativeAbscissa { x });
    }
    Ok(model.eval_unchecked(x))
}

/// A discretization of `[a, b]`: nodes uniform in the physical coordinate,
/// with the staircase values cached alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    staircase_nodes: Vec<f64>,
}

impl Grid {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn staircase_nodes(&self) -> &[f64] {
        &self.staircase_nodes
    }

    /// Number of nodes (= steps + 1).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Build a grid of `steps + 1` nodes equally spaced in `x`, with the
/// staircase values cached. Requires `a < b` and `steps ≥ 1`.
pub fn make_uniform_grid(a: f64, b: f64, steps: usize, model: &ScalingModel) -> Result<Grid> {
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if steps < 1 {
        return Err(Error::TooFewSteps { min: 1, got: steps });
    }
    let mut nodes = Vec::with_capacity(steps + 1);
    nodes.push(a);
    let width = b - a;
    for i in 1..steps {
        nodes.push(a + width * (i as f64) / (steps as f64));
    }
    nodes.push(b);
    let staircase_nodes = nodes
        .iter()
        .map(|&x| staircase_eval(x, model))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Grid {
        a,
        b,
        nodes,
        staircase_nodes,
    })
}

/// Trapezoid quadrature in the staircase coordinate:
/// `sum_i (v_i + v_{i+1})/2 * (S_{i+1} - S_i)`.
///
/// This realizes the order-`alpha` integral of a sampled integrand over the
/// grid; at `alpha = 1` it is the ordinary composite trapezoid rule.
pub fn falpha_integral(grid: &Grid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let s = grid.staircase_nodes();
    let mut acc = 0.0;
    for i in 0..grid.steps() {
        acc += 0.5 * (values[i] + values[i + 1]) * (s[i + 1] - s[i]);
    }
    Ok(acc)
}
