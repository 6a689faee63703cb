//! Closed-form proximal and projection operators.
//!
//! Every block subproblem solved by the algorithms in this crate has the form
//!
//! ```text
//! minimize  c·f(x) + ½ xᵀK x − dᵀx
//! ```
//!
//! with `K` positive semidefinite and `c > 0`. [`ProxOp::minimize_with_quadratic`]
//! solves it exactly: by a linear solve when `f` is quadratic, and by the
//! operator's prox when `f` is nonsmooth and `K = κI`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_pd_check, solve_spd, Matrix, Vector};

/// Membership slack used when evaluating indicator functions.
pub const DOMAIN_TOL: f64 = 1e-8;

/// Relative tolerance for recognizing `K = κI` in nonsmooth subproblems.
const SCALAR_TOL: f64 = 1e-10;

/// The closed family of block functions `f` supported by the solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProxOp {
    /// `f(x) = weight·‖x‖₁`
    SoftThreshold { weight: f64 },
    /// Indicator of `{lo ≤ x ≤ hi}`.
    Box { lo: Vector, hi: Vector },
    /// Indicator of the probability simplex.
    Simplex,
    /// `f(x) = ½ xᵀS x − cᵀx`
    Quadratic {
        #[serde(rename = "S")]
        s: Matrix,
        c: Vector,
    },
}

/// `sign(xᵢ)·max(|xᵢ| − weight, 0)` componentwise.
pub fn soft_threshold(x: &Vector, weight: f64) -> Result<Vector> {
    if !(weight >= 0.0) {
        return Err(Error::InvalidParameter(format!("soft-threshold weight {weight} < 0")));
    }
    Ok(soft_threshold_unchecked(x, weight))
}

fn soft_threshold_unchecked(x: &Vector, weight: f64) -> Vector {
    Vector::from_raw(x.iter().map(|&xi| xi.signum() * (xi.abs() - weight).max(0.0)).collect())
}

/// Euclidean projection onto `{y ≥ 0, Σyᵢ = 1}` by sort-and-threshold.
pub fn project_simplex(x: &Vector) -> Vector {
    let n = x.dim();
    assert!(n >= 1, "simplex projection needs at least one coordinate");
    let mut u: Vec<f64> = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        // equal components pass or fail together, so ties are included
        if uj - t > 0.0 {
            theta = t;
        }
    }
    Vector::from_raw(x.iter().map(|xi| (xi - theta).max(0.0)).collect())
}

pub fn project_box(x: &Vector, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_raw(x.iter().zip(lo.iter().zip(hi.iter())).map(|(xi, (l, h))| xi.clamp(*l, *h)).collect())
}

/// Exact minimizer of `½xᵀSx − cᵀx + (weight/2)‖x − anchor‖²`.
pub fn prox_quadratic(s: &Matrix, c: &Vector, anchor: &Vector, weight: f64) -> Result<Vector> {
    if s.rows() != c.dim() || c.dim() != anchor.dim() {
        return Err(Error::Structure("prox_quadratic dimension mismatch".into()));
    }
    let system = s + &Matrix::scalar(s.rows(), weight);
    let rhs = Vector::lincomb(1.0, c, weight, anchor);
    Ok(solve_spd(&system, &rhs)?)
}

fn is_psd(s: &Matrix) -> bool {
    let shift = 1e-10 * (1.0 + s.max_abs());
    matches!(cholesky_pd_check(&(s + &Matrix::scalar(s.rows(), shift)), 1e-14), Ok(c) if c.is_pd())
}

impl ProxOp {
    /// The zero function on `Rⁿ`.
    pub fn zero(n: usize) -> Self {
        ProxOp::Quadratic { s: Matrix::zeros(n, n), c: Vector::zeros(n) }
    }

    /// `½‖x − a‖²` up to the constant `½‖a‖²`.
    pub fn squared_distance(a: Vector) -> Self {
        ProxOp::Quadratic { s: Matrix::identity(a.dim()), c: a }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProxOp::SoftThreshold { weight } if !(*weight >= 0.0) => {
                Err(Error::InvalidParameter(format!("soft-threshold weight {weight} < 0")))
            }
            ProxOp::Box { lo, hi } => {
                if lo.dim() != hi.dim() {
                    return Err(Error::Structure("box bounds differ in length".into()));
                }
                if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidParameter("box has lo > hi".into()));
                }
                Ok(())
            }
            ProxOp::Quadratic { s, c } => {
                if !s.is_square() || s.rows() != c.dim() {
                    return Err(Error::Structure("quadratic S and c disagree in size".into()));
                }
                if s.asymmetry() > 1e-12 * (1.0 + s.max_abs()) {
                    return Err(Error::InvalidParameter("quadratic S is not symmetric".into()));
                }
                if !is_psd(s) {
                    return Err(Error::InvalidParameter("quadratic S is not positive semidefinite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Fixed dimension of the operator, if it has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxOp::Box { lo, .. } => Some(lo.dim()),
            ProxOp::Quadratic { c, .. } => Some(c.dim()),
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, ProxOp::Quadratic { .. })
    }

    /// `f(x)`; indicators return `+∞` outside their set (with slack [`DOMAIN_TOL`]).
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            ProxOp::SoftThreshold { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            ProxOp::Box { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(v, (l, h))| *v >= l - DOMAIN_TOL && *v <= h + DOMAIN_TOL);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxOp::Simplex => {
                let sum: f64 = x.iter().sum();
                if x.iter().all(|v| *v >= -DOMAIN_TOL) && (sum - 1.0).abs() <= DOMAIN_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxOp::Quadratic { s, c } => 0.5 * x.dot(&s.matvec(x)) - c.dot(x),
        }
    }

    /// `∇f(x)` for smooth operators.
    pub fn gradient(&self, x: &Vector) -> Option<Vector> {
        match self {
            ProxOp::Quadratic { s, c } => Some(&s.matvec(x) - c),
            _ => None,
        }
    }

    /// `argmin_z step·f(z) + ½‖z − x‖²`
    pub fn prox(&self, x: &Vector, step: f64) -> Result<Vector> {
        self.minimize_with_quadratic(step, &Matrix::identity(x.dim()), x)
    }

    /// `argmin_x scale·f(x) + ½xᵀKx − dᵀx`, exactly.
    pub fn minimize_with_quadratic(&self, scale: f64, k: &Matrix, d: &Vector) -> Result<Vector> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("subproblem scale {scale} must be positive")));
        }
        if !k.is_square() || k.rows() != d.dim() || self.dim().is_some_and(|n| n != d.dim()) {
            return Err(Error::Structure("subproblem dimensions disagree".into()));
        }
        if let ProxOp::Quadratic { s, c } = self {
            let system = &s.scale(scale) + k;
            let rhs = Vector::lincomb(scale, c, 1.0, d);
            return Ok(solve_spd(&system, &rhs)?);
        }
        let kappa = k.as_scalar_identity(SCALAR_TOL).filter(|k| *k > 0.0).ok_or_else(|| Error::Subproblem {
            block: "nonsmooth".into(),
            reason: "quadratic coupling must be a positive multiple of the identity".into(),
        })?;
        let point = d.scale(1.0 / kappa);
        Ok(match self {
            ProxOp::SoftThreshold { weight } => soft_threshold_unchecked(&point, scale * weight / kappa),
            ProxOp::Box { lo, hi } => project_box(&point, lo, hi),
            ProxOp::Simplex => project_simplex(&point),
            ProxOp::Quadratic { .. } => unreachable!(),
        })
    }
}
