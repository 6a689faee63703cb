//! The generic prediction-correction engine.
//!
//! A scheme is a triple `(L, Q, M)`. The prediction step produces `w̃` with
//! `0 ∈ T(w̃) + LᵀQL(w̃ − w)`; the correction step moves the image state
//! `v = Lw` to `v − M(v − Lw̃)`. The faster variant evaluates the
//! subdifferential part at an auxiliary point `w̆` and everything linear at the
//! extrapolation `w̃ = (1/τ)w̆ − ((1−τ)/τ)w̆ᵏ⁻¹`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::block::{BlockLayout, BlockVector};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_pd_check, weighted_norm_sq, LinalgError, Lu, Matrix, Vector};
use crate::schedule::{TauSchedule, DEFAULT_TAU_INIT};

/// Default pivot tolerance for [`certify`].
pub const CERTIFY_TOL: f64 = 1e-10;

/// Largest relative asymmetry of `QM⁻¹` accepted before symmetrizing.
pub const H_ASYMMETRY_TOL: f64 = 1e-8;

/// Default residual floor for the optional early exit.
pub const RESIDUAL_FLOOR: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionSpec {
    l: Matrix,
    q: Matrix,
    m: Matrix,
}

impl CorrectionSpec {
    pub fn new(l: Matrix, q: Matrix, m: Matrix) -> Result<Self> {
        let n = l.rows();
        if !q.is_square() || !m.is_square() || q.rows() != n || m.rows() != n {
            return Err(Error::Structure(format!(
                "Q is {}x{}, M is {}x{}, but L maps into dimension {n}",
                q.rows(),
                q.cols(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(CorrectionSpec { l, q, m })
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    /// Dimension of the image state `v`.
    pub fn v_dim(&self) -> usize {
        self.l.rows()
    }

    /// Dimension of the variable `w`.
    pub fn w_dim(&self) -> usize {
        self.l.cols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCertificate {
    pub h: Matrix,
    pub g: Matrix,
    pub h_min_pivot: f64,
    pub g_min_pivot: f64,
    pub satisfied: bool,
}

/// Pivots and verdict of a certificate, without the matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub h_min_pivot: f64,
    pub g_min_pivot: f64,
    pub satisfied: bool,
}

impl ConvergenceCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary { h_min_pivot: self.h_min_pivot, g_min_pivot: self.g_min_pivot, satisfied: self.satisfied }
    }

    /// `‖v‖²_H`
    pub fn h_norm_sq(&self, v: &Vector) -> Result<f64> {
        Ok(weighted_norm_sq(&self.h, v)?)
    }
}

/// Build `H = QM⁻¹` and `G = Qᵀ + Q − MᵀHM` and test both for positive definiteness.
pub fn certify(spec: &CorrectionSpec, tol: f64) -> Result<ConvergenceCertificate> {
    let (q, m) = (&spec.q, &spec.m);
    // HM = Q  ⇔  MᵀHᵀ = Qᵀ
    let lu = Lu::factor(&m.transpose()).map_err(Error::SingularCorrection)?;
    let h_raw = lu.solve_matrix(&q.transpose()).transpose();
    let allowed = H_ASYMMETRY_TOL * (1.0 + h_raw.max_abs());
    let asymmetry = h_raw.asymmetry();
    if !(asymmetry <= allowed) {
        return Err(Error::AsymmetricWeight { asymmetry, allowed });
    }
    let h = h_raw.symmetrize();
    let g = (&(&q.transpose() + q) - &m.transpose().matmul(&h).matmul(m)).symmetrize();
    let h_check = cholesky_pd_check(&h, tol)?;
    let g_check = cholesky_pd_check(&g, tol)?;
    Ok(ConvergenceCertificate {
        satisfied: h_check.is_pd() && g_check.is_pd(),
        h_min_pivot: h_check.min_pivot(),
        g_min_pivot: g_check.min_pivot(),
        h,
        g,
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("extrapolation weight {tau} outside (0, 1]")))
    }
}

/// `(1/τ)·curr − ((1−τ)/τ)·prev`
pub fn extrapolate_vector(curr: &Vector, prev: &Vector, tau: f64) -> Result<Vector> {
    check_tau(tau)?;
    if curr.dim() != prev.dim() {
        return Err(LinalgError::DimensionMismatch(format!("{} vs {}", curr.dim(), prev.dim())).into());
    }
    Ok(Vector::lincomb(1.0 / tau, curr, -(1.0 - tau) / tau, prev))
}

/// `w̃ᵏ = (1/τᵏ)w̆ᵏ − ((1−τᵏ)/τᵏ)w̆ᵏ⁻¹`
pub fn extrapolate(breve_curr: &BlockVector, breve_prev: &BlockVector, tau: f64) -> Result<BlockVector> {
    check_tau(tau)?;
    BlockVector::lincomb(1.0 / tau, breve_curr, -(1.0 - tau) / tau, breve_prev)
}

/// `vᵏ − M(vᵏ − ṽᵏ)`
pub fn correct(v_curr: &Vector, v_tilde: &Vector, m: &Matrix) -> Result<Vector> {
    if v_curr.dim() != v_tilde.dim() {
        return Err(LinalgError::DimensionMismatch(format!("{} vs {}", v_curr.dim(), v_tilde.dim())).into());
    }
    if m.rows() != v_curr.dim() || m.cols() != v_curr.dim() {
        return Err(LinalgError::DimensionMismatch(format!("{} vs {}", v_curr.dim(), m.cols())).into());
    }
    Ok(v_curr - &m.matvec(&(v_curr - v_tilde)))
}

/// `‖M·diff‖²_H`, with `diff = vᵏ − ṽᵏ` (baseline) or `v̆ᵏ − v̆ᵏ⁻¹` (faster).
pub fn pointwise_residual(certificate: &ConvergenceCertificate, m: &Matrix, diff: &Vector) -> Result<f64> {
    if m.cols() != diff.dim() {
        return Err(LinalgError::DimensionMismatch(format!("{} vs {}", m.cols(), diff.dim())).into());
    }
    certificate.h_norm_sq(&m.matvec(diff))
}

/// Output of a faster prediction step.
#[derive(Clone, Debug, PartialEq)]
pub struct FasterPrediction {
    pub breve: BlockVector,
    pub tilde: BlockVector,
}

/// A concrete prediction step together with its correction matrices.
///
/// Predictors read the current iterate only through the image state `v`.
pub trait Predictor: Send + Sync {
    fn layout(&self) -> &Arc<BlockLayout>;

    fn correction(&self) -> &CorrectionSpec;

    /// `Lw`
    fn lift(&self, w: &BlockVector) -> Vector {
        self.correction().l().matvec(w.values())
    }

    /// Baseline prediction `w̃ᵏ` from `vᵏ`.
    fn predict(&self, v: &Vector) -> Result<BlockVector>;

    /// Faster prediction `(w̆ᵏ, w̃ᵏ)` from `vᵏ` and `w̆ᵏ⁻¹`. `tau = 1` is accepted
    /// and reproduces [`Predictor::predict`].
    fn predict_faster(&self, v: &Vector, breve_prev: &BlockVector, tau: f64) -> Result<FasterPrediction>;
}

/// Problem-side quantities recorded along a run.
pub trait Metrics: Send + Sync {
    /// `θ(u)`
    fn objective(&self, w: &BlockVector) -> f64;

    /// Constraint violation `‖Ax − b‖`, or 0 when there is no constraint.
    fn feasibility(&self, w: &BlockVector) -> f64;

    /// `θ(û) − θ(u_ref) − (w_ref − ŵ)ᵀF(w_ref)`
    fn gap_at(&self, w_hat: &BlockVector, w_ref: &BlockVector) -> Result<f64>;

    fn w_star(&self) -> Option<&BlockVector>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    Faster,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Faster => "faster",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "faster" => Ok(Mode::Faster),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub budget: usize,
    /// Stop once the pointwise residual drops below this value.
    pub residual_floor: Option<f64>,
}

impl StoppingRule {
    pub fn budget(budget: usize) -> Self {
        StoppingRule { budget, residual_floor: None }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub mode: Mode,
    pub stop: StoppingRule,
    pub tau_init: f64,
    pub allow_uncertified: bool,
    /// Starting point `w⁰`; zero when absent.
    pub initial: Option<BlockVector>,
}

impl RunOptions {
    pub fn new(mode: Mode, budget: usize) -> Self {
        RunOptions {
            mode,
            stop: StoppingRule::budget(budget),
            tau_init: DEFAULT_TAU_INIT,
            allow_uncertified: false,
            initial: None,
        }
    }
}

/// Measurements taken after iteration `k`.
///
/// In baseline mode the gap, feasibility and objective refer to the ergodic
/// average `w̄ᵏ` of `w̃⁰..w̃ᵏ`; in faster mode they refer to `w̆ᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// `τᵏ`, or 1 in baseline mode.
    pub tau: f64,
    pub gap: Option<f64>,
    pub feasibility: f64,
    /// `‖M(vᵏ − ṽᵏ)‖²_H` (baseline) or `‖M(v̆ᵏ − v̆ᵏ⁻¹)‖²_H` (faster).
    pub pointwise_residual: f64,
    pub objective: f64,
    /// `‖vᵏ⁺¹ − v*‖²_H`
    pub state_dist_h: Option<f64>,
    /// `‖vᵏ⁺¹ − v*‖`
    pub state_dist: Option<f64>,
    /// `(1/τᵏ)·gap(w̆ᵏ) + ½‖vᵏ⁺¹ − v*‖²_H`, faster mode only.
    pub lyapunov: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub mode: Mode,
    pub tau_init: f64,
    pub certificate: CertificateSummary,
    /// False when the run went ahead on an unsatisfied certificate.
    pub certified: bool,
    pub records: Vec<TraceRecord>,
    /// `‖v⁰ − v*‖²_H`
    pub initial_dist_h: Option<f64>,
    /// Image state after the last correction.
    pub final_state: Vector,
    /// The point the last record's gap refers to.
    pub final_point: Option<BlockVector>,
    pub failure: Option<String>,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Drive the prediction-correction loop.
///
/// Fails up front on invalid options or an unsatisfied certificate (unless
/// overridden). A failing subproblem ends the run early; the partial trace is
/// returned with [`IterationTrace::failure`] set.
pub fn run(
    predictor: &dyn Predictor,
    metrics: &dyn Metrics,
    certificate: &ConvergenceCertificate,
    options: &RunOptions,
) -> Result<IterationTrace> {
    if !certificate.satisfied && !options.allow_uncertified {
        return Err(Error::Uncertified { h_min_pivot: certificate.h_min_pivot, g_min_pivot: certificate.g_min_pivot });
    }
    let schedule = TauSchedule::new(options.tau_init)?;
    let layout = predictor.layout().clone();
    let spec = predictor.correction();
    let w0 = match &options.initial {
        Some(w) => {
            if **w.layout() != *layout {
                return Err(Error::Structure("initial point does not match the solver's blocks".into()));
            }
            w.clone()
        }
        None => BlockVector::zeros(layout.clone()),
    };
    let w_star = metrics.w_star();
    let v_star = w_star.map(|w| predictor.lift(w));
    let h_dist = |v: &Vector| -> Result<Option<(f64, f64)>> {
        match &v_star {
            Some(vs) => {
                let d = v - vs;
                Ok(Some((certificate.h_norm_sq(&d)?, d.norm())))
            }
            None => Ok(None),
        }
    };

    let mut v = predictor.lift(&w0);
    let mut trace = IterationTrace {
        mode: options.mode,
        tau_init: options.tau_init,
        certificate: certificate.summary(),
        certified: certificate.satisfied,
        records: Vec::with_capacity(options.stop.budget),
        initial_dist_h: h_dist(&v)?.map(|d| d.0),
        final_state: v.clone(),
        final_point: None,
        failure: None,
    };

    let mut ergodic_sum = Vector::zeros(layout.dim());
    let mut breve_prev = w0;
    let mut v_breve_prev = v.clone();

    for k in 0..options.stop.budget {
        let step = match options.mode {
            Mode::Baseline => predictor.predict(&v).map(|tilde| (None, tilde)),
            Mode::Faster => {
                predictor.predict_faster(&v, &breve_prev, schedule.tau(k)).map(|p| (Some(p.breve), p.tilde))
            }
        };
        let (breve, tilde) = match step {
            Ok(s) => s,
            Err(e) => {
                trace.failure = Some(format!("iteration {k}: {e}"));
                break;
            }
        };
        let v_tilde = predictor.lift(&tilde);
        let v_next = correct(&v, &v_tilde, spec.m())?;
        if !v_next.is_finite() || !tilde.values().is_finite() {
            trace.failure = Some(format!("iteration {k}: non-finite iterate"));
            break;
        }
        let dist = h_dist(&v_next)?;

        let (tau, point, residual) = match breve {
            None => {
                ergodic_sum.axpy(1.0, tilde.values());
                let avg = BlockVector::new(layout.clone(), ergodic_sum.scale(1.0 / (k + 1) as f64))?;
                (1.0, avg, pointwise_residual(certificate, spec.m(), &(&v - &v_tilde))?)
            }
            Some(breve) => {
                let v_breve = predictor.lift(&breve);
                let residual = pointwise_residual(certificate, spec.m(), &(&v_breve - &v_breve_prev))?;
                v_breve_prev = v_breve;
                breve_prev = breve.clone();
                (schedule.tau(k), breve, residual)
            }
        };

        let gap = match w_star {
            Some(ws) => Some(metrics.gap_at(&point, ws)?),
            None => None,
        };
        let lyapunov = match (options.mode, gap, dist) {
            (Mode::Faster, Some(g), Some((dh, _))) => Some(g / tau + 0.5 * dh),
            _ => None,
        };
        trace.records.push(TraceRecord {
            k,
            tau,
            gap,
            feasibility: metrics.feasibility(&point),
            pointwise_residual: residual,
            objective: metrics.objective(&point),
            state_dist_h: dist.map(|d| d.0),
            state_dist: dist.map(|d| d.1),
            lyapunov,
        });
        v = v_next;
        trace.final_state = v.clone();
        trace.final_point = Some(point);
        if options.stop.residual_floor.is_some_and(|floor| residual < floor) {
            break;
        }
    }
    Ok(trace)
}
