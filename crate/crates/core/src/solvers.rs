//! Concrete prediction steps for the three problem families.
//!
//! * two-block: `min f₁(x₁) + f₂(x₂)` s.t. `A₁x₁ + A₂x₂ = b`, a proximal
//!   Peaceman–Rachford-type splitting with relaxation `(r, s)`;
//! * multi-block: `min Σfᵢ(xᵢ)` s.t. `ΣAᵢxᵢ = b`, a Gauss–Seidel pass whose
//!   correction lives in the image space `(√βAᵢxᵢ, λ/√β)`;
//! * saddle: `min_x max_y f(x) − yᵀAx − g(y)`, a primal-dual step with
//!   extrapolation weight `α`.
//!
//! Every block subproblem is `min c·f(x) + ½xᵀKx − dᵀx`. The faster variant
//! solves `min τ·f(x̆) + ½x̆ᵀKx̆ − ((1−τ)Kx̆ᵏ⁻¹ + τd)ᵀx̆`, whose optimality
//! condition is the baseline one with `∂f` taken at `x̆` and `K` applied to the
//! extrapolation `x̃`. With `τ = 1` both coincide.

use std::sync::Arc;

use crate::block::{BlockLayout, BlockVector};
use crate::error::{Error, Result};
use crate::framework::{certify, ConvergenceCertificate, CorrectionSpec, FasterPrediction, Predictor, CERTIFY_TOL};
use crate::linalg::{cholesky_pd_check, spectral_radius_gram, Matrix, Vector};
use crate::prox::ProxOp;

/// Margin by which parameters must sit inside the open certified regions.
pub const REGION_MARGIN: f64 = 1e-12;

const RANK_TOL: f64 = 1e-10;
const SCALAR_TOL: f64 = 1e-10;

/// Safety factor of the default linearizing proximal weight.
pub const DEFAULT_PROXIMAL_FACTOR: f64 = 1.01;

fn spectral_radius(a: &Matrix) -> f64 {
    spectral_radius_gram(a, 1e-13, 100_000).value
}

/// `P = κI − βA₁ᵀA₁` with `κ = 1.01·β·ρ(A₁ᵀA₁)`, so that `βA₁ᵀA₁ + P = κI`.
pub fn default_proximal(a1: &Matrix, beta: f64) -> Matrix {
    let kappa = DEFAULT_PROXIMAL_FACTOR * beta * spectral_radius(a1);
    let kappa = if kappa > 0.0 { kappa } else { beta };
    (&Matrix::scalar(a1.cols(), kappa) - &a1.gram().scale(beta)).symmetrize()
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

fn check_op(name: &str, op: &ProxOp, n: usize, k: &Matrix) -> Result<()> {
    op.validate()?;
    if op.dim().is_some_and(|d| d != n) {
        return Err(Error::Structure(format!("{name} acts on dimension {:?}, block has {n}", op.dim())));
    }
    if !op.is_smooth() && k.as_scalar_identity(SCALAR_TOL).is_none_or(|kappa| kappa <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} is nonsmooth, so its subproblem needs a quadratic term proportional to the identity"
        )));
    }
    Ok(())
}

fn full_column_rank(a: &Matrix) -> bool {
    matches!(cholesky_pd_check(&a.gram(), RANK_TOL), Ok(c) if c.is_pd())
}

fn interval(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if x > lo + REGION_MARGIN && x < hi - REGION_MARGIN {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} outside the open interval ({lo}, {hi})")))
    }
}

/// One block subproblem, returning `(x̆, x̃)`.
fn block_step(
    name: &str,
    op: &ProxOp,
    k: &Matrix,
    d: &Vector,
    prev: Option<&[f64]>,
    tau: f64,
) -> Result<(Vector, Vector)> {
    let fail = |e: Error| Error::Subproblem { block: name.to_string(), reason: e.to_string() };
    match prev {
        None => {
            let x = op.minimize_with_quadratic(1.0, k, d).map_err(fail)?;
            Ok((x.clone(), x))
        }
        Some(prev) => {
            let kp = k.matvec(prev);
            let prev = Vector::new(prev.to_vec())?;
            let rhs = Vector::lincomb(1.0 - tau, &kp, tau, d);
            let breve = op.minimize_with_quadratic(tau, k, &rhs).map_err(fail)?;
            let tilde = Vector::lincomb(1.0 / tau, &breve, -(1.0 - tau) / tau, &prev);
            Ok((breve, tilde))
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau = {tau} outside (0, 1]")))
    }
}

fn as_slices(xs: &[Vector]) -> Vec<&[f64]> {
    xs.iter().map(|x| x.as_slice()).collect()
}

fn assemble(layout: &Arc<BlockLayout>, parts: &[&[f64]]) -> Result<BlockVector> {
    BlockVector::from_blocks(layout.clone(), parts)
}

// ---------------------------------------------------------------- two-block

#[derive(Clone, Debug, PartialEq)]
pub struct TwoBlockSpec {
    pub f1: ProxOp,
    pub f2: ProxOp,
    pub a1: Matrix,
    pub a2: Matrix,
    pub b: Vector,
    pub beta: f64,
    pub r: f64,
    pub s: f64,
    pub p: Matrix,
}

impl TwoBlockSpec {
    /// Spec with the default linearizing proximal weight.
    #[allow(clippy::too_many_arguments)]
    pub fn with_default_proximal(
        f1: ProxOp,
        f2: ProxOp,
        a1: Matrix,
        a2: Matrix,
        b: Vector,
        beta: f64,
        r: f64,
        s: f64,
    ) -> Self {
        let p = default_proximal(&a1, beta);
        TwoBlockSpec { f1, f2, a1, a2, b, beta, r, s, p }
    }

    pub fn n1(&self) -> usize {
        self.a1.cols()
    }

    pub fn n2(&self) -> usize {
        self.a2.cols()
    }

    pub fn l(&self) -> usize {
        self.b.dim()
    }

    fn k1(&self) -> Matrix {
        (&self.a1.gram().scale(self.beta) + &self.p).symmetrize()
    }

    fn k2(&self) -> Matrix {
        self.a2.gram().scale(self.beta)
    }

    /// Dimensions, `β > 0`, `P` symmetric PSD, `A₂` of full column rank, and
    /// solvable subproblems. Does not check `(r, s)`.
    pub fn validate(&self) -> Result<()> {
        let l = self.l();
        if self.a1.rows() != l || self.a2.rows() != l {
            return Err(Error::Structure(format!(
                "A1 has {} rows, A2 has {}, b has {l}",
                self.a1.rows(),
                self.a2.rows()
            )));
        }
        positive("beta", self.beta)?;
        if !self.r.is_finite() || !self.s.is_finite() {
            return Err(Error::InvalidParameter("r and s must be finite".into()));
        }
        if self.p.rows() != self.n1() || self.p.cols() != self.n1() {
            return Err(Error::Structure(format!("P must be {0}x{0}", self.n1())));
        }
        ProxOp::Quadratic { s: self.p.clone(), c: Vector::zeros(self.n1()) }
            .validate()
            .map_err(|_| Error::InvalidParameter("P must be symmetric positive semidefinite".into()))?;
        if !full_column_rank(&self.a2) {
            return Err(Error::InvalidParameter("A2 must have full column rank".into()));
        }
        check_op("f1", &self.f1, self.n1(), &self.k1())?;
        check_op("f2", &self.f2, self.n2(), &self.k2())
    }

    /// `r ∈ (−1, 1)`, `s ∈ (0, 1)`, `r + s > 0`.
    pub fn check_region(&self) -> Result<()> {
        interval("r", self.r, -1.0, 1.0)?;
        interval("s", self.s, 0.0, 1.0)?;
        if self.r + self.s > REGION_MARGIN {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("r + s = {} must be positive", self.r + self.s)))
        }
    }

    pub fn correction_spec(&self) -> CorrectionSpec {
        let (n1, n2, l) = (self.n1(), self.n2(), self.l());
        let n = n1 + n2 + l;
        let mut q = Matrix::zeros(n, n);
        q.set_block(0, 0, &self.p);
        q.set_block(n1, n1, &self.k2());
        q.set_block(n1, n1 + n2, &self.a2.transpose().scale(-self.r));
        q.set_block(n1 + n2, n1, &self.a2.scale(-1.0));
        q.set_block(n1 + n2, n1 + n2, &Matrix::scalar(l, 1.0 / self.beta));
        let mut m = Matrix::identity(n);
        m.set_block(n1 + n2, n1, &self.a2.scale(-self.s * self.beta));
        m.set_block(n1 + n2, n1 + n2, &Matrix::scalar(l, self.r + self.s));
        CorrectionSpec::new(Matrix::identity(n), q, m).expect("square blocks")
    }
}

#[derive(Clone, Debug)]
pub struct TwoBlockSolver {
    spec: TwoBlockSpec,
    layout: Arc<BlockLayout>,
    correction: CorrectionSpec,
    k1: Matrix,
    k2: Matrix,
}

impl TwoBlockSolver {
    pub fn new(spec: TwoBlockSpec) -> Result<Self> {
        spec.validate()?;
        Ok(TwoBlockSolver {
            layout: BlockLayout::new(&[("x1", spec.n1()), ("x2", spec.n2()), ("lambda", spec.l())]),
            correction: spec.correction_spec(),
            k1: spec.k1(),
            k2: spec.k2(),
            spec,
        })
    }

    pub fn spec(&self) -> &TwoBlockSpec {
        &self.spec
    }

    pub fn certify(&self) -> Result<ConvergenceCertificate> {
        certify(&self.correction, CERTIFY_TOL)
    }

    fn step(&self, v: &Vector, prev: Option<&BlockVector>, tau: f64) -> Result<FasterPrediction> {
        let sp = &self.spec;
        let w = BlockVector::new(self.layout.clone(), v.clone())?;
        let (x1, x2, lam) = (w.block(0), w.block(1), w.block(2));
        let prev_block = |i: usize| prev.map(|p| p.block(i));

        let a2x2_b = &sp.a2.matvec(x2) - &sp.b;
        let d1 = &(&sp.a1.tr_matvec(lam) - &sp.a1.tr_matvec(&a2x2_b).scale(sp.beta)) + &sp.p.matvec(x1);
        let (x1_breve, x1_tilde) = block_step("x1", &sp.f1, &self.k1, &d1, prev_block(0), tau)?;

        let a1x1 = sp.a1.matvec(&x1_tilde);
        let residual = &a1x1 + &a2x2_b;
        let lam = Vector::new(lam.to_vec())?;
        let lam_tilde = Vector::lincomb(1.0, &lam, -sp.beta, &residual);
        let lam_half = Vector::lincomb(1.0, &lam, -sp.r * sp.beta, &residual);

        let d2 = &sp.a2.tr_matvec(&lam_half) - &sp.a2.tr_matvec(&(&a1x1 - &sp.b)).scale(sp.beta);
        let (x2_breve, x2_tilde) = block_step("x2", &sp.f2, &self.k2, &d2, prev_block(1), tau)?;

        let lam_breve = match prev_block(2) {
            Some(p) => Vector::lincomb(tau, &lam_tilde, 1.0 - tau, &Vector::new(p.to_vec())?),
            None => lam_tilde.clone(),
        };
        Ok(FasterPrediction {
            breve: assemble(&self.layout, &[&x1_breve, &x2_breve, &lam_breve])?,
            tilde: assemble(&self.layout, &[&x1_tilde, &x2_tilde, &lam_tilde])?,
        })
    }
}

impl Predictor for TwoBlockSolver {
    fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    fn correction(&self) -> &CorrectionSpec {
        &self.correction
    }

    fn lift(&self, w: &BlockVector) -> Vector {
        w.values().clone()
    }

    fn predict(&self, v: &Vector) -> Result<BlockVector> {
        Ok(self.step(v, None, 1.0)?.tilde)
    }

    fn predict_faster(&self, v: &Vector, breve_prev: &BlockVector, tau: f64) -> Result<FasterPrediction> {
        check_tau(tau)?;
        breve_prev.check_same_structure(&BlockVector::zeros(self.layout.clone()))?;
        self.step(v, Some(breve_prev), tau)
    }
}

// -------------------------------------------------------------- multi-block

#[derive(Clone, Debug, PartialEq)]
pub struct MultiBlockSpec {
    pub fs: Vec<ProxOp>,
    pub a: Vec<Matrix>,
    pub b: Vector,
    pub beta: f64,
    pub alpha: f64,
}

impl MultiBlockSpec {
    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn l(&self) -> usize {
        self.b.dim()
    }

    /// Dimensions, `β > 0`, `α ≠ 0` and solvable subproblems. Does not check
    /// `α ∈ (0, 1)`.
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.fs.len() != self.a.len() {
            return Err(Error::Structure(format!("{} functions for {} blocks", self.fs.len(), self.a.len())));
        }
        if let Some(i) = self.a.iter().position(|a| a.rows() != self.l()) {
            return Err(Error::Structure(format!("A{} has {} rows, b has {}", i + 1, self.a[i].rows(), self.l())));
        }
        positive("beta", self.beta)?;
        if !(self.alpha.is_finite() && self.alpha != 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} makes M singular", self.alpha)));
        }
        for (i, (f, a)) in self.fs.iter().zip(&self.a).enumerate() {
            check_op(&format!("f{}", i + 1), f, a.cols(), &a.gram().scale(self.beta))?;
        }
        Ok(())
    }

    pub fn check_region(&self) -> Result<()> {
        interval("alpha", self.alpha, 0.0, 1.0)
    }

    pub fn correction_spec(&self) -> CorrectionSpec {
        let (m, l) = (self.m(), self.l());
        let n = (m + 1) * l;
        let id = Matrix::identity(l);
        let sb = self.beta.sqrt();
        let mut q = Matrix::zeros(n, n);
        let mut mm = Matrix::zeros(n, n);
        for i in 0..m {
            for j in 0..=i {
                q.set_block(i * l, j * l, &id);
            }
            q.set_block(i * l, m * l, &id);
            mm.set_block(i * l, i * l, &id.scale(self.alpha));
            if i + 1 < m {
                mm.set_block(i * l, (i + 1) * l, &id.scale(-self.alpha));
            }
        }
        q.set_block(m * l, m * l, &id);
        mm.set_block(m * l, 0, &id.scale(-self.alpha));
        mm.set_block(m * l, m * l, &id);
        let scaled: Vec<Matrix> = self.a.iter().map(|a| a.scale(sb)).collect();
        let lam = Matrix::scalar(l, 1.0 / sb);
        let mut blocks: Vec<&Matrix> = scaled.iter().collect();
        blocks.push(&lam);
        CorrectionSpec::new(Matrix::block_diag(&blocks), q, mm).expect("square blocks")
    }
}

#[derive(Clone, Debug)]
pub struct MultiBlockSolver {
    spec: MultiBlockSpec,
    layout: Arc<BlockLayout>,
    correction: CorrectionSpec,
    ks: Vec<Matrix>,
}

impl MultiBlockSolver {
    pub fn new(spec: MultiBlockSpec) -> Result<Self> {
        spec.validate()?;
        let mut blocks: Vec<(String, usize)> =
            spec.a.iter().enumerate().map(|(i, a)| (format!("x{}", i + 1), a.cols())).collect();
        blocks.push(("lambda".into(), spec.l()));
        Ok(MultiBlockSolver {
            layout: BlockLayout::new(&blocks),
            correction: spec.correction_spec(),
            ks: spec.a.iter().map(|a| a.gram().scale(spec.beta)).collect(),
            spec,
        })
    }

    pub fn spec(&self) -> &MultiBlockSpec {
        &self.spec
    }

    pub fn certify(&self) -> Result<ConvergenceCertificate> {
        certify(&self.correction, CERTIFY_TOL)
    }

    fn step(&self, v: &Vector, prev: Option<&BlockVector>, tau: f64) -> Result<FasterPrediction> {
        let sp = &self.spec;
        let (m, l) = (sp.m(), sp.l());
        if v.dim() != (m + 1) * l {
            return Err(Error::Structure(format!("image state has dimension {}, expected {}", v.dim(), (m + 1) * l)));
        }
        let sb = sp.beta.sqrt();
        let image = |i: usize| Vector::new(v[i * l..(i + 1) * l].to_vec());
        let lam = image(m)?.scale(sb);

        let mut breves = Vec::with_capacity(m + 1);
        let mut tildes = Vec::with_capacity(m + 1);
        // Σ_{j<i} Aⱼ(x̃ⱼ − xⱼᵏ)
        let mut shift = Vector::zeros(l);
        let mut total = Vector::zeros(l);
        for i in 0..m {
            let p_i = image(i)?.scale(1.0 / sb);
            let d = &sp.a[i].tr_matvec(&lam) - &sp.a[i].tr_matvec(&(&shift - &p_i)).scale(sp.beta);
            let name = self.layout.name(i);
            let (breve, tilde) = block_step(name, &sp.fs[i], &self.ks[i], &d, prev.map(|p| p.block(i)), tau)?;
            let ax = sp.a[i].matvec(&tilde);
            shift = &shift + &(&ax - &p_i);
            total = &total + &ax;
            breves.push(breve);
            tildes.push(tilde);
        }
        let lam_tilde = Vector::lincomb(1.0, &lam, -sp.beta, &(&total - &sp.b));
        let lam_breve = match prev {
            Some(p) => Vector::lincomb(tau, &lam_tilde, 1.0 - tau, &p.block_vector(m)),
            None => lam_tilde.clone(),
        };
        breves.push(lam_breve);
        tildes.push(lam_tilde);
        Ok(FasterPrediction {
            breve: assemble(&self.layout, &as_slices(&breves))?,
            tilde: assemble(&self.layout, &as_slices(&tildes))?,
        })
    }
}

impl Predictor for MultiBlockSolver {
    fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    fn correction(&self) -> &CorrectionSpec {
        &self.correction
    }

    fn predict(&self, v: &Vector) -> Result<BlockVector> {
        Ok(self.step(v, None, 1.0)?.tilde)
    }

    fn predict_faster(&self, v: &Vector, breve_prev: &BlockVector, tau: f64) -> Result<FasterPrediction> {
        check_tau(tau)?;
        breve_prev.check_same_structure(&BlockVector::zeros(self.layout.clone()))?;
        self.step(v, Some(breve_prev), tau)
    }
}

// ------------------------------------------------------------------- saddle

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleSpec {
    pub f: ProxOp,
    pub g: ProxOp,
    /// Coupling matrix, `m × n` for `x ∈ Rⁿ`, `y ∈ Rᵐ`.
    pub a: Matrix,
    pub r: f64,
    pub s: f64,
    pub alpha: f64,
}

impl SaddleSpec {
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Dimensions, `r, s > 0` and `α ∈ [0, 1]`. Does not check the step-size
    /// condition.
    pub fn validate(&self) -> Result<()> {
        positive("r", self.r)?;
        positive("s", self.s)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        check_op("f", &self.f, self.n(), &Matrix::scalar(self.n(), self.r))?;
        check_op("g", &self.g, self.m(), &Matrix::scalar(self.m(), self.s))
    }

    /// `(1 − α + α²)·ρ(AᵀA)`
    pub fn step_threshold(&self) -> f64 {
        (1.0 - self.alpha + self.alpha * self.alpha) * spectral_radius(&self.a)
    }

    /// `rs > (1 − α + α²)·ρ(AᵀA)`
    pub fn check_region(&self) -> Result<()> {
        let threshold = self.step_threshold();
        if self.r * self.s > threshold + REGION_MARGIN {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("rs = {} does not exceed {threshold}", self.r * self.s)))
        }
    }

    pub fn correction_spec(&self) -> CorrectionSpec {
        let (n, m) = (self.n(), self.m());
        let mut q = Matrix::zeros(n + m, n + m);
        q.set_block(0, 0, &Matrix::scalar(n, self.r));
        q.set_block(0, n, &self.a.transpose());
        q.set_block(n, 0, &self.a.scale(self.alpha));
        q.set_block(n, n, &Matrix::scalar(m, self.s));
        let mut mm = Matrix::identity(n + m);
        mm.set_block(n, 0, &self.a.scale(-(1.0 - self.alpha) / self.s));
        CorrectionSpec::new(Matrix::identity(n + m), q, mm).expect("square blocks")
    }
}

#[derive(Clone, Debug)]
pub struct SaddleSolver {
    spec: SaddleSpec,
    layout: Arc<BlockLayout>,
    correction: CorrectionSpec,
    kx: Matrix,
    ky: Matrix,
}

impl SaddleSolver {
    pub fn new(spec: SaddleSpec) -> Result<Self> {
        spec.validate()?;
        Ok(SaddleSolver {
            layout: BlockLayout::new(&[("x", spec.n()), ("y", spec.m())]),
            correction: spec.correction_spec(),
            kx: Matrix::scalar(spec.n(), spec.r),
            ky: Matrix::scalar(spec.m(), spec.s),
            spec,
        })
    }

    pub fn spec(&self) -> &SaddleSpec {
        &self.spec
    }

    pub fn certify(&self) -> Result<ConvergenceCertificate> {
        certify(&self.correction, CERTIFY_TOL)
    }

    fn step(&self, v: &Vector, prev: Option<&BlockVector>, tau: f64) -> Result<FasterPrediction> {
        let sp = &self.spec;
        let w = BlockVector::new(self.layout.clone(), v.clone())?;
        let (x, y) = (w.block_vector(0), w.block_vector(1));
        let dx = Vector::lincomb(sp.r, &x, 1.0, &sp.a.tr_matvec(&y));
        let (x_breve, x_tilde) = block_step("x", &sp.f, &self.kx, &dx, prev.map(|p| p.block(0)), tau)?;
        let x_bar = Vector::lincomb(1.0 + sp.alpha, &x_tilde, -sp.alpha, &x);
        let dy = Vector::lincomb(sp.s, &y, -1.0, &sp.a.matvec(&x_bar));
        let (y_breve, y_tilde) = block_step("y", &sp.g, &self.ky, &dy, prev.map(|p| p.block(1)), tau)?;
        Ok(FasterPrediction {
            breve: assemble(&self.layout, &[&x_breve, &y_breve])?,
            tilde: assemble(&self.layout, &[&x_tilde, &y_tilde])?,
        })
    }
}

impl Predictor for SaddleSolver {
    fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    fn correction(&self) -> &CorrectionSpec {
        &self.correction
    }

    fn lift(&self, w: &BlockVector) -> Vector {
        w.values().clone()
    }

    fn predict(&self, v: &Vector) -> Result<BlockVector> {
        Ok(self.step(v, None, 1.0)?.tilde)
    }

    fn predict_faster(&self, v: &Vector, breve_prev: &BlockVector, tau: f64) -> Result<FasterPrediction> {
        check_tau(tau)?;
        breve_prev.check_same_structure(&BlockVector::zeros(self.layout.clone()))?;
        self.step(v, Some(breve_prev), tau)
    }
}
