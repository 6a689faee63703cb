//! Test problems with ground-truth saddle points, and the metrics measured on them.
//!
//! Constrained problems `min Σfᵢ(xᵢ)` s.t. `ΣAᵢxᵢ = b` use `w = (x₁, …, x_m, λ)`,
//! `θ(u) = Σfᵢ(xᵢ)` and `F(w) = (−A₁ᵀλ, …, −A_mᵀλ, ΣAᵢxᵢ − b)`. Saddle problems
//! `min_x max_y f(x) − yᵀAx − g(y)` use `w = (x, y)`, `θ = f + g` and
//! `F(w) = (−Aᵀy, Ax)`. In both cases `0 ∈ T(w*) = ∂θ(w*) + F(w*)`.
//!
//! ## Random instances
//!
//! Instances are drawn from ChaCha8 seeded with `seed_from_u64(seed)`. Each real
//! is `u = 2·(next_u64() >> 11)/2⁵³ − 1`, uniform on `[−1, 1)`. Matrices are
//! filled row-major; the draw order of each generator is listed in its docs.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{BlockLayout, BlockVector};
use crate::error::{Error, Result};
use crate::framework::{certify, ConvergenceCertificate, Metrics, Predictor, CERTIFY_TOL};
use crate::linalg::{cholesky_pd_check, solve, spectral_radius_gram, Matrix, Vector};
use crate::prox::{soft_threshold, ProxOp};
use crate::solvers::{
    default_proximal, MultiBlockSolver, MultiBlockSpec, SaddleSolver, SaddleSpec, TwoBlockSolver, TwoBlockSpec,
};

pub use crate::framework::pointwise_residual;

const REDRAWS: usize = 5;

/// Tolerance for the oracle's stationarity and feasibility checks.
pub const ORACLE_TOL: f64 = 1e-10;

/// Seeded stream of uniform reals on `[−1, 1)`.
#[derive(Clone, Debug)]
pub struct UniformSource {
    rng: ChaCha8Rng,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        UniformSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn sample(&mut self) -> f64 {
        let mantissa = self.rng.next_u64() >> 11;
        2.0 * (mantissa as f64 / (1u64 << 53) as f64) - 1.0
    }

    pub fn vector(&mut self, n: usize) -> Vector {
        Vector::from_raw((0..n).map(|_| self.sample()).collect())
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::new(rows, cols, (0..rows * cols).map(|_| self.sample()).collect()).expect("finite draws")
    }

    /// A point of the probability simplex (normalized `|u| + 0.01`).
    pub fn simplex(&mut self, n: usize) -> Vector {
        let raw: Vec<f64> = (0..n).map(|_| self.sample().abs() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        Vector::from_raw(raw.into_iter().map(|x| x / total).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    TwoBlock,
    MultiBlock,
    Saddle,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::TwoBlock => "two-block",
            Family::MultiBlock => "multi-block",
            Family::Saddle => "saddle",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    TwoBlock(TwoBlockSpec),
    MultiBlock(MultiBlockSpec),
    Saddle(SaddleSpec),
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::TwoBlock(_) => Family::TwoBlock,
            InstanceSpec::MultiBlock(_) => Family::MultiBlock,
            InstanceSpec::Saddle(_) => Family::Saddle,
        }
    }

    /// Block functions in variable order.
    pub fn functions(&self) -> Vec<&ProxOp> {
        match self {
            InstanceSpec::TwoBlock(s) => vec![&s.f1, &s.f2],
            InstanceSpec::MultiBlock(s) => s.fs.iter().collect(),
            InstanceSpec::Saddle(s) => vec![&s.f, &s.g],
        }
    }

    /// Constraint blocks `Aᵢ` and `b`, for constrained families.
    fn constraint(&self) -> Option<(Vec<&Matrix>, &Vector)> {
        match self {
            InstanceSpec::TwoBlock(s) => Some((vec![&s.a1, &s.a2], &s.b)),
            InstanceSpec::MultiBlock(s) => Some((s.a.iter().collect(), &s.b)),
            InstanceSpec::Saddle(_) => None,
        }
    }
}

/// A problem instance together with its optional saddle point.
#[derive(Clone, Debug)]
pub struct VariationalInstance {
    spec: InstanceSpec,
    layout: Arc<BlockLayout>,
    w_star: Option<BlockVector>,
    seed: Option<u64>,
}

fn layout_for(spec: &InstanceSpec) -> Arc<BlockLayout> {
    match spec {
        InstanceSpec::TwoBlock(s) => BlockLayout::new(&[("x1", s.n1()), ("x2", s.n2()), ("lambda", s.l())]),
        InstanceSpec::MultiBlock(s) => {
            let mut blocks: Vec<(String, usize)> =
                s.a.iter().enumerate().map(|(i, a)| (format!("x{}", i + 1), a.cols())).collect();
            blocks.push(("lambda".into(), s.l()));
            BlockLayout::new(&blocks)
        }
        InstanceSpec::Saddle(s) => BlockLayout::new(&[("x", s.n()), ("y", s.m())]),
    }
}

impl VariationalInstance {
    /// Validates the spec, checks that the linear part of `F` is skew, and
    /// checks `w*` for structure and feasibility.
    pub fn new(spec: InstanceSpec, w_star: Option<Vector>, seed: Option<u64>) -> Result<Self> {
        match &spec {
            InstanceSpec::TwoBlock(s) => s.validate()?,
            InstanceSpec::MultiBlock(s) => s.validate()?,
            InstanceSpec::Saddle(s) => s.validate()?,
        }
        let layout = layout_for(&spec);
        let w_star = w_star.map(|w| BlockVector::new(layout.clone(), w)).transpose()?;
        let instance = VariationalInstance { spec, layout, w_star, seed };
        let (skew, _) = instance.f_affine();
        let asym = (&skew + &skew.transpose()).max_abs();
        if asym > 1e-14 * (1.0 + skew.max_abs()) {
            return Err(Error::Structure(format!("F is not skew (|S + Sᵀ| = {asym:e})")));
        }
        if let Some(ws) = &instance.w_star {
            let feas = instance.feasibility(ws);
            let scale = 1.0 + instance.spec.constraint().map_or(0.0, |(_, b)| b.norm_inf());
            if feas > ORACLE_TOL * scale {
                return Err(Error::Generation(format!("w* violates the constraint by {feas:e}")));
            }
            if !instance.theta(ws).is_finite() {
                return Err(Error::Generation("w* lies outside the domain of θ".into()));
            }
        }
        Ok(instance)
    }

    pub fn family(&self) -> Family {
        self.spec.family()
    }

    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn w_star(&self) -> Option<&BlockVector> {
        self.w_star.as_ref()
    }

    /// `θ(u)`
    pub fn theta(&self, w: &BlockVector) -> f64 {
        self.spec.functions().iter().enumerate().map(|(i, f)| f.value(&w.block_vector(i))).sum()
    }

    /// `F(w) = Sw + c` as the pair `(S, c)`.
    pub fn f_affine(&self) -> (Matrix, Vector) {
        let n = self.layout.dim();
        let mut s = Matrix::zeros(n, n);
        let mut c = Vector::zeros(n);
        match &self.spec {
            InstanceSpec::Saddle(sp) => {
                let (x, y) = (self.layout.range(0).start, self.layout.range(1).start);
                s.set_block(x, y, &sp.a.transpose().scale(-1.0));
                s.set_block(y, x, &sp.a);
            }
            spec => {
                let (blocks, b) = spec.constraint().expect("constrained family");
                let lam = self.layout.range(blocks.len()).start;
                for (i, a) in blocks.iter().enumerate() {
                    let xi = self.layout.range(i).start;
                    s.set_block(xi, lam, &a.transpose().scale(-1.0));
                    s.set_block(lam, xi, a);
                }
                c.as_mut_slice()[lam..].copy_from_slice(&-b);
            }
        }
        (s, c)
    }

    /// `F(w)`
    pub fn f_op(&self, w: &BlockVector) -> Vector {
        let (s, c) = self.f_affine();
        &s.matvec(w.values()) + &c
    }

    /// `∇θ` padded with zeros on multiplier blocks, when every block function is smooth.
    pub fn theta_gradient(&self, w: &BlockVector) -> Option<Vector> {
        let mut g = Vector::zeros(self.layout.dim());
        for (i, f) in self.spec.functions().iter().enumerate() {
            let gi = f.gradient(&w.block_vector(i))?;
            g.as_mut_slice()[self.layout.range(i)].copy_from_slice(&gi);
        }
        Some(g)
    }

    /// `T(w) = ∇θ(u) + F(w)` for smooth instances.
    pub fn t_op(&self, w: &BlockVector) -> Option<Vector> {
        Some(&self.theta_gradient(w)? + &self.f_op(w))
    }

    /// `θ(û) − θ(u_ref) − (w_ref − ŵ)ᵀF(w_ref)`
    pub fn gap_at(&self, w_hat: &BlockVector, w_ref: &BlockVector) -> Result<f64> {
        w_hat.check_same_structure(w_ref)?;
        let diff = w_ref.values() - w_hat.values();
        Ok(self.theta(w_hat) - self.theta(w_ref) - diff.dot(&self.f_op(w_ref)))
    }

    /// `L(x, λ) = Σfᵢ(xᵢ) − λᵀ(ΣAᵢxᵢ − b)` on constrained families, or
    /// `Φ(x, y) = f(x) − yᵀAx − g(y)` on saddles. `primal` supplies `x`, `dual`
    /// supplies `λ` or `y`.
    pub fn lagrangian(&self, primal: &BlockVector, dual: &BlockVector) -> Result<f64> {
        primal.check_same_structure(dual)?;
        let fs = self.spec.functions();
        match &self.spec {
            InstanceSpec::Saddle(sp) => {
                let (x, y) = (primal.block_vector(0), dual.block_vector(1));
                Ok(fs[0].value(&x) - y.dot(&sp.a.matvec(&x)) - fs[1].value(&y))
            }
            spec => {
                let (blocks, b) = spec.constraint().expect("constrained family");
                let m = blocks.len();
                let mut ax = -b;
                let mut f = 0.0;
                for (i, a) in blocks.iter().enumerate() {
                    ax.axpy(1.0, &a.matvec(primal.block(i)));
                    f += fs[i].value(&primal.block_vector(i));
                }
                Ok(f - dual.block_vector(m).dot(&ax))
            }
        }
    }

    /// `L(x̂, λ_ref) − L(x_ref, λ̂)` (or the `Φ` analogue), computed without `F`.
    pub fn lagrangian_gap(&self, w_hat: &BlockVector, w_ref: &BlockVector) -> Result<f64> {
        Ok(self.lagrangian(w_hat, w_ref)? - self.lagrangian(w_ref, w_hat)?)
    }

    /// `‖ΣAᵢxᵢ − b‖`, or 0 for saddles.
    pub fn feasibility(&self, w: &BlockVector) -> f64 {
        match self.spec.constraint() {
            Some((blocks, b)) => {
                let mut r = -b;
                for (i, a) in blocks.iter().enumerate() {
                    r.axpy(1.0, &a.matvec(w.block(i)));
                }
                r.norm()
            }
            None => 0.0,
        }
    }

    pub fn solver(&self) -> Result<Box<dyn Predictor>> {
        Ok(match &self.spec {
            InstanceSpec::TwoBlock(s) => Box::new(TwoBlockSolver::new(s.clone())?),
            InstanceSpec::MultiBlock(s) => Box::new(MultiBlockSolver::new(s.clone())?),
            InstanceSpec::Saddle(s) => Box::new(SaddleSolver::new(s.clone())?),
        })
    }

    pub fn certify(&self) -> Result<ConvergenceCertificate> {
        certify(self.solver()?.correction(), CERTIFY_TOL)
    }

    /// Check the parameters against the open region of the matching theorem.
    pub fn check_region(&self) -> Result<()> {
        match &self.spec {
            InstanceSpec::TwoBlock(s) => s.check_region(),
            InstanceSpec::MultiBlock(s) => s.check_region(),
            InstanceSpec::Saddle(s) => s.check_region(),
        }
    }

    pub fn to_document(&self) -> InstanceDocument {
        let functions = self.spec.functions().into_iter().cloned().collect();
        let w_star = self.w_star.as_ref().map(|w| w.values().to_vec());
        let (a, b, beta, r, s, alpha, p) = match &self.spec {
            InstanceSpec::TwoBlock(sp) => (
                vec![sp.a1.clone(), sp.a2.clone()],
                sp.b.clone(),
                Some(sp.beta),
                Some(sp.r),
                Some(sp.s),
                None,
                Some(sp.p.clone()),
            ),
            InstanceSpec::MultiBlock(sp) => {
                (sp.a.clone(), sp.b.clone(), Some(sp.beta), None, None, Some(sp.alpha), None)
            }
            InstanceSpec::Saddle(sp) => {
                (vec![sp.a.clone()], Vector::zeros(0), None, Some(sp.r), Some(sp.s), Some(sp.alpha), None)
            }
        };
        InstanceDocument {
            family: self.family(),
            m: a.len(),
            a,
            b,
            beta,
            r,
            s,
            alpha,
            p,
            seed: self.seed,
            functions,
            w_star,
        }
    }

    pub fn from_document(doc: InstanceDocument) -> Result<Self> {
        let need = |name: &str, x: Option<f64>| {
            x.ok_or_else(|| Error::InvalidParameter(format!("{} instance needs {name}", doc.family)))
        };
        if doc.a.len() != doc.m {
            return Err(Error::Structure(format!("m = {} but {} matrices given", doc.m, doc.a.len())));
        }
        let (matrices, functions) = match doc.family {
            Family::TwoBlock => (2, 2),
            Family::MultiBlock => (doc.m.max(1), doc.m),
            Family::Saddle => (1, 2),
        };
        if doc.m != matrices || doc.functions.len() != functions {
            return Err(Error::Structure(format!(
                "{} instance with {} matrices and {} functions",
                doc.family,
                doc.m,
                doc.functions.len()
            )));
        }
        let mut fs = doc.functions.clone().into_iter();
        let mut a = doc.a.clone().into_iter();
        let spec = match doc.family {
            Family::TwoBlock => {
                let (a1, a2) = (a.next().unwrap(), a.next().unwrap());
                let beta = need("beta", doc.beta)?;
                let p = doc.p.clone().unwrap_or_else(|| default_proximal(&a1, beta));
                InstanceSpec::TwoBlock(TwoBlockSpec {
                    f1: fs.next().unwrap(),
                    f2: fs.next().unwrap(),
                    a1,
                    a2,
                    b: doc.b.clone(),
                    beta,
                    r: need("r", doc.r)?,
                    s: need("s", doc.s)?,
                    p,
                })
            }
            Family::MultiBlock => InstanceSpec::MultiBlock(MultiBlockSpec {
                fs: fs.collect(),
                a: a.collect(),
                b: doc.b.clone(),
                beta: need("beta", doc.beta)?,
                alpha: need("alpha", doc.alpha)?,
            }),
            Family::Saddle => InstanceSpec::Saddle(SaddleSpec {
                f: fs.next().unwrap(),
                g: fs.next().unwrap(),
                a: a.next().unwrap(),
                r: need("r", doc.r)?,
                s: need("s", doc.s)?,
                alpha: need("alpha", doc.alpha)?,
            }),
        };
        let w_star = doc.w_star.map(Vector::new).transpose()?;
        VariationalInstance::new(spec, w_star, doc.seed)
    }
}

impl Metrics for VariationalInstance {
    fn objective(&self, w: &BlockVector) -> f64 {
        self.theta(w)
    }

    fn feasibility(&self, w: &BlockVector) -> f64 {
        VariationalInstance::feasibility(self, w)
    }

    fn gap_at(&self, w_hat: &BlockVector, w_ref: &BlockVector) -> Result<f64> {
        VariationalInstance::gap_at(self, w_hat, w_ref)
    }

    fn w_star(&self) -> Option<&BlockVector> {
        self.w_star.as_ref()
    }
}

/// Serialized form of an instance. Matrices are nested row-major arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub family: Family,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Matrix>,
    #[serde(default = "empty_vector")]
    pub b: Vector,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "P", default)]
    pub p: Option<Matrix>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Block functions in variable order.
    pub functions: Vec<ProxOp>,
    #[serde(default)]
    pub w_star: Option<Vec<f64>>,
}

fn empty_vector() -> Vector {
    Vector::zeros(0)
}

/// Solve `T(w) = 0` directly for an instance whose block functions are all quadratic.
pub fn kkt_oracle(instance: &VariationalInstance) -> Result<BlockVector> {
    let layout = instance.layout().clone();
    let n = layout.dim();
    let (mut system, c_f) = instance.f_affine();
    let mut rhs = -&c_f;
    for (i, f) in instance.spec().functions().iter().enumerate() {
        let ProxOp::Quadratic { s, c } = f else {
            return Err(Error::InvalidParameter("the KKT oracle needs quadratic block functions".into()));
        };
        let off = layout.range(i).start;
        let block = &system.block(off, off, s.rows(), s.cols()) + s;
        system.set_block(off, off, &block);
        rhs.as_mut_slice()[layout.range(i)].copy_from_slice(c);
    }
    debug_assert_eq!(system.rows(), n);
    let w = solve(&system, &rhs).map_err(|e| Error::Generation(format!("singular KKT system ({e})")))?;
    let w = BlockVector::new(layout, w)?;
    let t = instance.t_op(&w).expect("quadratic instance");
    let scale = 1.0 + instance.spec().constraint().map_or(0.0, |(_, b)| b.norm());
    if t.norm() > ORACLE_TOL * scale {
        return Err(Error::Generation(format!("KKT solve left residual {:e}", t.norm())));
    }
    Ok(w)
}

fn with_oracle(spec: InstanceSpec, seed: Option<u64>) -> Result<VariationalInstance> {
    let provisional = VariationalInstance::new(spec.clone(), None, seed)?;
    let w_star = kkt_oracle(&provisional)?;
    VariationalInstance::new(spec, Some(w_star.into_values()), seed)
}

fn dims_positive(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        Err(Error::InvalidParameter("dimensions must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn full_column_rank(a: &Matrix) -> bool {
    matches!(cholesky_pd_check(&a.gram(), 1e-10), Ok(c) if c.is_pd())
}

/// `fᵢ = ½‖xᵢ − aᵢ‖²`, `β = 1`, `r = s = ½`, default `P`.
///
/// Draw order: `A₁`, `A₂` (redrawn up to five times until of full column
/// rank), `b`, `a₁`, `a₂`.
pub fn make_two_block_quadratic(seed: u64, n1: usize, n2: usize, l: usize) -> Result<VariationalInstance> {
    dims_positive(&[n1, n2, l])?;
    if n2 > l {
        return Err(Error::InvalidParameter(format!("n2 = {n2} > l = {l}: A2 cannot have full column rank")));
    }
    let mut src = UniformSource::new(seed);
    let a1 = src.matrix(l, n1);
    let a2 = (0..REDRAWS)
        .map(|_| src.matrix(l, n2))
        .find(full_column_rank)
        .ok_or_else(|| Error::Generation(format!("A2 rank deficient after {REDRAWS} draws")))?;
    let b = src.vector(l);
    let (c1, c2) = (src.vector(n1), src.vector(n2));
    let spec = TwoBlockSpec::with_default_proximal(
        ProxOp::squared_distance(c1),
        ProxOp::squared_distance(c2),
        a1,
        a2,
        b,
        1.0,
        0.5,
        0.5,
    );
    with_oracle(InstanceSpec::TwoBlock(spec), Some(seed))
}

/// `f₁ = μ‖·‖₁`, `f₂ = ½‖· − a‖²`, `x₁ − x₂ = 0`, with `a = 2u` drawn from the seed.
pub fn make_two_block_l1(seed: u64, n: usize, mu: f64) -> Result<VariationalInstance> {
    dims_positive(&[n])?;
    let a = UniformSource::new(seed).vector(n).scale(2.0);
    two_block_l1_from(a, mu, Some(seed))
}

/// The l1 instance for an explicit `a`. The saddle point is
/// `x₁* = x₂* = soft(a, μ)`, `λ* = a − x*`.
pub fn two_block_l1_from(a: Vector, mu: f64, seed: Option<u64>) -> Result<VariationalInstance> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be nonnegative")));
    }
    let n = a.dim();
    let x = soft_threshold(&a, mu)?;
    let lam = &a - &x;
    let spec = TwoBlockSpec::with_default_proximal(
        ProxOp::SoftThreshold { weight: mu },
        ProxOp::squared_distance(a),
        Matrix::identity(n),
        Matrix::scalar(n, -1.0),
        Vector::zeros(n),
        1.0,
        0.5,
        0.5,
    );
    let w_star = Vector::concat(&[&x, &x, &lam]);
    VariationalInstance::new(InstanceSpec::TwoBlock(spec), Some(w_star), seed)
}

/// `fᵢ = ½‖xᵢ − aᵢ‖²`, `β = 1`, `α = ½`.
///
/// Draw order: `A₁, …, A_m`, `b`, `a₁, …, a_m`; the whole draw is repeated
/// (continuing the stream) up to five times while the KKT system is singular.
pub fn make_multiblock_quadratic(seed: u64, n: &[usize], l: usize) -> Result<VariationalInstance> {
    if n.is_empty() {
        return Err(Error::InvalidParameter("at least one block is required".into()));
    }
    dims_positive(n)?;
    dims_positive(&[l])?;
    let mut src = UniformSource::new(seed);
    let mut last = None;
    for _ in 0..REDRAWS {
        let a: Vec<Matrix> = n.iter().map(|&ni| src.matrix(l, ni)).collect();
        let b = src.vector(l);
        let fs = n.iter().map(|&ni| ProxOp::squared_distance(src.vector(ni))).collect();
        let spec = MultiBlockSpec { fs, a, b, beta: 1.0, alpha: 0.5 };
        match with_oracle(InstanceSpec::MultiBlock(spec), Some(seed)) {
            Ok(instance) => return Ok(instance),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

fn game_steps(a: &Matrix) -> f64 {
    let rho = spectral_radius_gram(a, 1e-13, 100_000).value;
    if rho > 0.0 {
        (0.8 * rho).sqrt()
    } else {
        1.0
    }
}

/// Duality gap `max_i (−Ax)_i − min_j (−Aᵀy)_j` of a mixed-strategy pair.
pub fn game_duality_gap(a: &Matrix, x: &Vector, y: &Vector) -> f64 {
    let best_y = a.matvec(x).iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
    let best_x = a.tr_matvec(y).iter().map(|v| -v).fold(f64::INFINITY, f64::min);
    best_y - best_x
}

/// `min_x max_y −yᵀAx` over probability simplices, with `α = ½` and
/// `r = s = √(0.8·ρ(AᵀA))`. A 1×1 game gets its trivial equilibrium.
pub fn make_matrix_game(a: Matrix) -> Result<VariationalInstance> {
    let w_star = (a.rows() == 1 && a.cols() == 1).then(|| Vector::filled(2, 1.0));
    game_instance(a, w_star)
}

/// A matrix game with a known equilibrium, verified through best responses.
pub fn matrix_game_with_equilibrium(a: Matrix, x: Vector, y: Vector) -> Result<VariationalInstance> {
    for p in [&x, &y] {
        if ProxOp::Simplex.value(p).is_infinite() {
            return Err(Error::Generation("equilibrium strategies must lie on the simplex".into()));
        }
    }
    if x.dim() != a.cols() || y.dim() != a.rows() {
        return Err(Error::Structure("strategy lengths do not match A".into()));
    }
    let gap = game_duality_gap(&a, &x, &y);
    if gap > ORACLE_TOL {
        return Err(Error::Generation(format!("claimed equilibrium has duality gap {gap:e}")));
    }
    game_instance(a, Some(Vector::concat(&[&x, &y])))
}

fn game_instance(a: Matrix, w_star: Option<Vector>) -> Result<VariationalInstance> {
    let step = game_steps(&a);
    let spec = SaddleSpec { f: ProxOp::Simplex, g: ProxOp::Simplex, a, r: step, s: step, alpha: 0.5 };
    VariationalInstance::new(InstanceSpec::Saddle(spec), w_star, None)
}

/// Matching pennies `[[1, −1], [−1, 1]]`, equilibrium `(½, ½)` for both players.
pub fn matching_pennies() -> VariationalInstance {
    let a = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).expect("2x2");
    let half = Vector::filled(2, 0.5);
    matrix_game_with_equilibrium(a, half.clone(), half).expect("known equilibrium")
}

/// `f = ½‖x − c_x‖²`, `g = ½‖y − c_y‖²`, random `A`, `α = ½`, `r = s = √ρ(AᵀA)`.
///
/// Draw order: `A` (`m × n`), `c_x`, `c_y`.
pub fn make_saddle_quadratic(seed: u64, n: usize, m: usize) -> Result<VariationalInstance> {
    dims_positive(&[n, m])?;
    let mut src = UniformSource::new(seed);
    let a = src.matrix(m, n);
    let (cx, cy) = (src.vector(n), src.vector(m));
    let step = spectral_radius_gram(&a, 1e-13, 100_000).value.sqrt().max(1e-3);
    let spec = SaddleSpec {
        f: ProxOp::squared_distance(cx),
        g: ProxOp::squared_distance(cy),
        a,
        r: step,
        s: step,
        alpha: 0.5,
    };
    with_oracle(InstanceSpec::Saddle(spec), Some(seed))
}

/// `‖∇θ(w̆) + F(w̃) + LᵀQ(Lw̃ − v)‖` on smooth instances; pass `breve = tilde`
/// for a baseline step.
pub fn inclusion_residual(
    instance: &VariationalInstance,
    predictor: &dyn Predictor,
    v: &Vector,
    breve: &BlockVector,
    tilde: &BlockVector,
) -> Result<f64> {
    let grad = instance
        .theta_gradient(breve)
        .ok_or_else(|| Error::InvalidParameter("inclusion residual needs smooth block functions".into()))?;
    let spec = predictor.correction();
    let coupling = spec.l().tr_matvec(&spec.q().matvec(&(&predictor.lift(tilde) - v)));
    Ok((&(&grad + &instance.f_op(tilde)) + &coupling).norm())
}
