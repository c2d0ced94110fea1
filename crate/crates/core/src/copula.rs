//! Copula densities, sampling, Kendall-tau conversions, and the
//! Gaussian-copula conditional machinery (partial correlations) used by the
//! vine decomposition in `metrics`.
//!
//! Multivariate support covers the Gaussian and Student-t families; the
//! Clayton and Gumbel families are bivariate only and exist for the
//! generalized-KLD curve comparison.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::rng::Stream;
use crate::special;

/// Components of copula arguments are clamped to
/// `[UNIT_EPS, 1 - UNIT_EPS]` before quantile transforms; the Gaussian and
/// t quantiles are unbounded at 0 and 1 and empirical CDF values can hit the
/// boundary.
pub const UNIT_EPS: f64 = 1e-12;

/// Clamp a probability into the open unit interval used by quantile
/// transforms.
#[inline]
pub fn clamp_unit(u: f64) -> f64 {
    u.clamp(UNIT_EPS, 1.0 - UNIT_EPS)
}

/// Eigenvalues of a correlation matrix may round slightly below zero;
/// anything above this bound counts as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CopulaError {
    #[error("dimension mismatch: family has dimension {expected}, argument has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("correlation matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NonPositiveDefinite { min_eigenvalue: f64 },
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} = {value} outside valid range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("sample count must be at least 1")]
    InvalidCount,
    #[error("conditioning set leads to a numerically singular matrix")]
    SingularConditioningSet,
}

/// Copula family kind, used by the Kendall-tau conversions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaKind {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
}

/// Validated correlation matrix with cached factorizations.
///
/// `sample_lower` satisfies `L L^T = R` (eigenvalue-clipped when `R` is only
/// semidefinite); `precision` holds `R^-1` flattened row-major together with
/// `log det R` and is present only when `R` is numerically positive
/// definite.
#[derive(Debug, Clone)]
struct CorrFactor {
    corr: DMatrix<f64>,
    sample_lower: DMatrix<f64>,
    precision: Option<(Vec<f64>, f64)>,
}

impl CorrFactor {
    fn build(corr: DMatrix<f64>) -> Result<Self, CopulaError> {
        let d = corr.nrows();
        if d < 2 || corr.ncols() != d {
            return Err(CopulaError::InvalidCorrelation(format!(
                "expected a square matrix of dimension >= 2, got {}x{}",
                corr.nrows(),
                corr.ncols()
            )));
        }
        for i in 0..d {
            if (corr[(i, i)] - 1.0).abs() > 1e-8 {
                return Err(CopulaError::InvalidCorrelation(format!(
                    "diagonal entry ({i},{i}) = {} is not 1",
                    corr[(i, i)]
                )));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-8 {
                    return Err(CopulaError::InvalidCorrelation(format!(
                        "asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        let (sample_lower, precision) = match corr.clone().cholesky() {
            Some(chol) => {
                let log_det = 2.0 * (0..d).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>();
                let inv = chol.inverse();
                let flat: Vec<f64> = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .map(|(i, j)| inv[(i, j)])
                    .collect();
                (chol.l(), Some((flat, log_det)))
            }
            None => {
                let eigen = corr.clone().symmetric_eigen();
                let min_eig = eigen.eigenvalues.min();
                if min_eig < -PSD_TOL {
                    return Err(CopulaError::NonPositiveDefinite {
                        min_eigenvalue: min_eig,
                    });
                }
                let mut b = eigen.eigenvectors.clone();
                for j in 0..d {
                    let s = eigen.eigenvalues[j].max(0.0).sqrt();
                    for i in 0..d {
                        b[(i, j)] *= s;
                    }
                }
                (b, None)
            }
        };
        Ok(CorrFactor {
            corr,
            sample_lower,
            precision,
        })
    }

    fn dim(&self) -> usize {
        self.corr.nrows()
    }

    fn precision(&self) -> Result<&(Vec<f64>, f64), CopulaError> {
        self.precision.as_ref().ok_or_else(|| {
            let min_eig = self.corr.clone().symmetric_eigen().eigenvalues.min();
            CopulaError::NonPositiveDefinite {
                min_eigenvalue: min_eig,
            }
        })
    }

    /// x^T R^-1 x and x^T x for the density quadratic forms.
    fn quad_forms(&self, x: &[f64]) -> Result<(f64, f64), CopulaError> {
        let (p, _) = self.precision()?;
        let d = self.dim();
        let mut qp = 0.0;
        let mut qi = 0.0;
        for i in 0..d {
            let row = &p[i * d..(i + 1) * d];
            let mut acc = 0.0;
            for j in 0..d {
                acc += row[j] * x[j];
            }
            qp += acc * x[i];
            qi += x[i] * x[i];
        }
        Ok((qp, qi))
    }
}

/// A copula family with fixed parameters.
#[derive(Debug, Clone)]
pub enum CopulaFamily {
    Gaussian(GaussianCopula),
    StudentT(StudentTCopula),
    Clayton(ClaytonCopula),
    Gumbel(GumbelCopula),
}

#[derive(Debug, Clone)]
pub struct GaussianCopula {
    factor: CorrFactor,
}

#[derive(Debug, Clone)]
pub struct StudentTCopula {
    factor: CorrFactor,
    nu: f64,
    // ln Gamma((nu+d)/2) + (d-1) ln Gamma(nu/2) - d ln Gamma((nu+1)/2)
    log_const: f64,
}

#[derive(Debug, Clone)]
pub struct ClaytonCopula {
    theta: f64,
}

#[derive(Debug, Clone)]
pub struct GumbelCopula {
    theta: f64,
}

impl CopulaFamily {
    /// Gaussian copula with the given correlation matrix.
    pub fn gaussian(corr: DMatrix<f64>) -> Result<Self, CopulaError> {
        Ok(CopulaFamily::Gaussian(GaussianCopula {
            factor: CorrFactor::build(corr)?,
        }))
    }

    /// Student-t copula; requires `nu > 2` so that second moments exist.
    pub fn student_t(corr: DMatrix<f64>, nu: f64) -> Result<Self, CopulaError> {
        if !(nu > 2.0) {
            return Err(CopulaError::InvalidParameter(format!(
                "degrees of freedom must exceed 2, got {nu}"
            )));
        }
        let factor = CorrFactor::build(corr)?;
        let d = factor.dim() as f64;
        let log_const = ln_gamma((nu + d) / 2.0) + (d - 1.0) * ln_gamma(nu / 2.0)
            - d * ln_gamma((nu + 1.0) / 2.0);
        Ok(CopulaFamily::StudentT(StudentTCopula {
            factor,
            nu,
            log_const,
        }))
    }

    /// Bivariate Clayton copula, `theta > 0`.
    pub fn clayton(theta: f64) -> Result<Self, CopulaError> {
        if !(theta > 0.0) {
            return Err(CopulaError::InvalidParameter(format!(
                "Clayton theta must be positive, got {theta}"
            )));
        }
        Ok(CopulaFamily::Clayton(ClaytonCopula { theta }))
    }

    /// Bivariate Gumbel copula, `theta >= 1`.
    pub fn gumbel(theta: f64) -> Result<Self, CopulaError> {
        if !(theta >= 1.0) {
            return Err(CopulaError::InvalidParameter(format!(
                "Gumbel theta must be at least 1, got {theta}"
            )));
        }
        Ok(CopulaFamily::Gumbel(GumbelCopula { theta }))
    }

    pub fn kind(&self) -> CopulaKind {
        match self {
            CopulaFamily::Gaussian(_) => CopulaKind::Gaussian,
            CopulaFamily::StudentT(_) => CopulaKind::StudentT,
            CopulaFamily::Clayton(_) => CopulaKind::Clayton,
            CopulaFamily::Gumbel(_) => CopulaKind::Gumbel,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            CopulaFamily::Gaussian(c) => c.factor.dim(),
            CopulaFamily::StudentT(c) => c.factor.dim(),
            CopulaFamily::Clayton(_) | CopulaFamily::Gumbel(_) => 2,
        }
    }

    /// Log of the copula density at `u`; components are clamped to the open
    /// unit interval first.
    pub fn log_density(&self, u: &[f64]) -> Result<f64, CopulaError> {
        let d = self.dimension();
        if u.len() != d {
            return Err(CopulaError::DimensionMismatch {
                expected: d,
                got: u.len(),
            });
        }
        match self {
            CopulaFamily::Gaussian(c) => {
                let mut z = [0.0; MAX_STACK_DIM];
                let z = stack_or_heap(&mut z, d);
                for (zi, &ui) in z.iter_mut().zip(u) {
                    *zi = special::norm_quantile(clamp_unit(ui));
                }
                c.log_density_latent(z)
            }
            CopulaFamily::StudentT(c) => {
                let mut x = [0.0; MAX_STACK_DIM];
                let x = stack_or_heap(&mut x, d);
                for (xi, &ui) in x.iter_mut().zip(u) {
                    *xi = special::t_quantile(clamp_unit(ui), c.nu);
                }
                c.log_density_latent(x)
            }
            CopulaFamily::Clayton(c) => Ok(c.log_density(clamp_unit(u[0]), clamp_unit(u[1]))),
            CopulaFamily::Gumbel(c) => Ok(c.log_density(clamp_unit(u[0]), clamp_unit(u[1]))),
        }
    }

    /// Draw `n` joint samples; rows are vectors on the open unit cube.
    pub fn sample(&self, n: usize, rng: &mut Stream) -> Result<DMatrix<f64>, CopulaError> {
        if n == 0 {
            return Err(CopulaError::InvalidCount);
        }
        let d = self.dimension();
        let mut sampler = self.sampler();
        let mut out = DMatrix::zeros(n, d);
        for i in 0..n {
            let u = sampler.draw(rng)?;
            for j in 0..d {
                out[(i, j)] = u[j];
            }
        }
        Ok(out)
    }

    /// Streaming sampler that reuses internal buffers; preferred inside
    /// Monte-Carlo loops.
    pub fn sampler(&self) -> CopulaSampler<'_> {
        let d = self.dimension();
        let chi2 = match self {
            CopulaFamily::StudentT(c) => {
                Some(Gamma::new(c.nu / 2.0, 2.0).expect("valid chi-square parameters"))
            }
            _ => None,
        };
        CopulaSampler {
            family: self,
            chi2,
            u: vec![0.0; d],
            latent: vec![0.0; d],
            scratch: vec![0.0; d],
        }
    }
}

impl GaussianCopula {
    /// Log density in terms of the latent normal scores `z = Phi^-1(u)`.
    pub(crate) fn log_density_latent(&self, z: &[f64]) -> Result<f64, CopulaError> {
        let (_, log_det) = *self.factor.precision()?;
        let (qp, qi) = self.factor.quad_forms(z)?;
        Ok(-0.5 * log_det - 0.5 * (qp - qi))
    }
}

impl StudentTCopula {
    /// Log density in terms of the latent t scores `x = T_nu^-1(u)`.
    pub(crate) fn log_density_latent(&self, x: &[f64]) -> Result<f64, CopulaError> {
        let log_det = self.factor.precision()?.1;
        let (qp, _) = self.factor.quad_forms(x)?;
        let d = self.factor.dim();
        let nu = self.nu;
        if nu == 4.0 {
            // Half-integer exponents: fold the d+1 logarithms into one.
            // tail^(5/2) / body^((4+d)/2) with integer powers and sqrt.
            let mut tail = 1.0;
            for &xi in x {
                tail *= 1.0 + 0.25 * xi * xi;
            }
            let tail_pow = tail * tail * tail.sqrt();
            let body = 1.0 + 0.25 * qp;
            let mut body_pow = body.powi(2 + (d / 2) as i32);
            if d % 2 == 1 {
                body_pow *= body.sqrt();
            }
            return Ok(self.log_const - 0.5 * log_det + (tail_pow / body_pow).ln());
        }
        let mut tail = 0.0;
        for &xi in x {
            tail += (1.0 + xi * xi / nu).ln();
        }
        Ok(
            self.log_const - 0.5 * log_det - 0.5 * (nu + d as f64) * (1.0 + qp / nu).ln()
                + 0.5 * (nu + 1.0) * tail,
        )
    }
}

impl ClaytonCopula {
    fn log_density(&self, u: f64, v: f64) -> f64 {
        let th = self.theta;
        let (lu, lv) = (u.ln(), v.ln());
        // u^-th + v^-th - 1 computed as 1 + expm1 terms for small theta.
        let s = (-th * lu).exp_m1() + (-th * lv).exp_m1();
        (1.0 + th).ln() - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * s.ln_1p()
    }
}

impl GumbelCopula {
    fn log_density(&self, u: f64, v: f64) -> f64 {
        let th = self.theta;
        let (x, y) = (-u.ln(), -v.ln());
        let (lx, ly) = (x.ln(), y.ln());
        // log A with A = (x^th + y^th)^(1/th), evaluated in log space.
        let (a, b) = (th * lx, th * ly);
        let m = a.max(b);
        let log_a = (m + ((a - m).exp() + (b - m).exp()).ln()) / th;
        let big_a = log_a.exp();
        -big_a + x + y + (th - 1.0) * (lx + ly) + (1.0 - 2.0 * th) * log_a + (big_a + th - 1.0).ln()
    }
}

const MAX_STACK_DIM: usize = 32;

#[inline]
fn stack_or_heap(buf: &mut [f64; MAX_STACK_DIM], d: usize) -> &mut [f64] {
    assert!(d <= MAX_STACK_DIM, "copula dimension above {MAX_STACK_DIM}");
    &mut buf[..d]
}

/// Streaming copula sampler; one draw per call, no per-draw allocation.
pub struct CopulaSampler<'a> {
    family: &'a CopulaFamily,
    chi2: Option<Gamma<f64>>,
    u: Vec<f64>,
    latent: Vec<f64>,
    scratch: Vec<f64>,
}

impl CopulaSampler<'_> {
    pub fn dimension(&self) -> usize {
        self.u.len()
    }

    /// Draw one joint sample, returning the uniforms. For elliptical
    /// families [`Self::latent`] afterwards holds the underlying scores
    /// (normal for Gaussian, t for Student-t), which equal the quantile
    /// transform of the returned uniforms.
    pub fn draw(&mut self, rng: &mut Stream) -> Result<&[f64], CopulaError> {
        let d = self.u.len();
        match self.family {
            CopulaFamily::Gaussian(c) => {
                mvn_draw(
                    &c.factor.sample_lower,
                    &mut self.scratch,
                    &mut self.latent,
                    rng,
                );
                for i in 0..d {
                    self.u[i] = clamp_unit(special::norm_cdf(self.latent[i]));
                }
            }
            CopulaFamily::StudentT(c) => {
                mvn_draw(
                    &c.factor.sample_lower,
                    &mut self.scratch,
                    &mut self.latent,
                    rng,
                );
                let nu = c.nu;
                let chi2 = self
                    .chi2
                    .as_ref()
                    .expect("set for the t family")
                    .sample(rng);
                let scale = (nu / chi2.max(1e-300)).sqrt();
                for i in 0..d {
                    self.latent[i] *= scale;
                    self.u[i] = clamp_unit(special::t_cdf(self.latent[i], nu));
                }
            }
            CopulaFamily::Clayton(c) => {
                // Marshall-Olkin: V ~ Gamma(1/theta, 1), u_i = (1 + E_i/V)^(-1/theta).
                let v: f64 = Gamma::new(1.0 / c.theta, 1.0)
                    .expect("valid gamma parameters")
                    .sample(rng);
                let v = v.max(1e-300);
                for i in 0..d {
                    let e = sample_exp1(rng);
                    self.u[i] = clamp_unit((1.0 + e / v).powf(-1.0 / c.theta));
                    self.latent[i] = f64::NAN;
                }
            }
            CopulaFamily::Gumbel(c) => {
                // Marshall-Olkin with a positive stable mixing variable,
                // alpha = 1/theta, via the Chambers-Mallows-Stuck sampler.
                let alpha = 1.0 / c.theta;
                let v = if c.theta == 1.0 {
                    1.0
                } else {
                    let t: f64 = rng.sample::<f64, _>(Open01) * std::f64::consts::PI;
                    let w = sample_exp1(rng);
                    let num = ((1.0 - alpha) * t).sin();
                    ((num / w).powf((1.0 - alpha) / alpha) * (alpha * t).sin())
                        / t.sin().powf(1.0 / alpha)
                };
                let v = v.max(1e-300);
                for i in 0..d {
                    let e = sample_exp1(rng);
                    self.u[i] = clamp_unit((-(e / v).powf(alpha)).exp());
                    self.latent[i] = f64::NAN;
                }
            }
        }
        Ok(&self.u)
    }

    pub fn uniforms(&self) -> &[f64] {
        &self.u
    }

    /// Latent elliptical scores of the last draw (NaN for Archimedean
    /// families).
    pub fn latent(&self) -> &[f64] {
        &self.latent
    }
}

fn mvn_draw(lower: &DMatrix<f64>, scratch: &mut [f64], out: &mut [f64], rng: &mut Stream) {
    let d = out.len();
    for zi in scratch.iter_mut() {
        *zi = rng.sample(StandardNormal);
    }
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += lower[(i, j)] * scratch[j];
        }
        out[i] = acc;
    }
}

#[inline]
fn sample_exp1(rng: &mut Stream) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

/// Map Kendall's tau to the family parameter (correlation for elliptical
/// families, theta for Archimedean ones).
pub fn tau_to_param(kind: CopulaKind, tau: f64) -> Result<f64, CopulaError> {
    match kind {
        CopulaKind::Gaussian | CopulaKind::StudentT => {
            if !(-1.0..=1.0).contains(&tau) {
                return Err(CopulaError::OutOfRange {
                    what: "tau",
                    value: tau,
                    range: "[-1, 1]",
                });
            }
            Ok((std::f64::consts::FRAC_PI_2 * tau).sin())
        }
        CopulaKind::Clayton => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(CopulaError::OutOfRange {
                    what: "tau",
                    value: tau,
                    range: "(0, 1)",
                });
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        CopulaKind::Gumbel => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(CopulaError::OutOfRange {
                    what: "tau",
                    value: tau,
                    range: "(0, 1)",
                });
            }
            Ok(1.0 / (1.0 - tau))
        }
    }
}

/// Inverse of [`tau_to_param`].
pub fn param_to_tau(kind: CopulaKind, param: f64) -> Result<f64, CopulaError> {
    match kind {
        CopulaKind::Gaussian | CopulaKind::StudentT => {
            if !(-1.0..=1.0).contains(&param) {
                return Err(CopulaError::OutOfRange {
                    what: "rho",
                    value: param,
                    range: "[-1, 1]",
                });
            }
            Ok(param.asin() / std::f64::consts::FRAC_PI_2)
        }
        CopulaKind::Clayton => {
            if !(param > 0.0) {
                return Err(CopulaError::OutOfRange {
                    what: "theta",
                    value: param,
                    range: "(0, inf)",
                });
            }
            Ok(param / (param + 2.0))
        }
        CopulaKind::Gumbel => {
            if !(param >= 1.0) {
                return Err(CopulaError::OutOfRange {
                    what: "theta",
                    value: param,
                    range: "[1, inf)",
                });
            }
            Ok(1.0 - 1.0 / param)
        }
    }
}

/// Partial correlation of variables `i` and `j` given the variables in
/// `cond`, computed from the precision matrix of the restricted correlation
/// matrix. With an empty conditioning set this is exactly `corr[(i, j)]`.
pub fn partial_correlation(
    corr: &DMatrix<f64>,
    i: usize,
    j: usize,
    cond: &[usize],
) -> Result<f64, CopulaError> {
    let d = corr.nrows();
    if i == j {
        return Err(CopulaError::InvalidParameter(
            "partial correlation requires distinct variables".into(),
        ));
    }
    for &k in [i, j].iter().chain(cond.iter()) {
        if k >= d {
            return Err(CopulaError::InvalidParameter(format!(
                "index {k} out of bounds for dimension {d}"
            )));
        }
    }
    if cond.contains(&i) || cond.contains(&j) {
        return Err(CopulaError::InvalidParameter(
            "conditioning set must not contain the target variables".into(),
        ));
    }
    if cond.is_empty() {
        return Ok(corr[(i, j)]);
    }
    let mut idx = Vec::with_capacity(2 + cond.len());
    idx.push(i);
    idx.push(j);
    idx.extend_from_slice(cond);
    let m = idx.len();
    let sub = DMatrix::from_fn(m, m, |r, c| corr[(idx[r], idx[c])]);
    let chol = sub.cholesky().ok_or(CopulaError::SingularConditioningSet)?;
    let p = chol.inverse();
    let denom = p[(0, 0)] * p[(1, 1)];
    if !(denom > 0.0) {
        return Err(CopulaError::SingularConditioningSet);
    }
    Ok(-p[(0, 1)] / denom.sqrt())
}

/// Repair a symmetric unit-diagonal matrix into a valid correlation matrix
/// by clipping negative eigenvalues at zero and renormalizing the diagonal.
/// Matrices already positive semidefinite within `tol` are returned
/// unchanged, which makes the repair idempotent.
pub fn nearest_psd(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let d = m.nrows();
    let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eigen = sym.clone().symmetric_eigen();
    if eigen.eigenvalues.min() >= -tol {
        return m.clone();
    }
    let clipped = DVector::from_fn(d, |i, _| eigen.eigenvalues[i].max(0.0));
    let mut b = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in 0..d {
                acc += eigen.eigenvectors[(i, k)] * clipped[k] * eigen.eigenvectors[(j, k)];
            }
            b[(i, j)] = acc;
            b[(j, i)] = acc;
        }
    }
    let mut out = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..i {
            let denom = b[(i, i)] * b[(j, j)];
            let v = if denom > 1e-24 {
                b[(i, j)] / denom.sqrt()
            } else {
                0.0
            };
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
