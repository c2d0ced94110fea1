//! Monte-Carlo estimators for coalition metrics outside the Gaussian closed
//! form, and the dispatcher that picks between the two routes.
//!
//! Both estimators work on the copula scale: a joint draw is a vector of
//! uniforms, marginal quantile transforms map it to observations, and the
//! log joint density factorizes into marginal terms plus the copula log
//! density. For elliptical copulas the sampler's latent scores double as the
//! quantile transforms of the drawn uniforms, which keeps the center
//! evaluation free of inverse-CDF calls.

use rand::Rng;
use rand_distr::{Distribution, Normal, Open01};

use crate::copula::{clamp_unit, CopulaFamily};
use crate::network::{MarginalModel, NetworkModel};
use crate::rng::{member_tag, RunSeed, Stream};
use crate::special::{norm_cdf, norm_quantile};

use super::{
    coalition_fi_gaussian, coalition_kld_gaussian, individual_metric, InferenceTask, MetricMethod,
    MetricValue, MetricsError, ThetaEval,
};

/// Sizes for the Monte-Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub n_samples: usize,
    pub fd_step: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            n_samples: 200_000,
            fd_step: 1e-3,
        }
    }
}

/// Copula family that couples a network's sensors, parameterized by the
/// network correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetDependence {
    GaussianCopula,
    StudentTCopula { nu: f64 },
}

const MIN_SAMPLES: usize = 1_000;

/// Running mean and variance accumulator.
#[derive(Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }
}

/// Monte-Carlo estimate of a coalition's KLD between the hypotheses
/// `theta0` (the sampling hypothesis) and `theta1`.
///
/// Draws the joint under the null through `copula_h0`, maps to observations
/// by marginal quantiles at `theta0`, and averages the factorized log
/// density ratio; the alternative's copula arguments are the marginal CDF
/// values at `theta1`. The two copulas are usually the same object; distinct
/// dependence parameters per hypothesis are accepted but not exercised by
/// the built-in experiments.
#[allow(clippy::too_many_arguments)]
pub fn mc_coalition_kld(
    members: &[usize],
    net: &NetworkModel,
    theta0: f64,
    theta1: f64,
    copula_h0: &CopulaFamily,
    copula_h1: &CopulaFamily,
    n_samples: usize,
    rng: &mut Stream,
) -> Result<MetricValue, MetricsError> {
    if n_samples < MIN_SAMPLES {
        return Err(MetricsError::InvalidSampleCount {
            n: n_samples,
            min: MIN_SAMPLES,
        });
    }
    let d = members.len();
    let task = InferenceTask::Detection { theta0, theta1 };
    let marginals: Vec<MarginalModel> = members.iter().map(|&i| net.sensor(i).marginal).collect();
    let mut individual_sum = 0.0;
    for m in &marginals {
        individual_sum += individual_metric(m, &task)?;
    }

    let use_copula = d >= 2;
    let mut sampler = use_copula.then(|| copula_h0.sampler());
    if let Some(s) = &sampler {
        if s.dimension() != d {
            return Err(MetricsError::InvalidParameter(format!(
                "copula dimension {} does not match coalition size {d}",
                s.dimension()
            )));
        }
    }
    let gaussian_latent = matches!(copula_h0, CopulaFamily::Gaussian(_));

    let mut acc = Welford::default();
    let mut u1 = [0.0f64; 1];
    let mut v = vec![0.0f64; d];
    for _ in 0..n_samples {
        let (u, latent): (&[f64], Option<&[f64]>) = match &mut sampler {
            Some(s) => {
                s.draw(rng)?;
                (s.uniforms(), Some(s.latent()))
            }
            None => {
                u1[0] = rng.sample(Open01);
                (&u1, None)
            }
        };

        let mut term = 0.0;
        for (i, m) in marginals.iter().enumerate() {
            match m {
                MarginalModel::GaussianMean { sigma } => {
                    let g = if gaussian_latent {
                        latent.map(|l| l[i]).unwrap_or_else(|| norm_quantile(u[i]))
                    } else {
                        norm_quantile(u[i])
                    };
                    let shift0 = theta0 - theta1;
                    term += (shift0 * shift0 + 2.0 * sigma * g * shift0) / (2.0 * sigma * sigma);
                    v[i] = clamp_unit(norm_cdf(g + shift0 / sigma));
                }
                MarginalModel::ExponentialRate => {
                    let w = (-u[i]).ln_1p();
                    term += (theta0 / theta1).ln() - (theta1 - theta0) * w / theta0;
                    v[i] = clamp_unit(-(theta1 / theta0 * w).exp_m1());
                }
            }
        }
        if use_copula {
            let lc0 = match (copula_h0, latent) {
                (CopulaFamily::Gaussian(c), Some(z)) => c.log_density_latent(z)?,
                (CopulaFamily::StudentT(c), Some(x)) => c.log_density_latent(x)?,
                _ => copula_h0.log_density(u)?,
            };
            let lc1 = copula_h1.log_density(&v)?;
            term += lc0 - lc1;
        }
        acc.push(term);
    }

    let total = acc.mean;
    let std_error = (acc.variance() / n_samples as f64).sqrt();
    let copula_part = total - individual_sum;
    Ok(MetricValue {
        total,
        individual_sum,
        copula_part,
        diversity_gain: copula_part.max(0.0),
        redundancy_loss: (-copula_part).max(0.0),
        method: MetricMethod::MonteCarlo {
            samples: n_samples,
            std_error,
        },
    })
}

/// Monte-Carlo estimate of a coalition's average Fisher information: the
/// negated central second finite difference of the factorized log joint
/// density in theta, averaged over joint draws and the theta evaluation
/// policy. Fixed-grid strata receive equal weight; the reported standard
/// error combines the per-stratum variances.
pub fn mc_coalition_fi(
    members: &[usize],
    net: &NetworkModel,
    eval: &ThetaEval,
    copula: &CopulaFamily,
    n_samples: usize,
    fd_step: f64,
    rng: &mut Stream,
) -> Result<MetricValue, MetricsError> {
    if !(fd_step > 0.0) {
        return Err(MetricsError::InvalidParameter(
            "finite-difference step must be positive".into(),
        ));
    }
    if fd_step < 1e-6 {
        return Err(MetricsError::StepTooSmall { fd_step });
    }
    if n_samples < MIN_SAMPLES {
        return Err(MetricsError::InvalidSampleCount {
            n: n_samples,
            min: MIN_SAMPLES,
        });
    }

    let d = members.len();
    let task = InferenceTask::Estimation { eval: eval.clone() };
    let marginals: Vec<MarginalModel> = members.iter().map(|&i| net.sensor(i).marginal).collect();
    let mut individual_sum = 0.0;
    for m in &marginals {
        individual_sum += individual_metric(m, &task)?;
    }

    let use_copula = d >= 2;
    let mut sampler = use_copula.then(|| copula.sampler());
    if let Some(s) = &sampler {
        if s.dimension() != d {
            return Err(MetricsError::InvalidParameter(format!(
                "copula dimension {} does not match coalition size {d}",
                s.dimension()
            )));
        }
    }

    enum Stratum {
        Prior(Normal<f64>),
        Fixed(f64),
    }
    let strata: Vec<Stratum> = match eval {
        ThetaEval::GaussianPrior { mean, std } => {
            if !(*std > 0.0) {
                return Err(MetricsError::InvalidParameter(
                    "prior standard deviation must be positive".into(),
                ));
            }
            vec![Stratum::Prior(
                Normal::new(*mean, *std).expect("validated prior parameters"),
            )]
        }
        ThetaEval::FixedGrid(grid) => {
            if grid.is_empty() {
                return Err(MetricsError::InvalidParameter("empty theta grid".into()));
            }
            grid.iter().map(|&t| Stratum::Fixed(t)).collect()
        }
    };
    let k = strata.len();
    if n_samples < k {
        return Err(MetricsError::InvalidSampleCount {
            n: n_samples,
            min: k,
        });
    }

    let mut u1 = [0.0f64; 1];
    let mut vp = vec![0.0f64; d];
    let mut vm = vec![0.0f64; d];
    let mut total = 0.0;
    let mut se_sq = 0.0;
    let copula_arg = use_copula.then_some(copula);
    for (si, stratum) in strata.iter().enumerate() {
        let n_k = n_samples / k + usize::from(si < n_samples % k);
        let mut acc = Welford::default();
        for _ in 0..n_k {
            let theta = match stratum {
                Stratum::Fixed(t) => *t,
                Stratum::Prior(prior) => prior.sample(rng),
            };
            let (u, latent): (&[f64], Option<&[f64]>) = match &mut sampler {
                Some(s) => {
                    s.draw(rng)?;
                    (s.uniforms(), Some(s.latent()))
                }
                None => {
                    u1[0] = rng.sample(Open01);
                    (&u1, None)
                }
            };
            let value = curvature_inner(
                &marginals, copula_arg, u, latent, theta, fd_step, &mut vp, &mut vm,
            )?;
            acc.push(value);
        }
        total += acc.mean / k as f64;
        se_sq += acc.variance() / ((k * k) as f64 * n_k as f64);
    }

    let copula_part = total - individual_sum;
    Ok(MetricValue {
        total,
        individual_sum,
        copula_part,
        diversity_gain: copula_part.max(0.0),
        redundancy_loss: (-copula_part).max(0.0),
        method: MetricMethod::MonteCarlo {
            samples: n_samples,
            std_error: se_sq.sqrt(),
        },
    })
}

/// Negated central second finite difference in theta of the factorized log
/// joint density at one copula point `u`. This is the integrand of the
/// Fisher-information estimator; exposed so tests can drive it with
/// deterministic quadrature instead of sampling.
pub fn fi_curvature_term(
    marginals: &[MarginalModel],
    copula: &CopulaFamily,
    u: &[f64],
    theta: f64,
    fd_step: f64,
) -> Result<f64, MetricsError> {
    if !(fd_step > 0.0) {
        return Err(MetricsError::InvalidParameter(
            "finite-difference step must be positive".into(),
        ));
    }
    if fd_step < 1e-6 {
        return Err(MetricsError::StepTooSmall { fd_step });
    }
    let d = u.len();
    let mut vp = vec![0.0f64; d];
    let mut vm = vec![0.0f64; d];
    let copula_arg = (d >= 2).then_some(copula);
    curvature_inner(
        marginals, copula_arg, u, None, theta, fd_step, &mut vp, &mut vm,
    )
}

/// Shared curvature kernel. `latent` carries the sampler's elliptical
/// scores for `u` when available, saving the quantile transforms of the
/// center evaluation; the theta-independent normalization constants of the
/// Gaussian marginals drop out of the second difference and are omitted.
#[allow(clippy::too_many_arguments)]
fn curvature_inner(
    marginals: &[MarginalModel],
    copula: Option<&CopulaFamily>,
    u: &[f64],
    latent: Option<&[f64]>,
    theta: f64,
    h: f64,
    vp: &mut [f64],
    vm: &mut [f64],
) -> Result<f64, MetricsError> {
    let gaussian_latent = matches!(copula, Some(CopulaFamily::Gaussian(_))) && latent.is_some();
    let mut lm_p = 0.0;
    let mut lm_0 = 0.0;
    let mut lm_m = 0.0;
    for (i, m) in marginals.iter().enumerate() {
        match m {
            MarginalModel::GaussianMean { sigma } => {
                let g = if gaussian_latent {
                    latent.unwrap()[i]
                } else {
                    norm_quantile(clamp_unit(u[i]))
                };
                // theta' = theta + h shifts the standardized residual by -h/sigma.
                let rp = g - h / sigma;
                let rm = g + h / sigma;
                lm_p += -0.5 * rp * rp;
                lm_0 += -0.5 * g * g;
                lm_m += -0.5 * rm * rm;
                vp[i] = clamp_unit(norm_cdf(rp));
                vm[i] = clamp_unit(norm_cdf(rm));
            }
            MarginalModel::ExponentialRate => {
                let tp = theta + h;
                let tm = theta - h;
                if !(tm > 0.0 && theta > 0.0) {
                    return Err(MetricsError::InvalidTheta(format!(
                        "exponential rate must stay positive across the step (theta = {theta}, \
                         step = {h})"
                    )));
                }
                let w = (-clamp_unit(u[i])).ln_1p();
                let x = -w / theta;
                lm_p += tp.ln() - tp * x;
                lm_0 += theta.ln() - theta * x;
                lm_m += tm.ln() - tm * x;
                vp[i] = clamp_unit(-(tp / theta * w).exp_m1());
                vm[i] = clamp_unit(-(tm / theta * w).exp_m1());
            }
        }
    }
    let (lc_p, lc_0, lc_m) = match copula {
        None => (0.0, 0.0, 0.0),
        Some(c) => {
            let lc_0 = match (c, latent) {
                (CopulaFamily::Gaussian(g), Some(z)) => g.log_density_latent(z)?,
                (CopulaFamily::StudentT(t), Some(x)) => t.log_density_latent(x)?,
                _ => c.log_density(u)?,
            };
            (c.log_density(vp)?, lc_0, c.log_density(vm)?)
        }
    };
    let fd = ((lm_p + lc_p) - 2.0 * (lm_0 + lc_0) + (lm_m + lc_m)) / (h * h);
    Ok(-fd)
}

/// Coalition metric dispatcher used by the game and the experiments.
///
/// Singletons are exact; all-Gaussian coalitions under the Gaussian copula
/// use the closed forms; everything else runs the Monte-Carlo estimator
/// with a stream derived from `seed` and the member set, so re-evaluating
/// the same coalition in one run returns the identical number.
pub fn coalition_metric(
    members: &[usize],
    net: &NetworkModel,
    task: &InferenceTask,
    dep: &NetDependence,
    mc: &McSettings,
    seed: RunSeed,
) -> Result<MetricValue, MetricsError> {
    if members.is_empty() {
        return Err(MetricsError::InvalidParameter(
            "coalition must be nonempty".into(),
        ));
    }
    if members.len() == 1 {
        let v = individual_metric(&net.sensor(members[0]).marginal, task)?;
        return Ok(MetricValue {
            total: v,
            individual_sum: v,
            copula_part: 0.0,
            diversity_gain: 0.0,
            redundancy_loss: 0.0,
            method: MetricMethod::ClosedForm,
        });
    }
    let gaussian_route = matches!(dep, NetDependence::GaussianCopula) && net.all_gaussian(members);
    if gaussian_route {
        return match task {
            InferenceTask::Estimation { .. } => coalition_fi_gaussian(members, net),
            InferenceTask::Detection { theta0, theta1 } => {
                coalition_kld_gaussian(members, net, *theta0, *theta1)
            }
        };
    }
    let sub = net.sub_corr(members);
    let copula = match dep {
        NetDependence::GaussianCopula => CopulaFamily::gaussian(sub)?,
        NetDependence::StudentTCopula { nu } => CopulaFamily::student_t(sub, *nu)?,
    };
    let mut rng = seed.child(member_tag(members)).stream();
    match task {
        InferenceTask::Detection { theta0, theta1 } => mc_coalition_kld(
            members,
            net,
            *theta0,
            *theta1,
            &copula,
            &copula,
            mc.n_samples,
            &mut rng,
        ),
        InferenceTask::Estimation { eval } => mc_coalition_fi(
            members,
            net,
            eval,
            &copula,
            mc.n_samples,
            mc.fd_step,
            &mut rng,
        ),
    }
}
