//! Sensor deployment, marginal observation models, the distance-based
//! dependence model, and the energy/communication model.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::copula::{nearest_psd, PSD_TOL};
use crate::rng::Stream;

/// Sensors closer than this to the signal source trip
/// [`NetworkError::SourceCollocation`]; the inverse-distance variance model
/// diverges at zero distance.
pub const SOURCE_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("sensor count must be at least 1")]
    InvalidCount,
    #[error("sensor {id} is closer than {SOURCE_EPS} to the signal source")]
    SourceCollocation { id: usize },
    #[error("coalition must be nonempty")]
    EmptyCoalition,
    #[error("sensor ids must be unique and contiguous from 0 (got {0})")]
    BadSensorIds(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Marginal observation model of one sensor. The inference parameter theta
/// enters as the mean of the Gaussian model and as the rate of the
/// exponential model (density `theta * exp(-theta x)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalModel {
    GaussianMean { sigma: f64 },
    ExponentialRate,
}

impl MarginalModel {
    pub fn is_gaussian(&self) -> bool {
        matches!(self, MarginalModel::GaussianMean { .. })
    }
}

/// One sensor: id, planar location, marginal observation model.
#[derive(Debug, Clone)]
pub struct Sensor {
    pub id: usize,
    pub location: [f64; 2],
    pub marginal: MarginalModel,
}

/// Energy/communication model: each sensor in a coalition `S` answers
/// `r (|S|-1)` observation requests per unit time at `E_t` energy each,
/// subject to the strict budget `E(S) < alpha`. `barrier_t` controls the
/// logarithmic barrier that turns the budget into a cost.
#[derive(Debug, Clone, Copy)]
pub struct EnergyModel {
    pub requests_per_unit: f64,
    pub transmit_energy: f64,
    pub budget: f64,
    pub barrier_t: f64,
}

impl EnergyModel {
    pub fn new(
        requests_per_unit: f64,
        transmit_energy: f64,
        budget: f64,
        barrier_t: f64,
    ) -> Result<Self, NetworkError> {
        if requests_per_unit < 0.0 || transmit_energy < 0.0 {
            return Err(NetworkError::InvalidParameter(
                "request rate and transmit energy must be nonnegative".into(),
            ));
        }
        if !(budget > 0.0) {
            return Err(NetworkError::InvalidParameter(
                "energy budget must be positive".into(),
            ));
        }
        if !(barrier_t > 0.0) {
            return Err(NetworkError::InvalidParameter(
                "barrier control parameter must be positive".into(),
            ));
        }
        Ok(EnergyModel {
            requests_per_unit,
            transmit_energy,
            budget,
            barrier_t,
        })
    }

    /// Average per-sensor energy consumption `r (|S|-1) E_t` of a coalition
    /// of the given size; zero for singletons.
    pub fn coalition_energy(&self, size: usize) -> Result<f64, NetworkError> {
        if size == 0 {
            return Err(NetworkError::EmptyCoalition);
        }
        Ok(self.requests_per_unit * (size as f64 - 1.0) * self.transmit_energy)
    }

    /// Whether a coalition of the given size satisfies the strict budget.
    pub fn is_feasible(&self, size: usize) -> bool {
        self.coalition_energy(size)
            .map(|e| e < self.budget)
            .unwrap_or(false)
    }
}

/// How a Gaussian sensor's observation variance relates to its distance `d`
/// from the signal source: either `sigma^2 = 1/d` or `sigma^2 = d`. The two
/// readings disagree about whether near-source sensors observe well; both
/// are implemented and every experiment records which one produced its
/// output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariancePolicy {
    InverseDistance,
    DistanceProportional,
}

/// Observation variance of a sensor at `location` for a source at `source`
/// under the chosen policy.
pub fn sensor_variance(
    location: [f64; 2],
    source: [f64; 2],
    policy: VariancePolicy,
    id: usize,
) -> Result<f64, NetworkError> {
    let d = distance(location, source);
    if d < SOURCE_EPS {
        return Err(NetworkError::SourceCollocation { id });
    }
    Ok(match policy {
        VariancePolicy::InverseDistance => 1.0 / d,
        VariancePolicy::DistanceProportional => d,
    })
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Kendall-tau matrix from pairwise distances, `tau = exp(-d^2)`.
pub fn build_tau_matrix(locations: &[[f64; 2]]) -> DMatrix<f64> {
    let n = locations.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let d = distance(locations[i], locations[j]);
            (-d * d).exp()
        }
    })
}

/// Smallest eigenvalue [`build_correlation_matrix`] leaves in a network
/// correlation matrix. The entrywise elliptical map routinely produces
/// indefinite matrices whose repair would otherwise be exactly singular,
/// and every coalition submatrix inherits this floor (eigenvalue
/// interlacing), which keeps coalition covariances invertible.
pub const CORR_EIGEN_FLOOR: f64 = 1e-8;

/// Correlation matrix induced by a tau matrix: entrywise `sin(pi tau / 2)`,
/// positive-semidefinite repair (the entrywise map does not preserve
/// semidefiniteness for arbitrary deployments), then an identity blend that
/// lifts the smallest eigenvalue to [`CORR_EIGEN_FLOOR`].
pub fn build_correlation_matrix(tau: &DMatrix<f64>) -> DMatrix<f64> {
    let n = tau.nrows();
    let mapped = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (std::f64::consts::FRAC_PI_2 * tau[(i, j)]).sin()
        }
    });
    let repaired = nearest_psd(&mapped, PSD_TOL);
    let min_eig = repaired.clone().symmetric_eigen().eigenvalues.min();
    if min_eig >= CORR_EIGEN_FLOOR {
        return repaired;
    }
    let w = ((CORR_EIGEN_FLOOR - min_eig) / (1.0 - min_eig)).clamp(0.0, 1.0);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (1.0 - w) * repaired[(i, j)]
        }
    })
}

/// Draw sensor locations uniformly over `[0, region[0]] x [0, region[1]]`.
/// Deterministic per stream state.
pub fn deploy_uniform(
    n: usize,
    region: [f64; 2],
    rng: &mut Stream,
) -> Result<Vec<[f64; 2]>, NetworkError> {
    if n == 0 {
        return Err(NetworkError::InvalidCount);
    }
    if !(region[0] > 0.0 && region[1] > 0.0) {
        return Err(NetworkError::InvalidParameter(
            "region bounds must be positive".into(),
        ));
    }
    Ok((0..n)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            [x * region[0], y * region[1]]
        })
        .collect())
}

/// Immutable network: sensors, signal source, dependence matrices and the
/// energy model. Construction derives the tau matrix from locations and the
/// repaired correlation matrix from the tau matrix.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    sensors: Vec<Sensor>,
    source: [f64; 2],
    tau: DMatrix<f64>,
    corr: DMatrix<f64>,
    energy: EnergyModel,
}

impl NetworkModel {
    pub fn new(
        sensors: Vec<Sensor>,
        source: [f64; 2],
        energy: EnergyModel,
    ) -> Result<Self, NetworkError> {
        if sensors.is_empty() {
            return Err(NetworkError::InvalidCount);
        }
        for (k, s) in sensors.iter().enumerate() {
            if s.id != k {
                return Err(NetworkError::BadSensorIds(format!(
                    "position {k} holds id {}",
                    s.id
                )));
            }
            if let MarginalModel::GaussianMean { sigma } = s.marginal {
                if !(sigma > 0.0) {
                    return Err(NetworkError::InvalidParameter(format!(
                        "sensor {k} has nonpositive sigma"
                    )));
                }
            }
        }
        let locations: Vec<[f64; 2]> = sensors.iter().map(|s| s.location).collect();
        let tau = build_tau_matrix(&locations);
        let corr = build_correlation_matrix(&tau);
        Ok(NetworkModel {
            sensors,
            source,
            tau,
            corr,
            energy,
        })
    }

    /// Build a network with an explicitly supplied correlation matrix
    /// instead of the distance-based dependence model; the tau matrix is
    /// derived through the inverse elliptical map. Intended for synthetic
    /// dependence structures and tests.
    pub fn with_matrices(
        sensors: Vec<Sensor>,
        source: [f64; 2],
        corr: DMatrix<f64>,
        energy: EnergyModel,
    ) -> Result<Self, NetworkError> {
        let n = sensors.len();
        if n == 0 {
            return Err(NetworkError::InvalidCount);
        }
        if corr.nrows() != n || corr.ncols() != n {
            return Err(NetworkError::InvalidParameter(format!(
                "correlation matrix is {}x{}, expected {n}x{n}",
                corr.nrows(),
                corr.ncols()
            )));
        }
        for i in 0..n {
            if (corr[(i, i)] - 1.0).abs() > 1e-8 {
                return Err(NetworkError::InvalidParameter(
                    "correlation matrix must have unit diagonal".into(),
                ));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-8 {
                    return Err(NetworkError::InvalidParameter(
                        "correlation matrix must be symmetric".into(),
                    ));
                }
            }
        }
        for (k, s) in sensors.iter().enumerate() {
            if s.id != k {
                return Err(NetworkError::BadSensorIds(format!(
                    "position {k} holds id {}",
                    s.id
                )));
            }
        }
        let tau = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                corr[(i, j)].clamp(-1.0, 1.0).asin() / std::f64::consts::FRAC_PI_2
            }
        });
        Ok(NetworkModel {
            sensors,
            source,
            tau,
            corr,
            energy,
        })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    pub fn sensor(&self, id: usize) -> &Sensor {
        &self.sensors[id]
    }

    pub fn source(&self) -> [f64; 2] {
        self.source
    }

    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }

    pub fn energy(&self) -> &EnergyModel {
        &self.energy
    }

    /// Correlation submatrix for the given (sorted) member ids.
    pub fn sub_corr(&self, members: &[usize]) -> DMatrix<f64> {
        let m = members.len();
        DMatrix::from_fn(m, m, |i, j| self.corr[(members[i], members[j])])
    }

    /// Whether every member has a Gaussian marginal.
    pub fn all_gaussian(&self, members: &[usize]) -> bool {
        members
            .iter()
            .all(|&i| self.sensors[i].marginal.is_gaussian())
    }
}
