//! Monte-Carlo campaigns comparing `P_k` and `P_m` at fixed mesh sizes.
//!
//! For every `h` of the grid and every trial, two meshes are generated from
//! independent seeds, one solved with `P_k` and the other with `P_m`. The
//! fraction of trials where `P_m` is at least as accurate gives the empirical
//! frequency; the pooled samples give the bound coefficients and `ĥ*`, at
//! which both laws are then tabulated.
//!
//! Trials are independent work items keyed by `(h_index, trial)`, run in
//! parallel with rayon and reduced by index, so the result does not depend on
//! the number of workers.

use rayon::prelude::*;
use relacc_core::fem::{error_norm, error_quad_degree, QuadratureRule};
use relacc_core::laws::{
    empirical_frequency, estimate_coefficient, estimate_h_star, sigmoid_law, two_steps_law,
    BoundCoefficient, ErrorSample, LawError,
};
use relacc_core::meshgen::{generate_mesh, MeshError, MeshParams};
use relacc_core::{seed, solve_poisson, FemError, FemOptions, NormKind, ProblemCase};

/// Errors at or below this are round-off: they compare as exact ties and
/// are left out of slope fits.
pub const EXACT_ERROR_FLOOR: f64 = 1e-9;

fn floored(error: f64) -> f64 {
    if error <= EXACT_ERROR_FLOOR {
        0.0
    } else {
        error
    }
}

/// Grid used for the Runge presets: 0.05, 0.06, ..., 0.18.
pub fn runge_h_grid() -> Vec<f64> {
    linear_grid(0.05, 0.18, 14)
}

/// Grid for the smooth preset: 0.06, 0.08, ..., 0.30.
pub fn smooth_h_grid() -> Vec<f64> {
    linear_grid(0.06, 0.30, 13)
}

/// `steps` equally spaced values from `min` to `max`, rounded to 12 decimals.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| {
            let x = min + (max - min) * i as f64 / (steps - 1) as f64;
            (x * 1e12).round() / 1e12
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "h = {h}: only {n_effective} of {attempted} trials succeeded, at least {required} needed"
    )]
    TooManyFailures {
        h: f64,
        n_effective: usize,
        attempted: usize,
        required: usize,
    },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Trial(#[from] TrialFailure),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// Why a single trial produced no sample.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrialFailure {
    #[error("mesh generation failed: {0}")]
    Mesh(#[from] MeshError),
    #[error("finite element solve failed: {0}")]
    Fem(#[from] FemError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub case: ProblemCase,
    pub k: usize,
    pub m: usize,
    /// Strictly increasing mesh sizes.
    pub h_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub jitter: f64,
    pub min_angle_deg: f64,
    pub fem: FemOptions,
    pub norm: NormKind,
    /// Worker count; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl CampaignConfig {
    pub const DEFAULT_TRIALS: usize = 500;
    pub const DEFAULT_JITTER: f64 = 0.3;

    pub fn new(case: ProblemCase, k: usize, m: usize, h_grid: Vec<f64>) -> Self {
        Self {
            case,
            k,
            m,
            h_grid,
            trials: Self::DEFAULT_TRIALS,
            master_seed: 0,
            jitter: Self::DEFAULT_JITTER,
            min_angle_deg: MeshParams::DEFAULT_MIN_ANGLE_DEG,
            fem: FemOptions::default(),
            norm: NormKind::Full,
            threads: None,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if !(1..=relacc_core::fem::MAX_DEGREE).contains(&self.k)
            || !(1..=relacc_core::fem::MAX_DEGREE).contains(&self.m)
            || self.k >= self.m
        {
            return bad(format!(
                "degrees must satisfy 1 <= k < m <= 4, got k={}, m={}",
                self.k, self.m
            ));
        }
        if self.h_grid.is_empty() {
            return bad("h grid is empty".into());
        }
        if self.h_grid.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return bad("every h must be positive and finite".into());
        }
        if self.h_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("h grid must be strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("at least one trial per h is required".into());
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive".into());
        }
        MeshParams::new(self.h_grid[0], 0)
            .with_jitter(self.jitter)
            .with_min_angle(self.min_angle_deg)
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        if !(self.fem.cg.tol > 0.0) {
            return bad(format!("solver tolerance must be positive, got {}", self.fem.cg.tol));
        }
        Ok(())
    }

    /// Smallest number of successful trials a row needs.
    pub fn min_effective(&self) -> usize {
        2.max(self.trials.div_ceil(2)).min(self.trials)
    }

    /// Seed of the mesh for `slot` 0 (`P_k`) or 1 (`P_m`) of a trial.
    pub fn trial_seed(&self, h_index: usize, trial: usize, slot: u64) -> u64 {
        seed::hash_key(self.master_seed, &[h_index as u64, trial as u64, slot])
    }

    fn mesh_params(&self, h: f64, seed: u64) -> MeshParams {
        MeshParams::new(h, seed)
            .with_jitter(self.jitter)
            .with_min_angle(self.min_angle_deg)
    }
}

/// Produces one error realization for a degree on a seeded mesh.
pub trait ErrorSource: Sync {
    fn measure(
        &self,
        config: &CampaignConfig,
        h: f64,
        degree: usize,
        seed: u64,
    ) -> Result<f64, TrialFailure>;
}

/// Generates the mesh, solves the Poisson problem and measures the H1 error.
#[derive(Debug, Clone, Copy, Default)]
pub struct FemSolver;

impl ErrorSource for FemSolver {
    fn measure(
        &self,
        config: &CampaignConfig,
        h: f64,
        degree: usize,
        seed: u64,
    ) -> Result<f64, TrialFailure> {
        let mesh = generate_mesh(&config.mesh_params(h, seed))?;
        let solution = solve_poisson(&mesh, degree, &config.case, &config.fem)?;
        let rule = QuadratureRule::triangle(error_quad_degree(degree));
        Ok(error_norm(&solution, &config.case, config.norm, &rule))
    }
}

/// Synthetic errors `U * C_i * h^i` with `U` uniform on `[0, 1)`, the model
/// under which the sigmoid law is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformModel {
    pub coef_k: f64,
    pub coef_m: f64,
}

impl ErrorSource for UniformModel {
    fn measure(
        &self,
        config: &CampaignConfig,
        h: f64,
        degree: usize,
        seed: u64,
    ) -> Result<f64, TrialFailure> {
        let coef = if degree == config.k {
            self.coef_k
        } else {
            self.coef_m
        };
        let u = seed::unit_f64(seed, &[degree as u64]);
        Ok(u * coef * h.powi(degree as i32))
    }
}

/// The two samples of one successful trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPair {
    pub h_index: usize,
    pub trial: usize,
    pub k: ErrorSample,
    pub m: ErrorSample,
}

impl TrialPair {
    /// `P_m` at least as accurate as `P_k`; errors at round-off level tie.
    pub fn m_wins(&self) -> bool {
        floored(self.m.error) <= floored(self.k.error)
    }
}

pub fn run_trial(
    config: &CampaignConfig,
    source: &dyn ErrorSource,
    h_index: usize,
    trial: usize,
) -> Result<TrialPair, TrialFailure> {
    let h = config.h_grid[h_index];
    let sample = |degree: usize, slot: u64| -> Result<ErrorSample, TrialFailure> {
        let seed = config.trial_seed(h_index, trial, slot);
        let error = source.measure(config, h, degree, seed)?;
        Ok(ErrorSample {
            h,
            seed,
            degree,
            error,
        })
    };
    Ok(TrialPair {
        h_index,
        trial,
        k: sample(config.k, 0)?,
        m: sample(config.m, 1)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub h: f64,
    pub n_effective: usize,
    pub n_failed: usize,
    pub frequency: f64,
    /// Law values at `h`, NaN when `ĥ*` could not be estimated.
    pub two_steps: f64,
    pub sigmoid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub k: usize,
    pub m: usize,
    pub rows: Vec<FrequencyRow>,
    /// `None` when every error of one degree is at round-off level.
    pub h_star: Option<f64>,
    pub coef_k: BoundCoefficient,
    pub coef_m: BoundCoefficient,
}

impl FrequencyTable {
    /// Root-mean-square gap between the empirical frequency and the sigmoid law.
    pub fn sigmoid_rms(&self) -> Option<f64> {
        self.h_star?;
        let sum: f64 = self
            .rows
            .iter()
            .map(|r| (r.frequency - r.sigmoid).powi(2))
            .sum();
        Some((sum / self.rows.len() as f64).sqrt())
    }

    /// Same for the two-steps law.
    pub fn two_steps_rms(&self) -> Option<f64> {
        self.h_star?;
        let sum: f64 = self
            .rows
            .iter()
            .map(|r| (r.frequency - r.two_steps).powi(2))
            .sum();
        Some((sum / self.rows.len() as f64).sqrt())
    }

    /// First grid value whose frequency drops below 1/2.
    pub fn first_h_below_half(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.frequency < 0.5).map(|r| r.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub table: FrequencyTable,
    /// Successful trials, ordered by `(h_index, trial)`.
    pub samples: Vec<TrialPair>,
    /// `(h_index, trial, reason)` of every failed trial.
    pub failures: Vec<(usize, usize, TrialFailure)>,
}

pub fn run_campaign(
    config: &CampaignConfig,
    source: &dyn ErrorSource,
) -> Result<CampaignResult, ExperimentError> {
    config.validate()?;
    let n_h = config.h_grid.len();
    let n = config.trials;
    let work = || -> Vec<Result<TrialPair, TrialFailure>> {
        (0..n_h * n)
            .into_par_iter()
            .map(|item| run_trial(config, source, item / n, item % n))
            .collect()
    };
    let outcomes = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut samples = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (item, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(pair) => samples.push(pair),
            Err(e) => failures.push((item / n, item % n, e)),
        }
    }

    let mut per_row: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(n); n_h];
    for pair in &samples {
        per_row[pair.h_index].push((floored(pair.m.error), floored(pair.k.error)));
    }
    let required = config.min_effective();
    for (h_index, pairs) in per_row.iter().enumerate() {
        if pairs.len() < required {
            return Err(ExperimentError::TooManyFailures {
                h: config.h_grid[h_index],
                n_effective: pairs.len(),
                attempted: n,
                required,
            });
        }
    }

    let k_samples: Vec<ErrorSample> = samples.iter().map(|p| p.k).collect();
    let m_samples: Vec<ErrorSample> = samples.iter().map(|p| p.m).collect();
    let coef_k = estimate_coefficient(&k_samples, config.k)?;
    let coef_m = estimate_coefficient(&m_samples, config.m)?;
    let exact = |s: &[ErrorSample]| s.iter().all(|s| s.error <= EXACT_ERROR_FLOOR);
    let h_star = if !exact(&k_samples) && !exact(&m_samples) {
        Some(estimate_h_star(&coef_k, &coef_m)?)
    } else {
        None
    };

    let rows = config
        .h_grid
        .iter()
        .zip(&per_row)
        .map(|(&h, pairs)| {
            let (two_steps, sigmoid) = match h_star {
                Some(hs) => (two_steps_law(h, hs)?, sigmoid_law(h, hs, config.k, config.m)?),
                None => (f64::NAN, f64::NAN),
            };
            Ok(FrequencyRow {
                h,
                n_effective: pairs.len(),
                n_failed: n - pairs.len(),
                frequency: empirical_frequency(pairs)?,
                two_steps,
                sigmoid,
            })
        })
        .collect::<Result<Vec<_>, LawError>>()?;

    Ok(CampaignResult {
        table: FrequencyTable {
            k: config.k,
            m: config.m,
            rows,
            h_star,
            coef_k,
            coef_m,
        },
        samples,
        failures,
    })
}

/// Errors on structured meshes and the fitted convergence rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub degree: usize,
    /// `(nominal h, realized h, H1 error)`.
    pub points: Vec<(f64, f64, f64)>,
    /// Least-squares slope of `ln(error)` against `ln(realized h)`; `None`
    /// when every error is at round-off level.
    pub slope: Option<f64>,
}

pub fn convergence_study(
    case: &ProblemCase,
    k: usize,
    h_list: &[f64],
    seed: u64,
    fem: &FemOptions,
) -> Result<ConvergenceStudy, ExperimentError> {
    if h_list.len() < 3 {
        return Err(ExperimentError::InvalidConfig(
            "a convergence study needs at least three mesh sizes".into(),
        ));
    }
    if h_list.iter().any(|&h| !(h.is_finite() && h > 0.0)) || h_list.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(ExperimentError::InvalidConfig(
            "mesh sizes must be positive and strictly decreasing".into(),
        ));
    }
    let mut points = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let mesh = generate_mesh(&MeshParams::new(h, seed)).map_err(TrialFailure::from)?;
        let solution = solve_poisson(&mesh, k, case, fem).map_err(TrialFailure::from)?;
        let error = relacc_core::h1_error(&solution, case);
        points.push((h, mesh.h_actual(), error));
    }
    let slope = if points.iter().all(|p| p.2 <= EXACT_ERROR_FLOOR) {
        None
    } else {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.1.ln(), p.2.ln())).collect();
        Some(least_squares_slope(&xy))
    };
    Ok(ConvergenceStudy {
        degree: k,
        points,
        slope,
    })
}

pub fn least_squares_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_grids() {
        let r = runge_h_grid();
        assert_eq!(r.len(), 14);
        assert_eq!(r[0], 0.05);
        assert_eq!(r[1], 0.06);
        assert_eq!(r[13], 0.18);
        let s = smooth_h_grid();
        assert_eq!(s.len(), 13);
        assert_eq!(s[12], 0.3);
        assert_eq!(linear_grid(0.1, 0.2, 1), vec![0.1]);
    }

    #[test]
    fn min_effective_rows() {
        let c = CampaignConfig::new(ProblemCase::smooth(), 1, 2, vec![0.1]);
        assert_eq!(c.clone().with_trials(1).min_effective(), 1);
        assert_eq!(c.clone().with_trials(3).min_effective(), 2);
        assert_eq!(c.clone().with_trials(100).min_effective(), 50);
        assert_eq!(c.with_trials(101).min_effective(), 51);
    }

    #[test]
    fn config_validation() {
        let base = CampaignConfig::new(ProblemCase::smooth(), 2, 3, vec![0.1, 0.2]);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.k = 3;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.m = 5;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.h_grid = vec![0.2, 0.1];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.h_grid = vec![0.0, 0.1];
        assert!(c.validate().is_err());
        assert!(base.clone().with_trials(0).validate().is_err());
        let mut c = base.clone();
        c.jitter = 0.6;
        assert!(c.validate().is_err());
        assert!(base.with_threads(0).validate().is_err());
    }

    #[test]
    fn trial_seeds_differ_by_slot_and_index() {
        let c = CampaignConfig::new(ProblemCase::smooth(), 2, 3, vec![0.1, 0.2]);
        let a = c.trial_seed(0, 0, 0);
        assert_ne!(a, c.trial_seed(0, 0, 1));
        assert_ne!(a, c.trial_seed(1, 0, 0));
        assert_ne!(a, c.trial_seed(0, 1, 0));
        assert_eq!(a, c.trial_seed(0, 0, 0));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xy: Vec<(f64, f64)> = [0.2f64, 0.1, 0.05]
            .iter()
            .map(|h| (h.ln(), (3.0 * h.powi(2)).ln()))
            .collect();
        assert!((least_squares_slope(&xy) - 2.0).abs() < 1e-12);
    }
}
