//! Phase-area tracking, Hamiltonian traces and mean-square convergence studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{linear_oscillator, HamiltonianSystem, State};
use crate::integrators::{integrate_with_checkpoints, SchemeConfig, TrajectoryRecord};
use crate::levy_path::{LevyConfig, LevyPath};
use crate::oracle::{exact_state, exact_state_left, OscillatorParams};

/// Default number of vertices for a sampled circle.
pub const CIRCLE_VERTICES: usize = 256;

/// A closed polygon in the `(P, Q)` plane of a one-degree-of-freedom system.
/// The last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDomain {
    pub vertices: Vec<State>,
    pub timestamp: f64,
}

impl PhaseDomain {
    pub fn new(vertices: Vec<State>, timestamp: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Domain(format!(
                "a phase domain needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| v.dim() != 1) {
            return Err(Error::Domain(
                "phase domains are defined for n = 1 only".into(),
            ));
        }
        Ok(Self {
            vertices,
            timestamp,
        })
    }

    /// `vertices` points evenly spaced on a circle, counter-clockwise from angle 0.
    pub fn circle(center: (f64, f64), radius: f64, vertices: usize) -> Result<Self> {
        let pts = (0..vertices)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / vertices as f64;
                State::scalar(center.0 + radius * a.cos(), center.1 + radius * a.sin())
            })
            .collect();
        Self::new(pts, 0.0)
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }
}

/// Absolute polygon area of `domain`.
pub fn shoelace_area(domain: &PhaseDomain) -> Result<f64> {
    if domain.vertices.len() < 3 {
        return Err(Error::Domain(
            "shoelace area needs at least 3 vertices".into(),
        ));
    }
    Ok(shoelace(&domain.vertices))
}

fn shoelace(v: &[State]) -> f64 {
    let n = v.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (&v[i], &v[(i + 1) % n]);
            a.p[0] * b.q[0] - b.p[0] * a.q[0]
        })
        .sum();
    0.5 * twice.abs()
}

/// Carries every vertex of `initial` along the same path with the scheme in
/// `cfg` and returns the image polygon at each snapshot time.
pub fn evolve_domain(
    sys: &HamiltonianSystem,
    path: &LevyPath,
    cfg: &SchemeConfig,
    initial: &PhaseDomain,
    snapshot_times: &[f64],
) -> Result<Vec<PhaseDomain>> {
    if sys.dim() != 1 {
        return Err(Error::Domain(
            "phase domains are defined for n = 1 only".into(),
        ));
    }
    let t_last = snapshot_times.iter().copied().fold(0.0, f64::max);
    if t_last == 0.0 {
        return Ok(snapshot_times
            .iter()
            .map(|&t| PhaseDomain {
                vertices: initial.vertices.clone(),
                timestamp: t,
            })
            .collect());
    }
    let run_cfg = SchemeConfig {
        t_end: t_last,
        record_every: usize::MAX,
        ..cfg.clone()
    };
    let images: Vec<Vec<State>> = initial
        .vertices
        .par_iter()
        .enumerate()
        .map(|(index, v)| {
            integrate_with_checkpoints(sys, v, path, &run_cfg, snapshot_times)
                .map(|(_, snaps)| snaps)
                .map_err(|e| Error::AtVertex {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    Ok(snapshot_times
        .iter()
        .enumerate()
        .map(|(k, &t)| PhaseDomain {
            vertices: images.iter().map(|snaps| snaps[k].clone()).collect(),
            timestamp: t,
        })
        .collect())
}

/// [`evolve_domain`] under the exact oscillator flow with noise amplitude `beta`.
pub fn evolve_domain_exact(
    beta: f64,
    path: &LevyPath,
    initial: &PhaseDomain,
    snapshot_times: &[f64],
) -> Result<Vec<PhaseDomain>> {
    snapshot_times
        .iter()
        .map(|&t| {
            let vertices = initial
                .vertices
                .iter()
                .enumerate()
                .map(|(index, v)| {
                    let params = OscillatorParams {
                        beta,
                        p0: v.p[0],
                        q0: v.q[0],
                    };
                    exact_state(&params, path, t).map_err(|e| Error::AtVertex {
                        index,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<_>>()?;
            Ok(PhaseDomain {
                vertices,
                timestamp: t,
            })
        })
        .collect()
}

/// How the per-path error of one run is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMetric {
    /// Euclidean error of the state at `t_end`.
    #[default]
    Endpoint,
    /// Largest euclidean error over all recorded nodes.
    SupOverGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup {
    /// Driving process; `seed` is the master seed and `horizon` is replaced by `t_end`.
    pub levy: LevyConfig,
    pub params: OscillatorParams,
    /// Scheme and solver settings; `dt` and `t_end` are set per run.
    pub scheme: SchemeConfig,
    /// Strictly decreasing.
    pub step_sizes: Vec<f64>,
    pub paths: usize,
    pub t_end: f64,
    pub metric: ErrorMetric,
}

impl Default for ConvergenceSetup {
    fn default() -> Self {
        Self {
            levy: LevyConfig::default(),
            params: OscillatorParams::default(),
            scheme: SchemeConfig::default(),
            step_sizes: vec![0.02, 0.01, 0.005, 0.0025],
            paths: 100,
            t_end: 20.0,
            metric: ErrorMetric::Endpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub step_sizes: Vec<f64>,
    /// `sqrt(E |X_N - X(t_end)|^2)` estimated over `num_paths` paths.
    pub rms_errors: Vec<f64>,
    /// Least-squares slope of `ln(rms)` against `ln(tau)`.
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    pub num_paths: usize,
}

/// Seed of path `index`: the `index + 1`-th SplitMix64 output from state `master`.
pub fn path_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean-square error of the oscillator scheme against the exact solution on
/// common paths, for each step size, plus a log-log order fit.
///
/// Paths run in parallel; per-path errors are summed in path order so the
/// report does not depend on the thread count.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceReport> {
    if setup.paths == 0 {
        return Err(Error::Config("at least one path is required".into()));
    }
    if setup.step_sizes.len() < 2 {
        return Err(Error::Config(
            "an order fit needs at least two step sizes".into(),
        ));
    }
    if setup
        .step_sizes
        .iter()
        .any(|&h| !(h.is_finite() && h > 0.0))
    {
        return Err(Error::Config("step sizes must be positive".into()));
    }
    if !setup.step_sizes.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::Config(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    if !(setup.t_end.is_finite() && setup.t_end > 0.0) {
        return Err(Error::Config(format!(
            "t_end must be positive, got {}",
            setup.t_end
        )));
    }
    if setup.step_sizes[0] > setup.t_end {
        return Err(Error::Config("step sizes must not exceed t_end".into()));
    }
    setup.params.validate()?;
    let levy = LevyConfig {
        horizon: setup.t_end,
        ..setup.levy.clone()
    };
    levy.validate()?;
    let sys = linear_oscillator(setup.params.beta);

    let per_path: Vec<Vec<f64>> = (0..setup.paths)
        .into_par_iter()
        .map(|index| {
            path_squared_errors(&sys, setup, &levy, index).map_err(|e| Error::AtPath {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let rms_errors: Vec<f64> = (0..setup.step_sizes.len())
        .map(|k| {
            let total: f64 = per_path.iter().map(|errs| errs[k]).sum();
            (total / setup.paths as f64).sqrt()
        })
        .collect();
    if rms_errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Domain(format!(
            "log-log fit needs positive finite errors, got {rms_errors:?}"
        )));
    }
    let points: Vec<(f64, f64)> = setup
        .step_sizes
        .iter()
        .zip(&rms_errors)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let (fitted_slope, fitted_intercept, fit_residual) = least_squares(&points);
    Ok(ConvergenceReport {
        step_sizes: setup.step_sizes.clone(),
        rms_errors,
        fitted_slope,
        fitted_intercept,
        fit_residual,
        num_paths: setup.paths,
    })
}

fn path_squared_errors(
    sys: &HamiltonianSystem,
    setup: &ConvergenceSetup,
    levy: &LevyConfig,
    index: usize,
) -> Result<Vec<f64>> {
    let path = LevyPath::sample(&LevyConfig {
        seed: path_seed(levy.seed, index as u64),
        ..levy.clone()
    })?;
    let x0 = setup.params.initial_state();
    let exact_end = exact_state(&setup.params, &path, setup.t_end)?;
    setup
        .step_sizes
        .iter()
        .map(|&dt| {
            let cfg = SchemeConfig {
                dt,
                t_end: setup.t_end,
                record_every: match setup.metric {
                    ErrorMetric::Endpoint => usize::MAX,
                    ErrorMetric::SupOverGrid => 1,
                },
                ..setup.scheme.clone()
            };
            let (record, _) = integrate_with_checkpoints(sys, &x0, &path, &cfg, &[])?;
            match setup.metric {
                ErrorMetric::Endpoint => Ok(record.final_state().distance(&exact_end).powi(2)),
                ErrorMetric::SupOverGrid => sup_squared_error(&record, &setup.params, &path),
            }
        })
        .collect()
}

fn sup_squared_error(
    record: &TrajectoryRecord,
    params: &OscillatorParams,
    path: &LevyPath,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (i, (&t, s)) in record.times.iter().zip(&record.states).enumerate() {
        // the entry before a jump entry at the same time is the left limit
        let left = record.jump_flags.get(i + 1).copied().unwrap_or(false)
            && record.times[i + 1] == t
            && !record.jump_flags[i];
        let exact = if left {
            exact_state_left(params, path, t)?
        } else {
            exact_state(params, path, t)?
        };
        worst = worst.max(s.distance(&exact).powi(2));
    }
    Ok(worst)
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, rms residual)`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// The `(t, H0)` series of a record.
pub fn hamiltonian_trace(record: &TrajectoryRecord) -> Result<Vec<(f64, f64)>> {
    let h = record.hamiltonians.as_ref().ok_or_else(|| {
        Error::Capability("trajectory was recorded without Hamiltonian values".into())
    })?;
    Ok(record
        .times
        .iter()
        .copied()
        .zip(h.iter().copied())
        .collect())
}

/// Time average of a sampled trace by the trapezoidal rule.
pub fn time_average(trace: &[(f64, f64)]) -> f64 {
    let (t0, t1) = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) if b.0 > a.0 => (a.0, b.0),
        (Some(a), _) => return a.1,
        _ => return f64::NAN,
    };
    let integral: f64 = trace
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    integral / (t1 - t0)
}

/// Change of `H0` across each jump-free stretch of the record: from the
/// start (or a post-jump entry) to the next left-limit entry (or the end).
pub fn inter_jump_increments(record: &TrajectoryRecord) -> Result<Vec<f64>> {
    let h = record.hamiltonians.as_ref().ok_or_else(|| {
        Error::Capability("trajectory was recorded without Hamiltonian values".into())
    })?;
    let mut increments = Vec::new();
    let mut start = 0;
    for i in 1..record.len() {
        if record.jump_flags[i] {
            if i - 1 > start {
                increments.push(h[i - 1] - h[start]);
            }
            start = i;
        }
    }
    if record.len() - 1 > start {
        increments.push(h[record.len() - 1] - h[start]);
    }
    Ok(increments)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub positive: usize,
    pub negative: usize,
    /// Two-sided exact binomial p-value under `P(+) = 1/2`.
    pub p_value: f64,
}

/// Sign test for a monotone trend in `values`; exact zeros are dropped.
pub fn sign_test(values: &[f64]) -> SignTest {
    let positive = values.iter().filter(|&&v| v > 0.0).count();
    let negative = values.iter().filter(|&&v| v < 0.0).count();
    let n = positive + negative;
    let k = positive.min(negative);
    // P(X <= k) for X ~ Bin(n, 1/2), summed in log space
    let mut log_term = -(n as f64) * std::f64::consts::LN_2;
    let mut tail = log_term.exp();
    for i in 1..=k {
        log_term += ((n - i + 1) as f64 / i as f64).ln();
        tail += log_term.exp();
    }
    SignTest {
        positive,
        negative,
        p_value: (2.0 * tail).min(1.0),
    }
}
