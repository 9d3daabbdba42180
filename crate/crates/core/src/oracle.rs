//! Closed-form solution of the linear stochastic oscillator
//!
//! ```text
//! dP = -Q dt + beta <> dL,   dQ = P dt
//! ```
//!
//! on a realized compound-Poisson path. The drift is a clockwise rotation of
//! the phase plane and each jump adds `beta R_k` to `P`, so
//!
//! ```text
//! P(t) =  P0 cos t - Q0 sin t + beta sum_{tau_k <= t} cos(t - tau_k) R_k
//! Q(t) =  P0 sin t + Q0 cos t + beta sum_{tau_k <= t} sin(t - tau_k) R_k
//! ```
//!
//! For additive noise the Marcus and Ito integrals coincide, and with no
//! Brownian part the stochastic convolutions are finite sums.

use crate::error::{Error, Result};
use crate::hamiltonian::State;
use crate::levy_path::LevyPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub beta: f64,
    pub p0: f64,
    pub q0: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            p0: 0.0,
            q0: 1.0,
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_finite() && self.p0.is_finite() && self.q0.is_finite() {
            Ok(())
        } else {
            Err(Error::Config("oscillator parameters must be finite".into()))
        }
    }

    pub fn initial_state(&self) -> State {
        State::scalar(self.p0, self.q0)
    }
}

/// Exact state at `t`, right-continuous at jump times.
pub fn exact_state(params: &OscillatorParams, path: &LevyPath, t: f64) -> Result<State> {
    evaluate(params, path, t, true)
}

/// Exact left limit `X(t-)`; differs from [`exact_state`] only at jump times.
pub fn exact_state_left(params: &OscillatorParams, path: &LevyPath, t: f64) -> Result<State> {
    evaluate(params, path, t, false)
}

/// `H0 = (P^2 + Q^2) / 2` on the exact solution.
pub fn exact_hamiltonian(params: &OscillatorParams, path: &LevyPath, t: f64) -> Result<f64> {
    exact_state(params, path, t).map(|s| energy(&s))
}

pub fn exact_hamiltonian_left(params: &OscillatorParams, path: &LevyPath, t: f64) -> Result<f64> {
    exact_state_left(params, path, t).map(|s| energy(&s))
}

fn energy(s: &State) -> f64 {
    0.5 * (s.p[0] * s.p[0] + s.q[0] * s.q[0])
}

fn evaluate(params: &OscillatorParams, path: &LevyPath, t: f64, inclusive: bool) -> Result<State> {
    if !(t >= 0.0 && t <= path.horizon()) {
        return Err(Error::Domain(format!(
            "time {t} outside [0, {}]",
            path.horizon()
        )));
    }
    if path.num_channels() != 1 {
        return Err(Error::Config(format!(
            "the oscillator has one noise channel, path has {}",
            path.num_channels()
        )));
    }
    let ch = path.channel(0)?;
    let end = if inclusive {
        ch.times.partition_point(|&tau| tau <= t)
    } else {
        ch.times.partition_point(|&tau| tau < t)
    };
    let (mut conv_cos, mut conv_sin) = (0.0, 0.0);
    for (&tau, &size) in ch.times[..end].iter().zip(&ch.sizes[..end]) {
        let (s, c) = (t - tau).sin_cos();
        conv_cos += c * size;
        conv_sin += s * size;
    }
    let (s, c) = t.sin_cos();
    Ok(State::scalar(
        params.p0 * c - params.q0 * s + params.beta * conv_cos,
        params.p0 * s + params.q0 * c + params.beta * conv_sin,
    ))
}
