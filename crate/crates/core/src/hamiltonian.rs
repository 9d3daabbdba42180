//! Hamiltonian systems described by their partial-gradient callbacks.
//!
//! The drift is given by `sigma0 = dH0/dQ` and `gamma0 = dH0/dP`, so that
//!
//! ```text
//! dP = -sigma0(P, Q) dt - sum_r sigma_r(t) <> dL_r
//! dQ =  gamma0(P, Q) dt + sum_r gamma_r(t) <> dL_r
//! ```
//!
//! where `<>` is the Marcus integral. Each noise channel `r` carries the
//! vector field `V_r = (-dH_r/dQ, dH_r/dP)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A phase-space point: momenta `p` and positions `q`, both of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl State {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::Config(format!(
                "state needs equal non-zero dimensions, got |P| = {}, |Q| = {}",
                p.len(),
                q.len()
            )));
        }
        let s = Self { p, q };
        if !s.is_finite() {
            return Err(Error::Config("state has non-finite entries".into()));
        }
        Ok(s)
    }

    /// A one-degree-of-freedom state.
    pub fn scalar(p: f64, q: f64) -> Self {
        Self {
            p: vec![p],
            q: vec![q],
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|x| x.is_finite())
    }

    /// The flat `2n` vector `(P_1..P_n, Q_1..Q_n)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.p.iter().chain(&self.q).copied().collect()
    }

    /// Inverse of [`State::to_vec`].
    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            p: x[..n].to_vec(),
            q: x[n..].to_vec(),
        }
    }

    pub fn distance(&self, other: &State) -> f64 {
        self.p
            .iter()
            .chain(&self.q)
            .zip(other.p.iter().chain(&other.q))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.p
            .iter()
            .chain(&self.q)
            .zip(other.p.iter().chain(&other.q))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `(P, Q) -> R^n`
pub type PhaseFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `t -> R^n`
pub type TimeFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// `(P, Q) -> R`
pub type ScalarFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `xi -> V(xi)`, returned in `(dP, dQ)` layout.
pub type FieldFn = Arc<dyn Fn(&State) -> State + Send + Sync>;

/// The vector field attached to one noise channel.
#[derive(Clone)]
pub enum NoiseField {
    /// `sigma_r(t) = dH_r/dQ`, `gamma_r(t) = dH_r/dP`, independent of the state.
    /// The field is `V_r = (-sigma_r, gamma_r)`.
    Additive { sigma: TimeFn, gamma: TimeFn },
    /// A general field `V_r(xi)`. Only the jump flow supports it.
    StateDependent(FieldFn),
}

impl NoiseField {
    /// `V_r` evaluated at `xi` and time `t`.
    pub fn eval(&self, xi: &State, t: f64) -> State {
        match self {
            NoiseField::Additive { sigma, gamma } => State {
                p: sigma(t).into_iter().map(|s| -s).collect(),
                q: gamma(t),
            },
            NoiseField::StateDependent(field) => field(xi),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, NoiseField::Additive { .. })
    }
}

impl fmt::Debug for NoiseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseField::Additive { .. } => f.write_str("Additive"),
            NoiseField::StateDependent(_) => f.write_str("StateDependent"),
        }
    }
}

/// Systems with a hand-derived closed form for some operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `H0 = (P^2 + Q^2) / 2`, one channel with `H_1 = -beta Q`.
    LinearOscillator { beta: f64 },
}

/// A Hamiltonian system in `2n` dimensions with `m` noise channels.
#[derive(Clone)]
pub struct HamiltonianSystem {
    n: usize,
    sigma0: PhaseFn,
    gamma0: PhaseFn,
    noise: Vec<NoiseField>,
    lipschitz_k: f64,
    h0: Option<ScalarFn>,
    builtin: Option<Builtin>,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("n", &self.n)
            .field("noise", &self.noise)
            .field("lipschitz_k", &self.lipschitz_k)
            .field("has_h0", &self.h0.is_some())
            .field("builtin", &self.builtin)
            .finish()
    }
}

impl HamiltonianSystem {
    /// A system from its drift gradients. `sigma0 = dH0/dQ`, `gamma0 = dH0/dP`.
    pub fn new<S, G>(n: usize, sigma0: S, gamma0: G, lipschitz_k: f64) -> Result<Self>
    where
        S: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Config("dimension n must be at least 1".into()));
        }
        if !(lipschitz_k.is_finite() && lipschitz_k > 0.0) {
            return Err(Error::Config(format!(
                "Lipschitz constant must be positive, got {lipschitz_k}"
            )));
        }
        Ok(Self {
            n,
            sigma0: Arc::new(sigma0),
            gamma0: Arc::new(gamma0),
            noise: Vec::new(),
            lipschitz_k,
            h0: None,
            builtin: None,
        })
    }

    /// Adds an additive noise channel from `sigma_r = dH_r/dQ` and `gamma_r = dH_r/dP`.
    pub fn with_additive_noise<S, G>(mut self, sigma: S, gamma: G) -> Self
    where
        S: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.noise.push(NoiseField::Additive {
            sigma: Arc::new(sigma),
            gamma: Arc::new(gamma),
        });
        self
    }

    /// Adds a noise channel with a state-dependent field `V_r(xi)`.
    pub fn with_noise_field<F>(mut self, field: F) -> Self
    where
        F: Fn(&State) -> State + Send + Sync + 'static,
    {
        self.noise.push(NoiseField::StateDependent(Arc::new(field)));
        self
    }

    pub fn with_hamiltonian<H>(mut self, h0: H) -> Self
    where
        H: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.h0 = Some(Arc::new(h0));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_channels(&self) -> usize {
        self.noise.len()
    }

    pub fn lipschitz_k(&self) -> f64 {
        self.lipschitz_k
    }

    pub fn builtin(&self) -> Option<Builtin> {
        self.builtin
    }

    /// The same system with any closed-form shortcut removed, so every
    /// operation takes the generic callback path.
    pub fn as_generic(&self) -> Self {
        Self {
            builtin: None,
            ..self.clone()
        }
    }

    pub fn noise(&self, r: usize) -> Result<&NoiseField> {
        self.noise.get(r).ok_or_else(|| {
            Error::Domain(format!(
                "noise channel {r} out of range (system has {})",
                self.noise.len()
            ))
        })
    }

    pub fn is_additive(&self) -> bool {
        self.noise.iter().all(NoiseField::is_additive)
    }

    pub fn has_hamiltonian(&self) -> bool {
        self.h0.is_some()
    }

    /// `dH0/dQ` at `(p, q)`.
    pub fn sigma0(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        (self.sigma0)(p, q)
    }

    /// `dH0/dP` at `(p, q)`.
    pub fn gamma0(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        (self.gamma0)(p, q)
    }

    /// `H0` at `s`.
    pub fn hamiltonian(&self, s: &State) -> Result<f64> {
        match &self.h0 {
            Some(h) => Ok(h(&s.p, &s.q)),
            None => Err(Error::Capability(
                "system does not provide a Hamiltonian callback".into(),
            )),
        }
    }

    /// Largest step size `tau` with `1 - 8 sqrt(2) K^2 tau^2 > 0` holding in the limit:
    /// `tau_max = 1 / (K sqrt(8 sqrt(2)))`.
    pub fn step_size_bound(&self) -> f64 {
        1.0 / (self.lipschitz_k * (8.0 * std::f64::consts::SQRT_2).sqrt())
    }
}

/// The linear stochastic oscillator
///
/// ```text
/// dP = -Q dt + beta <> dL
/// dQ =  P dt
/// ```
///
/// with `H0 = (P^2 + Q^2) / 2` and `H_1 = -beta Q`. The general form subtracts
/// `sigma_1 <> dL` in the P equation, so `sigma_1 = dH_1/dQ = -beta` gives the
/// `+beta` sign above.
pub fn linear_oscillator(beta: f64) -> HamiltonianSystem {
    let mut sys = HamiltonianSystem::new(1, |_p, q| q.to_vec(), |p, _q| p.to_vec(), 1.0)
        .expect("oscillator parameters are valid")
        .with_additive_noise(move |_t| vec![-beta], |_t| vec![0.0])
        .with_hamiltonian(|p, q| 0.5 * (p[0] * p[0] + q[0] * q[0]));
    sys.builtin = Some(Builtin::LinearOscillator { beta });
    sys
}
