//! Marcus jump maps.
//!
//! A jump of size `l` in channel `r` at time `tau` maps the left-limit state
//! `x` to `xi(1)`, where `xi' = V_r(xi) * l` on `s in [0, 1]` with `xi(0) = x`.
//! For additive noise the field is constant and the map is the translation
//! `P -= sigma_r(tau) l`, `Q += gamma_r(tau) l`. Other fields are integrated
//! with fixed-step RK4.

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSystem, NoiseField, State};
use crate::levy_path::JumpEvent;

/// Default number of RK4 substeps on the unit interval.
pub const DEFAULT_SUBSTEPS: usize = 100;

/// Post-jump state `Phi(x, l)` using [`DEFAULT_SUBSTEPS`].
pub fn apply_jump(sys: &HamiltonianSystem, s_minus: &State, ev: &JumpEvent) -> Result<State> {
    apply_jump_with(sys, s_minus, ev, DEFAULT_SUBSTEPS)
}

pub fn apply_jump_with(
    sys: &HamiltonianSystem,
    s_minus: &State,
    ev: &JumpEvent,
    substeps: usize,
) -> Result<State> {
    let field = sys.noise(ev.channel)?;
    if !ev.size.is_finite() {
        return Err(Error::Domain(format!(
            "jump size {} is not finite",
            ev.size
        )));
    }
    if ev.size == 0.0 {
        return Ok(s_minus.clone());
    }
    match field {
        NoiseField::Additive { .. } => {
            let v = field.eval(s_minus, ev.time);
            let out = State {
                p: axpy(&s_minus.p, ev.size, &v.p),
                q: axpy(&s_minus.q, ev.size, &v.q),
            };
            if !out.is_finite() {
                return Err(Error::Divergence { substep: 0 });
            }
            Ok(out)
        }
        NoiseField::StateDependent(_) => rk4_flow(field, s_minus, ev, substeps.max(1)),
    }
}

/// Post-jump state together with the Marcus correction
/// `Phi(x, l) - x - V_r(x) l`, laid out as `(P_1..P_n, Q_1..Q_n)`.
pub fn marcus_increment(
    sys: &HamiltonianSystem,
    s_minus: &State,
    ev: &JumpEvent,
) -> Result<(State, Vec<f64>)> {
    let post = apply_jump(sys, s_minus, ev)?;
    let field = sys.noise(ev.channel)?;
    let v = field.eval(s_minus, ev.time);
    let correction = post
        .to_vec()
        .iter()
        .zip(s_minus.to_vec())
        .zip(v.to_vec())
        .map(|((after, before), dv)| after - before - dv * ev.size)
        .collect();
    Ok((post, correction))
}

fn rk4_flow(field: &NoiseField, x0: &State, ev: &JumpEvent, substeps: usize) -> Result<State> {
    let h = 1.0 / substeps as f64;
    let l = ev.size;
    let rhs = |xi: &[f64]| -> Vec<f64> {
        field
            .eval(&State::from_slice(xi), ev.time)
            .to_vec()
            .into_iter()
            .map(|v| v * l)
            .collect()
    };
    let mut x = x0.to_vec();
    for k in 0..substeps {
        let k1 = rhs(&x);
        let k2 = rhs(&axpy(&x, 0.5 * h, &k1));
        let k3 = rhs(&axpy(&x, 0.5 * h, &k2));
        let k4 = rhs(&axpy(&x, h, &k3));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { substep: k });
        }
    }
    Ok(State::from_slice(&x))
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}
