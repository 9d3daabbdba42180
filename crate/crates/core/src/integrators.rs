//! Jump-adapted time stepping with the semi-implicit symplectic Euler scheme
//! (SES) and the explicit Euler baseline (EEM).
//!
//! The time grid is the fixed grid `k * dt` merged with every jump time of the
//! driving path (and any requested checkpoints), so no drift step is longer
//! than `dt` and every jump is applied exactly at its occurrence. At a jump
//! time the drift brings the state to the left limit, then the Marcus jump
//! map is applied. Both schemes share the jump treatment; they differ only in
//! the drift step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{Builtin, HamiltonianSystem, State};
use crate::levy_path::{JumpEvent, LevyPath};
use crate::marcus::apply_jump;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Semi-implicit symplectic Euler.
    Ses,
    /// Explicit Euler.
    Eem,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ses => "ses",
            Scheme::Eem => "eem",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ses" => Ok(Scheme::Ses),
            "eem" => Ok(Scheme::Eem),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected ses or eem)"
            ))),
        }
    }
}

/// Settings of the fixed-point solve for the implicit momentum update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolver {
    /// Stop once successive iterates differ by less than this in max-norm.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FixedPointSolver {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Largest drift step.
    pub dt: f64,
    pub t_end: f64,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iters: usize,
    /// Keep every `record_every`-th drift node. Jump nodes and `t_end` are always kept.
    pub record_every: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        let solver = FixedPointSolver::default();
        Self {
            scheme: Scheme::Ses,
            dt: 0.08,
            t_end: 20.0,
            fixed_point_tol: solver.tol,
            fixed_point_max_iters: solver.max_iters,
            record_every: 1,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.fixed_point_tol.is_finite() && self.fixed_point_tol > 0.0) {
            return Err(Error::Config(format!(
                "fixed-point tolerance must be positive, got {}",
                self.fixed_point_tol
            )));
        }
        if self.fixed_point_max_iters == 0 {
            return Err(Error::Config(
                "fixed-point iteration cap must be at least 1".into(),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solver(&self) -> FixedPointSolver {
        FixedPointSolver {
            tol: self.fixed_point_tol,
            max_iters: self.fixed_point_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegratorWarning {
    /// `dt` exceeds the step-size bound derived from the Lipschitz constant.
    StepSizeAboveBound { dt: f64, bound: f64 },
}

/// A recorded trajectory.
///
/// `times` is non-decreasing and starts at 0. At a jump the record holds two
/// entries with the same time: the left limit (`jump_flags == false`) followed
/// by the post-jump state (`jump_flags == true`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// `H0` per entry, when the system provides it.
    pub hamiltonians: Option<Vec<f64>>,
    pub jump_flags: Vec<bool>,
    pub warnings: Vec<IntegratorWarning>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &State {
        self.states
            .last()
            .expect("record always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("record always holds the initial state")
    }

    fn push(&mut self, sys: &HamiltonianSystem, t: f64, s: &State, jump: bool) {
        self.times.push(t);
        if let Some(h) = self.hamiltonians.as_mut() {
            h.push(
                sys.hamiltonian(s)
                    .expect("checked when the record was created"),
            );
        }
        self.states.push(s.clone());
        self.jump_flags.push(jump);
    }
}

/// One SES drift step: `P+ = P - sigma0(P+, Q) dt` by fixed-point iteration
/// from `P`, then `Q+ = Q + gamma0(P+, Q) dt`.
pub fn ses_drift_step(
    sys: &HamiltonianSystem,
    s: &State,
    dt: f64,
    solver: &FixedPointSolver,
) -> Result<State> {
    if dt == 0.0 {
        return Ok(s.clone());
    }
    let mut p = s.p.clone();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..solver.max_iters {
        let sigma = sys.sigma0(&p, &s.q);
        let next: Vec<f64> = s.p.iter().zip(&sigma).map(|(p0, g)| p0 - g * dt).collect();
        residual = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        p = next;
        if !residual.is_finite() {
            break;
        }
        if residual < solver.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver {
            iterations: solver.max_iters,
            residual,
        });
    }
    let gamma = sys.gamma0(&p, &s.q);
    let q = s.q.iter().zip(&gamma).map(|(q0, g)| q0 + g * dt).collect();
    Ok(State { p, q })
}

/// One explicit Euler drift step; both updates use the old state.
pub fn eem_drift_step(sys: &HamiltonianSystem, s: &State, dt: f64) -> State {
    if dt == 0.0 {
        return s.clone();
    }
    let sigma = sys.sigma0(&s.p, &s.q);
    let gamma = sys.gamma0(&s.p, &s.q);
    State {
        p: s.p.iter().zip(&sigma).map(|(p0, g)| p0 - g * dt).collect(),
        q: s.q.iter().zip(&gamma).map(|(q0, g)| q0 + g * dt).collect(),
    }
}

pub fn drift_step(
    sys: &HamiltonianSystem,
    s: &State,
    dt: f64,
    scheme: Scheme,
    solver: &FixedPointSolver,
) -> Result<State> {
    match scheme {
        Scheme::Ses => ses_drift_step(sys, s, dt, solver),
        Scheme::Eem => Ok(eem_drift_step(sys, s, dt)),
    }
}

/// Returns a warning when `dt` is at or above the step-size bound of `sys`.
pub fn check_step_size(sys: &HamiltonianSystem, dt: f64) -> Option<IntegratorWarning> {
    let bound = sys.step_size_bound();
    (dt >= bound).then_some(IntegratorWarning::StepSizeAboveBound { dt, bound })
}

/// Integrates `x0` along `path` up to `cfg.t_end`.
pub fn integrate(
    sys: &HamiltonianSystem,
    x0: &State,
    path: &LevyPath,
    cfg: &SchemeConfig,
) -> Result<TrajectoryRecord> {
    integrate_with_checkpoints(sys, x0, path, cfg, &[]).map(|(record, _)| record)
}

/// Like [`integrate`], but also lands on each time in `checkpoints` and
/// returns the (post-jump) state there, in the order given.
pub fn integrate_with_checkpoints(
    sys: &HamiltonianSystem,
    x0: &State,
    path: &LevyPath,
    cfg: &SchemeConfig,
    checkpoints: &[f64],
) -> Result<(TrajectoryRecord, Vec<State>)> {
    cfg.validate()?;
    if !sys.is_additive() {
        return Err(Error::Config(
            "integrators accept only additive noise fields".into(),
        ));
    }
    if x0.dim() != sys.dim() || !x0.is_finite() {
        return Err(Error::Config(format!(
            "initial state must be finite with dimension {}",
            sys.dim()
        )));
    }
    if path.num_channels() != sys.num_channels() {
        return Err(Error::Config(format!(
            "path has {} channels but the system has {}",
            path.num_channels(),
            sys.num_channels()
        )));
    }
    if path.horizon() < cfg.t_end {
        return Err(Error::Config(format!(
            "path horizon {} is shorter than t_end {}",
            path.horizon(),
            cfg.t_end
        )));
    }
    let mut sorted_checkpoints: Vec<f64> = checkpoints.to_vec();
    sorted_checkpoints.sort_by(f64::total_cmp);
    if let Some(&bad) = sorted_checkpoints
        .iter()
        .find(|&&t| !(0.0..=cfg.t_end).contains(&t))
    {
        return Err(Error::Domain(format!(
            "checkpoint {bad} outside [0, {}]",
            cfg.t_end
        )));
    }

    let solver = cfg.solver();
    let events = path.events_until(cfg.t_end);
    let mut record = TrajectoryRecord {
        times: Vec::new(),
        states: Vec::new(),
        hamiltonians: sys.has_hamiltonian().then(Vec::new),
        jump_flags: Vec::new(),
        warnings: Vec::new(),
    };
    if let Some(w @ IntegratorWarning::StepSizeAboveBound { dt, bound }) =
        check_step_size(sys, cfg.dt)
    {
        log::warn!(
            "dt = {dt} exceeds the step-size bound {bound:.6} for K = {}",
            sys.lipschitz_k()
        );
        record.warnings.push(w);
    }

    let mut grid = GridWalker::new(cfg.dt, cfg.t_end, &events, &sorted_checkpoints);
    let mut state = x0.clone();
    let mut t = 0.0;
    let mut at_checkpoint: Vec<(f64, State)> = Vec::with_capacity(sorted_checkpoints.len());
    record.push(sys, t, &state, false);
    while grid.pending_checkpoint(t) {
        at_checkpoint.push((t, state.clone()));
    }

    let mut drift_steps = 0usize;
    while let Some(node) = grid.next_node() {
        state = drift_step(sys, &state, node.time - t, cfg.scheme, &solver)
            .map_err(|e| e.at_time(t))?;
        t = node.time;
        drift_steps += 1;
        if !state.is_finite() {
            return Err(Error::Divergence { substep: 0 }.at_time(t));
        }
        if node.jumps.is_empty() {
            if drift_steps.is_multiple_of(cfg.record_every) || node.is_end {
                record.push(sys, t, &state, false);
            }
        } else {
            record.push(sys, t, &state, false);
            for ev in node.jumps {
                state = apply_jump(sys, &state, ev).map_err(|e| e.at_time(t))?;
                record.push(sys, t, &state, true);
            }
        }
        while grid.pending_checkpoint(t) {
            at_checkpoint.push((t, state.clone()));
        }
    }

    // Hand checkpoint states back in the caller's order.
    let snapshots = checkpoints
        .iter()
        .map(|&c| {
            at_checkpoint
                .iter()
                .find(|(t, _)| *t == c || same_node(*t, c))
                .map(|(_, s)| s.clone())
                .expect("every checkpoint is a grid node")
        })
        .collect();
    Ok((record, snapshots))
}

fn node_eps(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

fn same_node(a: f64, b: f64) -> bool {
    (a - b).abs() <= node_eps(a.max(b))
}

struct Node<'a> {
    time: f64,
    jumps: &'a [JumpEvent],
    is_end: bool,
}

/// Walks the merged grid of `k * dt`, jump times, checkpoints and `t_end`.
struct GridWalker<'a> {
    dt: f64,
    t_end: f64,
    k: u64,
    events: &'a [JumpEvent],
    next_event: usize,
    checkpoints: &'a [f64],
    next_checkpoint: usize,
    done: bool,
}

impl<'a> GridWalker<'a> {
    fn new(dt: f64, t_end: f64, events: &'a [JumpEvent], checkpoints: &'a [f64]) -> Self {
        Self {
            dt,
            t_end,
            k: 1,
            events,
            next_event: 0,
            checkpoints,
            next_checkpoint: 0,
            done: false,
        }
    }

    fn next_node(&mut self) -> Option<Node<'a>> {
        if self.done {
            return None;
        }
        let grid_t = self.k as f64 * self.dt;
        let jump_t = self.events.get(self.next_event).map(|e| e.time);
        let check_t = self.checkpoints.get(self.next_checkpoint).copied();
        let mut time = grid_t.min(self.t_end);
        if let Some(j) = jump_t {
            time = time.min(j);
        }
        if let Some(c) = check_t {
            time = time.min(c);
        }
        // Snap to the most significant coincident candidate: jump, then end, then checkpoint.
        let mut snapped = time;
        if let Some(c) = check_t.filter(|&c| same_node(c, time)) {
            snapped = c;
        }
        if same_node(self.t_end, time) {
            snapped = self.t_end;
        }
        if let Some(j) = jump_t.filter(|&j| same_node(j, time)) {
            snapped = j;
        }
        let time = snapped;

        while (self.k as f64 * self.dt) <= time + node_eps(time) {
            self.k += 1;
        }
        let first = self.next_event;
        while self
            .events
            .get(self.next_event)
            .is_some_and(|e| e.time <= time + node_eps(time))
        {
            self.next_event += 1;
        }
        let is_end = same_node(time, self.t_end) || time >= self.t_end;
        if is_end {
            self.done = true;
        }
        Some(Node {
            time,
            jumps: &self.events[first..self.next_event],
            is_end,
        })
    }

    /// Consumes the next checkpoint if it coincides with `t`.
    fn pending_checkpoint(&mut self, t: f64) -> bool {
        match self.checkpoints.get(self.next_checkpoint) {
            Some(&c) if c <= t || same_node(c, t) => {
                self.next_checkpoint += 1;
                true
            }
            _ => false,
        }
    }
}

/// Jacobian of the drift step map at `s`.
///
/// The built-in oscillator uses its closed form; other systems use central
/// finite differences with perturbation `1e-6` and a fixed-point tolerance
/// tight enough not to pollute the difference quotients.
pub fn one_step_jacobian(
    sys: &HamiltonianSystem,
    s: &State,
    dt: f64,
    scheme: Scheme,
) -> Result<DMatrix<f64>> {
    if let Some(Builtin::LinearOscillator { .. }) = sys.builtin() {
        let j = match scheme {
            Scheme::Ses => [1.0, -dt, dt, 1.0 - dt * dt],
            Scheme::Eem => [1.0, -dt, dt, 1.0],
        };
        return Ok(DMatrix::from_row_slice(2, 2, &j));
    }
    let solver = FixedPointSolver {
        tol: 1e-15,
        max_iters: 500,
    };
    let h = 1e-6;
    let x = s.to_vec();
    let d = x.len();
    let mut jac = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[col] += h;
        minus[col] -= h;
        let fp = drift_step(sys, &State::from_slice(&plus), dt, scheme, &solver)?.to_vec();
        let fm = drift_step(sys, &State::from_slice(&minus), dt, scheme, &solver)?.to_vec();
        for row in 0..d {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// The standard symplectic matrix `[[0, I], [-I, 0]]` of size `2n`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// Max-norm of `J^T Omega J - Omega`.
pub fn symplectic_defect(jac: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(jac.nrows() / 2);
    (jac.transpose() * &omega * jac - omega).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::linear_oscillator;
    use crate::levy_path::{ChannelJumps, LevyConfig};

    fn no_jump_path(horizon: f64) -> LevyPath {
        LevyPath::empty(LevyConfig {
            horizon,
            ..Default::default()
        })
        .unwrap()
    }

    fn single_jump_path(tau: f64, size: f64, horizon: f64) -> LevyPath {
        LevyPath::from_jumps(
            LevyConfig {
                horizon,
                ..Default::default()
            },
            vec![ChannelJumps {
                times: vec![tau],
                sizes: vec![size],
            }],
        )
        .unwrap()
    }

    #[test]
    fn ses_oscillator_steps() {
        let sys = linear_oscillator(1.0);
        let solver = FixedPointSolver::default();
        let s = ses_drift_step(&sys, &State::scalar(0.0, 1.0), 0.08, &solver).unwrap();
        assert!((s.p[0] + 0.08).abs() < 1e-15);
        assert!((s.q[0] - 0.9936).abs() < 1e-15);
        let s = ses_drift_step(&sys, &State::scalar(1.0, 0.0), 0.1, &solver).unwrap();
        assert_eq!(s, State::scalar(1.0, 0.1));
        let x = State::scalar(0.3, 0.4);
        assert_eq!(ses_drift_step(&sys, &x, 0.0, &solver).unwrap(), x);
    }

    #[test]
    fn eem_oscillator_steps() {
        let sys = linear_oscillator(1.0);
        assert_eq!(
            eem_drift_step(&sys, &State::scalar(0.0, 1.0), 0.08),
            State::scalar(-0.08, 1.0)
        );
        assert_eq!(
            eem_drift_step(&sys, &State::scalar(1.0, 0.0), 0.1),
            State::scalar(1.0, 0.1)
        );
        let x = State::scalar(0.3, 0.4);
        assert_eq!(eem_drift_step(&sys, &x, 0.0), x);
    }

    #[test]
    fn implicit_momentum_solves_its_equation() {
        // H = (p^2 + q^2) / 2 + 0.1 p^2 q^2 makes sigma0 depend on P.
        let sys = HamiltonianSystem::new(
            1,
            |p, q| vec![q[0] + 0.2 * p[0] * p[0] * q[0]],
            |p, q| vec![p[0] + 0.2 * p[0] * q[0] * q[0]],
            1.0,
        )
        .unwrap();
        let s = State::scalar(0.7, -0.9);
        let dt = 0.1;
        let out = ses_drift_step(&sys, &s, dt, &FixedPointSolver::default()).unwrap();
        let resid = out.p[0] - (s.p[0] - sys.sigma0(&out.p, &s.q)[0] * dt);
        assert!(resid.abs() < 1e-12);
        assert!((out.q[0] - (s.q[0] + sys.gamma0(&out.p, &s.q)[0] * dt)).abs() < 1e-15);
    }

    #[test]
    fn non_contracting_iteration_fails() {
        let sys =
            HamiltonianSystem::new(1, |p, _q| vec![p[0] * 3.0], |p, _q| p.to_vec(), 1.0).unwrap();
        let solver = FixedPointSolver {
            tol: 1e-12,
            max_iters: 20,
        };
        let err = ses_drift_step(&sys, &State::scalar(1.0, 0.0), 1.0, &solver).unwrap_err();
        match err {
            Error::Solver {
                iterations,
                residual,
            } => {
                assert_eq!(iterations, 20);
                assert!(residual > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn integrate_lands_on_t_end() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig::default();
        let rec = integrate(&sys, &State::scalar(0.0, 1.0), &no_jump_path(20.0), &cfg).unwrap();
        assert_eq!(rec.final_time(), 20.0);
        assert_eq!(rec.len(), 251);
        assert!(rec.times.windows(2).all(|w| w[0] < w[1]));
        assert!(rec.warnings.is_empty());
    }

    #[test]
    fn single_jump_composition() {
        let (beta, tau, size) = (1.0, 0.5, 0.37);
        let sys = linear_oscillator(beta);
        let cfg = SchemeConfig {
            dt: 0.08,
            t_end: 2.0,
            ..Default::default()
        };
        let x0 = State::scalar(0.0, 1.0);
        let rec = integrate(&sys, &x0, &single_jump_path(tau, size, 2.0), &cfg).unwrap();

        // manual composition
        let solver = FixedPointSolver::default();
        let mut s = x0.clone();
        let mut t = 0.0;
        for k in 1..=6 {
            let next = k as f64 * 0.08;
            s = ses_drift_step(&sys, &s, next - t, &solver).unwrap();
            t = next;
        }
        s = ses_drift_step(&sys, &s, tau - t, &solver).unwrap();
        let left = s.clone();
        s.p[0] += beta * size;
        let idx = rec.jump_flags.iter().position(|&f| f).unwrap();
        assert_eq!(rec.times[idx], tau);
        assert_eq!(rec.times[idx - 1], tau);
        assert!(rec.states[idx - 1].max_abs_diff(&left) < 1e-15);
        assert!(rec.states[idx].max_abs_diff(&s) < 1e-15);

        t = tau;
        let mut k = 7;
        while t < 2.0 {
            let next = (k as f64 * 0.08).min(2.0);
            s = ses_drift_step(&sys, &s, next - t, &solver).unwrap();
            t = next;
            k += 1;
        }
        assert!(rec.final_state().max_abs_diff(&s) < 1e-13);
    }

    #[test]
    fn jumps_after_t_end_are_ignored() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig {
            t_end: 1.0,
            ..Default::default()
        };
        let x0 = State::scalar(0.0, 1.0);
        let a = integrate(&sys, &x0, &single_jump_path(1.5, 0.4, 2.0), &cfg).unwrap();
        let b = integrate(&sys, &x0, &no_jump_path(2.0), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jump_on_grid_point_and_at_t_end() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig {
            dt: 0.25,
            t_end: 1.0,
            ..Default::default()
        };
        let x0 = State::scalar(0.0, 1.0);
        let on_grid = integrate(&sys, &x0, &single_jump_path(0.5, 0.4, 1.0), &cfg).unwrap();
        assert_eq!(on_grid.times, vec![0.0, 0.25, 0.5, 0.5, 0.75, 1.0]);
        let at_end = integrate(&sys, &x0, &single_jump_path(1.0, 0.4, 1.0), &cfg).unwrap();
        assert_eq!(at_end.times, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.0]);
        assert_eq!(at_end.jump_flags.last(), Some(&true));
    }

    #[test]
    fn record_every_thins_only_drift_nodes() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig {
            dt: 0.1,
            t_end: 1.0,
            record_every: 4,
            ..Default::default()
        };
        let rec = integrate(
            &sys,
            &State::scalar(0.0, 1.0),
            &single_jump_path(0.55, 0.4, 1.0),
            &cfg,
        )
        .unwrap();
        // nodes: 0.1 .. 0.5 (drift 1..5), 0.55 (6, jump), 0.6 .. 1.0 (7..11)
        let kept: Vec<f64> = rec
            .times
            .iter()
            .map(|t| (t * 100.0).round() / 100.0)
            .collect();
        assert_eq!(kept, vec![0.0, 0.4, 0.55, 0.55, 0.7, 1.0]);
        let full = integrate(
            &sys,
            &State::scalar(0.0, 1.0),
            &single_jump_path(0.55, 0.4, 1.0),
            &SchemeConfig {
                record_every: 1,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(rec.final_state(), full.final_state());
    }

    #[test]
    fn checkpoints_report_post_jump_state() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig {
            dt: 0.1,
            t_end: 1.0,
            ..Default::default()
        };
        let x0 = State::scalar(0.0, 1.0);
        let path = single_jump_path(0.55, 0.4, 1.0);
        let (rec, snaps) =
            integrate_with_checkpoints(&sys, &x0, &path, &cfg, &[0.55, 0.0, 0.33, 1.0]).unwrap();
        let jump_idx = rec.jump_flags.iter().position(|&f| f).unwrap();
        assert_eq!(snaps[0], rec.states[jump_idx]);
        assert_eq!(snaps[1], x0);
        assert_eq!(&snaps[3], rec.final_state());
        assert!(rec.times.contains(&0.33));
    }

    #[test]
    fn warns_above_step_bound() {
        let sys = linear_oscillator(1.0);
        let cfg = SchemeConfig {
            dt: 0.3,
            t_end: 1.0,
            ..Default::default()
        };
        let rec = integrate(&sys, &State::scalar(0.0, 1.0), &no_jump_path(1.0), &cfg).unwrap();
        assert!(matches!(
            rec.warnings[..],
            [IntegratorWarning::StepSizeAboveBound { .. }]
        ));
        assert!(check_step_size(&sys, 0.29).is_none());
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let sys = linear_oscillator(1.0);
        let x0 = State::scalar(0.0, 1.0);
        let short = no_jump_path(5.0);
        assert!(integrate(&sys, &x0, &short, &SchemeConfig::default()).is_err());
        let bad = SchemeConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(integrate(&sys, &x0, &no_jump_path(20.0), &bad).is_err());
        let two_d = State::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(integrate(&sys, &two_d, &no_jump_path(20.0), &SchemeConfig::default()).is_err());
        let state_dep = sys.clone().with_noise_field(|x| x.clone());
        assert!(integrate(
            &state_dep,
            &x0,
            &no_jump_path(20.0),
            &SchemeConfig::default()
        )
        .is_err());
    }

    #[test]
    fn oscillator_jacobians() {
        let sys = linear_oscillator(1.0);
        let s = State::scalar(0.3, -0.2);
        for dt in [0.0, 0.01, 0.08, 0.2] {
            let j = one_step_jacobian(&sys, &s, dt, Scheme::Ses).unwrap();
            assert_eq!(
                j,
                DMatrix::from_row_slice(2, 2, &[1.0, -dt, dt, 1.0 - dt * dt])
            );
            let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
            assert_eq!(det, 1.0);
            let e = one_step_jacobian(&sys, &s, dt, Scheme::Eem).unwrap();
            assert!((e.determinant() - (1.0 + dt * dt)).abs() < 1e-15);
        }
        assert_eq!(
            one_step_jacobian(&sys, &s, 0.0, Scheme::Ses).unwrap(),
            DMatrix::identity(2, 2)
        );
    }

    #[test]
    fn fd_jacobian_agrees_with_closed_form() {
        let sys = linear_oscillator(1.0);
        let s = State::scalar(0.3, -0.2);
        for scheme in [Scheme::Ses, Scheme::Eem] {
            let fd = one_step_jacobian(&sys.as_generic(), &s, 0.08, scheme).unwrap();
            let exact = one_step_jacobian(&sys, &s, 0.08, scheme).unwrap();
            assert!((fd - exact).abs().max() < 1e-9);
        }
    }

    #[test]
    fn symplectic_form_identities() {
        assert_eq!(symplectic_defect(&DMatrix::identity(4, 4)), 0.0);
        let sys = linear_oscillator(1.0);
        let j = one_step_jacobian(&sys, &State::scalar(0.0, 0.0), 0.1, Scheme::Ses).unwrap();
        assert!(symplectic_defect(&j) < 1e-15);
        let j = one_step_jacobian(&sys, &State::scalar(0.0, 0.0), 0.1, Scheme::Eem).unwrap();
        assert!(symplectic_defect(&j) > 1e-3);
    }
}
