//! Jump-adapted symplectic Euler integration for Hamiltonian SDEs driven by
//! compound-Poisson noise in Marcus form.
//!
//! - [`levy_path`]: seeded compound-Poisson paths stored as event lists.
//! - [`hamiltonian`]: systems given by gradient callbacks, and the linear oscillator.
//! - [`marcus`]: the Marcus jump map and its correction term.
//! - [`integrators`]: SES and explicit Euler drift steps and the jump-adapted loop.
//! - [`oracle`]: the closed-form oscillator solution on a realized path.
//! - [`diagnostics`]: phase-area evolution, Hamiltonian traces, convergence studies.
//! - [`csv`]: output formats.

pub mod csv;
pub mod diagnostics;
pub mod error;
pub mod hamiltonian;
pub mod integrators;
pub mod levy_path;
pub mod marcus;
pub mod oracle;

pub use diagnostics::{
    convergence_study, evolve_domain, evolve_domain_exact, hamiltonian_trace, shoelace_area,
    ConvergenceReport, ConvergenceSetup, ErrorMetric, PhaseDomain,
};
pub use error::{Error, Result};
pub use hamiltonian::{linear_oscillator, HamiltonianSystem, NoiseField, State};
pub use integrators::{
    eem_drift_step, integrate, one_step_jacobian, ses_drift_step, FixedPointSolver,
    IntegratorWarning, Scheme, SchemeConfig, TrajectoryRecord,
};
pub use levy_path::{JumpEvent, LevyConfig, LevyPath};
pub use marcus::{apply_jump, marcus_increment};
pub use oracle::{exact_hamiltonian, exact_state, OscillatorParams};
