//! Numerics for continuous-variable quantum key distribution with squeezed
//! pulses, homodyne detection and post-selection.
//!
//! Quadratures follow the convention that the vacuum variance is 1/4.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod integrate;
pub mod optimize;
pub mod protocol;
pub mod superior;

pub use attacks::{
    build_projection_basis, phase_pcorr, projection_pcorr, simquad_pcorr, AttackResult,
    ProjectionBasis, Strategy,
};
pub use error::{Error, Result};
pub use fock::{fock_coefficients, state_overlap, FockConfig, FockState, Truncation};
pub use gaussian::{Basis, Channel, Phase, PulseParams, QuadPoint};
pub use integrate::{IntegrationConfig, Quadrature};
pub use optimize::{maximize, sweep_loss, sweep_squeezing, Optimum, OptimizerConfig, SweepPoint};
pub use protocol::{bob_stats, calibrate_amplitude, BobStats, ProtocolPoint};
pub use superior::{
    collision_general, collision_quadrature, secret_rate, Adversary, ConditionalEveState, EveCase,
    RateReport, Sign,
};
