//! Closed-form solutions of the flow and the barrier hypersurfaces used
//! to confine it.

mod barrier;
mod exact;
pub mod quadrature;

pub use barrier::{BarrierSpec, QuasiSphere, YangLiBarrier};
pub use exact::{grim_reaper, hyperbolic_expander, log_cosh, ExactSolution};
