//! Vector fields, fixed-step integration and limit-cycle location.

mod config;
mod field;
mod limit_cycle;
mod rk4;

pub use config::{ModelConfig, ModelKind};
pub use field::{fd_jacobian, HhParameters, HodgkinHuxley, RadialClock, VectorField, FD_STEP};
pub(crate) use limit_cycle::refine_root;
pub use limit_cycle::{find_limit_cycle, CycleOptions, LimitCycle};
pub use rk4::{integrate, integrate_final, Rk4, Trajectory};
