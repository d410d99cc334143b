//! Sagittal-plane simulation and control stack for a bipedal robot whose
//! massless lower legs are linear-elastic elements acting as series compliance.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: parameters, state types, leg kinematics and the elastic leg model
//! - [`qp`]: small dense active-set quadratic-program solver with a brute-force oracle
//! - [`low_level`]: per-leg swing (position) and stance (force) controllers
//! - [`control`]: body posture control, contact-force distribution, swing
//!   trajectories, gait scheduling and the walking controller
//! - [`plant`]: the simulated robot with ground contact and sensor models
//! - [`sim`]: the fixed-timestep simulation loop
//! - [`experiment`]: configuration, experiment runner, metrics and CSV logging
//!
//! See the `examples/` directory for runnable entry points; the `walk` binary
//! runs a complete walking experiment from a JSON config.

// validation deliberately writes `!(x > 0.0)` so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod experiment;
pub mod low_level;
pub mod model;
pub mod plant;
pub mod qp;
pub mod sim;

pub use control::{ControlOutput, Controller, Diagnostics, WalkController};
pub use experiment::{ExperimentConfig, Metrics};
pub use model::{BodyState, FootState, JointState, RobotParams, RobotState, Side};
pub use plant::{PlantConfig, SensorReading};
pub use sim::LogRecord;
