//! System representation: delay distributions, rates, nonlinearities,
//! history functions, domains, and dense-output trajectories.
//!
//! Everything here is immutable after construction and `Send + Sync`, so
//! systems and trajectories can be shared freely across concurrent
//! integrations.

mod distribution;
mod history;
mod system;
mod trajectory;

pub use distribution::{DelayDistribution, KernelDensity, Lag};
pub use history::{HistoryFn, HistoryFunction};
pub use system::{ComponentFn, Domain, DelaySystem, Rate, VectorMap};
pub use trajectory::{fmt_g17, StepRecord, Trajectory};
