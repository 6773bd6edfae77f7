//! Point-vortex dynamics in planar domains with boundaries.
//!
//! The crate is organised in layers:
//!
//! * [`geometry`] supplies the boundary-dependent kernels (Green's and Robin's
//!   functions and their gradients) together with the distance, projection and
//!   curvature quantities of the domain near its boundary.
//! * [`dynamics`] assembles the vortex velocity field and integrates it with an
//!   adaptive Dormand–Prince 5(4) scheme that stops on pair or boundary
//!   collapse events.
//! * [`diagnostics`] evaluates conserved quantities, cluster functionals and
//!   Gronwall-type lower-bound certificates over a recorded trajectory.
//! * [`scenarios`] ships canned configurations with closed-form oracles.
//! * [`io`] parses run configurations and writes CSV/JSON outputs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod scenarios;

pub use diagnostics::{ClusterPartition, DiagnosticsSample, DiagnosticsSeries};
pub use dynamics::{
    IntegratorSettings, Termination, ToyModelSpec, TrajectoryRecord, VortexConfiguration,
};
pub use io::{ExitStatus, RunConfig, RunReport};
pub use geometry::{ConformalMap, DomainKind, DomainModel, GeometryError, KernelValues, Point2};
