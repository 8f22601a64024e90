//! Weak values of a rotatable birefringent waveplate, read off its complex
//! transfer function, and the vortex lattice of phase singularities where
//! those weak values diverge.

pub mod algebra;
pub mod config;
pub mod diff;
pub mod error;
pub mod io;
pub mod response;
pub mod singularity;
pub mod validate;
pub mod waveplate;
pub mod weak;

pub use algebra::{inner, pauli, rotation, Complex, Operator2, Vec2C};
pub use diff::{DiffSettings, Stencil, StepSize};
pub use error::{Error, Result};
pub use response::{Axis, FnFamily, ParamPoint, Response, UnitaryFamily};
pub use waveplate::{DispersionModel, ModelDelta, Phases, Scenario};
pub use weak::{PointerAxis, PointerValue};
