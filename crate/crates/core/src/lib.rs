//! Numerical construction of one-parameter families of embedded free boundary
//! constant-mean-curvature annuli in the unit ball, with desk-scale
//! verification of their geometric properties.

pub mod dynamics;
pub mod error;
pub mod family;
pub mod geom;
pub mod mesh;
pub mod ode;
pub mod param;
pub mod period;
pub mod quad;
pub mod report;
pub mod rootfind;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
