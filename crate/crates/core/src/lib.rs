//! Green's functions, critical points and gradient-flow skeletons on open
//! Riemann surfaces.

pub mod green;
pub mod surfaces;
pub mod dynamics;
pub mod skeleton;
pub mod exhaustion;
