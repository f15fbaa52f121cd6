//! Worldline Monte Carlo for the scalar Casimir piston in a cylinder closed
//! by a spherical cap.
//!
//! Pipeline: unit loops ([`bridges`]) are reduced to convex hulls
//! ([`hulls`]), each hull gets an analytic-plus-quadrature weight for a
//! piston geometry ([`piston_region`]), and weights are averaged into
//! energies ([`estimator`]) that are compared with closed forms
//! ([`reference`]).

pub mod bridges;
pub mod cli;
pub mod estimator;
pub mod hulls;
pub mod piston_region;
pub mod quadrature;
pub mod reference;
