//! Numerical laboratory for P-function criteria of quasi-linear elliptic
//! equations.
//!
//! A *P-function* of an equation is a scalar quantity `P(u, |∇u|²)` (or, for
//! higher-order equations, of higher derivatives) that satisfies an elliptic
//! differential inequality and hence a maximum principle. This crate provides
//! the machinery to state candidates, test the sampled sign conditions under
//! which they are P-functions, solve small boundary-value problems, and verify
//! the resulting maximum principles, gradient bounds, and Liouville-type
//! consequences on discrete fields.
//!
//! Layering, bottom to top:
//! - [`funcalg`]: function handles with analytic derivative stacks, domains,
//!   quadrature, inversion, and the worked example registry.
//! - [`criterion`]: the sampled sign conditions (the quantity `I`, the two
//!   hypothesis sets, and the semilinear corollary).
//! - [`grid`]: uniform-grid calculus and field containers.
//! - [`solver`]: banded Newton solver for the bundled boundary-value problems
//!   and an RK4 integrator for 1D profiles.
//! - [`verify`]: maximum-principle, gradient-bound, first-integral,
//!   Liouville, and Monge–Ampère checks over solved fields.
//! - [`higher`]: fourth-order candidates, their residual identities, and the
//!   pointwise Laplacian estimates.

pub mod criterion;
pub mod funcalg;
pub mod grid;
pub mod higher;
pub mod report;
pub mod solver;
pub mod verify;
