//! Finite-element simulation of quasi-static two-phase flow in a deformable
//! porous medium with an ε-regularized porosity constraint.

// index loops mirror the nodal and cellwise formulas; `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod coupled;
pub mod diagnostics;
pub mod femcore;
pub mod scenario_io;
pub mod stepper;
