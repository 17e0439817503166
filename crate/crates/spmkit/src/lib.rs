//! Kinematics and learned-control toolkit for a 2-DOF spherical parallel
//! manipulator: rotation algebra, analytic and numerical linkage kinematics,
//! a configurable imperfect plant simulation, a from-scratch MLP that learns
//! the plant's inverse kinematics, and open-loop tracking evaluation.

pub mod config;
pub mod control;
pub mod mechanism;
pub mod neural;
pub mod plant;
pub mod rotation;
