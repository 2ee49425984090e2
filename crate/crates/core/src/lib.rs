#![allow(clippy::needless_range_loop)]

pub mod bases;
pub mod cartan;
pub mod exec;
pub mod linalg;
pub mod qscalar;
pub mod rmatrix;
pub mod sysmorph;
pub mod uqmod;
