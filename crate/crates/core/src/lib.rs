//! Exact computation of Whittaker functions, Bessel functions and Curtis homomorphism
//! tables for principal series representations of `GL(n, F_q)`.

pub mod chars;
pub mod cyclo;
pub mod fqlinalg;
pub mod gfq;
pub mod whittaker;
pub mod gtformulas;
pub mod curtis;
pub mod verify;
