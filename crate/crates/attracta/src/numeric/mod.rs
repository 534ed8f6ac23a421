//! Small numerical building blocks: quadrature, dense linear algebra for
//! certificate-sized matrices, a seeded generator, and the expression grammar
//! used by config files.

pub mod expr;
pub mod linalg;
pub mod quad;
pub mod rng;
