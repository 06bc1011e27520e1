pub mod error;
pub mod operators;
pub mod oracle;
pub mod problem;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod timemap;
pub mod verify;
