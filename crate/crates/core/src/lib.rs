pub mod coding;
pub mod error;
pub mod finvec;
pub mod functional;
pub mod profile;
pub mod rational;
pub mod scc;
pub mod schreier;
pub mod simplex;
pub mod tsirelson;
pub mod ubasis;

pub use error::Error;
pub use rational::Q;
