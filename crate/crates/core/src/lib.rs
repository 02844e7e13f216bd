pub mod clause;
pub mod dimacs;
pub mod distinguish;
pub mod error;
pub mod fourier;
pub mod gf2;
pub mod lab;
pub mod oracle;
pub mod planting;
pub mod solver;

pub use clause::{Assignment, Clause, Formula, Literal, TupleIndexer};
pub use error::{Error, Result};
pub use planting::{
    ClauseDistribution, ComplexityCertificate, ParityChannel, PlantedModel, Predicate, Source,
};
