pub mod benchmarks;
pub mod cli;
pub mod coa;
pub mod epsilon;
pub mod pareto;
pub mod problem;
pub mod report;
