pub mod collection;
pub mod config;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod matching;
pub mod partition;
pub mod connectivity;
pub mod absorber;
pub mod trees;
pub mod oracle;
pub mod factors;
pub mod constructions;
