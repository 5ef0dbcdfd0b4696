pub mod checks;
pub mod cli;
pub mod dataset;
pub mod discovery;
pub mod equivalence;
pub mod evaluation;
pub mod graph;
pub mod independence;
pub mod labeling;
pub mod oracle;
pub mod verbalizer;
