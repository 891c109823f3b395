pub mod cli;
pub mod encoding;
pub mod eval;
pub mod markov;
pub mod rewrite;
pub mod taskgen;
pub mod word;
