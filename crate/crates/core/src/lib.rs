pub mod graph;
pub mod matching;
pub mod morphism;
pub mod report;
pub mod rewrite;
pub mod annotation;
pub mod functor;
pub mod patterns;
pub mod adapt;
pub mod io;
pub mod corpus;
pub mod cli;
