pub mod cli;
pub mod corpus;
pub mod dsl;
pub mod featured;
pub mod logic;
pub mod model;
pub mod receptiveness;
pub mod report;
pub mod sync;
pub mod syntax;
pub mod system;
pub mod team;
