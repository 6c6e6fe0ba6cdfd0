pub mod dsl;
pub mod dynamics;
pub mod fixtures;
pub mod model;
pub mod refine;
pub mod sim;
