pub mod beta_arith;
pub mod cli;
pub mod fixtures;
pub mod formal_cas;
pub mod operator_rep;
pub mod sampling;
pub mod star_algebra;
pub mod states;
pub mod tolerances;
pub mod transforms;
