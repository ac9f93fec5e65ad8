pub mod arith;
pub mod error;
pub mod forms;
pub mod gauss;
pub mod numeric;
pub mod kloosterman;
pub mod poincare;
pub mod bounds;
pub mod cli;
