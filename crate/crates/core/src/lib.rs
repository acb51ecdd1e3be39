pub mod exact_linalg;
pub mod interface;
pub mod porous;
pub mod report;
pub mod solver;
pub mod stability;
pub mod tables;
