pub mod bound;
pub mod gaussian;
pub mod matrix;
pub mod percolate;
pub mod simulate;
pub mod verify;
