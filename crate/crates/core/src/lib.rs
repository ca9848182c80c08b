pub mod assembly;
pub mod bell;
pub mod dual;
pub mod error;
pub mod exact;
pub mod poly2d;
pub mod element;
pub mod quadrature;
pub mod mesh;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod verify;
