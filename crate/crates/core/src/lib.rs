pub mod expr;
pub mod jet;
pub mod operator;
pub mod plate;
pub mod rod;
pub mod symmetry;
pub mod taylor;
pub mod verify;
