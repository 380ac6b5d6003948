pub mod arith;
pub mod components;
pub mod curve;
pub mod eigen;
pub mod export;
pub mod field;
pub mod graph;
pub mod isogeny;
pub mod level;
pub mod modular;
pub mod operators;
pub mod pairing;
pub mod poly;
pub mod spectral;
pub mod supersingular;
pub mod verify;
