//! Pseudo bracket and Jones-type invariants of pseudo link diagrams on the
//! plane, annulus and torus.

pub mod bracket;
pub mod diagram;
pub mod fixtures;
pub mod gen;
pub mod mixed;
pub mod moves;
pub mod poly;
