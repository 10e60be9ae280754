//! Exact computations with ribbon graph complexes, cyclic Lie algebras of
//! symplectic super vector spaces, Feynman amplitudes of Chevalley-Eilenberg
//! chains and partition functions of cyclic A-infinity algebras.

pub mod ainfinity;
pub mod cyclic_lie;
pub mod graph_complex;
pub mod linalg;
pub mod partition;
pub mod ribbon_graph;
pub mod super_core;
pub mod tcft;
