//! Finite automata whose paths enumerate group elements or coset
//! representatives, and the shift spaces built from them.

pub mod automaton;
pub mod coset;
pub mod shift;

pub use automaton::{Edge, LabeledAutomaton, SubgroupTag, START};
pub use coset::{build_coset_acceptor, extend_verification, minimal_coset_representatives, CosetOptions, CosetOracle};
pub use shift::{AugmentedShift, ComponentGraph};
