//! Frequency-constrained optimal power flow with a learned frequency
//! predictor.
//!
//! The crate covers the full loop: a reduced-order multi-machine frequency
//! simulator generates post-contingency RoCoF and nadir labels, a ReLU
//! multilayer perceptron is trained on them, the trained network is compiled
//! into exact big-M mixed-integer linear constraints, and three dispatch
//! models (plain OPF, a linear RoCoF-constrained OPF, and the network-
//! constrained OPF) are solved by the in-crate simplex/branch-and-bound
//! engine and validated closed-loop against the simulator.

pub mod dynamics;
pub mod grid;
pub mod linalg;
