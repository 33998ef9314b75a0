//! Stability analysis of Hopfield-type and BAM neural networks with leakage
//! and transmission delays.
//!
//! The crate is organised bottom-up: [`linalg`] provides the matrix
//! kernels, [`system`] the parameter families, [`criteria`] the stability
//! tests, [`equilibrium`] the fixed-point solver and [`sim`] a delay
//! differential equation integrator used for empirical cross-checks.
//! [`io`], [`report`] and [`sweep`] turn these into file-driven analyses.

pub mod criteria;
pub mod equilibrium;
pub mod io;
pub mod linalg;
pub mod report;
pub mod sim;
pub mod sweep;
pub mod system;

pub use criteria::{certify_decay_rate, evaluate, theorem1_verdict, Criterion, DecayCertificate, StabilityVerdict, Status};
pub use equilibrium::{equilibrium_exists, solve_equilibrium, Equilibrium, ExistenceReport};
pub use io::{InputError, SystemFile};
pub use linalg::{is_m_matrix, MMatrixReport, Matrix};
pub use report::{analyze, AnalysisReport, AnalyzeOptions};
pub use sim::{fit_decay, simulate, DecayFit, SimConfig, Trajectory};
pub use system::{BamSpec, ConcreteSystem, GeneralSystemSpec, LinearSystemSpec, SystemSpec, TwoNeuronSpec};
