//! x- and t-evolution of `(B, X)` and the derived fields.

pub mod frame;
pub mod generators;
pub mod jet;
pub mod quadrature;
pub mod state;
pub mod xflow;

pub use frame::{sample_frame, FieldFrame, FrameSummary, GridSpec};
pub use generators::{build_generators, evolve_b, Axis, FlowGenerators};
pub use jet::Jet;
pub use state::{beta_nls, cansys_fields, linkage, moments, q_from_jet, q_sl, state_at, CanSysFields, StateJet, Vessel, VesselState};
pub use xflow::{evolve_x, XEvolution, XMethod, XPath};
