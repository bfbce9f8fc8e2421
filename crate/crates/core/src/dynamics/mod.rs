//! Driven time evolution, the intra-junction phase gate and the mean-field
//! Kerr characterization.

pub mod evolve;
pub mod fit;
pub mod gate;
pub mod meanfield;

pub use evolve::{evolve, propagate_static, DriveSpec, Envelope, EvolveOptions, Trajectory};
pub use gate::{phase_gate, GateOptions, GateReport};
pub use meanfield::{
    meanfield_evolve, steady_state, transmission_scan, MeanFieldCoefficients, MeanFieldState, MeanFieldTrajectory,
    ScanAxis, ScanPoint, ScanSetup, SteadyStateReport, TransmissionScan,
};
