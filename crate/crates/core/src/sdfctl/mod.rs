//! Sampled-data closed loops: controllers planned at sampling instants,
//! plant simulation, decrease certificates and step adaptation.

pub mod adapt;
pub mod certificate;
pub mod controller;
pub mod run;

pub use adapt::{adapt_epsilon, excursion_ratios, single_interval, AdaptedStep, MAX_HALVINGS};
pub use certificate::{certify_decrease, CertificateV, DecreaseCertificate, IntervalMargin, MARGINAL_MARGIN};
pub use controller::{
    ControllerKind, FrozenGain, Intersample, PatchworkController, Plan, PlanInfo, SampledController, UserController,
    ZeroController,
};
pub use run::{run_closed_loop, ClosedLoopRun, IntervalRecord};
