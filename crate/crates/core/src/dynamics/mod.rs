//! Master-equation dynamics: channels, generator, time integration and
//! closed-form yield routes.

pub mod channels;
pub mod evolve;
pub mod generator;
pub mod slots;
pub mod yields;

pub use channels::{
    build_channels, dephasing_channels, generic_noise_channels, shelving_projectors, Channel, ChannelFlags,
    ChannelSet,
};
pub use evolve::{evolve, fastest_frequency, Method, SolverOptions, Trajectory};
pub use generator::{dissipator, generator_rhs, CompiledGenerator};
pub use yields::{coherent_floquet_yields, dissipative_floquet_yields, periodic_yields, yield_direct, YieldPair};
