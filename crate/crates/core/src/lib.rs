//! Simulation core for the radical-pair model of the avian magnetic
//! compass.
//!
//! The pipeline is: build a [`ModelSpec`] and [`FieldSpec`], pick channels,
//! then either integrate the master equation ([`evolve`]) or use one of the
//! closed-form yield routes ([`yield_direct`] for static fields,
//! [`periodic_yields`] for an oscillating field). [`experiments`] drives
//! angular sweeps and the figure presets.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod observables;
pub mod spin;
pub mod state;

pub use dynamics::{
    evolve, periodic_yields, yield_direct, ChannelFlags, ChannelSet, CompiledGenerator, Method, SolverOptions,
    Trajectory, YieldPair,
};
pub use error::{CompassError, Result};
pub use experiments::{
    angular_sweep, k_family, negativity_surface, reproduce, threshold_scan, ChannelSelection, Figure, FigureData,
    NegativitySurface, PresetOptions, ScanAxis, ScanTable, ScenarioConfig, SweepPoint, SweepResult, YieldRoute,
};
pub use observables::{
    contrast, negativity, rf_disruption, singlet_probability, yield_integral, NegativityConvention, YieldPoint,
};
pub use spin::{
    field_at, hamiltonian, initial_state, FieldSpec, GTensor, HyperfineTensor, ModelSpec, PhysicalConstants,
    RfGeometry,
};
pub use state::{DensityMatrix, InitialKind};
