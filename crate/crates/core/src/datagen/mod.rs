//! Planted separable instances, strategic agents and dataset files.

mod agents;
mod io;
mod planted;

pub use agents::{agent_response, best_response, strategic_stream, AgentStep};
pub use io::{
    convert_dataset, read_dataset, read_truth, write_dataset, write_truth, Dataset, Direction,
    PointModel,
};
pub use planted::{
    lorentz_radius, sample_lorentz_separable, sample_separable, LorentzInstance, Measure,
    PlantedConfig, PlantedInstance, Truth, MIN_ACCEPTANCE, MIN_ATTEMPTS,
};
