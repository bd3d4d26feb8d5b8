//! Scattering-experiment semantics: physical propagators, post-selection
//! probabilities, sequential programs, Monte Carlo averages and a
//! full-Hilbert-space reference simulator.

mod card;
mod mc;
mod model;
mod program_json;
mod sim;

pub use card::{experiment_card, CardAmplitude, CardStep, ExperimentCard, PartySchedule};
pub use mc::{monte_carlo, program_operator, MonteCarloOptions, PsiPolicy, Sampler, SuccessEstimate};
pub use model::{derive_vw, HamiltonianModel, ModelSource, RandomModelSpec};
pub use program_json::{program_from_value, program_to_value, PROGRAM_FORMAT};
pub use sim::{
    normalization_log2, reference_simulate, run_program, success_probability, Branching, Outcome, ProtocolProgram,
    Segment, REFERENCE_LIMIT,
};
