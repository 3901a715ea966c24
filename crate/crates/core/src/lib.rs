//! Deceptive-maze neuroevolution laboratory.
//!
//! Grid-maze agents are controlled by binary-threshold recurrent networks.
//! Between episodes the weights are changed either randomly (random search /
//! random walk baselines) or by an evolved plasticity rule driven by
//! per-connection activation traces. Agents are scored by behavioral novelty
//! and by a normalized goal-distance measure; a genetic algorithm evolves
//! the plasticity rules for novelty.
//!
//! The numeric core is generic over the scalar type ([`Scalar`], `f32` or
//! `f64`); the `*64` aliases below are the defaults used by the CLI.

pub mod behavior;
pub mod error;
pub mod evolution;
pub mod maze;
pub mod plasticity;
pub mod rnn;
pub mod scalar;
pub mod seed;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Bundled maze corpus.
pub mod corpus {
    pub const DM1: &str = include_str!("../maps/dm1.map");
    pub const DM2: &str = include_str!("../maps/dm2.map");
    pub const ENV1: &str = include_str!("../maps/env1.map");
    pub const ENV2: &str = include_str!("../maps/env2.map");
    pub const ENV3: &str = include_str!("../maps/env3.map");

    pub const ALL: [(&str, &str); 5] = [
        ("dm1", DM1),
        ("dm2", DM2),
        ("env1", ENV1),
        ("env2", ENV2),
        ("env3", ENV3),
    ];

    /// Looks up a bundled map document by case-insensitive name.
    pub fn by_name(name: &str) -> Option<&'static str> {
        let lower = name.to_ascii_lowercase();
        ALL.iter().find(|(n, _)| *n == lower).map(|(_, doc)| *doc)
    }
}

pub type NetworkWeights64 = rnn::NetworkWeights<f64>;
pub type NetworkWeights32 = rnn::NetworkWeights<f32>;
pub type NpspRule64 = plasticity::NpspRule<f64>;
pub type NpspRule32 = plasticity::NpspRule<f32>;
pub type Genotype64 = evolution::Genotype<f64>;
pub type TrainerKind64 = trainer::TrainerKind<f64>;
pub type TrialResult64 = trainer::TrialResult<f64>;
