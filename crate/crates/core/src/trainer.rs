//! Episode and trial loops for the three training regimes.
//!
//! A trial starts from random weights and repeats episodes from a fixed
//! start position, updating the weights between episodes (full re-draw for
//! random search, Gaussian perturbation for random walk, rule-based
//! plasticity otherwise) until the goal is reached or the episode budget is
//! exhausted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::behavior::{
    distance_measure, entered_second_room, novelty_score, BehaviorTrace, RegionPartition,
};
use crate::error::Result;
use crate::maze::{Action, DistanceField, EnvState, MazeMap};
use crate::plasticity::{apply_npsp, NatSet, NpspRule};
use crate::rnn::{forward_step, select_action, NetworkState, NetworkTopology, NetworkWeights};
use crate::scalar::Scalar;

/// How weights change between episodes.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainerKind<S> {
    /// Full re-initialization after every unsolved episode.
    RandomSearch,
    /// Element-wise Gaussian perturbation with the given standard deviation.
    RandomWalk { sigma: S },
    /// Activation-trace plasticity with an evolved rule.
    Npsp { rule: NpspRule<S> },
}

impl<S: Scalar> TrainerKind<S> {
    /// Network topology implied by the trainer: plasticity rules carry their
    /// own scale parameters, the baselines use unscaled recurrence.
    pub fn topology(&self, hidden: usize) -> NetworkTopology<S> {
        match self {
            TrainerKind::Npsp { rule } => NetworkTopology {
                hidden,
                alpha_h: rule.alpha_h.unwrap_or_else(S::zero),
                alpha_o: rule.alpha_o,
            },
            _ => NetworkTopology {
                hidden,
                alpha_h: S::one(),
                alpha_o: S::one(),
            },
        }
    }
}

/// One episode's outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpisodeResult {
    pub behavior: String,
    pub min_distance: i32,
    /// Episodic performance: 1 if the goal was reached.
    pub ep: u8,
    pub steps_used: u32,
}

/// One trial's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult<S> {
    pub episodes: Vec<EpisodeResult>,
    pub novelty: S,
    pub dist_agent: S,
    pub reached_goal: bool,
    pub entered_second_room: bool,
    pub seed: u64,
}

/// Runs one episode and, when requested, accumulates activation traces.
pub fn run_episode<S: Scalar>(
    map: &MazeMap,
    field: &DistanceField,
    start_index: usize,
    weights: &NetworkWeights<S>,
    topology: &NetworkTopology<S>,
    max_steps: u32,
    record_nats: bool,
) -> (EpisodeResult, Option<NatSet>) {
    let partition = RegionPartition::new(map.width(), map.height());
    let mut env = EnvState::new(map, start_index);
    let mut net = NetworkState::reset(weights.hidden());
    let mut nats = record_nats.then(|| NatSet::new(weights));
    let mut trace = BehaviorTrace::new();

    let mut region = partition
        .region_of(env.agent_pos)
        .expect("agent position in bounds");
    trace.enter_region(region);
    let mut min_distance = field.at(env.agent_pos);
    let mut ep = 0u8;

    while env.step_count < max_steps {
        let sensors = env.sense();
        let next = forward_step(weights, topology, &net, sensors);
        if let Some(nats) = nats.as_mut() {
            nats.record_step(weights, &net, &next);
        }
        net = next;
        let action = select_action(&net);
        env.step(action);

        if action == Action::Press {
            trace.press_in_region(region);
        } else {
            let now = partition
                .region_of(env.agent_pos)
                .expect("agent position in bounds");
            if now != region {
                region = now;
                trace.enter_region(region);
            }
        }
        min_distance = min_distance.min(field.at(env.agent_pos));
        if env.reached_goal() {
            ep = 1;
            break;
        }
    }

    let result = EpisodeResult {
        behavior: trace.into_string(),
        min_distance,
        ep,
        steps_used: env.step_count,
    };
    (result, nats)
}

/// Between-episode weight update, applied only after unsolved episodes.
pub fn update_weights<S: Scalar, R: Rng + ?Sized>(
    kind: &TrainerKind<S>,
    weights: &mut NetworkWeights<S>,
    nats: Option<&NatSet>,
    rng: &mut R,
) -> Result<()> {
    match kind {
        TrainerKind::RandomSearch => {
            *weights = NetworkWeights::init_random(weights.hidden(), rng);
        }
        TrainerKind::RandomWalk { sigma } => {
            for group in weights.groups_mut() {
                let zero_diag = group.kind.zero_diagonal();
                for r in 0..group.mat.rows() {
                    for c in 0..group.mat.cols() {
                        if zero_diag && r == c {
                            continue;
                        }
                        let w = group.mat.get(r, c);
                        group.mat.set(r, c, w + *sigma * S::standard_normal(rng));
                    }
                }
            }
        }
        TrainerKind::Npsp { rule } => {
            let nats = nats.expect("plasticity update requires activation traces");
            apply_npsp(weights, nats, rule)?;
        }
    }
    Ok(())
}

/// Parameters of one trial.
#[derive(Debug, Clone)]
pub struct TrialParams<'a, S> {
    pub map: &'a MazeMap,
    pub field: &'a DistanceField,
    pub start_index: usize,
    pub kind: &'a TrainerKind<S>,
    pub hidden: usize,
    pub n_episodes: usize,
    pub max_steps: u32,
    pub seed: u64,
}

/// Runs a full trial: random initial weights, then episodes with
/// between-episode updates until the goal is reached or the budget ends.
/// The novelty denominator stays at the episode budget even on early stop.
pub fn run_trial<S: Scalar>(params: &TrialParams<'_, S>) -> Result<TrialResult<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let topology = params.kind.topology(params.hidden);
    let mut weights = NetworkWeights::init_random(params.hidden, &mut rng);

    let mut episodes = Vec::with_capacity(params.n_episodes);
    let mut trial_min = i32::MAX;
    let mut reached = false;
    let record_nats = matches!(params.kind, TrainerKind::Npsp { .. });

    for _ in 0..params.n_episodes {
        let (result, nats) = run_episode(
            params.map,
            params.field,
            params.start_index,
            &weights,
            &topology,
            params.max_steps,
            record_nats,
        );
        trial_min = trial_min.min(result.min_distance);
        let solved = result.ep == 1;
        episodes.push(result);
        if solved {
            reached = true;
            break;
        }
        update_weights(params.kind, &mut weights, nats.as_ref(), &mut rng)?;
    }

    let behaviors: Vec<&str> = episodes.iter().map(|e| e.behavior.as_str()).collect();
    Ok(TrialResult {
        novelty: novelty_score(&behaviors, params.n_episodes),
        dist_agent: distance_measure(trial_min, params.field),
        reached_goal: reached,
        entered_second_room: entered_second_room(trial_min, params.field),
        seed: params.seed,
        episodes,
    })
}

/// JSON-lines log of a trial: one record per episode.
pub fn episodes_to_jsonl(episodes: &[EpisodeResult]) -> String {
    let mut out = String::new();
    for (i, e) in episodes.iter().enumerate() {
        #[derive(Serialize)]
        struct Record<'a> {
            episode: usize,
            #[serde(flatten)]
            result: &'a EpisodeResult,
        }
        out.push_str(
            &serde_json::to_string(&Record {
                episode: i,
                result: e,
            })
            .expect("episode record serializes"),
        );
        out.push('\n');
    }
    out
}
