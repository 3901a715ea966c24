//! Genetic algorithm over plasticity-rule genotypes.
//!
//! A genotype is 16 discrete table genes in {-1, 0, 1} plus the continuous
//! parameters (learning rate, threshold, feedback scale and, with a hidden
//! layer, recurrent scale). Fitness is the mean per-trial novelty over a
//! fixed evaluation plan; selection is roulette wheel with elitism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::maze::{DistanceField, MazeMap};
use crate::plasticity::NpspRule;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::trainer::{run_trial, TrainerKind, TrialParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Genotype<S> {
    pub table: [i8; 16],
    pub eta: S,
    pub theta: S,
    /// Present only for controllers with a hidden layer.
    pub alpha_h: Option<S>,
    pub alpha_o: S,
}

impl<S: Scalar> Genotype<S> {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, with_hidden: bool) -> Self {
        let mut table = [0i8; 16];
        for g in &mut table {
            *g = rng.random_range(-1..=1);
        }
        let unit = S::zero()..=S::one();
        Genotype {
            table,
            eta: rng.random_range(unit.clone()),
            theta: rng.random_range(unit.clone()),
            alpha_h: with_hidden.then(|| rng.random_range(unit.clone())),
            alpha_o: rng.random_range(unit),
        }
    }

    /// Total gene count: 19 without a hidden layer, 20 with one.
    pub fn len(&self) -> usize {
        16 + 2 + usize::from(self.alpha_h.is_some()) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_rule(&self) -> NpspRule<S> {
        NpspRule {
            table: self.table,
            eta: self.eta,
            theta: self.theta,
            alpha_h: self.alpha_h,
            alpha_o: self.alpha_o,
        }
    }

    fn continuous(&self) -> Vec<S> {
        let mut v = vec![self.eta, self.theta];
        if let Some(ah) = self.alpha_h {
            v.push(ah);
        }
        v.push(self.alpha_o);
        v
    }

    fn set_continuous(&mut self, v: &[S]) {
        self.eta = v[0];
        self.theta = v[1];
        if self.alpha_h.is_some() {
            self.alpha_h = Some(v[2]);
            self.alpha_o = v[3];
        } else {
            self.alpha_o = v[2];
        }
    }

    /// True if all genes are within their domains.
    pub fn is_valid(&self) -> bool {
        self.table.iter().all(|g| (-1..=1).contains(g))
            && self
                .continuous()
                .iter()
                .all(|&v| v >= S::zero() && v <= S::one())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig<S> {
    pub pop_size: usize,
    pub elite: usize,
    pub crossover_p: f64,
    pub discrete_mutation_p: f64,
    pub continuous_mutation_sd: S,
    pub generations: usize,
    pub trials_per_start: usize,
    pub n_episodes: usize,
    pub max_steps: u32,
    pub hidden: usize,
    /// Re-evaluate carried-over elites each generation instead of caching
    /// their fitness. Caching keeps the best-fitness sequence exactly
    /// non-decreasing.
    pub reevaluate_elites: bool,
}

impl<S: Scalar> Default for GaConfig<S> {
    fn default() -> Self {
        GaConfig {
            pop_size: 14,
            elite: 4,
            crossover_p: 0.5,
            discrete_mutation_p: 0.15,
            continuous_mutation_sd: S::from_f64_lossy(0.1),
            generations: 100,
            trials_per_start: 3,
            n_episodes: 500,
            max_steps: 250,
            hidden: 0,
            reevaluate_elites: false,
        }
    }
}

/// Environments the rules are evaluated on.
pub struct EvalPlan {
    pub envs: Vec<(MazeMap, DistanceField)>,
}

impl EvalPlan {
    pub fn new(maps: Vec<MazeMap>) -> Result<Self> {
        let envs = maps
            .into_iter()
            .map(|m| {
                let f = DistanceField::compute(&m)?;
                Ok((m, f))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalPlan { envs })
    }

    fn trial_count<S: Scalar>(&self, config: &GaConfig<S>) -> usize {
        self.envs
            .iter()
            .map(|(m, _)| m.starts().len() * config.trials_per_start)
            .sum()
    }
}

/// Mean per-trial novelty (the fitness) and mean distance measure over the
/// full trial matrix. Deterministic for a given seed path.
pub fn evaluate<S: Scalar>(
    genotype: &Genotype<S>,
    plan: &EvalPlan,
    config: &GaConfig<S>,
    master_seed: u64,
    generation: u64,
    individual: u64,
) -> Result<(S, S)> {
    let kind = TrainerKind::Npsp {
        rule: genotype.to_rule(),
    };
    let mut novelty_sum = S::zero();
    let mut dist_sum = S::zero();
    let mut trials = 0usize;
    for (env_idx, (map, field)) in plan.envs.iter().enumerate() {
        for start_index in 0..map.starts().len() {
            for trial in 0..config.trials_per_start {
                let seed = derive_seed(
                    master_seed,
                    &[
                        generation,
                        individual,
                        env_idx as u64,
                        start_index as u64,
                        trial as u64,
                    ],
                );
                let result = run_trial(&TrialParams {
                    map,
                    field,
                    start_index,
                    kind: &kind,
                    hidden: config.hidden,
                    n_episodes: config.n_episodes,
                    max_steps: config.max_steps,
                    seed,
                })?;
                novelty_sum += result.novelty;
                dist_sum += result.dist_agent;
                trials += 1;
            }
        }
    }
    let n = S::from_usize_lossy(trials);
    Ok((novelty_sum / n, dist_sum / n))
}

/// Roulette-wheel draw proportional to fitness; uniform if all fitnesses
/// are zero. Panics on negative fitness.
pub fn select_parent<S: Scalar, R: Rng + ?Sized>(fitnesses: &[S], rng: &mut R) -> usize {
    assert!(!fitnesses.is_empty());
    assert!(
        fitnesses.iter().all(|f| *f >= S::zero()),
        "roulette selection requires non-negative fitness"
    );
    let total: S = fitnesses.iter().fold(S::zero(), |a, &b| a + b);
    if total == S::zero() {
        return rng.random_range(0..fitnesses.len());
    }
    let mut target = rng.random_range(S::zero()..S::one()) * total;
    for (i, &f) in fitnesses.iter().enumerate() {
        if target < f {
            return i;
        }
        target = target - f;
    }
    fitnesses.len() - 1
}

/// One-point crossover over the concatenated genotype (discrete genes first,
/// then continuous), applied with probability `crossover_p`.
pub fn crossover<S: Scalar, R: Rng + ?Sized>(
    a: &Genotype<S>,
    b: &Genotype<S>,
    crossover_p: f64,
    rng: &mut R,
) -> (Genotype<S>, Genotype<S>) {
    assert_eq!(a.len(), b.len());
    let mut child_a = a.clone();
    let mut child_b = b.clone();
    if rng.random_range(0.0..1.0) >= crossover_p {
        return (child_a, child_b);
    }
    let len = a.len();
    let point = rng.random_range(1..len);
    for i in point..len.min(16) {
        child_a.table[i] = b.table[i];
        child_b.table[i] = a.table[i];
    }
    let (ca, cb) = (a.continuous(), b.continuous());
    let mut na = ca.clone();
    let mut nb = cb.clone();
    for i in 0..ca.len() {
        if 16 + i >= point {
            na[i] = cb[i];
            nb[i] = ca[i];
        }
    }
    child_a.set_continuous(&na);
    child_b.set_continuous(&nb);
    (child_a, child_b)
}

/// Re-samples each discrete gene with probability `discrete_mutation_p` and
/// adds clamped Gaussian noise to each continuous gene.
pub fn mutate<S: Scalar, R: Rng + ?Sized>(
    genotype: &mut Genotype<S>,
    config: &GaConfig<S>,
    rng: &mut R,
) {
    for g in &mut genotype.table {
        if rng.random_range(0.0..1.0) < config.discrete_mutation_p {
            *g = rng.random_range(-1..=1);
        }
    }
    let mut cont = genotype.continuous();
    for v in &mut cont {
        let perturbed = *v + config.continuous_mutation_sd * S::standard_normal(rng);
        *v = perturbed.max(S::zero()).min(S::one());
    }
    genotype.set_continuous(&cont);
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord<S> {
    pub generation: usize,
    pub best_novelty: S,
    pub best_novelty_genotype: Genotype<S>,
    pub best_distance: S,
    pub best_distance_genotype: Genotype<S>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionLog<S> {
    pub generations: Vec<GenerationRecord<S>>,
}

/// Runs the generational loop and returns the log plus the final population
/// with its fitness values.
/// Final population with each genotype's fitness.
pub type ScoredPopulation<S> = Vec<(Genotype<S>, S)>;

pub fn run_ga<S: Scalar>(
    config: &GaConfig<S>,
    plan: &EvalPlan,
    master_seed: u64,
) -> Result<(EvolutionLog<S>, ScoredPopulation<S>)> {
    assert!(config.elite < config.pop_size || config.pop_size == config.elite);
    assert!(config.pop_size >= 1);
    assert!(plan.trial_count(config) >= 1);

    let mut ga_rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[u64::MAX]));
    let with_hidden = config.hidden > 0;
    let mut population: Vec<Genotype<S>> = (0..config.pop_size)
        .map(|_| Genotype::random(&mut ga_rng, with_hidden))
        .collect();
    // cached (fitness, mean distance) for carried-over elites
    let mut cached: Vec<Option<(S, S)>> = vec![None; config.pop_size];

    let mut log = EvolutionLog::default();
    let mut scored: Vec<(Genotype<S>, S)> = Vec::new();

    for generation in 0..config.generations {
        let evals: Vec<(S, S)> = population
            .par_iter()
            .enumerate()
            .map(|(idx, genotype)| {
                if let Some(hit) = (!config.reevaluate_elites).then(|| cached[idx]).flatten() {
                    return Ok(hit);
                }
                evaluate(
                    genotype,
                    plan,
                    config,
                    master_seed,
                    generation as u64,
                    idx as u64,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let mut order: Vec<usize> = (0..config.pop_size).collect();
        order.sort_by(|&a, &b| evals[b].0.partial_cmp(&evals[a].0).expect("finite fitness"));
        let best = order[0];
        let best_dist = (0..config.pop_size)
            .min_by(|&a, &b| {
                evals[a]
                    .1
                    .partial_cmp(&evals[b].1)
                    .expect("finite distance")
            })
            .unwrap();
        log.generations.push(GenerationRecord {
            generation,
            best_novelty: evals[best].0,
            best_novelty_genotype: population[best].clone(),
            best_distance: evals[best_dist].1,
            best_distance_genotype: population[best_dist].clone(),
        });

        if generation + 1 == config.generations {
            scored = population
                .iter()
                .cloned()
                .zip(evals.iter().map(|e| e.0))
                .collect();
            break;
        }

        let fitnesses: Vec<S> = evals.iter().map(|e| e.0).collect();
        let mut next_pop = Vec::with_capacity(config.pop_size);
        let mut next_cache = Vec::with_capacity(config.pop_size);
        for &idx in order.iter().take(config.elite.min(config.pop_size)) {
            next_pop.push(population[idx].clone());
            next_cache.push(Some(evals[idx]));
        }
        while next_pop.len() < config.pop_size {
            let pa = select_parent(&fitnesses, &mut ga_rng);
            let pb = select_parent(&fitnesses, &mut ga_rng);
            let (mut ca, mut cb) = crossover(
                &population[pa],
                &population[pb],
                config.crossover_p,
                &mut ga_rng,
            );
            mutate(&mut ca, config, &mut ga_rng);
            mutate(&mut cb, config, &mut ga_rng);
            next_pop.push(ca);
            next_cache.push(None);
            if next_pop.len() < config.pop_size {
                next_pop.push(cb);
                next_cache.push(None);
            }
        }
        population = next_pop;
        cached = next_cache;
    }

    Ok((log, scored))
}
