//! The five experiment subcommands.

use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use npsp_core::evolution::{run_ga, EvalPlan, GaConfig};
use npsp_core::maze::{DistanceField, MazeMap, Position};
use npsp_core::plasticity::NpspRule;
use npsp_core::seed::derive_seed;
use npsp_core::trainer::{episodes_to_jsonl, run_trial, TrainerKind, TrialParams, TrialResult};

use crate::config::{Settings, TrainerName};
use crate::output::{distance_field_pgm, lower_median, metadata_header, write_artifact};

fn load_rule(settings: &Settings) -> Result<NpspRule<f64>> {
    let path = settings
        .rule
        .as_ref()
        .context("this trainer needs --rule <file>")?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading rule file {}", path.display()))?;
    NpspRule::parse(&text).with_context(|| format!("parsing rule file {}", path.display()))
}

fn build_trainer(name: TrainerName, settings: &Settings) -> Result<TrainerKind<f64>> {
    Ok(match name {
        TrainerName::Rs => TrainerKind::RandomSearch,
        TrainerName::Rw => TrainerKind::RandomWalk {
            sigma: settings.sigma,
        },
        TrainerName::Npsp => TrainerKind::Npsp {
            rule: load_rule(settings)?,
        },
    })
}

fn environments(settings: &Settings) -> Result<Vec<(MazeMap, DistanceField)>> {
    settings
        .load_maps()?
        .into_iter()
        .map(|map| {
            let field = DistanceField::compute(&map)?;
            Ok((map, field))
        })
        .collect()
}

fn one_trial(
    kind: &TrainerKind<f64>,
    map: &MazeMap,
    field: &DistanceField,
    start_index: usize,
    settings: &Settings,
    seed: u64,
) -> npsp_core::Result<TrialResult<f64>> {
    run_trial(&TrialParams {
        map,
        field,
        start_index,
        kind,
        hidden: settings.hidden,
        n_episodes: settings.episodes,
        max_steps: settings.steps,
        seed,
    })
}

struct AlgorithmSummary {
    name: &'static str,
    median_novelty: f64,
    median_distance: f64,
    goal_count: usize,
    second_room_count: usize,
    trials: usize,
}

pub fn compare(settings: &Settings) -> Result<()> {
    let envs = environments(settings)?;
    let algorithms: Vec<TrainerName> = match settings.trainer {
        Some(t) => vec![t],
        None => {
            let mut all = vec![TrainerName::Rs, TrainerName::Rw];
            if settings.rule.is_some() {
                all.push(TrainerName::Npsp);
            }
            all
        }
    };

    let mut summaries = Vec::new();
    for &algo in &algorithms {
        let kind = build_trainer(algo, settings)?;
        let mut jobs = Vec::new();
        for (env_idx, (map, _)) in envs.iter().enumerate() {
            for start_index in 0..map.starts().len() {
                for trial in 0..settings.trials {
                    let seed = derive_seed(
                        settings.seed,
                        &[
                            algo.seed_id(),
                            env_idx as u64,
                            start_index as u64,
                            trial as u64,
                        ],
                    );
                    jobs.push((env_idx, start_index, seed));
                }
            }
        }
        let results: Vec<TrialResult<f64>> = jobs
            .par_iter()
            .map(|&(env_idx, start_index, seed)| {
                let (map, field) = &envs[env_idx];
                one_trial(&kind, map, field, start_index, settings, seed)
            })
            .collect::<npsp_core::Result<_>>()?;

        let novelties: Vec<f64> = results.iter().map(|r| r.novelty).collect();
        let distances: Vec<f64> = results.iter().map(|r| r.dist_agent).collect();
        summaries.push(AlgorithmSummary {
            name: algo.label(),
            median_novelty: lower_median(&novelties),
            median_distance: lower_median(&distances),
            goal_count: results.iter().filter(|r| r.reached_goal).count(),
            second_room_count: results.iter().filter(|r| r.entered_second_room).count(),
            trials: results.len(),
        });
    }

    let mut csv = metadata_header(settings);
    csv.push_str(
        "algorithm,hidden,median_novelty,median_distance,goal_count,second_room_count,trials\n",
    );
    for s in &summaries {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            s.name,
            settings.hidden,
            s.median_novelty,
            s.median_distance,
            s.goal_count,
            s.second_room_count,
            s.trials
        );
    }
    write_artifact(&settings.out, "compare.csv", &csv)?;

    println!("algorithm  hidden  novelty  distance  goal  second_room  trials");
    for s in &summaries {
        println!(
            "{:<9}  {:<6}  {:<7.4}  {:<8.4}  {:<4}  {:<11}  {}",
            s.name,
            settings.hidden,
            s.median_novelty,
            s.median_distance,
            s.goal_count,
            s.second_room_count,
            s.trials
        );
    }
    Ok(())
}

fn inline_rule(rule: &NpspRule<f64>) -> String {
    rule.to_file_string().trim_end().replace('\n', " ; ")
}

pub fn evolve(settings: &Settings) -> Result<()> {
    let maps = settings.load_maps()?;
    let plan = EvalPlan::new(maps)?;
    let config = GaConfig::<f64> {
        pop_size: settings.pop,
        elite: settings.elite,
        generations: settings.generations,
        trials_per_start: settings.trials,
        n_episodes: settings.episodes,
        max_steps: settings.steps,
        hidden: settings.hidden,
        ..GaConfig::default()
    };
    let (log, _) = run_ga(&config, &plan, settings.seed)?;

    let mut csv = metadata_header(settings);
    csv.push_str("generation,best_novelty,best_novelty_rule,best_distance,best_distance_rule\n");
    for rec in &log.generations {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            rec.generation,
            rec.best_novelty,
            inline_rule(&rec.best_novelty_genotype.to_rule()),
            rec.best_distance,
            inline_rule(&rec.best_distance_genotype.to_rule()),
        );
    }
    write_artifact(&settings.out, "evolve_trend.csv", &csv)?;

    let last = log
        .generations
        .last()
        .context("evolution produced no generations")?;
    write_artifact(
        &settings.out,
        "best_novelty.rule",
        &last.best_novelty_genotype.to_rule().to_file_string(),
    )?;
    write_artifact(
        &settings.out,
        "best_distance.rule",
        &last.best_distance_genotype.to_rule().to_file_string(),
    )?;

    println!(
        "{} generations; final best novelty {:.4}, best distance {:.4}",
        log.generations.len(),
        last.best_novelty,
        last.best_distance
    );
    Ok(())
}

pub fn heatmap(settings: &Settings) -> Result<()> {
    let rule = load_rule(settings)?;
    let kind = TrainerKind::Npsp { rule };
    let envs = environments(settings)?;

    for (env_idx, (map, field)) in envs.iter().enumerate() {
        let heading = map.starts()[0].1;
        let cells = map.first_room_cells();
        let per_cell: Vec<(Position, f64, f64)> = cells
            .par_iter()
            .map(|&cell| {
                let variant = map.with_start(cell, heading)?;
                let cell_id = (cell.y * map.width() + cell.x) as u64;
                let mut novelties = Vec::with_capacity(settings.trials);
                let mut distances = Vec::with_capacity(settings.trials);
                for trial in 0..settings.trials {
                    let seed = derive_seed(settings.seed, &[env_idx as u64, cell_id, trial as u64]);
                    let r = one_trial(&kind, &variant, field, 0, settings, seed)?;
                    novelties.push(r.novelty);
                    distances.push(r.dist_agent);
                }
                Ok((cell, lower_median(&distances), lower_median(&novelties)))
            })
            .collect::<npsp_core::Result<_>>()?;

        let mut dist_grid = vec![vec![-1.0f64; map.width()]; map.height()];
        let mut nov_grid = vec![vec![-1.0f64; map.width()]; map.height()];
        let mut below_one = 0usize;
        for &(cell, dist, nov) in &per_cell {
            dist_grid[cell.y][cell.x] = dist;
            nov_grid[cell.y][cell.x] = nov;
            if dist < 1.0 {
                below_one += 1;
            }
        }

        let grid_csv = |grid: &[Vec<f64>], extra: &str| {
            let mut csv = metadata_header(settings);
            csv.push_str(extra);
            for row in grid {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            csv
        };
        let below_line = format!("# cells_below_one = {below_one}\n");
        write_artifact(
            &settings.out,
            &format!("heatmap_{}_distance.csv", map.name()),
            &grid_csv(&dist_grid, &below_line),
        )?;
        write_artifact(
            &settings.out,
            &format!("heatmap_{}_novelty.csv", map.name()),
            &grid_csv(&nov_grid, ""),
        )?;

        println!(
            "{}: {} of {} first-room cells reach the second room (median distance < 1)",
            map.name(),
            below_one,
            per_cell.len()
        );
    }
    Ok(())
}

pub fn trial(settings: &Settings) -> Result<()> {
    let envs = environments(settings)?;
    let (map, field) = envs.first().context("no maps given")?;
    if settings.start >= map.starts().len() {
        bail!(
            "start index {} out of range; map {} has {} starts",
            settings.start,
            map.name(),
            map.starts().len()
        );
    }
    let kind = build_trainer(settings.trainer.unwrap_or(TrainerName::Rs), settings)?;
    let result = one_trial(&kind, map, field, settings.start, settings, settings.seed)?;

    write_artifact(
        &settings.out,
        "trial.jsonl",
        &episodes_to_jsonl(&result.episodes),
    )?;
    let mut meta = metadata_header(settings);
    let _ = writeln!(meta, "novelty = {}", result.novelty);
    let _ = writeln!(meta, "dist_agent = {}", result.dist_agent);
    let _ = writeln!(meta, "reached_goal = {}", result.reached_goal);
    let _ = writeln!(meta, "entered_second_room = {}", result.entered_second_room);
    let _ = writeln!(meta, "episodes_run = {}", result.episodes.len());
    write_artifact(&settings.out, "trial.meta", &meta)?;

    println!(
        "novelty {:.4}, distance {:.4}, goal {}, second room {}, {} episodes",
        result.novelty,
        result.dist_agent,
        result.reached_goal,
        result.entered_second_room,
        result.episodes.len()
    );
    Ok(())
}

pub fn distfield(settings: &Settings) -> Result<()> {
    let envs = environments(settings)?;
    for (map, field) in &envs {
        let mut csv = metadata_header(settings);
        csv.push_str(&field.to_csv());
        write_artifact(
            &settings.out,
            &format!("distfield_{}.csv", map.name()),
            &csv,
        )?;
        let pgm = distance_field_pgm(map, field, &metadata_header(settings));
        write_artifact(
            &settings.out,
            &format!("distfield_{}.pgm", map.name()),
            &pgm,
        )?;
        println!(
            "{}: door distance {}, max distance {}, second-room max {}",
            map.name(),
            field.door_distance,
            field.max_dist,
            field.max_dist_second_room
        );
    }
    Ok(())
}
