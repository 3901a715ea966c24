//! Resolved experiment settings: defaults, then config file, then flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use npsp_core::corpus;
use npsp_core::maze::MazeMap;

pub const ALLOWED_HIDDEN: [usize; 4] = [0, 15, 30, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TrainerName {
    Rs,
    Rw,
    Npsp,
}

impl TrainerName {
    pub fn label(self) -> &'static str {
        match self {
            TrainerName::Rs => "rs",
            TrainerName::Rw => "rw",
            TrainerName::Npsp => "npsp",
        }
    }

    /// Stable id used in seed-derivation paths, independent of which
    /// trainers a given run selects.
    pub fn seed_id(self) -> u64 {
        match self {
            TrainerName::Rs => 0,
            TrainerName::Rw => 1,
            TrainerName::Npsp => 2,
        }
    }
}

/// Flags shared by every subcommand. Any field left unset falls back to the
/// config file (when given), then to the built-in default.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// Map name (dm1, dm2, env1, env2, env3) or map file path; repeatable
    #[arg(long = "map")]
    pub maps: Vec<String>,
    /// Hidden layer size (0, 15, 30 or 50)
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Episodes per trial
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Step budget per episode
    #[arg(long)]
    pub steps: Option<u32>,
    /// Trials per map and start position
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight-update regime
    #[arg(long, value_enum)]
    pub trainer: Option<TrainerName>,
    /// Random-walk perturbation scale
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Plasticity rule file
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Config file in flat `key = value` form; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population size (evolve)
    #[arg(long)]
    pub pop: Option<usize>,
    /// Elites carried over unchanged (evolve)
    #[arg(long)]
    pub elite: Option<usize>,
    /// Generations (evolve)
    #[arg(long)]
    pub generations: Option<usize>,
    /// Start position index (trial)
    #[arg(long)]
    pub start: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub map_specs: Vec<String>,
    pub hidden: usize,
    pub episodes: usize,
    pub steps: u32,
    pub trials: usize,
    pub seed: u64,
    pub trainer: Option<TrainerName>,
    pub sigma: f64,
    pub rule: Option<PathBuf>,
    pub out: PathBuf,
    pub workers: usize,
    pub pop: usize,
    pub elite: usize,
    pub generations: usize,
    pub start: usize,
}

#[derive(Debug, Default)]
struct FileConfig {
    maps: Vec<String>,
    values: Vec<(String, String)>,
}

fn parse_config_file(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut out = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", path.display(), lineno + 1);
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key == "map" {
            out.maps.push(value);
        } else {
            out.values.push((key, value));
        }
    }
    Ok(out)
}

fn lookup<'a>(file: &'a FileConfig, key: &str) -> Option<&'a str> {
    file.values
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn parsed<T: std::str::FromStr>(file: &FileConfig, key: &str) -> Result<Option<T>> {
    match lookup(file, key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| anyhow::anyhow!("config key `{key}`: bad value `{v}`")),
    }
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Settings> {
        let file = match &args.config {
            Some(path) => parse_config_file(path)?,
            None => FileConfig::default(),
        };
        let trainer = match args.trainer {
            Some(t) => Some(t),
            None => match lookup(&file, "trainer") {
                None => None,
                Some("rs") => Some(TrainerName::Rs),
                Some("rw") => Some(TrainerName::Rw),
                Some("npsp") => Some(TrainerName::Npsp),
                Some(other) => bail!("config key `trainer`: bad value `{other}`"),
            },
        };
        let settings = Settings {
            map_specs: if args.maps.is_empty() {
                file.maps.clone()
            } else {
                args.maps.clone()
            },
            hidden: args.hidden.or(parsed(&file, "hidden")?).unwrap_or(0),
            episodes: args.episodes.or(parsed(&file, "episodes")?).unwrap_or(500),
            steps: args.steps.or(parsed(&file, "steps")?).unwrap_or(250),
            trials: args.trials.or(parsed(&file, "trials")?).unwrap_or(3),
            seed: args.seed.or(parsed(&file, "seed")?).unwrap_or(0),
            trainer,
            sigma: args.sigma.or(parsed(&file, "sigma")?).unwrap_or(0.1),
            rule: args
                .rule
                .clone()
                .or_else(|| lookup(&file, "rule").map(PathBuf::from)),
            out: args
                .out
                .clone()
                .or_else(|| lookup(&file, "out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(".")),
            workers: args.workers.or(parsed(&file, "workers")?).unwrap_or(0),
            pop: args.pop.or(parsed(&file, "pop")?).unwrap_or(14),
            elite: args.elite.or(parsed(&file, "elite")?).unwrap_or(4),
            generations: args
                .generations
                .or(parsed(&file, "generations")?)
                .unwrap_or(100),
            start: args.start.or(parsed(&file, "start")?).unwrap_or(0),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<()> {
        if !ALLOWED_HIDDEN.contains(&self.hidden) {
            bail!(
                "hidden must be one of {:?}, got {}",
                ALLOWED_HIDDEN,
                self.hidden
            );
        }
        if self.trials < 1 {
            bail!("trials must be at least 1");
        }
        if self.episodes < 1 {
            bail!("episodes must be at least 1");
        }
        if let Some(rule) = &self.rule {
            if !rule.exists() {
                bail!("rule file {} does not exist", rule.display());
            }
        }
        Ok(())
    }

    /// Loads every referenced map, resolving bundled names first.
    pub fn load_maps(&self) -> Result<Vec<MazeMap>> {
        if self.map_specs.is_empty() {
            bail!("no maps given; use --map or a config file");
        }
        self.map_specs
            .iter()
            .map(|spec| {
                let doc = match corpus::by_name(spec) {
                    Some(doc) => doc.to_string(),
                    None => fs::read_to_string(spec)
                        .with_context(|| format!("reading map file {spec}"))?,
                };
                MazeMap::parse(&doc).with_context(|| format!("parsing map {spec}"))
            })
            .collect()
    }

    /// Canonical one-line-per-key dump, the input to the config hash.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        for m in &self.map_specs {
            let _ = writeln!(s, "map = {m}");
        }
        let _ = writeln!(s, "hidden = {}", self.hidden);
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(t) = self.trainer {
            let _ = writeln!(s, "trainer = {}", t.label());
        }
        let _ = writeln!(s, "sigma = {}", self.sigma);
        if let Some(rule) = &self.rule {
            let _ = writeln!(s, "rule = {}", rule.display());
        }
        let _ = writeln!(s, "pop = {}", self.pop);
        let _ = writeln!(s, "elite = {}", self.elite);
        let _ = writeln!(s, "generations = {}", self.generations);
        let _ = writeln!(s, "start = {}", self.start);
        s
    }

    /// Hash over everything that affects results; worker count and output
    /// location deliberately excluded.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}
