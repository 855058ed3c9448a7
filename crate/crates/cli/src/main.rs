//! `kazhdan-lab`: experiment runner and acceptance driver.

mod cache;
mod config;
mod experiments;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use kazhdan_core::acceptance::{all_passed, run_suite, Suite};
use kazhdan_core::l2approx::GroupRingMatrix;
use kazhdan_core::Error;
use serde_json::json;

use cache::{Cache, CacheError};
use config::*;

const DEFAULT_OUT: &str = "out";

#[derive(Parser, Debug)]
#[command(
    name = "kazhdan-lab",
    version,
    about = "Canonical measures, cover towers and L2-Betti approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; replaces the subcommand's parameter flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Betti numbers of the base surface or of a cover.
    Betti {
        #[arg(long)]
        genus: Option<u32>,
        /// `cyclic:GEN:N` or `homology:N`.
        #[arg(long)]
        cover: Option<String>,
    },
    /// Build a cover and check its structure.
    Cover {
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        cover: Option<String>,
    },
    /// Normalized Betti numbers along a tower, or kernel dimensions of a
    /// group ring matrix along finite quotients.
    Lueck {
        #[arg(long)]
        genus: Option<u32>,
        /// `cyclic:GEN:M1,M2,…` or `homology:M1,M2,…`.
        #[arg(long)]
        tower: Option<String>,
        /// Cohomological degree for the Betti sequence.
        #[arg(long)]
        degree: Option<usize>,
        /// Group ring matrix as JSON.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Seed of a pseudo-random group ring matrix.
        #[arg(long)]
        seeded_matrix: Option<u64>,
        /// Quotient levels, e.g. `2,4,8` or `2x2,4x4`.
        #[arg(long)]
        moduli: Option<String>,
        /// Grid nodes per circle for the torus estimate.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Pushforward edge measures along a tower.
    Hodge {
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        tower: Option<String>,
    },
    /// Limit edge measure of an abelian cover with infinite deck group.
    Limit {
        #[arg(long)]
        genus: Option<u32>,
        /// One weight vector per generator: `1,0;0,0;0,1;0,0`.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Canonical density at points of a hyperelliptic curve, or its total
    /// mass.
    Curve {
        /// Real coefficients of `f`, ascending.
        #[arg(long, allow_hyphen_values = true)]
        coefficients: Option<String>,
        /// Evaluation point `re,im`; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        point: Vec<String>,
        /// Integrate the density over the whole curve.
        #[arg(long)]
        mass: bool,
        /// Gauss–Legendre order for the mass integral.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Poincaré disk model checks.
    Disk {
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run the acceptance suite.
    Accept {
        #[arg(value_enum, default_value = "fast")]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Cache(CacheError),
    Io(std::io::Error),
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<CacheError> for Failure {
    fn from(e: CacheError) -> Self {
        Failure::Cache(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Validation(_))
            | Failure::Core(Error::Tower { .. })
            | Failure::Core(Error::BranchProximity { .. })
            | Failure::Core(Error::SingularCurve(_)) => 2,
            Failure::Core(Error::ResourceCap { .. }) => 3,
            Failure::Acceptance => 4,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Cache(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Acceptance => write!(f, "acceptance suite failed"),
        }
    }
}

fn missing(flag: &str) -> Error {
    Error::Validation(format!("missing --{flag}"))
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| missing(flag))
}

/// `2,4,8` (cyclic levels) or `2x2,4x4`.
fn parse_levels(s: &str) -> Result<Vec<Vec<u64>>, Error> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|level| level.split('x').map(parse_num).collect())
        .collect()
}

fn parse_pair(s: &str) -> Result<[f64; 2], Error> {
    match parse_list::<f64>(s)?.as_slice() {
        [re, im] => Ok([*re, *im]),
        _ => Err(Error::Validation(format!("expected 're,im', got '{s}'"))),
    }
}

/// Parameters from the subcommand flags.
fn params_from_flags(cmd: &Command) -> Result<Params, Error> {
    Ok(match cmd {
        Command::Betti { genus, cover } => Params::Betti(BettiParams {
            genus: required(*genus, "genus")?,
            cover: cover.as_deref().map(CoverDesc::parse).transpose()?,
            max_degree: kazhdan_core::covers::DEFAULT_MAX_DEGREE,
        }),
        Command::Cover { genus, cover } => Params::Cover(CoverParams {
            genus: required(*genus, "genus")?,
            cover: CoverDesc::parse(required(cover.as_deref(), "cover")?)?,
            max_degree: kazhdan_core::covers::DEFAULT_MAX_DEGREE,
        }),
        Command::Lueck {
            genus,
            tower,
            degree,
            matrix,
            seeded_matrix,
            moduli,
            nodes,
        } => {
            if matrix.is_some() || seeded_matrix.is_some() {
                let matrix = match matrix {
                    Some(path) => {
                        let text = fs::read_to_string(path).map_err(|e| {
                            Error::Validation(format!("cannot read {}: {e}", path.display()))
                        })?;
                        Some(GroupRingMatrix::from_json(&text)?)
                    }
                    None => None,
                };
                Params::LueckMatrix(LueckMatrixParams {
                    matrix,
                    seeded: *seeded_matrix,
                    moduli: parse_levels(required(moduli.as_deref(), "moduli")?)?,
                    nodes: nodes.unwrap_or(kazhdan_core::l2approx::DEFAULT_VN_NODES),
                    max_order: kazhdan_core::l2approx::DEFAULT_MAX_QUOTIENT_ORDER,
                })
            } else {
                Params::LueckBetti(LueckBettiParams {
                    genus: required(*genus, "genus")?,
                    tower: TowerDesc::parse(required(tower.as_deref(), "tower")?)?,
                    degree: degree.unwrap_or(1),
                    max_degree: kazhdan_core::covers::DEFAULT_MAX_DEGREE,
                })
            }
        }
        Command::Hodge { genus, tower } => Params::HodgeMeasure(HodgeParams {
            genus: required(*genus, "genus")?,
            tower: TowerDesc::parse(required(tower.as_deref(), "tower")?)?,
            max_degree: kazhdan_core::covers::DEFAULT_MAX_DEGREE,
        }),
        Command::Limit {
            genus,
            weights,
            nodes,
        } => Params::LimitMeasure(LimitParams {
            genus: required(*genus, "genus")?,
            weights: required(weights.as_deref(), "weights")?
                .split(';')
                .map(parse_list)
                .collect::<Result<_, _>>()?,
            nodes: *nodes,
        }),
        Command::Curve {
            coefficients,
            point,
            mass,
            order,
        } => {
            let coefficients: Vec<[f64; 2]> =
                parse_list::<f64>(required(coefficients.as_deref(), "coefficients")?)?
                    .into_iter()
                    .map(|c| [c, 0.0])
                    .collect();
            if *mass {
                Params::CurveMass(CurveMassParams {
                    coefficients,
                    order: order.unwrap_or(kazhdan_core::curves::DEFAULT_ORDER),
                    period_nodes: 64,
                })
            } else {
                Params::CurveDensity(CurveDensityParams {
                    coefficients,
                    points: point
                        .iter()
                        .map(|p| parse_pair(p))
                        .collect::<Result<_, _>>()?,
                    period_nodes: 64,
                })
            }
        }
        Command::Disk { radii, grid } => Params::Disk(DiskParams {
            radii: parse_list(required(radii.as_deref(), "radii")?)?,
            grid: grid.unwrap_or(50),
        }),
        Command::Accept { .. } => unreachable!("acceptance has no experiment parameters"),
    })
}

fn has_param_flags(cmd: &Command) -> bool {
    match cmd {
        Command::Betti { genus, cover } | Command::Cover { genus, cover } => {
            genus.is_some() || cover.is_some()
        }
        Command::Lueck {
            genus,
            tower,
            degree,
            matrix,
            seeded_matrix,
            moduli,
            nodes,
        } => {
            genus.is_some()
                || tower.is_some()
                || degree.is_some()
                || matrix.is_some()
                || seeded_matrix.is_some()
                || moduli.is_some()
                || nodes.is_some()
        }
        Command::Hodge { genus, tower } => genus.is_some() || tower.is_some(),
        Command::Limit {
            genus,
            weights,
            nodes,
        } => genus.is_some() || weights.is_some() || nodes.is_some(),
        Command::Curve {
            coefficients,
            point,
            mass,
            order,
        } => coefficients.is_some() || !point.is_empty() || *mass || order.is_some(),
        Command::Disk { radii, grid } => radii.is_some() || grid.is_some(),
        Command::Accept { .. } => false,
    }
}

fn accepted_kinds(cmd: &Command) -> &'static [Kind] {
    match cmd {
        Command::Betti { .. } => &[Kind::Betti],
        Command::Cover { .. } => &[Kind::Cover],
        Command::Lueck { .. } => &[Kind::LueckMatrix, Kind::LueckBetti],
        Command::Hodge { .. } => &[Kind::HodgeMeasure],
        Command::Limit { .. } => &[Kind::LimitMeasure],
        Command::Curve { .. } => &[Kind::CurveDensity, Kind::CurveMass],
        Command::Disk { .. } => &[Kind::Disk],
        Command::Accept { .. } => &[],
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let (params, seed, out, cache) = match &cli.config {
        Some(path) => {
            if has_param_flags(&cli.command) {
                return Err(Error::Validation(
                    "parameter flags cannot be combined with --config".into(),
                ));
            }
            let loaded = load_config(path)?;
            let kind = loaded.params.kind();
            if !accepted_kinds(&cli.command).contains(&kind) {
                return Err(Error::Validation(format!(
                    "config kind '{}' does not belong to this subcommand",
                    kind.name()
                )));
            }
            (loaded.params, loaded.seed, loaded.out, loaded.cache)
        }
        None => (params_from_flags(&cli.command)?, None, None, None),
    };
    let config = ExperimentConfig {
        params,
        seed: cli.seed.or(seed).unwrap_or(0),
        out: cli
            .out
            .clone()
            .or(out)
            .unwrap_or_else(|| DEFAULT_OUT.into()),
        cache: !cli.no_cache && cache.unwrap_or(true),
    };
    config.params.validate()?;
    Ok(config)
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json serializes");
    bytes.push(b'\n');
    bytes
}

const RESULT_FILE: &str = "result.json";
const TABLE_FILE: &str = "table.csv";

fn compute(config: &ExperimentConfig, hash: &str) -> Result<BTreeMap<String, Vec<u8>>, Failure> {
    let started = now();
    let output = experiments::run(&config.params, config.seed)?;
    let record = json!({
        "schema": SCHEMA_VERSION,
        "config_hash": hash,
        "seed": config.seed,
        "kind": config.kind(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_at": started,
        "finished_at": now(),
        "config": serde_json::from_str::<serde_json::Value>(&config.canonical()).expect("canonical json"),
        "payload": output.payload,
    });
    Ok(BTreeMap::from([
        (RESULT_FILE.to_string(), pretty(&record)),
        (
            TABLE_FILE.to_string(),
            experiments::render_csv(&output, hash, config.seed).into_bytes(),
        ),
    ]))
}

fn run_experiment(
    config: &ExperimentConfig,
    cache_root: &Path,
) -> Result<serde_json::Value, Failure> {
    let hash = config.hash();
    let cache = Cache::new(cache_root);
    let cached = if config.cache {
        cache.get(&hash)?
    } else {
        None
    };
    let cache_hit = cached.is_some();
    let files = match cached {
        Some(files) => files,
        None => {
            let files = compute(config, &hash)?;
            if config.cache {
                cache.put(&hash, &files)?;
            }
            files
        }
    };

    // nothing reaches the output directory until the run has succeeded
    let stem = format!("{}-{}", config.kind().name(), &hash[..12]);
    fs::create_dir_all(&config.out)?;
    let json_path = config.out.join(format!("{stem}.json"));
    let csv_path = config.out.join(format!("{stem}.csv"));
    let run_path = config.out.join(format!("{stem}.run.json"));
    fs::write(&json_path, &files[RESULT_FILE])?;
    fs::write(&csv_path, &files[TABLE_FILE])?;
    let summary = json!({
        "config_hash": hash,
        "seed": config.seed,
        "kind": config.kind(),
        "cache_hit": cache_hit,
        "cache_dir": config.cache.then(|| cache.root().display().to_string()),
        "run_at": now(),
        "files": [json_path.display().to_string(), csv_path.display().to_string()],
    });
    fs::write(&run_path, pretty(&summary))?;
    Ok(summary)
}

fn run_acceptance(suite: SuiteArg, seed: u64, out: &Path) -> Result<(), Failure> {
    let suite = match suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let results = run_suite(suite, seed);
    for r in &results {
        println!("{}", r.line());
    }
    let passed = all_passed(&results);
    let suite_name = match suite {
        Suite::Fast => "fast",
        Suite::Full => "full",
    };
    let canonical =
        json!({ "kind": "accept", "schema": SCHEMA_VERSION, "seed": seed, "suite": suite_name });
    let hash = cache::digest(canonical.to_string().as_bytes());
    let verdict = json!({
        "config_hash": hash,
        "seed": seed,
        "suite": suite_name,
        "version": env!("CARGO_PKG_VERSION"),
        "finished_at": now(),
        "passed": passed,
        "criteria": results,
    });
    fs::create_dir_all(out)?;
    fs::write(out.join("acceptance.json"), pretty(&verdict))?;
    println!(
        "{}",
        if passed {
            "acceptance: PASS"
        } else {
            "acceptance: FAIL"
        }
    );
    if passed {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn main_inner(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("cannot configure thread pool: {e}")))?;
    }
    if let Command::Accept { suite } = cli.command {
        if cli.config.is_some() {
            return Err(Error::Validation("accept takes no --config".into()).into());
        }
        let out = cli.out.clone().unwrap_or_else(|| DEFAULT_OUT.into());
        return run_acceptance(suite, cli.seed.unwrap_or(0), &out);
    }
    let config = build_config(cli)?;
    let summary = run_experiment(&config, &cache::default_dir())?;
    println!(
        "{}",
        serde_json::to_string(&summary).expect("summary serializes")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
