use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gqms_core::{CVector, Complex64, Tolerances};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gqms", version, about = "Decoherence-free subalgebra of Gaussian quantum Markov semigroups")]
pub struct Cli {
    /// JSON config file with `tolerances`, `format` and `seed`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Relative singular-value cutoff for spans and null spaces.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol_rank: Option<f64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Hermiticity, symmetry, Kraus count and minimality.
    Validate { model: PathBuf },
    /// Commutator span, M, M' and the (d_c, d_r, d_f) decomposition.
    Analyze { model: PathBuf },
    /// Case of a single Kraus operator with H = 0.
    Classify { model: PathBuf },
    /// Evolve Weyl operators W(z) over a time grid.
    Evolve {
        model: PathBuf,
        /// Complex vector as `re,im;re,im;...`; repeat for several.
        #[arg(long = "z", required = true)]
        z: Vec<String>,
        /// Comma-separated times.
        #[arg(long = "t", required = true)]
        t: String,
    },
    /// Compare M' from ker C with the commutator-span route.
    Crosscheck {
        /// Model file; omit together with `--random` to check seeded random models.
        model: Option<PathBuf>,
        #[arg(long)]
        random: Option<usize>,
    },
    /// Residuals against a truncated Fock-space computation.
    Oracle {
        model: PathBuf,
        #[arg(long = "z")]
        z: String,
        #[arg(long = "t")]
        t: f64,
        /// Comma-separated cutoff per mode.
        #[arg(long)]
        cutoffs: String,
        /// Largest occupation per mode compared; default a third of the cutoff.
        #[arg(long)]
        sector: Option<usize>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Effective settings after merging the config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tolerances: Tolerances,
    pub format: Format,
    pub seed: u64,
}

impl Config {
    pub fn resolve(cli: &Cli) -> Result<Config, CliError> {
        let file = match &cli.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let mut tolerances = file.tolerances.unwrap_or_default();
        if let Some(r) = cli.tol_rank {
            tolerances.rank = r;
        }
        if !tolerances.all_positive() {
            return Err(CliError::Usage("all tolerances must be positive and finite".into()));
        }
        Ok(Config {
            tolerances,
            format: cli.format.or(file.format).unwrap_or(Format::Text),
            seed: cli.seed.or(file.seed).unwrap_or(0),
        })
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let s = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io(e),
    })?;
    serde_json::from_str(&s).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn parse_cvector(s: &str) -> Result<CVector, CliError> {
    let entries: Result<Vec<Complex64>, CliError> = s
        .split(';')
        .map(|e| {
            let parts: Vec<&str> = e.split(',').map(str::trim).collect();
            let num = |p: &str| {
                p.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("bad number {p:?} in vector {s:?}")))
            };
            match parts.as_slice() {
                [re] => Ok(Complex64::new(num(re)?, 0.0)),
                [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
                _ => Err(CliError::Usage(format!("entry {e:?} is not `re,im`"))),
            }
        })
        .collect();
    Ok(CVector::from_vec(entries?))
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad {what} {p:?}")))
        })
        .collect()
}
