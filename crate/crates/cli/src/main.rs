mod keys;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hidden_core::protocols::transcript::{parse_jsonl, Verdict};
use hidden_core::protocols::{ProtocolRegistry, ScenarioConfig, SeedTree};
use hidden_core::rdh::{self, WatermarkKey};
use hidden_core::{Error, GaussianInt};
use num_bigint::BigInt;
use serde_json::json;

const EXIT_REJECTED: u8 = 2;

#[derive(Parser)]
#[command(name = "hidden", version, about = "Watermarked homomorphic sensor data toolkit")]
struct Cli {
    /// Seed for every random choice. A random seed is drawn and reported
    /// on stderr when absent.
    #[arg(long, global = true, env = "HIDDEN_SEED")]
    seed: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Eg,
    Paillier,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ElGamal or Paillier key pair.
    Keygen {
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Modulus size in bits (ElGamal p, or Paillier n).
        #[arg(long, conflicts_with = "p")]
        bits: Option<u64>,
        /// ElGamal prime, or the first Paillier prime.
        #[arg(long)]
        p: Option<BigInt>,
        /// Second Paillier prime.
        #[arg(long, requires = "p")]
        q: Option<BigInt>,
        /// ElGamal generator, e.g. 1+2i.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<GaussianInt>,
        /// ElGamal private exponent.
        #[arg(long)]
        a: Option<BigInt>,
        /// Directory for the public/private key files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hide a watermark in a reading: λ(d + iw).
    Embed {
        #[arg(long, allow_hyphen_values = true)]
        lambda: GaussianInt,
        #[arg(long, allow_hyphen_values = true)]
        data: BigInt,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        watermark: BigInt,
    },
    /// Recover (d, w) from a watermarked value, or (Σd, w) from an aggregate.
    Extract {
        #[arg(long, allow_hyphen_values = true)]
        lambda: GaussianInt,
        #[arg(long, allow_hyphen_values = true)]
        value: GaussianInt,
        /// Number of summed readings.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Run a protocol scenario and write its transcript.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Compare the operation counts in a transcript with the cost model.
    Counters {
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Integrity(_)) => EXIT_REJECTED,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn resolve_seed(flag: Option<String>, fallback: Option<String>) -> String {
    flag.or(fallback).unwrap_or_else(|| {
        let seed = format!("{:016x}", rand::random::<u64>());
        eprintln!("seed: {seed}");
        seed
    })
}

fn gauss_json(z: &GaussianInt) -> serde_json::Value {
    json!({ "re": z.re.to_string(), "im": z.im.to_string() })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Keygen {
            scheme,
            bits,
            p,
            q,
            gamma,
            a,
            out,
        } => {
            let params = keys::KeygenParams { bits, p, q, gamma, a };
            params.check(scheme)?;
            let needs_seed = params.needs_randomness(scheme);
            let seeds = needs_seed.then(|| SeedTree::new(&resolve_seed(cli.seed, None)));
            let pair = match scheme {
                Scheme::Eg => keys::eg(&params, seeds.as_ref())?,
                Scheme::Paillier => keys::paillier(&params, seeds.as_ref())?,
            };
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    write(&dir.join(format!("{}_public.json", pair.prefix)), &pair.public)?;
                    write(&dir.join(format!("{}_private.json", pair.prefix)), &pair.private)?;
                    println!("{}", pair.public);
                }
                None => println!("{{\"public\":{},\"private\":{}}}", pair.public, pair.private),
            }
            if let Some(report) = pair.report {
                eprintln!("{report}");
            }
            Ok(0)
        }
        Command::Embed { lambda, data, watermark } => {
            let key = WatermarkKey::new(lambda)?;
            println!("{}", gauss_json(&rdh::embed(&data, &watermark, &key)));
            Ok(0)
        }
        Command::Extract { lambda, value, n } => {
            let key = WatermarkKey::new(lambda)?;
            let (d, w) = match n {
                Some(n) => rdh::extract_aggregate(&value, &key, n)?,
                None => rdh::extract(&value, &key)?,
            };
            println!("{}", json!({ "data": d.to_string(), "watermark": w.to_string() }));
            Ok(0)
        }
        Command::Simulate { config, transcript } => {
            let mut config = ScenarioConfig::from_json(&read(&config)?)?;
            let seed = resolve_seed(cli.seed, config.seed.take());
            config.seed = Some(seed.clone());
            let sim = ProtocolRegistry::default().simulate(&config, &SeedTree::new(&seed))?;
            if let Some(path) = transcript {
                write(&path, &sim.to_jsonl())?;
            }
            for r in &sim.rounds {
                match r.verdict() {
                    Verdict::Accepted { data, watermark } => {
                        println!("round {}: accepted data={data} watermark={watermark}", r.round())
                    }
                    Verdict::Rejected { reason } => println!("round {}: rejected ({reason})", r.round()),
                }
            }
            Ok(if sim.all_accepted() { 0 } else { EXIT_REJECTED })
        }
        Command::Counters { transcript } => {
            let lines = parse_jsonl(&read(&transcript)?)?;
            let table = report::counters_table(&lines)?;
            print!("{table}");
            Ok(0)
        }
    }
}
