use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tvmc::bitstream::{CodecConfig, RATE_POINTS};
use tvmc::commands;
use tvmc::metrics::DEFAULT_SAMPLES;
use tvmc::motion::KalmanParams;
use tvmc::subdivision::QuantMode;
use tvmc::synth::{GenParams, SyntheticKind};
use tvmc::{Error, MeshSequence};

#[derive(Parser)]
#[command(name = "tvmc", version, about = "Time-varying mesh codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaPreset {
    Low,
    High,
}

#[derive(Args)]
struct CodecArgs {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gof: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    hbar: Option<u32>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum)]
    alpha_preset: Option<AlphaPreset>,
    #[arg(long)]
    injective: bool,
    #[arg(long)]
    uniform_quant: bool,
}

impl CodecArgs {
    fn resolve(&self) -> tvmc::Result<CodecConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                CodecConfig::parse(&text)?
            }
            None => CodecConfig::default(),
        };
        if let Some(v) = self.gof {
            cfg.gof_size = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.hbar {
            cfg.hbar = v;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        match self.alpha_preset {
            Some(AlphaPreset::Low) => cfg.kalman = KalmanParams::LOW_MOTION,
            Some(AlphaPreset::High) => cfg.kalman = KalmanParams::HIGH_MOTION,
            None => {}
        }
        cfg.injective |= self.injective;
        if self.uniform_quant {
            cfg.quant_mode = QuantMode::Uniform;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a directory of numbered OBJ/PLY frames.
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Decode a bitstream into numbered OBJ frames.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-frame D1/D2 PSNR between two frame directories.
    Eval {
        original: PathBuf,
        decoded: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// CSV destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic sequence.
    Gen {
        /// deforming_sphere or twisting_bar
        kind: SyntheticKind,
        #[arg(long, default_value_t = 10)]
        frames: usize,
        #[arg(long, default_value_t = 642)]
        vertices: usize,
        #[arg(long)]
        reindex: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate-distortion sweep of inter against intra-only coding.
    Sweep {
        input: PathBuf,
        /// Comma-separated displacement scales.
        #[arg(long, value_delimiter = ',', default_values_t = RATE_POINTS)]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// CSV destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
    },
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> tvmc::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> tvmc::Result<()> {
    match cli.command {
        Command::Encode { input, out, codec } => {
            let cfg = codec.resolve()?;
            let m = commands::encode_dir(&input, &cfg, &out)?;
            println!(
                "{}: {} frames ({} intra, {} inter), {} bytes, {:.1} ms",
                out.display(),
                m.frame_count,
                m.intra_frames,
                m.inter_frames,
                m.total_bytes,
                m.encode_ms
            );
        }
        Command::Decode { input, out } => {
            let files = commands::decode_file(&input, &out)?;
            println!("{}: {} frames", out.display(), files.len());
        }
        Command::Eval { original, decoded, seed, samples, out } => {
            let report = commands::eval_dirs(&original, &decoded, samples, seed)?;
            write_or_print(out.as_ref(), &report.to_csv())?;
        }
        Command::Gen { kind, frames, vertices, reindex, seed, out } => {
            let params = GenParams { kind, frames, vertices, reindex, seed };
            let files = commands::gen(&params, &out)?;
            println!("{}: {} frames", out.display(), files.len());
        }
        Command::Sweep { input, rates, seed, samples, out, codec } => {
            let cfg = codec.resolve()?;
            let seq: MeshSequence = commands::read_frames(&input)?;
            let report = commands::sweep(&seq, &cfg, &rates, samples, seed)?;
            write_or_print(out.as_ref(), &report.to_csv())?;
            match (report.bd_rate_d1, report.bd_rate_d2) {
                (Some(d1), Some(d2)) => eprintln!("BD-rate inter vs intra: D1 {d1:.2}%, D2 {d2:.2}%"),
                _ => eprintln!("BD-rate unavailable (needs 4 rate points with overlapping quality)"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 1,
                _ => 2,
            })
        }
        Err(_) => ExitCode::from(3),
    }
}
