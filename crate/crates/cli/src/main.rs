//! `meshpix` command-line driver.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "meshpix", version, about = "Mesh-based grayscale image codec with anisotropic RBF restoration")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Config file with one `key=value` per line.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encodes an image into a mesh file.
    Encode { image: PathBuf, mesh: PathBuf },
    /// Restores an image from a mesh file.
    Decode(DecodeArgs),
    /// Compares an original with a restored image.
    Compare {
        original: PathBuf,
        restored: PathBuf,
        /// Difference image path; defaults to `<restored>.diff.pgm`.
        #[arg(long, value_name = "FILE")]
        diff: Option<PathBuf>,
    },
    /// Encodes each image once and evaluates every method on it.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DecodeArgs {
    mesh: PathBuf,
    output: PathBuf,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel shape parameter.
    #[arg(long = "c", value_name = "C")]
    shape: Option<f64>,
    #[arg(long)]
    scale: Option<usize>,
    /// Original image for the tensor field and the vertex baseline; without
    /// it tensors come from a piecewise pre-decode of the mesh.
    #[arg(long, value_name = "IMAGE")]
    tensor_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TensorMode {
    Original,
    Predecode,
}

#[derive(Debug, Args)]
struct BenchArgs {
    images: Vec<PathBuf>,
    /// Comma-separated `method[:kernel[:c]]` cells.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, value_enum, default_value_t = TensorMode::Original)]
    tensor: TensorMode,
    /// Writes the CSV table here.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode { image, mesh } => commands::encode(&cli.config, &image, &mesh),
        Command::Decode(args) => commands::decode(&cli.config, &args),
        Command::Compare { original, restored, diff } => commands::compare(&original, &restored, diff.as_deref()),
        Command::Bench(args) => bench::run(&cli.config, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
