use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Write the ordinates of the first zeros of ζ on the critical line.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Number of zeros.
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    /// Output file.
    #[arg(long, default_value = "data/zeros_1e5.txt")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match zerotable_gen::find_zeros(args.count).and_then(|z| {
        zerotable_gen::write_table(&args.out, &z)?;
        Ok(z)
    }) {
        Ok(z) => {
            println!("wrote {} zeros up to {:.6} to {}", z.len(), z.last().copied().unwrap_or(0.0), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
