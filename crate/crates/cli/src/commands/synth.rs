//! `baire synth`: seeded synthetic catalog CSV.

use baire::redshift::write_records_csv;
use baire::synth::{generate, SynthConfig};

use crate::args::SynthArgs;
use crate::errors::AppError;

pub fn run(args: SynthArgs) -> Result<(), AppError> {
    if !args.noise.is_finite() || args.noise < 0.0 {
        return Err(AppError::validation(
            "--noise must be finite and non-negative",
        ));
    }
    if !args.z_max.is_finite() || args.z_max <= 0.0 {
        return Err(AppError::validation("--z-max must be finite and positive"));
    }
    if !args.rate.is_finite() || args.rate <= 0.0 {
        return Err(AppError::validation("--rate must be finite and positive"));
    }
    let config = SynthConfig {
        n: args.n,
        seed: args.seed,
        noise: args.noise,
        z_max: args.z_max,
        rate: args.rate,
    };
    let records = generate(&config);
    write_records_csv(&args.out, &records)?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}
