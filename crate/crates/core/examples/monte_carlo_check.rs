//! Sampling oracle: heterodyne and homodyne draws against the analytic
//! densities, and the batch phase estimator against its closed form.

use std::f64::consts::FRAC_PI_4;

use opo_lab::cli::{batch_estimator_error, heterodyne_deviation, homodyne_ks, RunConfig};
use opo_lab::mc_oracle::{sample_homodyne, sample_moments, write_record, SampleConfig};
use opo_lab::opo::OpoParams;
use opo_lab::phase_noise::{dephase, dephase_then_opo, PhaseNoise, DEFAULT_NODES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig {
        samples: 200_000,
        ..RunConfig::default()
    };
    let noise = PhaseNoise::new(FRAC_PI_4)?;
    let opo = OpoParams::realistic(0.4)?;
    let dephased = dephase(2.0, noise, DEFAULT_NODES)?;
    let out = dephase_then_opo(2.0, noise, &opo, DEFAULT_NODES)?;

    println!(
        "heterodyne max-bin deviation, dephased: {:.2e}",
        heterodyne_deviation(&dephased, &cfg)?
    );
    println!(
        "heterodyne max-bin deviation, OPO:      {:.2e}",
        heterodyne_deviation(&out, &cfg)?
    );
    println!(
        "homodyne KS p-value, OPO p quadrature:  {:.3}",
        homodyne_ks(&out, 0.0, FRAC_PI_4 * 2.0, &cfg)?
    );
    println!(
        "batch estimator relative error:         {:.3}",
        batch_estimator_error(&cfg)?
    );

    let x = sample_homodyne(
        &dephased,
        0.0,
        0.0,
        &SampleConfig::new(5, cfg.seed, cfg.bins)?,
    )?;
    let m = sample_moments(&x);
    println!("\nfirst homodyne records (mean {:.3}):", m.mean);
    write_record(std::io::stdout().lock(), "value", &x)?;
    Ok(())
}
