//! Heterodyne phase densities of the seed, the dephased seed and the OPO
//! output, with their half widths.

use std::f64::consts::FRAC_PI_4;

use opo_lab::opo::OpoParams;
use opo_lab::phase_measurement::{phase_density, DEFAULT_GRID};
use opo_lab::phase_noise::{dephase, dephase_then_opo, PhaseNoise, DEFAULT_NODES};

fn main() -> opo_lab::Result<()> {
    let alpha = 2.0;
    let noise = PhaseNoise::new(FRAC_PI_4)?;
    let opo = OpoParams::realistic(0.4)?;

    let states = [
        ("seed", dephase(alpha, PhaseNoise::none(), 1)?),
        ("dephased", dephase(alpha, noise, DEFAULT_NODES)?),
        (
            "opo output",
            dephase_then_opo(alpha, noise, &opo, DEFAULT_NODES)?,
        ),
    ];
    for (name, mix) in &states {
        let dist = phase_density(mix, DEFAULT_GRID)?;
        let maxima: Vec<String> = dist
            .local_maxima()
            .iter()
            .map(|m| format!("{m:.3}"))
            .collect();
        println!(
            "{name:>10}: p(0) = {:.4}, p(pi) = {:.4}, HWHM = {}, maxima at [{}], norm error {:.1e}",
            dist.density_at(0.0),
            dist.density_at(std::f64::consts::PI),
            dist.hwhm.map_or("none".into(), |g| format!("{g:.4}")),
            maxima.join(", "),
            dist.norm_error
        );
    }
    Ok(())
}
