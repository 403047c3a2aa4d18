//! Threshold amplitude and noise level of the direct phase measurement.

use opo_lab::opo::OpoParams;
use opo_lab::phase_measurement::{
    gamma_dephased, gamma_out, threshold_alpha, threshold_sigma_direct, HwhmSettings,
};
use opo_lab::phase_noise::PhaseNoise;

fn main() -> opo_lab::Result<()> {
    let s = HwhmSettings::default();
    for d in [0.2, 0.4, 0.6] {
        let opo = OpoParams::realistic(d)?;
        let t = threshold_alpha(&opo, (0.1, 5.0), &s)?;
        println!(
            "d = {d}: alpha_th = {:.4} (bracket {:.3}..{:.3})",
            t.value, t.bracket.0, t.bracket.1
        );
    }

    let opo = OpoParams::realistic(0.4)?;
    for alpha in [1.0, 3.0] {
        match threshold_sigma_direct(&opo, alpha, (0.0, 1.5), &s) {
            Ok(t) => println!("alpha = {alpha}: sigma_th = {:.4}", t.value),
            Err(e) => println!("alpha = {alpha}: no crossing ({e})"),
        }
        for sigma in [0.0, 0.3, 0.6, 0.9] {
            let noise = PhaseNoise::new(sigma)?;
            println!(
                "   sigma = {sigma}: Gamma_D = {:.4}, Gamma_out = {:.4}",
                gamma_dephased(alpha, noise, &s)?,
                gamma_out(alpha, noise, &opo, &s)?
            );
        }
    }
    Ok(())
}
