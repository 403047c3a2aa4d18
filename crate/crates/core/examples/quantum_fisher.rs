//! QFI and optimised homodyne FI of the OPO output against squeezing, and the
//! homodyne FI against the measured quadrature.

use std::f64::consts::PI;

use opo_lab::estimation::{
    energy, fi_homodyne_noiseless, fi_shot_noise_slope, optimized_quadrature, qfi_noiseless,
    qfi_shot_noise_slope, split_threshold,
};
use opo_lab::opo::{d_from_squeezing, OpoParams};

fn main() -> opo_lab::Result<()> {
    let (alpha, theta) = (1.0, 0.0);
    let base = OpoParams::realistic(0.0)?;
    println!(
        "{:>5} {:>9} {:>10} {:>10} {:>8} {:>6}",
        "r", "N", "H_nl", "F_nl", "phi_max", "branch"
    );
    for k in 0..=6 {
        let r = 0.5 * k as f64;
        let opo = base.with_d(d_from_squeezing(r))?;
        let best = optimized_quadrature(&opo, alpha, theta)?;
        println!(
            "{r:>5.2} {:>9.4} {:>10.4} {:>10.4} {:>8.4} {:>6}",
            energy(&opo, alpha)?,
            qfi_noiseless(&opo, alpha)?,
            best.fi,
            best.phi_max,
            best.branch.index()
        );
    }
    println!(
        "split threshold at alpha = 1: r = {:.6}",
        split_threshold(&base, alpha, 1e-10)?
    );

    let opo = OpoParams::realistic(0.6)?;
    println!("\nFI against phi at d = 0.6:");
    for k in 0..8 {
        let phi = PI * k as f64 / 8.0;
        println!(
            "  phi = {phi:.4}: F = {:.5}",
            fi_homodyne_noiseless(&opo, alpha, theta, phi)?
        );
    }

    let slow = OpoParams::realistic(0.0)?;
    println!(
        "\nshot-noise slopes at alpha = 0.2: H_nl/N -> {:.4}, F_nl/N -> {:.4}",
        qfi_shot_noise_slope(&slow, 0.2),
        fi_shot_noise_slope(&slow, 0.2)
    );
    Ok(())
}
