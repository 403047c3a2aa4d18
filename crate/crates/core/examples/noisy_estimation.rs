//! Homodyne estimation with a dephased seed: F_n against the noiseless
//! optimum F_nl and the dephasing bound as the pump ratio grows.

use std::f64::consts::FRAC_PI_8;

use opo_lab::estimation::{
    fi_homodyne_noisy, fi_homodyne_noisy_fd, noisy_report, optimized_quadrature, FD_STEP,
};
use opo_lab::opo::OpoParams;
use opo_lab::phase_noise::{dephase_then_opo, PhaseNoise, DEFAULT_NODES};

fn main() -> opo_lab::Result<()> {
    let (alpha, theta) = (0.2, 0.0);
    let noise = PhaseNoise::new(FRAC_PI_8)?;
    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>10} {:>8}",
        "d", "N", "F_n", "F_nl", "epsilon", "H_UB"
    );
    for k in 0..=6 {
        let d = 0.65 + 0.05 * k as f64;
        let opo = OpoParams::realistic(d)?;
        let r = noisy_report(&opo, alpha, theta, noise, DEFAULT_NODES)?;
        let eps = r.epsilon.expect("noisy report");
        let f_nl = optimized_quadrature(&opo, alpha, theta)?.fi;
        println!(
            "{d:>6.2} {:>10.4} {:>12.5} {:>12.5} {:>10.3e} {:>8.4}",
            r.energy,
            r.fi,
            f_nl,
            eps,
            r.bound.unwrap_or(f64::NAN)
        );
    }

    let opo = OpoParams::realistic(0.9)?;
    let probe = dephase_then_opo(alpha, noise, &opo, DEFAULT_NODES)?;
    let phi = noisy_report(&opo, alpha, theta, noise, DEFAULT_NODES)?.phi_max;
    let analytic = fi_homodyne_noisy(&probe, theta, phi)?;
    let fd = fi_homodyne_noisy_fd(&probe, theta, phi, FD_STEP)?;
    println!("\nd = 0.9: analytic F_n = {analytic:.8}, finite difference = {fd:.8}");
    Ok(())
}
