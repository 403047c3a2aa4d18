//! Two-homodyne phase estimator: propagated variances for the seed, the
//! dephased seed and the OPO output, and the two thresholds.

use std::f64::consts::FRAC_PI_8;

use opo_lab::opo::{OpoParams, REALISTIC_ETA_ESC, REALISTIC_ETA_IN};
use opo_lab::phase_measurement::IndirectPhaseResult;
use opo_lab::phase_measurement::{
    indirect_crossing, indirect_variance, threshold_d, threshold_sigma_indirect, IndirectKind,
};
use opo_lab::phase_noise::{dephase_then_opo, PhaseNoise, DEFAULT_NODES};

fn main() -> opo_lab::Result<()> {
    let d_th = threshold_d(REALISTIC_ETA_IN, REALISTIC_ETA_ESC)?;
    println!("d_th = {:.6}", d_th.value);

    let alpha = 2.0;
    let opo = OpoParams::realistic(0.4)?;
    let noise = PhaseNoise::new(FRAC_PI_8)?;
    for kind in [
        IndirectKind::Seed,
        IndirectKind::Dephased,
        IndirectKind::Opo(opo),
    ] {
        let r = indirect_variance(kind, alpha, noise)?;
        println!(
            "{kind:?}: Var_q = {:.5}, Var_p = {:.5}, variance = {:.6}",
            r.var_q, r.var_p, r.variance
        );
    }

    let mixture = IndirectPhaseResult::from_state(
        &dephase_then_opo(alpha, noise, &opo, DEFAULT_NODES)?.moments(),
    );
    println!(
        "from mixture moments: variance = {:.6}, estimate = {:.2e}",
        mixture.variance,
        mixture.estimate()
    );

    let closed = threshold_sigma_indirect(alpha, &opo)?;
    let scanned = indirect_crossing(alpha, &opo, 1.5)?;
    println!("sigma_th = {closed:.10} (closed form), {scanned:.10} (crossing)");
    Ok(())
}
