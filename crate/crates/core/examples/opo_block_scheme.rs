//! The OPO as a Gaussian channel: closed-form output moments next to the
//! block scheme (input loss, gain, phase shift, squeezing, output loss).

use std::f64::consts::PI;

use opo_lab::gaussian::GaussianState;
use opo_lab::opo::OpoParams;

fn main() -> opo_lab::Result<()> {
    let alpha = 2.0;
    for d in [0.0, 0.4, 0.8] {
        let opo = OpoParams::realistic(d)?;
        let m = opo.output_moments(alpha)?;
        println!(
            "d = {d}: r = {:.5}, alpha_q~ = {:.5}, alpha_p~ = {:.5}, Sigma2_q = {:.5}, Sigma2_p = {:.5}",
            opo.squeezing(),
            m.alpha_q_tilde,
            m.alpha_p_tilde,
            m.sigma2_q,
            m.sigma2_p
        );
    }

    let opo = OpoParams::realistic(0.4)?;
    println!(
        "\n{:>8} {:>8} {:>10} {:>10} {:>12}",
        "phi_in", "gain", "shift", "phi_out", "max |diff|"
    );
    for k in 0..8 {
        let phi_in = -PI + PI * k as f64 / 4.0 + 0.1;
        let f = opo.block_factors(phi_in);
        let closed = opo.output_state(alpha, phi_in)?;
        let block = opo.apply(&GaussianState::coherent(alpha, phi_in)?)?;
        let diff = (closed.mean() - block.mean())
            .amax()
            .max((closed.cov() - block.cov()).amax());
        let out = opo.amplified_mean(alpha, phi_in);
        println!(
            "{phi_in:>8.4} {:>8.4} {:>10.5} {:>10.5} {diff:>12.2e}",
            f.gain, f.phase_shift, out.phi_out
        );
    }
    Ok(())
}
