//! Essential spectrum of the asymptotic operator for the two model
//! backgrounds: the KM plateau and a decaying CQ-CGL pulse.
//!
//! `cargo run --release --example essential_spectrum`

use breather_floquet::analytic::{asymptotic_data, ess_spectrum_curve, km_spectrum_summary, Background};
use breather_floquet::model::{fnlse_params, Parameters};

fn main() -> breather_floquet::Result<()> {
    let km = fnlse_params(1.0)?;
    let curve = ess_spectrum_curve(&km, &asymptotic_data(&km, Background::Km { nu0: 1.0 }).m_inf, (-10.0, 10.0), 2001)?;
    let summary = km_spectrum_summary(&curve, 1.0);
    println!("KM: real segment half-width {:.6}, matches [-nu0^2, nu0^2]: {}", summary.real_half_width, summary.matches_amplitude_interval);

    let cgl = Parameters::cq_cgl(1.0, 0.125, -0.1, 1.0, 0.5, -0.1, -0.1);
    let curve = ess_spectrum_curve(&cgl, &asymptotic_data(&cgl, Background::Decaying).m_inf, (-4.0, 4.0), 9)?;
    for s in &curve.samples {
        println!("mu = {:+.2} {:>6}: lambda = {:.4} {:+.4}i", s.mu, s.branch.as_str(), s.lambda.re, s.lambda.im);
    }
    Ok(())
}
