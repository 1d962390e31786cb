//! Prints σ, the truncated σ_k and the mollified σ_k side by side.

use surflow::regularize::{Mode, RegularizedTension};
use surflow::tension::SurfaceTension;

fn main() -> surflow::Result<()> {
    let base = SurfaceTension::sigma_infty();
    // The linear tension has a bounded slope, so its truncation is the
    // identity; the cubic family shows the cut.
    let cubic = SurfaceTension::cubic_decay();
    let trunc = RegularizedTension::new(cubic.clone(), 4, Mode::Truncated)?;
    let moll = RegularizedTension::new(base.clone(), 8, Mode::Mollified)?;

    println!("truncation point s_4 = {:.4}, mollifier width = {:.2e}", trunc.s_k(), moll.epsilon());
    println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}", "s", "sigma", "cubic", "trunc_k=4", "tau_k=4", "moll_k=8", "moll'_k=8");
    for s in [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
        println!(
            "{s:>8.2} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            base.sigma_eval(s)?,
            cubic.sigma_eval(s)?,
            trunc.sigma_k(s)?,
            trunc.tau_k(s)?,
            moll.sigma_k(s)?,
            moll.sigma_k_prime(s),
        );
    }
    Ok(())
}
