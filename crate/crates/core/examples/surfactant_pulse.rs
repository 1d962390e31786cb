//! A Gaussian surfactant pulse on a flat film, stepped with both schemes.

use surflow::harness::{parse_config, run_single};

fn main() -> surflow::Result<()> {
    for scheme in ["full_implicit", "semi_implicit"] {
        let cfg = parse_config(&format!(
            "scenario = \"S2_surfactant_pulse\"\nn = 128\n[solver]\nscheme = \"{scheme}\"\nt_end = 0.01\n"
        ))?;
        let res = run_single(&cfg)?;
        let last = res.records.last().unwrap();
        println!(
            "{scheme:>14}: {} steps, max Γ {:.4}, min h {:.5}, energy {:.6e}, audits pass: {}",
            res.steps,
            res.final_state().gamma.max(),
            last.min_h,
            last.energy,
            res.ledger.all_pass()
        );
    }
    Ok(())
}
