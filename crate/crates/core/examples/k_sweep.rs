//! Regularized runs for increasing k compared against the physical run.

use surflow::harness::{parse_config, run_ksweep};

fn main() -> surflow::Result<()> {
    let cfg = parse_config("scenario = \"S1_drop\"\nn = 64\nreg_mode = \"mollified\"\n[solver]\nt_end = 0.005\n")?;
    let rep = run_ksweep(&cfg, &[8, 16, 32])?;
    for m in &rep.members {
        println!(
            "k={:>3}  ‖h_k − h‖ {:.3e}  ‖Γ_k − Γ‖ {:.3e}  sup|σ_k − σ| {:.3e}",
            m.k,
            m.diff_h.unwrap_or(f64::NAN),
            m.diff_gamma.unwrap_or(f64::NAN),
            m.sup_sigma_error
        );
    }
    for e in rep.ledger.entries() {
        println!("{:?} {}: {}", e.status, e.name, e.detail);
    }
    Ok(())
}
