//! Observed spatial order on the manufactured solution.

use surflow::harness::{parse_config, run_mms_order_study};

fn main() -> surflow::Result<()> {
    let cfg = parse_config("scenario = \"MMS\"\n[solver]\nt_end = 0.01\nnewton_tol = 1e-8\n")?;
    let rep = run_mms_order_study(&cfg, &[32, 64, 128, 256], 0.5)?;
    println!("{:>5} {:>10} {:>7} {:>12} {:>12}", "n", "dt", "steps", "err h", "err Γ");
    for l in &rep.levels {
        println!("{:>5} {:>10.3e} {:>7} {:>12.4e} {:>12.4e}", l.n, l.dt, l.steps, l.error_h, l.error_gamma);
    }
    println!("observed orders {:?}", rep.orders);
    Ok(())
}
