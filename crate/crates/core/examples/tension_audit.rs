//! Audits the slowly decaying tension and both regularization ladders.
//!
//! `cargo run --release --example tension_audit`

use surflow::harness::{audit_tension, Status};
use surflow::tension::SurfaceTension;

fn main() -> surflow::Result<()> {
    let sigma = SurfaceTension::sigma_infty();
    let report = audit_tension(&sigma, 7)?;
    for e in report.ledger.entries() {
        let tag = match e.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("{tag} {}: {}", e.name, e.detail);
    }
    Ok(())
}
