//! Relaxes the cosine drop and writes series, snapshots and the ledger.
//!
//! `cargo run --release --example drop_relaxation -- [output dir]`

use surflow::harness::{parse_config, run_single, write_outputs};

fn main() -> surflow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "out/drop_relaxation".into());
    let cfg = parse_config(
        r#"
scenario = "S1_drop"
n = 128
seed = 1

[solver]
D = 0.1
t_end = 0.01
"#,
    )?;
    let res = run_single(&cfg)?;
    println!("{} steps ({} rejected), t = {}", res.steps, res.rejected, res.final_time);
    let (first, last) = (&res.records[0], res.records.last().unwrap());
    println!("energy {:.6e} -> {:.6e}", first.energy, last.energy);
    println!("min h {:.4}, min Γ {:.4}", last.min_h, last.min_gamma);
    for e in res.ledger.entries() {
        println!("{:?} {}", e.status, e.name);
    }
    for f in write_outputs(&res, std::path::Path::new(&dir))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
