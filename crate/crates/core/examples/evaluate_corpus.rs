//! Scores the cascade on the built-in synthetic corpora.
//!
//! ```text
//! cargo run --release --example evaluate_corpus [jobs]
//! ```

use std::time::Instant;

use crackwidth::eval::{build_corpus, complex_specs, straight_strip_specs};
use crackwidth::{evaluate, CascadeConfig};

fn main() -> crackwidth::Result<()> {
    let jobs = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cfg = CascadeConfig::default();

    for (name, specs) in [
        ("straight", straight_strip_specs()),
        ("complex", complex_specs()),
    ] {
        let corpus = build_corpus(&specs)?;
        let start = Instant::now();
        let report = evaluate(&corpus, &cfg, jobs)?;
        let sound = report
            .per_point
            .iter()
            .filter(|p| p.measurement.routing_is_sound(cfg.gamma_deg))
            .count();
        println!(
            "{name:>8}: {} points in {:.1}s  mae {:.3}  mse {:.3}  within±1 {:.1}%  pca {}  rpca {}  sound {}/{}  errors {}",
            report.n_points,
            start.elapsed().as_secs_f64(),
            report.mae,
            report.mse,
            100.0 * report.fraction_within(1.0),
            report.pca_count,
            report.rpca_count,
            sound,
            report.n_points,
            report.errors.len(),
        );
        for e in &report.errors {
            println!(
                "          mask {} ({},{}): {}",
                e.mask_index, e.check_point.x, e.check_point.y, e.error
            );
        }
    }
    Ok(())
}
