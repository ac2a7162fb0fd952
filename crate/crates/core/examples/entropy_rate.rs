//! Mean entropy series and the entropy rate of augmented Galton-Watson trees.

use ergolab::generators::augmented_gw_ensemble;
use ergolab::stats::{entropy_rate, estimate_h_series};

fn main() -> ergolab::error::Result<()> {
    let e = augmented_gw_ensemble(&[0.0, 0.5, 0.5], 10_000)?;
    let series = estimate_h_series(&e, 12, 500, 1)?;
    for n in 1..series.mean.len() {
        let d = series.increment(n - 1);
        println!("n = {n:>2}: h_n = {:.4} ± {:.4}, h_n - h_(n-1) = {:.4}", series.mean[n], series.se[n], d.value);
    }
    let rate = entropy_rate(&series)?;
    println!("h ≈ {:.4} ± {:.4} (upper {:.4}), increments monotone: {}", rate.value, rate.se, rate.upper, rate.monotone);
    Ok(())
}
