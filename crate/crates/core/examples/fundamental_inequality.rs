//! s²/2 ≤ h ≤ v·s on a few ensembles, with the Liouville verdict.

use ergolab::generators::{augmented_gw_ensemble, Ensemble, FixedEnsemble};
use ergolab::stats::{fundamental_inequality_report, InequalityConfig};

fn main() -> ergolab::error::Result<()> {
    let cfg = InequalityConfig { entropy_n_max: 16, growth_n_max: 16, samples: 300, ..Default::default() };
    let ensembles: Vec<Box<dyn Ensemble>> = vec![
        Box::new(FixedEnsemble::lattice(2)?),
        Box::new(FixedEnsemble::grandfather()),
        Box::new(augmented_gw_ensemble(&[0.0, 0.5, 0.5], 10_000)?),
    ];
    for e in &ensembles {
        println!("{}", fundamental_inequality_report(e.as_ref(), &cfg)?.render());
    }
    Ok(())
}
