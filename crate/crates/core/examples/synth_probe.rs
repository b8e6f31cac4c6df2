//! Exercise the controllability synthesizer on a few targets and report
//! arc counts, residuals and timing.

use num_complex::Complex64;
use sl2cover::{synthesize_controls, GroupPoint, StructureParams};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mu: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let p = StructureParams::from_mu(1.0, mu).unwrap();
    let targets = [
        GroupPoint::new(1.0, Complex64::new(0.0, 0.0)),
        GroupPoint::new(-1.0, Complex64::new(0.0, 0.0)),
        GroupPoint::new(-3.0, Complex64::new(2.0, 1.0)),
        GroupPoint::new(5.0, Complex64::new(-1.0, 4.0)),
    ];
    for target in targets {
        let t0 = std::time::Instant::now();
        match synthesize_controls(&target, &p, 1e-6) {
            Ok(prog) => {
                let end = prog.simulate();
                println!(
                    "target ({:+.2}, {:+.2}{:+.2}i): OK  {} arcs, residual {:.2e}, {:?}",
                    target.c,
                    target.w.re,
                    target.w.im,
                    prog.arcs.len(),
                    end.sup_dist(&target),
                    t0.elapsed()
                );
            }
            Err(e) => {
                println!(
                    "target ({:+.2}, {:+.2}{:+.2}i): FAIL after {} arcs: {} ({:?})",
                    target.c,
                    target.w.re,
                    target.w.im,
                    e.partial.arcs.len(),
                    e.reason,
                    t0.elapsed()
                );
            }
        }
    }
}
