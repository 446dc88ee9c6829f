//! How the penalty strength collapses weakly supported transitions.
//!
//!     cargo run --example penalized_mstep

use readhmm::model::{m_step_transitions, row_objective};

fn main() {
    let gamma = 1e-4;
    let rows = [[140.0, 2.0, 1.0, 0.0], [60.0, 55.0, 0.5, 0.0], [3.0, 2.0, 0.0, 0.0]];
    for c in rows {
        println!("expected counts {c:?}");
        for lambda in [0.0, 10.0, 50.0, 250.0] {
            let p = m_step_transitions(&c, lambda, gamma);
            println!(
                "  lambda {lambda:>5}: p = [{:.3e}, {:.3e}, {:.3e}, {:.3e}]  objective {:.4}",
                p[0],
                p[1],
                p[2],
                p[3],
                row_objective(&p, &c, lambda, gamma)
            );
        }
    }
}
