//! Solve the 8×8 second-difference Toeplitz system with the circulant
//! preconditioner pipeline at three phase precisions and print the
//! fidelity against the dense solve.

use circulant_sve::matcore::ToeplitzSpec;
use circulant_sve::qsim::SveConfig;
use circulant_sve::solver::{preconditioned_solve, SolveReport};
use num_complex::Complex64 as C64;

fn main() {
    let n = 8;
    let t = ToeplitzSpec::tridiagonal(
        n,
        C64::new(-1.0, 0.0),
        C64::new(2.0, 0.0),
        C64::new(-1.0, 0.0),
    )
    .unwrap();
    let a = t.materialize().unwrap();
    let mut b = vec![C64::new(0.0, 0.0); n];
    b[0] = C64::new(1.0, 0.0);

    for bits in [6, 8, 10] {
        let cfg = SveConfig::with_phase_bits(bits);
        let outcome = preconditioned_solve(&a, &b, &cfg, 0.01).unwrap();
        let report = SolveReport::from_outcome(&outcome, bits, cfg.seed);
        println!("{}", report.summary_line());
    }
}
