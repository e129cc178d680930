//! Small reference instances shared by tests, benches and the acceptance
//! suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CcLinearProgram, SampleSet};

/// One variable, `x <= 10`, chance row `x + ξ <= 1`, γ = 0.1, single sample 0
/// on support [-1, 1]. The worst-case CVaR at `x` is `x - 1 + min(ε/γ, 1)`.
pub fn t1() -> (CcLinearProgram, SampleSet) {
    let model = CcLinearProgram {
        cost: vec![-1.0],
        a: vec![vec![1.0]],
        h: vec![10.0],
        b: vec![vec![1.0]],
        d_mat: vec![vec![1.0]],
        d: vec![1.0],
        gamma: 0.1,
        variable_lower: None,
        variable_upper: None,
    };
    let samples = SampleSet::new(vec![vec![0.0]], vec![-1.0], vec![1.0], None).expect("valid support");
    (model, samples)
}

/// A random bounded chance-constrained LP with `x = 0` robustly feasible for
/// its chance rows. Sizes: n in 1..=3, m in 1..=2, one or two chance rows and
/// one or two ordinary rows, 1..=5 samples on [-1, 1]^m. The box |x| <= 5
/// keeps every radius bounded.
pub fn random_instance(seed: u64) -> (CcLinearProgram, SampleSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=2);
    let n_cc = rng.gen_range(1..=2);
    let n_oc = rng.gen_range(1..=2);
    let n_s = rng.gen_range(1..=5);
    let row = |len: usize, rng: &mut ChaCha8Rng| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect() };

    let cost = row(n, &mut rng);
    let a: Vec<Vec<f64>> = (0..n_oc).map(|_| row(n, &mut rng)).collect();
    let h = (0..n_oc).map(|_| rng.gen_range(1.0..5.0)).collect();
    let b: Vec<Vec<f64>> = (0..n_cc).map(|_| row(n, &mut rng)).collect();
    let d_mat: Vec<Vec<f64>> = (0..n_cc).map(|_| row(m, &mut rng)).collect();
    let d = d_mat
        .iter()
        .map(|dk| dk.iter().map(|v| v.abs()).sum::<f64>() + rng.gen_range(0.2..2.0))
        .collect();
    let model = CcLinearProgram {
        cost,
        a,
        h,
        b,
        d_mat,
        d,
        gamma: rng.gen_range(0.2..0.6),
        variable_lower: Some(vec![-5.0; n]),
        variable_upper: Some(vec![5.0; n]),
    };
    let samples: Vec<Vec<f64>> = (0..n_s).map(|_| (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    let samples = SampleSet::new(samples, vec![-1.0; m], vec![1.0; m], Some(seed)).expect("samples inside the box");
    (model, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_valid_and_deterministic() {
        for seed in 0..50 {
            let (m, s) = random_instance(seed);
            assert!(m.validate().is_empty(), "{seed}: {:?}", m.validate());
            assert_eq!(s.dim(), m.m());
            assert_eq!(random_instance(seed).0, m);
        }
    }
}
