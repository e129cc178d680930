//! The shipped systems against a deterministic DC-OPF written out directly
//! from the system data.

use std::path::PathBuf;

use dro_core::dcopf::{generate_samples, load_system, to_cc_lp};
use dro_core::forward::{assemble, solve_forward};
use dro_core::solver::{solve_lp, StandardLp};
use dro_core::{Error, PowerSystem, SampleSet};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// min cᵀx s.t. 1ᵀx = 1ᵀe, x + r <= x_max, x + r >= x_min, 1ᵀr >= R,
/// |Φ(Sx - e)| <= f_max, x, r >= 0.
fn deterministic_opf(sys: &PowerSystem) -> f64 {
    let g = sys.n_gen;
    let mut obj = sys.cost.clone();
    obj.extend(vec![0.0; g]);
    let mut lp = StandardLp::new(obj);
    lp.bounds = vec![(0.0, f64::INFINITY); 2 * g];
    lp.add_eq(&(0..g).map(|k| (k, 1.0)).collect::<Vec<_>>(), sys.net_load.iter().sum());
    for k in 0..g {
        lp.add_ineq(&[(k, 1.0), (g + k, 1.0)], sys.x_max[k]);
        lp.add_ineq(&[(k, -1.0), (g + k, -1.0)], -sys.x_min[k]);
    }
    lp.add_ineq(&(g..2 * g).map(|k| (k, -1.0)).collect::<Vec<_>>(), -sys.reserve_fraction * sys.net_load.iter().sum::<f64>());
    for (l, row) in sys.ptdf.iter().enumerate() {
        let load_flow: f64 = row.iter().zip(&sys.net_load).map(|(a, e)| a * e).sum();
        let coef: Vec<(usize, f64)> = (0..g).map(|k| (k, row[sys.gen_bus[k]])).collect();
        lp.add_ineq(&coef, sys.f_max[l] + load_flow);
        let neg: Vec<(usize, f64)> = coef.iter().map(|&(k, v)| (k, -v)).collect();
        lp.add_ineq(&neg, sys.f_max[l] - load_flow);
    }
    let sol = solve_lp(&lp).unwrap();
    assert!(sol.is_optimal(), "{:?}", sol.status);
    sol.objective_value
}

fn zero_sample(sys: &PowerSystem) -> SampleSet {
    let half: Vec<f64> = sys.f_max.iter().map(|f| 0.1 * f).collect();
    SampleSet::new(vec![vec![0.0; sys.n_line]], half.iter().map(|h| -h).collect(), half, None).unwrap()
}

#[test]
fn zero_radius_single_zero_sample_is_the_deterministic_opf() {
    for name in ["ieee5.json", "synth11.json"] {
        let sys = load_system(&data(name)).unwrap();
        let (model, _) = to_cc_lp(&sys).unwrap();
        let f = solve_forward(&assemble(&model, &zero_sample(&sys), 0.0).unwrap()).unwrap();
        let want = deterministic_opf(&sys);
        assert!((f.objective - want).abs() <= 1e-6 * want.abs().max(1.0), "{name}: {} vs {want}", f.objective);
    }
}

#[test]
fn shipped_systems_have_the_documented_shape() {
    let five = load_system(&data("ieee5.json")).unwrap();
    assert_eq!((five.n_bus, five.n_line, five.n_gen), (5, 6, 5));
    let eleven = load_system(&data("synth11.json")).unwrap();
    assert_eq!((eleven.n_bus, eleven.n_line, eleven.n_gen), (11, 13, 30));
    let (model, _) = to_cc_lp(&five).unwrap();
    assert_eq!(model.n_cc(), 2 * five.n_line);
    assert_eq!(model.m(), five.n_line);
}

#[test]
fn balance_and_reserve_hold_at_the_robust_optimum() {
    let sys = load_system(&data("ieee5.json")).unwrap();
    let (model, legend) = to_cc_lp(&sys).unwrap();
    let samples = generate_samples(&sys, 30, 7).unwrap();
    for eps in [0.0, 0.05, 0.2] {
        let f = solve_forward(&assemble(&model, &samples, eps).unwrap()).unwrap();
        let gen: f64 = (0..sys.n_gen).map(|k| f.x[legend.dispatch(k)]).sum();
        let res: f64 = (0..sys.n_gen).map(|k| f.x[legend.reserve(k)]).sum();
        assert!((gen - sys.total_load()).abs() <= 1e-6, "{gen}");
        assert!(res >= sys.reserve_requirement() - 1e-6);
        assert!(f.x.iter().all(|&v| v >= -1e-9));
    }
}

#[test]
fn looser_lines_never_cost_more() {
    let sys = load_system(&data("ieee5.json")).unwrap();
    let samples = generate_samples(&sys, 20, 3).unwrap();
    let mut last = f64::INFINITY;
    for k in [0.9, 1.0, 1.1, 1.5, 3.0] {
        let scaled = sys.with_scaled_limits(k);
        let det = deterministic_opf(&scaled);
        let (model, _) = to_cc_lp(&scaled).unwrap();
        // bounds follow f_max, so regenerate with the same seed
        let s = generate_samples(&scaled, samples.len(), 3).unwrap();
        let f = solve_forward(&assemble(&model, &s, 0.01).unwrap()).unwrap();
        assert!(f.objective <= last + 1e-6, "{k}: {} after {last}", f.objective);
        assert!(det <= f.objective + 1e-6);
        last = f.objective;
    }
}

#[test]
fn layout_counts_follow_the_closed_form() {
    let sys = load_system(&data("ieee5.json")).unwrap();
    let (model, _) = to_cc_lp(&sys).unwrap();
    let samples = generate_samples(&sys, 100, 42).unwrap();
    let inst = assemble(&model, &samples, 0.01).unwrap();
    let (n, m, ns, ncc) = (2 * sys.n_gen, sys.n_line, 100, 2 * sys.n_line);
    // dispatch/reserve lower bounds are folded into ordinary rows
    let n_oc = 2 + 2 * sys.n_gen + 1 + n;
    let lp = inst.to_standard_lp();
    assert_eq!(lp.num_vars(), n + 1 + m + ns * m);
    assert_eq!(lp.ineq_rhs.len(), n_oc + 1 + 3 * ns * (ncc + 1) * m + m);
}

#[test]
fn truncated_system_file_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.json");
    let text = std::fs::read_to_string(data("ieee5.json")).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_system(&path), Err(Error::Schema { .. })));
}
