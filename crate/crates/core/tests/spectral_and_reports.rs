use std::f64::consts::PI;
use std::sync::Arc;

use maxreg_core::fem::{assemble, AssembledPair, CoefficientField, FeFunction, FeSpace};
use maxreg_core::harness::{run_experiment, ExperimentConfig, ExperimentKind, Verdict, CSV_HEADER};
use maxreg_core::mesh::{generate_lshape_mesh, generate_square_mesh, Mesh};
use maxreg_core::spectral::{
    family_norm_q, lowest_eigenpair, operator_norm_q, rbound_sample, resolvent_apply, self_adjoint_bound, semigroup_apply,
    EstimateOptions, Eigensystem, LinearMap, Resolvent, SectorSample,
};
use maxreg_core::Complex64;

fn pair_on(mesh: Mesh, coeff: CoefficientField) -> AssembledPair {
    let space = FeSpace::new(Arc::new(mesh), 1).unwrap();
    assemble(&space, &coeff).unwrap()
}

#[test]
fn resolvent_and_semigroup_act_on_modes_by_symbols() {
    let p = pair_on(generate_lshape_mesh(6).unwrap(), CoefficientField::anisotropic());
    let (lambda, phi) = lowest_eigenpair(&p).unwrap();
    let eig = Eigensystem::compute(&p).unwrap();
    assert!((eig.lambdas[0] - lambda).abs() <= 1e-9 * lambda);
    for z in [Complex64::new(3.0, 40.0), Complex64::from_polar(200.0, 0.8 * PI)] {
        // z (z - A_h)^{-1} phi = z / (z + lambda) phi with A_h = -M^{-1} K
        let r = resolvent_apply(&p, z, &phi).unwrap();
        let s = z / (z + lambda);
        for (a, b) in r.coeffs().iter().zip(phi.coeffs()) {
            assert!((a - s * b).norm() <= 1e-10 * s.norm(), "{a} vs {}", s * b);
        }
        let t = Complex64::new(0.01, 0.02 * z.im.signum());
        let e = semigroup_apply(&eig, t, &phi).unwrap();
        let s = (-t * lambda).exp();
        for (a, b) in e.coeffs().iter().zip(phi.coeffs()) {
            assert!((a - s * b).norm() <= 1e-9 * s.norm().max(1e-12));
        }
    }
}

#[test]
fn q2_norms_stay_below_the_sector_bound() {
    let p = pair_on(generate_square_mesh(8).unwrap(), CoefficientField::anisotropic());
    let sample = SectorSample::with_counts(0.4 * PI, 1.0, 1e4, 6).unwrap();
    for &z in &sample.points {
        let r = Resolvent::new(&p, z).unwrap();
        let est = operator_norm_q(&p, &r, 2.0, &EstimateOptions::default()).unwrap();
        assert!(est <= self_adjoint_bound(z) + 1e-8, "z={z}: {est}");
    }
}

#[test]
fn rbound_is_monotone_in_the_point_set() {
    let p = pair_on(generate_square_mesh(5).unwrap(), CoefficientField::identity());
    let space = p.space().clone();
    let n = p.num_dofs();
    let zs: Vec<Complex64> = [30.0, 300.0, 3000.0].iter().map(|&r| Complex64::from_polar(r, 0.9 * PI)).collect();
    let wave = |seed: usize| {
        let c = (0..n).map(|i| ((i * 37 + seed * 101) % 17) as f64 - 8.0).collect();
        FeFunction::new(space.clone(), c).unwrap()
    };
    let zero = FeFunction::zeros(space.clone());
    // batches of m + 1 points contain every m-point batch padded with a zero function
    let mut batches: Vec<Vec<FeFunction>> = (0..4).map(|s| vec![wave(s)]).collect();
    let mut prev = 0.0;
    for m in 1..=3 {
        if m > 1 {
            for b in batches.iter_mut() {
                b.push(zero.clone());
            }
            batches.extend((0..4).map(|s| (0..m).map(|j| wave(10 * m + s + j)).collect()));
        }
        let est = rbound_sample(&p, 3.0, &zs[..m], &EstimateOptions::default(), Some(&batches)).unwrap();
        assert_eq!((est.points, est.trials), (m, batches.len()));
        assert!(est.estimate >= prev, "m={m}: {} < {prev}", est.estimate);
        prev = est.estimate;
    }
    // one point without fixed batches is the operator norm estimate
    let opts = EstimateOptions::with_seed(4);
    let r = Resolvent::new(&p, zs[1]).unwrap();
    let single = family_norm_q(&p, &[&r as &dyn LinearMap], 3.0, &opts).unwrap();
    assert_eq!(rbound_sample(&p, 3.0, &zs[1..2], &opts, None).unwrap().estimate, single);
}

#[test]
fn reports_round_trip_through_json() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Linfty,
        base_n: 4,
        levels: 3,
        ks: vec![1, 2],
        ps: vec![f64::INFINITY],
        qs: vec![2.0, f64::INFINITY],
        reference_refinements: 1,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg).unwrap();
    let csv = report.csv_string();
    assert!(csv.starts_with(CSV_HEADER));
    assert!(csv.contains(",inf,"));
    let json: serde_json::Value = serde_json::from_str(&report.json_string().unwrap()).unwrap();
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), report.records.len());
    assert!(records.iter().any(|r| r["q"] == "inf"));
    assert_eq!(json["config"]["qs"][1], "inf");
    assert!(report.records.iter().all(|r| r.verdict != Verdict::Degenerate));
}
