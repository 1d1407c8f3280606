use std::f64::consts::PI;
use std::sync::Arc;

use maxreg_core::fem::{assemble, l2_project, ritz_project, AssembledPair, CoefficientField, FeFunction, FeSpace, GridTransfer};
use maxreg_core::mesh::{generate_lshape_mesh, generate_square_mesh, parse_mesh, refine_levels, write_mesh, Mesh};
use maxreg_core::norms::{h1_seminorm_error, l2_error};
use proptest::prelude::*;

fn pair_on(mesh: Mesh, degree: usize, coeff: &CoefficientField) -> AssembledPair {
    let space = FeSpace::new(Arc::new(mesh), degree).unwrap();
    assemble(&space, coeff).unwrap()
}

fn bump(p: [f64; 2]) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

fn bump_grad(p: [f64; 2]) -> [f64; 2] {
    [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()]
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[test]
fn l2_projection_rates_by_degree() {
    let id = CoefficientField::identity();
    for (degree, expected) in [(1, 2.0), (2, 3.0), (3, 4.0)] {
        let errs: Vec<f64> = [4, 8]
            .iter()
            .map(|&n| {
                let pair = pair_on(generate_square_mesh(n).unwrap(), degree, &id);
                l2_error(&l2_project(&pair, bump).unwrap(), bump)
            })
            .collect();
        let observed = order(errs[0], errs[1]);
        assert!((observed - expected).abs() < 0.25, "P{degree}: order {observed}");
    }
}

#[test]
fn ritz_projection_rates_for_p1() {
    // identity coefficient: the Ritz projection of the bump is the discrete Poisson solution
    let id = CoefficientField::identity();
    let (mut l2, mut h1) = (Vec::new(), Vec::new());
    for n in [8, 16, 32] {
        let pair = pair_on(generate_square_mesh(n).unwrap(), 1, &id);
        let r = ritz_project(&pair, bump_grad).unwrap();
        l2.push(l2_error(&r, bump));
        h1.push(h1_seminorm_error(&r, bump_grad));
    }
    assert!(order(l2[1], l2[2]) >= 1.9, "L2 order {}", order(l2[1], l2[2]));
    assert!((order(h1[1], h1[2]) - 1.0).abs() < 0.1, "H1 order {}", order(h1[1], h1[2]));
}

fn cubic(p: [f64; 2]) -> f64 {
    p[0] * (1.0 - p[0]) * p[1]
}

fn cubic_grad(p: [f64; 2]) -> [f64; 2] {
    [(1.0 - 2.0 * p[0]) * p[1], p[0] * (1.0 - p[0])]
}

fn max_gap(a: &FeFunction, b: &FeFunction) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// every integrand below is a polynomial the default rule integrates exactly
#[test]
fn transfer_commutes_with_nested_projections() {
    let id = CoefficientField::identity();
    let coarse_mesh = generate_lshape_mesh(4).unwrap();
    let (fine_mesh, ancestors) = refine_levels(&coarse_mesh, 2).unwrap();
    let coarse = pair_on(coarse_mesh, 1, &id);
    let fine = pair_on(fine_mesh, 1, &id);
    let transfer = GridTransfer::new(&coarse, &fine, &ancestors).unwrap();

    let direct = l2_project(&coarse, cubic).unwrap();
    let through = transfer.project_l2(&coarse, &l2_project(&fine, cubic).unwrap()).unwrap();
    assert!(max_gap(&direct, &through) < 1e-13, "{}", max_gap(&direct, &through));

    let direct = ritz_project(&coarse, cubic_grad).unwrap();
    let through = transfer.project_ritz(&coarse, &ritz_project(&fine, cubic_grad).unwrap()).unwrap();
    assert!(max_gap(&direct, &through) < 1e-13, "{}", max_gap(&direct, &through));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refinement_keeps_area_and_quadruples(n in 1usize..7, levels in 0usize..3) {
        let mesh = generate_square_mesh(n).unwrap();
        let (fine, parents) = refine_levels(&mesh, levels).unwrap();
        prop_assert_eq!(fine.num_triangles(), mesh.num_triangles() << (2 * levels));
        prop_assert_eq!(parents.len(), fine.num_triangles());
        prop_assert!(parents.iter().all(|&p| p < mesh.num_triangles()));
        prop_assert!((fine.total_area() - 1.0).abs() < 1e-12);
        prop_assert!(fine.validate().is_ok());
    }

    #[test]
    fn mesh_text_round_trip(n in 2usize..9) {
        let n = 2 * (n / 2);
        let mesh = generate_lshape_mesh(n).unwrap();
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).unwrap();
        let back = parse_mesh(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.vertices(), mesh.vertices());
        prop_assert_eq!(back.triangles(), mesh.triangles());
        prop_assert_eq!(back.domain(), mesh.domain());
    }
}
