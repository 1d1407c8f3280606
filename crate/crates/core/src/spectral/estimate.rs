//! Lower-bound estimators for `L^q` operator norms and square-function
//! (R-bound) ratios of linear maps on a finite element space.
//!
//! For `1 < q < inf` a family `x = (x_1..x_m)` is pushed through the nonlinear
//! power iteration
//!
//! ```text
//! y_j = T_j x_j,  eta_j = S(y)^{q-2} y_j,  zeta_j = T_j^* P_h eta_j,  x_j <- P_h(S(zeta)^{q'-2} zeta_j)
//! ```
//!
//! with `S(w) = (sum_j |w_j|^2)^{1/2}` formed at quadrature points. Every
//! iterate's ratio `||S(Tx)||_q / ||S(x)||_q` is a valid lower bound and the
//! maximum over all iterates is reported. For `q = 2` the ratio is a Rayleigh
//! quotient of `T^* T` and Lanczos with full reorthogonalization is used.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::resolvent::{LinearMap, Resolvent};
use crate::fem::{AssembledPair, FeFunction, FeSpace};
use crate::norms::weighted_lq;
use crate::{par, Error, Result, Scalar};

pub const DEFAULT_RESTARTS: usize = 5;
pub const DEFAULT_ITERS: usize = 50;
pub const DEFAULT_RBOUND_TRIALS: usize = 200;
const MAX_LANCZOS: usize = 500;
const EXPLICIT_SUP_LIMIT: usize = 4000;

/// Knobs shared by every estimator. `trials` random batches are drawn from
/// `seed`; the best `restarts` of them seed the power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub restarts: usize,
    pub iters: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            restarts: DEFAULT_RESTARTS,
            iters: DEFAULT_ITERS,
            trials: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

impl EstimateOptions {
    pub fn with_seed(seed: u64) -> Self {
        EstimateOptions { seed, ..Self::default() }
    }

    pub fn rbound(seed: u64) -> Self {
        EstimateOptions {
            trials: DEFAULT_RBOUND_TRIALS,
            seed,
            ..Self::default()
        }
    }
}

/// A batch `(v_1..v_m)` of coefficient vectors, one per map.
pub type Batch = Vec<Vec<Complex64>>;

fn quad_values(space: &FeSpace, x: &[Complex64]) -> Vec<Complex64> {
    space.values_at_quad(&space.full_from_dofs(x))
}

fn square_function(values: &[Vec<Complex64>]) -> Vec<f64> {
    let n = values[0].len();
    let mut s = vec![0.0; n];
    for v in values {
        for (a, x) in s.iter_mut().zip(v) {
            *a += x.norm_sqr();
        }
    }
    s.iter_mut().for_each(|x| *x = x.sqrt());
    s
}

fn family_lq(space: &FeSpace, weights: &[f64], x: &[Vec<Complex64>], q: f64) -> f64 {
    let vals: Vec<Vec<Complex64>> = x.iter().map(|xj| quad_values(space, xj)).collect();
    weighted_lq(&square_function(&vals), weights, q)
}

/// `||S(T x)||_q / ||S(x)||_q` for one batch.
pub fn square_function_ratio(ops: &[&dyn LinearMap], batch: &[Vec<Complex64>], q: f64) -> f64 {
    assert_eq!(ops.len(), batch.len());
    let space = ops[0].space();
    let w = space.quad_weights();
    let y: Batch = ops.iter().zip(batch).map(|(t, x)| t.apply(x)).collect();
    let den = family_lq(space, &w, batch, q);
    if den == 0.0 {
        return 0.0;
    }
    family_lq(space, &w, &y, q) / den
}

fn random_batch(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Batch {
    (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    Complex64::new(x, 0.0)
                })
                .collect()
        })
        .collect()
}

fn check_family(pair: &AssembledPair, ops: &[&dyn LinearMap]) -> Result<()> {
    if ops.is_empty() {
        return Err(Error::invalid("empty operator family"));
    }
    if ops.iter().any(|t| !std::sync::Arc::ptr_eq(t.space(), pair.space())) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

fn power_iterate(pair: &AssembledPair, ops: &[&dyn LinearMap], q: f64, start: Batch, iters: usize) -> Result<f64> {
    let space = pair.space();
    let w = space.quad_weights();
    let qd = q / (q - 1.0);
    let mut x = start;
    let mut best = 0.0f64;
    let mut prev = 0.0f64;
    for it in 0..=iters {
        let xq: Vec<Vec<Complex64>> = x.iter().map(|xj| quad_values(space, xj)).collect();
        let den = weighted_lq(&square_function(&xq), &w, q);
        if den == 0.0 {
            break;
        }
        let y: Batch = ops.iter().zip(&x).map(|(t, xj)| t.apply(xj)).collect();
        let yq: Vec<Vec<Complex64>> = y.iter().map(|yj| quad_values(space, yj)).collect();
        let sy = square_function(&yq);
        let ratio = weighted_lq(&sy, &w, q) / den;
        best = best.max(ratio);
        if it == iters || (it > 0 && (ratio - prev).abs() <= 1e-14 * ratio) {
            break;
        }
        prev = ratio;
        let mut zeta = Vec::with_capacity(ops.len());
        for (t, yj) in ops.iter().zip(&yq) {
            let eta: Vec<Complex64> = yj
                .iter()
                .zip(&sy)
                .map(|(v, &s)| if s > 0.0 { v * s.powf(q - 2.0) } else { Complex64::new(0.0, 0.0) })
                .collect();
            let p = pair.mass_solve(&space.load_from_quad(&eta))?;
            zeta.push(t.apply_adjoint(&p));
        }
        let zq: Vec<Vec<Complex64>> = zeta.iter().map(|zj| quad_values(space, zj)).collect();
        let sz = square_function(&zq);
        let mut next = Vec::with_capacity(ops.len());
        for zj in &zq {
            let dual: Vec<Complex64> = zj
                .iter()
                .zip(&sz)
                .map(|(v, &s)| if s > 0.0 { v * s.powf(qd - 2.0) } else { Complex64::new(0.0, 0.0) })
                .collect();
            next.push(pair.mass_solve(&space.load_from_quad(&dual))?);
        }
        let scale = family_lq(space, &w, &next, q);
        if !(scale > 0.0) || !scale.is_finite() {
            break;
        }
        x = next.into_iter().map(|v| v.into_iter().map(|c| c / scale).collect()).collect();
    }
    Ok(best)
}

/// Top eigenvalue of `T^* T` (block diagonal over the family) by Lanczos in
/// the `M` inner product; returns its square root.
fn lanczos_norm(pair: &AssembledPair, ops: &[&dyn LinearMap], start: Batch) -> f64 {
    let mass = pair.mass();
    let inner = |a: &Batch, b: &Batch| -> Complex64 {
        a.iter()
            .zip(b)
            .map(|(aj, bj)| mass.mul_vec(aj).iter().zip(bj).map(|(x, y)| x * y.conj()).sum::<Complex64>())
            .sum()
    };
    let scale_batch = |a: &Batch, c: Complex64| -> Batch { a.iter().map(|v| v.iter().map(|x| x * c).collect()).collect() };
    let axpy_batch = |y: &mut Batch, c: Complex64, x: &Batch| {
        for (yj, xj) in y.iter_mut().zip(x) {
            for (a, b) in yj.iter_mut().zip(xj) {
                *a += c * b;
            }
        }
    };
    let dim: usize = start.iter().map(Vec::len).sum();
    let max_steps = dim.min(MAX_LANCZOS);
    let n0 = inner(&start, &start).re.sqrt();
    if n0 == 0.0 {
        return 0.0;
    }
    let mut basis: Vec<Batch> = vec![scale_batch(&start, Complex64::new(1.0 / n0, 0.0))];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..max_steps {
        let v = &basis[j];
        let mut w: Batch = ops.iter().zip(v).map(|(t, vj)| t.apply_adjoint(&t.apply(vj))).collect();
        let a = inner(&w, v).re;
        alpha.push(a);
        axpy_batch(&mut w, Complex64::new(-a, 0.0), v);
        if j > 0 {
            axpy_batch(&mut w, Complex64::new(-beta[j - 1], 0.0), &basis[j - 1]);
        }
        for _ in 0..2 {
            for b in &basis {
                let c = inner(&w, b);
                axpy_batch(&mut w, -c, b);
            }
        }
        let b = inner(&w, &w).re.max(0.0).sqrt();
        let k = alpha.len();
        let check = k < 30 || k % 5 == 0 || j + 1 == max_steps;
        let mut converged = false;
        if check {
            let mut t = DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alpha[i];
                if i + 1 < k {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (top, idx) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((f64::NEG_INFINITY, 0), |acc, (i, &l)| if l > acc.0 { (l, i) } else { acc });
            theta = top;
            let last = eig.eigenvectors[(k - 1, idx)].abs();
            converged = b * last <= 1e-13 * top.abs().max(f64::MIN_POSITIVE);
        }
        if converged || b <= 1e-14 * theta.abs().max(a.abs()) || j + 1 == max_steps {
            break;
        }
        beta.push(b);
        basis.push(scale_batch(&w, Complex64::new(1.0 / b, 0.0)));
    }
    theta.max(0.0).sqrt()
}

/// Exact `L^inf` norm of a map on a P1 space: the maximal absolute row sum of
/// its nodal matrix (a P1 function attains its modulus maximum at a vertex).
fn explicit_sup_norm(op: &dyn LinearMap) -> Result<f64> {
    let space = op.space();
    if space.degree() != 1 {
        return Err(Error::invalid("q = inf operator norms are exact only for P1 spaces"));
    }
    let n = space.num_dofs();
    if n > EXPLICIT_SUP_LIMIT {
        return Err(Error::invalid(format!(
            "q = inf operator norm materializes the operator; limited to {EXPLICIT_SUP_LIMIT} dofs"
        )));
    }
    let cols = par::map_range(n, |i| {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[i] = Complex64::new(1.0, 0.0);
        op.apply(&e)
    });
    let mut rows = vec![0.0; n];
    for col in &cols {
        for (r, v) in rows.iter_mut().zip(col) {
            *r += v.norm();
        }
    }
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Estimate `sup ||S(T x)||_q / ||S(x)||_q` over batches for the family `ops`.
///
/// Always a lower bound. With one map this is the `L^q` operator norm.
pub fn family_norm_q(pair: &AssembledPair, ops: &[&dyn LinearMap], q: f64, opts: &EstimateOptions) -> Result<f64> {
    check_family(pair, ops)?;
    let n = pair.num_dofs();
    if n == 0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        if ops.len() != 1 {
            return Err(Error::invalid("q = inf square-function ratios are not supported"));
        }
        return explicit_sup_norm(ops[0]);
    }
    if !(q > 1.0) {
        return Err(Error::invalid(format!("operator norm estimates need 1 < q <= inf, got {q}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let trials = opts.trials.max(opts.restarts).max(1);
    let batches: Vec<Batch> = (0..trials).map(|_| random_batch(&mut rng, ops.len(), n)).collect();
    if q == 2.0 {
        return Ok(lanczos_norm(pair, ops, batches.into_iter().next().expect("one batch")));
    }
    let ratios = par::map_slice(&batches, |b| square_function_ratio(ops, b, q));
    let mut order: Vec<usize> = (0..trials).collect();
    order.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    let starts: Vec<Batch> = order.iter().take(opts.restarts.max(1)).map(|&i| batches[i].clone()).collect();
    let refined = par::map_slice(&starts, |s| power_iterate(pair, ops, q, s.clone(), opts.iters));
    let mut best = ratios.iter().copied().fold(0.0, f64::max);
    for r in refined {
        best = best.max(r?);
    }
    Ok(best)
}

/// Lower bound for `||T||_{L^q -> L^q}`.
pub fn operator_norm_q(pair: &AssembledPair, op: &dyn LinearMap, q: f64, opts: &EstimateOptions) -> Result<f64> {
    family_norm_q(pair, &[op], q, opts)
}

/// Sampled R-bound of `{z_j (z_j - A_h)^{-1} P_h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RboundEstimate {
    pub estimate: f64,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Square-function ratio of the resolvents at `zs`.
///
/// With `vs` the ratio is evaluated on exactly those batches (each with one
/// function per point) and the maximum is returned. Without, `opts.trials`
/// Gaussian batches are screened and the best `opts.restarts` refined by the
/// power iteration.
pub fn rbound_sample(
    pair: &AssembledPair,
    q: f64,
    zs: &[Complex64],
    opts: &EstimateOptions,
    vs: Option<&[Vec<FeFunction>]>,
) -> Result<RboundEstimate> {
    if zs.is_empty() {
        return Err(Error::invalid("R-bound sampling needs at least one point"));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("R-bound sampling needs 1 < q < inf, got {q}")));
    }
    let resolvents = zs.iter().map(|&z| Resolvent::new(pair, z)).collect::<Result<Vec<_>>>()?;
    let ops: Vec<&dyn LinearMap> = resolvents.iter().map(|r| r as &dyn LinearMap).collect();
    let (estimate, trials) = match vs {
        Some(batches) => {
            let mut best = 0.0f64;
            for b in batches {
                if b.len() != zs.len() {
                    return Err(Error::invalid(format!("batch has {} functions for {} points", b.len(), zs.len())));
                }
                for v in b {
                    pair.check_space(v)?;
                }
                let c: Batch = b.iter().map(|v| v.coeffs().iter().map(|x| x.to_complex()).collect()).collect();
                best = best.max(square_function_ratio(&ops, &c, q));
            }
            (best, batches.len())
        }
        None => (family_norm_q(pair, &ops, q, opts)?, opts.trials.max(opts.restarts).max(1)),
    };
    Ok(RboundEstimate {
        estimate,
        points: zs.len(),
        trials,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::fem::{assemble, CoefficientField};
    use crate::mesh::generate_square_mesh;
    use crate::spectral::{Eigensystem, ScaledIdentity};

    fn pair(n: usize, r: usize) -> AssembledPair {
        let space = FeSpace::new(Arc::new(generate_square_mesh(n).unwrap()), r).unwrap();
        assemble(&space, &CoefficientField::anisotropic()).unwrap()
    }

    #[test]
    fn scaled_identity_norms() {
        let p = pair(5, 2);
        for c in [1.0, 2.0] {
            let op = ScaledIdentity::new(p.space().clone(), Complex64::new(c, 0.0));
            for q in [1.5, 2.0, 3.0, 4.0] {
                let est = operator_norm_q(&p, &op, q, &EstimateOptions::default()).unwrap();
                assert!((est - c).abs() < 1e-12, "q={q}: {est}");
            }
        }
        let p1 = pair(4, 1);
        let id = ScaledIdentity::new(p1.space().clone(), Complex64::new(1.0, 0.0));
        assert!((operator_norm_q(&p1, &id, f64::INFINITY, &EstimateOptions::default()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q2_matches_spectrum() {
        let p = pair(6, 1);
        let e = Eigensystem::compute(&p).unwrap();
        for z in [Complex64::from_polar(40.0, 0.9 * PI), Complex64::from_polar(300.0, -0.75 * PI), Complex64::new(5.0, 0.0)] {
            let r = Resolvent::new(&p, z).unwrap();
            let est = operator_norm_q(&p, &r, 2.0, &EstimateOptions::default()).unwrap();
            let exact = e.lambdas.iter().map(|&l| z.norm() / (z + l).norm()).fold(0.0, f64::max);
            assert!((est - exact).abs() <= 1e-8 * exact, "{est} vs {exact}");
        }
    }

    #[test]
    fn lq_estimates_are_lower_bounds_of_increasing_quality() {
        let p = pair(6, 1);
        let z = Complex64::from_polar(60.0, 0.8 * PI);
        let r = Resolvent::new(&p, z).unwrap();
        let mut screen_only = EstimateOptions::default();
        screen_only.iters = 0;
        let coarse = operator_norm_q(&p, &r, 4.0, &screen_only).unwrap();
        let fine = operator_norm_q(&p, &r, 4.0, &EstimateOptions::default()).unwrap();
        assert!(fine >= coarse);
        assert!(fine >= 1.0);
    }

    #[test]
    fn rbound_with_one_point_is_the_operator_norm() {
        let p = pair(5, 1);
        let z = Complex64::from_polar(80.0, 0.85 * PI);
        let r = Resolvent::new(&p, z).unwrap();
        for q in [2.0, 3.0] {
            let opts = EstimateOptions::rbound(17);
            let a = rbound_sample(&p, q, &[z], &opts, None).unwrap().estimate;
            let b = operator_norm_q(&p, &r, q, &opts).unwrap();
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn rbound_monotone_in_points() {
        let p = pair(4, 1);
        let zs = [Complex64::from_polar(20.0, 0.7 * PI), Complex64::from_polar(90.0, -0.7 * PI)];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = p.num_dofs();
        let batches: Vec<Vec<FeFunction>> = (0..20)
            .map(|_| {
                random_batch(&mut rng, 2, n)
                    .into_iter()
                    .map(|v| FeFunction::new(p.space().clone(), v.iter().map(|c| c.re).collect()).unwrap())
                    .collect()
            })
            .collect();
        let one: Vec<Vec<FeFunction>> = batches.iter().map(|b| vec![b[0].clone()]).collect();
        let opts = EstimateOptions::rbound(1);
        let small = rbound_sample(&p, 3.0, &zs[..1], &opts, Some(&one)).unwrap().estimate;
        // extending every batch by a zero function for the new point keeps each ratio
        let padded: Vec<Vec<FeFunction>> = one
            .iter()
            .map(|b| vec![b[0].clone(), FeFunction::zeros(p.space().clone())])
            .collect();
        let big = rbound_sample(&p, 3.0, &zs, &opts, Some(&padded)).unwrap().estimate;
        assert!(big >= small * (1.0 - 1e-14));
        let sampled = rbound_sample(&p, 3.0, &zs, &opts, None).unwrap().estimate;
        let single = rbound_sample(&p, 3.0, &zs[..1], &opts, None).unwrap().estimate;
        assert!(sampled >= 0.999 * single);
    }

    #[test]
    fn identity_family_has_unit_ratio() {
        let p = pair(4, 1);
        let id = ScaledIdentity::new(p.space().clone(), Complex64::new(1.0, 0.0));
        let ops: Vec<&dyn LinearMap> = vec![&id, &id, &id];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let b = random_batch(&mut rng, 3, p.num_dofs());
            assert!((square_function_ratio(&ops, &b, 3.0) - 1.0).abs() < 1e-14);
        }
        assert!((family_norm_q(&p, &ops, 4.0, &EstimateOptions::rbound(2)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        let p = pair(3, 1);
        assert!(rbound_sample(&p, 1.0, &[Complex64::new(1.0, 0.0)], &EstimateOptions::default(), None).is_err());
        assert!(rbound_sample(&p, 2.0, &[], &EstimateOptions::default(), None).is_err());
        let p2 = pair(3, 2);
        let id = ScaledIdentity::new(p2.space().clone(), Complex64::new(1.0, 0.0));
        assert!(operator_norm_q(&p2, &id, f64::INFINITY, &EstimateOptions::default()).is_err());
        assert!(operator_norm_q(&p2, &id, 1.0, &EstimateOptions::default()).is_err());
    }
}
