use std::io::Write;
use std::sync::Arc;

use super::coefficients::BdfScheme;
use crate::fem::{AssembledPair, FeFunction, FeSpace};
use crate::linalg::BandCholesky;
use crate::{Error, Result};

/// Uniform time grid `t_n = n tau`, `n = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub tau: f64,
    pub n_final: usize,
    pub k: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, n_final: usize, k: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {tau}")));
        }
        if n_final < k {
            return Err(Error::invalid(format!("N = {n_final} is smaller than k = {k}")));
        }
        Ok(TimeGrid { tau, n_final, k })
    }

    /// `N = round(T / tau)` steps with `tau` adjusted to land on `T` exactly.
    pub fn for_final_time(final_time: f64, tau: f64, k: usize) -> Result<Self> {
        let n = ((final_time / tau).round() as usize).max(k);
        Self::new(final_time / n as f64, n, k)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.n_final)
    }
}

/// `u_h^n` for `n = 0..=N`, all in one space.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<FeFunction>,
}

impl Trajectory {
    pub fn space(&self) -> &Arc<FeSpace> {
        self.states[0].space()
    }

    /// CSV rows `n,t,coeff_index,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,t,coeff_index,value")?;
        for (n, u) in self.states.iter().enumerate() {
            let t = self.grid.time(n);
            for (i, v) in u.coeffs().iter().enumerate() {
                writeln!(out, "{n},{t:.17e},{i},{v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// One factorization of `delta_0 M + tau K`, reusable across runs with the
/// same `(pair, scheme, tau)`.
#[derive(Debug)]
pub struct BdfStepper<'a> {
    pair: &'a AssembledPair,
    delta: Vec<f64>,
    tau: f64,
    factor: BandCholesky,
}

impl<'a> BdfStepper<'a> {
    pub fn new(pair: &'a AssembledPair, scheme: &BdfScheme, tau: f64) -> Result<Self> {
        let delta = scheme.delta_f64();
        let factor = pair.factor_combination(delta[0], tau)?;
        Ok(BdfStepper {
            pair,
            delta,
            tau,
            factor,
        })
    }

    pub fn steps(&self) -> usize {
        self.delta.len() - 1
    }

    /// Solve `(delta_0 M + tau K) U^n = M (tau F^n - sum_{j>=1} delta_j U^{n-j})`
    /// given the previous `k` states, most recent last.
    pub fn step(&self, history: &[&FeFunction], forcing: &FeFunction) -> Result<FeFunction> {
        let k = self.steps();
        debug_assert_eq!(history.len(), k);
        let space = self.pair.space();
        let mut acc: Vec<f64> = forcing.coeffs().iter().map(|f| self.tau * f).collect();
        for j in 1..=k {
            let prev = history[k - j];
            for (a, &u) in acc.iter_mut().zip(prev.coeffs()) {
                *a -= self.delta[j] * u;
            }
        }
        let rhs = self.pair.mass().mul_vec(&acc);
        FeFunction::new(space.clone(), self.factor.solve(&rhs))
    }

    pub fn run(
        &self,
        grid: &TimeGrid,
        mut forcing: impl FnMut(usize) -> Result<FeFunction>,
        starting: Vec<FeFunction>,
    ) -> Result<Trajectory> {
        let k = self.steps();
        if grid.k != k {
            return Err(Error::invalid(format!("grid is for k = {}, scheme has k = {k}", grid.k)));
        }
        if (grid.tau - self.tau).abs() > 1e-15 * self.tau {
            return Err(Error::invalid("grid step differs from the factored step"));
        }
        if starting.len() != k {
            return Err(Error::invalid(format!("{} starting values for a {k}-step method", starting.len())));
        }
        let space = self.pair.space();
        if starting.iter().any(|u| !u.same_space(space)) {
            return Err(Error::SpaceMismatch);
        }
        let mut states = starting;
        states.reserve(grid.n_final + 1 - k);
        for n in k..=grid.n_final {
            let f = forcing(n)?;
            if !f.same_space(space) {
                return Err(Error::SpaceMismatch);
            }
            let history: Vec<&FeFunction> = states[n - k..n].iter().collect();
            let next = self.step(&history, &f)?;
            states.push(next);
        }
        Ok(Trajectory { grid: *grid, states })
    }
}

/// Advance `(1/tau) sum_j delta_j u^{n-j} = A_h u^n + f_h^n` for `n = k..=N`.
///
/// `forcing(n)` returns the coefficients of `f_h^n`; `starting` holds
/// `u^0..u^{k-1}`.
pub fn run_bdf(
    pair: &AssembledPair,
    scheme: &BdfScheme,
    grid: &TimeGrid,
    forcing: impl FnMut(usize) -> Result<FeFunction>,
    starting: Vec<FeFunction>,
) -> Result<Trajectory> {
    BdfStepper::new(pair, scheme, grid.tau)?.run(grid, forcing, starting)
}

/// `d_tau u^n = (u^n - u^{n-1}) / tau` for `n = 1..=N` (entry `i` is step `i + 1`).
pub fn d_tau(traj: &Trajectory) -> Vec<FeFunction> {
    let inv = 1.0 / traj.grid.tau;
    traj.states
        .windows(2)
        .map(|w| {
            let coeffs = w[1].coeffs().iter().zip(w[0].coeffs()).map(|(a, b)| (a - b) * inv).collect();
            FeFunction::new(w[1].space().clone(), coeffs).expect("same space")
        })
        .collect()
}

/// `u_dot^n = (1/tau) sum_j delta_j u^{n-j}` for `n = k..=N` (entry `i` is step `k + i`).
pub fn dot_u(traj: &Trajectory, scheme: &BdfScheme) -> Vec<FeFunction> {
    let delta = scheme.delta_f64();
    let k = scheme.steps();
    let inv = 1.0 / traj.grid.tau;
    (k..traj.states.len())
        .map(|n| {
            let mut c = vec![0.0; traj.states[n].coeffs().len()];
            for (j, d) in delta.iter().enumerate() {
                for (ci, &u) in c.iter_mut().zip(traj.states[n - j].coeffs()) {
                    *ci += d * u;
                }
            }
            c.iter_mut().for_each(|x| *x *= inv);
            FeFunction::new(traj.states[n].space().clone(), c).expect("same space")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdf::bdf_coefficients;
    use crate::fem::{assemble, CoefficientField, FeSpace};
    use crate::linalg::generalized_symmetric_eigen;
    use crate::mesh::generate_square_mesh;

    fn pair(n: usize) -> AssembledPair {
        let space = FeSpace::new(Arc::new(generate_square_mesh(n).unwrap()), 1).unwrap();
        assemble(&space, &CoefficientField::identity()).unwrap()
    }

    fn l2(p: &AssembledPair, u: &FeFunction) -> f64 {
        p.mass().mul_vec(u.coeffs()).iter().zip(u.coeffs()).map(|(a, b)| a * b).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_in_zero_out() {
        let p = pair(4);
        let s = bdf_coefficients(3).unwrap();
        let grid = TimeGrid::new(0.05, 10, 3).unwrap();
        let zero = FeFunction::zeros(p.space().clone());
        let traj = run_bdf(&p, &s, &grid, |_| Ok(zero.clone()), vec![zero.clone(); 3]).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(FeFunction::is_zero));
    }

    #[test]
    fn backward_euler_decays() {
        let p = pair(4);
        let s = bdf_coefficients(1).unwrap();
        let grid = TimeGrid::new(0.01, 30, 1).unwrap();
        let zero = FeFunction::zeros(p.space().clone());
        let start = FeFunction::new(p.space().clone(), (0..p.num_dofs()).map(|i| (i as f64).sin() + 0.3).collect()).unwrap();
        let traj = run_bdf(&p, &s, &grid, |_| Ok(zero.clone()), vec![start]).unwrap();
        let norms: Vec<f64> = traj.states.iter().map(|u| l2(&p, u)).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn backward_euler_on_first_eigenvector() {
        let p = pair(4);
        let eig = generalized_symmetric_eigen(p.stiffness(), p.mass()).unwrap();
        let lam = eig.values[0];
        let phi: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
        let s = bdf_coefficients(1).unwrap();
        let tau = 0.02;
        let grid = TimeGrid::new(tau, 25, 1).unwrap();
        let zero = FeFunction::zeros(p.space().clone());
        let start = FeFunction::new(p.space().clone(), phi.clone()).unwrap();
        let traj = run_bdf(&p, &s, &grid, |_| Ok(zero.clone()), vec![start]).unwrap();
        for (n, u) in traj.states.iter().enumerate() {
            let factor = (1.0 + tau * lam).powi(-(n as i32));
            for (a, b) in u.coeffs().iter().zip(&phi) {
                assert!((a - factor * b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn difference_quotients_are_exact_on_linear_trajectories() {
        let p = pair(3);
        let v: Vec<f64> = (0..p.num_dofs()).map(|i| 1.0 + i as f64).collect();
        for k in 1..=6 {
            let s = bdf_coefficients(k).unwrap();
            let grid = TimeGrid::new(0.1, 8, k).unwrap();
            let states = (0..=8)
                .map(|n| FeFunction::new(p.space().clone(), v.iter().map(|x| grid.time(n) * x).collect()).unwrap())
                .collect();
            let traj = Trajectory { grid, states };
            for d in d_tau(&traj).iter().chain(dot_u(&traj, &s).iter()) {
                for (a, b) in d.coeffs().iter().zip(&v) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            let constant = Trajectory {
                grid,
                states: vec![FeFunction::new(p.space().clone(), v.clone()).unwrap(); 9],
            };
            assert!(dot_u(&constant, &s).iter().all(|d| d.coeffs().iter().all(|x| x.abs() < 1e-12)));
            assert!(d_tau(&constant).iter().all(FeFunction::is_zero));
        }
    }

    #[test]
    fn rejects_wrong_start_count() {
        let p = pair(2);
        let s = bdf_coefficients(2).unwrap();
        let grid = TimeGrid::new(0.1, 4, 2).unwrap();
        let zero = FeFunction::zeros(p.space().clone());
        assert!(run_bdf(&p, &s, &grid, |_| Ok(zero.clone()), vec![zero.clone()]).is_err());
        assert!(TimeGrid::new(0.1, 1, 2).is_err());
    }

    #[test]
    fn trajectory_csv_header() {
        let p = pair(2);
        let s = bdf_coefficients(1).unwrap();
        let grid = TimeGrid::new(0.5, 1, 1).unwrap();
        let one = FeFunction::new(p.space().clone(), vec![1.0]).unwrap();
        let traj = run_bdf(&p, &s, &grid, |_| Ok(one.clone()), vec![one.clone()]).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("n,t,coeff_index,value\n0,0.00000000000000000e0,0,1.00000000000000000e0\n"));
    }
}
