//! Per-(level, k) measurements. Each job runs its trajectories once with the
//! configured data and once with the data doubled, and fails any cell whose
//! ratio is not reproduced by the doubled run.

use super::config::{ExperimentConfig, ExperimentKind, StartPolicy};
use super::report::{CellRecord, Verdict};
use super::setup::{modal_time, Level};
use crate::bdf::{bdf_coefficients, d_tau, dot_u, run_bdf, BdfScheme, TimeGrid, Trajectory};
use crate::fem::{apply_ah, AssembledPair, FeFunction};
use crate::norms::{elliptic_lift, grad_lq_norm_full, lp_time_norm, lq_norm, lq_norm_full, w1q_norm};
use crate::{Error, Result};

pub(crate) const HOMOGENEITY_TOL: f64 = 1e-12;
pub(crate) const ORACLE_TOL: f64 = 1e-6;
pub(crate) const DECAY_ORACLE_TOL: f64 = 0.01;
/// Values below this are treated as underflow and dropped from decay fits.
const UNDERFLOW: f64 = 1e-290;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Measurement {
    pub p: Option<f64>,
    pub q: f64,
    pub num: f64,
    pub den: f64,
}

impl Measurement {
    fn ratio(&self) -> f64 {
        self.num / self.den
    }
}

/// Extra per-cell quantity consumed by the cross-level rows.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RitzTerm {
    pub p: f64,
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Default)]
pub(crate) struct JobOutput {
    pub records: Vec<CellRecord>,
    pub ritz: Vec<RitzTerm>,
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    level: &'a Level,
    k: usize,
    n_steps: usize,
    tau: f64,
    scheme: BdfScheme,
}

impl Cell<'_> {
    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.tau, self.n_steps, self.k)
    }

    fn record(&self, experiment: &str, m: &Measurement) -> CellRecord {
        let (ratio, verdict) = if m.num == 0.0 && m.den == 0.0 {
            (0.0, Verdict::Degenerate)
        } else if m.den > 0.0 && m.ratio().is_finite() && m.ratio() > 0.0 {
            (m.ratio(), Verdict::Pass)
        } else {
            (m.ratio(), Verdict::Fail)
        };
        CellRecord {
            experiment: experiment.into(),
            level: self.level.index,
            h: self.level.h,
            tau: self.tau,
            n_steps: self.n_steps,
            k: self.k,
            p: m.p,
            q: m.q,
            numerator: m.num,
            denominator: m.den,
            ratio,
            verdict,
            note: String::new(),
        }
    }

    /// Cells whose computation failed outright.
    fn failed(&self, experiment: &str, err: &Error) -> Vec<CellRecord> {
        exponent_grid(self.cfg)
            .into_iter()
            .map(|(p, q)| CellRecord {
                ratio: 0.0,
                verdict: Verdict::Fail,
                note: err.to_string(),
                ..self.record(experiment, &Measurement { p, q, num: 0.0, den: 0.0 })
            })
            .collect()
    }

    fn run(&self, pair: &AssembledPair, forcing: &[FeFunction], starts: Vec<FeFunction>) -> Result<Trajectory> {
        run_bdf(pair, &self.scheme, &self.grid()?, |n| Ok(forcing[n].clone()), starts)
    }

    fn own_run(&self, scale: f64) -> Result<(Vec<FeFunction>, Trajectory)> {
        let pair = &self.level.pair;
        let f = self.level.forcing(self.cfg, pair, self.n_steps, self.tau, scale)?;
        let starts = self.level.starts(self.cfg, pair, self.k, scale)?;
        let traj = self.run(pair, &f, starts)?;
        Ok((f, traj))
    }

    fn lp(&self, v: &[f64], p: f64) -> f64 {
        lp_time_norm(v, p, self.tau)
    }
}

/// `(p, q)` pairs of the main cells, `p = None` where time is not normed.
pub(crate) fn exponent_grid(cfg: &ExperimentConfig) -> Vec<(Option<f64>, f64)> {
    let ps: Vec<Option<f64>> = match cfg.experiment {
        ExperimentKind::Linfty => vec![Some(f64::INFINITY)],
        ExperimentKind::Decay => vec![None],
        _ => cfg.ps.iter().map(|p| Some(*p)).collect(),
    };
    ps.iter().flat_map(|&p| cfg.qs.iter().map(move |&q| (p, q))).collect()
}

fn norms(seq: &[FeFunction], q: f64) -> Vec<f64> {
    seq.iter().map(|u| lq_norm(u, q)).collect()
}

/// `||grad z||_q + ||z||_q` of the elliptic lift `z` of each member, per `q`.
fn lifted_norms(pair: &AssembledPair, seq: &[FeFunction], qs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::with_capacity(seq.len()); qs.len()];
    for f in seq {
        let full = elliptic_lift(pair, f)?.full_nodal();
        for (o, &q) in out.iter_mut().zip(qs) {
            o.push(grad_lq_norm_full(pair.space(), &full, q) + lq_norm_full(pair.space(), &full, q));
        }
    }
    Ok(out)
}

/// Scalar BDF recurrence for one mode: `(delta_0 + tau lambda) a_n = tau g_n - sum_{j>=1} delta_j a_{n-j}`.
pub(crate) fn scalar_recurrence(scheme: &BdfScheme, tau: f64, lambda: f64, g: &[f64], starts: &[f64]) -> Vec<f64> {
    let delta = scheme.delta_f64();
    let k = scheme.steps();
    assert_eq!(starts.len(), k);
    let mut a = starts.to_vec();
    for n in k..g.len() {
        let hist: f64 = (1..=k).map(|j| delta[j] * a[n - j]).sum();
        a.push((tau * g[n] - hist) / (delta[0] + tau * lambda));
    }
    a
}

/// Decay rate from a least-squares line through `log v_n` against `t_n` over
/// the tail half, skipping underflowed values.
pub(crate) fn fit_decay_rate(values: &[f64], tau: f64) -> Result<f64> {
    let n = values.len();
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&i| values[i].is_finite() && values[i] > UNDERFLOW)
        .map(|i| (i as f64 * tau, values[i].ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::invalid(format!("only {} usable points in the decay fit window", pts.len())));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    Ok(-sxy / sxx)
}

fn maxreg_measure(cell: &Cell, scale: f64) -> Result<Vec<Measurement>> {
    let (f, traj) = cell.own_run(scale)?;
    let dt = d_tau(&traj);
    let ah = traj.states[1..]
        .iter()
        .map(|u| apply_ah(&cell.level.pair, u))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &(p, q) in &exponent_grid(cell.cfg) {
        let p = p.expect("maxreg cells have a temporal exponent");
        let num = cell.lp(&norms(&dt, q), p) + cell.lp(&norms(&ah, q), p);
        let den = cell.lp(&norms(&f[cell.k..], q), p);
        out.push(Measurement { p: Some(p), q, num, den });
    }
    Ok(out)
}

fn equivalence_measure(cell: &Cell, scale: f64) -> Result<Vec<Measurement>> {
    let (_, traj) = cell.own_run(scale)?;
    let dt = d_tau(&traj);
    let du = dot_u(&traj, &cell.scheme);
    Ok(exponent_grid(cell.cfg)
        .into_iter()
        .map(|(p, q)| {
            let p = p.expect("equivalence cells have a temporal exponent");
            Measurement {
                p: Some(p),
                q,
                num: cell.lp(&norms(&dt, q), p),
                den: cell.lp(&norms(&du, q), p),
            }
        })
        .collect())
}

/// Per `q`, for `n = 0..=N`: `||P_h u^n - u_h^n||_q`, `||P_h u^n - R_h u^n||_q`
/// and `||P_h u^n||_q`.
fn reference_errors(cell: &Cell, scale: f64) -> Result<Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>> {
    let level = cell.level;
    let reference = level
        .reference
        .as_ref()
        .ok_or_else(|| Error::invalid("level was built without a reference space"))?;
    let coarse = &level.pair;
    let fine_f = level.forcing(cell.cfg, &reference.pair, cell.n_steps, cell.tau, scale)?;
    let fine_starts = level.starts(cell.cfg, &reference.pair, cell.k, scale)?;
    let coarse_starts = match cell.cfg.start {
        StartPolicy::Zero => vec![FeFunction::zeros(coarse.space().clone()); cell.k],
        StartPolicy::Projected => fine_starts
            .iter()
            .map(|u| reference.transfer.project_l2(coarse, u))
            .collect::<Result<Vec<_>>>()?,
    };
    let fine = cell.run(&reference.pair, &fine_f, fine_starts)?;
    let coarse_f = level.forcing(cell.cfg, coarse, cell.n_steps, cell.tau, scale)?;
    let uh = cell.run(coarse, &coarse_f, coarse_starts)?;

    let mut e = Vec::with_capacity(fine.states.len());
    let mut rho = Vec::with_capacity(fine.states.len());
    let mut projected = Vec::with_capacity(fine.states.len());
    for (u, v) in fine.states.iter().zip(&uh.states) {
        let ph = reference.transfer.project_l2(coarse, u)?;
        let rh = reference.transfer.project_ritz(coarse, u)?;
        e.push(ph.add_scaled(-1.0, v)?);
        rho.push(ph.add_scaled(-1.0, &rh)?);
        projected.push(ph);
    }
    Ok(cell
        .cfg
        .qs
        .iter()
        .map(|&q| (norms(&e, q), norms(&rho, q), norms(&projected, q)))
        .collect())
}

fn error_measure(cell: &Cell, scale: f64) -> Result<(Vec<Measurement>, Vec<RitzTerm>)> {
    let k = cell.k;
    let per_q = reference_errors(cell, scale)?;
    let mut out = Vec::new();
    let mut ritz = Vec::new();
    for &p in &cell.cfg.ps {
        for (&q, (e, rho, size)) in cell.cfg.qs.iter().zip(&per_q) {
            let lhs = cell.lp(&e[k..], p);
            let ritz_term = cell.lp(&rho[k..], p);
            let start: f64 = e[..k].iter().sum();
            out.push(Measurement {
                p: Some(p),
                q,
                num: lhs,
                den: ritz_term + start,
            });
            // Ritz term relative to the trajectory size, for the refinement order
            ritz.push(RitzTerm {
                p,
                q,
                value: cell.lp(&rho[k..], p) / cell.lp(&size[k..], p),
            });
        }
    }
    Ok((out, ritz))
}

fn linfty_measure(cell: &Cell, scale: f64) -> Result<Vec<Measurement>> {
    let k = cell.k;
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    let log_n = (1.0 + cell.n_steps as f64).ln();
    Ok(cell
        .cfg
        .qs
        .iter()
        .zip(reference_errors(cell, scale)?)
        .map(|(&q, (e, rho, _))| Measurement {
            p: Some(f64::INFINITY),
            q,
            num: max(&e[k..]),
            den: log_n * max(&rho[k..]) + max(&e[..k]),
        })
        .collect())
}

fn w1q_measure(cell: &Cell, scale: f64) -> Result<Vec<Measurement>> {
    let pair = &cell.level.pair;
    let (f, traj) = cell.own_run(scale)?;
    let qs = &cell.cfg.qs;
    let dt = lifted_norms(pair, &d_tau(&traj), qs)?;
    let ff = lifted_norms(pair, &f[cell.k..], qs)?;
    let mut out = Vec::new();
    for &p in &cell.cfg.ps {
        for (i, &q) in qs.iter().enumerate() {
            let w: Vec<f64> = traj.states[1..].iter().map(|u| w1q_norm(u, q)).collect();
            out.push(Measurement {
                p: Some(p),
                q,
                num: cell.lp(&dt[i], p) + cell.lp(&w, p),
                den: cell.lp(&ff[i], p),
            });
        }
    }
    Ok(out)
}

fn decay_measure(cell: &Cell, scale: f64) -> Result<Vec<Measurement>> {
    let (_, traj) = cell.own_run(scale)?;
    let lambda_1 = cell.level.lambda_1()?;
    cell.cfg
        .qs
        .iter()
        .map(|&q| {
            Ok(Measurement {
                p: None,
                q,
                num: fit_decay_rate(&norms(&traj.states, q), cell.tau)?,
                den: lambda_1,
            })
        })
        .collect()
}

/// Modal cell against the scalar recurrence: `f^n = g(t_n) phi_1`, zero starts, `p = q = 2`.
fn modal_oracle(cell: &Cell, experiment: &str) -> Result<CellRecord> {
    let pair = &cell.level.pair;
    let (lambda, phi) = cell.level.mode()?;
    let n = cell.n_steps;
    let k = cell.k;
    let g: Vec<f64> = (0..=n).map(|i| modal_time(i as f64 * cell.tau, cell.cfg.final_time)).collect();
    let f: Vec<FeFunction> = g.iter().map(|&c| phi.scaled(c)).collect();
    let traj = cell.run(pair, &f, vec![FeFunction::zeros(pair.space().clone()); k])?;

    let a = scalar_recurrence(&cell.scheme, cell.tau, *lambda, &g, &vec![0.0; k]);
    let da: Vec<f64> = a.windows(2).map(|w| (w[1] - w[0]) / cell.tau).collect();
    let lp2 = |v: &[f64]| cell.lp(v, 2.0);
    let (measured, oracle) = if experiment == "w1q-oracle" {
        let dt = lifted_norms(pair, &d_tau(&traj), &[2.0])?;
        let ff = lifted_norms(pair, &f[k..], &[2.0])?;
        let w: Vec<f64> = traj.states[1..].iter().map(|u| w1q_norm(u, 2.0)).collect();
        let measured = (lp2(&dt[0]) + lp2(&w)) / lp2(&ff[0]);
        let neg_phi = lifted_norms(pair, std::slice::from_ref(phi), &[2.0])?[0][0];
        let w1q_phi = w1q_norm(phi, 2.0);
        let oracle = (neg_phi * lp2(&da) + w1q_phi * lp2(&a[1..])) / (neg_phi * lp2(&g[k..]));
        (measured, oracle)
    } else {
        let ah = traj.states[1..].iter().map(|u| apply_ah(pair, u)).collect::<Result<Vec<_>>>()?;
        let measured = (lp2(&norms(&d_tau(&traj), 2.0)) + lp2(&norms(&ah, 2.0))) / lp2(&norms(&f[k..], 2.0));
        let oracle = (lp2(&da) + lambda * lp2(&a[1..])) / lp2(&g[k..]);
        (measured, oracle)
    };
    let mut rec = cell.record(
        experiment,
        &Measurement {
            p: Some(2.0),
            q: 2.0,
            num: measured,
            den: oracle,
        },
    );
    if !((rec.ratio - 1.0).abs() <= ORACLE_TOL) {
        rec.verdict = Verdict::Fail;
        rec.note = format!("modal cell deviates from the scalar recurrence by {:e}", (rec.ratio - 1.0).abs());
    }
    Ok(rec)
}

/// Backward Euler from `phi_1` without forcing: the discrete rate is `log(1 + tau lambda_1) / tau`.
fn decay_oracle(cell: &Cell) -> Result<CellRecord> {
    let pair = &cell.level.pair;
    let (lambda, phi) = cell.level.mode()?;
    let zero = vec![FeFunction::zeros(pair.space().clone()); cell.n_steps + 1];
    let traj = cell.run(pair, &zero, vec![phi.clone()])?;
    let fitted = fit_decay_rate(&norms(&traj.states, 2.0), cell.tau)?;
    let exact = (1.0 + cell.tau * lambda).ln() / cell.tau;
    let mut rec = cell.record(
        "decay-oracle",
        &Measurement {
            p: None,
            q: 2.0,
            num: fitted,
            den: exact,
        },
    );
    if !((rec.ratio - 1.0).abs() <= DECAY_ORACLE_TOL) {
        rec.verdict = Verdict::Fail;
        rec.note = format!("fitted rate deviates from the modal rate by {:e}", (rec.ratio - 1.0).abs());
    }
    Ok(rec)
}

fn homogeneity_check(cell: &Cell, experiment: &str, base: &[Measurement], doubled: &[Measurement]) -> Vec<CellRecord> {
    base.iter()
        .zip(doubled)
        .map(|(a, b)| {
            let mut rec = cell.record(experiment, a);
            if rec.verdict == Verdict::Pass {
                let drift = (b.ratio() - a.ratio()).abs() / a.ratio().abs();
                if !(drift <= HOMOGENEITY_TOL) {
                    rec.verdict = Verdict::Fail;
                    rec.note = format!("ratio changed by {drift:e} under doubled data");
                }
            }
            rec
        })
        .collect()
}

/// Every cell of one `(level, k)` pair.
pub(crate) fn run_job(cfg: &ExperimentConfig, level: &Level, k: usize) -> JobOutput {
    let (n_steps, tau) = cfg.time_steps(level.index, k);
    let scheme = match bdf_coefficients(k) {
        Ok(s) => s,
        Err(e) => unreachable!("validated k = {k}: {e}"),
    };
    let cell = Cell {
        cfg,
        level,
        k,
        n_steps,
        tau,
        scheme,
    };
    let tag = cfg.experiment.as_str();
    let mut out = JobOutput::default();

    let measured: Result<(Vec<Measurement>, Vec<Measurement>)> = (|| {
        let pair = |scale| -> Result<Vec<Measurement>> {
            match cfg.experiment {
                ExperimentKind::Maxreg => maxreg_measure(&cell, scale),
                ExperimentKind::Equivalence => equivalence_measure(&cell, scale),
                ExperimentKind::Error => error_measure(&cell, scale).map(|r| r.0),
                ExperimentKind::Linfty => linfty_measure(&cell, scale),
                ExperimentKind::W1q => w1q_measure(&cell, scale),
                ExperimentKind::Decay => decay_measure(&cell, scale),
            }
        };
        if cfg.experiment == ExperimentKind::Error {
            let (m, ritz) = error_measure(&cell, 1.0)?;
            out.ritz = ritz;
            return Ok((m, pair(2.0)?));
        }
        Ok((pair(1.0)?, pair(2.0)?))
    })();
    match measured {
        Ok((base, doubled)) => out.records.extend(homogeneity_check(&cell, tag, &base, &doubled)),
        Err(e) => out.records.extend(cell.failed(tag, &e)),
    }

    let oracle = match cfg.experiment {
        ExperimentKind::Maxreg if cfg.oracle => Some(modal_oracle(&cell, "maxreg-oracle")),
        ExperimentKind::W1q if cfg.oracle => Some(modal_oracle(&cell, "w1q-oracle")),
        ExperimentKind::Decay if k == 1 => Some(decay_oracle(&cell)),
        _ => None,
    };
    if let Some(rec) = oracle {
        let name = format!("{tag}-oracle");
        out.records.push(rec.unwrap_or_else(|e| CellRecord {
            verdict: Verdict::Fail,
            note: e.to_string(),
            ..cell.record(
                &name,
                &Measurement {
                    p: Some(2.0),
                    q: 2.0,
                    num: 0.0,
                    den: 0.0,
                },
            )
        }));
    }
    out
}
