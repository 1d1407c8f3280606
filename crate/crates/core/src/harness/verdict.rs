use super::cells::JobOutput;
use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{CellRecord, Verdict};
use crate::mesh::DomainTag;

/// Band every equivalence ratio must stay in.
pub const EQUIVALENCE_BAND: (f64, f64) = (0.1, 10.0);
/// Minimum observed `L^2` order of the Ritz term for P1 on the square.
pub const RITZ_ORDER_MIN: f64 = 1.9;

fn same_cell(a: &CellRecord, b: &CellRecord) -> bool {
    a.experiment == b.experiment
        && a.k == b.k
        && a.p.map(f64::to_bits) == b.p.map(f64::to_bits)
        && a.q.to_bits() == b.q.to_bits()
}

/// Indices of the records of each `(experiment, k, p, q)` group, ordered by level.
fn groups(records: &[CellRecord]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match out.iter_mut().find(|g| same_cell(&records[g[0]], r)) {
            Some(g) => g.push(i),
            None => out.push(vec![i]),
        }
    }
    for g in &mut out {
        g.sort_by_key(|&i| records[i].level);
    }
    out
}

fn fail(r: &mut CellRecord, note: String) {
    r.verdict = Verdict::Fail;
    r.note = note;
}

/// `ratio(cur) <= tol * ratio(prev)`, applied to `cur`.
fn growth_check(records: &mut [CellRecord], prev: usize, cur: usize, tol: f64) {
    if records[cur].verdict != Verdict::Pass {
        return;
    }
    if records[prev].verdict != Verdict::Pass {
        let v = records[prev].verdict;
        fail(&mut records[cur], format!("previous level is {v}; growth not assessable"));
        return;
    }
    let growth = records[cur].ratio / records[prev].ratio;
    if !(growth <= tol) {
        fail(&mut records[cur], format!("ratio grew by a factor {growth:.4} over the previous level (limit {tol})"));
    }
}

/// `max / min` of `values` over the group, applied to the finest record.
fn spread_check(records: &mut [CellRecord], group: &[usize], values: impl Fn(&CellRecord) -> f64, tol: f64) {
    let last = *group.last().expect("nonempty group");
    if records[last].verdict != Verdict::Pass {
        return;
    }
    if let Some(bad) = group.iter().find(|&&i| records[i].verdict != Verdict::Pass) {
        let (l, v) = (records[*bad].level, records[*bad].verdict);
        fail(&mut records[last], format!("level {l} is {v}; spread not assessable"));
        return;
    }
    let vals: Vec<f64> = group.iter().map(|&i| values(&records[i])).collect();
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    if !(lo > 0.0 && spread <= tol) {
        fail(&mut records[last], format!("max/min over levels is {spread:.4} (limit {tol})"));
    }
}

fn ritz_order_rows(cfg: &ExperimentConfig, records: &[CellRecord], jobs: &[(usize, usize)], outs: &[JobOutput]) -> Vec<CellRecord> {
    if cfg.degree != 1 || cfg.domain != DomainTag::Square || !cfg.qs.contains(&2.0) {
        return Vec::new();
    }
    let p = if cfg.ps.contains(&2.0) { 2.0 } else { cfg.ps[0] };
    let term = |level: usize, k: usize| -> Option<(f64, &CellRecord)> {
        let j = jobs.iter().position(|&jk| jk == (level, k))?;
        let value = outs[j].ritz.iter().find(|r| r.p == p && r.q == 2.0)?.value;
        let rec = records.iter().find(|r| r.experiment == "error" && r.level == level && r.k == k)?;
        Some((value, rec))
    };
    let mut rows = Vec::new();
    for l in 1..cfg.levels {
        for &k in &cfg.ks {
            let (Some((coarse, rc)), Some((fine, rf))) = (term(l - 1, k), term(l, k)) else {
                continue;
            };
            let order = (coarse / fine).ln() / (rc.h / rf.h).ln();
            let ok = order.is_finite() && order >= RITZ_ORDER_MIN;
            rows.push(CellRecord {
                experiment: "error-ritz-order".into(),
                level: l,
                h: rf.h,
                tau: rf.tau,
                n_steps: rf.n_steps,
                k,
                p: Some(p),
                q: 2.0,
                numerator: coarse,
                denominator: fine,
                ratio: order,
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
                note: if ok {
                    String::new()
                } else {
                    format!("observed order {order:.3} below {RITZ_ORDER_MIN}")
                },
            });
        }
    }
    rows
}

/// Merge job outputs in job order and apply the cross-level verdicts.
pub(crate) fn finalize(cfg: &ExperimentConfig, jobs: &[(usize, usize)], outs: Vec<JobOutput>) -> Vec<CellRecord> {
    let tol = cfg.tolerance;
    let mut records: Vec<CellRecord> = outs.iter().flat_map(|o| o.records.iter().cloned()).collect();
    if cfg.experiment == ExperimentKind::Error {
        let extra = ritz_order_rows(cfg, &records, jobs, &outs);
        records.extend(extra);
    }
    // main rows first, then oracle and derived rows, each level-major
    let main = cfg.experiment.as_str();
    records.sort_by_key(|r| (r.experiment != main, r.experiment.clone()));

    for g in groups(&records) {
        let tag = records[g[0]].experiment.clone();
        if tag != main {
            continue;
        }
        let last = *g.last().expect("nonempty group");
        match cfg.experiment {
            ExperimentKind::Maxreg | ExperimentKind::Error => {
                if g.len() >= 2 {
                    growth_check(&mut records, g[g.len() - 2], last, tol);
                }
            }
            ExperimentKind::Linfty => {
                // each doubling is judged against the unjudged previous row
                let snapshot: Vec<CellRecord> = g.iter().map(|&i| records[i].clone()).collect();
                for (w, s) in g.windows(2).zip(snapshot.windows(2)) {
                    let mut pair = s.to_vec();
                    growth_check(&mut pair, 0, 1, tol);
                    records[w[1]] = pair.pop().expect("two rows");
                }
            }
            ExperimentKind::Equivalence => {
                for &i in &g {
                    let r = &mut records[i];
                    if r.verdict != Verdict::Pass {
                        continue;
                    }
                    if !(EQUIVALENCE_BAND.0..=EQUIVALENCE_BAND.1).contains(&r.ratio) {
                        let x = r.ratio;
                        fail(r, format!("ratio {x:.4} outside [{}, {}]", EQUIVALENCE_BAND.0, EQUIVALENCE_BAND.1));
                    } else if r.k == 1 && (r.ratio - 1.0).abs() > 1e-12 {
                        let x = r.ratio;
                        fail(r, format!("backward Euler ratio {x:e} differs from 1"));
                    }
                }
                spread_check(&mut records, &g, |r| r.ratio, tol);
            }
            ExperimentKind::W1q => spread_check(&mut records, &g, |r| r.ratio, tol),
            ExperimentKind::Decay => spread_check(&mut records, &g, |r| r.numerator, tol),
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(level: usize, ratio: f64) -> CellRecord {
        CellRecord {
            experiment: "maxreg".into(),
            level,
            h: 1.0 / (1 << level) as f64,
            tau: 0.1,
            n_steps: 10,
            k: 2,
            p: Some(2.0),
            q: 4.0,
            numerator: ratio,
            denominator: 1.0,
            ratio,
            verdict: Verdict::Pass,
            note: String::new(),
        }
    }

    fn run(kind: ExperimentKind, ratios: &[f64]) -> Vec<Verdict> {
        let cfg = ExperimentConfig {
            experiment: kind,
            ..Default::default()
        };
        let out = JobOutput {
            records: ratios
                .iter()
                .enumerate()
                .map(|(l, &x)| CellRecord {
                    experiment: kind.as_str().into(),
                    ..rec(l, x)
                })
                .collect(),
            ritz: vec![],
        };
        finalize(&cfg, &[], vec![out]).iter().map(|r| r.verdict).collect()
    }

    #[test]
    fn saturation_only_judges_the_finest_pair() {
        use Verdict::*;
        assert_eq!(run(ExperimentKind::Maxreg, &[1.0, 3.0, 3.3]), [Pass, Pass, Pass]);
        assert_eq!(run(ExperimentKind::Maxreg, &[1.0, 1.1, 1.3]), [Pass, Pass, Fail]);
    }

    #[test]
    fn linfty_judges_every_doubling() {
        use Verdict::*;
        assert_eq!(run(ExperimentKind::Linfty, &[1.0, 1.3, 1.3]), [Pass, Fail, Pass]);
    }

    #[test]
    fn spread_and_band() {
        use Verdict::*;
        assert_eq!(run(ExperimentKind::W1q, &[1.0, 1.1, 1.14]), [Pass, Pass, Pass]);
        assert_eq!(run(ExperimentKind::W1q, &[1.0, 1.1, 1.16]), [Pass, Pass, Fail]);
        assert_eq!(run(ExperimentKind::Equivalence, &[11.0, 11.0, 11.0]), [Fail, Fail, Fail]);
    }

    #[test]
    fn degenerate_previous_level_blocks_the_claim() {
        let cfg = ExperimentConfig::default();
        let mut a = rec(0, 0.0);
        a.verdict = Verdict::Degenerate;
        let out = JobOutput {
            records: vec![a, rec(1, 2.0)],
            ritz: vec![],
        };
        let v: Vec<Verdict> = finalize(&cfg, &[], vec![out]).iter().map(|r| r.verdict).collect();
        assert_eq!(v, [Verdict::Degenerate, Verdict::Fail]);
    }
}
