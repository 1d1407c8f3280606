use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{ExperimentConfig, ExperimentKind, ForcingKind, StartPolicy};
use super::report::LevelInfo;
use crate::fem::{assemble, l2_project, AssembledPair, CoefficientField, FeFunction, FeSpace, GridTransfer};
use crate::mesh::{generate_lshape_mesh, generate_square_mesh, mesh_size, quasi_uniformity_ratio, refine_levels, DomainTag, Mesh, Point};
use crate::spectral::lowest_eigenpair;
use crate::{par, Error, Result};

/// Spatial factor of the smooth forcing; vanishes on the unit-square boundary.
pub(crate) fn smooth_space(x: Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin() * (1.0 + x[0] + 0.5 * x[1] * x[1])
}

pub(crate) fn smooth_time(t: f64) -> f64 {
    1.0 + t + 0.5 * (2.0 * PI * t).sin()
}

/// Profile behind the `projected-reference` starting values.
pub(crate) fn start_profile(x: Point) -> f64 {
    16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * (1.0 + 0.5 * x[0])
}

pub(crate) fn modal_time(t: f64, final_time: f64) -> f64 {
    (PI * t / final_time).sin()
}

pub(crate) struct Reference {
    pub pair: AssembledPair,
    pub transfer: GridTransfer,
    pub h: f64,
}

/// Everything shared by the cells of one level.
pub(crate) struct Level {
    pub index: usize,
    pub mesh_n: usize,
    pub h: f64,
    pub quasi_uniformity: f64,
    pub pair: AssembledPair,
    pub reference: Option<Reference>,
    pub eigenpair: Option<(f64, FeFunction)>,
    /// `f_h^n` for `n = 0..=max N`, seeded random forcing only.
    pub random: Vec<FeFunction>,
}

impl Level {
    pub fn info(&self) -> LevelInfo {
        LevelInfo {
            level: self.index,
            mesh_n: self.mesh_n,
            h: self.h,
            dofs: self.pair.num_dofs(),
            quasi_uniformity: self.quasi_uniformity,
            reference_h: self.reference.as_ref().map(|r| r.h),
            reference_dofs: self.reference.as_ref().map(|r| r.pair.num_dofs()),
            lambda_1: self.eigenpair.as_ref().map(|e| e.0),
        }
    }

    pub fn lambda_1(&self) -> Result<f64> {
        Ok(self.mode()?.0)
    }

    pub fn mode(&self) -> Result<&(f64, FeFunction)> {
        self.eigenpair
            .as_ref()
            .ok_or_else(|| Error::invalid("level was built without its lowest eigenpair"))
    }

    /// Forcing sequence `f_h^0..f_h^N` on `pair` (the level's own space or its
    /// reference space), multiplied by `scale`.
    pub fn forcing(&self, cfg: &ExperimentConfig, pair: &AssembledPair, n_final: usize, tau: f64, scale: f64) -> Result<Vec<FeFunction>> {
        let space = pair.space();
        (0..=n_final)
            .map(|n| {
                let t = n as f64 * tau;
                match cfg.forcing {
                    ForcingKind::Zero => Ok(FeFunction::zeros(space.clone())),
                    ForcingKind::Smooth => l2_project(pair, |x| scale * smooth_time(t) * smooth_space(x)),
                    ForcingKind::Modal => {
                        let phi = &self.mode()?.1;
                        pair.check_space(phi)?;
                        Ok(phi.scaled(scale * modal_time(t, cfg.final_time)))
                    }
                    ForcingKind::Random => {
                        let f = self
                            .random
                            .get(n)
                            .ok_or_else(|| Error::invalid("random forcing shorter than the run"))?;
                        pair.check_space(f)?;
                        Ok(f.scaled(scale))
                    }
                }
            })
            .collect()
    }

    /// Starting values `u^0..u^{k-1}` on `pair`.
    pub fn starts(&self, cfg: &ExperimentConfig, pair: &AssembledPair, k: usize, scale: f64) -> Result<Vec<FeFunction>> {
        match cfg.start {
            StartPolicy::Zero => Ok(vec![FeFunction::zeros(pair.space().clone()); k]),
            StartPolicy::Projected => {
                let u0 = l2_project(pair, |x| scale * start_profile(x))?;
                Ok(vec![u0; k])
            }
        }
    }
}

fn domain_mesh(domain: DomainTag, n: usize) -> Result<Mesh> {
    Ok(match domain {
        DomainTag::Square => generate_square_mesh(n)?,
        DomainTag::Lshape => generate_lshape_mesh(n)?,
        DomainTag::Custom => return Err(Error::Config("experiments need a built-in domain".into())),
    })
}

fn needs_eigenpair(cfg: &ExperimentConfig) -> bool {
    cfg.forcing == ForcingKind::Modal
        || cfg.experiment == ExperimentKind::Decay
        || (cfg.oracle && matches!(cfg.experiment, ExperimentKind::Maxreg | ExperimentKind::W1q))
}

fn needs_reference(cfg: &ExperimentConfig) -> bool {
    matches!(cfg.experiment, ExperimentKind::Error | ExperimentKind::Linfty)
}

/// Longest run any cell of `level` performs.
pub(crate) fn max_steps(cfg: &ExperimentConfig, level: usize) -> usize {
    cfg.ks.iter().map(|&k| cfg.time_steps(level, k).0).max().unwrap_or(0)
}

fn build_level(cfg: &ExperimentConfig, coeff: &CoefficientField, index: usize) -> Result<Level> {
    let mesh_n = cfg.mesh_n(index);
    let mesh = Arc::new(domain_mesh(cfg.domain, mesh_n)?);
    let h = mesh_size(&mesh);
    let quasi_uniformity = quasi_uniformity_ratio(&mesh)?;
    let space = FeSpace::new(mesh.clone(), cfg.degree)?;
    let pair = assemble(&space, coeff)?;

    let reference = if needs_reference(cfg) {
        let (fine_mesh, ancestors) = refine_levels(&mesh, cfg.reference_refinements)?;
        let fine_h = mesh_size(&fine_mesh);
        let fine_space = FeSpace::new(Arc::new(fine_mesh), cfg.degree)?;
        let fine = assemble(&fine_space, coeff)?;
        let transfer = GridTransfer::new(&pair, &fine, &ancestors)?;
        Some(Reference {
            pair: fine,
            transfer,
            h: fine_h,
        })
    } else {
        None
    };

    let eigenpair = if needs_eigenpair(cfg) { Some(lowest_eigenpair(&pair)?) } else { None };

    let random = if cfg.forcing == ForcingKind::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        (0..=max_steps(cfg, index))
            .map(|_| {
                let c: Vec<f64> = (0..pair.num_dofs()).map(|_| StandardNormal.sample(&mut rng)).collect();
                FeFunction::new(space.clone(), c)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    Ok(Level {
        index,
        mesh_n,
        h,
        quasi_uniformity,
        pair,
        reference,
        eigenpair,
        random,
    })
}

pub(crate) fn build_levels(cfg: &ExperimentConfig) -> Result<Vec<Level>> {
    let coeff = cfg.coefficient_field()?;
    par::map_range(cfg.levels, |l| build_level(cfg, &coeff, l)).into_iter().collect()
}
