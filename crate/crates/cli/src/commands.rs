use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use maxreg_core::bdf::{bdf_coefficients, stability_angle, REFERENCE_ANGLES};
use maxreg_core::harness::{plan, run_experiment};
use maxreg_core::mesh::{
    generate_lshape_mesh, generate_square_mesh, load_mesh, mesh_size, quasi_uniformity_ratio, refine_levels, write_mesh,
    Mesh,
};
use maxreg_core::{Error, Result};

use crate::config::{format_exponents, CliConfig};
use crate::probe::run_probe;
use crate::{Command, DomainArg, MeshCommand, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

/// Exit status for an error escaping a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Hypothesis(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn emit_mesh(mesh: &Mesh, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            write_mesh(mesh, &mut buf)?;
            std::fs::write(p, buf)?;
        }
        None => write_mesh(mesh, stdout)?,
    }
    Ok(())
}

pub fn cmd_mesh(cmd: &MeshCommand, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        MeshCommand::Gen { domain, n, out } => {
            let mesh = match domain {
                DomainArg::Square => generate_square_mesh(*n),
                DomainArg::Lshape => generate_lshape_mesh(*n),
            }
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            emit_mesh(&mesh, out.as_deref(), stdout)?;
        }
        MeshCommand::Refine { input, levels, out } => {
            let mesh = load_mesh(input)?;
            let (fine, _) = refine_levels(&mesh, *levels)?;
            emit_mesh(&fine, out.as_deref(), stdout)?;
        }
        MeshCommand::Check { input } => {
            let mesh = load_mesh(input).map_err(|e| Error::InvalidArgument(format!("{}: {e}", input.display())))?;
            writeln!(
                stdout,
                "ok: {} vertices, {} triangles, domain {}, h = {:.6e}, area = {:.12}, quasi-uniformity = {:.4}",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.domain(),
                mesh_size(&mesh),
                mesh.total_area(),
                quasi_uniformity_ratio(&mesh)?
            )?;
        }
    }
    Ok(EXIT_PASS)
}

pub fn cmd_bdf_angles(samples: usize, stdout: &mut dyn Write) -> Result<i32> {
    writeln!(stdout, "k  alpha/pi  reference/pi  delta_0..delta_k")?;
    for k in 1..=6 {
        let scheme = bdf_coefficients(k)?;
        let alpha = stability_angle(k, samples)? / PI;
        let delta: Vec<String> = scheme.delta().iter().map(|r| r.to_string()).collect();
        writeln!(stdout, "{k}  {alpha:.4}    {:.3}         {}", REFERENCE_ANGLES[k - 1], delta.join(", "))?;
    }
    Ok(EXIT_PASS)
}

pub fn cmd_run(config: &Path, dry_run: bool, out_dir: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let cli = CliConfig::load(config)?;
    let cfg = cli.experiment_config();
    if dry_run {
        let cells = plan(&cfg)?;
        writeln!(
            stdout,
            "# {} on {} ({}), r = {}, p = {}, q = {}: {} cells",
            cfg.experiment,
            cfg.domain,
            cfg.coefficient,
            cfg.degree,
            format_exponents(&cfg.ps),
            format_exponents(&cfg.qs),
            cells.len()
        )?;
        for c in cells {
            writeln!(stdout, "{c}")?;
        }
        return Ok(EXIT_PASS);
    }
    let report = run_experiment(&cfg)?;
    let dir: PathBuf = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cli.out_dir.clone());
    let (csv, json) = report.save(&dir, &cli.stem(cfg.experiment.as_str()))?;
    for r in report.failures() {
        writeln!(
            stdout,
            "{} {}: level={} k={} p={} q={} ratio={:e} {}",
            r.verdict,
            r.experiment,
            r.level,
            r.k,
            r.p.map(maxreg_core::norms::format_exponent).unwrap_or_else(|| "-".into()),
            maxreg_core::norms::format_exponent(r.q),
            r.ratio,
            r.note
        )?;
    }
    let passed = report.passed();
    writeln!(
        stdout,
        "{}: {} of {} cells pass; wrote {} and {}",
        if passed { "PASS" } else { "FAIL" },
        report.records.len() - report.failures().count(),
        report.records.len(),
        csv.display(),
        json.display()
    )?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_probe(config: &Path, out_dir: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let cli = CliConfig::load(config)?;
    let report = run_probe(&cli.probe_config())?;
    let dir: PathBuf = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cli.out_dir.clone());
    let paths = report.save(&dir, &cli.stem("probe"))?;
    for r in report.records.iter().filter(|r| r.check != "envelope") {
        writeln!(
            stdout,
            "{} {} level={} theta={:.4}pi q={} value={:e} reference={:e}",
            r.verdict,
            r.check,
            r.level,
            r.theta / PI,
            maxreg_core::norms::format_exponent(r.q),
            r.value,
            r.reference
        )?;
    }
    let passed = report.passed();
    let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    writeln!(stdout, "{}: wrote {}", if passed { "PASS" } else { "FAIL" }, names.join(", "))?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Dispatch one parsed command.
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Mesh(m) => cmd_mesh(m, stdout),
        Command::BdfAngles { samples } => cmd_bdf_angles(*samples, stdout),
        Command::Run {
            config,
            dry_run,
            out_dir,
        } => cmd_run(config, *dry_run, out_dir.as_deref(), stdout),
        Command::Probe { config, out_dir } => cmd_probe(config, out_dir.as_deref(), stdout),
    }
}
