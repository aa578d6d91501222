//! Subcommand implementations. Each writes one or two CSV files into the
//! output directory, headed by the `# config: ` line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use elasto_core::bie::solve_dirichlet;
use elasto_core::experiments::{stability_sweep, write_records_csv};
use elasto_core::farfield::{default_fd_step, far_field, fmt_f64, helmholtz_decompose, write_farfield_csv};
use elasto_core::geometry::{area_symmetric_difference, closeness_check, distances, AreaMethod};
use elasto_core::lab::verify_suite;

use crate::config::RunConfig;
use crate::{Command, Failure};

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(&cfg.output).map_err(|e| io_failure(&cfg.output, e))?;
    match cmd {
        Command::Solve => solve(cfg),
        Command::Farfield => farfield(cfg),
        Command::Sweep => sweep(cfg),
        Command::Verify => verify(cfg),
        Command::Distances => distance_report(cfg),
    }
}

fn io_failure(p: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(format!("{}: {e}", p.display()))
}

fn create(cfg: &RunConfig, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    let p = cfg.output.join(name);
    let f = File::create(&p).map_err(|e| io_failure(&p, e))?;
    Ok((p, BufWriter::new(f)))
}

/// Two-column `quantity,value` report.
fn write_table(cfg: &RunConfig, name: &str, header: [&str; 2], rows: &[(String, String)]) -> Result<PathBuf, Failure> {
    let (p, mut out) = create(cfg, name)?;
    writeln!(out, "# {}", cfg.header_line()).map_err(|e| io_failure(&p, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| io_failure(&p, e))?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(|e| io_failure(&p, e))?;
    }
    w.flush().map_err(|e| io_failure(&p, e))?;
    Ok(p)
}

fn solve(cfg: &RunConfig) -> Result<(), Failure> {
    let wave = cfg.incident.wave()?;
    let sol = solve_dirichlet(&cfg.medium, &cfg.geometry.curve, &wave, cfg.discretization.n)?;
    let density_max = sol.density.iter().map(|f| (f[0].norm_sqr() + f[1].norm_sqr()).sqrt()).fold(0.0, f64::max);
    // Helmholtz decomposition at a probe on the boundary of B_{R+1}.
    let x = [cfg.geometry.regularity.big_r + 1.0, 0.0];
    let h = cfg.discretization.fd_step.unwrap_or_else(|| default_fd_step(&cfg.medium));
    let field = |p: [f64; 2]| sol.evaluate_field(p).unwrap_or([f64::NAN.into(); 2]);
    let u = sol.evaluate_field(x)?;
    let dec = helmholtz_decompose(&field, &cfg.medium, x, h, sol.curve().distance_to(x))?;
    let gap = (0..2).map(|i| (u[i] - dec.u_p[i] - dec.u_s[i]).norm_sqr()).sum::<f64>().sqrt();
    let rows = vec![
        ("n".to_string(), sol.n().to_string()),
        ("eta".to_string(), fmt_f64(sol.eta)),
        ("condition".to_string(), fmt_f64(sol.condition)),
        ("residual".to_string(), fmt_f64(sol.residual)),
        ("density_max".to_string(), fmt_f64(density_max)),
        ("fd_step".to_string(), fmt_f64(h)),
        ("decomposition_gap".to_string(), fmt_f64(gap)),
    ];
    let p = write_table(cfg, "solve.csv", ["quantity", "value"], &rows)?;
    println!(
        "residual={} condition={} density_max={} -> {}",
        fmt_f64(sol.residual),
        fmt_f64(sol.condition),
        fmt_f64(density_max),
        p.display()
    );
    Ok(())
}

fn farfield(cfg: &RunConfig) -> Result<(), Failure> {
    let wave = cfg.incident.wave()?;
    let sol = solve_dirichlet(&cfg.medium, &cfg.geometry.curve, &wave, cfg.discretization.n)?;
    let ff = far_field(&sol, cfg.discretization.directions)?;
    let (p, out) = create(cfg, "farfield.csv")?;
    write_farfield_csv(&ff, &[cfg.header_line()], out)?;
    println!("{} directions, residual={} -> {}", ff.len(), fmt_f64(sol.residual), p.display());
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let wave = cfg.incident.wave()?;
    let res = stability_sweep(&cfg.sweep_spec(), &cfg.geometry.regularity, &cfg.medium, &wave)?;
    let (p, out) = create(cfg, "sweep.csv")?;
    write_records_csv(&res.records, &[cfg.header_line()], out)?;
    let mut rows = Vec::new();
    match (&res.fit, &res.fit_error) {
        (Some(f), _) => {
            rows.push(("c_fit".to_string(), fmt_f64(f.c)));
            rows.push(("beta_fit".to_string(), fmt_f64(f.beta)));
            rows.push(("residual".to_string(), fmt_f64(f.residual)));
            rows.push(("used".to_string(), f.used.to_string()));
            rows.push(("degenerate".to_string(), f.degenerate.to_string()));
        }
        (None, Some(e)) => rows.push(("fit_error".to_string(), e.to_string())),
        (None, None) => {}
    }
    write_table(cfg, "fit.csv", ["quantity", "value"], &rows)?;
    println!("{} records -> {}", res.records.len(), p.display());
    if let Some(e) = res.failure {
        return Err(Failure::Numerical(format!("sweep aborted after {} records: {e}", res.records.len())));
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let kp = cfg.medium.wavenumbers().omega_p;
    let rows = verify_suite(kp, cfg.verify.random_draws, cfg.verify.korn_draws)?;
    let (p, mut out) = create(cfg, "verify.csv")?;
    writeln!(out, "# {}", cfg.header_line()).map_err(|e| io_failure(&p, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check_name", "lhs", "rhs", "holds"]).map_err(|e| io_failure(&p, e))?;
    for r in &rows {
        w.write_record([r.check_name.clone(), fmt_f64(r.lhs), fmt_f64(r.rhs), r.holds.to_string()]).map_err(|e| io_failure(&p, e))?;
    }
    w.flush().map_err(|e| io_failure(&p, e))?;
    let failed = rows.iter().filter(|r| !r.holds).count();
    println!("{} checks, {failed} failed -> {}", rows.len(), p.display());
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} inequality checks failed")));
    }
    Ok(())
}

fn distance_report(cfg: &RunConfig) -> Result<(), Failure> {
    let (k, k2) = (&cfg.geometry.curve, &cfg.geometry.other);
    let d = distances(k, k2, cfg.discretization.distance_samples)?;
    let area = area_symmetric_difference(k, k2, AreaMethod::Quadrature)?.value;
    let ok = closeness_check(area, &cfg.geometry.regularity, &cfg.medium, 2)?;
    let rows = vec![
        ("d".to_string(), fmt_f64(d.d)),
        ("d_hat".to_string(), fmt_f64(d.d_hat)),
        ("d_tilde".to_string(), fmt_f64(d.d_tilde)),
        ("sym_diff_area".to_string(), fmt_f64(area)),
        ("closeness_ok".to_string(), ok.to_string()),
    ];
    let p = write_table(cfg, "distances.csv", ["quantity", "value"], &rows)?;
    println!("d={} d_hat={} d_tilde={} -> {}", fmt_f64(d.d), fmt_f64(d.d_hat), fmt_f64(d.d_tilde), p.display());
    Ok(())
}
