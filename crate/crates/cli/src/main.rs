//! Benchmark CLI: single runs with observable time series, convergence
//! ladders, regime sweeps, long-time error evolution, commutator checks,
//! and the named table presets.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::str::FromStr;
use tsdirac::harness::study::{comparison_study, regime_sweep};
use tsdirac::harness::{
    long_time_study, run_single, table_preset, Axis, ReferenceStore, Regime, ReportFormat,
    RunConfig, StudyReport, TableSpec,
};
use tsdirac::scheme::SchemeId;

#[derive(Parser)]
#[command(
    name = "tsdirac",
    about = "Time-splitting Fourier pseudospectral solvers for the 1D/2D Dirac equation",
    version
)]
struct Cli {
    /// Directory for cached reference solutions
    #[arg(long, global = true, default_value = "refcache")]
    cache_dir: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Include wall-clock columns in CSV output
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in base setup when no config file is given
    #[arg(long, default_value = "paper-1d")]
    setup: String,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Modes per dimension (even)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// Potential preset: zero | paper-1d | honeycomb-2d | constant(V0,A...)
    #[arg(long)]
    potential: Option<String>,
    /// Initial data preset: gaussian-1d | gaussian-2d | wkb-1d
    #[arg(long)]
    initial: Option<String>,
    /// Reference policy: generate | load | analytic
    #[arg(long)]
    ref_policy: Option<String>,
    #[arg(long)]
    ref_m: Option<usize>,
    #[arg(long)]
    ref_tau: Option<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => match self.setup.as_str() {
                "paper-1d" => RunConfig::paper_1d(),
                "honeycomb-2d" => RunConfig::honeycomb_2d(),
                other => bail!("unknown setup '{other}' (paper-1d | honeycomb-2d)"),
            },
        };
        if let Some(s) = &self.scheme {
            cfg.scheme.id = SchemeId::from_str(s)?;
        }
        if let Some(t) = &self.tau {
            cfg.scheme.tau = parse_number(t)?;
        }
        if let Some(t) = self.t_final {
            cfg.scheme.t_final = t;
        }
        if let Some(m) = self.m {
            cfg.grid.m = m;
        }
        if let Some(v) = self.epsilon {
            cfg.params.epsilon = v;
        }
        if let Some(v) = self.delta {
            cfg.params.delta = v;
        }
        if let Some(v) = self.nu {
            cfg.params.nu = v;
        }
        if let Some(p) = &self.potential {
            cfg.potential.preset = p.clone();
        }
        if let Some(i) = &self.initial {
            cfg.initial.preset = i.clone();
        }
        if let Some(p) = &self.ref_policy {
            cfg.study.reference.policy = p.clone();
        }
        if let Some(m) = self.ref_m {
            cfg.study.reference.m = Some(m);
        }
        if let Some(t) = &self.ref_tau {
            cfg.study.reference.tau = Some(parse_number(t)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve a single configuration and emit the observable time series
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Convergence study along one axis against a fine reference
    Converge {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// space | time
        #[arg(long)]
        axis: String,
        /// Dyadic ladder of h or tau values, e.g. "1/2,1/4,1/8"
        #[arg(long)]
        ladder: String,
        /// Comma-separated schemes (defaults to the config's scheme)
        #[arg(long)]
        schemes: Option<String>,
    },
    /// Parameter-regime resolution sweep
    Regime {
        /// nr | sc | nrml
        #[arg(long)]
        regime: String,
        /// space | time (space only for the semiclassical regime)
        #[arg(long, default_value = "time")]
        axis: String,
        /// Regime parameter ladder, e.g. "1,1/2,1/4"
        #[arg(long, default_value = "1,1/2,1/4")]
        params: String,
        /// h or tau ladder; a regime-appropriate default is used if omitted
        #[arg(long)]
        ladder: Option<String>,
    },
    /// Long-time error evolution for several schemes
    Longtime {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated schemes
        #[arg(long, default_value = "S1,S2,S4,S4RK,S4c")]
        schemes: String,
        /// Error sampling interval in time units
        #[arg(long, default_value_t = 0.5)]
        sample_dt: f64,
    },
    /// Verify the closed-form double commutator against the brute force
    CommutatorCheck {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// 2 or 4 component representation
        #[arg(long, default_value_t = 2)]
        rep: usize,
        /// Grid modes for the field-level check (dims 1 and 2)
        #[arg(long, default_value_t = 128)]
        m: usize,
        /// Random points for the symbol-level check (dim 3)
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Named presets reproducing the reference tables (table2..table13)
    Table {
        name: String,
        /// full reproduces the original protocol; desk shrinks it
        #[arg(long, default_value = "full")]
        scale: String,
    },
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse()?;
        let d: f64 = den.trim().parse()?;
        if d == 0.0 {
            bail!("division by zero in '{s}'");
        }
        return Ok(n / d);
    }
    Ok(s.parse()?)
}

fn parse_ladder(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect::<Result<Vec<f64>>>()
}

fn parse_schemes(s: &str) -> Result<Vec<SchemeId>> {
    s.split(',')
        .map(|t| SchemeId::from_str(t.trim()).map_err(Into::into))
        .collect()
}

fn emit_report(cli: &Cli, report: &StudyReport) -> Result<()> {
    let format = ReportFormat::from_str(&cli.format)?;
    match &cli.out {
        Some(path) => {
            report.write(path, format, cli.timings)?;
            eprintln!("wrote {}", path.display());
        }
        None => match format {
            ReportFormat::Csv => print!("{}", report.to_csv_string(cli.timings)?),
            ReportFormat::Json => println!("{}", report.to_json()),
        },
    }
    Ok(())
}

fn emit_text(cli: &Cli, text: String) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn default_regime_ladder(regime: Regime, axis: Axis) -> Vec<f64> {
    match (regime, axis) {
        (Regime::Nonrelativistic, Axis::Time) => (0..6).map(|k| 0.25f64.powi(k)).collect(),
        (_, Axis::Time) => (0..7).map(|k| 0.5f64.powi(k)).collect(),
        (_, Axis::Space) => (0..7).map(|k| 0.5f64.powi(k)).collect(),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let store = ReferenceStore::new(&cli.cache_dir)?;
    match &cli.cmd {
        Cmd::Run { cfg } => {
            let cfg = cfg.build()?;
            let out = run_single(&cfg)?;
            let mut text = String::from("t,mass,energy\n");
            for r in &out.records {
                text.push_str(&format!("{},{:.12e},{:.12e}\n", r.t, r.mass, r.energy));
            }
            eprintln!(
                "{} steps, setup {:.3}s, step loop {:.3}s (config {})",
                out.steps,
                out.setup_s,
                out.wall_s,
                cfg.hash()
            );
            emit_text(&cli, text)?;
        }
        Cmd::Converge {
            cfg,
            axis,
            ladder,
            schemes,
        } => {
            let cfg = cfg.build()?;
            let axis = Axis::from_str(axis)?;
            let ladder = parse_ladder(ladder)?;
            let schemes = match schemes {
                Some(s) => parse_schemes(s)?,
                None => vec![cfg.scheme.id],
            };
            let report = comparison_study(&cfg, axis, &ladder, &schemes, &store)?;
            emit_report(&cli, &report)?;
        }
        Cmd::Regime {
            regime,
            axis,
            params,
            ladder,
        } => {
            let regime = Regime::from_str(regime)?;
            let axis = Axis::from_str(axis)?;
            let params = parse_ladder(params)?;
            let ladder = match ladder {
                Some(s) => parse_ladder(s)?,
                None => default_regime_ladder(regime, axis),
            };
            let report = regime_sweep(regime, axis, &params, &ladder, &store)?;
            emit_report(&cli, &report)?;
        }
        Cmd::Longtime {
            cfg,
            schemes,
            sample_dt,
        } => {
            let mut cfg = cfg.build()?;
            if cfg.study.reference.tau.is_none() {
                cfg.study.reference.tau = Some(cfg.scheme.tau / 50.0);
            }
            let schemes = parse_schemes(schemes)?;
            let report = long_time_study(&cfg, &schemes, *sample_dt, &store)?;
            match ReportFormat::from_str(&cli.format)? {
                ReportFormat::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    emit_text(&cli, String::from_utf8(buf)?)?;
                }
                ReportFormat::Json => emit_text(&cli, report.to_json())?,
            }
        }
        Cmd::CommutatorCheck {
            dim,
            rep,
            m,
            points,
            seed,
        } => {
            let text = commutator_check(*dim, *rep, *m, *points, *seed)?;
            emit_text(&cli, text)?;
        }
        Cmd::Table { name, scale } => {
            let desk = match scale.as_str() {
                "full" => false,
                "desk" => true,
                other => bail!("unknown scale '{other}' (full | desk)"),
            };
            match table_preset(name, desk)? {
                TableSpec::Comparison {
                    title,
                    base,
                    axis,
                    ladder,
                    schemes,
                } => {
                    eprintln!("running {title} ({} ladder points)", ladder.len());
                    let mut report = comparison_study(&base, axis, &ladder, &schemes, &store)?;
                    report.title = title;
                    emit_report(&cli, &report)?;
                }
                TableSpec::Regime {
                    title,
                    regime,
                    axis,
                    params,
                    ladder,
                } => {
                    eprintln!(
                        "running {title} ({} parameter values x {} ladder points)",
                        params.len(),
                        ladder.len()
                    );
                    let mut report = regime_sweep(regime, axis, &params, &ladder, &store)?;
                    report.title = title;
                    emit_report(&cli, &report)?;
                }
            }
        }
    }
    Ok(())
}

fn commutator_check(dim: usize, rep: usize, m: usize, points: usize, seed: u64) -> Result<String> {
    use tsdirac::commutator::*;
    use tsdirac::model::{matrix_constants_defect, PhysParams, PotentialSpec};

    if !matches!(rep, 2 | 4) {
        bail!("--rep must be 2 or 4");
    }
    if rep == 2 && dim == 3 {
        bail!("the two-component model exists in 1D and 2D only; use --rep 4 for dim 3");
    }
    let params = PhysParams::classical();
    let mut out = String::new();
    out.push_str(&format!(
        "matrix algebra defect: {:.1e}\n",
        matrix_constants_defect()
    ));

    match dim {
        1 | 2 => {
            let (a, b) = if dim == 1 { (-8.0, 8.0) } else { (-8.0, 8.0) };
            let grid = tsdirac::build_grid(a, b, m, dim)?;
            let spec = if dim == 1 {
                PotentialSpec::paper_1d()
            } else {
                periodic_2d(a, b)
            };
            let samples = tsdirac::sample_potentials(&spec, &grid)?;
            let mut worst = 0.0f64;
            for s in 0..5u64 {
                let rel = if rep == 2 {
                    let f = localized_field::<2>(&grid, seed + s, m / 16);
                    let brute = brute_force_commutator_2c(&samples, &params, &f)?;
                    let cf = closed_form_commutator_2c(&samples, &params)?;
                    apply_commutator(&cf, &f)?.l2_distance(&brute)? / brute.l2_norm()
                } else {
                    let f = localized_field::<4>(&grid, seed + s, m / 16);
                    let brute = brute_force_commutator_4c(&samples, &params, &f)?;
                    let cf = closed_form_commutator_4c(&samples, &params)?;
                    apply_commutator(&cf, &f)?.l2_distance(&brute)? / brute.l2_norm()
                };
                worst = worst.max(rel);
            }
            out.push_str(&format!(
                "dim {dim}, {rep}-component, M = {m}: field-level closed vs brute residual {worst:.3e}\n"
            ));
            let pass = worst < 1e-7;
            out.push_str(if pass {
                "PASS (tolerance 1e-7)\n"
            } else {
                "FAIL (tolerance 1e-7)\n"
            });
            if !pass {
                bail!("commutator check failed");
            }
        }
        3 => {
            let mut rng_state = seed;
            let mut next = move || {
                // xorshift, enough for sampling test points
                rng_state ^= rng_state << 13;
                rng_state ^= rng_state >> 7;
                rng_state ^= rng_state << 17;
                (rng_state as f64 / u64::MAX as f64) * 2.0 - 1.0
            };
            let mut worst = 0.0f64;
            for _ in 0..points {
                let x = [next(), next(), next()];
                let k = [5.0 * next(), 5.0 * next(), 5.0 * next()];
                let pt = PotentialPoint {
                    v: x[0].sin() * x[1].cos() + x[2],
                    a: [
                        x[0].cos() * x[1],
                        (x[1] + 2.0 * x[2]).sin(),
                        x[0] * x[2] + 0.3,
                    ],
                    dv: [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin(), 1.0],
                    da: [
                        [-x[0].sin() * x[1], x[0].cos(), 0.0],
                        [
                            0.0,
                            (x[1] + 2.0 * x[2]).cos(),
                            2.0 * (x[1] + 2.0 * x[2]).cos(),
                        ],
                        [x[2], 0.0, x[0]],
                    ],
                };
                let brute = brute_force_symbol_4c(&pt, &params, 3, &k);
                let closed = closed_form_symbol_4c(&pt, &params, 3, &k)?;
                worst = worst.max(brute.max_abs_diff(&closed) / brute.max_abs().max(1.0));
            }
            out.push_str(&format!(
                "dim 3, 4-component, {points} random (x,k) points: symbol-level defect {worst:.3e}\n"
            ));
            let pass = worst < 1e-12;
            out.push_str(if pass {
                "PASS (tolerance 1e-12)\n"
            } else {
                "FAIL (tolerance 1e-12)\n"
            });
            if !pass {
                bail!("commutator check failed");
            }
        }
        other => bail!("--dim must be 1, 2, or 3 (got {other})"),
    }
    Ok(out)
}

/// Smooth periodic 2D potential with nonzero magnetic components.
fn periodic_2d(a: f64, b: f64) -> tsdirac::PotentialSpec {
    use std::sync::Arc;
    let w0 = 2.0 * std::f64::consts::PI / (b - a);
    tsdirac::PotentialSpec::new(
        2,
        Arc::new(move |x: &[f64]| (w0 * x[0]).sin() * (2.0 * w0 * x[1]).cos()),
        vec![
            Arc::new(move |x: &[f64]| (w0 * x[0]).cos() * (w0 * x[1]).cos()),
            Arc::new(move |x: &[f64]| (2.0 * w0 * x[0]).sin()),
        ],
        Some(vec![
            Arc::new(move |x: &[f64]| w0 * (w0 * x[0]).cos() * (2.0 * w0 * x[1]).cos()),
            Arc::new(move |x: &[f64]| -2.0 * w0 * (w0 * x[0]).sin() * (2.0 * w0 * x[1]).sin()),
        ]),
        Some(vec![
            vec![
                Arc::new(move |x: &[f64]| -w0 * (w0 * x[0]).sin() * (w0 * x[1]).cos()),
                Arc::new(move |x: &[f64]| -w0 * (w0 * x[0]).cos() * (w0 * x[1]).sin()),
            ],
            vec![
                Arc::new(move |x: &[f64]| 2.0 * w0 * (2.0 * w0 * x[0]).cos()),
                Arc::new(move |_: &[f64]| 0.0),
            ],
        ]),
    )
    .expect("periodic 2d potential")
}

/// Band-limited random field with a Gaussian envelope.
fn localized_field<const N: usize>(
    grid: &std::sync::Arc<tsdirac::Grid>,
    seed: u64,
    band: usize,
) -> tsdirac::MultiField<N> {
    use tsdirac::grid::{dft_inverse, MultiSpectral};
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    let mut hat = MultiSpectral::<N>::zeros(grid.clone());
    let m = grid.m;
    for c in 0..N {
        for idx in 0..grid.node_count() {
            let (l1, l2) = match grid.dim {
                1 => (grid.mode(idx).unsigned_abs() as usize, 0),
                _ => (
                    grid.mode(idx / m).unsigned_abs() as usize,
                    grid.mode(idx % m).unsigned_abs() as usize,
                ),
            };
            if l1 <= band && l2 <= band {
                let decay = (-((l1 * l1 + l2 * l2) as f64) / band.max(1) as f64).exp();
                hat.coeffs[c][idx] = tsdirac::C64::new(next(), next()) * decay;
            }
        }
    }
    let mut f = dft_inverse(&hat);
    let center = 0.5 * (grid.a + grid.b);
    let width = (grid.b - grid.a) / 16.0;
    for c in 0..N {
        for idx in 0..grid.node_count() {
            let x = grid.coords(idx);
            let mut r2 = (x[0] - center) * (x[0] - center);
            if grid.dim == 2 {
                r2 += (x[1] - center) * (x[1] - center);
            }
            f.comps[c][idx] *= (-r2 / (2.0 * width * width)).exp();
        }
    }
    f
}
