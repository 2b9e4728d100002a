//! Command-line front end: subcommands, artifact writing and error records.

use std::env;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{parse_config, CouplingSeries, ExperimentKind, RunConfig};
use crate::coupling::PairGeometry;
use crate::dynamics::{propagate, AnnealResult};
use crate::error::{Error, Result};
use crate::experiments::{
    self, coupling_scan, field_range_scan, log_grid, scan_constant, scaling_study, stack_3d_parameters,
    two_qubit_trace, Family, ScanSpec, StackShape, SweptConstant,
};
use crate::lattice::{effective_ising, IsingModel, LatticeConfig};
use crate::molecule::{find_avoided_crossing, track_spectrum, MoleculeModel};
use crate::output::{Cell, OutputDir, Table};
use crate::sector::spin_string;
use crate::svg::{emit_svg, Plot, PlotKind};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "MOLQA_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "molqa", version, about = "Molecular quantum-annealing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// no-op: every computation is deterministic and uses no random numbers
    #[arg(long)]
    pub seedless: bool,
    /// include the 3x3 lattice in scaling runs
    #[arg(long = "opt-in-3x3")]
    pub opt_in_3x3: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fine-structure levels against electric field
    Spectrum(Common),
    /// Pair couplings against electric field, or across magnetic fields
    Couplings(Common),
    /// Working fields and couplings across a molecular constant
    Scan(Common),
    /// Annealing dynamics of a qubit lattice
    Anneal(Common),
    /// Success and leakage probabilities against lattice size
    Scale(Common),
    /// Ising parameters of stacked 2D layers
    Stack3d(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Couplings(_) => "couplings",
            Command::Scan(_) => "scan",
            Command::Anneal(_) => "anneal",
            Command::Scale(_) => "scale",
            Command::Stack3d(_) => "stack3d",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c)
            | Command::Couplings(c)
            | Command::Scan(c)
            | Command::Anneal(c)
            | Command::Scale(c)
            | Command::Stack3d(c) => c,
        }
    }

    fn default_kind(&self) -> ExperimentKind {
        match self {
            Command::Spectrum(_) => ExperimentKind::Spectrum,
            Command::Couplings(_) => ExperimentKind::Couplings,
            Command::Scan(_) => ExperimentKind::Scan,
            Command::Anneal(_) => ExperimentKind::TwoQubit,
            Command::Scale(_) => ExperimentKind::Scaling,
            Command::Stack3d(_) => ExperimentKind::Stack3d,
        }
    }
}

/// Machine-readable error record printed on stderr.
pub fn error_record(command: &str, err: &Error) -> String {
    json!({
        "status": "error",
        "command": command,
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    })
    .to_string()
}

/// Loads the configuration for `command`, applying flag overrides.
pub fn load_config(command: &Command) -> Result<RunConfig> {
    let common = command.common();
    let mut cfg = match &common.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::minimal(command.default_kind()),
    };
    if cfg.experiment.subcommand() != command.name() {
        return Err(Error::Config(format!(
            "experiment {:?} is run by `{}`, not `{}`",
            cfg.experiment.name(),
            cfg.experiment.subcommand(),
            command.name()
        )));
    }
    if common.opt_in_3x3 {
        cfg.scaling.opt_in_3x3 = Some(true);
    }
    Ok(cfg)
}

/// Output directory: `--out`, then the environment, then the config.
pub fn output_root(command: &Command, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = &command.common().out {
        return p.clone();
    }
    if let Ok(p) = env::var(OUT_DIR_ENV) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    match &cfg.output_dir {
        Some(p) => PathBuf::from(p),
        None => Path::new("out").join(cfg.experiment.name()),
    }
}

/// Runs a parsed command line and returns the list of written files.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let command = &cli.command;
    if let Some(n) = command.common().threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(command)?;
    let root = output_root(command, &cfg);
    run_config(command.name(), &cfg, &root)
}

/// Runs `cfg` and writes all artifacts plus the manifest below `root`.
pub fn run_config(command: &str, cfg: &RunConfig, root: &Path) -> Result<Vec<PathBuf>> {
    let resolved = cfg.resolved()?;
    let mut out = OutputDir::create(root)?;
    match resolved.experiment {
        ExperimentKind::Spectrum => spectrum(&resolved, &mut out)?,
        ExperimentKind::Couplings => couplings(&resolved, &mut out)?,
        ExperimentKind::FieldRange => field_range(&resolved, &mut out)?,
        ExperimentKind::Scan => scan(&resolved, &mut out)?,
        ExperimentKind::TwoQubit | ExperimentKind::Chain1d | ExperimentKind::Lattice2d | ExperimentKind::Anneal => {
            anneal(&resolved, &mut out)?
        }
        ExperimentKind::Scaling => scale(&resolved, &mut out)?,
        ExperimentKind::Stack3d => stack3d(&resolved, &mut out)?,
    }
    out.write_manifest(command, &resolved.to_json())?;
    Ok(out.written().to_vec())
}

fn write_plot(out: &mut OutputDir, name: &str, plot: &Plot, kind: PlotKind) -> Result<()> {
    out.write(name, &emit_svg(plot, kind)?)?;
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn column(t: &Table, name: &str) -> Vec<f64> {
    t.column(name)
        .expect("known column")
        .iter()
        .map(|c| c.as_f64().unwrap_or(f64::NAN))
        .collect()
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let model = cfg.model()?;
    let b = cfg.b_mt();
    let (lo, hi, n) = cfg.e_grid()?;
    let grid = linspace(lo, hi, n);
    let spec = track_spectrum(&model, b, &grid, cfg.n_states())?;

    let mut t = Table::new(&["E_kV_cm", "state_index", "label", "energy_Hz"]);
    for (p, &e) in grid.iter().enumerate() {
        for s in 0..spec.n_states() {
            let label = spec.label_of(s).map(|l| l.name()).unwrap_or("");
            t.push(vec![e.into(), s.into(), label.into(), spec.energies[p][s].into()]);
        }
    }
    out.write_table("spectrum.csv", &t)?;

    let mut plot = Plot::lines(
        &format!("{} levels at B = {b} mT", model.constants().name),
        "E (kV/cm)",
        "energy (Hz)",
        grid.clone(),
    );
    for s in 0..spec.n_states() {
        let name = match spec.label_of(s) {
            Some(l) => format!("state {s} ({})", l.name()),
            None => format!("state {s}"),
        };
        plot = plot.with(&name, spec.energies.iter().map(|row| row[s]).collect());
    }
    let mut crossing = Table::new(&["E_cross_kV_cm", "gap_Hz"]);
    if let Ok((e, gap)) = find_avoided_crossing(&model, b, (lo, hi)) {
        plot.markers.push(e);
        crossing.push(vec![e.into(), gap.into()]);
    }
    out.write_table("crossing.csv", &crossing)?;
    write_plot(out, "spectrum.svg", &plot, PlotKind::Lines)
}

/// Series of the coupling plot: the configured molecule plus extra series.
fn coupling_series(cfg: &RunConfig) -> Result<Vec<CouplingSeries>> {
    let mut series = Vec::new();
    let explicit_grid = cfg.fields.e_min.is_some() || cfg.fields.e_max.is_some();
    if explicit_grid || cfg.scan.series.is_none() {
        let (lo, hi, n) = cfg.e_grid()?;
        series.push(CouplingSeries {
            molecule: cfg.molecule.clone(),
            b_mt: cfg.b_mt(),
            e_min: lo,
            e_max: hi,
            e_points: n,
        });
    }
    series.extend(cfg.scan.series.iter().flatten().cloned());
    Ok(series)
}

fn couplings(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let (r, theta) = cfg.pair_geometry();
    let geom = PairGeometry::new(r, theta)?;
    let mut all = Table::new(&[
        "E_kV_cm", "B_mT", "R_nm", "theta_rad", "J_perp_Hz", "J_z_Hz", "W_Hz", "K_Hz", "V_Hz",
    ]);
    let mut plots = Vec::new();
    for s in coupling_series(cfg)? {
        let model = MoleculeModel::new(s.molecule.constants()?, cfg.n_max())?;
        let grid = linspace(s.e_min, s.e_max, s.e_points);
        let rows = coupling_scan(&model, s.b_mt, &grid, &geom)?;
        for row in &rows {
            let c = &row.couplings;
            all.push(vec![
                row.e_kv_cm.into(),
                row.b_mt.into(),
                row.r_nm.into(),
                row.theta.into(),
                c.j_perp.into(),
                c.j_z.into(),
                c.w.into(),
                c.k.into(),
                c.v.into(),
            ]);
        }
        let name = model.constants().name.clone();
        plots.push(
            Plot::lines(
                &format!("{name} pair couplings at B = {} mT, R = {r} nm", s.b_mt),
                "E (kV/cm)",
                "coupling (Hz)",
                grid,
            )
            .with("J_perp", rows.iter().map(|r| r.couplings.j_perp).collect())
            .with("J_z", rows.iter().map(|r| r.couplings.j_z).collect()),
        );
    }
    out.write_table("couplings.csv", &all)?;
    for (i, p) in plots.iter().enumerate() {
        write_plot(out, &format!("couplings_{i}.svg"), p, PlotKind::Lines)?;
    }
    Ok(())
}

fn field_range(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let model = cfg.model()?;
    let b_values = cfg.b_values();
    let r = cfg.field_range_r_nm();
    let rows = field_range_scan(&model, &b_values, r)?;
    let mut t = Table::new(&["B_mT", "E_cross_kV_cm", "E_perp_kV_cm", "E_z_kV_cm", "R_nm", "J_z_Hz"]);
    for row in &rows {
        let p = &row.point;
        t.push(vec![p.b_mt.into(), p.e_cross.into(), p.e_perp.into(), p.e_z.into(), r.into(), row.j_z.into()]);
    }
    out.write_table("field_range.csv", &t)?;
    let x = column(&t, "B_mT");
    write_plot(
        out,
        "field_range_couplings.svg",
        &Plot::lines(&format!("J_z at E_z, R = {r} nm"), "B (mT)", "J_z (Hz)", x.clone())
            .with("J_z", column(&t, "J_z_Hz")),
        PlotKind::Lines,
    )?;
    write_plot(
        out,
        "field_range_fields.svg",
        &Plot::lines("working fields", "B (mT)", "E (kV/cm)", x)
            .with("E_perp", column(&t, "E_perp_kV_cm"))
            .with("E_z", column(&t, "E_z_kV_cm")),
        PlotKind::Lines,
    )
}

fn scan(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let constant = cfg.scan.constant.unwrap_or(SweptConstant::Dipole);
    let values = match &cfg.scan.values {
        Some(v) => v.clone(),
        None => {
            let (lo, hi) = cfg.scan.window.map(|w| (w[0], w[1])).unwrap_or_else(|| constant.window());
            log_grid(lo, hi, cfg.scan.per_decade.unwrap_or(25))?
        }
    };
    let (r_nm, theta) = cfg.pair_geometry();
    let spec = ScanSpec {
        constant,
        values,
        b_mt: cfg.b_mt(),
        base: cfg.molecule.constants()?,
        r_nm,
        theta,
    };
    let rows = scan_constant(&spec)?;
    let name = constant.name();
    let mut t = Table::new(&[
        name,
        "E_cross_kV_cm",
        "E_perp_kV_cm",
        "E_z_kV_cm",
        "J_perp_at_E_perp_Hz",
        "J_z_at_E_z_Hz",
        "status",
    ]);
    for row in &rows {
        let (ec, ep, ez) = row.point.map(|p| (p.e_cross, p.e_perp, p.e_z)).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        t.push(vec![
            row.value.into(),
            ec.into(),
            ep.into(),
            ez.into(),
            row.j_perp_at_e_perp.into(),
            row.j_z_at_e_z.into(),
            row.error.clone().unwrap_or_else(|| "ok".into()).into(),
        ]);
    }
    out.write_table(&format!("scan_{}.csv", scan_file_stem(constant)), &t)?;
    let x = column(&t, name);
    write_plot(
        out,
        &format!("scan_{}_fields.svg", scan_file_stem(constant)),
        &Plot::lines("working fields", name, "E (kV/cm)", x.clone())
            .with("E_perp", column(&t, "E_perp_kV_cm"))
            .with("E_z", column(&t, "E_z_kV_cm")),
        PlotKind::Lines,
    )?;
    write_plot(
        out,
        &format!("scan_{}_couplings.svg", scan_file_stem(constant)),
        &Plot::lines(&format!("couplings at R = {r_nm} nm"), name, "coupling (Hz)", x)
            .with("J_perp at E_perp", column(&t, "J_perp_at_E_perp_Hz"))
            .with("J_z at E_z", column(&t, "J_z_at_E_z_Hz")),
        PlotKind::Lines,
    )
}

fn scan_file_stem(c: SweptConstant) -> &'static str {
    match c {
        SweptConstant::Dipole => "dipole",
        SweptConstant::RotationalConstant => "rotational_constant",
        SweptConstant::SpinRotation => "spin_rotation",
    }
}

fn ising_tables(ising: &IsingModel<f64>) -> (Table, Table) {
    let n = ising.h.len();
    let mut edges = Table::new(&["qubit_a", "qubit_b", "J_Hz"]);
    for a in 0..n {
        for b in a + 1..n {
            edges.push(vec![a.into(), b.into(), ising.j[(a, b)].into()]);
        }
    }
    let mut bias = Table::new(&["qubit", "h_Hz"]);
    for (a, &h) in ising.h.iter().enumerate() {
        bias.push(vec![a.into(), h.into()]);
    }
    (edges, bias)
}

fn write_ising(out: &mut OutputDir, ising: &IsingModel<f64>) -> Result<()> {
    let (edges, bias) = ising_tables(ising);
    out.write_table("ising_edges.csv", &edges)?;
    out.write_table("ising_bias.csv", &bias)?;
    Ok(())
}

fn time_tag(t_ms: f64) -> String {
    format!("T{t_ms}ms")
}

/// Largest number of individual invalid strings drawn in the histogram.
const MAX_SPLIT_INVALID: usize = 8;

fn write_anneal(out: &mut OutputDir, r: &AnnealResult<f64>, t_ms: f64, n_molecules: usize) -> Result<()> {
    let tag = time_tag(t_ms);
    let mut traj = Table::new(&["s", "t_ms", "p_solution", "p_invalid", "p_valid_other"]);
    for i in 0..r.s.len() {
        traj.push(vec![
            r.s[i].into(),
            r.t_ms[i].into(),
            r.p_solution[i].into(),
            r.p_invalid[i].into(),
            r.p_valid_other[i].into(),
        ]);
    }
    out.write_table(&format!("trajectory_{tag}.csv"), &traj)?;

    let mut dist = Table::new(&["qubit_bitstring_or_INVALID", "probability"]);
    for (bits, &p) in r.final_valid.iter().enumerate() {
        let c = crate::lattice::SpinConfig::new(bits as u64, r.n_qubits);
        dist.push(vec![c.to_string().into(), p.into()]);
    }
    dist.push(vec!["INVALID".into(), r.final_p_invalid().into()]);
    out.write_table(&format!("final_{tag}.csv"), &dist)?;

    let mut invalid = Table::new(&["sector_string", "probability"]);
    for &(bits, p) in &r.final_invalid {
        invalid.push(vec![spin_string(bits, n_molecules).into(), p.into()]);
    }
    out.write_table(&format!("final_invalid_{tag}.csv"), &invalid)?;

    write_plot(
        out,
        &format!("trajectory_{tag}.svg"),
        &Plot::lines(&format!("anneal, T = {t_ms} ms"), "s", "probability", column(&traj, "s"))
            .with("solution", column(&traj, "p_solution"))
            .with("invalid", column(&traj, "p_invalid"))
            .with("other valid", column(&traj, "p_valid_other")),
        PlotKind::Lines,
    )?;
    let mut cats: Vec<String> = dist.rows.iter().map(|row| render_text(&row[0])).collect();
    let mut values = column(&dist, "probability");
    if r.final_invalid.len() <= MAX_SPLIT_INVALID {
        for &(bits, p) in &r.final_invalid {
            cats.push(spin_string(bits, n_molecules));
            values.push(p);
        }
    }
    write_plot(
        out,
        &format!("final_{tag}.svg"),
        &Plot::bars(&format!("final distribution, T = {t_ms} ms"), "probability", cats).with("probability", values),
        PlotKind::Bars,
    )
}

fn render_text(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        other => other.as_f64().map(|x| x.to_string()).unwrap_or_default(),
    }
}

fn anneal(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let setup = cfg.setup()?;
    let config = cfg.lattice_config(&setup)?;
    let times = cfg.times_ms();
    let n_steps = cfg.n_steps();
    let stop = cfg.schedule.stop_s.unwrap_or(1.0);

    if cfg.experiment == ExperimentKind::TwoQubit {
        let trace = two_qubit_trace(&setup, 101)?;
        let mut t = Table::new(&[
            "s", "E_kV_cm", "Delta_a_Hz", "Delta_b_Hz", "J_ab_Hz", "J_z_intra_Hz", "h_a_Hz", "h_b_Hz",
        ]);
        for p in &trace {
            t.push(vec![
                p.s.into(),
                p.e_kv_cm.into(),
                p.delta_a.into(),
                p.delta_b.into(),
                p.j_ab.into(),
                p.j_z_intra.into(),
                p.h_a.into(),
                p.h_b.into(),
            ]);
        }
        out.write_table("parameters.csv", &t)?;
        write_plot(
            out,
            "parameters.svg",
            &Plot::lines("two-qubit parameters", "s", "Hz", column(&t, "s"))
                .with("Delta_a", column(&t, "Delta_a_Hz"))
                .with("J_ab", column(&t, "J_ab_Hz")),
            PlotKind::Lines,
        )?;
    }

    let results: Vec<AnnealResult<f64>> = times
        .par_iter()
        .map(|&t| {
            let schedule = setup.schedule(t, n_steps)?.with_stop(stop)?;
            propagate(&setup.model, &config, &schedule, &setup.options)
        })
        .collect::<Result<_>>()?;

    let e_final = setup.field_at(stop);
    write_ising(out, &effective_ising(&setup.model, &config, e_final)?)?;

    let mut summary = Table::new(&[
        "t_ms",
        "p_solution",
        "p_invalid",
        "p_valid_other",
        "most_likely",
        "solution_set",
        "method",
    ]);
    for (&t, r) in times.iter().zip(&results) {
        write_anneal(out, r, t, config.n_molecules())?;
        let solutions: Vec<String> = r.ground.configs.iter().map(|c| c.to_string()).collect();
        summary.push(vec![
            t.into(),
            r.final_p_solution().into(),
            r.final_p_invalid().into(),
            r.p_valid_other.last().copied().unwrap_or(f64::NAN).into(),
            r.most_likely().to_string().into(),
            solutions.join(" ").into(),
            format!("{:?}", r.method).to_lowercase().into(),
        ]);
    }
    out.write_table("summary.csv", &summary)?;
    if times.len() > 1 {
        write_plot(
            out,
            "summary.svg",
            &Plot::lines("final probabilities", "T (ms)", "probability", column(&summary, "t_ms"))
                .with("solution", column(&summary, "p_solution"))
                .with("invalid", column(&summary, "p_invalid")),
            PlotKind::Lines,
        )?;
    }
    Ok(())
}

fn scale(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let setup = cfg.setup()?;
    let families = cfg.scaling.families.clone().unwrap_or_else(|| Family::ALL.to_vec());
    let times = cfg.times_ms();
    let mut best = Table::new(&[
        "family",
        "rows",
        "cols",
        "n_qubits",
        "best_t_ms",
        "p_solution",
        "p_invalid",
        "p_invalid_non_decreasing",
    ]);
    let mut per_time = Table::new(&["family", "rows", "cols", "n_qubits", "t_ms", "p_solution", "p_invalid"]);
    for family in families {
        let steps = cfg.schedule.n_steps.unwrap_or_else(|| family.default_steps());
        let rows = scaling_study(&setup, family, &family.default_sizes(cfg.opt_in_3x3()), &times, steps)?;
        for r in &rows {
            best.push(vec![
                family.name().into(),
                r.rows.into(),
                r.cols.into(),
                r.n_qubits.into(),
                r.best_t_ms.into(),
                r.p_solution.into(),
                r.p_invalid.into(),
                r.invalid_non_decreasing.to_string().into(),
            ]);
            for &(t, ps, pi) in &r.per_time {
                per_time.push(vec![
                    family.name().into(),
                    r.rows.into(),
                    r.cols.into(),
                    r.n_qubits.into(),
                    t.into(),
                    ps.into(),
                    pi.into(),
                ]);
            }
        }
        let x: Vec<f64> = rows.iter().map(|r| r.n_qubits as f64).collect();
        write_plot(
            out,
            &format!("scaling_{}.svg", family.name()),
            &Plot::lines(&format!("{} lattices", family.name()), "qubits", "probability", x)
                .with("solution", rows.iter().map(|r| r.p_solution).collect())
                .with("invalid", rows.iter().map(|r| r.p_invalid).collect()),
            PlotKind::Lines,
        )?;
    }
    out.write_table("scaling.csv", &best)?;
    out.write_table("scaling_times.csv", &per_time)?;
    Ok(())
}

fn stack3d(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let setup = cfg.setup()?;
    let d = StackShape::default();
    let shape = StackShape {
        layers: cfg.lattice.layers.unwrap_or(d.layers),
        rows: cfg.lattice.rows.unwrap_or(d.rows),
        cols: cfg.lattice.cols.unwrap_or(d.cols),
        pitch_nm: cfg.lattice.pitch_nm,
    };
    let points = stack_3d_parameters(&setup, shape, 101)?;
    let mut t = Table::new(&[
        "s",
        "E_kV_cm",
        "Delta_Hz",
        "J_intra_layer_Hz",
        "J_inter_layer_Hz",
        "h_bottom_Hz",
        "h_middle_Hz",
        "h_top_Hz",
    ]);
    for p in &points {
        t.push(vec![
            p.s.into(),
            p.e_kv_cm.into(),
            p.delta.into(),
            p.j_intra_layer.into(),
            p.j_inter_layer.into(),
            p.h_bottom.into(),
            p.h_middle.into(),
            p.h_top.into(),
        ]);
    }
    out.write_table("stack3d.csv", &t)?;
    let config: LatticeConfig<f64> = experiments::stack_3d_config(&setup, shape)?;
    write_ising(out, &experiments::final_ising(&setup, &config)?)?;
    let s = column(&t, "s");
    write_plot(
        out,
        "stack3d_couplings.svg",
        &Plot::lines("stack couplings", "s", "Hz", s.clone())
            .with("Delta", column(&t, "Delta_Hz"))
            .with("J intra-layer", column(&t, "J_intra_layer_Hz"))
            .with("J inter-layer", column(&t, "J_inter_layer_Hz")),
        PlotKind::Lines,
    )?;
    write_plot(
        out,
        "stack3d_biases.svg",
        &Plot::lines("layer biases", "s", "h (Hz)", s)
            .with("bottom", column(&t, "h_bottom_Hz"))
            .with("middle", column(&t, "h_middle_Hz"))
            .with("top", column(&t, "h_top_Hz")),
        PlotKind::Lines,
    )
}
