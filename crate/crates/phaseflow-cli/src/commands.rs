use std::io::Write;

use phaseflow::allen_cahn::{ac_reference, regularized_flow, uniform_grid};
use phaseflow::functionals::energy_report;
use phaseflow::lab::{self, Cp1Outcome};
use phaseflow::mcf::{elmo_mcf_flow, PNorm};
use phaseflow::splitting::ts_run;
use phaseflow::{
    decompose, fmt17, io, sd_run, Graph, SchemeParams, SpectralDecomposition, Trajectory, VertexSet,
};
use serde::Serialize;

use crate::input::{emit, load_graph, parse_u0, CliError, CliResult};
use crate::{ComparisonArgs, EvolveArgs, ExperimentKind, Format, GraphCmdArgs, Scheme};

/// Everything needed to reproduce a run.
#[derive(Serialize, Default)]
struct Provenance {
    graph_hash: String,
    n_vertices: usize,
    r: f64,
    scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0: Option<String>,
    seed: u64,
    version: &'static str,
}

impl Provenance {
    fn new(g: &Graph, scheme: &str, seed: u64) -> Self {
        Provenance {
            graph_hash: g.fingerprint(),
            n_vertices: g.n_vertices(),
            r: g.r(),
            scheme: scheme.to_string(),
            seed,
            version: phaseflow::VERSION,
            ..Default::default()
        }
    }

    /// The provenance as `# key: value` comment lines for CSV output.
    fn write_comments(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "# graph_hash: {}", self.graph_hash)?;
        writeln!(w, "# n_vertices: {}", self.n_vertices)?;
        writeln!(w, "# r: {}", self.r)?;
        writeln!(w, "# scheme: {}", self.scheme)?;
        let optional = [
            ("epsilon", self.epsilon),
            ("tau", self.tau),
            ("lambda", self.lambda),
            ("tau_ref", self.tau_ref),
            ("nu", self.nu),
            ("dt", self.dt),
            ("p_norm", self.p_norm),
        ];
        for (k, v) in optional {
            if let Some(v) = v {
                writeln!(w, "# {k}: {v}")?;
            }
        }
        if let Some(u0) = &self.u0 {
            writeln!(w, "# u0: {u0}")?;
        }
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# version: {}", self.version)
    }
}

#[derive(Serialize)]
struct RunFile<'a> {
    provenance: &'a Provenance,
    trajectory: &'a Trajectory,
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Semidiscrete => "semidiscrete",
        Scheme::Mbo => "mbo",
        Scheme::AcReference => "ac-reference",
        Scheme::Regularized => "regularized",
        Scheme::TimeSplitting => "time-splitting",
        Scheme::Elmo => "elmo",
    }
}

fn need_tau(tau: Option<f64>, scheme: Scheme) -> CliResult<f64> {
    tau.ok_or_else(|| CliError::Usage(format!("--tau is required for {}", scheme_name(scheme))))
}

fn attach_energies(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    traj: &mut Trajectory,
) -> CliResult<()> {
    for s in &mut traj.samples {
        s.energy = Some(energy_report(g, dec, params, &s.u)?);
    }
    Ok(())
}

pub fn evolve(args: &EvolveArgs) -> CliResult<()> {
    let g = load_graph(&args.source, args.seed)?;
    let dec = decompose(&g)?;
    let u0 = parse_u0(&args.u0, g.n_vertices(), args.seed)?;
    let mut prov = Provenance::new(&g, scheme_name(args.scheme), args.seed);
    prov.u0 = Some(args.u0.clone());

    let traj = match args.scheme {
        Scheme::Semidiscrete | Scheme::Mbo | Scheme::TimeSplitting => {
            let tau = need_tau(args.tau, args.scheme)?;
            let params = match (args.scheme, args.lambda) {
                (Scheme::Mbo, _) => SchemeParams::from_lambda(1.0, tau)?,
                (_, Some(l)) => SchemeParams::from_lambda(l, tau)?,
                _ => SchemeParams::new(args.eps, tau)?,
            };
            prov.epsilon = Some(params.epsilon());
            prov.tau = Some(tau);
            prov.lambda = Some(params.lambda());
            if args.scheme == Scheme::TimeSplitting {
                let mut t = ts_run(&g, &dec, &params, &u0, args.steps)?;
                attach_energies(&g, &dec, &params, &mut t)?;
                t
            } else {
                sd_run(&g, &dec, &params, &u0, args.steps)?
            }
        }
        Scheme::AcReference => {
            let tau_ref = args.tau_ref.unwrap_or(args.eps / 1024.0);
            let grid = uniform_grid(args.t_end, args.sample_dt.unwrap_or(tau_ref));
            prov.epsilon = Some(args.eps);
            prov.tau_ref = Some(tau_ref);
            let mut t = ac_reference(&g, &dec, args.eps, &u0, &grid, tau_ref)?;
            attach_energies(&g, &dec, &SchemeParams::new(args.eps, tau_ref)?, &mut t)?;
            t
        }
        Scheme::Regularized => {
            prov.epsilon = Some(args.eps);
            prov.nu = Some(args.nu);
            let mut t = regularized_flow(&g, &dec, args.eps, args.nu, &u0, args.t_end, args.dt)?;
            let h = t.metadata.dt.unwrap_or(args.eps);
            prov.dt = Some(h);
            if h > 0.0 {
                attach_energies(&g, &dec, &SchemeParams::new(args.eps, h)?, &mut t)?;
            }
            t
        }
        Scheme::Elmo => {
            let dt = args.dt.unwrap_or(0.01);
            prov.dt = Some(dt);
            prov.p_norm = Some(args.p_norm);
            elmo_mcf_flow(&g, &u0, PNorm::new(args.p_norm)?, dt, args.steps)?
        }
    };

    emit(args.out.as_deref(), |w| match args.format {
        Format::Json => {
            let file = RunFile {
                provenance: &prov,
                trajectory: &traj,
            };
            serde_json::to_writer_pretty(&mut *w, &file).map_err(std::io::Error::other)?;
            writeln!(w)
        }
        Format::Csv => {
            prov.write_comments(w)?;
            traj.write_csv(w)
        }
    })?;
    summarize(&g, args.scheme, &traj);
    Ok(())
}

fn summarize(g: &Graph, scheme: Scheme, traj: &Trajectory) {
    let Some(last) = traj.last() else { return };
    let mut line = format!(
        "{}: {} samples, final t = {}",
        scheme_name(scheme),
        traj.len(),
        last.t
    );
    match traj.fixed_point {
        Some(n) => line.push_str(&format!(", fixed point after step {n}")),
        None if matches!(scheme, Scheme::Semidiscrete | Scheme::Mbo) => {
            line.push_str(", no fixed point")
        }
        None => {}
    }
    if scheme == Scheme::AcReference {
        match traj.samples.iter().find(|s| !s.u.is_interior()) {
            Some(s) => line.push_str(&format!(", first obstacle contact at t = {}", s.t)),
            None => line.push_str(", no obstacle contact"),
        }
    }
    if let Some(e) = &last.energy {
        line.push_str(&format!(
            "; final GL = {}, H = {}, J = {}, TV = {}",
            e.gl.to_f64(),
            e.h,
            e.j,
            e.tv
        ));
    } else if let Ok(tv) = g.total_variation(&last.u) {
        line.push_str(&format!("; final TV = {tv}"));
    }
    eprintln!("{line}");
}

fn csv_out(
    out: Option<&std::path::Path>,
    prov: &Provenance,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult<()> {
    emit(out, |w| {
        prov.write_comments(w)?;
        body(w)
    })
}

fn comparison(args: &ComparisonArgs, first: bool) -> CliResult<()> {
    let g = load_graph(&args.source, args.seed)?;
    let dec = decompose(&g)?;
    let tau_ref = args.tau_ref.unwrap_or(args.eps / 1024.0);
    let seeds: Vec<u64> = (args.seed..args.seed + args.count).collect();
    let (name, report) = if first {
        let r = lab::cp1_batch(&g, &dec, args.eps, args.t_end, tau_ref, &seeds)?;
        ("cp1", r)
    } else {
        let r = lab::cp2_batch(&g, &dec, args.eps, args.t_end, tau_ref, &seeds)?;
        ("cp2", r)
    };
    let mut prov = Provenance::new(&g, name, args.seed);
    prov.epsilon = Some(args.eps);
    prov.tau_ref = Some(tau_ref);
    csv_out(args.out.as_deref(), &prov, |w| report.write_csv(w))?;
    eprintln!(
        "{name}: {} pass, {} fail, {} discarded",
        report.count(Cp1Outcome::Pass),
        report.count(Cp1Outcome::Fail),
        report.count(Cp1Outcome::Discarded)
    );
    Ok(())
}

pub fn experiment(kind: &ExperimentKind) -> CliResult<()> {
    match kind {
        ExperimentKind::Convergence {
            source,
            eps,
            t,
            taus,
            tau_ref,
            u0,
            seed,
            out,
        } => {
            let g = load_graph(source, *seed)?;
            let dec = decompose(&g)?;
            let u = parse_u0(u0, g.n_vertices(), *seed)?;
            let table = lab::convergence_order_experiment(&g, &dec, *eps, &u, *t, taus, *tau_ref)?;
            let mut prov = Provenance::new(&g, "semidiscrete", *seed);
            prov.epsilon = Some(*eps);
            prov.tau_ref = Some(table.tau_ref);
            prov.u0 = Some(u0.clone());
            csv_out(out.as_deref(), &prov, |w| table.write_csv(w))?;
            eprintln!(
                "convergence: slope {}, errors nonincreasing: {}",
                table.slope,
                table.errors_nonincreasing()
            );
        }
        ExperimentKind::Gamma {
            source,
            eps_list,
            grid,
            out,
        } => {
            let g = load_graph(source, 0)?;
            let table = lab::gamma_convergence_experiment(&g, eps_list, *grid)?;
            let prov = Provenance::new(&g, "gamma", 0);
            csv_out(out.as_deref(), &prov, |w| table.write_csv(w))?;
            eprintln!("gamma: worst bound ratio {}", table.worst_bound_ratio);
        }
        ExperimentKind::Cp1(args) => comparison(args, true)?,
        ExperimentKind::Cp2(args) => comparison(args, false)?,
        ExperimentKind::PinningMap {
            source,
            lambdas,
            out,
        } => {
            let g = load_graph(source, 0)?;
            let dec = decompose(&g)?;
            let rows = lab::pinning_map(&g, &dec, lambdas)?;
            let prov = Provenance::new(&g, "pinning-map", 0);
            csv_out(out.as_deref(), &prov, |w| lab::write_pinning_csv(&rows, w))?;
            let misses = rows.iter().filter(|r| !r.pins_at_bound).count();
            eprintln!(
                "pinning-map: {} rows, {misses} not pinned at the bound",
                rows.len()
            );
        }
        ExperimentKind::McfAgreement {
            source,
            taus,
            steps,
            set,
            out,
        } => {
            let g = load_graph(source, 0)?;
            let dec = decompose(&g)?;
            if let Some(&i) = set.iter().find(|&&i| i >= g.n_vertices()) {
                return Err(CliError::Usage(format!(
                    "vertex {i} out of range for {} vertices",
                    g.n_vertices()
                )));
            }
            let s0 = VertexSet::from_members(g.n_vertices(), set);
            let rows = lab::mcf_agreement(&g, &dec, &s0, taus, *steps)?;
            let prov = Provenance::new(&g, "mcf-agreement", 0);
            csv_out(out.as_deref(), &prov, |w| {
                lab::write_agreement_csv(&rows, w)
            })?;
            for r in &rows {
                eprintln!(
                    "mcf-agreement: tau {} agreement {}",
                    fmt17(r.tau),
                    r.agreement
                );
            }
        }
    }
    Ok(())
}

pub fn graph(args: &GraphCmdArgs) -> CliResult<()> {
    let g = load_graph(&args.source, args.seed)?;
    emit(args.out.as_deref(), |w| {
        w.write_all(io::write_edge_list(&g).as_bytes())
    })?;
    eprintln!(
        "graph: {} vertices, {} edges",
        g.n_vertices(),
        g.edges().len()
    );
    Ok(())
}
