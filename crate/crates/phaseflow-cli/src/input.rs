//! Graph loading, initial-state parsing, output sinks and exit codes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use phaseflow::{generators, io, lab, Graph, VertexFunction};
use rand::Rng;

use crate::{GeneratorKind, GraphSource};

/// A failure together with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Flags or inputs that do not describe a valid run.
    Usage(String),
    /// The numerics failed on valid input.
    Numeric(String),
    /// Anything else, mostly I/O.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Other(m) => f.write_str(m),
        }
    }
}

impl From<phaseflow::Error> for CliError {
    fn from(e: phaseflow::Error) -> Self {
        match e {
            _ if e.is_numeric() => CliError::Numeric(e.to_string()),
            phaseflow::Error::Io(_) | phaseflow::Error::Json(_) => CliError::Other(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn load_graph(src: &GraphSource, seed: u64) -> CliResult<Graph> {
    if let Some(path) = &src.graph {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        return Ok(io::parse_edge_list(&text, src.r)?);
    }
    let kind = src
        .generator
        .ok_or_else(|| CliError::Usage("one of --graph or --generator is required".into()))?;
    let (n, w, r) = (src.n, src.weight, src.r);
    Ok(match kind {
        GeneratorKind::Path => generators::path(n, w, r),
        GeneratorKind::Cycle => generators::cycle(n, w, r),
        GeneratorKind::Complete => generators::complete(n, w, r),
        GeneratorKind::Star => generators::star(n, w, r),
        GeneratorKind::TwoCluster => generators::two_cluster(n, w, src.inter, r),
        GeneratorKind::Random => generators::random_connected(n, src.edge_prob, r, seed),
    }?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad {what} entry '{x}'")))
        })
        .collect()
}

/// Parses `random`, `const:c`, `indicator:i,j,...` or `values:x0,x1,...`.
pub fn parse_u0(spec: &str, n: usize, seed: u64) -> CliResult<VertexFunction> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let u = match kind {
        "random" => {
            let mut r = lab::rng(seed);
            (0..n).map(|_| r.gen::<f64>()).collect::<Vec<_>>().into()
        }
        "const" => {
            let c: f64 = rest
                .parse()
                .map_err(|_| CliError::Usage(format!("bad constant '{rest}'")))?;
            VertexFunction::constant(n, c)
        }
        "indicator" => {
            let members: Vec<usize> = parse_list(rest, "vertex")?;
            if let Some(&i) = members.iter().find(|&&i| i >= n) {
                return Err(CliError::Usage(format!(
                    "vertex {i} out of range for {n} vertices"
                )));
            }
            VertexFunction::indicator(n, &members)
        }
        "values" => {
            let v: Vec<f64> = parse_list(rest, "value")?;
            if v.len() != n {
                return Err(CliError::Usage(format!(
                    "expected {n} values, got {}",
                    v.len()
                )));
            }
            v.into()
        }
        _ => return Err(CliError::Usage(format!("unknown initial state '{spec}'"))),
    };
    Ok(u)
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(
                fs::File::create(p)
                    .map_err(|e| CliError::Other(format!("{}: {e}", p.display())))?,
            );
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            // A closed pipe (e.g. `| head`) is not an error for the run itself.
            match write(&mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}
