use std::io::Write;

use serde::Serialize;

use crate::functionals::EnergyReport;
use crate::vertex::VertexFunction;

/// Which scheme produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    SemiDiscrete,
    Mbo,
    AcReference,
    Regularized,
    ClosedForm,
    TimeSplitting,
    ElmoMcf,
}

/// Numerical parameters recorded alongside the states.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    /// Step index of the underlying scheme.
    pub n: usize,
    pub t: f64,
    pub u: VertexFunction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<VertexFunction>,
    #[serde(flatten)]
    pub energy: Option<EnergyReport>,
}

/// A time-stamped sequence of states with optional obstacle reactions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub tag: SchemeTag,
    pub metadata: Metadata,
    pub samples: Vec<Sample>,
    /// Step at which `u_{n+1} = u_n` was detected, if the run stopped early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<usize>,
}

impl Trajectory {
    pub fn new(tag: SchemeTag, metadata: Metadata) -> Self {
        Self {
            tag,
            metadata,
            samples: Vec::new(),
            fixed_point: None,
        }
    }

    pub fn push(&mut self, n: usize, t: f64, u: VertexFunction, beta: Option<VertexFunction>) {
        self.samples.push(Sample {
            n,
            t,
            u,
            beta,
            energy: None,
        });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &VertexFunction> {
        self.samples.iter().map(|s| &s.u)
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// One row per (sample, vertex): `n,t,vertex,u,beta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,t,vertex,u,beta")?;
        for s in &self.samples {
            for (i, &x) in s.u.iter().enumerate() {
                let b = s.beta.as_ref().map(|b| fmt17(b[i])).unwrap_or_default();
                writeln!(w, "{},{},{},{},{}", s.n, fmt17(s.t), i, fmt17(x), b)?;
            }
        }
        Ok(())
    }
}

/// A float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
