//! JSON problem description and the preset scenarios.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy_engine::{CauchyProblem, ForcingTerm, SpectralForcing};
use crate::coefficients::{Delta, PolySegment, TimeDistribution};
use crate::error::{Error, Result};
use crate::h_fourier::{SpectralField, TruncationSpec};
use crate::mode_solver::Variant;
use crate::spectral_basis::{BasisParams, Component, SpectralIndex};

/// Names accepted by [`scenario`].
pub const SCENARIOS: [&str; 4] = ["ex1", "ex2", "regular", "inhomogeneous"];

/// Piecewise polynomial plus deltas; `poly_coeffs` are in powers of `t − t_start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    #[serde(default)]
    pub segments: Vec<PolySegment>,
    #[serde(default)]
    pub deltas: Vec<Delta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
}

impl DistributionConfig {
    pub fn to_distribution(&self, horizon: f64) -> Result<TimeDistribution> {
        TimeDistribution::new(horizon, self.segments.clone(), self.deltas.clone(), self.lower_bound)
    }

    pub fn from_distribution(d: &TimeDistribution) -> Self {
        Self {
            segments: d.segments().to_vec(),
            deltas: d.deltas().to_vec(),
            lower_bound: d.lower_bound(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub j_max: u32,
    pub n_max: u32,
    #[serde(default = "default_components")]
    pub components: Vec<u8>,
}

fn default_components() -> Vec<u8> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingConfig {
    pub j: u32,
    pub n: u32,
    pub component: u8,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub j: u32,
    pub n: u32,
    pub component: u8,
    pub u0_re: f64,
    pub u0_im: f64,
    pub u1_re: f64,
    pub u1_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub variant: Variant,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub s: f64,
    pub truncation: TruncationConfig,
    pub a: DistributionConfig,
    pub q: DistributionConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forcing: Vec<ForcingConfig>,
    /// Shared time envelope of the forcing; may contain deltas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_envelope: Option<DistributionConfig>,
    #[serde(default)]
    pub data: Vec<DataConfig>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            context: "problem config".into(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn truncation_spec(&self) -> Result<TruncationSpec> {
        let comps = self
            .truncation
            .components
            .iter()
            .map(|&c| Component::from_number(c))
            .collect::<Result<Vec<_>>>()?;
        TruncationSpec::new(self.truncation.j_max, self.truncation.n_max, &comps)
    }

    pub fn to_problem(&self) -> Result<CauchyProblem> {
        let params = BasisParams::new(self.b)?;
        let trunc = self.truncation_spec()?;
        let mut u0 = SpectralField::zeros(params, trunc.clone());
        let mut u1 = SpectralField::zeros(params, trunc.clone());
        for d in &self.data {
            let xi = SpectralIndex::new(d.j, d.n);
            let c = Component::from_number(d.component)?;
            u0.set(xi, c, Complex64::new(d.u0_re, d.u0_im))?;
            u1.set(xi, c, Complex64::new(d.u1_re, d.u1_im))?;
        }
        let forcing = if self.forcing.is_empty() {
            None
        } else {
            let terms = self
                .forcing
                .iter()
                .map(|f| {
                    Ok(ForcingTerm {
                        index: SpectralIndex::new(f.j, f.n),
                        component: Component::from_number(f.component)?,
                        amplitude: Complex64::new(f.amplitude_re, f.amplitude_im).into(),
                        frequency: f.frequency,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let envelope = self.forcing_envelope.as_ref().map(|e| e.to_distribution(self.t)).transpose()?;
            Some(SpectralForcing::new(terms, envelope)?)
        };
        let p = CauchyProblem {
            variant: self.variant,
            params,
            horizon: self.t,
            a: self.a.to_distribution(self.t)?,
            q: self.q.to_distribution(self.t)?,
            forcing,
            u0,
            u1,
            sobolev_order: self.s,
            trunc,
        };
        p.validate()?;
        Ok(p)
    }
}

fn single_mode_data() -> Vec<DataConfig> {
    vec![DataConfig {
        j: 0,
        n: 0,
        component: 1,
        u0_re: 1.0,
        u0_im: 0.0,
        u1_re: 0.0,
        u1_im: 0.0,
    }]
}

/// Jump from 1 to 2 at `t = 1`.
fn heaviside_step(horizon: f64) -> Result<TimeDistribution> {
    TimeDistribution::step(horizon, 1.0, 1.0, 2.0)
}

/// Preset configuration: `T = 2`, `B = 1`, `u0 = e_(0,0)` (component 1), `u1 = 0`, `s = 0`.
pub fn scenario_config(name: &str) -> Result<ProblemConfig> {
    const T: f64 = 2.0;
    let delta1 = TimeDistribution::delta(T, 1.0, 1.0)?;
    let (a, q, forcing, forcing_envelope) = match name {
        // a = δ₁ is not bounded below; 1 + δ₁ keeps a ≥ 1.
        "ex1" => (
            TimeDistribution::constant(T, 1.0)?.plus(&delta1)?.with_lower_bound(1.0)?,
            delta1.clone(),
            vec![],
            None,
        ),
        "ex2" => {
            let h = heaviside_step(T)?;
            (h.clone().with_lower_bound(1.0)?, delta1.plus(&h)?, vec![], None)
        }
        "regular" => {
            let a = TimeDistribution::from_fn(T, 8, 10, |t| 2.0 + t.sin())?.with_lower_bound(1.0)?;
            let q = TimeDistribution::new(
                T,
                vec![
                    PolySegment { t_start: 0.0, t_end: 1.0, poly_coeffs: vec![1.0, 1.0] },
                    PolySegment { t_start: 1.0, t_end: T, poly_coeffs: vec![2.0, 1.0] },
                ],
                vec![],
                None,
            )?;
            (a, q, vec![], None)
        }
        "inhomogeneous" => {
            let envelope = TimeDistribution::constant(T, 1.0)?.plus(&TimeDistribution::delta(T, 1.5, 0.5)?)?;
            (
                heaviside_step(T)?.with_lower_bound(1.0)?,
                delta1.clone(),
                vec![ForcingConfig {
                    j: 0,
                    n: 0,
                    component: 1,
                    amplitude_re: 1.0,
                    amplitude_im: 0.0,
                    frequency: 0.5,
                }],
                Some(DistributionConfig::from_distribution(&envelope)),
            )
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(ProblemConfig {
        variant: Variant::CPa,
        b: 1.0,
        t: T,
        s: 0.0,
        truncation: TruncationConfig {
            j_max: 2,
            n_max: 2,
            components: default_components(),
        },
        a: DistributionConfig::from_distribution(&a),
        q: DistributionConfig::from_distribution(&q),
        forcing,
        forcing_envelope,
        data: single_mode_data(),
    })
}

pub fn scenario(name: &str) -> Result<CauchyProblem> {
    scenario_config(name)?.to_problem()
}
