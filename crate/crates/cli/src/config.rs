//! Experiment configuration read from a single JSON document.

use std::sync::Arc;

use nctorus::curvature::{ContourPolicy, HeatBox, HeatWindow, DEFAULT_CONTOUR_NODES};
use nctorus::gns::Truncation;
use nctorus::quadrature::SphereQuadrature;
use nctorus::Theta;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `θ` as one value `θ_jl = x` for all `j < l`, or a full antisymmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub k: usize,
    pub p: usize,
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig { k: 24, p: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Sphere rule order; `None` picks 64 at n = 2 and 6 above.
    pub sphere_order: Option<usize>,
    /// Radial nodes of the Gaussian-density integral.
    pub radial: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { sphere_order: None, radial: 64 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourConfig {
    pub nodes: usize,
    pub b_scale: f64,
    pub a_shift: f64,
    /// `(b_scale, a_shift)` of the perturbed contour used by the stability gate.
    pub perturbation: (f64, f64),
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { nodes: DEFAULT_CONTOUR_NODES, b_scale: 1.0, a_shift: 0.0, perturbation: (1.3, 0.4) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    pub active: usize,
    pub transverse: i64,
    #[serde(default)]
    pub window: Option<HeatWindow>,
    /// Modes of `κ` compared with the contour value; defaults to `0` and `±e₁`.
    #[serde(default)]
    pub modes: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub csv: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub algebra: f64,
    pub weyl_rel: f64,
    pub trace_rel: f64,
    pub spread_rel: f64,
    pub density_flat: f64,
    pub density_conformal: f64,
    pub density_compatible: f64,
    pub gaussian: f64,
    pub det_power: f64,
    pub det_leibniz: f64,
    pub integration_rel: f64,
    pub drift: f64,
    pub min_reliable: usize,
    pub curvature_flat: f64,
    pub contour_perturbation: f64,
    pub quadrature_doubling: f64,
    pub heat_rel: f64,
    pub volume: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebra: 1e-13,
            weyl_rel: 0.02,
            trace_rel: 0.01,
            spread_rel: 0.02,
            density_flat: 1e-10,
            density_conformal: 1e-8,
            density_compatible: 1e-6,
            gaussian: 1e-6,
            det_power: 1e-9,
            det_leibniz: 1e-8,
            integration_rel: 0.10,
            drift: 0.005,
            min_reliable: 500,
            curvature_flat: 1e-10,
            contour_perturbation: 1e-8,
            quadrature_doubling: 0.01,
            heat_rel: 0.05,
            volume: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Missing: `1/√5` at n = 2, zero otherwise.
    pub theta: Option<ThetaSpec>,
    pub metric: String,
    /// Truncate every metric entry to `|k|_∞ ≤ r` after evaluation.
    pub factor_radius: Option<i64>,
    /// Test element `a` for integration and the curvature functional.
    pub element: String,
    /// Order `−n` symbol for the trace theorem.
    pub symbol: String,
    /// Degree-1 scalar symbol `ρ = σ^p` for the Weyl law.
    pub rho: String,
    pub rho_power: f64,
    pub lambda_max: f64,
    pub n_max: usize,
    pub n_min: usize,
    #[serde(rename = "box")]
    pub bx: BoxConfig,
    pub fill: Option<f64>,
    pub quadrature: QuadratureConfig,
    pub contour: ContourConfig,
    pub heat: Option<HeatConfig>,
    pub drift: bool,
    pub drift_count: usize,
    pub seed: u64,
    pub samples: usize,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            theta: None,
            metric: "flat".into(),
            factor_radius: None,
            element: "1".into(),
            symbol: "|xi|^-2".into(),
            rho: "|xi|".into(),
            rho_power: 1.0,
            lambda_max: 200.0,
            n_max: 1_000_000,
            n_min: 10,
            bx: BoxConfig::default(),
            fill: None,
            quadrature: QuadratureConfig::default(),
            contour: ContourConfig::default(),
            heat: None,
            drift: true,
            drift_count: 20,
            seed: 0,
            samples: 16,
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if let Some(ThetaSpec::Matrix(rows)) = &self.theta {
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                return Err(CliError::Config(format!("theta must be {0}×{0}", self.n)));
            }
        }
        if self.n_min >= self.n_max {
            return Err(CliError::Config("n_min must be below n_max".into()));
        }
        if self.contour.nodes < 8 {
            return Err(CliError::Config("contour needs at least 8 nodes".into()));
        }
        Ok(())
    }

    pub fn theta(&self) -> Result<Arc<Theta>, CliError> {
        let t = match &self.theta {
            None if self.n == 2 => Theta::default_2d(),
            None => Theta::zero(self.n).map_err(|e| CliError::Config(e.to_string()))?,
            Some(ThetaSpec::Scalar(x)) => {
                let rows: Vec<Vec<f64>> = (0..self.n)
                    .map(|j| (0..self.n).map(|l| if j < l { *x } else if j > l { -x } else { 0.0 }).collect())
                    .collect();
                Theta::from_rows(&rows).map_err(|e| CliError::Config(e.to_string()))?
            }
            Some(ThetaSpec::Matrix(rows)) => Theta::from_rows(rows).map_err(|e| CliError::Config(e.to_string()))?,
        };
        Ok(Arc::new(t))
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.bx.k, self.bx.p)
    }

    pub fn sphere_order(&self) -> usize {
        self.quadrature.sphere_order.unwrap_or(if self.n == 2 { 64 } else { 6 })
    }

    pub fn sphere(&self) -> SphereQuadrature {
        SphereQuadrature::standard(self.n, self.sphere_order())
    }

    pub fn contour_policy(&self) -> ContourPolicy {
        ContourPolicy::with_nodes(self.contour.nodes).perturbed(self.contour.b_scale, self.contour.a_shift)
    }

    pub fn heat_box(&self) -> Option<(HeatBox, HeatWindow, Vec<Vec<i64>>)> {
        let h = self.heat.as_ref()?;
        let window = h.window.unwrap_or_else(|| HeatWindow::default_for(self.n));
        let modes = h.modes.clone().unwrap_or_else(|| {
            let mut e1 = vec![0; self.n];
            e1[0] = 1;
            let mut m1 = vec![0; self.n];
            m1[0] = -1;
            vec![vec![0; self.n], e1, m1]
        });
        Some((HeatBox { active: h.active, transverse: h.transverse }, window, modes))
    }

    /// Defaults for a subcommand where the generic ones do not fit.
    pub fn default_for(subcommand: &str) -> Self {
        let mut c = ExperimentConfig::default();
        if subcommand == "curvature" {
            c.n = 4;
            c.bx = BoxConfig { k: 2, p: 1 };
        }
        c
    }
}
