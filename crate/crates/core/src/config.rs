//! Run configuration: a single JSON document with a strict schema
//! (unknown keys rejected) and defaults chosen for reproducible runs.

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modal::{assemble_generator, Family, Frequencies, GeneratorMatrix, Perturbation};
use crate::systems::{self, DampingSpec};

/// Which frequency family the run uses.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySpec {
    HingedBeam,
    Wave,
    ClampedFree,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub family: FamilySpec,
    pub n_modes: usize,
    /// Required iff `family` is `custom`: CSV with one μ_k per line, ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<StiffnessConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessConfig {
    /// Axial compression strength; must satisfy 0 < p < π².
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Closeness threshold for choosing N₀ (gap large relative to ‖B*‖²).
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Gauss–Legendre nodes per rectangle side (before adaptive doubling).
    #[serde(default = "default_nodes_per_side")]
    pub nodes_per_side: usize,
    /// Fraction of the computed modes whose eigenvalues are trusted.
    #[serde(default = "default_trust_fraction")]
    pub trust_fraction: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            kappa: default_kappa(),
            nodes_per_side: default_nodes_per_side(),
            trust_fraction: default_trust_fraction(),
        }
    }
}

fn default_kappa() -> f64 {
    0.5
}

fn default_nodes_per_side() -> usize {
    32
}

fn default_trust_fraction() -> f64 {
    0.5
}

/// How the simulation horizon is chosen.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonPolicy {
    /// Pick T so the predicted energy decay over [0,T] is about 10⁻⁶
    /// (fixed fallback when the predicted rate vanishes).
    Auto,
    /// Use the given horizon directly.
    Fixed { t: f64 },
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy::Auto
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub horizon_policy: HorizonPolicy,
    /// Number of time samples written to the energy series.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Seeds for the generic random initial states.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon_policy: HorizonPolicy::default(),
            samples: default_samples(),
            seeds: default_seeds(),
        }
    }
}

fn default_samples() -> usize {
    200
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn default_output_dir() -> String {
    "out".into()
}

/// Complete description of one run. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

impl RunConfig {
    /// Parse and validate a JSON config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parse and validate a JSON config string.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that the schema alone cannot express.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.n_modes < 3 {
            return Err(Error::Config(format!(
                "system.n_modes must be >= 3, got {}",
                s.n_modes
            )));
        }
        if s.family == FamilySpec::Custom && s.mu_path.is_none() {
            return Err(Error::Config(
                "system.mu_path is required when system.family is \"custom\"".into(),
            ));
        }
        if s.family != FamilySpec::Custom && s.mu_path.is_some() {
            return Err(Error::Config(
                "system.mu_path is only valid with system.family \"custom\"".into(),
            ));
        }
        if s.damping.is_some() && s.stiffness.is_some() {
            return Err(Error::Config(
                "system.damping and system.stiffness are mutually exclusive".into(),
            ));
        }
        match &s.damping {
            Some(DampingSpec::Constant { a0 }) if *a0 < 0.0 => {
                return Err(Error::Config(format!(
                    "system.damping.a0 must be >= 0, got {a0}"
                )));
            }
            Some(DampingSpec::Indicator { c, alpha, beta }) => {
                if *c < 0.0 {
                    return Err(Error::Config(format!(
                        "system.damping.c must be >= 0, got {c}"
                    )));
                }
                if !(0.0..=1.0).contains(alpha) || !(0.0..=1.0).contains(beta) || alpha >= beta {
                    return Err(Error::Config(format!(
                        "system.damping interval ({alpha}, {beta}) must satisfy \
                         0 <= alpha < beta <= 1"
                    )));
                }
            }
            _ => {}
        }
        if let Some(st) = &s.stiffness {
            if st.p <= 0.0 {
                return Err(Error::Config(format!(
                    "system.stiffness.p must be > 0, got {}",
                    st.p
                )));
            }
        }
        let a = &self.analysis;
        if !(a.kappa > 0.0 && a.kappa < 1.0) {
            return Err(Error::Config(format!(
                "analysis.kappa must lie strictly inside (0, 1), got {}",
                a.kappa
            )));
        }
        if a.nodes_per_side < 2 || a.nodes_per_side > 4096 {
            return Err(Error::Config(format!(
                "analysis.nodes_per_side must lie in [2, 4096], got {}",
                a.nodes_per_side
            )));
        }
        if !(a.trust_fraction > 0.0 && a.trust_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "analysis.trust_fraction must lie in (0, 1], got {}",
                a.trust_fraction
            )));
        }
        let sim = &self.simulation;
        if sim.samples < 8 {
            return Err(Error::Config(format!(
                "simulation.samples must be >= 8, got {}",
                sim.samples
            )));
        }
        if sim.seeds.is_empty() {
            return Err(Error::Config("simulation.seeds must be non-empty".into()));
        }
        if let HorizonPolicy::Fixed { t } = sim.horizon_policy {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!(
                    "simulation.horizon_policy.t must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Build the frequency family described by `system`.
    pub fn build_frequencies(&self) -> Result<Frequencies> {
        let s = &self.system;
        match s.family {
            FamilySpec::HingedBeam => systems::hinged_beam(s.n_modes),
            FamilySpec::Wave => systems::wave_string(s.n_modes),
            FamilySpec::ClampedFree => systems::clamped_free_beam(s.n_modes),
            FamilySpec::Custom => {
                let path = s.mu_path.as_ref().expect("validated");
                let mu = load_vector_csv(Path::new(path), s.n_modes)?;
                Frequencies::new(mu, Family::Custom)
            }
        }
    }

    /// Assemble the full generator (frequencies + perturbation).
    pub fn build_system(&self) -> Result<GeneratorMatrix> {
        let freqs = self.build_frequencies()?;
        let pert = match (&self.system.damping, &self.system.stiffness) {
            (_, Some(st)) => {
                Perturbation::Stiffness(systems::axial_force_stiffness(&freqs, st.p)?)
            }
            (Some(spec), None) => Perturbation::Damping(systems::build_damping(spec, &freqs)?),
            (None, None) => {
                Perturbation::Damping(crate::modal::ModalDamping::zero(freqs.n()))
            }
        };
        assemble_generator(&freqs, pert)
    }
}

/// Read an n×n real matrix from CSV: n data rows of n comma-separated
/// numbers. Lines starting with `#` and a single leading header row of
/// non-numeric labels are tolerated.
pub fn load_matrix_csv(path: &Path, n: usize) -> Result<Mat<f64>> {
    let rows = load_rows(path)?;
    if rows.len() != n {
        return Err(Error::Config(format!(
            "{}: expected {n} data rows, found {}",
            path.display(),
            rows.len()
        )));
    }
    let mut m = Mat::<f64>::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Config(format!(
                "{}: row {} has {} entries, expected {n}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Read a vector of length n from CSV (one value per line, or one row).
pub fn load_vector_csv(path: &Path, n: usize) -> Result<Vec<f64>> {
    let rows = load_rows(path)?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    if flat.len() != n {
        return Err(Error::Config(format!(
            "{}: expected {n} values, found {}",
            path.display(),
            flat.len()
        )));
    }
    Ok(flat)
}

fn load_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(vals) => rows.push(vals),
            Err(e) => {
                // tolerate one header row of labels at the top
                if rows.is_empty() && lineno == 0 {
                    continue;
                }
                return Err(Error::Config(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    Ok(rows)
}
