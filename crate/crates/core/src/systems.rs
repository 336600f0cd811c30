//! Builders for the concrete systems under study: beam and string frequency
//! families, constant / indicator damping with closed-form modal integrals,
//! and the axial-force stiffness perturbation.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modal::{Family, Frequencies, ModalDamping, StiffnessPerturbation};

const PI: f64 = std::f64::consts::PI;

/// Hinged (simply supported) beam on (0,1): μ_k = k⁴π⁴, eigenfunctions
/// √2·sin(kπx).
pub fn hinged_beam(n: usize) -> Result<Frequencies> {
    if n < 3 {
        return Err(Error::Config(format!("need n >= 3 modes, got {n}")));
    }
    let mu = (1..=n).map(|k| ((k * k) as f64 * PI * PI).powi(2)).collect();
    Frequencies::new(mu, Family::HingedBeam)
}

/// Vibrating string on (0,1): μ_k = k²π². Constant gaps δ_k = π, so the
/// gap-growth assumption fails — the designated negative control.
pub fn wave_string(n: usize) -> Result<Frequencies> {
    if n < 3 {
        return Err(Error::Config(format!("need n >= 3 modes, got {n}")));
    }
    let mu = (1..=n).map(|k| (k as f64 * PI).powi(2)).collect();
    Frequencies::new(mu, Family::WaveString)
}

/// Clamped-free beam: μ_k = β_k⁴ where β_k is the k-th positive root of
/// cos(β)·cosh(β) = −1, bracketed in [(k−1)π, kπ] and bisected to ~1e-13.
pub fn clamped_free_beam(n: usize) -> Result<Frequencies> {
    if n < 3 {
        return Err(Error::Config(format!("need n >= 3 modes, got {n}")));
    }
    let mu = (1..=n)
        .map(|k| clamped_free_root(k).map(|b| b.powi(4)))
        .collect::<Result<Vec<_>>>()?;
    Frequencies::new(mu, Family::ClampedFreeBeam)
}

/// k-th positive root of cos(β)cosh(β) = −1, solved in the overflow-safe
/// form cos(β) + sech(β) = 0 (same roots, g stays O(1) for large β).
pub fn clamped_free_root(k: usize) -> Result<f64> {
    let g = |b: f64| b.cos() + 1.0 / b.cosh();
    let mut lo = (k - 1) as f64 * PI;
    let mut hi = k as f64 * PI;
    // g(0) = 2 > 0 and the sign alternates at multiples of π
    let (mut glo, ghi) = (g(lo.max(1e-8)), g(hi));
    if glo * ghi > 0.0 {
        return Err(Error::Numerical(format!(
            "root bracket [{lo:.3}, {hi:.3}] does not straddle a sign change"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || hi - lo < 1e-14 * hi.max(1.0) {
            return Ok(mid);
        }
        if glo * gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How the damping operator is specified in configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSpec {
    /// a(x) ≡ a₀: D = 2a₀·I.
    Constant { a0: f64 },
    /// a(x) = c·1_{(alpha,beta)}: closed-form sine-basis Gram matrix.
    Indicator { c: f64, alpha: f64, beta: f64 },
    /// Pre-computed N×N modal damping matrix loaded from a CSV file.
    Custom { path: String },
}

/// D = 2a₀·Identity; ‖B*‖² = 2a₀, β = a₀.
pub fn constant_damping(n: usize, a0: f64) -> ModalDamping {
    assert!(a0 >= 0.0, "damping coefficient must be nonnegative");
    let mut d = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = 2.0 * a0;
    }
    ModalDamping::new(d).expect("constant damping matrix is symmetric PSD by construction")
}

/// Damping a(x) = c·1_{(alpha,beta)} against the sine eigenfunctions of the
/// hinged beam: D_jk = 4c∫_α^β sin(jπx)sin(kπx)dx in closed form.
pub fn indicator_damping(
    freqs: &Frequencies,
    c: f64,
    alpha: f64,
    beta: f64,
) -> Result<ModalDamping> {
    if freqs.family() != Family::HingedBeam {
        return Err(Error::Config(
            "indicator damping needs the sine eigenfunctions of the hinged beam; \
             supply a custom damping matrix for other families"
                .into(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha >= beta {
        return Err(Error::Config(format!(
            "indicator interval ({alpha}, {beta}) must satisfy 0 <= alpha < beta <= 1"
        )));
    }
    if c < 0.0 {
        return Err(Error::Config("indicator level c must be nonnegative".into()));
    }
    let n = freqs.n();
    let d = Mat::from_fn(n, n, |i, j| {
        let (j1, k1) = (i as f64 + 1.0, j as f64 + 1.0);
        if i == j {
            // 2c·[x − sin(2kπx)/(2kπ)] between the endpoints
            let f = |x: f64| x - (2.0 * k1 * PI * x).sin() / (2.0 * k1 * PI);
            2.0 * c * (f(beta) - f(alpha))
        } else {
            let dm = j1 - k1;
            let dp = j1 + k1;
            let f = |x: f64| (dm * PI * x).sin() / (dm * PI) - (dp * PI * x).sin() / (dp * PI);
            2.0 * c * (f(beta) - f(alpha))
        }
    });
    ModalDamping::new(d)
}

/// Build a damping matrix from a spec (CSV loading handled by the caller for
/// the custom variant).
pub fn build_damping(spec: &DampingSpec, freqs: &Frequencies) -> Result<ModalDamping> {
    match spec {
        DampingSpec::Constant { a0 } => {
            if *a0 < 0.0 {
                return Err(Error::Config("damping coefficient a0 must be >= 0".into()));
            }
            Ok(constant_damping(freqs.n(), *a0))
        }
        DampingSpec::Indicator { c, alpha, beta } => indicator_damping(freqs, *c, *alpha, *beta),
        DampingSpec::Custom { path } => {
            let d = crate::config::load_matrix_csv(std::path::Path::new(path), freqs.n())?;
            ModalDamping::new(d)
        }
    }
}

/// Axial compression p·∂²_x on the hinged beam: K diagonal with
/// K_kk = −p·k²π²; requires p < π² so A+K stays positive definite.
pub fn axial_force_stiffness(freqs: &Frequencies, p: f64) -> Result<StiffnessPerturbation> {
    if freqs.family() != Family::HingedBeam {
        return Err(Error::Config(
            "axial-force stiffness uses the hinged-beam sine eigenfunctions".into(),
        ));
    }
    if p <= 0.0 {
        return Err(Error::Config("axial force p must be positive".into()));
    }
    if p >= PI * PI {
        return Err(Error::Config(format!(
            "axial force p = {p} >= pi^2 destroys positivity of A+K on mode 1"
        )));
    }
    let n = freqs.n();
    let mut k = Mat::<f64>::zeros(n, n);
    for idx in 0..n {
        let kf = (idx + 1) as f64;
        k[(idx, idx)] = -p * kf * kf * PI * PI;
    }
    StiffnessPerturbation::new(k, freqs)
}
