//! Truncated modal representation of a damped (or stiffness-perturbed)
//! second-order system, and its first-order generator in energy coordinates.
//!
//! In energy coordinates z = (S·x, ẋ) with S = diag(√μ_k), the energy norm is
//! plain Euclidean, so every operator norm below is an ordinary 2-norm. The
//! evolution is ż = G z with
//!
//!   G = [[0,  S], [−S, −D]]           (dissipative, D the modal damping Gram)
//!   G = [[0,  S], [−S − K·S⁻¹, 0]]    (conservative stiffness perturbation)
//!
//! and the undamped reference G₀ = [[0, S], [−S, 0]] is skew-symmetric with
//! eigenpairs (±i√μ_k, (e_k, ±i e_k)/√2).

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::linalg::{matvec_real, C64};

/// Provenance of a frequency sequence; built-in families carry exact
/// closed-form knowledge used by the gap-assumption checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    HingedBeam,
    WaveString,
    ClampedFreeBeam,
    Custom,
}

/// Ascending positive eigenvalues μ_k of the stiffness operator, with their
/// square roots (the undamped angular frequencies).
#[derive(Debug, Clone)]
pub struct Frequencies {
    mu: Vec<f64>,
    sqrt_mu: Vec<f64>,
    family: Family,
}

impl Frequencies {
    pub fn new(mu: Vec<f64>, family: Family) -> Result<Self> {
        if mu.len() < 3 {
            return Err(Error::Config(format!(
                "need at least 3 modal frequencies, got {}",
                mu.len()
            )));
        }
        if mu.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Config("modal eigenvalues must be positive and finite".into()));
        }
        if mu.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("modal eigenvalues must be non-decreasing".into()));
        }
        let sqrt_mu = mu.iter().map(|m| m.sqrt()).collect();
        Ok(Frequencies { mu, sqrt_mu, family })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Frequency ceiling below which truncated eigenvalues are trusted:
    /// √μ at the 1-based index ⌊fraction·N⌋ (clamped to [1, N]).
    pub fn trust_limit(&self, fraction: f64) -> f64 {
        let n = self.n();
        let idx = ((fraction * n as f64).floor() as usize).clamp(1, n);
        self.sqrt_mu[idx - 1]
    }
}

/// Modal damping Gram matrix D with D[j][k] = ⟨BB* v_j, v_k⟩, together with
/// ‖B*‖² (its operator 2-norm on the truncation) and β = ½‖B*‖².
#[derive(Debug, Clone)]
pub struct ModalDamping {
    d: Mat<f64>,
    bstar_norm_sq: f64,
    beta: f64,
}

impl ModalDamping {
    pub fn new(d: Mat<f64>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return Err(Error::Config("damping matrix must be square".into()));
        }
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                scale = scale.max(d[(i, j)].abs());
            }
        }
        for i in 0..n {
            for j in 0..i {
                if (d[(i, j)] - d[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::Config(format!(
                        "damping matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        // symmetric spectrum gives both the 2-norm and the PSD certificate
        let eigs = d
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("damping eigensolve failed: {e:?}")))?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_abs = eigs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if min < -1e-10 * max_abs.max(1.0) {
            return Err(Error::Config(format!(
                "damping matrix not positive semidefinite: smallest eigenvalue {min:e}"
            )));
        }
        Ok(ModalDamping { d, bstar_norm_sq: max_abs, beta: 0.5 * max_abs })
    }

    pub fn zero(n: usize) -> Self {
        ModalDamping { d: Mat::zeros(n, n), bstar_norm_sq: 0.0, beta: 0.0 }
    }

    pub fn d(&self) -> MatRef<'_, f64> {
        self.d.as_ref()
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    /// ‖B*‖² = ‖BB*‖ = ‖D‖₂ on the truncation.
    pub fn bstar_norm_sq(&self) -> f64 {
        self.bstar_norm_sq
    }

    /// β = ½‖B*‖², the half-width of the spectral localization strip.
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Modal stiffness perturbation K with K[j][l] = ⟨K v_j, v_l⟩ and the
/// relative size ‖K·diag(μ^{-1/2})‖₂ (must stay below 1).
#[derive(Debug, Clone)]
pub struct StiffnessPerturbation {
    k: Mat<f64>,
    relative_bound: f64,
}

impl StiffnessPerturbation {
    pub fn new(k: Mat<f64>, freqs: &Frequencies) -> Result<Self> {
        let n = freqs.n();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::Config(format!(
                "stiffness matrix is {}x{}, expected {n}x{n}",
                k.nrows(),
                k.ncols()
            )));
        }
        let scaled = Mat::from_fn(n, n, |i, j| C64::new(k[(i, j)] / freqs.sqrt_mu()[j], 0.0));
        let relative_bound = crate::linalg::spectral_norm(scaled.as_ref());
        // perturbed stiffness must stay positive definite
        let perturbed = Mat::from_fn(n, n, |i, j| {
            k[(i, j)] + if i == j { freqs.mu()[i] } else { 0.0 }
        });
        let eigs = perturbed
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("stiffness eigensolve failed: {e:?}")))?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::Config(format!(
                "stiffness perturbation destroys positivity: smallest eigenvalue of A+K is {min:e}"
            )));
        }
        Ok(StiffnessPerturbation { k, relative_bound })
    }

    pub fn k(&self) -> MatRef<'_, f64> {
        self.k.as_ref()
    }

    pub fn relative_bound(&self) -> f64 {
        self.relative_bound
    }
}

/// The two supported ways to perturb the undamped system.
#[derive(Debug, Clone)]
pub enum Perturbation {
    Damping(ModalDamping),
    Stiffness(StiffnessPerturbation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Dissipative,
    StiffnessPerturbed,
}

/// The assembled first-order generator (2N×2N, real entries) together with
/// its undamped reference and the modal data it was built from.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    g: Mat<f64>,
    g0: Mat<f64>,
    freqs: Frequencies,
    pert: Perturbation,
}

impl GeneratorMatrix {
    pub fn g(&self) -> MatRef<'_, f64> {
        self.g.as_ref()
    }

    pub fn g0(&self) -> MatRef<'_, f64> {
        self.g0.as_ref()
    }

    pub fn freqs(&self) -> &Frequencies {
        &self.freqs
    }

    pub fn pert(&self) -> &Perturbation {
        &self.pert
    }

    pub fn kind(&self) -> GeneratorKind {
        match self.pert {
            Perturbation::Damping(_) => GeneratorKind::Dissipative,
            Perturbation::Stiffness(_) => GeneratorKind::StiffnessPerturbed,
        }
    }

    pub fn damping(&self) -> Option<&ModalDamping> {
        match &self.pert {
            Perturbation::Damping(d) => Some(d),
            Perturbation::Stiffness(_) => None,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.freqs.n()
    }

    pub fn dim(&self) -> usize {
        2 * self.freqs.n()
    }

    /// β = ½‖B*‖² for dissipative systems, 0 otherwise.
    pub fn beta(&self) -> f64 {
        match &self.pert {
            Perturbation::Damping(d) => d.beta(),
            Perturbation::Stiffness(_) => 0.0,
        }
    }
}

/// Assemble the first-order generator in energy coordinates.
pub fn assemble_generator(freqs: &Frequencies, pert: Perturbation) -> Result<GeneratorMatrix> {
    let n = freqs.n();
    let s = freqs.sqrt_mu();
    let mut g0 = Mat::<f64>::zeros(2 * n, 2 * n);
    for k in 0..n {
        g0[(k, n + k)] = s[k];
        g0[(n + k, k)] = -s[k];
    }
    let mut g = g0.clone();
    match &pert {
        Perturbation::Damping(d) => {
            if d.n() != n {
                return Err(Error::Config(format!(
                    "damping matrix dimension {} does not match {} modes",
                    d.n(),
                    n
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    g[(n + i, n + j)] -= d.d()[(i, j)];
                }
            }
        }
        Perturbation::Stiffness(k) => {
            // K·S⁻¹ added to the lower-left block (positivity checked at construction)
            for i in 0..n {
                for j in 0..n {
                    g[(n + i, j)] -= k.k()[(i, j)] / s[j];
                }
            }
        }
    }
    Ok(GeneratorMatrix { g, g0, freqs: freqs.clone(), pert })
}

/// A state in energy coordinates: z = (S·x, v), so energy(z) = ½‖z‖².
#[derive(Debug, Clone)]
pub struct EnergyState {
    z: Vec<C64>,
}

impl EnergyState {
    pub fn new(z: Vec<C64>) -> Self {
        EnergyState { z }
    }

    /// Encode a modal state (position coefficients x, velocity coefficients v).
    pub fn from_modal(freqs: &Frequencies, x: &[C64], v: &[C64]) -> Result<Self> {
        let n = freqs.n();
        if x.len() != n || v.len() != n {
            return Err(Error::Config("modal state length does not match mode count".into()));
        }
        let mut z = Vec::with_capacity(2 * n);
        for k in 0..n {
            z.push(x[k] * freqs.sqrt_mu()[k]);
        }
        z.extend_from_slice(v);
        Ok(EnergyState { z })
    }

    /// Decode back to modal coefficients (x, v).
    pub fn to_modal(&self, freqs: &Frequencies) -> (Vec<C64>, Vec<C64>) {
        let n = freqs.n();
        let x = (0..n).map(|k| self.z[k] / freqs.sqrt_mu()[k]).collect();
        let v = self.z[n..].to_vec();
        (x, v)
    }

    /// The modal position block x = S⁻¹·z₁ (the quadratic-pencil unknown).
    pub fn position_block(&self, freqs: &Frequencies) -> Vec<C64> {
        (0..freqs.n()).map(|k| self.z[k] / freqs.sqrt_mu()[k]).collect()
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// E = ½‖z‖², the physical energy of the encoded state.
    pub fn energy(&self) -> f64 {
        0.5 * self.z.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Exact eigenpairs of the undamped reference G₀: for each mode k (1-based)
/// the pair (±i√μ_k, (e_k, ±i e_k)/√2). Returned in the order
/// (+1, −1, +2, −2, ...); the vectors form an orthonormal basis.
pub fn undamped_eigenpairs(freqs: &Frequencies) -> Vec<(C64, EnergyState)> {
    let n = freqs.n();
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        for sign in [1.0, -1.0] {
            out.push((
                C64::new(0.0, sign * freqs.sqrt_mu()[k]),
                undamped_eigenvector(n, k, sign),
            ));
        }
    }
    out
}

/// The eigenvector of G₀ for signed mode index `n` (positive: +i√μ_|n|).
pub fn undamped_pair(freqs: &Frequencies, signed_index: i32) -> (C64, EnergyState) {
    assert!(signed_index != 0, "mode index must be nonzero");
    let k = signed_index.unsigned_abs() as usize;
    assert!(k <= freqs.n(), "mode index out of range");
    let sign = if signed_index > 0 { 1.0 } else { -1.0 };
    (
        C64::new(0.0, sign * freqs.sqrt_mu()[k - 1]),
        undamped_eigenvector(freqs.n(), k - 1, sign),
    )
}

fn undamped_eigenvector(n: usize, k: usize, sign: f64) -> EnergyState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = vec![C64::new(0.0, 0.0); 2 * n];
    z[k] = C64::new(r, 0.0);
    z[n + k] = C64::new(0.0, sign * r);
    EnergyState::new(z)
}

/// Re⟨Gz, z⟩ for a real generator; dissipativity means this is ≤ 0.
pub fn energy_derivative(gen: &GeneratorMatrix, state: &EnergyState) -> f64 {
    let gz = matvec_real(gen.g(), state.z());
    gz.iter().zip(state.z()).map(|(a, b)| (a * b.conj()).re).sum()
}
