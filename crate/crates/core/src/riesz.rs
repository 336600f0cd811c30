//! Contour-integral machinery: resolvent application, quadratured spectral
//! (Riesz) projections, per-contour eigenvalue counting cross-checked
//! against the dense eigensolve, projector-difference norms against the
//! undamped reference, and high-frequency eigenvector extraction.
//!
//! Projector quadrature is the expensive kernel: each boundary node costs a
//! dense shifted inverse. Contours are independent work units processed in
//! parallel; within a contour, nodes are summed in fixed-size chunks in
//! index order so results do not depend on the thread schedule. For a real
//! generator the projector of a mirrored contour is the entrywise conjugate
//! of the original (substitute λ ↦ λ̄ in the integral), so negative-index
//! rectangles reuse the positive-index computation.

use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaps::{ContourRect, Contours, RectKind};
use crate::linalg::{inverse_shifted, matvec_real, spectral_norm, trace, vec_norm, C64};
use crate::modal::{EnergyState, GeneratorMatrix};
use crate::spectrum::EigenSet;

/// Quadrature controls for projector assembly.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Gauss–Legendre nodes per rectangle side on the first attempt.
    pub nodes_per_side: usize,
    /// Hard cap for the adaptive doubling.
    pub max_nodes_per_side: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { nodes_per_side: 32, max_nodes_per_side: 512 }
    }
}

impl QuadratureSettings {
    pub fn with_nodes(nodes_per_side: usize) -> Self {
        QuadratureSettings { nodes_per_side, ..Default::default() }
    }
}

/// A quadratured spectral projection with its quality certificates.
#[derive(Debug, Clone)]
pub struct ProjectorResult {
    p: Mat<C64>,
    idempotency_residual: f64,
    norm: f64,
    rank: usize,
    trace_raw: C64,
    contour_index: i32,
    nodes_per_side_used: usize,
    dilated: bool,
}

impl ProjectorResult {
    pub fn p(&self) -> MatRef<'_, C64> {
        self.p.as_ref()
    }

    /// ‖P² − P‖₂.
    pub fn idempotency_residual(&self) -> f64 {
        self.idempotency_residual
    }

    /// ‖P‖₂.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Number of enclosed eigenvalues (rounded real trace).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace_raw(&self) -> C64 {
        self.trace_raw
    }

    pub fn contour_index(&self) -> i32 {
        self.contour_index
    }

    pub fn nodes_per_side_used(&self) -> usize {
        self.nodes_per_side_used
    }

    /// Whether the contour had to be nudged off a near-boundary eigenvalue.
    pub fn dilated(&self) -> bool {
        self.dilated
    }

    /// Apply the projector to a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let dim = self.p.nrows();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            let vj = v[j];
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..dim {
                out[i] += self.p[(i, j)] * vj;
            }
        }
        out
    }

    /// Entrywise conjugate — the projector of the mirrored contour.
    pub fn conjugated(&self) -> ProjectorResult {
        let dim = self.p.nrows();
        ProjectorResult {
            p: Mat::from_fn(dim, dim, |i, j| self.p[(i, j)].conj()),
            contour_index: -self.contour_index,
            ..self.clone()
        }
    }
}

fn mat_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    a * b
}

/// Sum w·(λI − m)⁻¹ over the boundary rule, in parallel chunks of fixed
/// size, then scale by 1/(2πi). Chunk partials are combined in index order.
fn quadrature_sum(m: MatRef<'_, f64>, rect: &ContourRect, per_side: usize) -> Result<Mat<C64>> {
    let nodes = rect.quad_nodes(per_side);
    let dim = m.nrows();
    let partials: Result<Vec<Mat<C64>>> = nodes
        .par_chunks(8)
        .map(|chunk| {
            let mut acc = Mat::<C64>::zeros(dim, dim);
            for &(z, w) in chunk {
                let inv = inverse_shifted(m, z)?;
                for j in 0..dim {
                    for i in 0..dim {
                        acc[(i, j)] += w * inv[(i, j)];
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut p = Mat::<C64>::zeros(dim, dim);
    for part in partials? {
        for j in 0..dim {
            for i in 0..dim {
                p[(i, j)] += part[(i, j)];
            }
        }
    }
    // 1/(2πi) = −i/(2π)
    let scale = C64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI));
    for j in 0..dim {
        for i in 0..dim {
            p[(i, j)] *= scale;
        }
    }
    Ok(p)
}

/// Spectral projection of `m` onto the part of its spectrum enclosed by
/// `contour`: P = (1/2πi) ∮ (λ − m)⁻¹ dλ, by composite Gauss–Legendre with
/// adaptive node doubling until ‖P²−P‖₂ < 1e-6·(1+‖P‖₂).
///
/// `spectrum_hint`, when available, triggers a small dilation of contours
/// that pass within 1e-9·width of an eigenvalue (the integral is otherwise
/// ill-conditioned). Rank is certified by |Re trace − rank| < 0.1 and
/// |Im trace| < 0.05.
pub fn projector(
    m: MatRef<'_, f64>,
    contour: &ContourRect,
    settings: &QuadratureSettings,
    spectrum_hint: Option<&[C64]>,
) -> Result<ProjectorResult> {
    let width = contour.width();
    let mut rect = contour.clone();
    let mut dilated = false;
    if let Some(spectrum) = spectrum_hint {
        for _ in 0..2 {
            let min_dist = spectrum
                .iter()
                .map(|&l| rect.boundary_distance(l))
                .fold(f64::INFINITY, f64::min);
            if min_dist >= 1e-9 * width {
                break;
            }
            rect = rect.dilated(1e-3 * width);
            dilated = true;
        }
        let min_dist = spectrum
            .iter()
            .map(|&l| rect.boundary_distance(l))
            .fold(f64::INFINITY, f64::min);
        if min_dist < 1e-9 * width {
            return Err(Error::Numerical(format!(
                "contour {} cannot be dilated off an eigenvalue at distance {min_dist:.3e}",
                contour.index()
            )));
        }
    }

    let mut per_side = settings.nodes_per_side.max(2);
    loop {
        let p = quadrature_sum(m, &rect, per_side)?;
        let norm = spectral_norm(p.as_ref());
        let p2 = mat_mul(p.as_ref(), p.as_ref());
        let dim = p.nrows();
        let diff = Mat::from_fn(dim, dim, |i, j| p2[(i, j)] - p[(i, j)]);
        let residual = spectral_norm(diff.as_ref());
        let tight = residual < 1e-6 * (1.0 + norm);
        let capped = per_side * 2 > settings.max_nodes_per_side;
        if tight || (capped && residual <= 1e-4 * (1.0 + norm)) {
            let t = trace(p.as_ref());
            let rank_f = t.re.round();
            if (t.re - rank_f).abs() >= 0.1 || t.im.abs() >= 0.05 || rank_f < 0.0 {
                return Err(Error::Numerical(format!(
                    "projector trace {t} for contour {} is not close to a nonnegative \
                     integer: quadrature or truncation failure",
                    contour.index()
                )));
            }
            return Ok(ProjectorResult {
                p,
                idempotency_residual: residual,
                norm,
                rank: rank_f as usize,
                trace_raw: t,
                contour_index: contour.index(),
                nodes_per_side_used: per_side,
                dilated,
            });
        }
        if capped {
            return Err(Error::Numerical(format!(
                "quadrature insufficient on contour {} ({per_side} nodes/side, \
                 idempotency residual {residual:.3e}): increase nodes_per_side",
                contour.index()
            )));
        }
        per_side *= 2;
    }
}

/// Apply the resolvent (λ − G)⁻¹ to a vector by dense LU. When the shift
/// sits (numerically) on the spectrum the error names the colliding
/// eigenvalue; a merely close shift prints a warning.
pub fn resolvent_apply(
    gen: &GeneratorMatrix,
    lambda: C64,
    rhs: &[C64],
    known_spectrum: Option<&EigenSet>,
) -> Result<Vec<C64>> {
    let nearest = known_spectrum.and_then(|e| {
        e.eigenvalues()
            .iter()
            .copied()
            .min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm()))
    });
    if let Some(near) = nearest {
        if (near - lambda).norm() < 1e-9 * (1.0 + lambda.norm()) {
            eprintln!(
                "warning: resolvent shift {lambda} is within 1e-9 of eigenvalue {near}; \
                 the solve is ill-conditioned"
            );
        }
    }
    let (w, rel_residual) = crate::linalg::solve_shifted(gen.g(), lambda, rhs).map_err(
        |e| match (&e, nearest) {
            (Error::SingularShift { lambda, .. }, Some(near)) => {
                Error::SingularShift { lambda: *lambda, nearest: near }
            }
            _ => e,
        },
    )?;
    if rel_residual >= 1e-10 {
        return match nearest {
            Some(near) => Err(Error::SingularShift { lambda, nearest: near }),
            None => Err(Error::Numerical(format!(
                "resolvent solve at {lambda} left relative residual {rel_residual:.3e}"
            ))),
        };
    }
    Ok(w)
}

/// Eigenvalue count attributed to one contour by each method.
#[derive(Debug, Clone, Copy)]
pub struct CountRow {
    pub index: i32,
    pub kind: RectKind,
    /// Rank of the quadratured projector of the perturbed generator.
    pub rank: usize,
    /// Direct point-in-rectangle count of the dense eigensolve.
    pub direct: usize,
    /// Direct count of the undamped reference eigenvalues ±i√μ_k.
    pub direct_reference: usize,
    pub nodes_per_side_used: usize,
}

/// Counting table: the low-frequency box plus every isolating rectangle.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub box_row: CountRow,
    pub gamma_rows: Vec<CountRow>,
}

impl CountTable {
    pub fn rows(&self) -> impl Iterator<Item = &CountRow> {
        std::iter::once(&self.box_row).chain(self.gamma_rows.iter())
    }
}

fn direct_count(eigenvalues: &[C64], rect: &ContourRect) -> usize {
    let eps = 1e-12 * rect.scale();
    eigenvalues.iter().filter(|&&l| rect.contains(l, eps)).count()
}

fn reference_eigenvalues(gen: &GeneratorMatrix) -> Vec<C64> {
    gen.freqs()
        .sqrt_mu()
        .iter()
        .flat_map(|&nu| [C64::new(0.0, nu), C64::new(0.0, -nu)])
        .collect()
}

/// Count enclosed eigenvalues on the box and every isolating rectangle by
/// projector rank, and cross-check against direct counting of the dense
/// spectrum and of the undamped reference. The two methods must agree
/// exactly, the box must hold 2N₀ eigenvalues, and every isolating
/// rectangle exactly one.
pub fn count_all(
    gen: &GeneratorMatrix,
    eigs: &EigenSet,
    contours: &Contours,
    settings: &QuadratureSettings,
) -> Result<CountTable> {
    let spectrum = eigs.eigenvalues().to_vec();
    let reference = reference_eigenvalues(gen);

    let make_row = |rect: &ContourRect, proj: &ProjectorResult| CountRow {
        index: rect.index(),
        kind: rect.kind(),
        rank: proj.rank(),
        direct: direct_count(&spectrum, rect),
        direct_reference: direct_count(&reference, rect),
        nodes_per_side_used: proj.nodes_per_side_used(),
    };

    // positive-index rectangles carry the quadrature; mirrored ones reuse it
    let positives: Vec<&ContourRect> = contours.positive_gammas().collect();
    let pos_projs: Result<Vec<ProjectorResult>> = positives
        .par_iter()
        .map(|rect| projector(gen.g(), rect, settings, Some(&spectrum)))
        .collect();
    let pos_projs = pos_projs?;

    let box_proj = projector(gen.g(), contours.box_rect(), settings, Some(&spectrum))?;
    let box_row = make_row(contours.box_rect(), &box_proj);

    let mut gamma_rows = Vec::with_capacity(contours.gammas().len());
    for (rect, proj) in positives.iter().zip(&pos_projs) {
        gamma_rows.push(make_row(rect, proj));
    }
    for rect in contours.gammas().iter().filter(|r| r.index() < 0) {
        let pos = pos_projs
            .iter()
            .find(|p| p.contour_index() == -rect.index())
            .expect("mirrored rectangle without positive partner");
        gamma_rows.push(make_row(rect, &pos.conjugated()));
    }

    let mut problems = Vec::new();
    let expected_box = 2 * contours.n0();
    if box_row.rank != box_row.direct || box_row.direct != box_row.direct_reference {
        problems.push(format!(
            "box: projector rank {} vs direct count {} (reference {})",
            box_row.rank, box_row.direct, box_row.direct_reference
        ));
    } else if box_row.rank != expected_box {
        problems.push(format!(
            "box holds {} eigenvalues, expected 2·N₀ = {expected_box}",
            box_row.rank
        ));
    }
    for row in &gamma_rows {
        if row.rank != row.direct || row.direct != row.direct_reference {
            problems.push(format!(
                "rectangle {}: projector rank {} vs direct count {} (reference {})",
                row.index, row.rank, row.direct, row.direct_reference
            ));
        } else if row.rank != 1 {
            problems.push(format!(
                "rectangle {} holds {} eigenvalues, expected exactly one",
                row.index, row.rank
            ));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Numerical(format!(
            "eigenvalue counting failed (quadrature or truncation failure): {}",
            problems.join("; ")
        )));
    }
    Ok(CountTable { box_row, gamma_rows })
}

/// Result of projecting an undamped eigenvector through a perturbed
/// spectral projection.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub phi: Vec<C64>,
    /// ‖φ − V‖ in the energy norm.
    pub closeness: f64,
    pub phi_norm: f64,
    /// Rayleigh quotient ⟨Gφ, φ⟩/⟨φ, φ⟩.
    pub rayleigh: C64,
}

/// Extract the perturbed eigenvector associated with a rank-one contour:
/// φ = P V (not renormalized). Refuses projectors of rank ≠ 1.
pub fn extract_eigvec(
    gen: &GeneratorMatrix,
    proj: &ProjectorResult,
    v: &EnergyState,
) -> Result<Extraction> {
    if proj.rank() != 1 {
        return Err(Error::Numerical(format!(
            "eigenvector extraction needs a rank-one projection; contour {} has rank {}",
            proj.contour_index(),
            proj.rank()
        )));
    }
    let phi = proj.apply(v.z());
    let phi_norm = vec_norm(&phi);
    if phi_norm == 0.0 {
        return Err(Error::Numerical(format!(
            "projection of the reference eigenvector through contour {} vanished",
            proj.contour_index()
        )));
    }
    let diff: Vec<C64> = phi.iter().zip(v.z()).map(|(a, b)| a - b).collect();
    let gphi = matvec_real(gen.g(), &phi);
    let num: C64 = gphi.iter().zip(&phi).map(|(a, b)| a * b.conj()).sum();
    let den: f64 = phi.iter().map(|c| c.norm_sqr()).sum();
    Ok(Extraction {
        closeness: vec_norm(&diff),
        phi_norm,
        rayleigh: num / den,
        phi,
    })
}

/// Closeness data for one isolating rectangle (positive index).
#[derive(Debug, Clone)]
pub struct GammaRow {
    pub index: i32,
    /// ‖P^B − P⁰‖₂ on this contour.
    pub diff_norm: f64,
    /// Gap factor δ_n/δ_{n−1}² the norms are bounded against.
    pub bound_factor: f64,
    /// ‖φ_n − V_n‖ (energy norm).
    pub closeness: f64,
    pub phi_norm: f64,
    pub rayleigh: C64,
    /// Eigenvalue of the dense solve enclosed by this contour.
    pub lambda_inside: C64,
    /// |rayleigh − lambda_inside|.
    pub rayleigh_gap: f64,
    pub nodes_per_side_used: usize,
}

/// Projector-difference norms and eigenvector closeness across the built
/// positive rectangles, with fitted bound constants.
#[derive(Debug, Clone)]
pub struct DiffReport {
    pub rows: Vec<GammaRow>,
    /// Smallest C with ‖P^B − P⁰‖ ≤ C·δ_n/δ_{n−1}² on every row.
    pub fitted_c: f64,
    /// Smallest C with ‖φ_n − V_n‖ ≤ C·δ_n/δ_{n−1}² on every row.
    pub fitted_c_closeness: f64,
}

impl DiffReport {
    /// Running sums of squared diff norms (quadratic closeness summability).
    pub fn partial_square_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.rows
            .iter()
            .map(|r| {
                acc += r.diff_norm * r.diff_norm;
                acc
            })
            .collect()
    }

    /// Running sums of squared eigenvector closeness values.
    pub fn partial_closeness_square_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.rows
            .iter()
            .map(|r| {
                acc += r.closeness * r.closeness;
                acc
            })
            .collect()
    }
}

/// Gap factor δ_n/δ_{n−1}² for a 1-based mode index n ≥ 2.
fn bound_factor(delta: &[f64], n: usize) -> f64 {
    let d_n = delta[n - 1];
    let d_prev = delta[n - 2];
    d_n / (d_prev * d_prev)
}

/// For every built positive rectangle: compute both projections (perturbed
/// and undamped reference), their difference norm, and the extracted
/// eigenvector's closeness to the undamped one; mirrored rectangles give
/// identical values by conjugation and are not recomputed.
pub fn projector_diff_norms(
    gen: &GeneratorMatrix,
    eigs: &EigenSet,
    contours: &Contours,
    settings: &QuadratureSettings,
) -> Result<DiffReport> {
    let spectrum = eigs.eigenvalues().to_vec();
    let reference = reference_eigenvalues(gen);
    let delta: Vec<f64> = gen.freqs().sqrt_mu().windows(2).map(|w| w[1] - w[0]).collect();

    let positives: Vec<&ContourRect> = contours.positive_gammas().collect();
    let rows: Result<Vec<GammaRow>> = positives
        .par_iter()
        .map(|rect| {
            let n = rect.index() as usize;
            let p_b = projector(gen.g(), rect, settings, Some(&spectrum))?;
            let p_0 = projector(gen.g0(), rect, settings, Some(&reference))?;
            let dim = p_b.p().nrows();
            let diff = Mat::from_fn(dim, dim, |i, j| p_b.p()[(i, j)] - p_0.p()[(i, j)]);
            let diff_norm = spectral_norm(diff.as_ref());

            let v = crate::modal::undamped_pair(gen.freqs(), n as i32).1;
            let ex = extract_eigvec(gen, &p_b, &v)?;

            let enclosed: Vec<C64> = spectrum
                .iter()
                .copied()
                .filter(|&l| rect.contains(l, 1e-12 * rect.scale()))
                .collect();
            if enclosed.len() != 1 {
                return Err(Error::Numerical(format!(
                    "rectangle {n} encloses {} dense eigenvalues, expected one",
                    enclosed.len()
                )));
            }
            let lambda_inside = enclosed[0];
            Ok(GammaRow {
                index: rect.index(),
                diff_norm,
                bound_factor: bound_factor(&delta, n),
                closeness: ex.closeness,
                phi_norm: ex.phi_norm,
                rayleigh: ex.rayleigh,
                lambda_inside,
                rayleigh_gap: (ex.rayleigh - lambda_inside).norm(),
                nodes_per_side_used: p_b.nodes_per_side_used(),
            })
        })
        .collect();
    let rows = rows?;
    let fitted_c = rows
        .iter()
        .map(|r| r.diff_norm / r.bound_factor)
        .fold(0.0f64, f64::max);
    let fitted_c_closeness = rows
        .iter()
        .map(|r| r.closeness / r.bound_factor)
        .fold(0.0f64, f64::max);
    Ok(DiffReport { rows, fitted_c, fitted_c_closeness })
}
