//! Spectral-gap diagnostics and contour geometry.
//!
//! Working with the square-root frequencies ν_k = √μ_k, the gaps are
//! δ_k = ν_{k+1} − ν_k. Two structural assumptions drive everything
//! downstream:
//!
//! - **gap growth**: δ_k → ∞,
//! - **gap regularity**: the ratio sequence δ_{k+1}/δ_k² is square-summable.
//!
//! Under gap growth, beyond a starting index N₀ each perturbed eigenvalue
//! pair can be isolated by a rectangle Γ^(±n) centered at height ±ν_n, and
//! the finitely many low modes are enclosed in a single box. This module
//! computes the gap data, issues finite-data verdicts for the two
//! assumptions, selects N₀, and builds the rectangles with their
//! counterclockwise Gauss–Legendre quadrature rules.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{segment_rule, C64};
use crate::modal::{Family, Frequencies};

/// Outcome of a finite-data assumption check. Limits of a truncated
/// sequence are undecidable from finitely many terms, so `Inconclusive`
/// is a first-class answer; built-in families get exact overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails => write!(f, "fails"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Gap data for one frequency family, with assumption verdicts.
#[derive(Debug, Clone)]
pub struct GapProfile {
    delta: Vec<f64>,
    a2_terms: Vec<f64>,
    family: Family,
    a1: (Verdict, String),
    a2: (Verdict, String),
}

/// Compute gaps, ratio terms, and assumption verdicts for a family.
pub fn gaps(freqs: &Frequencies) -> GapProfile {
    let s = freqs.sqrt_mu();
    let delta: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let a2_terms: Vec<f64> = delta
        .windows(2)
        .map(|w| {
            let r = w[1] / (w[0] * w[0]);
            r * r
        })
        .collect();
    let a1 = check_a1(&delta, freqs.family());
    let a2 = check_a2(&a2_terms, freqs.family());
    GapProfile { delta, a2_terms, family: freqs.family(), a1, a2 }
}

impl GapProfile {
    /// δ_k = ν_{k+1} − ν_k; entry `i` is the gap above mode `i+1` (1-based k = i+1).
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Squared ratio terms (δ_{k+1}/δ_k²)², k = 1..N−2.
    pub fn a2_terms(&self) -> &[f64] {
        &self.a2_terms
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn a1_verdict(&self) -> Verdict {
        self.a1.0
    }

    pub fn a1_evidence(&self) -> &str {
        &self.a1.1
    }

    pub fn a2_verdict(&self) -> Verdict {
        self.a2.0
    }

    pub fn a2_evidence(&self) -> &str {
        &self.a2.1
    }
}

/// Least-squares fit ln y = c + q·ln k; returns (q, rms log-residual).
/// `None` if any y is non-positive or fewer than two points.
fn power_fit(ks: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if ys.len() < 2 || ys.iter().any(|&y| y <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let q = cov / var;
    let c = my - q * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (c + q * x);
            r * r
        })
        .sum();
    Some((q, (ss / n).sqrt()))
}

/// Final third of a sequence (at least two entries), with its 1-based indices.
fn tail_of(seq: &[f64], first_index: usize) -> (Vec<f64>, Vec<f64>) {
    let m = seq.len().div_ceil(3).max(2).min(seq.len());
    let start = seq.len() - m;
    let ks = (start..seq.len()).map(|i| (i + first_index) as f64).collect();
    (seq[start..].to_vec(), ks)
}

/// Gap-growth verdict: do the gaps δ_k tend to infinity?
fn check_a1(delta: &[f64], family: Family) -> (Verdict, String) {
    match family {
        Family::HingedBeam => {
            return (
                Verdict::Holds,
                "family rule: gaps (2k+1)·π² grow without bound".into(),
            );
        }
        Family::ClampedFreeBeam => {
            return (
                Verdict::Holds,
                "family rule: gaps grow like 2k·π² for large k".into(),
            );
        }
        Family::WaveString => {
            return (Verdict::Fails, "family rule: gaps are the constant π".into());
        }
        Family::Custom => {}
    }
    let (tail, ks) = tail_of(delta, 1);
    let m = tail.len();
    let mean = tail.iter().sum::<f64>() / m as f64;
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if mean > 0.0 && max - min < 0.01 * mean {
        return (
            Verdict::Fails,
            format!(
                "tail of {m} gaps is flat: spread {:.3e} is below 1% of mean {:.3e}",
                max - min,
                mean
            ),
        );
    }
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    match power_fit(&ks, &tail) {
        Some((q, resid)) if increasing && q > 0.0 && resid < 0.05 => (
            Verdict::Holds,
            format!(
                "tail strictly increasing with power-law exponent {q:.3} > 0 \
                 (rms log-residual {resid:.2e})"
            ),
        ),
        Some((q, resid)) => (
            Verdict::Inconclusive,
            format!(
                "tail trend ambiguous: strictly increasing = {increasing}, \
                 exponent {q:.3}, rms log-residual {resid:.2e}"
            ),
        ),
        None => (
            Verdict::Inconclusive,
            "tail admits no power-law fit (non-positive gaps)".into(),
        ),
    }
}

/// Gap-regularity verdict: are the squared ratio terms summable
/// (equivalently, do they decay faster than 1/k)?
fn check_a2(a2_terms: &[f64], family: Family) -> (Verdict, String) {
    match family {
        Family::HingedBeam => {
            return (
                Verdict::Holds,
                "family rule: ratio terms decay like k^-2, summable".into(),
            );
        }
        Family::ClampedFreeBeam => {
            return (
                Verdict::Holds,
                "family rule: ratio terms decay like k^-2, summable".into(),
            );
        }
        Family::WaveString => {
            return (
                Verdict::Fails,
                "family rule: ratio terms are the positive constant 1/π²".into(),
            );
        }
        Family::Custom => {}
    }
    let (tail, ks) = tail_of(a2_terms, 1);
    let m = tail.len();
    let mean = tail.iter().sum::<f64>() / m as f64;
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if mean > 0.0 && max - min < 0.01 * mean {
        return (
            Verdict::Fails,
            format!(
                "tail of {m} ratio terms is flat and positive \
                 (mean {mean:.3e}): not summable"
            ),
        );
    }
    match power_fit(&ks, &tail) {
        Some((q, resid)) if -q > 1.0 && resid < 0.05 => (
            Verdict::Holds,
            format!(
                "tail decays like k^{q:.3} (faster than 1/k; rms log-residual {resid:.2e})"
            ),
        ),
        Some((q, resid)) if q >= 0.0 && resid < 0.05 && min > 0.0 => (
            Verdict::Fails,
            format!(
                "tail is non-decreasing (exponent {q:.3}, rms log-residual {resid:.2e}): \
                 not summable"
            ),
        ),
        Some((q, resid)) => (
            Verdict::Inconclusive,
            format!("tail exponent {q:.3} (rms log-residual {resid:.2e}) is borderline"),
        ),
        None => (
            Verdict::Inconclusive,
            "tail admits no power-law fit (non-positive terms)".into(),
        ),
    }
}

/// Smallest starting index N₀ ≥ 2 with 2‖B*‖²/δ_{n−1} ≤ κ for every
/// observed n ≥ N₀ (1-based mode indices).
pub fn compute_n0(profile: &GapProfile, bstar_norm_sq: f64, kappa: f64) -> Result<usize> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Config(format!(
            "kappa must lie strictly inside (0, 1), got {kappa}"
        )));
    }
    if bstar_norm_sq < 0.0 {
        return Err(Error::Config("operator norm must be nonnegative".into()));
    }
    let threshold = 2.0 * bstar_norm_sq / kappa;
    let delta = profile.delta();
    // last gap index (0-based) violating delta >= threshold
    let last_bad = delta
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < threshold)
        .map(|(i, _)| i)
        .next_back();
    match last_bad {
        None => Ok(2),
        Some(i) if i + 1 >= delta.len() => Err(Error::Hypothesis(format!(
            "gap condition 2·{bstar_norm_sq:.3e}/δ ≤ {kappa} is not satisfied through \
             the tail: truncation too small or damping too strong"
        ))),
        // first admissible mode index is two above the bad gap (1-based)
        Some(i) => Ok((i + 3).max(2)),
    }
}

/// Which role a rectangle plays in the contour family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectKind {
    /// Isolating rectangle Γ^(n) around a single high mode.
    Gamma,
    /// Low-frequency box enclosing modes ±1..±N₀.
    Box,
}

/// Closed axis-aligned rectangle in the complex plane with a counterclockwise
/// composite Gauss–Legendre quadrature rule on its boundary.
#[derive(Debug, Clone)]
pub struct ContourRect {
    index: i32,
    kind: RectKind,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

impl ContourRect {
    pub fn new(
        index: i32,
        kind: RectKind,
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
    ) -> Result<Self> {
        if index == 0 {
            return Err(Error::Config("contour index must be nonzero".into()));
        }
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::Config(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(ContourRect { index, kind, re_min, re_max, im_min, im_max })
    }

    pub fn index(&self) -> i32 {
        self.index
    }

    pub fn kind(&self) -> RectKind {
        self.kind
    }

    pub fn re_min(&self) -> f64 {
        self.re_min
    }

    pub fn re_max(&self) -> f64 {
        self.re_max
    }

    pub fn im_min(&self) -> f64 {
        self.im_min
    }

    pub fn im_max(&self) -> f64 {
        self.im_max
    }

    /// Horizontal extent; for an isolating rectangle this equals δ_n.
    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    /// Closed-rectangle membership with absolute slack `eps`.
    pub fn contains(&self, z: C64, eps: f64) -> bool {
        z.re >= self.re_min - eps
            && z.re <= self.re_max + eps
            && z.im >= self.im_min - eps
            && z.im <= self.im_max + eps
    }

    /// Natural length scale for membership slack.
    pub fn scale(&self) -> f64 {
        self.re_max
            .abs()
            .max(self.re_min.abs())
            .max(self.im_max.abs())
            .max(self.im_min.abs())
            .max(1.0)
    }

    /// Distance from `z` to the rectangle's boundary curve (0 on the curve,
    /// positive inside and outside alike).
    pub fn boundary_distance(&self, z: C64) -> f64 {
        let inside = self.contains(z, 0.0);
        if inside {
            (z.re - self.re_min)
                .min(self.re_max - z.re)
                .min(z.im - self.im_min)
                .min(self.im_max - z.im)
        } else {
            let dx = (self.re_min - z.re).max(0.0).max(z.re - self.re_max);
            let dy = (self.im_min - z.im).max(0.0).max(z.im - self.im_max);
            (dx * dx + dy * dy).sqrt()
        }
    }

    /// The same rectangle grown by `amount` on every side.
    pub fn dilated(&self, amount: f64) -> ContourRect {
        ContourRect {
            index: self.index,
            kind: self.kind,
            re_min: self.re_min - amount,
            re_max: self.re_max + amount,
            im_min: self.im_min - amount,
            im_max: self.im_max + amount,
        }
    }

    /// Composite Gauss–Legendre rule on the boundary, counterclockwise:
    /// bottom (left→right), right (up), top (right→left), left (down).
    /// Each item is (node, weight·dλ); ∮ f dλ ≈ Σ f(node)·weight.
    pub fn quad_nodes(&self, nodes_per_side: usize) -> Vec<(C64, C64)> {
        let c1 = Complex64::new(self.re_min, self.im_min);
        let c2 = Complex64::new(self.re_max, self.im_min);
        let c3 = Complex64::new(self.re_max, self.im_max);
        let c4 = Complex64::new(self.re_min, self.im_max);
        let mut nodes = Vec::with_capacity(4 * nodes_per_side);
        for (p, q) in [(c1, c2), (c2, c3), (c3, c4), (c4, c1)] {
            nodes.extend(segment_rule(p, q, nodes_per_side));
        }
        nodes
    }
}

/// Center height a_n of the gap above mode n−1 — the midpoint
/// (ν_{n−1} + ν_n)/2, with the convention ν₀ = 0 so a₁ = ν₁/2.
pub fn a_height(freqs: &Frequencies, n: usize) -> f64 {
    let s = freqs.sqrt_mu();
    assert!(n >= 1 && n <= s.len(), "a_height index {n} out of range");
    if n == 1 {
        0.5 * s[0]
    } else {
        0.5 * (s[n - 2] + s[n - 1])
    }
}

/// Isolating rectangle Γ^(n) for 1-based mode n (positive index):
/// Re ∈ [−δ_n/2, δ_n/2], Im ∈ [a_n, a_{n+1}]. Requires n ≤ N−1.
pub fn gamma_rect(freqs: &Frequencies, n: usize) -> Result<ContourRect> {
    let s = freqs.sqrt_mu();
    if n < 1 || n + 1 > s.len() {
        return Err(Error::Config(format!(
            "isolating rectangle index {n} out of range 1..{}",
            s.len().saturating_sub(1)
        )));
    }
    let half_delta = 0.5 * (s[n] - s[n - 1]);
    if half_delta <= 0.0 {
        return Err(Error::Config(format!("gap above mode {n} is not positive")));
    }
    let rect = ContourRect::new(
        n as i32,
        RectKind::Gamma,
        -half_delta,
        half_delta,
        a_height(freqs, n),
        a_height(freqs, n + 1),
    )?;
    debug_assert!(
        rect.im_min() < s[n - 1] && s[n - 1] < rect.im_max(),
        "center height must lie strictly inside the rectangle"
    );
    Ok(rect)
}

/// Mirror of a rectangle across the real axis (complex conjugation).
fn conjugate_rect(rect: &ContourRect) -> ContourRect {
    ContourRect {
        index: -rect.index,
        kind: rect.kind,
        re_min: rect.re_min,
        re_max: rect.re_max,
        im_min: -rect.im_max,
        im_max: -rect.im_min,
    }
}

/// The full contour family for one run: the low-frequency box plus
/// isolating rectangles Γ^(±n) for N₀ < n up to the trust limit.
#[derive(Debug, Clone)]
pub struct Contours {
    box_rect: ContourRect,
    gammas: Vec<ContourRect>,
    n0: usize,
    trust_limit: f64,
}

impl Contours {
    pub fn box_rect(&self) -> &ContourRect {
        &self.box_rect
    }

    /// All isolating rectangles: positive indices ascending, then their
    /// conjugate mirrors in the same order.
    pub fn gammas(&self) -> &[ContourRect] {
        &self.gammas
    }

    pub fn positive_gammas(&self) -> impl Iterator<Item = &ContourRect> {
        self.gammas.iter().filter(|r| r.index() > 0)
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn trust_limit(&self) -> f64 {
        self.trust_limit
    }

    /// Box plus all isolating rectangles.
    pub fn all_rects(&self) -> impl Iterator<Item = &ContourRect> {
        std::iter::once(&self.box_rect).chain(self.gammas.iter())
    }

    /// Largest |Im| reached by the built family.
    pub fn im_cap(&self) -> f64 {
        self.all_rects().fold(0.0f64, |m, r| m.max(r.im_max().abs()))
    }
}

/// Build the box and the isolating rectangles Γ^(±n), n = N₀+1, …, stopping
/// when a rectangle would poke above the trust limit √μ_{⌊trust_fraction·N⌋}.
pub fn build_contours(
    freqs: &Frequencies,
    n0: usize,
    trust_fraction: f64,
) -> Result<Contours> {
    let s = freqs.sqrt_mu();
    let n_modes = s.len();
    if n0 < 2 {
        return Err(Error::Config(format!("starting index must be >= 2, got {n0}")));
    }
    if n0 + 1 > n_modes - 1 {
        return Err(Error::Config(format!(
            "starting index {n0} leaves no isolating rectangle below mode {n_modes}"
        )));
    }
    let trust_limit = freqs.trust_limit(trust_fraction);
    let mut positives = Vec::new();
    for n in (n0 + 1)..=(n_modes - 1) {
        if a_height(freqs, n + 1) > trust_limit * (1.0 + 1e-12) {
            break;
        }
        positives.push(gamma_rect(freqs, n)?);
    }
    if positives.is_empty() {
        return Err(Error::Config(format!(
            "trust region (|Im| ≤ {trust_limit:.3e}) admits no isolating rectangle \
             above index {n0}; increase n_modes or trust_fraction"
        )));
    }
    let negatives: Vec<ContourRect> = positives.iter().map(conjugate_rect).collect();
    let mut gammas = positives;
    gammas.extend(negatives);

    // box: |Im| ≤ a_{N₀+1}, |Re| ≤ δ_{N₀}/2 — meets Γ^(±(N₀+1)) edge to edge
    // and encloses exactly the 2N₀ low eigenvalues
    let half_delta = 0.5 * (s[n0] - s[n0 - 1]);
    let top = a_height(freqs, n0 + 1);
    let box_rect =
        ContourRect::new(n0 as i32, RectKind::Box, -half_delta, half_delta, -top, top)?;
    Ok(Contours { box_rect, gammas, n0, trust_limit })
}

/// Check that the admissible spectrum zones are covered by the built
/// rectangles: the vertical strip 𝒞 = {|λ| ≥ ν₁, −β ≤ Re λ ≤ 0} (up to the
/// built height) and the real interval ℐ = [−β−(β²−μ₁)₊^½, (β²−μ₁)₊^½].
/// Combines exact half-width inequalities with a dense boundary sample.
pub fn verify_region_cover(
    profile: &GapProfile,
    contours: &Contours,
    beta: f64,
    mu1: f64,
) -> bool {
    let n0 = contours.n0();
    let delta = profile.delta();
    let surplus = (beta * beta - mu1).max(0.0).sqrt();
    let reach = beta + surplus;

    // exact inequalities: both the gap below N₀ and the box half-width must
    // clear the real interval's reach, and every rectangle must span the strip
    if n0 >= 2 && n0 - 2 < delta.len() && 0.5 * delta[n0 - 2] <= reach {
        return false;
    }
    if contours.box_rect().re_max() <= reach {
        return false;
    }
    for rect in contours.gammas() {
        if 0.5 * rect.width() < beta {
            return false;
        }
    }

    let covered = |z: C64| {
        contours
            .all_rects()
            .any(|r| r.contains(z, 1e-12 * r.scale()))
    };

    let nu1 = mu1.max(0.0).sqrt();
    let cap = contours.im_cap();
    let mut checked = 0usize;

    // real interval ℐ
    for i in 0..=400 {
        let x = -beta - surplus + (i as f64 / 400.0) * (reach + surplus);
        checked += 1;
        if !covered(C64::new(x, 0.0)) {
            return false;
        }
    }
    // strip boundary: vertical lines Re = −β and Re = 0
    for &x in &[-beta, 0.0] {
        for i in 0..=800 {
            let y = -cap + (i as f64 / 800.0) * (2.0 * cap);
            let z = C64::new(x, y);
            if z.norm() < nu1 {
                continue;
            }
            checked += 1;
            if !covered(z) {
                return false;
            }
        }
    }
    // inner boundary arc |λ| = ν₁ between the strip walls
    for i in 0..720 {
        let th = 2.0 * std::f64::consts::PI * (i as f64) / 720.0;
        let z = C64::new(nu1 * th.cos(), nu1 * th.sin());
        if z.re < -beta - 1e-12 * (1.0 + beta) || z.re > 1e-12 {
            continue;
        }
        if z.im.abs() > cap {
            continue;
        }
        checked += 1;
        if !covered(z) {
            return false;
        }
    }
    // interior grid of the strip, up to the built height
    for ix in 0..=24 {
        let x = if beta > 0.0 { -beta + (ix as f64 / 24.0) * beta } else { 0.0 };
        for iy in 0..=160 {
            let y = -cap + (iy as f64 / 160.0) * (2.0 * cap);
            let z = C64::new(x, y);
            if z.norm() < nu1 {
                continue;
            }
            checked += 1;
            if !covered(z) {
                return false;
            }
        }
        if beta == 0.0 {
            break;
        }
    }
    debug_assert!(checked >= 1000, "cover check sampled only {checked} points");
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{hinged_beam, wave_string};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn custom(sqrt_mu: impl Fn(usize) -> f64, n: usize) -> Frequencies {
        let mu = (1..=n).map(|k| sqrt_mu(k).powi(2)).collect();
        Frequencies::new(mu, Family::Custom).unwrap()
    }

    #[test]
    fn gaps_of_hinged_beam() {
        let p = gaps(&hinged_beam(4).unwrap());
        let pi2 = PI * PI;
        assert_eq!(p.delta().len(), 3);
        assert_abs_diff_eq!(p.delta()[0], 3.0 * pi2, epsilon = 1e-10);
        assert_abs_diff_eq!(p.delta()[1], 5.0 * pi2, epsilon = 1e-10);
        assert_abs_diff_eq!(p.delta()[2], 7.0 * pi2, epsilon = 1e-10);
        // (δ₂/δ₁²)² = (5/(9π²))²
        assert_abs_diff_eq!(
            p.a2_terms()[0],
            25.0 / (81.0 * PI.powi(4)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaps_of_wave_string_are_constant() {
        let p = gaps(&wave_string(6).unwrap());
        for &d in p.delta() {
            assert_abs_diff_eq!(d, PI, epsilon = 1e-12);
        }
        for &t in p.a2_terms() {
            assert_abs_diff_eq!(t, 1.0 / (PI * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn family_overrides() {
        let h = gaps(&hinged_beam(8).unwrap());
        assert_eq!(h.a1_verdict(), Verdict::Holds);
        assert_eq!(h.a2_verdict(), Verdict::Holds);
        let w = gaps(&wave_string(8).unwrap());
        assert_eq!(w.a1_verdict(), Verdict::Fails);
        assert_eq!(w.a2_verdict(), Verdict::Fails);
        assert!(!w.a1_evidence().is_empty());
        let c = gaps(&crate::systems::clamped_free_beam(8).unwrap());
        assert_eq!(c.a1_verdict(), Verdict::Holds);
        assert_eq!(c.a2_verdict(), Verdict::Holds);
    }

    #[test]
    fn heuristics_on_custom_families() {
        // growing gaps (same shape as the hinged beam, no family tag)
        let grow = gaps(&custom(|k| (k * k) as f64, 64));
        assert_eq!(grow.a1_verdict(), Verdict::Holds, "{}", grow.a1_evidence());
        assert_eq!(grow.a2_verdict(), Verdict::Holds, "{}", grow.a2_evidence());
        // constant gaps
        let flat = gaps(&custom(|k| k as f64, 64));
        assert_eq!(flat.a1_verdict(), Verdict::Fails);
        assert_eq!(flat.a2_verdict(), Verdict::Fails);
        // bounded, jittery gaps must never pass
        let jitter = gaps(&custom(|k| k as f64 + 0.3 * (3.0 * k as f64).sin(), 64));
        assert_ne!(jitter.a1_verdict(), Verdict::Holds, "{}", jitter.a1_evidence());
    }

    #[test]
    fn n0_worked_examples() {
        let p = gaps(&hinged_beam(64).unwrap());
        // ‖B*‖² = 2 at a₀=1: δ₁ = 3π² ≈ 29.6 already clears 2·2/κ = 8
        assert_eq!(compute_n0(&p, 2.0, 0.5).unwrap(), 2);
        assert_eq!(compute_n0(&p, 2.0, 0.999).unwrap(), 2);
        // ‖B*‖² = 30 at a₀=15: need δ ≥ 120, first at δ₆ = 13π² ≈ 128
        assert_eq!(compute_n0(&p, 30.0, 0.5).unwrap(), 7);
        // undamped: condition vacuous
        assert_eq!(compute_n0(&p, 0.0, 0.5).unwrap(), 2);

        let w = gaps(&wave_string(64).unwrap());
        let err = compute_n0(&w, PI, 0.5).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(compute_n0(&p, 2.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn n0_monotonicity(
            b in 0.1f64..40.0,
            k1 in 0.05f64..0.95,
            k2 in 0.05f64..0.95,
        ) {
            let p = gaps(&hinged_beam(64).unwrap());
            let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
            // larger κ (weaker requirement) never increases N₀
            if let (Ok(n_lo), Ok(n_hi)) =
                (compute_n0(&p, b, lo), compute_n0(&p, b, hi))
            {
                prop_assert!(n_hi <= n_lo);
            }
            // larger operator norm never decreases N₀
            if let (Ok(n_b), Ok(n_2b)) =
                (compute_n0(&p, b, lo), compute_n0(&p, 2.0 * b, lo))
            {
                prop_assert!(n_2b >= n_b);
            }
        }
    }

    #[test]
    fn rectangle_geometry_for_second_mode() {
        let f = hinged_beam(8).unwrap();
        let pi2 = PI * PI;
        let r = gamma_rect(&f, 2).unwrap();
        assert_abs_diff_eq!(r.im_min(), 2.5 * pi2, epsilon = 1e-9);
        assert_abs_diff_eq!(r.im_max(), 6.5 * pi2, epsilon = 1e-9);
        assert_abs_diff_eq!(r.re_min(), -2.5 * pi2, epsilon = 1e-9);
        assert_abs_diff_eq!(r.re_max(), 2.5 * pi2, epsilon = 1e-9);
        // the mode sits strictly inside
        let nu2 = f.sqrt_mu()[1];
        assert!(r.im_min() < nu2 && nu2 < r.im_max());
    }

    #[test]
    fn midpoint_identity_for_heights() {
        let f = hinged_beam(16).unwrap();
        let s = f.sqrt_mu();
        for n in 2..=16 {
            // ν_{n−1} + δ_{n−1}/2 and (ν_{n−1}+ν_n)/2 agree
            let lhs = s[n - 2] + 0.5 * (s[n - 1] - s[n - 2]);
            assert_abs_diff_eq!(
                a_height(&f, n),
                lhs,
                epsilon = 1e-12 * lhs.abs().max(1.0)
            );
        }
        assert_abs_diff_eq!(a_height(&f, 1), 0.5 * s[0], epsilon = 1e-12);
    }

    #[test]
    fn built_contours_tile_without_overlap() {
        let f = hinged_beam(64).unwrap();
        let c = build_contours(&f, 2, 0.5).unwrap();
        // 29 positive rectangles (modes 3..=31 stay under the trust limit)
        assert_eq!(c.positive_gammas().count(), 29);
        assert_eq!(c.gammas().len(), 58);
        // box spans |Im| ≤ 6.5π², |Re| ≤ 2.5π²
        assert_abs_diff_eq!(c.box_rect().im_max(), 6.5 * PI * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(c.box_rect().re_max(), 2.5 * PI * PI, epsilon = 1e-9);

        // pairwise disjoint interiors
        let rects: Vec<&ContourRect> = c.all_rects().collect();
        for (i, a) in rects.iter().enumerate() {
            for b in rects.iter().skip(i + 1) {
                let sep = a.re_max() <= b.re_min() + 1e-12
                    || b.re_max() <= a.re_min() + 1e-12
                    || a.im_max() <= b.im_min() + 1e-12
                    || b.im_max() <= a.im_min() + 1e-12;
                assert!(sep, "rectangles {} and {} overlap", a.index(), b.index());
            }
        }

        // each isolating rectangle holds exactly one of the ±iν_k
        for r in c.gammas() {
            let mut inside = 0;
            for &nu in f.sqrt_mu() {
                for z in [C64::new(0.0, nu), C64::new(0.0, -nu)] {
                    if r.contains(z, 0.0) {
                        inside += 1;
                    }
                }
            }
            assert_eq!(inside, 1, "rectangle {}", r.index());
        }
        // and the box holds the 2·N₀ low ones
        let mut inside = 0;
        for &nu in f.sqrt_mu() {
            for z in [C64::new(0.0, nu), C64::new(0.0, -nu)] {
                if c.box_rect().contains(z, 0.0) {
                    inside += 1;
                }
            }
        }
        assert_eq!(inside, 4);
    }

    #[test]
    fn quadrature_winds_once_around_interior_points() {
        let f = hinged_beam(8).unwrap();
        let r = gamma_rect(&f, 3).unwrap();
        let center = C64::new(0.0, f.sqrt_mu()[2]);
        let outside = C64::new(0.0, f.sqrt_mu()[3]);
        for nps in [16, 32] {
            let mut wind_in = C64::new(0.0, 0.0);
            let mut wind_out = C64::new(0.0, 0.0);
            for (z, w) in r.quad_nodes(nps) {
                wind_in += w / (z - center);
                wind_out += w / (z - outside);
            }
            let tau = 2.0 * PI;
            assert_abs_diff_eq!(wind_in.im, tau, epsilon = 1e-9 * tau);
            assert_abs_diff_eq!(wind_in.re, 0.0, epsilon = 1e-9 * tau);
            assert!(wind_out.norm() < 1e-9 * tau);
        }
    }

    #[test]
    fn boundary_distance_and_dilation() {
        let r = ContourRect::new(1, RectKind::Gamma, -1.0, 1.0, 2.0, 4.0).unwrap();
        assert_abs_diff_eq!(r.boundary_distance(C64::new(0.0, 3.0)), 1.0);
        assert_abs_diff_eq!(r.boundary_distance(C64::new(0.9, 3.0)), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.boundary_distance(C64::new(2.0, 3.0)), 1.0);
        assert_abs_diff_eq!(
            r.boundary_distance(C64::new(2.0, 5.0)),
            2.0f64.sqrt(),
            epsilon = 1e-12
        );
        let d = r.dilated(0.5);
        assert_abs_diff_eq!(d.re_max(), 1.5);
        assert_abs_diff_eq!(d.im_min(), 1.5);
        assert_eq!(d.index(), r.index());
    }

    #[test]
    fn region_cover_worked_cases() {
        let f = hinged_beam(64).unwrap();
        let p = gaps(&f);
        let c = build_contours(&f, 2, 0.5).unwrap();
        // moderate damping: β = 1, β² < μ₁ so the real interval is [−1, 0]
        assert!(verify_region_cover(&p, &c, 1.0, f.mu()[0]));
        // no damping: strip degenerates to the imaginary axis
        assert!(verify_region_cover(&p, &c, 0.0, f.mu()[0]));
        // strong damping with a low box: half-widths cannot reach Re = −β
        assert!(!verify_region_cover(&p, &c, 40.0, f.mu()[0]));
        // strong damping with the matching deeper box passes again
        let c15 = build_contours(&f, 7, 0.5).unwrap();
        assert!(verify_region_cover(&p, &c15, 15.0, f.mu()[0]));
    }

    #[test]
    fn contour_build_rejects_bad_indices() {
        let f = hinged_beam(8).unwrap();
        assert!(build_contours(&f, 1, 0.5).is_err());
        assert!(build_contours(&f, 7, 0.5).is_err());
        // severe trust truncation leaves nothing to build
        assert!(build_contours(&f, 5, 0.5).is_err());
    }
}
