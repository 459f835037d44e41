//! Bound states, genericity degree, Levinson's theorem, and the half-line
//! correspondence.
//!
//! Bound states sit at `k = i kappa` on the positive imaginary axis where
//! `det T_l(k)^{-1}` vanishes; that determinant is real there, so the search
//! is a sign-change scan plus bisection, with a winding-number integral
//! around each zero as the multiplicity oracle. Zeros of even order produce
//! no sign change and are picked up by a local-minimum fallback confirmed by
//! the same winding integral.

use crate::analysis::{assemble_s_matrix, involution_constants};
use crate::jost::{
    jost_left, jost_right, left_state_at, physical_solutions, right_state_at, scattering_data,
    JostError, Side,
};
use crate::linalg::{lu_det, lu_inverse, ComplexMatrix, LinalgError};
use crate::potential::PiecewisePotential;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("det T_l(i kappa)^-1 has non-real residue {imag:.3e} at kappa={kappa}")]
    NonRealDeterminant { kappa: f64, imag: f64 },
    #[error("bracketing failed near kappa={kappa}: grid too coarse, refine the scan")]
    BracketingFailure { kappa: f64 },
    #[error("phase tracking exceeded the refinement cap near k={k}")]
    PhaseJump { k: f64 },
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `det T_l(i kappa)^{-1}` for `kappa > 0`; real up to rounding because the
/// left and right transmission determinants agree and are adjoint-conjugate
/// across the imaginary axis.
pub fn inverse_transmission_det(p: &PiecewisePotential, kappa: f64) -> Result<f64, SpectralError> {
    assert!(kappa != 0.0, "determinant evaluation needs kappa != 0");
    let edge = jost_left(p, Complex64::new(0.0, kappa))?;
    let det = lu_det(&edge.trans_inv);
    // the natural magnitude of this determinant, for scaling the reality check
    let scale = edge.trans_inv.frobenius_norm().powi(p.n() as i32).max(1.0);
    if det.im.abs() > 1e-9 * scale.max(det.norm()) {
        return Err(SpectralError::NonRealDeterminant {
            kappa,
            imag: det.im,
        });
    }
    Ok(det.re)
}

fn det_complex(p: &PiecewisePotential, k: Complex64) -> Result<Complex64, SpectralError> {
    let edge = jost_left(p, k)?;
    Ok(lu_det(&edge.trans_inv))
}

/// Winding number of `det T_l^{-1}` around the circle `|k - center| = radius`
/// (64-point trapezoid argument accumulation); equals the order of the zero
/// enclosed.
fn winding_number(
    p: &PiecewisePotential,
    center: Complex64,
    radius: f64,
) -> Result<i64, SpectralError> {
    const POINTS: usize = 64;
    let mut total = 0.0;
    let mut previous = det_complex(p, center + radius)?;
    for step in 1..=POINTS {
        let theta = 2.0 * PI * step as f64 / POINTS as f64;
        let z = center + Complex64::new(radius * theta.cos(), radius * theta.sin());
        let current = det_complex(p, z)?;
        total += (current / previous).arg();
        previous = current;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Options for the bound-state scan.
#[derive(Debug, Clone)]
pub struct BoundStateOptions {
    pub kappa_min: f64,
    /// Upper scan edge; `None` derives it from the deepest fragment
    /// eigenvalue plus a margin.
    pub kappa_max: Option<f64>,
    pub grid_points: usize,
    pub tol: f64,
}

impl Default for BoundStateOptions {
    fn default() -> Self {
        Self {
            kappa_min: 1e-4,
            kappa_max: None,
            grid_points: 2000,
            tol: 1e-10,
        }
    }
}

/// Distinct bound-state locations with multiplicities.
#[derive(Debug, Clone, Default)]
pub struct BoundStateScan {
    /// Strictly increasing `kappa_j > 0`.
    pub kappas: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

impl BoundStateScan {
    /// Number of distinct eigenvalues.
    pub fn distinct(&self) -> usize {
        self.kappas.len()
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

/// Upper bound on possible bound-state `kappa` from the deepest fragment
/// channel: the spectrum of the Hamiltonian is bounded below by the most
/// negative fragment eigenvalue.
pub fn default_kappa_max(p: &PiecewisePotential) -> f64 {
    let mut deepest: f64 = 0.0;
    for f in p.fragments() {
        if let Ok(eig) = crate::linalg::herm_eig(&f.matrix) {
            if let Some(&lambda_min) = eig.eigenvalues.first() {
                deepest = deepest.max(lambda_min.abs());
            }
        }
    }
    deepest.sqrt() + 1.0
}

/// Locates the zeros of `det T_l(i kappa)^{-1}` on a log-uniform grid:
/// sign changes are bisected to `tol`, multiplicities confirmed by winding;
/// even-order zeros (no sign change) are caught as deep local minima of the
/// absolute value and confirmed the same way.
pub fn bound_states(
    p: &PiecewisePotential,
    opts: &BoundStateOptions,
) -> Result<BoundStateScan, SpectralError> {
    if p.is_free() {
        return Ok(BoundStateScan::default());
    }
    let kappa_max = opts.kappa_max.unwrap_or_else(|| default_kappa_max(p));
    if kappa_max <= opts.kappa_min {
        return Ok(BoundStateScan::default());
    }
    let m = opts.grid_points.max(16);
    let log_lo = opts.kappa_min.ln();
    let log_hi = kappa_max.ln();
    let grid: Vec<f64> = (0..m)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (m - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&kappa| inverse_transmission_det(p, kappa))
        .collect::<Result<_, _>>()?;

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..m - 1 {
        if values[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if values[i] * values[i + 1] < 0.0 {
            let root = bisect(p, grid[i], grid[i + 1], values[i], opts.tol)?;
            roots.push(root);
        }
    }

    // even-order zeros: deep dips of |d| with no sign change. A zero of
    // order >= 2 within one grid cell forces |d_i| / |d_{i +- span}| below
    // (1 / (2 span))^2 no matter where it lands in the cell.
    let magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let span = 8usize;
    for i in 1..m - 1 {
        if magnitudes[i] < magnitudes[i - 1] && magnitudes[i] < magnitudes[i + 1] {
            let far_lo = magnitudes[i.saturating_sub(span)];
            let far_hi = magnitudes[(i + span).min(m - 1)];
            if magnitudes[i] > 1e-2 * far_lo.min(far_hi) {
                continue;
            }
            if values[i - 1] * values[i + 1] < 0.0 {
                continue; // already handled as a sign change
            }
            let minimum = golden_minimum(p, grid[i - 1], grid[i + 1], opts.tol)?;
            if roots
                .iter()
                .any(|&r| (r - minimum).abs() < 10.0 * (opts.tol + 1e-12 * r))
            {
                continue;
            }
            let radius = winding_radius(minimum, opts.tol, grid[i + 1] - grid[i - 1]);
            if winding_number(p, Complex64::new(0.0, minimum), radius)? > 0 {
                roots.push(minimum);
            }
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    let mut scan = BoundStateScan::default();
    for (idx, &root) in roots.iter().enumerate() {
        // the circle must enclose this zero and no neighbor
        let mut radius = winding_radius(root, opts.tol, 0.0);
        if idx > 0 {
            radius = radius.min(0.45 * (root - roots[idx - 1]));
        }
        if idx + 1 < roots.len() {
            radius = radius.min(0.45 * (roots[idx + 1] - root));
        }
        let m = winding_number(p, Complex64::new(0.0, root), radius)?;
        if m <= 0 {
            // a sign change must enclose a zero; a coarse circle can miss it
            return Err(SpectralError::BracketingFailure { kappa: root });
        }
        scan.kappas.push(root);
        scan.multiplicities.push(m as usize);
    }
    Ok(scan)
}

fn winding_radius(kappa: f64, tol: f64, local_span: f64) -> f64 {
    let base = (10.0 * tol).max(1e-4).max(local_span.abs());
    base.min(kappa / 2.0)
}

fn bisect(
    p: &PiecewisePotential,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    tol: f64,
) -> Result<f64, SpectralError> {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = inverse_transmission_det(p, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_minimum(
    p: &PiecewisePotential,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, SpectralError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = inverse_transmission_det(p, x1)?.abs();
    let mut f2 = inverse_transmission_det(p, x2)?.abs();
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = inverse_transmission_det(p, x1)?.abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = inverse_transmission_det(p, x2)?.abs();
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The zero-wavenumber limit matrix `lim 2ik T^{-1}(k)` for the chosen
/// transmission side, estimated on the imaginary axis by polynomial
/// extrapolation through `k = i eps {1,2,4,8}` (the arithmetic stays
/// real-analytic there and the cubic-order error of a three-node rule would
/// swamp the purely exceptional case).
pub fn zero_energy_limit(
    p: &PiecewisePotential,
    side: Side,
    eps: f64,
) -> Result<ComplexMatrix, SpectralError> {
    let weights = [64.0 / 21.0, -8.0 / 3.0, 2.0 / 3.0, -1.0 / 21.0];
    let mut acc = ComplexMatrix::zeros(p.n(), p.n());
    for (idx, &mult) in [1.0, 2.0, 4.0, 8.0].iter().enumerate() {
        let k = Complex64::new(0.0, eps * mult);
        let edge = match side {
            Side::Left => jost_left(p, k)?,
            Side::Right => jost_right(p, k)?,
        };
        let sample = edge.trans_inv.scaled(Complex64::new(0.0, 2.0) * k);
        acc = &acc + &sample.scaled(Complex64::new(weights[idx], 0.0));
    }
    Ok(acc)
}

/// Numerical-rank thresholds for the genericity decision.
#[derive(Debug, Clone)]
pub struct GenericityOptions {
    /// Extrapolation scale on the imaginary axis.
    pub eps: f64,
    /// Singular values below `rel_cutoff * ||limit||_2` count as vanishing.
    pub rel_cutoff: f64,
    /// A limit matrix below this norm is treated as zero (purely
    /// exceptional).
    pub abs_floor: f64,
}

impl Default for GenericityOptions {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            rel_cutoff: 1e-6,
            abs_floor: 1e-10,
        }
    }
}

/// Degree of exceptionality: the number of vanishing singular values of the
/// zero-wavenumber limit matrix. `0` is the purely generic case, `n` the
/// purely exceptional one.
pub fn genericity_degree(p: &PiecewisePotential) -> Result<usize, SpectralError> {
    genericity_degree_with(p, &GenericityOptions::default())
}

pub fn genericity_degree_with(
    p: &PiecewisePotential,
    opts: &GenericityOptions,
) -> Result<usize, SpectralError> {
    let delta = zero_energy_limit(p, Side::Left, opts.eps)?;
    let norm = delta.spectral_norm();
    if norm < opts.abs_floor {
        return Ok(p.n());
    }
    let cutoff = opts.rel_cutoff * norm;
    Ok(delta
        .singular_values()
        .iter()
        .filter(|&&s| s < cutoff)
        .count())
}

/// Options for the Levinson phase balance.
#[derive(Debug, Clone)]
pub struct LevinsonOptions {
    pub k_min: f64,
    pub k_max: f64,
    /// Initial log-spaced grid size before adaptive refinement.
    pub initial_points: usize,
    /// Per-interval bisection cap; each interval may split at most
    /// `2^max_refine_depth` times.
    pub max_refine_depth: usize,
    pub bound: BoundStateOptions,
}

impl Default for LevinsonOptions {
    fn default() -> Self {
        Self {
            k_min: 1e-3,
            k_max: 1e3,
            initial_points: 400,
            max_refine_depth: 12,
            bound: BoundStateOptions::default(),
        }
    }
}

/// Bound-state content, genericity degree, and the Levinson phase balance of
/// one potential.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub kappas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Distinct eigenvalues N.
    pub distinct_count: usize,
    /// Eigenvalues counted with multiplicity.
    pub total_count: usize,
    /// Degree of exceptionality, in `0..=n`.
    pub genericity_nu: usize,
    /// Continuously tracked `arg det S(0+) - arg det S(k_max)`, with the
    /// analytic large-k tail folded in.
    pub levinson_lhs: f64,
    /// `pi (2 N_total - n + nu)`.
    pub levinson_rhs: f64,
    pub levinson_residual: f64,
}

/// Continuously tracked change of `arg det T_l^{-1}` from `k_lo` to `k_hi`,
/// refining each step until the wrapped increment stays below pi/2.
fn track_arg_change(
    p: &PiecewisePotential,
    k_lo: f64,
    k_hi: f64,
    initial_points: usize,
    max_depth: usize,
) -> Result<f64, SpectralError> {
    let m = initial_points.max(8);
    let log_lo = k_lo.ln();
    let log_hi = k_hi.ln();
    let grid: Vec<f64> = (0..m)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (m - 1) as f64).exp())
        .collect();
    let dets: Vec<Complex64> = grid
        .iter()
        .map(|&k| det_complex(p, Complex64::new(k, 0.0)))
        .collect::<Result<_, _>>()?;

    let mut total = 0.0;
    for i in 0..m - 1 {
        total += segment_arg_change(p, grid[i], grid[i + 1], dets[i], dets[i + 1], max_depth)?;
    }
    Ok(total)
}

fn segment_arg_change(
    p: &PiecewisePotential,
    k1: f64,
    k2: f64,
    z1: Complex64,
    z2: Complex64,
    depth: usize,
) -> Result<f64, SpectralError> {
    let delta = (z2 / z1).arg();
    if delta.abs() < PI / 2.0 {
        return Ok(delta);
    }
    if depth == 0 {
        return Err(SpectralError::PhaseJump { k: k1 });
    }
    let mid = (k1 * k2).sqrt();
    let zm = det_complex(p, Complex64::new(mid, 0.0))?;
    Ok(segment_arg_change(p, k1, mid, z1, zm, depth - 1)?
        + segment_arg_change(p, mid, k2, zm, z2, depth - 1)?)
}

/// Verifies Levinson's theorem: the continuously tracked winding of
/// `arg det S` from `k_max` down to `0+` against `pi (2 N - n + nu)`.
pub fn levinson_check(
    p: &PiecewisePotential,
    opts: &LevinsonOptions,
) -> Result<SpectralReport, SpectralError> {
    let n = p.n();
    let scan = bound_states(p, &opts.bound)?;
    let nu = genericity_degree(p)?;
    let rhs = PI * (2.0 * scan.total() as f64 - n as f64 + nu as f64);

    let lhs = if p.is_free() {
        0.0
    } else {
        // arg det S = 2 arg det T_l = -2 arg det T_l^{-1} on the real axis;
        // the tracked change plus the analytic 1/k tail at the far end
        let dphi = track_arg_change(
            p,
            opts.k_min,
            opts.k_max,
            opts.initial_points,
            opts.max_refine_depth,
        )?;
        let trace_integral = p.integral().trace().re;
        2.0 * dphi - trace_integral / opts.k_max
    };

    Ok(SpectralReport {
        distinct_count: scan.distinct(),
        total_count: scan.total(),
        kappas: scan.kappas,
        multiplicities: scan.multiplicities,
        genericity_nu: nu,
        levinson_lhs: lhs,
        levinson_rhs: rhs,
        levinson_residual: (lhs - rhs).abs(),
    })
}

/// Half-line 2n x 2n data at one wavenumber: the Jost matrix, its explicit
/// inverse, and the half-line scattering matrix.
#[derive(Debug, Clone)]
pub struct HalfLineData {
    pub k: f64,
    pub jost_matrix: ComplexMatrix,
    pub jost_matrix_inverse: ComplexMatrix,
    pub s_matrix: ComplexMatrix,
    /// `|| S_half - S Q ||_F` against the full-line route.
    pub s_residual: f64,
    /// Relative defect of `det J * det T_l = (2ik)^n`.
    pub det_residual: f64,
}

fn jost_matrix_at(p: &PiecewisePotential, k: Complex64) -> Result<ComplexMatrix, SpectralError> {
    // assembled from the full-line Jost states at the origin, evaluated at
    // -conj(k) so the matrix is analytic in the upper half plane
    let kr = -k.conj();
    let l = left_state_at(p, kr, 0.0)?;
    let r = right_state_at(p, kr, 0.0)?;
    Ok(ComplexMatrix::block_2x2(
        &-&l.value.adjoint(),
        &-&l.derivative.adjoint(),
        &r.value.adjoint(),
        &r.derivative.adjoint(),
    ))
}

/// Builds the half-line data from the full-line problem folded at the
/// origin. The scattering matrix comes from the Jost-matrix definition
/// `S = -J(-k) J(k)^{-1}` and is compared against the full-line product
/// `S(k) Q` as a consistency residual.
pub fn halfline_map(p: &PiecewisePotential, k: f64) -> Result<HalfLineData, SpectralError> {
    assert!(k != 0.0, "half-line map needs k != 0");
    let n = p.n();
    let kc = Complex64::new(k, 0.0);
    let jost = jost_matrix_at(p, kc)?;
    let jost_minus = jost_matrix_at(p, -kc)?;
    let jost_inv_lu = lu_inverse(&jost)?;
    let s_matrix = (&jost_minus * &jost_inv_lu).scaled(Complex64::new(-1.0, 0.0));

    // explicit inverse via the transmission-weighted adjugate form
    let data = scattering_data(p, k)?;
    let l0 = left_state_at(p, kc, 0.0)?;
    let r0 = right_state_at(p, kc, 0.0)?;
    let zero = ComplexMatrix::zeros(n, n);
    let trans_diag = ComplexMatrix::block_2x2(&data.trans_right, &zero, &zero, &data.trans_left);
    let stacked =
        ComplexMatrix::block_2x2(&r0.derivative, &l0.derivative, &-&r0.value, &-&l0.value);
    let jost_matrix_inverse =
        (&stacked * &trans_diag).scaled(Complex64::new(1.0, 0.0) / Complex64::new(0.0, 2.0 * k));

    let (_, swap) = involution_constants(n);
    let s_full = assemble_s_matrix(&data);
    let s_residual = (&s_matrix - &(&s_full * &swap)).frobenius_norm();

    let det_scale = Complex64::new(0.0, 2.0 * k).powu(n as u32);
    let det_product = lu_det(&jost) * lu_det(&data.trans_left);
    let det_residual = (det_product - det_scale).norm() / det_scale.norm();

    Ok(HalfLineData {
        k,
        jost_matrix: jost,
        jost_matrix_inverse,
        s_matrix,
        s_residual,
        det_residual,
    })
}

/// One sample of the half-line 2n x 2n physical solution and its derivative
/// in the half-line variable.
#[derive(Debug, Clone)]
pub struct HalfLineSample {
    pub x: f64,
    pub value: ComplexMatrix,
    pub derivative: ComplexMatrix,
}

/// Half-line physical solution assembled from the full-line physical
/// solutions at `+x` and `-x`. The lower blocks are functions of `-x`, so
/// their half-line derivative carries the sign flip from the chain rule.
pub fn halfline_physical(
    p: &PiecewisePotential,
    k: f64,
    xs: &[f64],
) -> Result<Vec<HalfLineSample>, SpectralError> {
    assert!(
        xs.iter().all(|&x| x >= 0.0),
        "half-line samples live on x >= 0"
    );
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let upper = physical_solutions(p, k, &[x])?.remove(0);
        let lower = physical_solutions(p, k, &[-x])?.remove(0);
        let value = ComplexMatrix::block_2x2(
            &upper.right_value,
            &upper.left_value,
            &lower.right_value,
            &lower.left_value,
        );
        let derivative = ComplexMatrix::block_2x2(
            &upper.right_derivative,
            &upper.left_derivative,
            &-&lower.right_derivative,
            &-&lower.left_derivative,
        );
        out.push(HalfLineSample {
            x,
            value,
            derivative,
        });
    }
    Ok(out)
}

/// Boundary matrices of the fold: `A = [[0, I], [0, I]]`,
/// `B = [[-I, 0], [I, 0]]`.
pub fn boundary_matrices(n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let one = Complex64::new(1.0, 0.0);
    let mut a = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut b = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = one;
        a[(n + i, n + i)] = one;
        b[(i, i)] = -one;
        b[(n + i, i)] = one;
    }
    (a, b)
}

/// `|| -B^dagger Psi(k, 0) + A^dagger Psi'(k, 0) ||_F`, the boundary-condition
/// defect of the half-line physical solution at the origin.
pub fn boundary_residual(p: &PiecewisePotential, k: f64) -> Result<f64, SpectralError> {
    let sample = halfline_physical(p, k, &[0.0])?.remove(0);
    let (a, b) = boundary_matrices(p.n());
    let defect = &(&a.adjoint() * &sample.derivative) - &(&b.adjoint() * &sample.value);
    Ok(defect.frobenius_norm())
}
