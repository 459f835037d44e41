//! Jost solutions and matrix scattering coefficients by exact
//! transfer-matrix propagation.
//!
//! Each constant fragment is crossed with the closed-form propagator built in
//! the eigenbasis of the fragment matrix. The propagator entries are entire
//! functions of `omega^2 = k^2 - lambda`, so no square-root branch choice is
//! ever made. Coefficients are extracted at the support edges where the
//! potential vanishes identically and the plane-wave forms are exact.

use crate::linalg::{herm_eig, lu_inverse, lu_solve, ComplexMatrix, LinalgError};
use crate::potential::PiecewisePotential;
use num_complex::Complex64;

/// Below this |omega d| the propagator entries switch to their power series.
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JostError {
    #[error("coefficient extraction requires k != 0")]
    ZeroWavenumber,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Value and x-derivative of an n x n matrix solution at one point.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub k: Complex64,
    pub x: f64,
    pub value: ComplexMatrix,
    pub derivative: ComplexMatrix,
}

/// Output of a one-sided Jost propagation: the state at the far support edge
/// together with `T^{-1}` and `(reflection) * T^{-1}`.
#[derive(Debug, Clone)]
pub struct JostEdgeData {
    pub state: SolutionState,
    pub trans_inv: ComplexMatrix,
    pub refl_trans_inv: ComplexMatrix,
}

/// The four matrix scattering coefficients at one real wavenumber.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub k: f64,
    pub trans_left: ComplexMatrix,
    pub trans_right: ComplexMatrix,
    pub refl_left: ComplexMatrix,
    pub refl_right: ComplexMatrix,
}

impl ScatteringData {
    pub fn n(&self) -> usize {
        self.trans_left.rows()
    }
}

fn cos_sinc(omega2: Complex64, d: f64) -> (Complex64, Complex64) {
    // cos(omega d) and sin(omega d)/omega as entire functions of omega^2
    let z = omega2 * d * d;
    if z.norm() < SERIES_CUTOFF * SERIES_CUTOFF {
        let c = Complex64::new(1.0, 0.0) - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = Complex64::new(1.0, 0.0) - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0;
        (c, s * d)
    } else {
        let w = omega2.sqrt();
        ((w * d).cos(), (w * d).sin() / w)
    }
}

/// Transfer matrix P with `[psi; psi'](x + d) = P [psi; psi'](x)` across a
/// constant Hermitian fragment. `d` may be negative; `P(-d) = P(d)^{-1}`
/// exactly, and P is entire in k.
pub fn fragment_propagator(
    v: &ComplexMatrix,
    d: f64,
    k: Complex64,
) -> Result<ComplexMatrix, JostError> {
    let n = v.rows();
    if d == 0.0 {
        return Ok(ComplexMatrix::identity(2 * n));
    }
    let eig = herm_eig(v)?;
    let mut c_diag = Vec::with_capacity(n);
    let mut s_diag = Vec::with_capacity(n);
    let mut ds_diag = Vec::with_capacity(n);
    for &lambda in &eig.eigenvalues {
        let omega2 = k * k - lambda;
        let (c, s) = cos_sinc(omega2, d);
        c_diag.push(c);
        s_diag.push(s);
        ds_diag.push(-omega2 * s);
    }
    let u = &eig.eigenvectors;
    let ud = u.adjoint();
    let rotate =
        |diag: &[Complex64]| -> ComplexMatrix { &(u * &ComplexMatrix::diagonal(diag)) * &ud };
    let c = rotate(&c_diag);
    let s = rotate(&s_diag);
    let ds = rotate(&ds_diag);
    Ok(ComplexMatrix::block_2x2(&c, &s, &ds, &c))
}

fn stack(state: &SolutionState) -> ComplexMatrix {
    let n = state.value.rows();
    let cols = state.value.cols();
    let mut out = ComplexMatrix::zeros(2 * n, cols);
    for i in 0..n {
        for j in 0..cols {
            out[(i, j)] = state.value[(i, j)];
            out[(i + n, j)] = state.derivative[(i, j)];
        }
    }
    out
}

fn unstack(k: Complex64, x: f64, stacked: &ComplexMatrix) -> SolutionState {
    let n = stacked.rows() / 2;
    SolutionState {
        k,
        x,
        value: stacked.submatrix(0, 0, n, stacked.cols()),
        derivative: stacked.submatrix(n, 0, n, stacked.cols()),
    }
}

/// Exactly propagates a solution state to `x_target` through the
/// piecewise-constant landscape (gaps count as zero potential).
pub fn propagate(
    p: &PiecewisePotential,
    state: &SolutionState,
    x_target: f64,
) -> Result<SolutionState, JostError> {
    if x_target == state.x {
        return Ok(SolutionState {
            x: x_target,
            ..state.clone()
        });
    }
    let (lo, hi) = (state.x.min(x_target), state.x.max(x_target));
    let mut points = vec![lo, hi];
    for f in p.fragments() {
        for &b in &[f.x_min, f.x_max] {
            if lo < b && b < hi {
                points.push(b);
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    points.dedup();

    let forward = x_target > state.x;
    let mut y = stack(state);
    let mut segments: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    if !forward {
        segments.reverse();
    }
    for (a, b) in segments {
        let v = p.value_at(0.5 * (a + b));
        let d = if forward { b - a } else { a - b };
        let prop = fragment_propagator(&v, d, state.k)?;
        y = &prop * &y;
    }
    Ok(unstack(state.k, x_target, &y))
}

fn support_edges(p: &PiecewisePotential) -> (f64, f64) {
    p.support().unwrap_or((0.0, 0.0))
}

/// Left Jost solution: `e^{ikx} I` at and beyond the right support edge,
/// propagated to the left edge where `T_l^{-1}` and `L T_l^{-1}` are read off
/// from the exact two-wave form.
pub fn jost_left(p: &PiecewisePotential, k: Complex64) -> Result<JostEdgeData, JostError> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(JostError::ZeroWavenumber);
    }
    let n = p.n();
    let (xa, xb) = support_edges(p);
    let ik = Complex64::new(0.0, 1.0) * k;
    let phase = (ik * xb).exp();
    let start = SolutionState {
        k,
        x: xb,
        value: ComplexMatrix::identity(n).scaled(phase),
        derivative: ComplexMatrix::identity(n).scaled(ik * phase),
    };
    let state = propagate(p, &start, xa)?;
    let half = Complex64::new(0.5, 0.0);
    let deriv_over_ik = state.derivative.scaled(half / ik);
    let value_half = state.value.scaled(half);
    let trans_inv = (&value_half + &deriv_over_ik).scaled((-ik * xa).exp());
    let refl_trans_inv = (&value_half - &deriv_over_ik).scaled((ik * xa).exp());
    Ok(JostEdgeData {
        state,
        trans_inv,
        refl_trans_inv,
    })
}

/// Right Jost solution: `e^{-ikx} I` at and beyond the left support edge,
/// propagated to the right edge for `T_r^{-1}` and `R T_r^{-1}`.
pub fn jost_right(p: &PiecewisePotential, k: Complex64) -> Result<JostEdgeData, JostError> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(JostError::ZeroWavenumber);
    }
    let n = p.n();
    let (xa, xb) = support_edges(p);
    let ik = Complex64::new(0.0, 1.0) * k;
    let phase = (-ik * xa).exp();
    let start = SolutionState {
        k,
        x: xa,
        value: ComplexMatrix::identity(n).scaled(phase),
        derivative: ComplexMatrix::identity(n).scaled(-ik * phase),
    };
    let state = propagate(p, &start, xb)?;
    let half = Complex64::new(0.5, 0.0);
    let deriv_over_ik = state.derivative.scaled(half / ik);
    let value_half = state.value.scaled(half);
    let trans_inv = (&value_half - &deriv_over_ik).scaled((ik * xb).exp());
    let refl_trans_inv = (&value_half + &deriv_over_ik).scaled((-ik * xb).exp());
    Ok(JostEdgeData {
        state,
        trans_inv,
        refl_trans_inv,
    })
}

/// Left Jost solution state at an arbitrary point.
pub fn left_state_at(
    p: &PiecewisePotential,
    k: Complex64,
    x: f64,
) -> Result<SolutionState, JostError> {
    let n = p.n();
    let (_, xb) = support_edges(p);
    let ik = Complex64::new(0.0, 1.0) * k;
    let phase = (ik * xb).exp();
    let start = SolutionState {
        k,
        x: xb,
        value: ComplexMatrix::identity(n).scaled(phase),
        derivative: ComplexMatrix::identity(n).scaled(ik * phase),
    };
    propagate(p, &start, x)
}

/// Right Jost solution state at an arbitrary point.
pub fn right_state_at(
    p: &PiecewisePotential,
    k: Complex64,
    x: f64,
) -> Result<SolutionState, JostError> {
    let n = p.n();
    let (xa, _) = support_edges(p);
    let ik = Complex64::new(0.0, 1.0) * k;
    let phase = (-ik * xa).exp();
    let start = SolutionState {
        k,
        x: xa,
        value: ComplexMatrix::identity(n).scaled(phase),
        derivative: ComplexMatrix::identity(n).scaled(-ik * phase),
    };
    propagate(p, &start, x)
}

/// All four scattering coefficients at a real nonzero wavenumber.
pub fn scattering_data(p: &PiecewisePotential, k: f64) -> Result<ScatteringData, JostError> {
    if k == 0.0 {
        return Err(JostError::ZeroWavenumber);
    }
    let kc = Complex64::new(k, 0.0);
    let left = jost_left(p, kc)?;
    let right = jost_right(p, kc)?;
    let trans_left = lu_inverse(&left.trans_inv)?;
    let trans_right = lu_inverse(&right.trans_inv)?;
    let refl_left = &left.refl_trans_inv * &trans_left;
    let refl_right = &right.refl_trans_inv * &trans_right;
    Ok(ScatteringData {
        k,
        trans_left,
        trans_right,
        refl_left,
        refl_right,
    })
}

/// One sample of the physical solutions and their derivatives.
#[derive(Debug, Clone)]
pub struct PhysicalSample {
    pub x: f64,
    pub left_value: ComplexMatrix,
    pub left_derivative: ComplexMatrix,
    pub right_value: ComplexMatrix,
    pub right_derivative: ComplexMatrix,
}

/// Physical solutions `Psi_l = f_l T_l` and `Psi_r = f_r T_r` at the
/// requested points.
pub fn physical_solutions(
    p: &PiecewisePotential,
    k: f64,
    xs: &[f64],
) -> Result<Vec<PhysicalSample>, JostError> {
    let data = scattering_data(p, k)?;
    let kc = Complex64::new(k, 0.0);
    xs.iter()
        .map(|&x| {
            let l = left_state_at(p, kc, x)?;
            let r = right_state_at(p, kc, x)?;
            Ok(PhysicalSample {
                x,
                left_value: &l.value * &data.trans_left,
                left_derivative: &l.derivative * &data.trans_left,
                right_value: &r.value * &data.trans_right,
                right_derivative: &r.derivative * &data.trans_right,
            })
        })
        .collect()
}

/// Classical fixed-step RK4 on the first-order system
/// `d/dx [psi; psi'] = [[0, I], [V - k^2, 0]] [psi; psi']`.
///
/// Independent of the analytic propagator on purpose: it samples `V(x)`
/// pointwise and never diagonalizes anything.
pub fn rk4_integrate(
    p: &PiecewisePotential,
    state: &SolutionState,
    x_target: f64,
    steps: usize,
) -> SolutionState {
    assert!(steps >= 1, "need at least one step");
    let k2 = state.k * state.k;
    let rhs = |x: f64, value: &ComplexMatrix, deriv: &ComplexMatrix| {
        let v = p.value_at(x);
        let accel = &(&v * value) - &value.scaled(k2);
        (deriv.clone(), accel)
    };
    let h = (x_target - state.x) / steps as f64;
    // stage samples at step endpoints are biased into the step interior, so
    // a fragment boundary landing on a step endpoint is read from the side
    // being integrated over; positions come from the step index, not an
    // accumulating sum, to keep the bias above the rounding drift
    let bias = 1e-9 * h;
    let mut value = state.value.clone();
    let mut deriv = state.derivative.clone();
    for step in 0..steps {
        let x = state.x + step as f64 * h;
        let (v1, d1) = rhs(x + bias, &value, &deriv);
        let (v2, d2) = rhs(
            x + 0.5 * h,
            &(&value + &v1.scaled(Complex64::new(0.5 * h, 0.0))),
            &(&deriv + &d1.scaled(Complex64::new(0.5 * h, 0.0))),
        );
        let (v3, d3) = rhs(
            x + 0.5 * h,
            &(&value + &v2.scaled(Complex64::new(0.5 * h, 0.0))),
            &(&deriv + &d2.scaled(Complex64::new(0.5 * h, 0.0))),
        );
        let (v4, d4) = rhs(
            x + h - bias,
            &(&value + &v3.scaled(Complex64::new(h, 0.0))),
            &(&deriv + &d3.scaled(Complex64::new(h, 0.0))),
        );
        let w = Complex64::new(h / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        value = &value + &(&(&v1 + &(&v2 + &v3).scaled(two)) + &v4).scaled(w);
        deriv = &deriv + &(&(&d1 + &(&d2 + &d3).scaled(two)) + &d4).scaled(w);
    }
    SolutionState {
        k: state.k,
        x: x_target,
        value,
        derivative: deriv,
    }
}

/// Which transmission coefficient a small-k expansion refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Matrix Laurent data of `T^{-1}(k)` near `k = 0`: coefficients of
/// `k^{-1}, k^0, k^1, k^2`.
#[derive(Debug, Clone)]
pub struct SmallKExpansion {
    pub coefficients: [ComplexMatrix; 4],
}

/// Symmetric fit nodes `+-eps, ..., +-half_nodes*eps`.
pub fn symmetric_nodes(eps: f64, half_nodes: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(2 * half_nodes);
    for j in 1..=half_nodes {
        nodes.push(-(j as f64) * eps);
        nodes.push(j as f64 * eps);
    }
    nodes
}

/// Least-squares Laurent fit from samples of `T^{-1}` at the given nodes.
///
/// `g(k) = k T^{-1}(k)` is entire for a compactly supported potential, so
/// this is an ordinary polynomial fit of `g`. The fit runs in a Legendre
/// basis on the scaled nodes: monomial normal equations lose several digits
/// of the small high-order coefficients to near-collinear columns, the
/// Legendre Gram matrix stays well conditioned. The leading four monomial
/// coefficients of `g` are the Laurent data of `T^{-1}`.
pub fn fit_laurent(
    nodes: &[f64],
    inverse_samples: &[ComplexMatrix],
    degree: usize,
) -> Result<SmallKExpansion, JostError> {
    assert!(
        nodes.len() >= 6 && degree >= 3,
        "need >= 6 nodes and degree >= 3"
    );
    assert!(nodes.len() > degree, "fit must be overdetermined");
    assert_eq!(nodes.len(), inverse_samples.len());
    let n = inverse_samples[0].rows();
    let k_scale = nodes.iter().fold(0.0f64, |acc, k| acc.max(k.abs()));
    let samples: Vec<ComplexMatrix> = nodes
        .iter()
        .zip(inverse_samples)
        .map(|(&k, t_inv)| t_inv.scaled(Complex64::new(k, 0.0)))
        .collect();

    // Legendre values P_0..P_degree at each scaled node
    let m = degree + 1;
    let basis_at = |t: f64| -> Vec<f64> {
        let mut values = vec![1.0; m];
        if m > 1 {
            values[1] = t;
        }
        for e in 1..m - 1 {
            values[e + 1] =
                ((2 * e + 1) as f64 * t * values[e] - e as f64 * values[e - 1]) / (e + 1) as f64;
        }
        values
    };

    let mut gram = ComplexMatrix::zeros(m, m);
    let mut rhs = vec![ComplexMatrix::zeros(n, n); m];
    for (&k, sample) in nodes.iter().zip(&samples) {
        let basis = basis_at(k / k_scale);
        for a in 0..m {
            for b in 0..m {
                gram[(a, b)] += Complex64::new(basis[a] * basis[b], 0.0);
            }
            rhs[a] = &rhs[a] + &sample.scaled(Complex64::new(basis[a], 0.0));
        }
    }

    // solve per matrix entry: gram * x = rhs_entry
    let mut fitted = vec![ComplexMatrix::zeros(n, n); m];
    for i in 0..n {
        for j in 0..n {
            let mut b = ComplexMatrix::zeros(m, 1);
            for (e, row) in rhs.iter().enumerate() {
                b[(e, 0)] = row[(i, j)];
            }
            let x = lu_solve(&gram, &b)?;
            for (e, target) in fitted.iter_mut().enumerate() {
                target[(i, j)] = x[(e, 0)];
            }
        }
    }

    // monomial coefficient tables of the Legendre polynomials, from the
    // recurrence (e+1) P_{e+1} = (2e+1) t P_e - e P_{e-1}
    let mut tables: Vec<Vec<f64>> = vec![vec![1.0]];
    if m > 1 {
        tables.push(vec![0.0, 1.0]);
    }
    for e in 1..m - 1 {
        let mut next = vec![0.0; e + 2];
        for (power, &coef) in tables[e].iter().enumerate() {
            next[power + 1] += (2 * e + 1) as f64 * coef / (e + 1) as f64;
        }
        for (power, &coef) in tables[e - 1].iter().enumerate() {
            next[power] -= e as f64 * coef / (e + 1) as f64;
        }
        tables.push(next);
    }

    let mut coefficients = [
        ComplexMatrix::zeros(n, n),
        ComplexMatrix::zeros(n, n),
        ComplexMatrix::zeros(n, n),
        ComplexMatrix::zeros(n, n),
    ];
    for (target, out) in coefficients.iter_mut().enumerate() {
        let mut acc = ComplexMatrix::zeros(n, n);
        for (e, table) in tables.iter().enumerate() {
            if let Some(&coef) = table.get(target) {
                if coef != 0.0 {
                    acc = &acc + &fitted[e].scaled(Complex64::new(coef, 0.0));
                }
            }
        }
        *out = acc.scaled(Complex64::new(k_scale.powi(-(target as i32)), 0.0));
    }
    Ok(SmallKExpansion { coefficients })
}

/// Laurent data of `T^{-1}` near zero, sampled directly from one-sided Jost
/// propagation at symmetric real nodes.
pub fn small_k_expansion(
    p: &PiecewisePotential,
    side: Side,
    eps: f64,
    half_nodes: usize,
    degree: usize,
) -> Result<SmallKExpansion, JostError> {
    assert!(eps > 0.0 && half_nodes >= 3, "need at least 6 nodes");
    let nodes = symmetric_nodes(eps, half_nodes);
    let samples = nodes
        .iter()
        .map(|&k| {
            let kc = Complex64::new(k, 0.0);
            let edge = match side {
                Side::Left => jost_left(p, kc)?,
                Side::Right => jost_right(p, kc)?,
            };
            Ok(edge.trans_inv)
        })
        .collect::<Result<Vec<_>, JostError>>()?;
    fit_laurent(&nodes, &samples, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu_det;
    use crate::potential::Fragment;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_well(a: f64, b: f64) -> PiecewisePotential {
        let m = ComplexMatrix::diagonal(&[c(-b, 0.0)]);
        PiecewisePotential::new(1, vec![Fragment::new(-a / 2.0, a / 2.0, m)]).unwrap()
    }

    /// Independent plane-wave-matching closed form for the square well.
    fn well_transmission(a: f64, b: f64, k: f64) -> Complex64 {
        let q = Complex64::new(k * k + b, 0.0).sqrt();
        let kc = c(k, 0.0);
        let i = c(0.0, 1.0);
        let num = 4.0 * kc * q * (-i * kc * a).exp();
        let den =
            (q + kc) * (q + kc) * (-i * q * a).exp() - (q - kc) * (q - kc) * (i * q * a).exp();
        num / den
    }

    fn example_pair() -> PiecewisePotential {
        let v1 = ComplexMatrix::from_rows(&[
            vec![c(3.0, 0.0), c(-2.0, 1.0)],
            vec![c(-2.0, -1.0), c(-5.0, 0.0)],
        ]);
        let v2 = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 1.0)],
            vec![c(1.0, -1.0), c(-2.0, 0.0)],
        ]);
        PiecewisePotential::new(
            2,
            vec![Fragment::new(-2.0, 0.0, v1), Fragment::new(0.0, 1.0, v2)],
        )
        .unwrap()
    }

    #[test]
    fn free_propagator_closed_form() {
        let v = ComplexMatrix::zeros(1, 1);
        let (k, d) = (1.3, 0.7);
        let p = fragment_propagator(&v, d, c(k, 0.0)).unwrap();
        assert!((p[(0, 0)] - c((k * d).cos(), 0.0)).norm() < 1e-15);
        assert!((p[(0, 1)] - c((k * d).sin() / k, 0.0)).norm() < 1e-15);
        assert!((p[(1, 0)] - c(-k * (k * d).sin(), 0.0)).norm() < 1e-15);
        assert!((p[(1, 1)] - c((k * d).cos(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_length_propagator_is_identity() {
        let v = example_pair().fragments()[0].matrix.clone();
        let p = fragment_propagator(&v, 0.0, c(0.9, 0.1)).unwrap();
        assert_eq!(p, ComplexMatrix::identity(4));
    }

    #[test]
    fn propagator_series_matches_closed_form_near_cutoff() {
        // omega^2 = k^2 - 2 with k = 1.4, so |omega| = 0.2 and the series
        // branch engages below d = 5e-4; straddle that switch
        let v = ComplexMatrix::diagonal(&[c(2.0, 0.0)]);
        for &d in &[4e-4, 6e-4] {
            let p = fragment_propagator(&v, d, c(1.4, 0.0)).unwrap();
            let omega2 = c(1.4 * 1.4 - 2.0, 0.0);
            let w = omega2.sqrt();
            assert!((p[(0, 0)] - (w * d).cos()).norm() < 1e-14);
            assert!((p[(0, 1)] - (w * d).sin() / w).norm() < 1e-14);
        }
    }

    #[test]
    fn well_matches_plane_wave_matching() {
        let (a, b) = (2.0, 1.3);
        let p = scalar_well(a, b);
        for &k in &[0.1, 0.5, 1.0, 2.7, 10.0] {
            let data = scattering_data(&p, k).unwrap();
            let exact = well_transmission(a, b, k);
            assert!(
                (data.trans_left[(0, 0)] - exact).norm() < 1e-12,
                "k={k}: {} vs {exact}",
                data.trans_left[(0, 0)]
            );
        }
    }

    #[test]
    fn free_potential_trivial_data() {
        let p = PiecewisePotential::free(2);
        let edge = jost_left(&p, c(0.8, 0.0)).unwrap();
        assert!((&edge.trans_inv - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
        assert!(edge.refl_trans_inv.frobenius_norm() < 1e-15);
        let data = scattering_data(&p, 0.8).unwrap();
        assert!((&data.trans_left - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
        assert!(data.refl_left.frobenius_norm() < 1e-15);
        assert!(data.refl_right.frobenius_norm() < 1e-15);
    }

    #[test]
    fn zero_wavenumber_is_rejected() {
        let p = example_pair();
        assert!(matches!(
            jost_left(&p, c(0.0, 0.0)),
            Err(JostError::ZeroWavenumber)
        ));
        assert!(matches!(
            scattering_data(&p, 0.0),
            Err(JostError::ZeroWavenumber)
        ));
    }

    #[test]
    fn transmission_conjugate_symmetry() {
        // T_l(-k)^dagger = T_r(k) on a k-grid
        let p = example_pair();
        for &k in &[0.4, 1.0, 2.3] {
            let plus = scattering_data(&p, k).unwrap();
            let minus = scattering_data(&p, -k).unwrap();
            let residual = (&minus.trans_left.adjoint() - &plus.trans_right).frobenius_norm();
            assert!(residual < 1e-9, "k={k}: residual {residual}");
        }
    }

    #[test]
    fn real_diagonal_potential_transposes() {
        let v = ComplexMatrix::diagonal(&[c(1.5, 0.0), c(-2.0, 0.0)]);
        let p = PiecewisePotential::new(2, vec![Fragment::new(-1.0, 0.5, v)]).unwrap();
        let data = scattering_data(&p, 1.1).unwrap();
        let residual = (&data.trans_left.transpose() - &data.trans_right).frobenius_norm();
        assert!(residual < 1e-12);
    }

    #[test]
    fn unitarity_of_assembled_blocks() {
        let p = example_pair();
        let d = scattering_data(&p, 1.7).unwrap();
        let tl = &d.trans_left;
        let l = &d.refl_left;
        let lhs = &(&tl.adjoint() * tl) + &(&l.adjoint() * l);
        assert!((&lhs - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn wronskian_determinant_is_constant() {
        // det [phi psi; phi' psi'] for two propagated solutions across 50 points
        let p = example_pair();
        let k = c(0.9, 0.0);
        let mut dets = Vec::new();
        for i in 0..50 {
            let x = -2.5 + 4.0 * i as f64 / 49.0;
            let l = left_state_at(&p, k, x).unwrap();
            let r = right_state_at(&p, k, x).unwrap();
            let g = ComplexMatrix::block_2x2(&l.value, &r.value, &l.derivative, &r.derivative);
            dets.push(lu_det(&g));
        }
        let first = dets[0];
        for d in dets {
            assert!((d - first).norm() <= 1e-10 * first.norm());
        }
    }

    #[test]
    fn physical_solution_edges() {
        let p = example_pair();
        let k = 1.2;
        let kc = c(k, 0.0);
        let i = c(0.0, 1.0);
        let (xa, xb) = (-2.0, 1.0);
        let samples = physical_solutions(&p, k, &[xa, xb]).unwrap();
        let data = scattering_data(&p, k).unwrap();

        // right edge: Psi_r = e^{-ikx} I + e^{ikx} R exactly
        let want_r = &ComplexMatrix::identity(2).scaled((-i * kc * xb).exp())
            + &data.refl_right.scaled((i * kc * xb).exp());
        assert!((&samples[1].right_value - &want_r).frobenius_norm() < 1e-12);

        // left edge: Psi_l = e^{ikx} I + e^{-ikx} L exactly
        let want_l = &ComplexMatrix::identity(2).scaled((i * kc * xa).exp())
            + &data.refl_left.scaled((-i * kc * xa).exp());
        assert!((&samples[0].left_value - &want_l).frobenius_norm() < 1e-10);

        // transmitted side of Psi_l: e^{ikx} T_l at the right edge
        let want_lt = data.trans_left.scaled((i * kc * xb).exp());
        assert!((&samples[1].left_value - &want_lt).frobenius_norm() < 1e-10);
    }

    #[test]
    fn physical_solution_free_case() {
        let p = PiecewisePotential::free(2);
        let k = 0.7;
        let i = c(0.0, 1.0);
        for s in physical_solutions(&p, k, &[-1.0, 0.0, 2.5]).unwrap() {
            let want = ComplexMatrix::identity(2).scaled((i * k * s.x).exp());
            assert!((&s.left_value - &want).frobenius_norm() < 1e-13);
        }
    }

    #[test]
    fn rk4_matches_free_propagation() {
        let p = PiecewisePotential::free(1);
        let k = c(1.0, 0.0);
        let start = SolutionState {
            k,
            x: 0.0,
            value: ComplexMatrix::identity(1),
            derivative: ComplexMatrix::identity(1).scaled(c(0.0, 1.0)),
        };
        let exact = propagate(&p, &start, 1.0).unwrap();
        let numeric = rk4_integrate(&p, &start, 1.0, 1000);
        assert!((&numeric.value - &exact.value).frobenius_norm() < 1e-10);
        assert!((&numeric.derivative - &exact.derivative).frobenius_norm() < 1e-10);
    }

    #[test]
    fn rk4_matches_fragment_propagator() {
        let p = example_pair();
        let k = c(1.0, 0.0);
        let start = right_state_at(&p, k, 0.0).unwrap();
        let exact = propagate(&p, &start, 1.0).unwrap();
        let numeric = rk4_integrate(&p, &start, 1.0, 10_000);
        assert!((&numeric.value - &exact.value).frobenius_norm() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = example_pair();
        let k = c(1.0, 0.0);
        let start = right_state_at(&p, k, 0.0).unwrap();
        let exact = propagate(&p, &start, 1.0).unwrap();
        let err = |steps: usize| {
            let s = rk4_integrate(&p, &start, 1.0, steps);
            (&s.value - &exact.value).frobenius_norm()
        };
        let ratio = err(50) / err(100);
        assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn small_k_expansion_leading_terms() {
        let p = example_pair();
        let fit = small_k_expansion(&p, Side::Left, 1e-4, 6, 5).unwrap();
        // leading Laurent entry of the (1,1) component
        let got = fit.coefficients[0][(0, 0)];
        let want = c(-7.056525, 74.135179);
        assert!((got - want).norm() / want.norm() < 1e-4, "got {got}");
        let got0 = fit.coefficients[1][(0, 0)];
        let want0 = c(-133.844266, -14.352239);
        assert!((got0 - want0).norm() / want0.norm() < 1e-4, "got {got0}");
    }

    #[test]
    fn sampled_smooth_potential_converges() {
        // midpoint fragment sampling of a Gaussian well: scattering data
        // converge quadratically in the fragment width
        let gaussian = |x: f64| ComplexMatrix::diagonal(&[c(-(-x * x).exp(), 0.0)]);
        let k = 0.8;
        let trans = |count: usize| {
            let p = PiecewisePotential::sample(1, gaussian, -6.0, 6.0, count).unwrap();
            scattering_data(&p, k).unwrap().trans_left[(0, 0)]
        };
        let coarse = (trans(100) - trans(400)).norm();
        let fine = (trans(400) - trans(1600)).norm();
        assert!(coarse < 1e-3, "coarse step {coarse:.3e}");
        let ratio = coarse / fine;
        assert!(
            (8.0..32.0).contains(&ratio),
            "quadratic convergence, got ratio {ratio}"
        );
    }

    #[test]
    fn shifted_potential_coefficient_rules() {
        // transmissions unchanged, reflections pick up e^{-+2ikb} phases
        let p = example_pair();
        let b = 0.9;
        let k = 1.3;
        let base = scattering_data(&p, k).unwrap();
        let moved = scattering_data(&p.shifted(b), k).unwrap();
        assert!((&moved.trans_left - &base.trans_left).frobenius_norm() < 1e-12);
        assert!((&moved.trans_right - &base.trans_right).frobenius_norm() < 1e-12);
        let phase = Complex64::new(0.0, -2.0 * k * b).exp();
        assert!((&moved.refl_left - &base.refl_left.scaled(phase)).frobenius_norm() < 1e-12);
        assert!(
            (&moved.refl_right - &base.refl_right.scaled(phase.conj())).frobenius_norm() < 1e-12
        );
    }

    #[test]
    fn large_k_transmission_first_order() {
        // 2ik (T_l - I) approaches the matrix integral of V
        let p = example_pair();
        let k = 1e3;
        let d = scattering_data(&p, k).unwrap();
        let two_ik = c(0.0, 2.0 * k);
        let got = (&d.trans_left - &ComplexMatrix::identity(2)).scaled(two_ik);
        let want = p.integral();
        let rel = (&got - &want).frobenius_norm() / want.frobenius_norm();
        assert!(rel < 0.05, "large-k first order off by {rel:.3e}");
    }

    #[test]
    fn complex_k_propagation_on_imaginary_axis() {
        // det T_l^{-1}(i kappa) is real for Hermitian potentials
        let p = example_pair();
        let edge = jost_left(&p, c(0.0, 0.8)).unwrap();
        let det = lu_det(&edge.trans_inv);
        assert!(det.im.abs() < 1e-10 * det.norm().max(1.0));
    }
}
