//! Assembly of the 2n x 2n scattering matrix and the identity battery.
//!
//! The battery is a registry of named residual functions evaluated per
//! wavenumber, covering unitarity, the cross-wavenumber symmetries, the
//! Wronskian relations, the determinant identities of the solution matrices,
//! their explicit inverse formulas, and the transition-matrix relations.
//! Adding an identity means adding one `(name, function)` row.

use crate::factorization::{left_transition, right_transition};
use crate::jost::{
    jost_left, jost_right, left_state_at, right_state_at, scattering_data, JostError,
    ScatteringData, SolutionState,
};
use crate::linalg::{lu_det, lu_inverse, ComplexMatrix};
use crate::potential::PiecewisePotential;
use num_complex::Complex64;

/// Default residual tolerance for every identity in the battery.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-9;

/// One identity evaluated at one wavenumber.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub name: &'static str,
    pub k: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(name: &'static str, k: f64, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            k,
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}

/// The 2n x 2n scattering matrix `[[Tl, R], [L, Tr]]`.
pub fn assemble_s_matrix(d: &ScatteringData) -> ComplexMatrix {
    ComplexMatrix::block_2x2(&d.trans_left, &d.refl_right, &d.refl_left, &d.trans_right)
}

/// The two constant 2n x 2n involutions: the block sign matrix
/// `diag(I, -I)` and the block swap `[[0, I], [I, 0]]`. Both square to the
/// identity and have determinant `(-1)^n`.
pub fn involution_constants(n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let one = Complex64::new(1.0, 0.0);
    let mut sign = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut swap = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        sign[(i, i)] = one;
        sign[(n + i, n + i)] = -one;
        swap[(i, n + i)] = one;
        swap[(n + i, i)] = one;
    }
    (sign, swap)
}

/// Everything the identity functions need at one wavenumber.
struct BatteryContext {
    n: usize,
    k: f64,
    data_plus: ScatteringData,
    data_minus: ScatteringData,
    s_plus: ComplexMatrix,
    s_minus: ComplexMatrix,
    /// Jost states at the sample points, for +k and -k.
    samples: Vec<SamplePoint>,
    sign: ComplexMatrix,
    swap: ComplexMatrix,
}

struct SamplePoint {
    left_plus: SolutionState,
    left_minus: SolutionState,
    right_plus: SolutionState,
    right_minus: SolutionState,
}

impl BatteryContext {
    fn build(
        p: &PiecewisePotential,
        k: f64,
        data_plus: ScatteringData,
        data_minus: ScatteringData,
    ) -> Result<Self, JostError> {
        let n = p.n();
        // sample interior propagation at the midpoint and the exact exterior
        // forms at both support edges
        let xs = match p.support() {
            Some((a, b)) => vec![a, 0.5 * (a + b), b],
            None => vec![0.0],
        };
        let kc = Complex64::new(k, 0.0);
        let samples = xs
            .iter()
            .map(|&x| {
                Ok(SamplePoint {
                    left_plus: left_state_at(p, kc, x)?,
                    left_minus: left_state_at(p, -kc, x)?,
                    right_plus: right_state_at(p, kc, x)?,
                    right_minus: right_state_at(p, -kc, x)?,
                })
            })
            .collect::<Result<Vec<_>, JostError>>()?;
        let s_plus = assemble_s_matrix(&data_plus);
        let s_minus = assemble_s_matrix(&data_minus);
        let (sign, swap) = involution_constants(n);
        Ok(Self {
            n,
            k,
            data_plus,
            data_minus,
            s_plus,
            s_minus,
            samples,
            sign,
            swap,
        })
    }

    fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.n)
    }

    fn two_ik(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * self.k)
    }

    /// `(-2ik)^n`
    fn det_scale(&self) -> Complex64 {
        (-self.two_ik()).powu(self.n as u32)
    }

    fn f_left(&self, s: &SamplePoint) -> ComplexMatrix {
        ComplexMatrix::block_2x2(
            &s.left_plus.value,
            &s.left_minus.value,
            &s.left_plus.derivative,
            &s.left_minus.derivative,
        )
    }

    fn f_right(&self, s: &SamplePoint) -> ComplexMatrix {
        ComplexMatrix::block_2x2(
            &s.right_minus.value,
            &s.right_plus.value,
            &s.right_minus.derivative,
            &s.right_plus.derivative,
        )
    }

    fn g_matrix(&self, s: &SamplePoint) -> ComplexMatrix {
        ComplexMatrix::block_2x2(
            &s.left_plus.value,
            &s.right_plus.value,
            &s.left_plus.derivative,
            &s.right_plus.derivative,
        )
    }

    fn g_matrix_minus(&self, s: &SamplePoint) -> ComplexMatrix {
        ComplexMatrix::block_2x2(
            &s.left_minus.value,
            &s.right_minus.value,
            &s.left_minus.derivative,
            &s.right_minus.derivative,
        )
    }
}

/// `xi(x)^dagger g'(x) - xi'(x)^dagger g(x)`, the adjoint-paired Wronskian.
fn wronskian(xi: &SolutionState, g: &SolutionState) -> ComplexMatrix {
    &(&xi.value.adjoint() * &g.derivative) - &(&xi.derivative.adjoint() * &g.value)
}

type IdentityFn = fn(&BatteryContext) -> f64;

fn unitarity_left(c: &BatteryContext) -> f64 {
    let id = ComplexMatrix::identity(2 * c.n);
    (&(&c.s_plus.adjoint() * &c.s_plus) - &id).frobenius_norm()
}

fn unitarity_right(c: &BatteryContext) -> f64 {
    let id = ComplexMatrix::identity(2 * c.n);
    (&(&c.s_plus * &c.s_plus.adjoint()) - &id).frobenius_norm()
}

fn reflection_symmetry_left(c: &BatteryContext) -> f64 {
    (&c.data_minus.refl_left - &c.data_plus.refl_left.adjoint()).frobenius_norm()
}

fn reflection_symmetry_right(c: &BatteryContext) -> f64 {
    (&c.data_minus.refl_right - &c.data_plus.refl_right.adjoint()).frobenius_norm()
}

fn transmission_symmetry(c: &BatteryContext) -> f64 {
    (&c.data_minus.trans_left - &c.data_plus.trans_right.adjoint()).frobenius_norm()
}

fn swap_conjugation_symmetry(c: &BatteryContext) -> f64 {
    // S(k)^dagger = Q S(-k) Q
    let rhs = &(&c.swap * &c.s_minus) * &c.swap;
    (&c.s_plus.adjoint() - &rhs).frobenius_norm()
}

fn unitarity_blocks_columns(c: &BatteryContext) -> f64 {
    let d = &c.data_plus;
    let id = c.identity();
    let (tl, tr, l, r) = (&d.trans_left, &d.trans_right, &d.refl_left, &d.refl_right);
    [
        (&(&(&tl.adjoint() * tl) + &(&l.adjoint() * l)) - &id).frobenius_norm(),
        (&(&tl.adjoint() * r) + &(&l.adjoint() * tr)).frobenius_norm(),
        (&(&r.adjoint() * tl) + &(&tr.adjoint() * l)).frobenius_norm(),
        (&(&(&tr.adjoint() * tr) + &(&r.adjoint() * r)) - &id).frobenius_norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn unitarity_blocks_rows(c: &BatteryContext) -> f64 {
    let d = &c.data_plus;
    let id = c.identity();
    let (tl, tr, l, r) = (&d.trans_left, &d.trans_right, &d.refl_left, &d.refl_right);
    [
        (&(&(tl * &tl.adjoint()) + &(r * &r.adjoint())) - &id).frobenius_norm(),
        (&(tl * &l.adjoint()) + &(r * &tr.adjoint())).frobenius_norm(),
        (&(l * &tl.adjoint()) + &(tr * &r.adjoint())).frobenius_norm(),
        (&(&(tr * &tr.adjoint()) + &(l * &l.adjoint())) - &id).frobenius_norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn transmission_det_equality(c: &BatteryContext) -> f64 {
    let dl = lu_det(&c.data_plus.trans_left);
    let dr = lu_det(&c.data_plus.trans_right);
    (dl - dr).norm() / dl.norm().max(1e-300)
}

fn det_f_left(c: &BatteryContext) -> f64 {
    let scale = c.det_scale();
    c.samples
        .iter()
        .map(|s| (lu_det(&c.f_left(s)) - scale).norm() / scale.norm())
        .fold(0.0, f64::max)
}

fn det_f_right(c: &BatteryContext) -> f64 {
    let scale = c.det_scale();
    c.samples
        .iter()
        .map(|s| (lu_det(&c.f_right(s)) - scale).norm() / scale.norm())
        .fold(0.0, f64::max)
}

fn det_g(c: &BatteryContext) -> f64 {
    let scale = c.det_scale();
    let det_tr = lu_det(&c.data_plus.trans_right);
    c.samples
        .iter()
        .map(|s| (lu_det(&c.g_matrix(s)) * det_tr - scale).norm() / scale.norm())
        .fold(0.0, f64::max)
}

fn max_over_samples(c: &BatteryContext, f: impl Fn(&SamplePoint) -> f64) -> f64 {
    c.samples.iter().map(f).fold(0.0, f64::max)
}

fn wronskian_left_self(c: &BatteryContext) -> f64 {
    let two_ik_id = c.identity().scaled(c.two_ik());
    let tl_inv = lu_inverse(&c.data_plus.trans_left).expect("invertible on real axis");
    let l = &c.data_plus.refl_left;
    let inner = &c.identity() - &(&l.adjoint() * l);
    let rhs = (&(&tl_inv.adjoint() * &inner) * &tl_inv).scaled(c.two_ik());
    let coeff_residual = (&rhs - &two_ik_id).frobenius_norm();
    max_over_samples(c, |s| {
        (&wronskian(&s.left_plus, &s.left_plus) - &two_ik_id).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_left_cross(c: &BatteryContext) -> f64 {
    let tl_inv_p = lu_inverse(&c.data_plus.trans_left).expect("invertible on real axis");
    let tl_inv_m = lu_inverse(&c.data_minus.trans_left).expect("invertible on real axis");
    let inner = &c.data_minus.refl_left.adjoint() - &c.data_plus.refl_left;
    let rhs = (&(&tl_inv_m.adjoint() * &inner) * &tl_inv_p).scaled(c.two_ik());
    let coeff_residual = rhs.frobenius_norm();
    max_over_samples(c, |s| {
        wronskian(&s.left_minus, &s.left_plus).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_right_self(c: &BatteryContext) -> f64 {
    let minus_two_ik_id = c.identity().scaled(-c.two_ik());
    let tr_inv = lu_inverse(&c.data_plus.trans_right).expect("invertible on real axis");
    let r = &c.data_plus.refl_right;
    let inner = &c.identity() - &(&r.adjoint() * r);
    let rhs = (&(&tr_inv.adjoint() * &inner) * &tr_inv).scaled(-c.two_ik());
    let coeff_residual = (&rhs - &minus_two_ik_id).frobenius_norm();
    max_over_samples(c, |s| {
        (&wronskian(&s.right_plus, &s.right_plus) - &minus_two_ik_id).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_right_cross(c: &BatteryContext) -> f64 {
    let tr_inv_p = lu_inverse(&c.data_plus.trans_right).expect("invertible on real axis");
    let tr_inv_m = lu_inverse(&c.data_minus.trans_right).expect("invertible on real axis");
    let inner = &c.data_plus.refl_right - &c.data_minus.refl_right.adjoint();
    let rhs = (&(&tr_inv_m.adjoint() * &inner) * &tr_inv_p).scaled(c.two_ik());
    let coeff_residual = rhs.frobenius_norm();
    max_over_samples(c, |s| {
        wronskian(&s.right_minus, &s.right_plus).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_left_right(c: &BatteryContext) -> f64 {
    let tr_inv = lu_inverse(&c.data_plus.trans_right).expect("invertible on real axis");
    let tl_inv = lu_inverse(&c.data_plus.trans_left).expect("invertible on real axis");
    let mid = (&c.data_plus.refl_right * &tr_inv).scaled(c.two_ik());
    let rhs = (&tl_inv.adjoint() * &c.data_plus.refl_left.adjoint()).scaled(-c.two_ik());
    let coeff_residual = (&mid - &rhs).frobenius_norm();
    max_over_samples(c, |s| {
        (&wronskian(&s.left_plus, &s.right_plus) - &mid).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_transmission_right(c: &BatteryContext) -> f64 {
    // for real k the solution pair is (f_l at -k)^dagger with f_r at +k
    let tr_inv = lu_inverse(&c.data_plus.trans_right).expect("invertible on real axis");
    let tl_inv_m = lu_inverse(&c.data_minus.trans_left).expect("invertible on real axis");
    let mid = tr_inv.scaled(-c.two_ik());
    let rhs = tl_inv_m.adjoint().scaled(-c.two_ik());
    let coeff_residual = (&mid - &rhs).frobenius_norm();
    max_over_samples(c, |s| {
        (&wronskian(&s.left_minus, &s.right_plus) - &mid).frobenius_norm()
    })
    .max(coeff_residual)
}

fn wronskian_transmission_left(c: &BatteryContext) -> f64 {
    let tl_inv = lu_inverse(&c.data_plus.trans_left).expect("invertible on real axis");
    let tr_inv_m = lu_inverse(&c.data_minus.trans_right).expect("invertible on real axis");
    let mid = tr_inv_m.adjoint().scaled(c.two_ik());
    let rhs = tl_inv.scaled(c.two_ik());
    let coeff_residual = (&mid - &rhs).frobenius_norm();
    max_over_samples(c, |s| {
        (&wronskian(&s.right_minus, &s.left_plus) - &rhs).frobenius_norm()
    })
    .max(coeff_residual)
}

fn inverse_f_left(c: &BatteryContext) -> f64 {
    let id = ComplexMatrix::identity(2 * c.n);
    let inv_two_ik = Complex64::new(1.0, 0.0) / c.two_ik();
    max_over_samples(c, |s| {
        let finv = ComplexMatrix::block_2x2(
            &-&s.left_plus.derivative.adjoint(),
            &s.left_plus.value.adjoint(),
            &s.left_minus.derivative.adjoint(),
            &-&s.left_minus.value.adjoint(),
        )
        .scaled(inv_two_ik);
        (&(&finv * &c.f_left(s)) - &id).frobenius_norm()
    })
}

fn inverse_f_right(c: &BatteryContext) -> f64 {
    let id = ComplexMatrix::identity(2 * c.n);
    let inv_two_ik = Complex64::new(1.0, 0.0) / c.two_ik();
    max_over_samples(c, |s| {
        let finv = ComplexMatrix::block_2x2(
            &-&s.right_minus.derivative.adjoint(),
            &s.right_minus.value.adjoint(),
            &s.right_plus.derivative.adjoint(),
            &-&s.right_plus.value.adjoint(),
        )
        .scaled(inv_two_ik);
        (&(&finv * &c.f_right(s)) - &id).frobenius_norm()
    })
}

fn inverse_g(c: &BatteryContext) -> f64 {
    let id = ComplexMatrix::identity(2 * c.n);
    let zero = ComplexMatrix::zeros(c.n, c.n);
    let trans_diag = ComplexMatrix::block_2x2(
        &c.data_plus.trans_left,
        &zero,
        &zero,
        &c.data_plus.trans_right,
    );
    let inv_two_ik = Complex64::new(-1.0, 0.0) / c.two_ik();
    max_over_samples(c, |s| {
        let adj_block = ComplexMatrix::block_2x2(
            &s.right_minus.derivative.adjoint(),
            &-&s.right_minus.value.adjoint(),
            &-&s.left_minus.derivative.adjoint(),
            &s.left_minus.value.adjoint(),
        );
        let ginv = (&trans_diag * &adj_block).scaled(inv_two_ik);
        (&(&ginv * &c.g_matrix(s)) - &id).frobenius_norm()
    })
}

fn g_reflection(c: &BatteryContext) -> f64 {
    let factor = &(&(&c.sign * &c.s_plus) * &c.sign) * &c.swap;
    max_over_samples(c, |s| {
        (&c.g_matrix_minus(s) - &(&c.g_matrix(s) * &factor)).frobenius_norm()
    })
}

fn det_s_ratio(c: &BatteryContext) -> f64 {
    let det_s = lu_det(&c.s_plus);
    let det_tl = lu_det(&c.data_plus.trans_left);
    (det_s - det_tl / det_tl.conj()).norm()
}

fn det_s_modulus(c: &BatteryContext) -> f64 {
    (lu_det(&c.s_plus).norm() - 1.0).abs()
}

fn transition_inverse(c: &BatteryContext) -> f64 {
    let lam = left_transition(&c.data_plus, &c.data_minus).expect("valid pair");
    let sig = right_transition(&c.data_plus, &c.data_minus).expect("valid pair");
    let id = ComplexMatrix::identity(2 * c.n);
    (&(&lam.matrix * &sig.matrix) - &id).frobenius_norm()
}

fn transition_det(c: &BatteryContext) -> f64 {
    let lam = left_transition(&c.data_plus, &c.data_minus).expect("valid pair");
    let sig = right_transition(&c.data_plus, &c.data_minus).expect("valid pair");
    let one = Complex64::new(1.0, 0.0);
    (lu_det(&lam.matrix) - one)
        .norm()
        .max((lu_det(&sig.matrix) - one).norm())
}

const REGISTRY: &[(&str, IdentityFn)] = &[
    ("unitarity_left", unitarity_left),
    ("unitarity_right", unitarity_right),
    ("reflection_symmetry_left", reflection_symmetry_left),
    ("reflection_symmetry_right", reflection_symmetry_right),
    ("transmission_symmetry", transmission_symmetry),
    ("swap_conjugation_symmetry", swap_conjugation_symmetry),
    ("unitarity_blocks_columns", unitarity_blocks_columns),
    ("unitarity_blocks_rows", unitarity_blocks_rows),
    ("transmission_det_equality", transmission_det_equality),
    ("det_f_left", det_f_left),
    ("det_f_right", det_f_right),
    ("det_g", det_g),
    ("wronskian_left_self", wronskian_left_self),
    ("wronskian_left_cross", wronskian_left_cross),
    ("wronskian_right_self", wronskian_right_self),
    ("wronskian_right_cross", wronskian_right_cross),
    ("wronskian_left_right", wronskian_left_right),
    ("wronskian_transmission_right", wronskian_transmission_right),
    ("wronskian_transmission_left", wronskian_transmission_left),
    ("inverse_f_left", inverse_f_left),
    ("inverse_f_right", inverse_f_right),
    ("inverse_g", inverse_g),
    ("g_reflection", g_reflection),
    ("det_s_ratio", det_s_ratio),
    ("det_s_modulus", det_s_modulus),
    ("transition_inverse", transition_inverse),
    ("transition_det", transition_det),
];

/// Runs the battery on precomputed scattering data; exposed so corrupted
/// data can be fed through as a negative control.
pub fn run_battery(
    p: &PiecewisePotential,
    k: f64,
    data_plus: ScatteringData,
    data_minus: ScatteringData,
    tol: f64,
) -> Result<Vec<IdentityReport>, JostError> {
    let ctx = BatteryContext::build(p, k, data_plus, data_minus)?;
    Ok(REGISTRY
        .iter()
        .map(|(name, f)| IdentityReport::new(name, k, f(&ctx), tol))
        .collect())
}

/// Evaluates every identity at every grid wavenumber (the grid must exclude
/// zero). Failures come back as reports, not errors.
pub fn verify_identities(
    p: &PiecewisePotential,
    k_grid: &[f64],
    tol: f64,
) -> Result<Vec<IdentityReport>, JostError> {
    let mut reports = Vec::with_capacity(k_grid.len() * REGISTRY.len());
    for &k in k_grid {
        let data_plus = scattering_data(p, k)?;
        let data_minus = scattering_data(p, -k)?;
        reports.extend(run_battery(p, k, data_plus, data_minus, tol)?);
    }
    Ok(reports)
}

/// Consistency of a one-sided Jost extraction with the scattering data,
/// used by tests that only need the transmission part.
pub fn transmission_pair(
    p: &PiecewisePotential,
    k: f64,
) -> Result<(ComplexMatrix, ComplexMatrix), JostError> {
    let kc = Complex64::new(k, 0.0);
    let left = jost_left(p, kc)?;
    let right = jost_right(p, kc)?;
    Ok((lu_inverse(&left.trans_inv)?, lu_inverse(&right.trans_inv)?))
}
