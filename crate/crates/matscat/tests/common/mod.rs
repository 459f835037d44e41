//! Shared fixtures for the integration suites: the regression potentials,
//! independent reference formulas, and the seeded random-potential factory.

use matscat::linalg::ComplexMatrix;
use matscat::potential::{Fragment, PiecewisePotential};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The 2x2 complex pair: `[[3, -2+i], [-2-i, -5]]` on (-2, 0) and
/// `[[2, 1+i], [1-i, -2]]` on (0, 1).
pub fn complex_pair() -> PiecewisePotential {
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

/// The real 2x2 family: `[[3, 2], [2, c]]` on (-2, 0) and `[[2, 1], [1, 1]]`
/// on (0, 1).
pub fn real_pair(c22: f64) -> PiecewisePotential {
    let v1 = ComplexMatrix::from_real_rows(&[vec![3.0, 2.0], vec![2.0, c22]]);
    let v2 = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
    PiecewisePotential::new(
        2,
        vec![Fragment::new(-2.0, 0.0, v1), Fragment::new(0.0, 1.0, v2)],
    )
    .unwrap()
}

/// The deep real 2x2 pair: `[[3, -2], [-2, -5]]` on (-2, 0) and
/// `[[2, 1], [1, -2]]` on (0, 1); carries three bound states.
pub fn deep_pair() -> PiecewisePotential {
    let v1 = ComplexMatrix::from_real_rows(&[vec![3.0, -2.0], vec![-2.0, -5.0]]);
    let v2 = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, -2.0]]);
    PiecewisePotential::new(
        2,
        vec![Fragment::new(-2.0, 0.0, v1), Fragment::new(0.0, 1.0, v2)],
    )
    .unwrap()
}

/// Square well of width `a` and depth `b`, centered at the origin.
pub fn scalar_well(a: f64, b: f64) -> PiecewisePotential {
    let m = ComplexMatrix::diagonal(&[c(-b, 0.0)]);
    PiecewisePotential::new(1, vec![Fragment::new(-a / 2.0, a / 2.0, m)]).unwrap()
}

/// Independent plane-wave-matching transmission coefficient for the square
/// well: match `e^{ikx} + r e^{-ikx}` and `t e^{ikx}` across the well with
/// interior wavenumber `q = sqrt(k^2 + b)`.
pub fn well_transmission_reference(a: f64, b: f64, k: f64) -> Complex64 {
    let q = c(k * k + b, 0.0).sqrt();
    let kc = c(k, 0.0);
    let i = c(0.0, 1.0);
    let num = 4.0 * kc * q * (-i * kc * a).exp();
    let den = (q + kc) * (q + kc) * (-i * q * a).exp() - (q - kc) * (q - kc) * (i * q * a).exp();
    num / den
}

/// The square-well transmission closed form as printed in the reference
/// tabulation (kept verbatim for the documented-discrepancy check; its
/// denominator differs from the plane-wave-matching result).
pub fn well_transmission_tabulated(a: f64, b: f64, k: f64) -> Complex64 {
    let q = c(k * k + b, 0.0).sqrt();
    let kc = c(k, 0.0);
    let i = c(0.0, 1.0);
    let q14 = -b - kc * kc + kc * q;
    let q15 = (-kc * kc + kc * q) * (i * q * a).exp();
    let q16 = (b + 2.0 * kc * kc + 2.0 * kc * q) * (-i * q * a).exp();
    4.0 * kc * q * (-i * kc * a).exp() / (q14 + q15 + q16)
}

/// One Hermitian matrix with entries drawn from [-1.5, 1.5].
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(rng.gen_range(-1.5..1.5), 0.0);
        for j in (i + 1)..n {
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// A random Hermitian potential with 1..=4 fragments inside (-3, 3).
pub fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> PiecewisePotential {
    let count = rng.gen_range(1..=4usize);
    let mut fragments = Vec::new();
    let mut cursor = -3.0 + rng.gen_range(0.0..0.4);
    for _ in 0..count {
        cursor += rng.gen_range(0.05..0.7);
        let width = rng.gen_range(0.3..1.2);
        fragments.push(Fragment::new(
            cursor,
            cursor + width,
            random_hermitian(rng, n),
        ));
        cursor += width;
    }
    PiecewisePotential::new(n, fragments).unwrap()
}

/// The shared deterministic suite of criterion-4/5 instances:
/// 200 potentials with n cycling through 1, 2, 3.
pub fn random_suite() -> Vec<PiecewisePotential> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    (0..200)
        .map(|i| random_potential(&mut rng, 1 + i % 3))
        .collect()
}

/// Checks a relative deviation and records a labeled failure.
pub fn check_rel(
    failures: &mut Vec<String>,
    label: &str,
    got: Complex64,
    want: Complex64,
    rel_tol: f64,
) {
    let rel = (got - want).norm() / want.norm();
    let pass = rel <= rel_tol;
    println!(
        "  {label}: computed {:.6}{:+.6}i vs reference {:.5}{:+.5}i  rel {:.2e}  {}",
        got.re,
        got.im,
        want.re,
        want.im,
        rel,
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        failures.push(format!(
            "{label}: relative deviation {rel:.3e} > {rel_tol:.1e}"
        ));
    }
}
