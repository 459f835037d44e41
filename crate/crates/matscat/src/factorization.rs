//! Transition matrices and fragment composition.
//!
//! The 2n x 2n transition matrices multiply across adjacent potential
//! fragments: the left-kind matrices compose in spatial order, the right-kind
//! ones in reverse. The two kinds are inverses of each other at every real
//! nonzero wavenumber, and both have unit determinant. `compose_scattering`
//! bypasses the 2n x 2n detour and combines two fragments' scattering
//! coefficients directly.

use crate::jost::ScatteringData;
use crate::linalg::{lu_inverse, ComplexMatrix, LinalgError};
use num_complex::Complex64;

/// `compose_scattering` errors out when the inverse of the coupling factor
/// exceeds this norm.
pub const COUPLING_NORM_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FactorizationError {
    #[error("transition matrices of different kinds cannot be composed")]
    MixedKind,
    #[error("transition matrices at different wavenumbers cannot be composed ({a} vs {b})")]
    MixedWavenumber { a: f64, b: f64 },
    #[error("composition needs at least one transition matrix")]
    Empty,
    #[error("near-singular fragment coupling (inverse norm {norm:.3e})")]
    SingularCoupling { norm: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which family of scattering coefficients a transition matrix is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Built from left transmission/reflection; composes left-to-right.
    Left,
    /// Built from right transmission/reflection; composes right-to-left.
    Right,
}

/// A 2n x 2n transition matrix tagged with its kind and wavenumber.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub kind: TransitionKind,
    pub k: f64,
    pub matrix: ComplexMatrix,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows() / 2
    }
}

/// Left-kind transition matrix from scattering data at `+k` and `-k`:
/// blocks `[Tl(k)^-1, L(-k) Tl(-k)^-1; L(k) Tl(k)^-1, Tl(-k)^-1]`.
pub fn left_transition(
    at_k: &ScatteringData,
    at_minus_k: &ScatteringData,
) -> Result<TransitionMatrix, FactorizationError> {
    check_pair(at_k, at_minus_k)?;
    let tl_inv_p = lu_inverse(&at_k.trans_left)?;
    let tl_inv_m = lu_inverse(&at_minus_k.trans_left)?;
    let matrix = ComplexMatrix::block_2x2(
        &tl_inv_p,
        &(&at_minus_k.refl_left * &tl_inv_m),
        &(&at_k.refl_left * &tl_inv_p),
        &tl_inv_m,
    );
    Ok(TransitionMatrix {
        kind: TransitionKind::Left,
        k: at_k.k,
        matrix,
    })
}

/// Right-kind transition matrix from scattering data at `+k` and `-k`:
/// blocks `[Tr(-k)^-1, R(k) Tr(k)^-1; R(-k) Tr(-k)^-1, Tr(k)^-1]`.
pub fn right_transition(
    at_k: &ScatteringData,
    at_minus_k: &ScatteringData,
) -> Result<TransitionMatrix, FactorizationError> {
    check_pair(at_k, at_minus_k)?;
    let tr_inv_p = lu_inverse(&at_k.trans_right)?;
    let tr_inv_m = lu_inverse(&at_minus_k.trans_right)?;
    let matrix = ComplexMatrix::block_2x2(
        &tr_inv_m,
        &(&at_k.refl_right * &tr_inv_p),
        &(&at_minus_k.refl_right * &tr_inv_m),
        &tr_inv_p,
    );
    Ok(TransitionMatrix {
        kind: TransitionKind::Right,
        k: at_k.k,
        matrix,
    })
}

fn check_pair(
    at_k: &ScatteringData,
    at_minus_k: &ScatteringData,
) -> Result<(), FactorizationError> {
    assert!(at_k.k != 0.0, "transition matrices are undefined at k = 0");
    if at_minus_k.k != -at_k.k {
        return Err(FactorizationError::MixedWavenumber {
            a: at_k.k,
            b: at_minus_k.k,
        });
    }
    Ok(())
}

/// Ordered product over fragments listed left to right: left-kind composes
/// in order, right-kind in reverse.
pub fn compose(parts: &[TransitionMatrix]) -> Result<TransitionMatrix, FactorizationError> {
    let first = parts.first().ok_or(FactorizationError::Empty)?;
    for t in parts {
        if t.kind != first.kind {
            return Err(FactorizationError::MixedKind);
        }
        if t.k != first.k {
            return Err(FactorizationError::MixedWavenumber { a: first.k, b: t.k });
        }
    }
    let mut order: Vec<&TransitionMatrix> = parts.iter().collect();
    if first.kind == TransitionKind::Right {
        order.reverse();
    }
    let mut product = order[0].matrix.clone();
    for t in &order[1..] {
        product = &product * &t.matrix;
    }
    Ok(TransitionMatrix {
        kind: first.kind,
        k: first.k,
        matrix: product,
    })
}

/// Conjugates a transition matrix by `diag(e^{ikb} I, e^{-ikb} I)`, the
/// effect of translating the underlying potential by `b`.
pub fn shift_transition(t: &TransitionMatrix, b: f64) -> TransitionMatrix {
    let n = t.n();
    let phase = Complex64::new(0.0, t.k * b).exp();
    let mut matrix = t.matrix.clone();
    for i in 0..2 * n {
        for j in 0..2 * n {
            let row_phase = if i < n { phase } else { phase.conj() };
            let col_phase = if j < n { phase.conj() } else { phase };
            matrix[(i, j)] *= row_phase * col_phase;
        }
    }
    TransitionMatrix {
        kind: t.kind,
        k: t.k,
        matrix,
    }
}

/// Combines the scattering coefficients of a left fragment and a right
/// fragment (each given at `+k` and `-k`) into the coefficients of their
/// union, without going through the 2n x 2n transition product.
pub fn compose_scattering(
    left_at_k: &ScatteringData,
    left_at_minus_k: &ScatteringData,
    right_at_k: &ScatteringData,
    right_at_minus_k: &ScatteringData,
) -> Result<ScatteringData, FactorizationError> {
    check_pair(left_at_k, left_at_minus_k)?;
    check_pair(right_at_k, right_at_minus_k)?;
    let n = left_at_k.n();
    let identity = ComplexMatrix::identity(n);

    let r1 = &left_at_k.refl_right;
    let l2 = &right_at_k.refl_left;
    let coupling = lu_inverse(&(&identity - &(r1 * l2)))?;
    if coupling.frobenius_norm() > COUPLING_NORM_LIMIT {
        return Err(FactorizationError::SingularCoupling {
            norm: coupling.frobenius_norm(),
        });
    }

    let tr1_minus_adj = left_at_minus_k.trans_right.adjoint();
    let trans_left = &(&right_at_k.trans_left * &coupling) * &tr1_minus_adj;

    let tr1_adj_inv = lu_inverse(&left_at_k.trans_right.adjoint())?;
    let refl_left =
        &(&tr1_adj_inv * &(&(l2 - &left_at_minus_k.refl_right) * &coupling)) * &tr1_minus_adj;

    let coupling_r = lu_inverse(&(&identity - &(l2 * r1)))?;
    let trans_right =
        &(&left_at_k.trans_right * &coupling_r) * &right_at_minus_k.trans_left.adjoint();

    let tl2_minus_inv = lu_inverse(&right_at_minus_k.trans_left)?;
    let refl_right = &(&right_at_k.trans_left * &coupling)
        * &(&(r1 - &right_at_minus_k.refl_left) * &tl2_minus_inv);

    Ok(ScatteringData {
        k: left_at_k.k,
        trans_left,
        trans_right,
        refl_left,
        refl_right,
    })
}
