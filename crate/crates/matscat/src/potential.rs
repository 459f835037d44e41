//! Piecewise-constant matrix potentials on the line.
//!
//! A potential is an ordered list of constant Hermitian fragments with
//! pairwise-disjoint supports; it is identically zero elsewhere, so the total
//! support is compact and the Faddeev moment condition holds automatically.
//!
//! Translations are stored as an offset rather than baked into the fragment
//! endpoints, which keeps `shifted(b).shifted(-b)` an exact identity.

use crate::linalg::ComplexMatrix;
use num_complex::Complex64;

/// Fragments must be Hermitian to this tolerance (relative Frobenius).
pub const FRAGMENT_HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("fragment {index} is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { index: usize, deviation: f64 },
    #[error("fragments {left} and {right} have overlapping supports")]
    OverlappingSupports { left: usize, right: usize },
    #[error("fragment {index} has an empty support [{x_min}, {x_max}]")]
    EmptyFragment {
        index: usize,
        x_min: f64,
        x_max: f64,
    },
    #[error("fragment {index} is {got}x{got2}, expected {expected}x{expected}")]
    SizeMismatch {
        index: usize,
        got: usize,
        got2: usize,
        expected: usize,
    },
}

/// A constant matrix on an interval, zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub x_min: f64,
    pub x_max: f64,
    pub matrix: ComplexMatrix,
}

impl Fragment {
    pub fn new(x_min: f64, x_max: f64, matrix: ComplexMatrix) -> Self {
        Self {
            x_min,
            x_max,
            matrix,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn contains(&self, x: f64) -> bool {
        self.x_min < x && x < self.x_max
    }
}

/// Ordered constant-matrix fragments; `V == 0` outside all supports.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    n: usize,
    fragments: Vec<Fragment>,
    /// The potential evaluates to the stored fragments at `x + offset`.
    offset: f64,
}

impl PiecewisePotential {
    /// Validates hermiticity, sizes, nonempty supports, and ordering
    /// (touching endpoints allowed, overlapping interiors rejected).
    pub fn new(n: usize, fragments: Vec<Fragment>) -> Result<Self, PotentialError> {
        assert!(n >= 1, "matrix size must be positive");
        for (index, f) in fragments.iter().enumerate() {
            let support_ok = f.x_min.is_finite() && f.x_max.is_finite() && f.x_min < f.x_max;
            if !support_ok {
                return Err(PotentialError::EmptyFragment {
                    index,
                    x_min: f.x_min,
                    x_max: f.x_max,
                });
            }
            if f.matrix.rows() != n || f.matrix.cols() != n {
                return Err(PotentialError::SizeMismatch {
                    index,
                    got: f.matrix.rows(),
                    got2: f.matrix.cols(),
                    expected: n,
                });
            }
            let deviation = f.matrix.hermitian_deviation();
            if deviation > FRAGMENT_HERMITICITY_TOL * f.matrix.frobenius_norm().max(1.0) {
                return Err(PotentialError::NotHermitian { index, deviation });
            }
        }
        for i in 1..fragments.len() {
            if fragments[i - 1].x_max > fragments[i].x_min {
                return Err(PotentialError::OverlappingSupports {
                    left: i - 1,
                    right: i,
                });
            }
        }
        Ok(Self {
            n,
            fragments,
            offset: 0.0,
        })
    }

    /// The free potential (no fragments).
    pub fn free(n: usize) -> Self {
        Self {
            n,
            fragments: Vec::new(),
            offset: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Materialized fragments at their current positions.
    pub fn fragments(&self) -> Vec<Fragment> {
        self.fragments
            .iter()
            .map(|f| {
                Fragment::new(
                    f.x_min - self.offset,
                    f.x_max - self.offset,
                    f.matrix.clone(),
                )
            })
            .collect()
    }

    pub fn fragment_count(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_free(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Edges of the total support, `None` for the free potential.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.fragments.first()?;
        let last = self.fragments.last()?;
        Some((first.x_min - self.offset, last.x_max - self.offset))
    }

    /// Pointwise value; fragment boundaries resolve half-open from the left,
    /// which only matters on a set of measure zero.
    pub fn value_at(&self, x: f64) -> ComplexMatrix {
        let y = x + self.offset;
        for f in &self.fragments {
            if f.x_min <= y && y < f.x_max {
                return f.matrix.clone();
            }
        }
        ComplexMatrix::zeros(self.n, self.n)
    }

    /// Matrix integral of V over the line (translation invariant).
    pub fn integral(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for f in &self.fragments {
            acc = &acc + &f.matrix.scaled(Complex64::new(f.width(), 0.0));
        }
        acc
    }

    /// Splits the potential at the given strictly increasing cut points into
    /// `cuts.len() + 1` standalone potentials whose pointwise sum equals the
    /// original. A cut interior to a fragment splits it into two fragments
    /// sharing the cut as boundary.
    pub fn split_at(&self, cuts: &[f64]) -> Vec<PiecewisePotential> {
        assert!(
            cuts.windows(2).all(|w| w[0] < w[1]),
            "cut points must be strictly increasing"
        );
        let mut pieces: Vec<Vec<Fragment>> = vec![Vec::new(); cuts.len() + 1];
        for f in self.fragments() {
            let mut lo = f.x_min;
            for (slot, piece) in pieces.iter_mut().enumerate() {
                let hi = if slot < cuts.len() {
                    cuts[slot].min(f.x_max)
                } else {
                    f.x_max
                };
                if lo < hi {
                    piece.push(Fragment::new(lo, hi, f.matrix.clone()));
                    lo = hi;
                }
                if slot < cuts.len() && f.x_max <= cuts[slot] {
                    break;
                }
            }
        }
        pieces
            .into_iter()
            .map(|frs| PiecewisePotential::new(self.n, frs).expect("pieces of valid potential"))
            .collect()
    }

    /// The shifted potential with value at `x` equal to the original value at
    /// `x + b` (supports translate by `-b`).
    pub fn shifted(&self, b: f64) -> Self {
        Self {
            n: self.n,
            fragments: self.fragments.clone(),
            offset: self.offset + b,
        }
    }

    /// Folds the line at `cut` into the half-line 2n x 2n block potential
    /// `diag(V_right(x), V_left(-x))` on x > 0, where V_left/V_right are the
    /// pieces below/above the cut. For `cut != 0` the potential is shifted
    /// first so the fold always happens at the origin.
    pub fn half_line(&self, cut: f64) -> HalfLinePotential {
        let folded = if cut != 0.0 {
            self.shifted(cut)
        } else {
            self.clone()
        };
        let pieces = folded.split_at(&[0.0]);
        let (left, right) = (&pieces[0], &pieces[1]);

        // reflect the left piece onto the positive axis: support (u, v) in
        // x<0 becomes (-v, -u), carrying V_left(-x)
        let mut reflected: Vec<Fragment> = left
            .fragments()
            .iter()
            .map(|f| Fragment::new(-f.x_max, -f.x_min, f.matrix.clone()))
            .collect();
        reflected.reverse();
        let mirrored =
            PiecewisePotential::new(self.n, reflected).expect("reflection preserves validity");

        // merge the two breakpoint sets and emit block-diagonal fragments
        let mut points: Vec<f64> = Vec::new();
        for f in right.fragments().iter().chain(mirrored.fragments().iter()) {
            points.push(f.x_min);
            points.push(f.x_max);
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        points.dedup();

        let zero = ComplexMatrix::zeros(self.n, self.n);
        let mut fragments = Vec::new();
        for w in points.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let upper = right.value_at(mid);
            let lower = mirrored.value_at(mid);
            if upper == zero && lower == zero {
                continue;
            }
            let block = ComplexMatrix::block_2x2(
                &upper,
                &ComplexMatrix::zeros(self.n, self.n),
                &ComplexMatrix::zeros(self.n, self.n),
                &lower,
            );
            fragments.push(Fragment::new(lo, hi, block));
        }
        let inner = PiecewisePotential::new(2 * self.n, fragments)
            .expect("block-diagonal Hermitian fragments");
        HalfLinePotential { inner }
    }

    /// Midpoint-samples a general matrix function into `count` uniform
    /// fragments on `[x_min, x_max]`; the helper for potentials that are not
    /// natively piecewise constant.
    pub fn sample<F>(
        n: usize,
        f: F,
        x_min: f64,
        x_max: f64,
        count: usize,
    ) -> Result<Self, PotentialError>
    where
        F: Fn(f64) -> ComplexMatrix,
    {
        assert!(x_min < x_max && count >= 1);
        // one shared boundary grid, so adjacent fragments touch exactly
        let h = (x_max - x_min) / count as f64;
        let boundary = |j: usize| x_min + j as f64 * h;
        let fragments = (0..count)
            .map(|i| {
                let (lo, hi) = (boundary(i), boundary(i + 1));
                Fragment::new(lo, hi, f(0.5 * (lo + hi)))
            })
            .collect();
        Self::new(n, fragments)
    }
}

/// The folded 2n x 2n potential on the positive half line.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLinePotential {
    inner: PiecewisePotential,
}

impl HalfLinePotential {
    /// Block size 2n.
    pub fn n2(&self) -> usize {
        self.inner.n()
    }

    pub fn as_potential(&self) -> &PiecewisePotential {
        &self.inner
    }

    pub fn value_at(&self, x: f64) -> ComplexMatrix {
        self.inner.value_at(x)
    }
}
