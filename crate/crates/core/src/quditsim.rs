//! Dense state-vector simulation of small qudit systems.
//!
//! Only what the 2-sum protocol needs: generalized Pauli gates, local
//! unitaries on one subsystem, Bell states and a Bell-basis measurement.
//! Conventions: `X|j> = |j+1 mod d>`, `Z|j> = w^j |j>` with `w = exp(2 pi i / d)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Numerical tolerance for norms, unitarity and outcome probabilities.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuditError {
    #[error("qudit dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("subsystem {index} does not exist (state has {count})")]
    NoSuchSubsystem { index: usize, count: usize },
    #[error("operator of dimension {op} applied to subsystem of dimension {sub}")]
    DimensionMismatch { op: usize, sub: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("amplitude vector has length {got}, dimensions require {want}")]
    AmplitudeLength { got: usize, want: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("Bell label ({x}, {y}) out of range for d = {d}")]
    LabelOutOfRange { x: usize, y: usize, d: usize },
    #[error("Bell measurement needs two subsystems of equal dimension, got {0:?}")]
    NotBellPair(Vec<usize>),
}

/// A square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self, QuditError> {
        if data.len() != dim * dim {
            return Err(QuditError::AmplitudeLength {
                got: data.len(),
                want: dim * dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Matrix { dim: n, data }
    }

    pub fn scale(&self, c: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Matrix { dim: n, data }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_deviation(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_error(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .max_deviation(&Matrix::identity(self.dim))
    }
}

/// `exp(2 pi i k / d)`.
pub fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * k / d as f64)
}

/// Cyclic shift `X^a`; the exponent is taken mod `d`.
pub fn pauli_x(d: usize, a: i64) -> Matrix {
    let a = a.rem_euclid(d as i64) as usize;
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        data[((j + a) % d) * d + j] = Complex64::new(1.0, 0.0);
    }
    Matrix { dim: d, data }
}

/// Clock `Z^b`; the exponent is taken mod `d`.
pub fn pauli_z(d: usize, b: i64) -> Matrix {
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        data[j * d + j] = root_of_unity(d, j as i64 * b);
    }
    Matrix { dim: d, data }
}

/// A unitary acting on one subsystem of a composite state.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    target: usize,
    matrix: Matrix,
}

impl LocalUnitary {
    pub fn new(target: usize, matrix: Matrix) -> Result<Self, QuditError> {
        let err = matrix.unitarity_error();
        if err > TOLERANCE {
            return Err(QuditError::NotUnitary(err));
        }
        Ok(Self { target, matrix })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

/// Label `(x, y)` of the Bell basis state `|phi^{x,y}>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel {
    pub x: usize,
    pub y: usize,
}

/// Pure state of a composite system; basis index is mixed-radix with the
/// first subsystem most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self, QuditError> {
        if let Some(&bad) = dims.iter().find(|&&d| d < 2) {
            return Err(QuditError::BadDimension(bad));
        }
        let want: usize = dims.iter().product();
        if amps.len() != want {
            return Err(QuditError::AmplitudeLength {
                got: amps.len(),
                want,
            });
        }
        let state = Self { dims, amps };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > TOLERANCE {
            return Err(QuditError::NotNormalized(n));
        }
        Ok(state)
    }

    /// Computational basis state `|labels>`.
    pub fn basis(dims: Vec<usize>, labels: &[usize]) -> Result<Self, QuditError> {
        let want: usize = dims.iter().product();
        let mut amps = vec![Complex64::new(0.0, 0.0); want];
        let mut idx = 0;
        for (&l, &d) in labels.iter().zip(&dims) {
            idx = idx * d + l % d;
        }
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality up to a global phase: `|<self|other>| = 1` within tolerance.
    pub fn equal_up_to_phase(&self, other: &PureState) -> bool {
        self.dims == other.dims && (self.inner(other).norm() - 1.0).abs() <= TOLERANCE
    }

    /// Probability of each computational basis outcome on one subsystem.
    pub fn computational_probabilities(&self, target: usize) -> Result<Vec<f64>, QuditError> {
        let (outer, dim, inner) = self.split(target)?;
        let mut probs = vec![0.0; dim];
        for o in 0..outer {
            for (j, p) in probs.iter_mut().enumerate() {
                for i in 0..inner {
                    *p += self.amps[(o * dim + j) * inner + i].norm_sqr();
                }
            }
        }
        Ok(probs)
    }

    fn split(&self, target: usize) -> Result<(usize, usize, usize), QuditError> {
        if target >= self.dims.len() {
            return Err(QuditError::NoSuchSubsystem {
                index: target,
                count: self.dims.len(),
            });
        }
        let outer: usize = self.dims[..target].iter().product();
        let inner: usize = self.dims[target + 1..].iter().product();
        Ok((outer, self.dims[target], inner))
    }
}

/// `(I x ... x U x ... x I)|state>`.
pub fn apply_local(state: &PureState, u: &LocalUnitary) -> Result<PureState, QuditError> {
    let (outer, dim, inner) = state.split(u.target)?;
    if u.matrix.dim != dim {
        return Err(QuditError::DimensionMismatch {
            op: u.matrix.dim,
            sub: dim,
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for o in 0..outer {
        for row in 0..dim {
            for col in 0..dim {
                let m = u.matrix.get(row, col);
                if m == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..inner {
                    out[(o * dim + row) * inner + i] += m * state.amps[(o * dim + col) * inner + i];
                }
            }
        }
    }
    Ok(PureState {
        dims: state.dims.clone(),
        amps: out,
    })
}

/// `|phi^{0,0}> = (1/sqrt d) sum_i |i>|i>`.
pub fn bell_pair(d: usize) -> Result<PureState, QuditError> {
    if d < 2 {
        return Err(QuditError::BadDimension(d));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    PureState::new(vec![d, d], amps)
}

/// `|phi^{x,y}> = (X^x Z^y x I)|phi^{0,0}>`.
pub fn bell_basis_state(d: usize, x: usize, y: usize) -> Result<PureState, QuditError> {
    if x >= d || y >= d {
        return Err(QuditError::LabelOutOfRange { x, y, d });
    }
    let gate = pauli_x(d, x as i64).mul(&pauli_z(d, y as i64));
    apply_local(&bell_pair(d)?, &LocalUnitary::new(0, gate)?)
}

/// Outcome distribution of a measurement in the Bell basis `{|phi^{x,y}>}`.
pub fn measure_bell_basis(state: &PureState) -> Result<BTreeMap<BellLabel, f64>, QuditError> {
    let d = match state.dims() {
        [a, b] if a == b => *a,
        other => return Err(QuditError::NotBellPair(other.to_vec())),
    };
    let mut probs = BTreeMap::new();
    for x in 0..d {
        for y in 0..d {
            let basis = bell_basis_state(d, x, y)?;
            probs.insert(BellLabel { x, y }, basis.inner(state).norm_sqr());
        }
    }
    Ok(probs)
}

/// The unique label whose probability exceeds `1 - TOLERANCE`, if any.
pub fn deterministic_outcome(probs: &BTreeMap<BellLabel, f64>) -> Option<BellLabel> {
    probs
        .iter()
        .find(|(_, &p)| p > 1.0 - TOLERANCE)
        .map(|(&label, _)| label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_pair_amplitudes() {
        let s = bell_pair(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(s.amplitudes(), &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        let s3 = bell_pair(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3f64.sqrt() } else { 0.0 };
                assert!((s3.amplitudes()[i * 3 + j].re - want).abs() < TOLERANCE);
            }
        }
        assert!((bell_pair(5).unwrap().norm_sqr() - 1.0).abs() < TOLERANCE);
        assert_eq!(bell_pair(1), Err(QuditError::BadDimension(1)));
    }

    #[test]
    fn pauli_definitions() {
        let x = pauli_x(2, 1);
        let flip = Matrix::from_rows(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        assert_eq!(x, flip);

        let z = LocalUnitary::new(0, pauli_z(3, 1)).unwrap();
        let two = PureState::basis(vec![3], &[2]).unwrap();
        let out = apply_local(&two, &z).unwrap();
        let w2 = root_of_unity(3, 2);
        assert!((out.amplitudes()[2] - w2).norm() < TOLERANCE);
    }

    #[test]
    fn weyl_commutation_and_periodicity() {
        for d in 2..=7usize {
            let id = Matrix::identity(d);
            assert!(pauli_x(d, d as i64).max_deviation(&id) < TOLERANCE);
            assert!(pauli_z(d, d as i64).max_deviation(&id) < TOLERANCE);
            for a in 0..d as i64 {
                for b in 0..d as i64 {
                    let lhs = pauli_z(d, b).mul(&pauli_x(d, a));
                    let rhs = pauli_x(d, a)
                        .mul(&pauli_z(d, b))
                        .scale(root_of_unity(d, a * b));
                    assert!(lhs.max_deviation(&rhs) < TOLERANCE, "d={d} a={a} b={b}");
                }
            }
        }
        // d = 3: Z X = w X Z
        let zx = pauli_z(3, 1).mul(&pauli_x(3, 1));
        let xz = pauli_x(3, 1).mul(&pauli_z(3, 1)).scale(root_of_unity(3, 1));
        assert!(zx.max_deviation(&xz) < TOLERANCE);
    }

    #[test]
    fn apply_local_examples() {
        let s = bell_pair(2).unwrap();
        let id = LocalUnitary::new(1, Matrix::identity(2)).unwrap();
        assert_eq!(apply_local(&s, &id).unwrap(), s);

        let flipped = apply_local(&s, &LocalUnitary::new(0, pauli_x(2, 1)).unwrap()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        // (|10> + |01>) / sqrt 2
        let want = PureState::new(vec![2, 2], vec![c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]).unwrap();
        assert!(flipped.equal_up_to_phase(&want));
        assert!((flipped.inner(&want).re - 1.0).abs() < TOLERANCE);

        let bad = LocalUnitary::new(0, pauli_x(3, 1)).unwrap();
        assert_eq!(
            apply_local(&s, &bad),
            Err(QuditError::DimensionMismatch { op: 3, sub: 2 })
        );
        let missing = LocalUnitary::new(2, pauli_x(2, 1)).unwrap();
        assert!(matches!(
            apply_local(&s, &missing),
            Err(QuditError::NoSuchSubsystem { .. })
        ));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix::identity(2).scale(c(2.0, 0.0));
        assert!(matches!(LocalUnitary::new(0, m), Err(QuditError::NotUnitary(_))));
    }

    #[test]
    fn bell_basis_examples() {
        for d in 2..=5 {
            assert!(bell_basis_state(d, 0, 0)
                .unwrap()
                .equal_up_to_phase(&bell_pair(d).unwrap()));
        }
        let h = 1.0 / 2f64.sqrt();
        // (|10> - |01>) / sqrt 2
        let want = PureState::new(vec![2, 2], vec![c(0., 0.), c(-h, 0.), c(h, 0.), c(0., 0.)]).unwrap();
        let got = bell_basis_state(2, 1, 1).unwrap();
        assert!((got.inner(&want).re - 1.0).abs() < TOLERANCE);
        assert!(bell_basis_state(3, 3, 0).is_err());
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for d in 2..=7 {
            let states: Vec<_> = (0..d * d)
                .map(|i| bell_basis_state(d, i / d, i % d).unwrap())
                .collect();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - c(want, 0.0)).norm() < TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn measurement_examples() {
        let p = measure_bell_basis(&bell_pair(3).unwrap()).unwrap();
        assert_eq!(deterministic_outcome(&p), Some(BellLabel { x: 0, y: 0 }));
        let p = measure_bell_basis(&bell_basis_state(5, 2, 4).unwrap()).unwrap();
        assert_eq!(deterministic_outcome(&p), Some(BellLabel { x: 2, y: 4 }));
        assert!((p.values().sum::<f64>() - 1.0).abs() < TOLERANCE);

        let single = PureState::basis(vec![3], &[1]).unwrap();
        assert!(matches!(measure_bell_basis(&single), Err(QuditError::NotBellPair(_))));
    }

    #[test]
    fn superposition_has_no_deterministic_outcome() {
        let a = bell_basis_state(2, 0, 0).unwrap();
        let b = bell_basis_state(2, 1, 0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let amps = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x + y) * h)
            .collect();
        let mixed = PureState::new(vec![2, 2], amps).unwrap();
        let p = measure_bell_basis(&mixed).unwrap();
        assert_eq!(deterministic_outcome(&p), None);
    }

    #[test]
    fn two_sum_at_the_state_level() {
        for d in 2..=5usize {
            let di = d as i64;
            for a1 in 0..di {
                for a2 in 0..di {
                    for b1 in 0..di {
                        for b2 in 0..di {
                            let alice = pauli_x(d, a1).mul(&pauli_z(d, a2));
                            let bob = pauli_x(d, -b1).mul(&pauli_z(d, b2));
                            let s = apply_local(&bell_pair(d).unwrap(), &LocalUnitary::new(0, alice).unwrap()).unwrap();
                            let s = apply_local(&s, &LocalUnitary::new(1, bob).unwrap()).unwrap();
                            let want = bell_basis_state(d, ((a1 + b1) % di) as usize, ((a2 + b2) % di) as usize).unwrap();
                            assert!(s.equal_up_to_phase(&want));
                        }
                    }
                }
            }
        }
    }

    fn random_unitary(d: usize, angles: &[f64]) -> Matrix {
        // product of a diagonal phase and a permutation-free Givens rotation chain
        let mut m = Matrix::identity(d);
        for (k, &t) in angles.iter().enumerate() {
            let i = k % (d - 1);
            let mut g = Matrix::identity(d);
            let (s, co) = t.sin_cos();
            g.data[i * d + i] = c(co, 0.0);
            g.data[i * d + i + 1] = c(-s, 0.0);
            g.data[(i + 1) * d + i] = c(s, 0.0);
            g.data[(i + 1) * d + i + 1] = c(co, 0.0);
            m = m.mul(&g).mul(&pauli_z(d, k as i64 + 1));
        }
        m
    }

    proptest! {
        #[test]
        fn apply_local_preserves_norm(
            d in 2usize..6,
            target in 0usize..2,
            angles in proptest::collection::vec(-3.2f64..3.2, 1..8),
            x in 0usize..5,
            y in 0usize..5,
        ) {
            let state = bell_basis_state(d, x % d, y % d).unwrap();
            let u = LocalUnitary::new(target, random_unitary(d, &angles)).unwrap();
            let out = apply_local(&state, &u).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < TOLERANCE);
        }
    }
}
