//! Uniform-weight unitary channels `X -> (1/N) sum_i U_i X U_i^dagger`,
//! the completely depolarizing channel, Choi matrices and Kraus rank.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, jacobi_eig, ComplexMatrix};
use crate::{math, MAX_DIM, MAX_KRAUS};

/// Unitarity tolerance for channel elements, `||U^dagger U - Id||_inf`.
pub const UNITARY_TOL: f64 = 1e-9;
/// Relative eigenvalue cutoff used by [`KrausChannel::kraus_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Tolerance for the state checks in [`DensityMatrix::new`].
pub const STATE_TOL: f64 = 1e-9;

/// A channel given by `N` Kraus unitaries with uniform weight `1/N`.
///
/// The weight is structural and never stored per element, so unitarity of
/// the stored matrices is exactly the trace-preservation condition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "ChannelRepr", into = "ChannelRepr")
)]
pub struct KrausChannel {
    dim: usize,
    unitaries: Vec<ComplexMatrix>,
    certified: bool,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRepr {
    dim: usize,
    unitaries: Vec<ComplexMatrix>,
}

#[cfg(feature = "serde")]
impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;

    fn try_from(repr: ChannelRepr) -> Result<Self> {
        let channel = KrausChannel::uniform(repr.unitaries)?;
        if channel.dim != repr.dim {
            return Err(Error::InvalidInput(format!(
                "declared dim {} but unitaries are {}x{}",
                repr.dim, channel.dim, channel.dim
            )));
        }
        Ok(channel)
    }
}

#[cfg(feature = "serde")]
impl From<KrausChannel> for ChannelRepr {
    fn from(c: KrausChannel) -> Self {
        ChannelRepr {
            dim: c.dim,
            unitaries: c.unitaries,
        }
    }
}

fn check_shapes(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidInput("a channel needs at least one Kraus element".into()))?;
    let dim = first.rows();
    if ops.len() > MAX_KRAUS {
        return Err(Error::ResourceLimit(format!(
            "{} Kraus elements exceeds the cap of {MAX_KRAUS}",
            ops.len()
        )));
    }
    if dim > MAX_DIM {
        return Err(Error::ResourceLimit(format!("dimension {dim} exceeds the cap of {MAX_DIM}")));
    }
    for (k, op) in ops.iter().enumerate() {
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::InvalidInput(format!(
                "element {k} is {}x{}, expected {dim}x{dim}",
                op.rows(),
                op.cols()
            )));
        }
    }
    Ok(dim)
}

impl KrausChannel {
    /// Validated constructor: every element must be a `d x d` unitary.
    pub fn uniform(unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = check_shapes(&unitaries)?;
        for (index, u) in unitaries.iter().enumerate() {
            let residual = u.unitarity_residual(UNITARY_TOL);
            if residual > UNITARY_TOL {
                return Err(Error::NotUnitary { index, residual });
            }
        }
        Ok(Self {
            dim,
            unitaries,
            certified: true,
        })
    }

    /// Accepts arbitrary square Kraus elements (still weighted `1/N`).
    /// The result is flagged as not certifiable; it exists to exercise the
    /// CP/TP checks.
    pub fn relaxed(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = check_shapes(&ops)?;
        Ok(Self {
            dim,
            unitaries: ops,
            certified: false,
        })
    }

    /// Single-element channel `X -> U X U^dagger`.
    pub fn conjugation(u: ComplexMatrix) -> Result<Self> {
        Self::uniform(alloc::vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            unitaries: alloc::vec![ComplexMatrix::identity(dim)],
            certified: true,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of Kraus elements `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// False for channels built with [`KrausChannel::relaxed`].
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    fn weight(&self) -> f64 {
        1.0 / self.unitaries.len() as f64
    }

    /// `(1/N) sum_i U_i X U_i^dagger`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::InvalidInput(format!(
                "channel acts on {d}x{d} matrices, got {}x{}",
                x.rows(),
                x.cols(),
                d = self.dim
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for u in &self.unitaries {
            let ux = u.matmul_unchecked(x);
            out = &out + &ux.matmul_unchecked(&u.adjoint());
        }
        Ok(out.scale_real(self.weight()))
    }

    /// `Phi(|x><x|) = (1/N) sum_i |U_i x><U_i x|` for a vector `x`.
    pub fn apply_rank_one(&self, x: &[Complex64]) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for u in &self.unitaries {
            let w = u.mul_vec(x);
            accumulate_outer(&mut out, &w);
        }
        out.scale_real(self.weight())
    }

    /// Adjoint map applied to a rank-one input:
    /// `(1/N) sum_i |U_i^dagger y><U_i^dagger y|`.
    pub fn apply_adjoint_rank_one(&self, y: &[Complex64]) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for u in &self.unitaries {
            let w = u.adjoint_mul_vec(y);
            accumulate_outer(&mut out, &w);
        }
        out.scale_real(self.weight())
    }

    /// Natural representation on row-major vectorized matrices:
    /// `vec(Phi(X)) = S vec(X)` with `S = (1/N) sum_i U_i ⊗ conj(U_i)`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.dim;
        let n2 = d * d;
        let mut s = ComplexMatrix::zeros(n2, n2);
        for u in &self.unitaries {
            for a in 0..d {
                for c in 0..d {
                    let uac = u[(a, c)];
                    if uac == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..d {
                        for dd in 0..d {
                            s[(a * d + b, c * d + dd)] += uac * u[(b, dd)].conj();
                        }
                    }
                }
            }
        }
        s.scale_real(self.weight())
    }

    /// Choi matrix `sum_ij E_ij ⊗ Phi(E_ij)`, row index `i*d + a`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d * d, d * d);
        // Phi(E_ij)_ab = (1/N) sum_k U_ai conj(U_bj)
        for u in &self.unitaries {
            let col: Vec<Complex64> = (0..d * d).map(|r| u[(r % d, r / d)]).collect();
            accumulate_outer(&mut out, &col);
        }
        out.scale_real(self.weight())
    }

    /// Number of Choi eigenvalues above `rank_tol` times the largest one.
    pub fn kraus_rank(&self, rank_tol: f64) -> usize {
        let eig = jacobi_eig(&self.choi());
        let top = eig.eigenvalues[0];
        if top <= 0.0 {
            return 0;
        }
        eig.eigenvalues.iter().filter(|&&l| l > rank_tol * top).count()
    }

    /// Checks `(1/N) sum_i U_i^dagger U_i = Id` in operator norm.
    pub fn is_trace_preserving(&self, tol: f64) -> TraceCheck {
        let d = self.dim;
        let mut sum = ComplexMatrix::zeros(d, d);
        for u in &self.unitaries {
            sum = &sum + &u.adjoint().matmul_unchecked(u);
        }
        let mut defect = sum.scale_real(self.weight());
        for i in 0..d {
            defect[(i, i)] -= Complex64::new(1.0, 0.0);
        }
        let residual = crate::linalg::hermitian_spectral_radius(&defect);
        TraceCheck {
            trace_preserving: residual <= tol,
            residual,
        }
    }

    /// Smallest Choi eigenvalue; non-negative (up to round-off) exactly
    /// when the map is completely positive.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let eig = jacobi_eig(&self.choi());
        *eig.eigenvalues.last().expect("non-empty")
    }
}

/// Outcome of [`KrausChannel::is_trace_preserving`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCheck {
    pub trace_preserving: bool,
    pub residual: f64,
}

fn accumulate_outer(out: &mut ComplexMatrix, w: &[Complex64]) {
    let n = w.len();
    for i in 0..n {
        let wi = w[i];
        for j in 0..n {
            out[(i, j)] += wi * w[j].conj();
        }
    }
}

/// The completely depolarizing channel `X -> tr(X) Id/d`.
pub fn apply_r(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let d = x.rows();
    let t = x.trace().unscale(d as f64);
    Ok(ComplexMatrix::identity(d).scale(t))
}

/// A state: Hermitian, unit trace, positive semi-definite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the state conditions to [`STATE_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("a state must be a square matrix".into()));
        }
        let defect = matrix.hermitian_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian { residual: defect });
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm_sqr() > STATE_TOL * STATE_TOL {
            return Err(Error::InvalidInput(format!("state trace is {} not 1", tr.re)));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = *eig.eigenvalues.last().expect("non-empty");
        if min < -STATE_TOL {
            return Err(Error::InvalidInput(format!(
                "state has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `P_x = |x><x|` after normalizing `x`.
    pub fn pure(x: &[Complex64]) -> Result<Self> {
        let norm = math::sqrt(x.iter().map(|z| z.norm_sqr()).sum());
        if x.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("pure state needs a nonzero finite vector".into()));
        }
        let v: Vec<Complex64> = x.iter().map(|z| z.unscale(norm)).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&v, &v),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{fourier_weyl_family, pauli_matrices, sample_haar};
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).max_abs()
    }

    fn random_state(d: usize, seed: u64) -> DensityMatrix {
        let mut rng = stream(seed, 0);
        let u = sample_haar(d, &mut rng).unwrap();
        let diag: Vec<f64> = (0..d).map(|k| (k + 1) as f64).collect();
        let total: f64 = diag.iter().sum();
        let p = ComplexMatrix::from_real_diagonal(&diag).scale_real(1.0 / total);
        let rho = &(&u * &p) * &u.adjoint();
        DensityMatrix::new(rho).unwrap()
    }

    #[test]
    fn identity_channel_fixes_states() {
        let rho = random_state(3, 1);
        let out = KrausChannel::identity(3).apply(rho.matrix()).unwrap();
        assert!(close(&out, rho.matrix()) < 1e-15);
    }

    #[test]
    fn fourier_channel_is_depolarizing() {
        let ch = KrausChannel::uniform(fourier_weyl_family(2).unwrap()).unwrap();
        let rho = random_state(2, 2);
        assert!(close(&ch.apply(rho.matrix()).unwrap(), &apply_r(rho.matrix()).unwrap()) < 1e-15);

        let ch = KrausChannel::uniform(fourier_weyl_family(4).unwrap()).unwrap();
        let rho = random_state(4, 3);
        let want = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(close(&ch.apply(rho.matrix()).unwrap(), &want) < 1e-12);
    }

    #[test]
    fn sigma1_conjugation_flips() {
        let ch = KrausChannel::conjugation(pauli_matrices()[1].clone()).unwrap();
        let out = ch.apply(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        assert!(close(&out, &ComplexMatrix::from_real_diagonal(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn constructor_errors() {
        assert!(matches!(KrausChannel::uniform(vec![]), Err(Error::InvalidInput(_))));
        let bad = vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2).scale_real(1.01)];
        assert!(matches!(
            KrausChannel::uniform(bad),
            Err(Error::NotUnitary { index: 1, .. })
        ));
        let mixed = vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)];
        assert!(matches!(KrausChannel::uniform(mixed), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn apply_rejects_wrong_dim() {
        assert!(KrausChannel::identity(2).apply(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn apply_fixes_identity_and_conjugates_projectors() {
        let mut rng = stream(4, 0);
        let us: Vec<_> = (0..5).map(|_| sample_haar(3, &mut rng).unwrap()).collect();
        let ch = KrausChannel::uniform(us.clone()).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!(close(&ch.apply(&id).unwrap(), &id) < 1e-14);

        let single = KrausChannel::conjugation(us[0].clone()).unwrap();
        let x = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)];
        let px = ComplexMatrix::outer(&x, &x);
        let ux = us[0].mul_vec(&x);
        assert!(close(&single.apply(&px).unwrap(), &ComplexMatrix::outer(&ux, &ux)) < 1e-14);
        assert!(close(&single.apply_rank_one(&x), &ComplexMatrix::outer(&ux, &ux)) < 1e-14);
    }

    #[test]
    fn apply_r_examples() {
        let rho = random_state(5, 9);
        let out = apply_r(rho.matrix()).unwrap();
        assert!(close(&out, DensityMatrix::maximally_mixed(5).matrix()) < 1e-15);
        let traceless = pauli_matrices()[2].clone();
        assert_eq!(apply_r(&traceless).unwrap().max_abs(), 0.0);
        let three = ComplexMatrix::identity(2).scale_real(3.0);
        assert!(close(&apply_r(&three).unwrap(), &ComplexMatrix::identity(2).scale_real(3.0)) < 1e-15);
        assert!(apply_r(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn choi_examples() {
        for d in 2..=6 {
            let ch = KrausChannel::uniform(fourier_weyl_family(d).unwrap()).unwrap();
            let want = ComplexMatrix::identity(d * d).scale_real(1.0 / d as f64);
            assert!(close(&ch.choi(), &want) < 1e-12, "d={d}");
        }
        let id_choi = KrausChannel::identity(2).choi();
        let mut want = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                want[(i * 2 + i, j * 2 + j)] = Complex64::new(1.0, 0.0);
            }
        }
        assert_eq!(id_choi, want);
        let flip = KrausChannel::conjugation(pauli_matrices()[1].clone()).unwrap();
        assert_eq!(flip.kraus_rank(DEFAULT_RANK_TOL), 1);
        assert_ne!(flip.choi(), id_choi);
    }

    #[test]
    fn choi_matches_definition() {
        let mut rng = stream(12, 0);
        let us: Vec<_> = (0..3).map(|_| sample_haar(3, &mut rng).unwrap()).collect();
        let ch = KrausChannel::uniform(us).unwrap();
        let d = 3;
        let mut want = ComplexMatrix::zeros(9, 9);
        for i in 0..d {
            for j in 0..d {
                let out = ch.apply(&ComplexMatrix::unit(d, i, j)).unwrap();
                for a in 0..d {
                    for b in 0..d {
                        want[(i * d + a, j * d + b)] = out[(a, b)];
                    }
                }
            }
        }
        assert!(close(&ch.choi(), &want) < 1e-14);
        assert_abs_diff_eq!(ch.choi().trace().re, 3.0, epsilon = 1e-12);
        assert!(ch.choi_min_eigenvalue() > -1e-12);
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = stream(13, 0);
        let us: Vec<_> = (0..4).map(|_| sample_haar(3, &mut rng).unwrap()).collect();
        let ch = KrausChannel::uniform(us).unwrap();
        let rho = random_state(3, 14);
        let s = ch.superoperator();
        let v = s.mul_vec(rho.matrix().as_slice());
        let out = ComplexMatrix::from_vec(3, 3, v).unwrap();
        assert!(close(&out, &ch.apply(rho.matrix()).unwrap()) < 1e-14);
    }

    #[test]
    fn kraus_rank_examples() {
        let ch = KrausChannel::uniform(fourier_weyl_family(3).unwrap()).unwrap();
        assert_eq!(ch.kraus_rank(DEFAULT_RANK_TOL), 9);
        assert_eq!(KrausChannel::identity(4).kraus_rank(DEFAULT_RANK_TOL), 1);
        let mut rng = stream(15, 0);
        let us: Vec<_> = (0..2).map(|_| sample_haar(4, &mut rng).unwrap()).collect();
        assert_eq!(KrausChannel::uniform(us).unwrap().kraus_rank(DEFAULT_RANK_TOL), 2);
    }

    #[test]
    fn trace_preservation_check() {
        let mut rng = stream(16, 0);
        let us: Vec<_> = (0..6).map(|_| sample_haar(3, &mut rng).unwrap()).collect();
        let tp = KrausChannel::uniform(us).unwrap().is_trace_preserving(1e-12);
        assert!(tp.trace_preserving && tp.residual <= 1e-12);

        let scaled = KrausChannel::relaxed(vec![ComplexMatrix::identity(2).scale_real(1.01)]).unwrap();
        assert!(!scaled.is_certified());
        let check = scaled.is_trace_preserving(1e-9);
        assert!(!check.trace_preserving);
        assert_abs_diff_eq!(check.residual, 0.0201, epsilon = 1e-12);

        let two = KrausChannel::relaxed(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2).scale_real(1.01),
        ])
        .unwrap();
        assert_abs_diff_eq!(two.is_trace_preserving(1e-9).residual, 0.0201 / 2.0, epsilon = 1e-12);

        assert_eq!(KrausChannel::identity(1).is_trace_preserving(0.0).residual, 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::unit(2, 0, 1)).is_err());
        assert!(DensityMatrix::pure(&[Complex64::new(0.0, 0.0)]).is_err());
        let p = DensityMatrix::pure(&[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(p.matrix().trace().re, 1.0, epsilon = 1e-15);
    }
}
