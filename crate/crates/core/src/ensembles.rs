//! Probability measures on the unitary group: Haar sampling, the
//! Fourier–Weyl and Pauli families, tensor products of finite ensembles,
//! and checks of the isotropy condition `E U_ij conj(U_kl) = δ_ik δ_jl / d`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{KrausChannel, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{qr, ComplexMatrix};
use crate::{math, MAX_DIM};

/// Above this dimension only the sampled isotropy check is offered.
pub const EXACT_ISOTROPY_MAX_DIM: usize = 16;
/// Largest qubit count for an enumerated Pauli family (`4^k` matrices).
pub const MAX_PAULI_QUBITS: usize = 5;
const PROBABILITY_TOL: f64 = 1e-12;

/// Haar-distributed `d x d` unitary.
///
/// A matrix of i.i.d. standard complex Gaussians is QR-factorized and `Q`
/// is multiplied on the right by the phases `r_ii / |r_ii|`, which makes
/// the law exactly Haar.
pub fn sample_haar<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be positive"));
    }
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!("dimension {d} exceeds the cap of {MAX_DIM}")));
    }
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let ginibre = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let (mut q, r) = qr(&ginibre)?;
    for j in 0..d {
        let rjj = r[(j, j)];
        let abs = math::abs(rjj);
        let phase = if abs == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rjj.unscale(abs)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Cyclic shift `A e_j = e_{j+1 mod d}`.
pub fn shift_matrix(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Modulation `B e_j = omega^j e_j` with `omega = exp(2 i pi / d)`.
pub fn clock_matrix(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            omega_pow(d, i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn omega_pow(d: usize, k: usize) -> Complex64 {
    let k = k % d;
    // Quarter turns are exact so that small families contain exact Paulis.
    if (4 * k).is_multiple_of(d) {
        return match 4 * k / d {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    math::cis(2.0 * PI * k as f64 / d as f64)
}

/// The `d^2` operators `B^j A^k`, listed with index `j*d + k` for
/// `0 <= j, k < d` (exponents are taken mod `d`).
pub fn fourier_weyl_family(d: usize) -> Result<Vec<ComplexMatrix>> {
    if d < 2 {
        return Err(Error::param("d", "the Fourier–Weyl family needs d >= 2"));
    }
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!("dimension {d} exceeds the cap of {MAX_DIM}")));
    }
    let mut family = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            // (B^j A^k)_{row, col} = omega^{j row} [row == col + k mod d]
            family.push(ComplexMatrix::from_fn(d, d, |row, col| {
                if row == (col + k) % d {
                    omega_pow(d, j * row)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
        }
    }
    Ok(family)
}

/// Fourier basis vector `x_j = (omega^{j m} / sqrt(d))_m`.
pub fn fourier_basis_vector(d: usize, j: usize) -> Vec<Complex64> {
    let norm = 1.0 / math::sqrt(d as f64);
    (0..d).map(|m| omega_pow(d, j * m).scale(norm)).collect()
}

/// `[sigma_0, sigma_1, sigma_2, sigma_3]`.
pub fn pauli_matrices() -> [ComplexMatrix; 4] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let m = |v: [Complex64; 4]| ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2");
    [
        m([one, z, z, one]),
        m([z, one, one, z]),
        m([z, -i, i, z]),
        m([one, z, z, -one]),
    ]
}

/// Finite measure on unitaries.
#[derive(Clone, Debug)]
pub struct DiscreteEnsemble {
    dim: usize,
    unitaries: Vec<ComplexMatrix>,
    probabilities: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl PartialEq for DiscreteEnsemble {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.unitaries == other.unitaries
            && self.probabilities == other.probabilities
    }
}

impl DiscreteEnsemble {
    pub fn new(unitaries: Vec<ComplexMatrix>, probabilities: Vec<f64>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::InvalidInput("a discrete ensemble needs at least one unitary".into()));
        }
        if unitaries.len() != probabilities.len() {
            return Err(Error::InvalidInput(format!(
                "{} unitaries but {} probabilities",
                unitaries.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidInput("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        let dim = unitaries[0].rows();
        if dim > MAX_DIM {
            return Err(Error::ResourceLimit(format!("dimension {dim} exceeds the cap of {MAX_DIM}")));
        }
        for (index, u) in unitaries.iter().enumerate() {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::InvalidInput(format!("element {index} has the wrong shape")));
            }
            let residual = u.unitarity_residual(UNITARY_TOL);
            if residual > UNITARY_TOL {
                return Err(Error::NotUnitary { index, residual });
            }
        }
        let sampler = WeightedIndex::new(probabilities.iter().copied())
            .map_err(|e| Error::InvalidInput(format!("bad probabilities: {e}")))?;
        Ok(Self {
            dim,
            unitaries,
            probabilities,
            sampler,
        })
    }

    /// Uniform weights over `unitaries`.
    pub fn uniform(unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let n = unitaries.len().max(1);
        Self::new(unitaries, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Index of a random element drawn with the ensemble weights.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// A probability measure on `U(d)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "EnsembleRepr", into = "EnsembleRepr")
)]
pub enum UnitaryEnsemble {
    Haar { dim: usize },
    Discrete(DiscreteEnsemble),
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleRepr {
    dim: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unitaries: Option<Vec<ComplexMatrix>>,
}

#[cfg(feature = "serde")]
impl TryFrom<EnsembleRepr> for UnitaryEnsemble {
    type Error = Error;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        match r.kind.as_str() {
            "haar" => {
                if r.probabilities.is_some() || r.unitaries.is_some() {
                    return Err(Error::InvalidInput("a haar ensemble carries no matrices".into()));
                }
                UnitaryEnsemble::haar(r.dim)
            }
            "discrete" => {
                let e = DiscreteEnsemble::new(
                    r.unitaries.unwrap_or_default(),
                    r.probabilities.unwrap_or_default(),
                )?;
                if e.dim() != r.dim {
                    return Err(Error::InvalidInput(format!(
                        "declared dim {} but matrices are {}x{}",
                        r.dim,
                        e.dim(),
                        e.dim()
                    )));
                }
                Ok(UnitaryEnsemble::Discrete(e))
            }
            other => Err(Error::InvalidInput(format!("unknown ensemble kind `{other}`"))),
        }
    }
}

#[cfg(feature = "serde")]
impl From<UnitaryEnsemble> for EnsembleRepr {
    fn from(e: UnitaryEnsemble) -> Self {
        match e {
            UnitaryEnsemble::Haar { dim } => EnsembleRepr {
                dim,
                kind: "haar".into(),
                probabilities: None,
                unitaries: None,
            },
            UnitaryEnsemble::Discrete(d) => EnsembleRepr {
                dim: d.dim,
                kind: "discrete".into(),
                probabilities: Some(d.probabilities),
                unitaries: Some(d.unitaries),
            },
        }
    }
}

impl UnitaryEnsemble {
    pub fn haar(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("d", "dimension must be positive"));
        }
        if dim > MAX_DIM {
            return Err(Error::ResourceLimit(format!("dimension {dim} exceeds the cap of {MAX_DIM}")));
        }
        Ok(UnitaryEnsemble::Haar { dim })
    }

    /// Uniform measure on the Fourier–Weyl family.
    pub fn fourier(dim: usize) -> Result<Self> {
        Ok(UnitaryEnsemble::Discrete(DiscreteEnsemble::uniform(fourier_weyl_family(dim)?)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            UnitaryEnsemble::Haar { dim } => *dim,
            UnitaryEnsemble::Discrete(e) => e.dim,
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteEnsemble> {
        match self {
            UnitaryEnsemble::Discrete(e) => Some(e),
            UnitaryEnsemble::Haar { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        match self {
            UnitaryEnsemble::Haar { dim } => sample_haar(*dim, rng).expect("dimension validated"),
            UnitaryEnsemble::Discrete(e) => e.unitaries[e.sample_index(rng)].clone(),
        }
    }

    /// Channel from `n` i.i.d. draws.
    pub fn sample_channel<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<KrausChannel> {
        if n == 0 {
            return Err(Error::param("n", "need at least one Kraus unitary"));
        }
        if n > crate::MAX_KRAUS {
            return Err(Error::ResourceLimit(format!(
                "N = {n} exceeds the cap of {}",
                crate::MAX_KRAUS
            )));
        }
        let unitaries = (0..n).map(|_| self.sample(rng)).collect();
        KrausChannel::uniform(unitaries)
    }
}

/// The `4^k` tensor products `sigma_{i1} ⊗ ... ⊗ sigma_{ik}`, each with
/// mass `4^-k`. Index order is lexicographic with the first factor most
/// significant.
pub fn pauli_tensor_ensemble(k: usize) -> Result<UnitaryEnsemble> {
    if k == 0 {
        return Err(Error::param("k", "need at least one qubit"));
    }
    if k > MAX_PAULI_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{k} qubits means 4^{k} enumerated matrices; the cap is {MAX_PAULI_QUBITS} qubits"
        )));
    }
    let single = UnitaryEnsemble::Discrete(DiscreteEnsemble::uniform(pauli_matrices().to_vec())?);
    let mut acc = single.clone();
    for _ in 1..k {
        acc = tensor_ensembles(&acc, &single)?;
    }
    Ok(acc)
}

/// Product ensemble `{U ⊗ V}` with product weights. Both inputs must be
/// discrete.
pub fn tensor_ensembles(e1: &UnitaryEnsemble, e2: &UnitaryEnsemble) -> Result<UnitaryEnsemble> {
    let (a, b) = match (e1, e2) {
        (UnitaryEnsemble::Discrete(a), UnitaryEnsemble::Discrete(b)) => (a, b),
        _ => {
            return Err(Error::Unsupported(
                "tensor products are only formed between discrete ensembles".into(),
            ))
        }
    };
    let dim = a.dim * b.dim;
    if dim > MAX_DIM {
        return Err(Error::ResourceLimit(format!("dimension {dim} exceeds the cap of {MAX_DIM}")));
    }
    let mut unitaries = Vec::with_capacity(a.len() * b.len());
    let mut probabilities = Vec::with_capacity(a.len() * b.len());
    for (u, p) in a.unitaries.iter().zip(&a.probabilities) {
        for (v, q) in b.unitaries.iter().zip(&b.probabilities) {
            unitaries.push(u.kron(v));
            probabilities.push(p * q);
        }
    }
    // Renormalize away round-off in the products.
    let total: f64 = probabilities.iter().sum();
    for p in probabilities.iter_mut() {
        *p /= total;
    }
    Ok(UnitaryEnsemble::Discrete(DiscreteEnsemble::new(unitaries, probabilities)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IsotropyMode {
    Exact,
    Sampled,
}

/// Largest deviation of the second-moment tensor from `δ_ik δ_jl / d`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IsotropyReport {
    pub dim: usize,
    pub max_deviation: f64,
    pub mode: IsotropyMode,
    pub sample_count: Option<usize>,
    /// `1/sqrt(samples)` for sampled reports.
    pub standard_error_scale: Option<f64>,
}

/// Accumulates `w vec(U) vec(U)^dagger` into the `d^2 x d^2` moment matrix.
fn accumulate_moments(moments: &mut [Complex64], u: &ComplexMatrix, w: f64) {
    let v = u.as_slice();
    let n = v.len();
    for (r, &vr) in v.iter().enumerate() {
        let a = vr.scale(w);
        let row = &mut moments[r * n..(r + 1) * n];
        for (m, vc) in row.iter_mut().zip(v) {
            *m += a * vc.conj();
        }
    }
}

fn moment_deviation(moments: &[Complex64], d: usize) -> f64 {
    let n = d * d;
    let target = 1.0 / d as f64;
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { target } else { 0.0 };
            worst = worst.max(math::abs(moments[r * n + c] - Complex64::new(want, 0.0)));
        }
    }
    worst
}

/// Exact second moments `sum_m p_m (U_m)_ij conj((U_m)_kl)` over all index
/// tuples.
pub fn check_isotropy_exact(e: &DiscreteEnsemble) -> Result<IsotropyReport> {
    let d = e.dim;
    if d > EXACT_ISOTROPY_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "exact isotropy is limited to d <= {EXACT_ISOTROPY_MAX_DIM}; use the sampled check"
        )));
    }
    let n = d * d;
    let mut moments = vec![Complex64::new(0.0, 0.0); n * n];
    for (u, &p) in e.unitaries.iter().zip(&e.probabilities) {
        accumulate_moments(&mut moments, u, p);
    }
    Ok(IsotropyReport {
        dim: d,
        max_deviation: moment_deviation(&moments, d),
        mode: IsotropyMode::Exact,
        sample_count: None,
        standard_error_scale: None,
    })
}

/// Monte Carlo estimate of the second moments from `samples` draws.
pub fn check_isotropy_sampled<R: Rng + ?Sized>(
    e: &UnitaryEnsemble,
    samples: usize,
    rng: &mut R,
) -> Result<IsotropyReport> {
    if samples < 100 {
        return Err(Error::param("samples", "need at least 100 samples"));
    }
    let d = e.dim();
    let n = d * d;
    let mut moments = vec![Complex64::new(0.0, 0.0); n * n];
    for _ in 0..samples {
        let u = e.sample(rng);
        accumulate_moments(&mut moments, &u, 1.0);
    }
    let inv = 1.0 / samples as f64;
    for m in moments.iter_mut() {
        *m = m.scale(inv);
    }
    Ok(IsotropyReport {
        dim: d,
        max_deviation: moment_deviation(&moments, d),
        mode: IsotropyMode::Sampled,
        sample_count: Some(samples),
        standard_error_scale: Some(1.0 / math::sqrt(samples as f64)),
    })
}

/// True iff every off-diagonal `|tr U_i^dagger U_j|` is at most `tol`.
pub fn mutually_orthogonal_check(family: &[ComplexMatrix], tol: f64) -> Result<bool> {
    if let Some(first) = family.first() {
        if family.iter().any(|u| u.rows() != first.rows() || u.cols() != first.cols()) {
            return Err(Error::InvalidInput("family members have different shapes".into()));
        }
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let g = crate::linalg::trace_inner(&family[i], &family[j])?;
            if math::abs(g) > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A named ensemble that can be instantiated at any supported dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleSpec {
    Haar,
    /// Fourier–Weyl family; with `full_family` the channel uses every
    /// element once instead of i.i.d. draws.
    Fourier { full_family: bool },
    /// Pauli tensors on `log2(d)` qubits.
    Pauli { full_family: bool },
    /// A fixed ensemble loaded from elsewhere; only valid at its own `dim`.
    /// `full_family` needs a discrete ensemble.
    Custom { ensemble: UnitaryEnsemble, full_family: bool },
}

impl EnsembleSpec {
    /// Short descriptor stored in reports.
    pub fn descriptor(&self) -> String {
        match self {
            EnsembleSpec::Haar => "haar".to_string(),
            EnsembleSpec::Fourier { full_family: false } => "fourier".to_string(),
            EnsembleSpec::Fourier { full_family: true } => "fourier(full)".to_string(),
            EnsembleSpec::Pauli { full_family: false } => "pauli".to_string(),
            EnsembleSpec::Pauli { full_family: true } => "pauli(full)".to_string(),
            EnsembleSpec::Custom { ensemble, full_family } => {
                let full = if *full_family { ",full" } else { "" };
                match ensemble {
                    UnitaryEnsemble::Haar { dim } => format!("custom(haar,d={dim}{full})"),
                    UnitaryEnsemble::Discrete(x) => format!("custom(discrete,d={},m={}{full})", x.dim, x.len()),
                }
            }
        }
    }

    pub fn instantiate(&self, d: usize) -> Result<ChannelSource> {
        match self {
            EnsembleSpec::Haar => Ok(ChannelSource::Sampled(UnitaryEnsemble::haar(d)?)),
            EnsembleSpec::Fourier { full_family } => {
                let family = fourier_weyl_family(d)?;
                if *full_family {
                    Ok(ChannelSource::FullFamily(family))
                } else {
                    Ok(ChannelSource::Sampled(UnitaryEnsemble::Discrete(
                        DiscreteEnsemble::uniform(family)?,
                    )))
                }
            }
            EnsembleSpec::Pauli { full_family } => {
                if !d.is_power_of_two() || d < 2 {
                    return Err(Error::Unsupported(format!(
                        "Pauli tensors need d = 2^k, got {d}"
                    )));
                }
                let ensemble = pauli_tensor_ensemble(d.trailing_zeros() as usize)?;
                if *full_family {
                    let family = ensemble.as_discrete().expect("discrete").unitaries.clone();
                    Ok(ChannelSource::FullFamily(family))
                } else {
                    Ok(ChannelSource::Sampled(ensemble))
                }
            }
            EnsembleSpec::Custom { ensemble, full_family } => {
                if ensemble.dim() != d {
                    return Err(Error::Unsupported(format!(
                        "the loaded ensemble has d = {}, requested d = {d}",
                        ensemble.dim()
                    )));
                }
                match (ensemble, full_family) {
                    (UnitaryEnsemble::Discrete(x), true) => Ok(ChannelSource::FullFamily(x.unitaries.clone())),
                    (UnitaryEnsemble::Haar { .. }, true) => Err(Error::Unsupported(
                        "a Haar ensemble has no finite family to use in full".into(),
                    )),
                    _ => Ok(ChannelSource::Sampled(ensemble.clone())),
                }
            }
        }
    }
}

/// How a channel is produced for a given dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSource {
    /// `N` i.i.d. draws from the ensemble.
    Sampled(UnitaryEnsemble),
    /// The whole family, each element once; `N` is the family size.
    FullFamily(Vec<ComplexMatrix>),
}

impl ChannelSource {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, ChannelSource::FullFamily(_))
    }

    pub fn build_channel<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<KrausChannel> {
        match self {
            ChannelSource::Sampled(e) => e.sample_channel(n, rng),
            ChannelSource::FullFamily(family) => {
                if n != family.len() {
                    return Err(Error::param(
                        "n",
                        format!("the full family has {} elements, requested N = {n}", family.len()),
                    ));
                }
                KrausChannel::uniform(family.clone())
            }
        }
    }
}
