use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::math;

/// Components below this modulus are treated as zero when fixing the phase.
const PHASE_CUTOFF: f64 = 1e-12;

/// Unit vector in `C^d`, stored with its first nonzero component real and
/// positive so that equal rays compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<Complex64>,
}

impl PureState {
    /// Normalizes and canonicalizes `v`.
    pub fn new(v: Vec<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidInput("a pure state needs d >= 1".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state vector has non-finite entries".into()));
        }
        let norm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if norm == 0.0 {
            return Err(Error::InvalidInput("state vector is zero".into()));
        }
        let mut vector: Vec<Complex64> = v.into_iter().map(|z| z.unscale(norm)).collect();
        canonicalize(&mut vector);
        Ok(Self { vector })
    }

    /// Computational basis vector `e_k`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::param("k", format!("basis index {k} out of range for d = {d}")));
        }
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Uniformly distributed (unitarily invariant) random state.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(s) = Self::new(v) {
                return s;
            }
        }
    }

    /// Pure qubit state with Bloch vector `r` (normalized if needed).
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = math::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
        if len == 0.0 || !len.is_finite() {
            return Err(Error::InvalidInput("Bloch vector must be nonzero and finite".into()));
        }
        let (x, y, z) = (r[0] / len, r[1] / len, r[2] / len);
        let c = math::sqrt(((1.0 + z) / 2.0).max(0.0));
        let v = if c > 1e-300 {
            // e^{i phi} sin(theta/2) = (x + i y) / (2 cos(theta/2))
            alloc::vec![Complex64::new(c, 0.0), Complex64::new(x, y).unscale(2.0 * c)]
        } else {
            alloc::vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        };
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    /// `<self, other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.vector.iter().zip(&other.vector).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|x><x|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector, &self.vector)
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::InvalidInput("Bloch vectors are defined for d = 2".into()));
        }
        let (a, b) = (self.vector[0], self.vector[1]);
        let ab = a.conj() * b;
        Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
    }
}

/// Rotates the global phase so the first nonzero component is real positive.
pub(crate) fn canonicalize(v: &mut [Complex64]) {
    if let Some(k) = v.iter().position(|z| math::abs(*z) > PHASE_CUTOFF) {
        let r = math::abs(v[k]);
        let phase = v[k].conj().unscale(r);
        for z in v.iter_mut() {
            *z *= phase;
        }
        v[k] = Complex64::new(v[k].re, 0.0);
    }
}

/// Trace distance of pure states, `2 sqrt(1 - |<x,y>|^2)`.
pub fn trace_distance_pure(x: &PureState, y: &PureState) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::InvalidInput(format!(
            "states have dimensions {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    let overlap = x.inner(y).norm_sqr().min(1.0);
    Ok(2.0 * math::sqrt(1.0 - overlap))
}

#[cfg(feature = "serde")]
mod wire {
    use alloc::vec::Vec;

    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::PureState;

    impl Serialize for PureState {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            let v: Vec<[f64; 2]> = self.vector.iter().map(|z| [z.re, z.im]).collect();
            v.serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for PureState {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let v: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
            let norm_sq: f64 = v.iter().map(|[a, b]| a * a + b * b).sum();
            if (norm_sq - 1.0).abs() > 1e-9 {
                return Err(D::Error::custom("state vector is not unit norm"));
            }
            let vector: Vec<Complex64> = v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
            if vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(D::Error::custom("state vector has non-finite entries"));
            }
            // Stored states are already canonical; keep them bit-exact.
            let lead = vector.iter().find(|z| crate::math::abs(**z) > super::PHASE_CUTOFF);
            if lead.is_some_and(|z| z.im == 0.0 && z.re > 0.0) {
                return Ok(PureState { vector });
            }
            PureState::new(vector).map_err(D::Error::custom)
        }
    }
}
