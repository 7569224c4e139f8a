use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::net::PureStateNet;
use super::state::PureState;
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eig, singular_values, ComplexMatrix};
use crate::math;

/// Largest `d` for which the superoperator bound is computed (it needs the
/// singular values of a `d^2 x d^2` matrix).
pub const SUPEROPERATOR_BOUND_MAX_DIM: usize = 16;

/// The Hermitian-preserving difference `Delta = R - Phi` and its adjoint,
/// evaluated on rank-one inputs.
///
/// When `2N > d^2` the natural `d^2 x d^2` representation of `Phi` is
/// formed once and each evaluation costs `d^4`; otherwise the Kraus sum is
/// used directly at `2 N d^2`.
pub struct DeviationMap<'a> {
    channel: &'a KrausChannel,
    superop: Option<ComplexMatrix>,
}

impl<'a> DeviationMap<'a> {
    pub fn new(channel: &'a KrausChannel) -> Self {
        let d = channel.dim();
        let superop = (2 * channel.len() > d * d).then(|| channel.superoperator());
        Self { channel, superop }
    }

    /// Kraus-sum evaluation only.
    pub fn direct(channel: &'a KrausChannel) -> Self {
        Self {
            channel,
            superop: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.channel.dim()
    }

    fn subtract_from_mixed(&self, mut out: ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        for z in out.as_slice_mut() {
            *z = -*z;
        }
        let inv = 1.0 / d as f64;
        for i in 0..d {
            out[(i, i)] += Complex64::new(inv, 0.0);
        }
        out
    }

    /// `Delta(P_x) = Id/d - Phi(P_x)` for a unit vector `x`.
    pub fn forward(&self, x: &[Complex64]) -> ComplexMatrix {
        let d = self.dim();
        let phi = match &self.superop {
            Some(s) => {
                let v = s.mul_vec(ComplexMatrix::outer(x, x).as_slice());
                ComplexMatrix::from_fn(d, d, |i, j| v[i * d + j])
            }
            None => self.channel.apply_rank_one(x),
        };
        self.subtract_from_mixed(phi)
    }

    /// `Delta^*(P_y) = Id/d - Phi^*(P_y)` for a unit vector `y`.
    pub fn adjoint(&self, y: &[Complex64]) -> ComplexMatrix {
        let d = self.dim();
        let phi = match &self.superop {
            Some(s) => {
                let v = s.adjoint_mul_vec(ComplexMatrix::outer(y, y).as_slice());
                ComplexMatrix::from_fn(d, d, |i, j| v[i * d + j])
            }
            None => self.channel.apply_adjoint_rank_one(y),
        };
        self.subtract_from_mixed(phi)
    }
}

/// `|tr P_psi (R - Phi)(P_phi)| = |1/d - (1/N) sum_i |<psi|U_i|phi>|^2|`.
pub fn deviation_eval(channel: &KrausChannel, phi: &PureState, psi: &PureState) -> Result<f64> {
    let d = channel.dim();
    if phi.dim() != d || psi.dim() != d {
        return Err(Error::InvalidInput(format!(
            "channel has d = {d}, states have d = {} and {}",
            phi.dim(),
            psi.dim()
        )));
    }
    Ok(deviation_unchecked(channel, phi.vector(), psi.vector()))
}

fn deviation_unchecked(channel: &KrausChannel, phi: &[Complex64], psi: &[Complex64]) -> f64 {
    let d = channel.dim() as f64;
    let total: f64 = channel
        .unitaries()
        .iter()
        .map(|u| u.sandwich(psi, phi).norm_sqr())
        .sum();
    (1.0 / d - total / channel.len() as f64).abs()
}

/// Settings of the alternating eigen-ascent.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorParams {
    pub restarts: usize,
    pub max_iters: usize,
    pub conv_tol: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 200,
            conv_tol: 1e-10,
        }
    }
}

/// Best value found by [`estimate_sup`]; always a lower bound on
/// `sup_phi ||(R - Phi)(phi)||_inf`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupEstimate {
    pub value: f64,
    pub phi: PureState,
    pub psi: PureState,
    /// Whether the restart that produced `value` met `conv_tol`.
    pub converged: bool,
    pub best_restart: usize,
    pub total_iterations: usize,
}

/// Dominant eigenvector (largest `|lambda|`, ties to the most positive).
fn dominant(h: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let eig = jacobi_eig(h);
    let k = eig.dominant_index();
    (eig.eigenvalues[k].abs(), eig.eigenvectors[k].clone())
}

/// Alternating eigen-ascent for `A = sup_{phi,psi} |tr psi Delta(phi)|`.
///
/// From a random `phi`, `psi` becomes the dominant eigenvector of
/// `Delta(P_phi)`, then `phi` the dominant eigenvector of `Delta^*(P_psi)`;
/// each half-step cannot decrease the objective. Restart `r` starts from
/// the `r`-th state drawn from `rng`, so more restarts with the same seed
/// never give a smaller result.
pub fn estimate_sup<R: Rng + ?Sized>(
    channel: &KrausChannel,
    params: EstimatorParams,
    rng: &mut R,
) -> Result<SupEstimate> {
    if params.restarts == 0 || params.max_iters == 0 {
        return Err(Error::param("restarts", "restarts and max_iters must be positive"));
    }
    if params.conv_tol.is_nan() || params.conv_tol < 0.0 {
        return Err(Error::param("conv_tol", "must be non-negative"));
    }
    let d = channel.dim();
    let map = DeviationMap::new(channel);
    let mut best: Option<SupEstimate> = None;
    let mut total_iterations = 0;

    for restart in 0..params.restarts {
        let mut phi = PureState::random(d, rng).vector().to_vec();
        let mut psi = phi.clone();
        let mut prev = f64::NEG_INFINITY;
        let mut converged = false;
        for _ in 0..params.max_iters {
            total_iterations += 1;
            psi = dominant(&map.forward(&phi)).1;
            let (value, next_phi) = dominant(&map.adjoint(&psi));
            phi = next_phi;
            if (value - prev).abs() < params.conv_tol {
                converged = true;
                break;
            }
            prev = value;
        }
        let phi_state = PureState::new(phi)?;
        let psi_state = PureState::new(psi)?;
        let value = deviation_unchecked(channel, phi_state.vector(), psi_state.vector());
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SupEstimate {
                value,
                phi: phi_state,
                psi: psi_state,
                converged,
                best_restart: restart,
                total_iterations: 0,
            });
        }
    }
    let mut best = best.expect("at least one restart");
    best.total_iterations = total_iterations;
    Ok(best)
}

/// Largest pair value over a net, and the resulting upper bound on `A`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetBound {
    /// `B = max over net pairs of |tr psi0 Delta(phi0)|`.
    pub value: f64,
    /// `B / (1 - 2 delta)`.
    pub upper: f64,
    pub phi_index: usize,
    pub psi_index: usize,
}

/// Evaluates `B` over all ordered pairs of `net`; `Delta(P_phi0)` is formed
/// once per `phi0`.
pub fn net_bound(channel: &KrausChannel, net: &PureStateNet) -> Result<NetBound> {
    if !(net.delta > 0.0 && net.delta < 0.5) {
        return Err(Error::Precondition(format!(
            "the net bound needs 0 < delta < 1/2, net has delta = {}",
            net.delta
        )));
    }
    if net.dim != channel.dim() {
        return Err(Error::InvalidInput(format!(
            "net has d = {}, channel has d = {}",
            net.dim,
            channel.dim()
        )));
    }
    let map = DeviationMap::new(channel);
    let mut best = NetBound {
        value: f64::NEG_INFINITY,
        upper: 0.0,
        phi_index: 0,
        psi_index: 0,
    };
    for (i, phi) in net.states.iter().enumerate() {
        let h = map.forward(phi.vector());
        for (j, psi) in net.states.iter().enumerate() {
            let v = h.sandwich(psi.vector(), psi.vector()).re.abs();
            if v > best.value {
                best.value = v;
                best.phi_index = i;
                best.psi_index = j;
            }
        }
    }
    best.upper = best.value / (1.0 - 2.0 * net.delta);
    Ok(best)
}

/// Rigorous bound `A <= sqrt(1 - 1/d) ||L||_{2->2}`, with `L` the natural
/// matrix of `R - Phi`. It uses `||X||_inf <= ||X||_2` and the fact that
/// `R - Phi` annihilates the identity, so only the traceless part of a pure
/// state (Frobenius norm `sqrt(1 - 1/d)`) contributes. Returns `None` above
/// [`SUPEROPERATOR_BOUND_MAX_DIM`].
pub fn superoperator_bound(channel: &KrausChannel) -> Result<Option<f64>> {
    let d = channel.dim();
    if d > SUPEROPERATOR_BOUND_MAX_DIM {
        return Ok(None);
    }
    let mut l = channel.superoperator().scale_real(-1.0);
    let inv = 1.0 / d as f64;
    for a in 0..d {
        for c in 0..d {
            l[(a * d + a, c * d + c)] += Complex64::new(inv, 0.0);
        }
    }
    let top = singular_values(&l)?.first().copied().unwrap_or(0.0);
    Ok(Some(top * math::sqrt(1.0 - inv)))
}
