//! Deciding whether a channel is `epsilon`-randomizing.
//!
//! A channel `Phi` on `M_d` is `epsilon`-randomizing when
//! `||Phi(rho) - Id/d||_inf <= epsilon/d` for every state `rho`. By
//! convexity it suffices to look at pure states, so the relevant quantity
//! is `A = sup_{phi,psi} |tr psi (R - Phi)(phi)|` with `R(X) = tr(X) Id/d`.
//! [`estimate_sup`] produces lower bounds on `A`; [`net_bound`] on an exact
//! net and [`superoperator_bound`] produce upper bounds.

mod estimator;
pub mod net;
pub mod state;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

pub use estimator::{
    deviation_eval, estimate_sup, net_bound, superoperator_bound, DeviationMap, EstimatorParams, NetBound,
    SupEstimate, SUPEROPERATOR_BOUND_MAX_DIM,
};
pub use net::{
    build_net, heuristic_net_size_estimate, net_size_bound, volumetric_bound, Icosphere, NetCertificate,
    NetConstruction, NetParams, NetSizePlan, PureStateNet, DEFAULT_PROBES,
};
pub use state::{trace_distance_pure, PureState};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::jacobi_eig;

/// Default covering radius of certification nets; gives `1/(1 - 2 delta) = 2`.
pub const DEFAULT_DELTA: f64 = 0.25;

/// Slack allowed between the estimator value and a rigorous upper bound.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CertMethod {
    Net,
    Estimator,
    Both,
}

impl CertMethod {
    fn uses_net(self) -> bool {
        matches!(self, Self::Net | Self::Both)
    }

    fn uses_estimator(self) -> bool {
        matches!(self, Self::Estimator | Self::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// A rigorous upper bound on `A` is at most `epsilon/d`.
    Certified,
    /// An explicit pair of states shows `A > epsilon/d`.
    Refuted,
    HeuristicPass,
    HeuristicFail,
}

impl Verdict {
    /// Whether the verdict says the channel is (believed to be) randomizing.
    pub fn is_pass(self) -> bool {
        matches!(self, Self::Certified | Self::HeuristicPass)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Certified => "certified",
            Self::Refuted => "refuted",
            Self::HeuristicPass => "heuristic_pass",
            Self::HeuristicFail => "heuristic_fail",
        }
    }
}

/// Parameters of [`certify_randomizing`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyParams {
    pub delta: f64,
    pub estimator: EstimatorParams,
    pub probes: usize,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            estimator: EstimatorParams::default(),
            probes: DEFAULT_PROBES,
        }
    }
}

/// Net part of a report.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetSummary {
    pub delta: f64,
    pub certificate: NetCertificate,
    pub size: usize,
    pub construction: NetConstruction,
    /// `B`.
    pub value: f64,
    /// `B / (1 - 2 delta)`.
    pub upper: f64,
}

/// Estimator part of a report.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorSummary {
    pub value: f64,
    pub converged: bool,
    pub best_restart: usize,
    pub total_iterations: usize,
}

/// The witness re-examined in both equivalent forms of the definition.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessCheck {
    /// `||Phi(P_phi) - Id/d||_inf`.
    pub deviation_norm: f64,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    /// `deviation_norm <= epsilon/d`.
    pub within_norm: bool,
    /// Spectrum of `Phi(P_phi)` inside `[(1 - epsilon)/d, (1 + epsilon)/d]`.
    pub within_window: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    /// `"estimator"` or `"net"`.
    pub source: String,
    pub phi: PureState,
    pub psi: PureState,
    /// `|tr psi (R - Phi)(phi)|`.
    pub value: f64,
    pub check: WitnessCheck,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificationReport {
    pub dim: usize,
    pub n: usize,
    pub epsilon: f64,
    /// `epsilon / d`.
    pub threshold: f64,
    pub method: CertMethod,
    pub params: CertifyParams,
    /// Largest lower bound on `A` found (`A-hat`).
    pub estimator_value: Option<f64>,
    pub estimator: Option<EstimatorSummary>,
    pub net: Option<NetSummary>,
    /// `sqrt(1 - 1/d) ||R - Phi||_{2->2}`, when `d` is small enough.
    pub superoperator_bound: Option<f64>,
    /// Smallest rigorous upper bound on `A`.
    pub certified_upper_bound: Option<f64>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub warnings: Vec<String>,
    /// Filled in by callers that own a seed.
    pub seed: Option<u64>,
    /// Filled in by callers that own a clock.
    pub elapsed_seconds: Option<f64>,
}

fn check_witness(channel: &KrausChannel, phi: &PureState, epsilon: f64) -> WitnessCheck {
    let d = channel.dim() as f64;
    let out = channel.apply_rank_one(phi.vector());
    let eig = jacobi_eig(&out);
    let spectrum_max = eig.eigenvalues[0];
    let spectrum_min = *eig.eigenvalues.last().expect("d >= 1");
    let deviation_norm = (spectrum_max - 1.0 / d).max(1.0 / d - spectrum_min);
    WitnessCheck {
        deviation_norm,
        spectrum_min,
        spectrum_max,
        within_norm: deviation_norm <= epsilon / d,
        within_window: spectrum_min >= (1.0 - epsilon) / d && spectrum_max <= (1.0 + epsilon) / d,
    }
}

/// Decides whether `channel` is `epsilon`-randomizing.
///
/// The channel is refuted when any evaluated pair exceeds `epsilon/d` and
/// certified when a rigorous upper bound (an exact net, or the
/// superoperator bound) is at most `epsilon/d`. Otherwise the verdict is
/// heuristic, taken from the heuristic net bound or the estimator. Nets
/// for `d >= 3` are heuristic and the report says so in `warnings`.
pub fn certify_randomizing<R: Rng + ?Sized>(
    channel: &KrausChannel,
    epsilon: f64,
    method: CertMethod,
    params: CertifyParams,
    rng: &mut R,
) -> Result<CertificationReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if !channel.is_certified() {
        return Err(Error::Precondition(
            "certification needs a channel built from validated unitaries".into(),
        ));
    }
    let d = channel.dim();
    let threshold = epsilon / d as f64;
    let mut warnings = Vec::new();

    let mut estimator = None;
    let mut best: Option<(String, PureState, PureState, f64)> = None;
    if method.uses_estimator() {
        let est = estimate_sup(channel, params.estimator, rng)?;
        if !est.converged {
            warnings.push(format!(
                "estimator did not meet conv_tol = {:e} within max_iters = {}",
                params.estimator.conv_tol, params.estimator.max_iters
            ));
        }
        estimator = Some(EstimatorSummary {
            value: est.value,
            converged: est.converged,
            best_restart: est.best_restart,
            total_iterations: est.total_iterations,
        });
        best = Some(("estimator".into(), est.phi, est.psi, est.value));
    }

    let mut net_summary = None;
    if method.uses_net() {
        if d >= 3 {
            warnings.push(format!(
                "no exact net is available for d = {d}; using a heuristic random net, so the net bound is not rigorous"
            ));
        }
        let net = match build_net(d, params.delta, NetParams { probes: params.probes }, rng) {
            Ok(net) => Some(net),
            Err(Error::ResourceLimit(msg)) => {
                warnings.push(format!("net skipped: {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
        if let Some(net) = net {
            let nb = net_bound(channel, &net)?;
            if best.as_ref().is_none_or(|b| nb.value > b.3) {
                best = Some((
                    "net".into(),
                    net.states[nb.phi_index].clone(),
                    net.states[nb.psi_index].clone(),
                    nb.value,
                ));
            }
            net_summary = Some(NetSummary {
                delta: net.delta,
                certificate: net.certificate,
                size: net.len(),
                construction: net.construction,
                value: nb.value,
                upper: nb.upper,
            });
        }
    }

    let superop = superoperator_bound(channel)?;
    let exact_net_upper = net_summary
        .as_ref()
        .filter(|n| n.certificate == NetCertificate::Exact)
        .map(|n| n.upper);
    let certified_upper_bound = match (exact_net_upper, superop) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    let lower = best.as_ref().map(|b| b.3);
    if let (Some(lo), Some(up)) = (lower, certified_upper_bound) {
        if lo > up + CONSISTENCY_TOL {
            warnings.push(format!(
                "lower bound {lo:e} exceeds rigorous upper bound {up:e}; numerical trouble"
            ));
        }
    }

    let verdict = if lower.is_some_and(|lo| lo > threshold) {
        Verdict::Refuted
    } else if certified_upper_bound.is_some_and(|up| up <= threshold) {
        Verdict::Certified
    } else {
        let heuristic_net = net_summary
            .as_ref()
            .filter(|n| n.certificate == NetCertificate::Heuristic)
            .map(|n| n.upper);
        match (heuristic_net, estimator.as_ref().map(|e| e.value)) {
            (Some(up), _) => {
                if up <= threshold {
                    Verdict::HeuristicPass
                } else {
                    Verdict::HeuristicFail
                }
            }
            (None, Some(_)) => Verdict::HeuristicPass,
            (None, None) => {
                warnings.push("no bound was decisive; treating the channel as not randomizing".into());
                Verdict::HeuristicFail
            }
        }
    };

    let witness = best.map(|(source, phi, psi, value)| {
        let check = check_witness(channel, &phi, epsilon);
        if check.within_norm != check.within_window {
            warnings.push("norm and spectral-window framings disagree on the witness".into());
        }
        Witness {
            source,
            phi,
            psi,
            value,
            check,
        }
    });

    Ok(CertificationReport {
        dim: d,
        n: channel.len(),
        epsilon,
        threshold,
        method,
        params,
        estimator_value: lower,
        estimator,
        net: net_summary,
        superoperator_bound: superop,
        certified_upper_bound,
        verdict,
        witness,
        warnings,
        seed: None,
        elapsed_seconds: None,
    })
}
