//! Finite nets of pure states and the volumetric size planners.
//!
//! For qubits the net is the vertex set of a geodesic icosphere: the trace
//! distance of pure qubit states equals the Euclidean distance of their
//! Bloch vectors, and every point of a spherical face lies within the
//! face's chord circumradius of one of its vertices, so the largest
//! circumradius is a proven covering radius. In higher dimension no such
//! construction is available and nets are grown from random probes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::state::PureState;
use crate::error::{Error, Result};
use crate::{math, MAX_NET_SIZE};

/// Default number of random probes per growth round of a heuristic net.
pub const DEFAULT_PROBES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NetCertificate {
    /// The covering radius is proven.
    Exact,
    /// The covering radius is estimated from random probes.
    Heuristic,
}

/// How a net was produced.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetConstruction {
    pub method: String,
    /// Icosphere subdivision level (qubit nets).
    pub level: Option<usize>,
    /// Proven radius (exact) or largest probe distance seen in the final
    /// round (heuristic).
    pub achieved_radius: f64,
    /// Probes per round (heuristic nets).
    pub probes: Option<usize>,
    /// Growth rounds (heuristic nets).
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
}

/// A set of pure states claimed to be a `delta`-net in trace distance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PureStateNet {
    pub dim: usize,
    pub delta: f64,
    pub certificate: NetCertificate,
    pub construction: NetConstruction,
    pub states: Vec<PureState>,
}

impl PureStateNet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Checks the structural invariants, e.g. after loading from disk.
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if self.states.is_empty() {
            return Err(Error::InvalidInput("net has no states".into()));
        }
        if self.states.len() > MAX_NET_SIZE {
            return Err(Error::ResourceLimit(format!(
                "net has {} states; the cap is {MAX_NET_SIZE}",
                self.states.len()
            )));
        }
        if self.states.iter().any(|s| s.dim() != self.dim) {
            return Err(Error::InvalidInput("net states have mixed dimensions".into()));
        }
        if self.certificate == NetCertificate::Exact && self.dim != 2 {
            return Err(Error::InvalidInput("exact nets are only constructed for d = 2".into()));
        }
        if self.certificate == NetCertificate::Exact && self.construction.achieved_radius > self.delta {
            return Err(Error::InvalidInput("exact net radius exceeds its claimed delta".into()));
        }
        Ok(())
    }

    /// Largest trace distance from `probe` to its nearest net state.
    pub fn distance_to(&self, probe: &PureState) -> f64 {
        let best = self
            .states
            .iter()
            .map(|s| s.inner(probe).norm_sqr())
            .fold(0.0, f64::max)
            .min(1.0);
        2.0 * math::sqrt(1.0 - best)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Net construction knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetParams {
    pub probes: usize,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            probes: DEFAULT_PROBES,
        }
    }
}

/// Builds a `delta`-net of pure states on `C^d`: exact for `d = 2`,
/// heuristic otherwise.
pub fn build_net<R: Rng + ?Sized>(d: usize, delta: f64, params: NetParams, rng: &mut R) -> Result<PureStateNet> {
    check_delta(delta)?;
    match d {
        0 => Err(Error::param("d", "dimension must be positive")),
        1 => Ok(PureStateNet {
            dim: 1,
            delta,
            certificate: NetCertificate::Exact,
            construction: NetConstruction {
                method: "trivial".into(),
                level: None,
                achieved_radius: 0.0,
                probes: None,
                rounds: None,
                seed: None,
            },
            states: alloc::vec![PureState::basis(1, 0)?],
        }),
        2 => bloch_net(delta),
        _ => random_net(d, delta, params, rng),
    }
}

/// Icosphere mesh: unit vertices and triangular faces.
#[derive(Clone, Debug)]
pub struct Icosphere {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Icosphere {
    pub fn icosahedron() -> Self {
        let t = (1.0 + math::sqrt(5.0)) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let faces = alloc::vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        Self {
            vertices: raw.iter().map(|v| normalize(*v)).collect(),
            faces,
        }
    }

    /// Splits every face into four, projecting edge midpoints to the sphere.
    pub fn subdivide(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() - 1
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            faces.push([a, ab, ca]);
            faces.push([b, bc, ab]);
            faces.push([c, ca, bc]);
            faces.push([ab, bc, ca]);
        }
        Self { vertices, faces }
    }

    /// Largest chord distance from a face's spherical circumcenter to its
    /// vertices, over all faces.
    pub fn max_circumradius(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let n = cross(sub(q, p), sub(r, p));
                let mut center = normalize(n);
                if dot(center, p) < 0.0 {
                    center = [-center[0], -center[1], -center[2]];
                }
                [p, q, r].iter().map(|v| norm(sub(*v, center))).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    math::sqrt(dot(a, a))
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn bloch_net(delta: f64) -> Result<PureStateNet> {
    let mut mesh = Icosphere::icosahedron();
    let mut level = 0;
    let mut radius = mesh.max_circumradius();
    while radius > delta {
        // Each level roughly quadruples the vertex count.
        if 4 * mesh.vertices.len() > MAX_NET_SIZE {
            return Err(Error::ResourceLimit(format!(
                "a qubit net with delta = {delta} needs more than {MAX_NET_SIZE} states"
            )));
        }
        mesh = mesh.subdivide();
        level += 1;
        radius = mesh.max_circumradius();
    }
    let states = mesh
        .vertices
        .iter()
        .map(|&r| PureState::from_bloch(r))
        .collect::<Result<Vec<_>>>()?;
    Ok(PureStateNet {
        dim: 2,
        delta,
        certificate: NetCertificate::Exact,
        construction: NetConstruction {
            method: "icosphere".into(),
            level: Some(level),
            achieved_radius: radius,
            probes: None,
            rounds: None,
            seed: None,
        },
        states,
    })
}

/// Expected number of states a random net needs: the Haar measure of a
/// trace-distance ball of radius `delta` is `(delta^2/4)^(d-1)`.
pub fn heuristic_net_size_estimate(d: usize, delta: f64) -> f64 {
    let cap = math::powf(delta * delta / 4.0, (d - 1) as f64);
    1.0 / cap
}

fn random_net<R: Rng + ?Sized>(d: usize, delta: f64, params: NetParams, rng: &mut R) -> Result<PureStateNet> {
    if params.probes == 0 {
        return Err(Error::param("probes", "need at least one probe"));
    }
    let estimate = heuristic_net_size_estimate(d, delta);
    if estimate > MAX_NET_SIZE as f64 {
        return Err(Error::ResourceLimit(format!(
            "a random {delta}-net on C^{d} needs about {estimate:.3e} states; the cap is {MAX_NET_SIZE}"
        )));
    }
    // Covered iff |<x,y>|^2 >= 1 - delta^2/4.
    let min_overlap = 1.0 - delta * delta / 4.0;
    let mut states: Vec<PureState> = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut added = 0;
        let mut worst = 0.0f64;
        for _ in 0..params.probes {
            let probe = PureState::random(d, rng);
            let best = states
                .iter()
                .map(|s| s.inner(&probe).norm_sqr())
                .fold(0.0, f64::max);
            if best < min_overlap {
                states.push(probe);
                added += 1;
                if states.len() > MAX_NET_SIZE {
                    return Err(Error::ResourceLimit(format!(
                        "random net exceeded {MAX_NET_SIZE} states"
                    )));
                }
            } else {
                worst = worst.max(2.0 * math::sqrt((1.0 - best.min(1.0)).max(0.0)));
            }
        }
        if added == 0 {
            return Ok(PureStateNet {
                dim: d,
                delta,
                certificate: NetCertificate::Heuristic,
                construction: NetConstruction {
                    method: "random-probe".into(),
                    level: None,
                    achieved_radius: worst,
                    probes: Some(params.probes),
                    rounds: Some(rounds),
                    seed: None,
                },
                states,
            });
        }
    }
}

/// Planning number for a covering, kept in log space.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetSizePlan {
    pub log10_bound: f64,
    /// `10^log10_bound`; infinite when it overflows.
    pub bound: f64,
    /// Whether the bound fits under the net-size cap.
    pub feasible: bool,
}

impl NetSizePlan {
    fn from_log10(log10_bound: f64) -> Self {
        let bound = math::powf(10.0, log10_bound);
        Self {
            log10_bound,
            bound,
            feasible: bound <= MAX_NET_SIZE as f64,
        }
    }
}

/// `(5/delta)^(2d)`, the size of a `delta`-net of pure states on `C^d`.
pub fn net_size_bound(d: usize, delta: f64) -> Result<NetSizePlan> {
    check_delta(delta)?;
    if d == 0 {
        return Err(Error::param("d", "dimension must be positive"));
    }
    Ok(NetSizePlan::from_log10(2.0 * d as f64 * math::log10(5.0 / delta)))
}

/// `(1 + 2/eps)^n`, covering number of a unit ball in an `n`-dimensional
/// real normed space.
pub fn volumetric_bound(n: usize, eps: f64) -> Result<NetSizePlan> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    Ok(NetSizePlan::from_log10(n as f64 * math::log10(1.0 + 2.0 / eps)))
}
