//! Independent reference computations checked against the library.

use epsrand_core::cert::{estimate_sup, superoperator_bound, EstimatorParams, PureState};
use epsrand_core::ensembles::sample_haar;
use epsrand_core::experiments::{coupon_expectation, run_coupon, Sequential};
use epsrand_core::linalg::{hermitian_eig, schatten_norm, singular_values};
use epsrand_core::rng::{stream, StreamRng};
use epsrand_core::{Complex64, ComplexMatrix, KrausChannel};
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gaussian_matrix(d: usize, rng: &mut StreamRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.matmul(b).unwrap().trace()
}

/// Characteristic polynomial coefficients `c[0..=n]` (`c[n] = 1`) by the
/// Faddeev–LeVerrier recursion.
fn char_poly(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.rows();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = m.matmul(&mk).unwrap();
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        mk = next;
        coeffs[n - k] = -trace_of_product(m, &mk) / k as f64;
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
    let scale = 1.0 + coeffs[..n].iter().map(|a| a.norm_sqr().sqrt()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm_sqr().sqrt());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    roots
}

#[test]
fn singular_values_match_characteristic_polynomial_roots() {
    let mut rng = stream(2024, 0);
    for d in 1..=5 {
        for _ in 0..10 {
            let a = gaussian_matrix(d, &mut rng);
            let ata = a.adjoint().matmul(&a).unwrap();
            let mut oracle: Vec<f64> = poly_roots(&char_poly(&ata))
                .into_iter()
                .map(|z| z.re.max(0.0).sqrt())
                .collect();
            oracle.sort_by(|x, y| y.total_cmp(x));
            let sv = singular_values(&a).unwrap();
            for (s, o) in sv.iter().zip(&oracle) {
                assert!((s - o).abs() < 1e-7, "d = {d}: {sv:?} vs {oracle:?}");
            }
        }
    }
}

/// `|A|^t` and the polar factor `W` with `A = W |A|`, from the eigenpairs
/// of `A^dagger A`.
fn polar(a: &ComplexMatrix, t: f64) -> (ComplexMatrix, ComplexMatrix) {
    let d = a.rows();
    let eig = hermitian_eig(&a.adjoint().matmul(a).unwrap()).unwrap();
    let func = |f: &dyn Fn(f64) -> f64| {
        let mut out = ComplexMatrix::zeros(d, d);
        for (l, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
            let w = f(l.max(0.0).sqrt());
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    };
    let abs_pow = func(&|s| s.powf(t));
    let w = a.matmul(&func(&|s| 1.0 / s)).unwrap();
    (abs_pow, w)
}

#[test]
fn schatten_duality_is_attained() {
    let mut rng = stream(7, 0);
    for d in [2, 3, 5] {
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let a = gaussian_matrix(d, &mut rng);
            let norm = schatten_norm(&a, p).unwrap();
            let (abs_pow, w) = polar(&a, p - 1.0);
            let b = abs_pow.matmul(&w.adjoint()).unwrap().scale_real(1.0 / norm.powf(p - 1.0));
            let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
            assert!((schatten_norm(&b, q).unwrap() - 1.0).abs() < 1e-9, "d = {d}, p = {p}");
            let pairing = trace_of_product(&a, &b);
            assert!((pairing.re - norm).abs() < 1e-9 * norm && pairing.im.abs() < 1e-9 * norm);
        }
    }
}

/// Points spread evenly over the unit sphere.
pub fn fibonacci_sphere(n: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n).map(move |i| {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        [r * phi.cos(), r * phi.sin(), z]
    })
}

/// `max ||Id/2 - Phi(P_x)||_inf` over a Bloch-sphere grid, using the
/// closed form `sqrt(h00^2 + |h01|^2)` for a traceless Hermitian 2x2.
fn bloch_grid_sup(ch: &KrausChannel, points: usize) -> f64 {
    fibonacci_sphere(points)
        .map(|r| {
            let x = PureState::from_bloch(r).unwrap();
            let out = ch.apply_rank_one(x.vector());
            let h00 = 0.5 - out[(0, 0)].re;
            (h00 * h00 + out[(0, 1)].norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn estimator_matches_bloch_grid() {
    let mut rng = stream(99, 0);
    for _ in 0..4 {
        let ch = KrausChannel::uniform((0..10).map(|_| sample_haar(2, &mut rng).unwrap()).collect()).unwrap();
        let grid = bloch_grid_sup(&ch, 200_000);
        let est = estimate_sup(&ch, EstimatorParams::default(), &mut rng).unwrap().value;
        assert!((est - grid).abs() < 1e-3, "{est} vs {grid}");
        assert!(est >= grid - 1e-12);
        assert!(superoperator_bound(&ch).unwrap().unwrap() >= grid - 1e-12);
    }
}

#[test]
fn coupon_mean_matches_harmonic_formula() {
    for d in [3, 5] {
        let trials = 20_000;
        let r = run_coupon(d, trials, 5, &Sequential).unwrap();
        let se = r.summary.standard_error;
        assert!((r.summary.mean - coupon_expectation(d)).abs() < 4.0 * se, "d = {d}");
    }
}
