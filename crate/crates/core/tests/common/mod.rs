#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use kp_hhg::pulse::LaserPulse;
use kp_hhg::tdse::BlochHamiltonian;

/// Kronig-Penney dispersion: the right-hand side of cos(ka) = f(E) for a
/// well of depth `u0` and width `w` in a cell of length `a`.
pub fn kp_dispersion(e: f64, a: f64, u0: f64, w: f64) -> f64 {
    let b = a - w;
    let alpha = (2.0 * (e + u0)).sqrt();
    if e > 0.0 {
        let beta = (2.0 * e).sqrt();
        (alpha * w).cos() * (beta * b).cos()
            - (alpha * alpha + beta * beta) / (2.0 * alpha * beta) * (alpha * w).sin() * (beta * b).sin()
    } else if e < 0.0 {
        let kappa = (-2.0 * e).sqrt();
        (alpha * w).cos() * (kappa * b).cosh()
            - (alpha * alpha - kappa * kappa) / (2.0 * alpha * kappa) * (alpha * w).sin() * (kappa * b).sinh()
    } else {
        (alpha * w).cos() - 0.5 * alpha * b * (alpha * w).sin()
    }
}

/// Lowest `n` energies at crystal momentum `k`, by bracketing and bisection.
pub fn kp_energies(k: f64, a: f64, u0: f64, w: f64, n: usize) -> Vec<f64> {
    let target = (k * a).cos();
    let g = |e: f64| kp_dispersion(e, a, u0, w) - target;
    let mut roots = Vec::new();
    let step = 2e-5;
    let mut lo = -u0 + 1e-12;
    let mut flo = g(lo);
    while roots.len() < n {
        let hi = lo + step;
        let fhi = g(hi);
        if flo == 0.0 {
            roots.push(lo);
        } else if flo.signum() != fhi.signum() {
            let (mut x0, mut x1, mut f0) = (lo, hi, flo);
            for _ in 0..100 {
                let m = 0.5 * (x0 + x1);
                let fm = g(m);
                if fm.signum() == f0.signum() {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        lo = hi;
        flo = fhi;
    }
    roots
}

fn eigh(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = h.clone().symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// exp(−i H dt) c for real symmetric H, through its eigendecomposition.
pub fn dense_exp_apply(h: &DMatrix<f64>, dt: f64, c: &[Complex64]) -> Vec<Complex64> {
    let (lam, v) = eigh(h);
    let n = c.len();
    let mut proj = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            proj[j] += v[(i, j)] * c[i];
        }
        proj[j] *= Complex64::new(0.0, -lam[j] * dt).exp();
    }
    (0..n)
        .map(|i| (0..n).map(|j| v[(i, j)] * proj[j]).sum())
        .collect()
}

/// Same midpoint stepping as the library propagator, with every step
/// exponentiated exactly.
pub fn dense_propagate(
    ham: &BlochHamiltonian,
    pulse: &LaserPulse,
    c0: &[Complex64],
    dt: f64,
    steps: usize,
) -> Vec<Complex64> {
    let mut c = c0.to_vec();
    for j in 0..steps {
        let a = pulse.vector_potential((j as f64 + 0.5) * dt);
        c = dense_exp_apply(&ham.matrix(a), dt, &c);
    }
    c
}

pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Prints the one-line verdict and returns whether the criterion held.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("[{}] criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
