//! Velocity-gauge propagation of the reduced Bloch wavefunction.
//!
//! At fixed crystal momentum k₀ the lattice-periodic part u(k₀, x, t) obeys
//! i∂ₜu = {[P + k₀ + A(t)]²/2 + V(x)} u. On the plane-wave basis the kinetic
//! term is diagonal and only V couples different G. Each step applies
//! exp(−i H(t + dt/2) dt) through a short Lanczos recurrence.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bands::{fold_to_bz, potential_matrix, BlochStates, PlaneWaveBasis};
use crate::error::{Error, Result};
use crate::lattice::LatticePotential;
use crate::observables::{current_derivative, velocity_current};
use crate::pulse::LaserPulse;

/// Time-dependent vector potential driving the propagation.
pub trait Drive: Sync {
    fn vector_potential(&self, t: f64) -> f64;
    fn electric_field(&self, t: f64) -> f64;
    /// End of the interval to propagate over.
    fn duration(&self) -> f64;
}

impl Drive for LaserPulse {
    fn vector_potential(&self, t: f64) -> f64 {
        LaserPulse::vector_potential(self, t)
    }
    fn electric_field(&self, t: f64) -> f64 {
        LaserPulse::electric_field(self, t)
    }
    fn duration(&self) -> f64 {
        self.t_total
    }
}

/// Plane-wave coefficients of u at crystal momentum `k0` and time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedWavefunction {
    pub k0: f64,
    pub coeffs: Vec<Complex64>,
    pub t: f64,
}

impl ReducedWavefunction {
    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &ReducedWavefunction) -> Complex64 {
        dot(&self.coeffs, &other.coeffs)
    }
}

/// Field-free eigenstate of `band` (1-based) at the momentum of `states`.
pub fn initial_state(states: &BlochStates, band: usize) -> Result<ReducedWavefunction> {
    let v = states.vector(band)?;
    Ok(ReducedWavefunction {
        k0: states.k,
        coeffs: v.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        t: 0.0,
    })
}

/// Velocity-gauge Hamiltonian at fixed k₀, with the potential couplings
/// precomputed. The field enters only through A on the diagonal.
#[derive(Debug, Clone)]
pub struct BlochHamiltonian {
    pub k0: f64,
    g: Vec<f64>,
    /// V_{G_i − G_j}, row-major.
    v: Vec<f64>,
    /// (G_i − G_j)·V_{G_i − G_j}, row-major; i times this is (∂V/∂x)_{G_i − G_j}.
    dv: Vec<f64>,
    n: usize,
}

impl BlochHamiltonian {
    pub fn new(pot: &LatticePotential, basis: &PlaneWaveBasis, k0: f64) -> Self {
        let (k0, _) = fold_to_bz(k0, pot.a);
        let g = basis.vectors(pot.a);
        let n = g.len();
        let vm = potential_matrix(pot, basis);
        let mut v = Vec::with_capacity(n * n);
        let mut dv = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(vm[(i, j)]);
                dv.push((g[i] - g[j]) * vm[(i, j)]);
            }
        }
        BlochHamiltonian { k0, g, v, dv, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// out = H(A) c: ((G + k₀ + A)²/2)·c_G + Σ_G' V_{G−G'} c_G'.
    pub fn apply_into(&self, c: &[Complex64], a: f64, out: &mut [Complex64]) {
        for i in 0..self.n {
            let p = self.g[i] + self.k0 + a;
            let row = &self.v[i * self.n..(i + 1) * self.n];
            let mut acc = c[i] * (0.5 * p * p);
            for (vij, cj) in row.iter().zip(c) {
                acc += cj * *vij;
            }
            out[i] = acc;
        }
    }

    pub fn apply(&self, c: &[Complex64], a: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply_into(c, a, &mut out);
        out
    }

    /// ⟨c|∂V/∂x|c⟩ = Re Σ c_G* · i(G−G')V_{G−G'} · c_G'.
    pub fn gradient_expectation(&self, c: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = &self.dv[i * self.n..(i + 1) * self.n];
            let mut s = Complex64::new(0.0, 0.0);
            for (d, cj) in row.iter().zip(c) {
                s += cj * *d;
            }
            // c_i* · i · s
            acc += (c[i].conj() * Complex64::new(0.0, 1.0) * s).re;
        }
        acc
    }

    /// Dense real matrix for a given A (diagnostics and tests).
    pub fn matrix(&self, a: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let p = self.g[i] + self.k0 + a;
            self.v[i * self.n + j] + if i == j { 0.5 * p * p } else { 0.0 }
        })
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Breakdown threshold on the Lanczos off-diagonal.
const BREAKDOWN: f64 = 1e-14;

/// Reusable buffers for the Krylov recurrence.
#[derive(Debug, Clone)]
pub struct LanczosWorkspace {
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
}

impl LanczosWorkspace {
    pub fn new(dim: usize, krylov: usize) -> Self {
        LanczosWorkspace {
            basis: vec![vec![Complex64::new(0.0, 0.0); dim]; krylov],
            w: vec![Complex64::new(0.0, 0.0); dim],
        }
    }
}

/// Result of one Krylov step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    /// Dimension of the Krylov space actually used.
    pub krylov_used: usize,
    pub breakdown: bool,
}

/// Advances `c` by exp(−i H(a) dt) in a Krylov space of at most `krylov` vectors.
///
/// The recurrence uses full reorthogonalisation. On breakdown the invariant
/// subspace found so far is exponentiated exactly. No renormalisation is
/// applied afterwards.
pub fn lanczos_apply(
    ham: &BlochHamiltonian,
    c: &mut [Complex64],
    a: f64,
    dt: f64,
    krylov: usize,
    ws: &mut LanczosWorkspace,
) -> StepInfo {
    let m_max = krylov.min(ham.dim()).max(1);
    if ws.basis.len() < m_max || ws.w.len() != ham.dim() {
        *ws = LanczosWorkspace::new(ham.dim(), m_max);
    }
    let beta0 = norm(c);
    if beta0 == 0.0 {
        return StepInfo {
            krylov_used: 0,
            breakdown: false,
        };
    }
    for (q, x) in ws.basis[0].iter_mut().zip(c.iter()) {
        *q = x / beta0;
    }
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    let mut m = m_max;
    let mut breakdown = false;
    for j in 0..m_max {
        let (done, rest) = ws.basis.split_at_mut(j + 1);
        let qj = &done[j];
        ham.apply_into(qj, a, &mut ws.w);
        let aj = dot(qj, &ws.w).re;
        alpha.push(aj);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in done.iter() {
                let proj = dot(q, &ws.w);
                for (wi, qi) in ws.w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        if j + 1 == m_max {
            break;
        }
        let b = norm(&ws.w);
        if b < BREAKDOWN {
            m = j + 1;
            breakdown = true;
            break;
        }
        beta.push(b);
        for (q, wi) in rest[0].iter_mut().zip(&ws.w) {
            *q = wi / b;
        }
    }

    // exp(−i T dt) e₁ through the eigendecomposition of the tridiagonal T
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for (l, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * dt) * eig.eigenvectors[(0, l)];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += phase * eig.eigenvectors[(i, l)];
        }
    }
    for x in c.iter_mut() {
        *x = Complex64::new(0.0, 0.0);
    }
    for (yi, q) in y.iter().zip(&ws.basis) {
        let s = yi * beta0;
        for (x, qi) in c.iter_mut().zip(q) {
            *x += s * qi;
        }
    }
    StepInfo {
        krylov_used: m,
        breakdown,
    }
}

/// One step t → t + dt with H frozen at the midpoint t + dt/2.
pub fn lanczos_step<D: Drive + ?Sized>(
    u: &ReducedWavefunction,
    ham: &BlochHamiltonian,
    drive: &D,
    dt: f64,
    krylov: usize,
) -> Result<(ReducedWavefunction, StepInfo)> {
    if krylov < 2 || krylov > ham.dim() {
        return Err(Error::Invalid(format!(
            "Krylov size {krylov} must lie in 2..={}",
            ham.dim()
        )));
    }
    let mut next = u.clone();
    let mut ws = LanczosWorkspace::new(ham.dim(), krylov);
    let a = drive.vector_potential(u.t + 0.5 * dt);
    let info = lanczos_apply(ham, &mut next.coeffs, a, dt, krylov, &mut ws);
    next.t = u.t + dt;
    Ok((next, info))
}

/// Numerical settings of a propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub dt: f64,
    pub krylov: usize,
    /// Abort when |‖u‖ − ‖u₀‖| exceeds this.
    pub norm_tolerance: f64,
    /// Warn when the population of the outermost plane waves exceeds this.
    pub edge_population_warning: f64,
}

impl PropagationSettings {
    pub fn new(dt: f64, krylov: usize) -> Self {
        PropagationSettings {
            dt,
            krylov,
            norm_tolerance: 1e-6,
            edge_population_warning: 1e-6,
        }
    }

    pub fn from_config(cfg: &crate::config::RunConfig) -> Self {
        Self::new(cfg.dt, cfg.krylov)
    }
}

/// Observables stored at every grid time t_j = j·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    pub k0: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    /// Ehrenfest form ⟨∂V/∂x⟩ + E(t).
    pub dj_dt: Vec<f64>,
    /// Velocity form ⟨P + k₀ + A(t)⟩.
    pub current: Vec<f64>,
    pub norm: Vec<f64>,
}

/// Outcome of a full propagation.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub final_state: ReducedWavefunction,
    pub record: PropagationRecord,
    pub breakdowns: usize,
    /// Largest population seen in the two outermost plane waves.
    pub max_edge_population: f64,
}

/// Number of uniform steps covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> usize {
    let n = duration / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

/// Propagates from t = 0 over the drive's duration, calling `observer` with
/// the state at every grid time (including t = 0).
///
/// The grid is uniform with step `dt`; when `dt` does not divide the duration
/// the last step ends past it, where the drive is zero.
pub fn propagate_with<D, F>(
    u0: &ReducedWavefunction,
    ham: &BlochHamiltonian,
    drive: &D,
    settings: PropagationSettings,
    mut observer: F,
) -> Result<Propagation>
where
    D: Drive + ?Sized,
    F: FnMut(&ReducedWavefunction),
{
    if !(settings.dt > 0.0) {
        return Err(Error::Invalid("time step must be positive".into()));
    }
    if settings.krylov < 2 || settings.krylov > ham.dim() {
        return Err(Error::Invalid(format!(
            "Krylov size {} must lie in 2..={}",
            settings.krylov,
            ham.dim()
        )));
    }
    let steps = step_count(drive.duration(), settings.dt);
    let mut u = u0.clone();
    u.t = 0.0;
    let n0 = u.norm();
    let mut ws = LanczosWorkspace::new(ham.dim(), settings.krylov);
    let mut record = PropagationRecord {
        k0: ham.k0,
        dt: settings.dt,
        times: Vec::with_capacity(steps + 1),
        dj_dt: Vec::with_capacity(steps + 1),
        current: Vec::with_capacity(steps + 1),
        norm: Vec::with_capacity(steps + 1),
    };
    let mut breakdowns = 0;
    let mut max_edge = 0.0f64;
    let mut warned = false;
    let last = ham.dim() - 1;

    for j in 0..=steps {
        let t = j as f64 * settings.dt;
        u.t = t;
        let nrm = u.norm();
        if (nrm - n0).abs() > settings.norm_tolerance {
            return Err(Error::Numerical(format!(
                "norm drift {:.3e} at t = {t:.3} a.u. (k0 = {}); dt too large",
                nrm - n0,
                ham.k0
            )));
        }
        record.times.push(t);
        record.dj_dt.push(current_derivative(&u, ham, drive, t));
        record.current.push(velocity_current(&u, ham, drive, t));
        record.norm.push(nrm);
        let edge = u.coeffs[0].norm_sqr() + u.coeffs[last].norm_sqr();
        max_edge = max_edge.max(edge);
        if edge > settings.edge_population_warning && !warned {
            log::warn!(
                "plane-wave cutoff population {edge:.2e} at t = {t:.1} a.u., k0 = {}; basis may be too small",
                ham.k0
            );
            warned = true;
        }
        observer(&u);
        if j == steps {
            break;
        }
        let a = drive.vector_potential(t + 0.5 * settings.dt);
        let info = lanczos_apply(ham, &mut u.coeffs, a, settings.dt, settings.krylov, &mut ws);
        if info.breakdown {
            breakdowns += 1;
        }
    }
    Ok(Propagation {
        final_state: u,
        record,
        breakdowns,
        max_edge_population: max_edge,
    })
}

pub fn propagate<D: Drive + ?Sized>(
    u0: &ReducedWavefunction,
    ham: &BlochHamiltonian,
    drive: &D,
    settings: PropagationSettings,
) -> Result<Propagation> {
    propagate_with(u0, ham, drive, settings, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::solve_at;
    use std::f64::consts::PI;

    const A: f64 = 8.2;

    struct Still(f64);
    impl Drive for Still {
        fn vector_potential(&self, _: f64) -> f64 {
            0.0
        }
        fn electric_field(&self, _: f64) -> f64 {
            0.0
        }
        fn duration(&self) -> f64 {
            self.0
        }
    }

    fn setup(u0: f64, k: f64) -> (BlochHamiltonian, BlochStates) {
        let pot = LatticePotential::new(A, u0, A / 2.0).unwrap();
        let basis = PlaneWaveBasis::new(21).unwrap();
        (BlochHamiltonian::new(&pot, &basis, k), solve_at(&pot, k, &basis, 21).unwrap())
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn eigenstate_is_eigenvector() {
        let (h, s) = setup(0.6, 0.0);
        let u = initial_state(&s, 2).unwrap();
        let hu = h.apply(&u.coeffs, 0.0);
        let e = s.energy(2).unwrap();
        for (x, y) in hu.iter().zip(&u.coeffs) {
            assert!((x - y * e).norm() < 1e-10);
        }
        assert!((dot(&u.coeffs, &hu).re - e).abs() < 1e-10);
        let other = initial_state(&s, 3).unwrap();
        assert!(u.overlap(&other).norm() < 1e-10);
        assert!(initial_state(&s, 0).is_err());
    }

    #[test]
    fn free_particle_is_diagonal() {
        let (h, _) = setup(0.0, 0.1);
        let mut c = vec![Complex64::new(0.0, 0.0); 21];
        c[4] = Complex64::new(1.0, 0.0);
        let out = h.apply(&c, 0.03);
        let p = h.g()[4] + 0.1 + 0.03;
        for (i, x) in out.iter().enumerate() {
            if i == 4 {
                assert!((x.re - 0.5 * p * p).abs() < 1e-15);
            } else {
                assert_eq!(x.norm(), 0.0);
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let (h, _) = setup(0.6, 0.2);
        let u = pseudo_random(21, 1);
        let v = pseudo_random(21, 2);
        let lhs = dot(&v, &h.apply(&u, 0.07));
        let rhs = dot(&h.apply(&v, 0.07), &u);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn zero_field_step_is_pure_phase() {
        let (h, s) = setup(0.6, PI / A);
        let u = initial_state(&s, 2).unwrap();
        let (next, info) = lanczos_step(&u, &h, &Still(1.0), 0.05, 10).unwrap();
        let phase = Complex64::from_polar(1.0, -s.energy(2).unwrap() * 0.05);
        for (x, y) in next.coeffs.iter().zip(&u.coeffs) {
            assert!((x - y * phase).norm() < 1e-12);
        }
        assert!(info.krylov_used >= 1);
    }

    #[test]
    fn stationary_phase_over_long_time() {
        let (h, s) = setup(0.6, 0.0);
        let u = initial_state(&s, 2).unwrap();
        let prop = propagate(&u, &h, &Still(200.0), PropagationSettings::new(0.05, 10)).unwrap();
        let phase = Complex64::from_polar(1.0, -s.energy(2).unwrap() * 200.0);
        for (x, y) in prop.final_state.coeffs.iter().zip(&u.coeffs) {
            assert!((x - y * phase).norm() < 1e-8);
        }
        assert_eq!(prop.record.times.len(), 4001);
        assert!(prop.record.dj_dt.iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn full_krylov_matches_dense_exponential() {
        let (h, _) = setup(0.6, 0.3);
        let c0 = pseudo_random(21, 7);
        let mut c = c0.clone();
        let mut ws = LanczosWorkspace::new(21, 21);
        let dt = 0.05;
        lanczos_apply(&h, &mut c, 0.1, dt, 21, &mut ws);
        let eig = SymmetricEigen::new(h.matrix(0.1));
        let mut exact = vec![Complex64::new(0.0, 0.0); 21];
        for l in 0..21 {
            let v = eig.eigenvectors.column(l);
            let proj: Complex64 = (0..21).map(|i| c0[i] * v[i]).sum();
            let coeff = proj * Complex64::from_polar(1.0, -eig.eigenvalues[l] * dt);
            for i in 0..21 {
                exact[i] += coeff * v[i];
            }
        }
        let err: f64 = c.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn krylov_bounds_checked() {
        let (h, s) = setup(0.6, 0.0);
        let u = initial_state(&s, 2).unwrap();
        assert!(lanczos_step(&u, &h, &Still(1.0), 0.05, 1).is_err());
        assert!(lanczos_step(&u, &h, &Still(1.0), 0.05, 22).is_err());
    }

    #[test]
    fn norm_monitor_aborts() {
        let (h, s) = setup(0.6, 0.0);
        let u = initial_state(&s, 2).unwrap();
        let mut settings = PropagationSettings::new(0.05, 10);
        settings.norm_tolerance = -1.0;
        let err = propagate(&u, &h, &Still(1.0), settings).unwrap_err();
        assert!(err.to_string().contains("dt too large"), "{err}");
    }

    #[test]
    fn plane_wave_breakdown_is_exact() {
        let (h, _) = setup(0.0, 0.1);
        let mut c = vec![Complex64::new(0.0, 0.0); 21];
        c[12] = Complex64::new(1.0, 0.0);
        let mut ws = LanczosWorkspace::new(21, 10);
        let info = lanczos_apply(&h, &mut c, 0.0, 0.5, 10, &mut ws);
        assert!(info.breakdown);
        assert_eq!(info.krylov_used, 1);
        let e = 0.5 * (h.g()[12] + 0.1).powi(2);
        assert!((c[12] - Complex64::from_polar(1.0, -e * 0.5)).norm() < 1e-15);
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 0.05), 20);
        assert_eq!(step_count(1.01, 0.05), 21);
    }
}
