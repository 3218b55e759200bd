mod common;

use std::f64::consts::PI;

use num_complex::Complex64;

use kp_hhg::bands::{solve_at, PlaneWaveBasis};
use kp_hhg::lattice::LatticePotential;
use kp_hhg::pulse::LaserPulse;
use kp_hhg::tdse::{initial_state, propagate, BlochHamiltonian, Drive, PropagationSettings};
use kp_hhg::units::fs_to_au;

use common::{dense_exp_apply, dense_propagate, distance, kp_dispersion, kp_energies};

const A: f64 = 8.2;

#[test]
fn dispersion_oracle_reduces_to_free_particle() {
    // U0 = 0: cos(ka) = cos(sqrt(2E) a)
    for e in [0.01, 0.2, 1.3] {
        let f = kp_dispersion(e, A, 0.0, A / 2.0);
        assert!((f - ((2.0f64 * e).sqrt() * A).cos()).abs() < 1e-12);
    }
    let k = 0.21;
    let e = kp_energies(k, A, 0.0, A / 2.0, 3);
    let g = 2.0 * PI / A;
    let mut free = vec![0.5 * k * k, 0.5 * (k - g).powi(2), 0.5 * (k + g).powi(2)];
    free.sort_by(f64::total_cmp);
    for (x, y) in e.iter().zip(&free) {
        assert!((x - y).abs() < 1e-9, "{x} {y}");
    }
}

#[test]
fn dispersion_continuous_at_zero_energy() {
    let f0 = kp_dispersion(0.0, A, 0.6, A / 2.0);
    assert!((kp_dispersion(1e-10, A, 0.6, A / 2.0) - f0).abs() < 1e-6);
    assert!((kp_dispersion(-1e-10, A, 0.6, A / 2.0) - f0).abs() < 1e-6);
}

#[test]
fn plane_waves_converge_to_transcendental_roots() {
    let pot = LatticePotential::new(A, 0.6, A / 2.0).unwrap();
    let mut previous = f64::INFINITY;
    for n in [21, 41, 81, 161] {
        let basis = PlaneWaveBasis::new(n).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=4 {
            let k = PI / A * i as f64 / 4.0;
            let exact = kp_energies(k, A, 0.6, A / 2.0, 5);
            let s = solve_at(&pot, k, &basis, 5).unwrap();
            for b in 0..5 {
                worst = worst.max((s.energies[b] - exact[b]).abs());
            }
        }
        assert!(worst < previous, "N = {n}: {worst} vs {previous}");
        previous = worst;
    }
    assert!(previous < 1e-5, "{previous}");
}

#[test]
fn variational_upper_bound() {
    // a truncated basis can only raise the eigenvalues
    let pot = LatticePotential::new(A, 0.6, A / 2.0).unwrap();
    let basis = PlaneWaveBasis::new(21).unwrap();
    for k in [0.0, 0.17, PI / A] {
        let exact = kp_energies(k, A, 0.6, A / 2.0, 5);
        let s = solve_at(&pot, k, &basis, 5).unwrap();
        for b in 0..5 {
            assert!(s.energies[b] >= exact[b] - 1e-12);
        }
    }
}

#[test]
fn lanczos_matches_dense_exponential_off_edge() {
    let pot = LatticePotential::new(A, 0.6, A / 2.0).unwrap();
    let basis = PlaneWaveBasis::new(21).unwrap();
    let k0 = 0.3 * PI / A;
    let s = solve_at(&pot, k0, &basis, 2).unwrap();
    let u0 = initial_state(&s, 2).unwrap();
    let ham = BlochHamiltonian::new(&pot, &basis, k0);
    let pulse = LaserPulse::new(0.057, 0.007, fs_to_au(2.0), 0.0).unwrap();
    let dt = 0.05;
    let p = propagate(&u0, &ham, &pulse, PropagationSettings::new(dt, 10)).unwrap();
    let steps = p.record.times.len() - 1;
    let dense = dense_propagate(&ham, &pulse, &u0.coeffs, dt, steps);
    assert!(distance(&dense, &p.final_state.coeffs) < 1e-9);
}

#[test]
fn dense_exponential_is_unitary_and_composes() {
    let pot = LatticePotential::new(A, 0.6, A / 2.0).unwrap();
    let ham = BlochHamiltonian::new(&pot, &PlaneWaveBasis::new(11).unwrap(), 0.1);
    let h = ham.matrix(0.05);
    let c: Vec<Complex64> = (0..11).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.1 * i as f64)).collect();
    let one = dense_exp_apply(&h, 0.4, &c);
    let two = dense_exp_apply(&h, 0.2, &dense_exp_apply(&h, 0.2, &c));
    assert!(distance(&one, &two) < 1e-12);
    let n0: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    let n1: f64 = one.iter().map(|x| x.norm_sqr()).sum();
    assert!((n0 - n1).abs() < 1e-12);
}

#[test]
fn field_is_minus_derivative_of_vector_potential() {
    let pulse = LaserPulse::new(0.057, 0.007, fs_to_au(12.5), 0.4).unwrap();
    let h = 1e-4;
    for i in 1..50 {
        let t = pulse.duration() * i as f64 / 50.0;
        let fd = -(pulse.vector_potential(t + h) - pulse.vector_potential(t - h)) / (2.0 * h);
        assert!((fd - pulse.electric_field(t)).abs() < 1e-9);
    }
}
