use nalgebra::{ComplexField, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;

use kp_hhg::bands::{bloch_hamiltonian, solve_at, PlaneWaveBasis};
use kp_hhg::config::RawConfig;
use kp_hhg::floquet::{coupled_eigenvalues, coupled_hamiltonian};
use kp_hhg::lattice::LatticePotential;
use kp_hhg::{validate_config, RunConfig};

proptest! {
    #[test]
    fn config_round_trips(
        u0 in 0.0f64..2.0,
        e0 in 0.0f64..0.02,
        fwhm in 1.0f64..100.0,
        n in 3usize..20,
        k0 in -0.99f64..1.0,
    ) {
        let mut c = RunConfig::with_u0(u0);
        c.e0 = e0;
        c.fwhm_fs = fwhm;
        c.n_waves = 2 * n + 1;
        c.krylov = 3;
        c.k0_frac = k0;
        let back = validate_config(&RawConfig::parse(&c.to_toml()).unwrap()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn two_level_law(
        e2 in -1.0f64..1.0,
        e1 in -1.0f64..1.0,
        w in 0.01f64..0.2,
        vr in -0.05f64..0.05,
        vi in -0.05f64..0.05,
    ) {
        let v = Complex64::new(vr, vi);
        let (lo, hi) = coupled_eigenvalues(e2, e1, w, v);
        let d = e2 - w - e1;
        prop_assert!(hi >= lo);
        prop_assert!((hi - lo - (d * d + 4.0 * v.norm_sqr()).sqrt()).abs() < 1e-12);
        prop_assert!((hi + lo - (e2 - w + e1)).abs() < 1e-12);
        prop_assert!(hi - lo >= 2.0 * v.norm() * (1.0 - 1e-12));
        // independent Hermitian eigensolver on the same matrix
        let h: Matrix2<Complex64> = coupled_hamiltonian(e2, e1, w, v);
        prop_assert!((h - h.adjoint()).norm() < 1e-15);
        let ev = h.symmetric_eigenvalues();
        let (a, b) = (ev[0].real(), ev[1].real());
        prop_assert!((a.min(b) - lo).abs() < 1e-10);
        prop_assert!((a.max(b) - hi).abs() < 1e-10);
    }

    #[test]
    fn potential_coefficients_real_and_even(u0 in 0.0f64..2.0, frac in 0.05f64..1.0, m in -30i64..30) {
        let a = 8.2;
        let p = LatticePotential::new(a, u0, frac * a).unwrap();
        let g = p.reciprocal(m);
        let plus = p.fourier_coefficient(g).unwrap();
        let minus = p.fourier_coefficient(-g).unwrap();
        prop_assert_eq!(plus.im, 0.0);
        prop_assert!((plus - minus).norm() < 1e-15);
        let dplus = p.gradient_fourier_coefficient(g).unwrap();
        let dminus = p.gradient_fourier_coefficient(-g).unwrap();
        prop_assert!((dplus + dminus).norm() < 1e-14);
    }

    #[test]
    fn bands_symmetric_and_periodic_in_k(u0 in 0.0f64..1.5, k in -0.38f64..0.38) {
        let a = 8.2;
        let pot = LatticePotential::new(a, u0, a / 2.0).unwrap();
        let basis = PlaneWaveBasis::new(15).unwrap();
        let h = bloch_hamiltonian(&pot, k, &basis);
        prop_assert_eq!(&h, &h.transpose());
        let s = solve_at(&pot, k, &basis, 4).unwrap();
        let m = solve_at(&pot, -k, &basis, 4).unwrap();
        for (x, y) in s.energies.iter().zip(&m.energies).take(4) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
