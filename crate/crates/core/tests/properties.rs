//! Cross-module invariants checked on random inputs.

use isar_frand::frand::{solve, SolverConfig};
use isar_frand::io::{read_data, read_mask, write_data, write_mask};
use isar_frand::linalg::{hermitian_eig, psd_project, CMatrix, C64};
use isar_frand::model::{add_awgn, random_mask, synthesize_echo, DataMatrix, RadarParams, Scatterer, Scene};
use isar_frand::toeplitz::{build_toeplitz, toeplitz_adjoint, ToeplitzParam};
use proptest::prelude::*;

fn scatterer() -> impl Strategy<Value = Scatterer> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.1f64..2.0).prop_map(|(x, y, sigma)| Scatterer { x, y, sigma })
}

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let raw = CMatrix::from_vec(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
        raw.hermitian_part()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echo_is_superposition(a in prop::collection::vec(scatterer(), 0..4), b in prop::collection::vec(scatterer(), 0..4)) {
        let params = RadarParams::square_cells(5, 6, 10e9, 500e6).unwrap();
        let sa = Scene::new(a).unwrap();
        let sb = Scene::new(b).unwrap();
        let joint = synthesize_echo(&sa.union(&sb), &params);
        let ea = synthesize_echo(&sa, &params);
        let eb = synthesize_echo(&sb, &params);
        for ((j, x), y) in joint.as_vec().iter().zip(ea.as_vec()).zip(eb.as_vec()) {
            prop_assert!((j - (x + y)).norm() <= 1e-12);
        }
    }

    #[test]
    fn masks_and_noise_are_seed_deterministic(seed in any::<u64>(), k in 1usize..30) {
        let params = RadarParams::square_cells(5, 6, 10e9, 500e6).unwrap();
        let z = synthesize_echo(&Scene::quadcopter(), &params);
        let m1 = random_mask(30, k, seed).unwrap();
        prop_assert_eq!(&m1, &random_mask(30, k, seed).unwrap());
        prop_assert_eq!(m1.len(), k);
        let n1 = add_awgn(&z, &m1, 3.0, seed).unwrap();
        let n2 = add_awgn(&z, &m1, 3.0, seed).unwrap();
        prop_assert_eq!(n1.as_vec(), n2.as_vec());
    }

    #[test]
    fn toeplitz_round_trip(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0, -3.0f64..3.0), 1..4)) {
        let atoms: Vec<(f64, f64, f64)> = v.iter().map(|&(p, _, a, b)| (p.abs() + 0.1, a, b)).collect();
        let u = ToeplitzParam::from_atoms(3, 4, &atoms);
        let back = toeplitz_adjoint(&build_toeplitz(&u).unwrap(), 3, 4).unwrap();
        for p in u.p_range() {
            for q in u.q_range() {
                prop_assert!((back.get(p, q) - u.get(p, q)).norm() <= 1e-12);
            }
        }
        // A non-negative combination of atoms gives a PSD matrix.
        let min = hermitian_eig(&build_toeplitz(&u).unwrap()).unwrap().min_eigenvalue();
        prop_assert!(min >= -1e-10);
    }

    #[test]
    fn psd_projection_is_idempotent_and_psd(a in hermitian(6)) {
        let p = psd_project(&a).unwrap();
        prop_assert!(hermitian_eig(&p).unwrap().min_eigenvalue() >= -1e-12);
        let pp = psd_project(&p).unwrap();
        prop_assert!((&pp - &p).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn data_and_mask_files_round_trip(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 12), k in 1usize..12, seed in any::<u64>()) {
        let z = DataMatrix::from_vec(3, 4, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
        let mut buf = Vec::new();
        write_data(&z, &mut buf).unwrap();
        prop_assert_eq!(read_data(buf.as_slice()).unwrap(), z);
        let mask = random_mask(12, k, seed).unwrap();
        let mut buf = Vec::new();
        write_mask(&mask, &mut buf).unwrap();
        prop_assert_eq!(read_mask(buf.as_slice()).unwrap(), mask);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solver_output_is_finite(s in prop::collection::vec(scatterer(), 1..4), k in 6usize..20, seed in any::<u64>()) {
        let params = RadarParams::square_cells(4, 5, 10e9, 500e6).unwrap();
        let clean = synthesize_echo(&Scene::new(s).unwrap(), &params);
        let mask = random_mask(20, k, seed).unwrap();
        let z = add_awgn(&clean, &mask, 10.0, seed).unwrap();
        let res = solve(&z, &mask, &SolverConfig { lambda: 0.2, max_iters: 60, ..Default::default() }).unwrap();
        prop_assert!(res.r_hat.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        prop_assert!(res.primal_residuals.iter().all(|r| r.is_finite()));
    }
}
