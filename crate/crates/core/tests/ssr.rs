use std::f64::consts::LN_2;

use fermicorr::densmat::{kron, max_abs, CMat, CVec, C64};
use fermicorr::fock::local_number_operator;
use fermicorr::random::{haar_unitary, random_density, random_hermitian, seeded};
use fermicorr::ssr::{ssr_measure, ssr_measure_with, ssr_project, SectorDecomposition, SeparableBackend, SsrMeasure};
use fermicorr::twoorb::{table_vector, TableBasis};
use fermicorr::{DensityMatrix, SsrKind, TensorShape};
use proptest::prelude::*;

const KINDS: [SsrKind; 3] = [SsrKind::None, SsrKind::Parity, SsrKind::Number];

fn pure(dims: (usize, usize), amps: &[(usize, f64)]) -> DensityMatrix {
    let mut v = CVec::zeros(dims.0 * dims.1);
    for &(i, a) in amps {
        v[i] = C64::from(a);
    }
    let n = v.norm();
    DensityMatrix::from_pure(TensorShape::bipartite(dims.0, dims.1), &v.unscale(n)).unwrap()
}

/// Block-diagonal unitary on one orbital: independent rotations inside each local particle number.
fn sector_unitary(rng: &mut fermicorr::random::SeededRng) -> CMat {
    let mut u = CMat::zeros(4, 4);
    u[(0, 0)] = haar_unitary(1, rng)[(0, 0)];
    u.view_mut((1, 1), (2, 2)).copy_from(&haar_unitary(2, rng));
    u[(3, 3)] = haar_unitary(1, rng)[(0, 0)];
    u
}

#[test]
fn kind_none_is_identity_and_labels_parse() {
    let rho = random_density(TensorShape::bipartite(4, 4), 5, &mut seeded(1));
    assert_eq!(ssr_project(&rho, SsrKind::None, &[2, 2]).unwrap(), rho);
    for k in KINDS {
        assert_eq!(k.to_string().parse::<SsrKind>().unwrap(), k);
    }
    assert!("x".parse::<SsrKind>().is_err());
}

#[test]
fn two_mode_superposition_becomes_a_parity_mixture() {
    // (|0⟩_A|0⟩_B + |0⟩_A|1⟩_B)/√2.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho = pure((2, 2), &[(0, h), (1, h)]);
    let projected = ssr_project(&rho, SsrKind::Parity, &[1, 1]).unwrap();
    let expected = DensityMatrix::diagonal(TensorShape::bipartite(2, 2), &[0.5, 0.5, 0.0, 0.0]).unwrap();
    assert!(max_abs(&(projected.matrix() - expected.matrix())) < 1e-15);
}

#[test]
fn sector_pattern_of_two_orbitals() {
    let rho = random_density(TensorShape::bipartite(4, 4), 16, &mut seeded(2));
    let p = ssr_project(&rho, SsrKind::Parity, &[2, 2]).unwrap();
    let n = ssr_project(&rho, SsrKind::Number, &[2, 2]).unwrap();
    let number = [0, 1, 1, 2];
    for r in 0..16 {
        for c in 0..16 {
            let (na, nb) = (number[r / 4], number[r % 4]);
            let (ma, mb) = (number[c / 4], number[c % 4]);
            let same_parity = (na - ma) % 2 == 0 && (nb - mb) % 2 == 0;
            let same_number = na == ma && nb == mb;
            let keep = |x: bool| if x { rho.matrix()[(r, c)] } else { C64::new(0.0, 0.0) };
            assert_eq!(p.matrix()[(r, c)], keep(same_parity), "parity entry ({r}, {c})");
            assert_eq!(n.matrix()[(r, c)], keep(same_number), "number entry ({r}, {c})");
        }
    }
    // Parity keeps the |Ω,Ω⟩–|↑↓,Ω⟩ coherence; the number rule removes it.
    assert_ne!(p.matrix()[(0, 12)], C64::new(0.0, 0.0));
    assert_eq!(n.matrix()[(0, 12)], C64::new(0.0, 0.0));
}

#[test]
fn decomposition_is_complete_and_orthogonal() {
    for kind in [SsrKind::Parity, SsrKind::Number] {
        let dec = SectorDecomposition::for_modes(&[1, 2, 3], kind).unwrap();
        for f in &dec.factors {
            let d = f[0].1.nrows();
            let mut sum = CMat::zeros(d, d);
            for (i, (_, p)) in f.iter().enumerate() {
                sum += p;
                for (j, (_, q)) in f.iter().enumerate() {
                    let want = if i == j { p.clone() } else { CMat::zeros(d, d) };
                    assert!(max_abs(&(p * q - want)) < 1e-12);
                }
            }
            assert!(max_abs(&(sum - CMat::identity(d, d))) < 1e-12);
        }
    }
    let rho = random_density(TensorShape::bipartite(4, 4), 2, &mut seeded(3));
    assert!(ssr_project(&rho, SsrKind::Number, &[2, 1]).is_err());
}

#[test]
fn measure_examples() {
    let mut rng = seeded(4);
    let product =
        random_density(TensorShape::single(4), 4, &mut rng).kron(&random_density(TensorShape::single(4), 4, &mut rng));
    for kind in KINDS {
        for m in [SsrMeasure::TotalCorrelation, SsrMeasure::Entanglement, SsrMeasure::ClassicalCorrelation] {
            let v = ssr_measure_with(&product, kind, &[2, 2], m, SeparableBackend::Ppt).unwrap();
            assert!(v.abs() < 1e-7, "{kind} {m:?}: {v}");
        }
    }

    let singlet =
        DensityMatrix::from_pure(TensorShape::bipartite(4, 4), &table_vector(8, TableBasis::Number).unwrap()).unwrap();
    let none = ssr_measure(&singlet, SsrKind::None, &[2, 2], SsrMeasure::Entanglement).unwrap();
    let closed =
        ssr_measure_with(&singlet, SsrKind::Number, &[2, 2], SsrMeasure::Entanglement, SeparableBackend::ClosedForm)
            .unwrap();
    assert!((none - LN_2).abs() < 1e-12);
    assert!((closed - LN_2).abs() < 1e-12);

    // (|Ω,↑↓⟩ + |↑↓,Ω⟩)/√2: the number rule leaves a classical mixture.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pairs = pure((4, 4), &[(3, h), (12, h)]);
    assert_eq!(ssr_measure(&pairs, SsrKind::Number, &[2, 2], SsrMeasure::Entanglement).unwrap(), 0.0);
    let parity = ssr_measure(&pairs, SsrKind::Parity, &[2, 2], SsrMeasure::Entanglement).unwrap();
    assert!((parity - LN_2).abs() < 1e-12);
}

#[test]
fn pure_states_use_the_schmidt_minimizer() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = pure((2, 2), &[(0, h), (3, h)]);
    let c = ssr_measure(&bell, SsrKind::None, &[1, 1], SsrMeasure::ClassicalCorrelation).unwrap();
    assert!((c - LN_2).abs() < 1e-12);
    let i = ssr_measure(&bell, SsrKind::None, &[1, 1], SsrMeasure::TotalCorrelation).unwrap();
    assert!((i - 2.0 * LN_2).abs() < 1e-12);
}

#[test]
fn entanglement_decreases_with_stronger_rules() {
    let mut rng = seeded(5);
    for _ in 0..30 {
        let rho = random_density(TensorShape::bipartite(2, 2), 2, &mut rng);
        let [none, p, n] =
            KINDS.map(|k| ssr_measure_with(&rho, k, &[1, 1], SsrMeasure::Entanglement, SeparableBackend::Ppt).unwrap());
        assert!(n <= p + 1e-8 && p <= none + 1e-8, "{n} {p} {none}");
    }
    for _ in 0..2 {
        let rho = random_density(TensorShape::bipartite(4, 4), 16, &mut rng);
        let [none, p, n] =
            KINDS.map(|k| ssr_measure_with(&rho, k, &[2, 2], SsrMeasure::Entanglement, SeparableBackend::Ppt).unwrap());
        assert!(n <= p + 1e-7 && p <= none + 1e-7, "{n} {p} {none}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_a_trace_preserving_idempotent_positive_map(seed in any::<u64>(), k in 1usize..3) {
        let kind = KINDS[k];
        let rho = random_density(TensorShape::bipartite(4, 2), 3, &mut seeded(seed));
        let once = ssr_project(&rho, kind, &[2, 1]).unwrap();
        let twice = ssr_project(&once, kind, &[2, 1]).unwrap();
        prop_assert!(max_abs(&(once.matrix() - twice.matrix())) < 1e-15);
        prop_assert!((once.op().trace() - 1.0).abs() < 1e-12);
        prop_assert!(once.spectrum()[0] > -1e-12);
    }

    #[test]
    fn block_observables_keep_their_expectation(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random_density(TensorShape::bipartite(4, 4), 4, &mut rng);
        let projected = ssr_project(&rho, SsrKind::Number, &[2, 2]).unwrap();
        // Local observables commuting with the local particle numbers.
        let num = local_number_operator(2);
        let block = |h: CMat| {
            let mut out = CMat::zeros(4, 4);
            for q in 0..3 {
                let p = CMat::from_fn(4, 4, |r, c| if r == c && num[(r, r)].re == q as f64 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
                out += &p * &h * &p;
            }
            out
        };
        let o = kron(&block(random_hermitian(4, &mut rng)), &block(random_hermitian(4, &mut rng)));
        let a = (rho.matrix() * &o).trace();
        let b = (projected.matrix() * &o).trace();
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn projection_commutes_with_sector_unitaries(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = random_density(TensorShape::bipartite(4, 4), 3, &mut rng);
        let u = kron(&sector_unitary(&mut rng), &sector_unitary(&mut rng));
        let a = ssr_project(&rho.conjugate(&u).unwrap(), SsrKind::Number, &[2, 2]).unwrap();
        let b = ssr_project(&rho, SsrKind::Number, &[2, 2]).unwrap().conjugate(&u).unwrap();
        prop_assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-13);
    }
}
