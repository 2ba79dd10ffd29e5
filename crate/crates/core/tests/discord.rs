use std::f64::consts::LN_2;

use fermicorr::densmat::{max_abs, relative_entropy, CMat, CVec, C64};
use fermicorr::discord::{
    classical_correlation_discord, classical_state, discord_direct, discord_mcmc, discord_werner_closed_form,
    singlet_werner_state, LocalBases, McmcOptions,
};
use fermicorr::random::{haar_unitary, random_density, seeded};
use fermicorr::sep_opt::e_ppt;
use fermicorr::{DensityMatrix, TensorShape};
use proptest::prelude::*;

fn bell() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVec::from_vec(vec![C64::from(h), C64::from(0.0), C64::from(0.0), C64::from(h)]);
    DensityMatrix::from_pure(TensorShape::bipartite(2, 2), &psi).unwrap()
}

#[test]
fn classical_states_are_fixed_points() {
    let mut rng = seeded(1);
    let bases = LocalBases::new(haar_unitary(2, &mut rng), haar_unitary(3, &mut rng)).unwrap();
    let rho = random_density(TensorShape::bipartite(2, 3), 4, &mut rng);
    let cl = classical_state(&rho, &bases).unwrap();
    let again = classical_state(&cl, &bases).unwrap();
    assert!(max_abs(&(cl.matrix() - again.matrix())) < 1e-14);

    let dephased = classical_state(&bell(), &LocalBases::computational(2, 2)).unwrap();
    let expected = DensityMatrix::diagonal(TensorShape::bipartite(2, 2), &[0.5, 0.0, 0.0, 0.5]).unwrap();
    assert!(max_abs(&(dephased.matrix() - expected.matrix())) < 1e-15);
    assert!(LocalBases::new(CMat::identity(2, 2).scale(2.0), CMat::identity(2, 2)).is_err());
    assert!(classical_state(&rho, &LocalBases::computational(2, 2)).is_err());
}

#[test]
fn direct_sampling_is_deterministic_and_monotone() {
    let rho = random_density(TensorShape::bipartite(2, 2), 2, &mut seeded(2));
    let a = discord_direct(&rho, 50, 7).unwrap();
    let b = discord_direct(&rho, 50, 7).unwrap();
    assert_eq!(a.discord, b.discord);
    // The first 50 samples of a 200-sample run are the same draws.
    let more = discord_direct(&rho, 200, 7).unwrap();
    assert!(more.discord <= a.discord);
    let attained = relative_entropy(&rho, &a.closest_classical).unwrap();
    assert!((attained - a.discord).abs() < 1e-10);
    assert!(discord_direct(&rho, 0, 7).is_err());
}

#[test]
fn werner_closed_form_endpoints() {
    assert_eq!(discord_werner_closed_form(0.0).unwrap(), 0.0);
    assert!((discord_werner_closed_form(1.0).unwrap() - LN_2).abs() < 1e-15);
    assert!(discord_werner_closed_form(1.5).is_err());
    let r =
        discord_mcmc(&singlet_werner_state(0.0).unwrap(), &McmcOptions { steps: 10, ..Default::default() }).unwrap();
    assert!(r.discord < 1e-12);
}

#[test]
fn bell_discord_and_classical_part() {
    let opts = McmcOptions { steps: 1500, restarts: 3, ..Default::default() };
    let r = discord_mcmc(&bell(), &opts).unwrap();
    assert!((r.discord - LN_2).abs() < 1e-4, "{}", r.discord);
    let c = classical_correlation_discord(&r).unwrap();
    assert!((c - LN_2).abs() < 1e-4, "{c}");
    assert!(discord_mcmc(&bell(), &McmcOptions { steps: 0, ..opts }).is_err());
}

#[test]
fn discord_dominates_entanglement() {
    let rho = random_density(TensorShape::bipartite(3, 3), 3, &mut seeded(3));
    let d = discord_mcmc(&rho, &McmcOptions { steps: 1500, restarts: 2, ..Default::default() }).unwrap();
    let e = e_ppt(&rho).unwrap();
    assert!(d.discord >= e.value - 1e-8, "{} {}", d.discord, e.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_discord_bounds_the_true_value(seed in any::<u64>()) {
        // Any basis pair gives an upper bound; the closed form is the minimum.
        let c = (seed % 1000) as f64 / 1000.0;
        let rho = singlet_werner_state(c).unwrap();
        let r = discord_direct(&rho, 20, seed).unwrap();
        prop_assert!(r.discord >= discord_werner_closed_form(c).unwrap() - 1e-12);
    }
}
