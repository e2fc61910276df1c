use proptest::prelude::*;
use qg_core::algebra::{GaussRat, MultiPoly, Scalar};
use qg_core::diffops::apply_x;
use qg_core::higgs::{build_phi, hamiltonians, hecke_transform, mat_mul, reduced_tr_phi_squared, trace, v0_tensor};
use qg_core::orthomodel::build_a;
use qg_core::phase::{poisson_bracket_raw, sample_phase_point, sample_point_y, sampler_rng, Pencil, PhasePoint};
use qg_core::sov::auxiliary_poly;

type Q = GaussRat;

fn point(n: usize, seed: u64) -> PhasePoint<Q> {
    sample_phase_point(&Pencil::standard(n).unwrap(), seed, 0).unwrap()
}

/// A constrained point on a pencil built around it: `x_1, x_2` solve
/// `x_1² + x_2² = -r` via `(x_1 + i x_2)(x_1 - i x_2) = -r`, then `μ_1`
/// solves `Σ μ x² = 0`.
fn built_point(free: &[(i64, i64)], mu_rest: &[(i64, i64)], seed: u64) -> Option<PhasePoint<Q>> {
    let mut x: Vec<Q> = vec![Q::zero(), Q::zero()];
    x.extend(free.iter().map(|&(a, b)| Q::gauss(a, b)));
    let r = x.iter().fold(Q::zero(), |acc, v| acc + &v.square());
    let (one, two, i) = (Q::one(), Q::from(2), Q::gauss(0, 1));
    x[0] = (one.clone() - &r) / &two;
    x[1] = (one + &r) / &(two * &i);
    let mut mu = vec![Q::zero()];
    mu.extend(mu_rest.iter().map(|&(a, b)| Q::from(a) / &Q::from(b)));
    let s = (1..x.len()).fold(Q::zero(), |acc, k| acc + &(mu[k].clone() * &x[k].square()));
    if x[0].is_zero() {
        return None;
    }
    mu[0] = -s / &x[0].square();
    let pen = Pencil::new(mu).ok()?;
    let y = sample_point_y(&pen, &x, &mut sampler_rng(seed, 0)).ok()?;
    PhasePoint::new(pen, x, y).ok()
}

fn any_point() -> impl Strategy<Value = PhasePoint<Q>> {
    let standard = (5usize..8, any::<u64>()).prop_map(|(n, seed)| point(n, seed));
    let built = (3usize..6)
        .prop_flat_map(|m| {
            (
                prop::collection::vec((-3i64..=3, -3i64..=3), m),
                prop::collection::vec((-20i64..=20, 1i64..=3), m + 1),
                any::<u64>(),
            )
        })
        .prop_filter_map("degenerate pencil", |(free, mu, seed)| built_point(&free, &mu, seed));
    prop_oneof![standard, built]
}

fn z_off_poles(p: &PhasePoint<Q>, k: i64) -> Q {
    let z = Q::gauss(k, 1) / &Q::from(7);
    assert!(p.pencil().index_of_pole(&z).is_none());
    z
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_is_antisymmetric(p in any_point()) {
        let n = p.len();
        for i in 0..n {
            prop_assert!(p.pair_invariant(i, i).is_zero());
            for j in 0..n {
                prop_assert_eq!(p.pair_invariant(i, j), -p.pair_invariant(j, i));
            }
        }
    }

    #[test]
    fn residues_nilpotent_and_sum_to_v0(p in any_point()) {
        let n = p.len();
        let phi = build_phi(&p);
        for i in 0..n {
            let res = phi.residue(i);
            prop_assert!(trace(&res).is_zero());
            prop_assert!(mat_mul(&res, &res).iter().flatten().all(Scalar::is_zero));
        }
        let v0: [[Q; 2]; 2] = v0_tensor();
        let sy2 = p.y().iter().fold(Q::zero(), |acc, v| acc + &v.square());
        let sum = phi.residue_sum();
        for r in 0..2 {
            for c in 0..2 {
                prop_assert_eq!(sum[r][c].clone(), sy2.clone() * &v0[r][c]);
            }
        }
    }

    #[test]
    fn hamiltonian_relations(p in any_point()) {
        let n = p.len();
        let f = hamiltonians(&p);
        for k in 0..3u32 {
            let s = f.iter().zip(p.mu()).fold(Q::zero(), |acc, (fi, m)| acc + &(fi.clone() * &m.pow(k)));
            prop_assert!(s.is_zero(), "Σ μ^{} f = {}", k, s);
        }
        let h = reduced_tr_phi_squared(&p).h;
        prop_assert!(h.degree().is_none_or(|d| d < n - 3));
        let z = Q::gauss(3, 1) / &Q::from(7);
        prop_assume!(p.pencil().index_of_pole(&z).is_none());
        let two = Q::from(2);
        prop_assert_eq!(-build_phi(&p).tr_phi_squared(&z).unwrap(), two * &h.eval(&z) / &p.pencil().eval_p_d(&z));
    }

    #[test]
    fn gauge_shift_keeps_hamiltonians(n in 5usize..8, seed in any::<u64>(), t in -20i64..20) {
        let p = point(n, seed);
        let shifted = p.gauge_shift(&Q::from(t));
        prop_assert!(shifted.residuals().iter().all(Scalar::is_zero));
        prop_assert_eq!(hamiltonians(&p), hamiltonians(&shifted));
    }

    #[test]
    fn hecke_degrees_and_c_is_p(p in any_point()) {
        let n = p.len();
        let t = hecke_transform(&p);
        prop_assert!(t.degrees_within(n - 3));
        let aux = auxiliary_poly(p.x(), p.pencil());
        prop_assert_eq!(&t.c, &aux);
        prop_assert!(aux.degree().is_none_or(|d| d <= n - 3));
        let lhs = &t.spectral_polynomial() + &(&p.pencil().p_d() * &reduced_tr_phi_squared(&p).h);
        prop_assert!(lhs.is_zero());
    }

    #[test]
    fn a_matrix_rank_two_and_kills_x(n in 5usize..8, seed in any::<u64>(), k in -30i64..30) {
        let p = point(n, seed);
        let z = z_off_poles(&p, k);
        let a = build_a(&p, &z).unwrap();
        prop_assert!(a.rank(0.0) <= 2);
        prop_assert!(a.mul_vec(p.x()).iter().all(Scalar::is_zero));
    }

    #[test]
    fn rotations_keep_homogeneous_degree(nvars in 3usize..6, i in 0usize..3, j in 0usize..3, d in 1u32..4) {
        prop_assume!(i != j);
        let f = (0..nvars).fold(MultiPoly::zero(nvars), |acc, k| {
            let mut e = vec![0; nvars];
            e[k] = d;
            e[(k + 1) % nvars] += 1;
            &acc + &MultiPoly::monomial(e, Q::from(k as i64 + 1))
        });
        let g = apply_x(i, j, &f).unwrap();
        prop_assert!(g.is_zero() || g.homogeneous_degree() == Some(d + 1));
    }

    #[test]
    fn brackets_vanish_off_shell(
        n in 5usize..8,
        raw in prop::collection::vec((-3i64..=3, -3i64..=3, -3i64..=3, -3i64..=3), 7),
    ) {
        let mu: Vec<Q> = (0..n as i64).map(Q::from).collect();
        let x: Vec<Q> = raw.iter().take(n).map(|&(a, b, _, _)| Q::gauss(a, b)).collect();
        let y: Vec<Q> = raw.iter().take(n).map(|&(_, _, c, d)| Q::gauss(c, d)).collect();
        for i in 0..n {
            for j in i + 1..n {
                prop_assert!(poisson_bracket_raw(&mu, &x, &y, i, j).is_zero());
            }
        }
    }
}
