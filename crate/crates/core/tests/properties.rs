use proptest::prelude::*;

use rbb::coupling::{adjacent_path, lift, monotone_step, tagged_step, MonotonePair, TaggedState};
use rbb::oracle::{transition_row, tv_exact, ExactChain, MixingStart, SparseDistribution, STATIONARY_TOL};
use rbb::process::{accumulated_arrivals, step};
use rbb::{AssignmentVector, Configuration};

fn occupancies(max_sites: usize, max_each: u32) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_sites).prop_flat_map(move |l| prop::collection::vec(0..=max_each, l))
}

fn with_assignments(occ: Vec<u32>, steps: usize) -> impl Strategy<Value = (Vec<u32>, Vec<Vec<u32>>)> {
    let l = occ.len() as u32;
    (
        Just(occ),
        prop::collection::vec(prop::collection::vec(0..l, l as usize), steps),
    )
}

fn same_shell_pair(max_sites: usize, max_particles: u32) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (1..=max_sites, 0..=max_particles).prop_flat_map(|(l, n)| (composition(l, n), composition(l, n)))
}

/// Uniform placement of `n` labelled balls: a random composition of `n`.
fn composition(l: usize, n: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..l, n as usize).prop_map(move |dest| {
        let mut occ = vec![0u32; l];
        for d in dest {
            occ[d] += 1;
        }
        occ
    })
}

fn av(dest: &[u32]) -> AssignmentVector {
    AssignmentVector::new(dest.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn step_conserves_and_matches_arrival_identity(
        (occ, us) in occupancies(64, 8).prop_flat_map(|o| with_assignments(o, 1))
    ) {
        let eta = Configuration::new(occ).unwrap();
        let (next, rec) = step(&eta, &av(&us[0])).unwrap();
        prop_assert_eq!(next.particles(), eta.particles());
        prop_assert_eq!(u64::from(rec.removed), u64::from(eta.nonempty()));
        for x in 0..eta.sites() {
            let kept = eta.get(x) - u32::from(eta.get(x) > 0);
            prop_assert_eq!(next.get(x), kept + rec.arrivals[x]);
        }
    }

    #[test]
    fn step_is_deterministic(
        (occ, us) in occupancies(16, 6).prop_flat_map(|o| with_assignments(o, 1))
    ) {
        let eta = Configuration::new(occ).unwrap();
        prop_assert_eq!(step(&eta, &av(&us[0])).unwrap(), step(&eta, &av(&us[0])).unwrap());
    }

    #[test]
    fn occupations_are_dominated_by_accumulated_arrivals(
        (occ, us) in occupancies(12, 6).prop_flat_map(|o| with_assignments(o, 24))
    ) {
        let eta0 = Configuration::new(occ).unwrap();
        let l = eta0.sites();
        let vectors: Vec<AssignmentVector> = us.iter().map(|d| av(d)).collect();
        let mut eta = eta0.clone();
        for t in 1..=vectors.len() {
            eta = step(&eta, &vectors[t - 1]).unwrap().0;
            let acc = accumulated_arrivals(&vectors[..t], l).unwrap();
            for (x, &arrived) in acc.iter().enumerate() {
                let head = i64::from(eta0.get(x)) - t as i64;
                prop_assert!(i64::from(eta.get(x)) <= head.max(0) + i64::from(arrived));
            }
        }
    }

    #[test]
    fn monotone_pairs_stay_ordered(
        (upper, lower, us) in occupancies(8, 4).prop_flat_map(|o| {
            let l = o.len();
            let bounds = o.clone();
            let below = bounds.into_iter().map(|n| 0..=n).collect::<Vec<_>>();
            (Just(o), below, prop::collection::vec(prop::collection::vec(0..l as u32, l), 30))
        })
    ) {
        let mut pair = MonotonePair::new(Configuration::new(lower).unwrap(), Configuration::new(upper).unwrap()).unwrap();
        for d in &us {
            pair = monotone_step(&pair, &av(d)).unwrap();
            prop_assert!(pair.lower().le_entrywise(pair.upper()));
        }
    }

    #[test]
    fn tagged_coupling_absorbs_and_lifts_consistently(
        (bg, x, y, us, u0s) in occupancies(6, 3).prop_flat_map(|o| {
            let l = o.len();
            (
                Just(o),
                0..l,
                0..l,
                prop::collection::vec(prop::collection::vec(0..l as u32, l), 40),
                prop::collection::vec(0..l, 40),
            )
        })
    ) {
        let mut state = TaggedState::new(Configuration::new(bg).unwrap(), x, y).unwrap();
        let n = state.background.particles() + 1;
        let mut coalesced = state.coalesced();
        for (d, &u0) in us.iter().zip(&u0s) {
            let (before_x, before_y) = lift(&state);
            let rerouted = |pos: usize| {
                let mut dest = d.clone();
                if state.background.get(pos) == 0 {
                    dest[pos] = u0 as u32;
                }
                av(&dest)
            };
            let (want_x, want_y) = (rerouted(state.x_pos), rerouted(state.y_pos));
            state = tagged_step(&state, &av(d), u0).unwrap();
            let (ex, ey) = lift(&state);
            prop_assert_eq!(ex.particles(), n);
            prop_assert_eq!(ey.particles(), n);
            // Each lifted copy is a plain step driven by the same vector, with
            // the lone tagged ball sent to u0.
            prop_assert_eq!(&ex, &step(&before_x, &want_x).unwrap().0);
            prop_assert_eq!(&ey, &step(&before_y, &want_y).unwrap().0);
            if coalesced {
                prop_assert!(state.coalesced());
                prop_assert_eq!(&ex, &ey);
            }
            coalesced |= state.coalesced();
        }
    }

    #[test]
    fn adjacent_paths_satisfy_their_invariants((a, b) in same_shell_pair(10, 30)) {
        check_path(&a, &b)?;
    }

    #[test]
    fn transition_rows_are_permutation_equivariant(
        (occ, perm) in (1usize..=4, 0u32..=5).prop_flat_map(|(l, n)| {
            (composition(l, n), Just((0..l).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let eta = Configuration::new(occ.clone()).unwrap();
        let permute = |o: &[u32]| -> Vec<u32> {
            let mut p = vec![0; o.len()];
            for (x, &v) in o.iter().enumerate() {
                p[perm[x]] = v;
            }
            p
        };
        let sigma_eta = Configuration::new(permute(&occ)).unwrap();
        let chain = ExactChain::new(occ.len(), eta.particles() as u32).unwrap();
        let row = transition_row(&eta).unwrap();
        let sigma_row = transition_row(&sigma_eta).unwrap();
        for (i, p) in row.iter() {
            let j = chain.space().index_of(&permute(chain.space().occ(i))).unwrap();
            prop_assert!((sigma_row.get(j) - p).abs() < 1e-12);
        }
        prop_assert_eq!(row.entries().len(), sigma_row.entries().len());
    }
}

fn check_path(a: &[u32], b: &[u32]) -> Result<(), TestCaseError> {
    let eta = Configuration::new(a.to_vec()).unwrap();
    let xi = Configuration::new(b.to_vec()).unwrap();
    let path = adjacent_path(&eta, &xi).unwrap();
    let chain = path.chain();
    let k: u64 = a.iter().zip(b).map(|(&p, &q)| u64::from(p.abs_diff(q))).sum::<u64>() / 2;
    prop_assert_eq!(path.len() as u64, k);
    prop_assert_eq!(chain.len(), path.len() + 1);
    prop_assert_eq!(&chain[0], &eta);
    prop_assert_eq!(chain.last().unwrap(), &xi);
    prop_assert!(path.len() as u64 <= eta.particles());
    let cap = eta.sup_norm().max(xi.sup_norm());
    prop_assert!(chain.iter().all(|z| z.sup_norm() <= cap));
    for w in chain.windows(2) {
        let diff: Vec<i64> = w[0]
            .occ()
            .iter()
            .zip(w[1].occ())
            .map(|(&p, &q)| i64::from(q) - i64::from(p))
            .collect();
        prop_assert_eq!(diff.iter().filter(|&&d| d == 1).count(), 1);
        prop_assert_eq!(diff.iter().filter(|&&d| d == -1).count(), 1);
        prop_assert_eq!(diff.iter().filter(|&&d| d != 0).count(), 2);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn adjacent_path_invariants_over_many_pairs((a, b) in same_shell_pair(8, 24)) {
        check_path(&a, &b)?;
    }
}

/// Oracle-sized instances used by the deterministic sweeps below.
fn oracle_instances() -> Vec<(usize, u32)> {
    let mut v = Vec::new();
    for l in 1..=4usize {
        for n in 0..=5u32 {
            v.push((l, n));
        }
    }
    v.extend([(5, 5), (6, 4), (3, 8)]);
    v
}

#[test]
fn every_transition_row_sums_to_one() {
    for (l, n) in oracle_instances() {
        let chain = ExactChain::new(l, n).unwrap();
        for i in 0..chain.len() {
            let row = chain.transition_row(&chain.space().state(i)).unwrap();
            assert!((row.total() - 1.0).abs() < 1e-12, "L={l} N={n} state {i}");
        }
    }
}

#[test]
fn stationary_law_is_a_fixed_point_and_symmetric() {
    for (l, n) in oracle_instances() {
        let chain = ExactChain::new(l, n).unwrap();
        let nu = chain.stationary_dense(STATIONARY_TOL).unwrap();
        let mut next = vec![0.0; nu.len()];
        chain.matrix().left_multiply(&nu, &mut next);
        let residual: f64 = nu.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        assert!(residual < 1e-10, "L={l} N={n} residual {residual}");
        for i in 0..chain.len() {
            let mut reversed = chain.space().occ(i).to_vec();
            reversed.reverse();
            let mut rotated = chain.space().occ(i).to_vec();
            rotated.rotate_left(1);
            for image in [reversed, rotated] {
                let j = chain.space().index_of(&image).unwrap();
                assert!((nu[i] - nu[j]).abs() < 1e-12, "L={l} N={n}");
            }
        }
    }
}

#[test]
fn single_site_stationary_law_is_a_point_mass() {
    let chain = ExactChain::new(1, 4).unwrap();
    assert_eq!(chain.stationary_dense(STATIONARY_TOL).unwrap(), vec![1.0]);
}

#[test]
fn distance_to_stationarity_never_increases() {
    for (l, n) in oracle_instances() {
        let chain = ExactChain::new(l, n).unwrap();
        let nu = chain.stationary_dense(STATIONARY_TOL).unwrap();
        for i in 0..chain.len() {
            let curve = chain.tv_curve(&chain.space().state(i), &nu, 30).unwrap();
            assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12), "L={l} N={n} state {i}");
        }
    }
}

#[test]
fn sparse_and_dense_distances_agree() {
    let chain = ExactChain::new(3, 4).unwrap();
    let nu = chain.stationary(STATIONARY_TOL).unwrap();
    let eta = Configuration::worst(3, 4).unwrap();
    let curve = chain.tv_curve(&eta, &nu.to_dense(chain.len()), 6).unwrap();
    for (t, &tv) in curve.iter().enumerate() {
        let p: SparseDistribution = chain.distribution_at(&eta, t as u64).unwrap();
        assert!((tv_exact(&p, &nu).unwrap() - tv).abs() < 1e-12);
    }
}

#[test]
fn worst_case_mixing_respects_the_diameter_bound() {
    for (l, n) in oracle_instances() {
        if l < 2 {
            continue;
        }
        let chain = ExactChain::new(l, n).unwrap();
        let t = chain.mixing_time_exact(0.25, &MixingStart::Worst).unwrap();
        let r = f64::from(n) / l as f64;
        assert!(t as f64 >= r * l as f64 / 2.0, "L={l} N={n} t={t}");
    }
}
