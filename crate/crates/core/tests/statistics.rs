use rayon::prelude::*;

use rbb::coupling::TaggedState;
use rbb::estimators::{
    coalescence_tail, empty_fraction_tail, occupation_tail, path_coupling_tv_bound, Estimate, TailOptions,
};
use rbb::oracle::{transition_row, ExactChain};
use rbb::process::{accumulated_arrivals, maxwell_boltzmann_sample, simulate, Observables};
use rbb::rng::SiteSampler;
use rbb::{AssignmentVector, Configuration, RngStream};

fn one_step_counts(eta0: &Configuration, trials: u64, seed: u64) -> (ExactChain, Vec<u64>) {
    let chain = ExactChain::new(eta0.sites(), eta0.particles() as u32).unwrap();
    let len = chain.len();
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut acc, i| {
                let out = simulate(eta0, 1, RngStream::new(seed, i), Observables::NONE).unwrap();
                acc[chain.index_of(&out.final_state).unwrap()] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; len],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    (chain, counts)
}

#[test]
fn one_step_from_balanced_pair() {
    let eta0 = Configuration::new(vec![1, 1]).unwrap();
    let trials = 1_000_000;
    let (_, counts) = one_step_counts(&eta0, trials, 11);
    for (c, p) in counts.iter().zip([0.25, 0.5, 0.25]) {
        let e = Estimate::proportion(*c, trials, 11);
        assert!(e.contains(p), "{e:?} vs {p}");
    }
}

#[test]
fn one_step_law_matches_transition_rows() {
    let starts = [vec![3, 0, 0], vec![2, 1, 0], vec![1, 1, 1, 1], vec![4, 0, 1, 0]];
    for (k, occ) in starts.into_iter().enumerate() {
        let eta0 = Configuration::new(occ).unwrap();
        let trials = 1_000_000;
        let (chain, counts) = one_step_counts(&eta0, trials, 100 + k as u64);
        let row = transition_row(&eta0).unwrap();
        let tv: f64 = 0.5
            * (0..chain.len())
                .map(|i| (counts[i] as f64 / trials as f64 - row.get(i)).abs())
                .sum::<f64>();
        assert!(tv < 0.005, "start {eta0}: TV {tv}");
    }
}

#[test]
fn maxwell_boltzmann_two_balls_two_sites() {
    let trials = 100_000u64;
    let mut counts = [0u64; 3];
    for i in 0..trials {
        let v = maxwell_boltzmann_sample(2, 2, RngStream::new(21, i)).unwrap();
        assert_eq!(v.iter().sum::<u32>(), 2);
        counts[v[1] as usize] += 1;
    }
    for (c, p) in counts.iter().zip([0.25, 0.5, 0.25]) {
        assert!(Estimate::proportion(*c, trials, 21).contains(p));
    }
}

#[test]
fn maxwell_boltzmann_three_balls_fill_three_sites() {
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|&i| {
            let v = maxwell_boltzmann_sample(3, 3, RngStream::new(22, i)).unwrap();
            v.iter().all(|&n| n > 0)
        })
        .count() as u64;
    assert!(Estimate::proportion(hits, trials, 22).contains(2.0 / 9.0));
}

#[test]
fn accumulated_arrivals_follow_the_multinomial() {
    let sampler = SiteSampler::new(2).unwrap();
    let trials = 100_000u64;
    let mut counts = [0u64; 5];
    for i in 0..trials {
        let mut rng = RngStream::new(23, i).rng();
        let us: Vec<AssignmentVector> = (0..2).map(|_| AssignmentVector::draw(&sampler, 2, &mut rng)).collect();
        let acc = accumulated_arrivals(&us, 2).unwrap();
        assert_eq!(acc[0] + acc[1], 4);
        counts[acc[0] as usize] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        let p = [1.0, 4.0, 6.0, 4.0, 1.0][k] / 16.0;
        assert!(Estimate::proportion(*c, trials, 23).contains(p), "k={k}");
    }
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap()
}

#[test]
fn estimators_do_not_depend_on_worker_count() {
    let eta0 = Configuration::flat(16, 16).unwrap();
    let start = TaggedState::for_move(&Configuration::worst(4, 4).unwrap(), 0, 3).unwrap();
    let xi = Configuration::flat(4, 4).unwrap();
    let run = || {
        (
            occupation_tail(
                &eta0,
                5,
                &[1.0, 2.0],
                2_000,
                RngStream::new(5, 0),
                &TailOptions::default(),
            )
            .unwrap(),
            empty_fraction_tail(&eta0, 2, 0.4, 2_000, RngStream::new(5, 1)).unwrap(),
            coalescence_tail(&start, &[1, 2, 5, 9], 2_000, RngStream::new(5, 2)).unwrap(),
            path_coupling_tv_bound(&Configuration::worst(4, 4).unwrap(), &xi, 4, 200, RngStream::new(5, 3)).unwrap(),
        )
    };
    let serial = pool(1).install(run);
    let parallel = pool(4).install(run);
    assert_eq!(serial, parallel);
    assert_eq!(serial, run());
}

#[test]
fn survival_curves_are_non_increasing() {
    let start = TaggedState::new(Configuration::new(vec![2, 0, 1, 0]).unwrap(), 1, 3).unwrap();
    let grid: Vec<u64> = (1..=20).collect();
    let curve = coalescence_tail(&start, &grid, 5_000, RngStream::new(8, 0)).unwrap();
    assert!(curve.points.windows(2).all(|w| w[1].1.value <= w[0].1.value));
}
