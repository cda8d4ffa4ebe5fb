mod common;

use common::{
    pr, random_configuration, random_dissipative_model, random_explicit_decks, random_legal_run,
    rng, ModelShape,
};
use proptest::prelude::*;
use rand::Rng;
use stochsand::model::validate_model;
use stochsand::presets::{paper_triangle_asm, paper_triangle_ssm, single_grain_path};
use stochsand::rational::ratio;
use stochsand::stabilize::{
    apply_legal_sequence, default_fuel, deterministic_stabilize, is_legal_sequence, markov_step,
    random_stabilize, topple, topple_unchecked, CounterState, DeckSource, SiteSelectionPolicy,
};
use stochsand::{Configuration, Error, ModelDescription, SiteIndex};

fn shape() -> ModelShape {
    ModelShape {
        max_sites: 4,
        ..ModelShape::small()
    }
}

fn site(v: usize) -> SiteIndex {
    SiteIndex::from_zero_based(v - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unchecked_topplings_commute(seed in any::<u64>(), grains in proptest::collection::vec(1i64..6, 4)) {
        let mut r = rng(seed);
        let model = random_dissipative_model(&mut r, &shape());
        let n = model.n_sites();
        let decks = random_explicit_decks(&mut r, &model, 8);
        let counters: Vec<u64> = (0..n).map(|_| r.random_range(0..4)).collect();
        let config = Configuration::new(grains[..n].to_vec()).unwrap();
        let start = CounterState::with_counters(config, counters).unwrap();
        for v in model.sites() {
            for w in model.sites() {
                if v == w {
                    continue;
                }
                let vw = topple_unchecked(&topple_unchecked(&start, v, &decks).unwrap(), w, &decks).unwrap();
                let wv = topple_unchecked(&topple_unchecked(&start, w, &decks).unwrap(), v, &decks).unwrap();
                prop_assert_eq!(vw, wv);
            }
        }
    }
}

#[test]
fn policies_and_random_orders_agree() {
    let mut r = rng(31);
    for _ in 0..100 {
        let model = random_dissipative_model(&mut r, &shape());
        let decks = random_explicit_decks(&mut r, &model, 400);
        let start = CounterState::new(random_configuration(&mut r, &model));
        let fuel = default_fuel(&model, &start.configuration);
        let (reference, log) = deterministic_stabilize(
            &model,
            &start,
            &decks,
            &SiteSelectionPolicy::SmallestIndex,
            fuel,
        )
        .unwrap();
        assert!(model.is_stable(&reference.configuration));
        let consumed: u64 = reference.counters.iter().sum();
        assert_eq!(log.len() as u64, consumed);
        assert!(is_legal_sequence(&model, &start, &decks, &log.sites()).unwrap());
        for policy in SiteSelectionPolicy::builtin() {
            let (out, _) = deterministic_stabilize(&model, &start, &decks, &policy, fuel).unwrap();
            assert_eq!(out, reference, "{policy:?}");
        }
        for _ in 0..20 {
            let (sequence, end) = random_legal_run(&mut r, &model, &start, &decks, usize::MAX);
            assert_eq!(end, reference);
            let explicit = SiteSelectionPolicy::ExplicitSequence(sequence);
            let (out, _) =
                deterministic_stabilize(&model, &start, &decks, &explicit, fuel).unwrap();
            assert_eq!(out, reference);
        }
        for _ in 0..20 {
            let limit = r.random_range(0..=consumed as usize);
            let (_, partial) = random_legal_run(&mut r, &model, &start, &decks, limit);
            for (a, b) in partial.counters.iter().zip(&reference.counters) {
                assert!(a <= b);
            }
        }
    }
}

#[test]
fn grains_never_increase_and_stay_positive() {
    let mut r = rng(32);
    for _ in 0..100 {
        let model = random_dissipative_model(&mut r, &shape());
        let decks = random_explicit_decks(&mut r, &model, 400);
        let mut state = CounterState::new(random_configuration(&mut r, &model));
        loop {
            let unstable = model.unstable_sites(&state.configuration);
            let Some(&v) = unstable.first() else { break };
            let next = topple(&model, &state, v, &decks).unwrap();
            assert!(next.configuration.total() <= state.configuration.total());
            assert!(next.configuration.grains()[v.index()] >= 1);
            assert!(next.configuration.grains().iter().all(|&g| g >= 1));
            state = next;
        }
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let mut r = rng(33);
    for seed in 0..20u64 {
        let model = random_dissipative_model(&mut r, &shape());
        let start = CounterState::new(random_configuration(&mut r, &model));
        let fuel = default_fuel(&model, &start.configuration);
        let policy = SiteSelectionPolicy::SeededRandom(seed);
        let run = || {
            deterministic_stabilize(
                &model,
                &start,
                &DeckSource::seeded(&model, seed),
                &policy,
                fuel,
            )
            .unwrap()
        };
        let (a, log_a) = run();
        let (b, log_b) = run();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&log_a).unwrap(),
            serde_json::to_string(&log_b).unwrap()
        );
        assert_eq!(
            random_stabilize(&model, &start.configuration, seed).unwrap(),
            deterministic_stabilize(
                &model,
                &start,
                &DeckSource::seeded(&model, seed),
                &SiteSelectionPolicy::SmallestIndex,
                fuel
            )
            .unwrap()
            .0
            .configuration
        );
    }
}

#[test]
fn seeded_cards_do_not_depend_on_other_sites() {
    let model = paper_triangle_ssm(&pr(1, 4), &pr(1, 4), &pr(1, 2)).unwrap();
    let decks = DeckSource::seeded(&model, 9);
    let first: Vec<_> = (1..=50)
        .map(|i| decks.card(site(2), i).unwrap().clone())
        .collect();
    for i in 1..=50 {
        decks.card(site(1), i).unwrap();
    }
    let again: Vec<_> = (1..=50)
        .map(|i| decks.card(site(2), i).unwrap().clone())
        .collect();
    assert_eq!(first, again);
}

#[test]
fn single_grain_stabilizes_to_all_ones() {
    let model = single_grain_path(4).unwrap();
    let mut r = rng(34);
    for seed in 0..50 {
        let config = Configuration::new((0..4).map(|_| r.random_range(1..6)).collect()).unwrap();
        assert_eq!(
            random_stabilize(&model, &config, seed).unwrap().grains(),
            &[1, 1, 1, 1]
        );
    }
    let decks = DeckSource::seeded(&model, 1);
    let ones = CounterState::new(Configuration::new(vec![1; 4]).unwrap());
    for k in model.sites() {
        let out = markov_step(
            &model,
            &ones,
            k,
            &decks,
            &SiteSelectionPolicy::SmallestIndex,
            1000,
        )
        .unwrap();
        assert_eq!(out.configuration.grains(), &[1, 1, 1, 1]);
    }
}

#[test]
fn stable_input_is_returned_unchanged() {
    let model = paper_triangle_ssm(&pr(1, 4), &pr(1, 4), &pr(1, 2)).unwrap();
    for grains in [[1, 1], [1, 2], [2, 1], [2, 2]] {
        let config = Configuration::new(grains.to_vec()).unwrap();
        for seed in 0..5 {
            assert_eq!(random_stabilize(&model, &config, seed).unwrap(), config);
        }
        let start = CounterState::new(config);
        let (out, log) = deterministic_stabilize(
            &model,
            &start,
            &DeckSource::seeded(&model, 0),
            &SiteSelectionPolicy::SmallestIndex,
            10,
        )
        .unwrap();
        assert_eq!(out, start);
        assert!(log.is_empty());
    }
}

#[test]
fn asm_step_loses_grains_when_it_topples() {
    let (model, _) = paper_triangle_asm(&pr(1, 2)).unwrap();
    let max = model.maximal_configuration();
    let decks = DeckSource::seeded(&model, 0);
    for k in model.sites() {
        let raised = max.add_grain(k);
        let out = markov_step(
            &model,
            &CounterState::new(max.clone()),
            k,
            &decks,
            &SiteSelectionPolicy::SmallestIndex,
            1000,
        )
        .unwrap();
        assert!(model.is_stable(&out.configuration));
        assert!(out.counters.iter().any(|&c| c > 0));
        assert!(out.configuration.total() < raised.total());
    }
}

#[test]
fn markov_step_rejects_unstable_input() {
    let model = paper_triangle_ssm(&pr(1, 4), &pr(1, 4), &pr(1, 2)).unwrap();
    let state = CounterState::new(Configuration::new(vec![3, 1]).unwrap());
    let decks = DeckSource::seeded(&model, 0);
    assert!(markov_step(
        &model,
        &state,
        site(1),
        &decks,
        &SiteSelectionPolicy::SmallestIndex,
        10
    )
    .is_err());
}

/// The triangle cascade after a grain lands on the maximal state, written out card by card.
#[test]
fn triangle_cascade_walkthrough() {
    let model = paper_triangle_ssm(&pr(1, 4), &pr(1, 4), &pr(1, 2)).unwrap();
    let decks = DeckSource::explicit(
        &model,
        vec![
            vec![vec![-1, 1], vec![-1, 1], vec![-2, 1]],
            vec![vec![1, -1], vec![1, -2], vec![0, -1]],
        ],
    )
    .unwrap();
    let start = CounterState::new(Configuration::new(vec![3, 2]).unwrap());
    let (out, log) = deterministic_stabilize(
        &model,
        &start,
        &decks,
        &SiteSelectionPolicy::SmallestIndex,
        100,
    )
    .unwrap();
    let trace: Vec<(usize, u64)> = log.entries.iter().map(|e| (e.site.get(), e.card)).collect();
    assert_eq!(trace, vec![(1, 1), (2, 1), (1, 2), (2, 2), (1, 3)]);
    assert_eq!(out.configuration.grains(), &[1, 2]);
    assert_eq!(out.counters, vec![3, 2]);
    let mut state = start.clone();
    let expected = [[2, 3], [3, 2], [2, 3], [3, 1], [1, 2]];
    for (entry, grains) in log.entries.iter().zip(expected) {
        state = topple(&model, &state, entry.site, &decks).unwrap();
        assert_eq!(state.configuration.grains(), &grains);
    }
    for policy in SiteSelectionPolicy::builtin() {
        let (other, _) = deterministic_stabilize(&model, &start, &decks, &policy, 100).unwrap();
        assert_eq!(other, out);
    }
    for prefix in 0..=log.len() {
        let seq = &log.sites()[..prefix];
        assert!(apply_legal_sequence(&model, &start, &decks, seq)
            .unwrap()
            .is_some());
    }
    // One more card than the decks hold.
    let tight = DeckSource::explicit(&model, vec![vec![vec![-1, 1]], vec![vec![1, -1]]]).unwrap();
    assert!(matches!(
        deterministic_stabilize(
            &model,
            &start,
            &tight,
            &SiteSelectionPolicy::SmallestIndex,
            100
        ),
        Err(Error::ExplicitDeckExhausted { .. })
    ));
}

#[test]
fn exchange_model_runs_out_of_fuel() {
    let model = validate_model(&ModelDescription {
        n_sites: 2,
        topplings: vec![
            vec![(vec![-1, 1], ratio(1, 1))],
            vec![(vec![1, -1], ratio(1, 1))],
        ],
    })
    .unwrap();
    let start = CounterState::new(Configuration::new(vec![2, 2]).unwrap());
    let decks = DeckSource::seeded(&model, 0);
    assert_eq!(
        deterministic_stabilize(
            &model,
            &start,
            &decks,
            &SiteSelectionPolicy::SmallestIndex,
            1000
        ),
        Err(Error::FuelExhausted { fuel: 1000 })
    );
}

#[test]
fn explicit_sequence_must_name_unstable_sites() {
    let model = paper_triangle_ssm(&pr(1, 4), &pr(1, 4), &pr(1, 2)).unwrap();
    let decks = DeckSource::seeded(&model, 0);
    let start = CounterState::new(Configuration::new(vec![3, 1]).unwrap());
    let policy = SiteSelectionPolicy::ExplicitSequence(vec![site(2)]);
    assert_eq!(
        deterministic_stabilize(&model, &start, &decks, &policy, 100),
        Err(Error::SiteNotUnstable { site: 2 })
    );
    assert!(is_legal_sequence(&model, &start, &decks, &[]).unwrap());
    assert!(!is_legal_sequence(&model, &start, &decks, &[site(2)]).unwrap());
}
