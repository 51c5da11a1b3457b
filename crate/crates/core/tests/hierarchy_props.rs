use hisyn_core::automata::is_nonblocking;
use hisyn_core::clustering::MclParams;
use hisyn_core::fixtures;
use hisyn_core::hierarchy::{run_algorithm1, HierarchyResult};
use hisyn_core::random::random_project;
use hisyn_core::synthesis::{local_plant, nonconflicting, synth_coordinator};
use hisyn_core::verify::{controllable, monolithic_nonblocking, DEFAULT_BUDGET};
use hisyn_core::{Automaton, Error, Project};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_contract(p: &Project, r: &HierarchyResult) {
    let sups: Vec<&Automaton> = r.supervisors.iter().map(|s| &s.automaton).collect();
    let cos: Vec<&Automaton> = r.coordinators.iter().map(|s| &s.automaton).collect();
    let v = monolithic_nonblocking(&sups, &cos, DEFAULT_BUDGET).unwrap();
    assert!(v.holds, "blocking trace {:?}", v.witness);
    for s in &r.supervisors {
        assert!(is_nonblocking(&s.automaton));
        let spec = p
            .specs
            .iter()
            .find(|e| Some(e.name()) == s.enforced_spec.as_deref())
            .unwrap();
        let plant = local_plant(spec, &p.components).unwrap();
        assert!(controllable(&s.automaton, &plant).holds);
    }
    for c in &r.coordinators {
        assert!(is_nonblocking(&c.automaton));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn random_projects_satisfy_the_final_contract(seed in any::<u64>(), beta in prop::sample::select(vec![2.0, 4.0, 8.0])) {
        let p = random_project(&mut ChaCha8Rng::seed_from_u64(seed));
        match run_algorithm1(&p, &MclParams::new(beta)) {
            Ok(r) => assert_contract(&p, &r),
            Err(Error::UnresolvableConflict { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn fixtures_satisfy_the_final_contract() {
    let mut projects = vec![
        fixtures::small_factory(),
        fixtures::conflicting_project(true),
        fixtures::dining_philosophers(3),
        fixtures::dining_philosophers(5),
    ];
    projects.extend((3..=6).map(fixtures::transfer_line));
    for p in &projects {
        for beta in [2.0, 3.0, 5.0, 10.0] {
            let r = run_algorithm1(p, &MclParams::new(beta)).unwrap();
            assert_contract(p, &r);
        }
    }
}

#[test]
fn coordinators_repair_their_entities() {
    let (_, t1, t2) = fixtures::conflicting_pair();
    assert!(!nonconflicting([&t1, &t2]));
    let co = synth_coordinator(&[&t1, &t2], "CO", 1).unwrap();
    assert!(nonconflicting([&t1, &t2, &co.automaton]));

    let p = fixtures::dining_philosophers(4);
    let r = run_algorithm1(&p, &MclParams::new(2.0)).unwrap();
    let sups: Vec<&Automaton> = r.supervisors.iter().map(|s| &s.automaton).collect();
    assert!(!nonconflicting(sups.iter().copied()));
    assert!(nonconflicting(
        sups.iter().copied().chain(r.coordinators.iter().map(|c| &c.automaton))
    ));
}

#[test]
fn small_factory_shape() {
    let r = run_algorithm1(&fixtures::small_factory(), &MclParams::new(4.0)).unwrap();
    assert_eq!(
        (r.supervisors.len(), r.coordinators.len(), r.report.levels.len()),
        (1, 0, 1)
    );
    assert_eq!(r.nodes.len(), 1);
}

#[test]
fn cluster_counts_decrease_across_levels() {
    for seed in 0..200 {
        let p = random_project(&mut ChaCha8Rng::seed_from_u64(seed));
        let Ok(r) = run_algorithm1(&p, &MclParams::new(6.0)) else {
            continue;
        };
        let levels = &r.report.levels;
        for w in levels.windows(2) {
            assert!(w[1].clusters < w[0].clusters || w[0].forced_merge || w[1].forced_merge);
            assert!(w[1].entities <= w[0].clusters);
        }
        // The run ends on one cluster, or once no cluster has an interface left.
        if let Some(last) = levels.last() {
            assert!(last.clusters == 1 || last.cluster_reports.iter().all(|c| c.abstraction_states.is_none()));
        }
    }
}
