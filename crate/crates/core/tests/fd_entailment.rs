use kfam_core::fdlogic::{
    build_counterexample, chain_rule_derives, derivation_closure, derives, semantic_entails_oracle,
    OracleBounds, OracleVerdict,
};
use kfam_core::{Fd, MonoidKind, RuleSet, Variable};
use kfam_testkit::{
    chain_instance, chain_rule_brute_force, contexts_of, cycle_instance, family_satisfying, random_sigma,
    realise_randomly, vars, FamilyShape,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unary_queries(n: usize) -> Vec<Fd> {
    let xs = vars("x", n);
    let mut out = Vec::new();
    for a in &xs {
        for b in &xs {
            if a != b {
                out.push(Fd::unary(a, b));
            }
        }
    }
    out
}

#[test]
fn chain_rule_matches_direct_instantiation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut positive = 0;
    let mut beyond_premises = 0;
    for _ in 0..100 {
        let n = rng.gen_range(4..=5);
        let fds = rng.gen_range(3..=8);
        let cds = rng.gen_range(2..=6);
        let sigma = random_sigma(&mut rng, n, fds, cds, 3);
        for q in unary_queries(n) {
            let (x, y) = q.as_unary().unwrap();
            let fast = chain_rule_derives(&sigma, x, y).unwrap();
            let slow = chain_rule_brute_force(&sigma, x, y, 5);
            assert_eq!(fast, slow, "{q} from {sigma:?}");
            if fast {
                positive += 1;
                if !sigma.contains(&q) {
                    beyond_premises += 1;
                }
            }
        }
    }
    assert!(beyond_premises > 20, "{positive} positive, {beyond_premises} beyond the premises");
}

#[test]
fn derivations_agree_with_the_bounded_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut entailed = 0;
    for _ in 0..150 {
        let n = rng.gen_range(3..=5);
        let fds = rng.gen_range(1..=6);
        let cds = rng.gen_range(0..=3);
        let sigma = random_sigma(&mut rng, n, fds, cds, 2);
        for q in unary_queries(n) {
            let proved = derives(&sigma, &q, RuleSet::Cr).unwrap().derivable;
            let verdict = semantic_entails_oracle(&sigma, &q, OracleBounds::default()).unwrap();
            match verdict {
                OracleVerdict::Holds { conclusive } => {
                    assert!(conclusive);
                    assert!(proved, "{q} holds but is not derivable from {sigma:?}");
                    entailed += 1;
                }
                OracleVerdict::Counterexample(f) => {
                    assert!(!proved, "{q} is derivable from {sigma:?} yet fails in\n{f}");
                }
            }
        }
    }
    assert!(entailed > 50);
}

#[test]
fn counterexamples_exist_for_every_kind_or_none() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.gen_range(3..=5);
        let (fds, cds) = (rng.gen_range(1..=6), rng.gen_range(0..=3));
        let sigma = random_sigma(&mut rng, n, fds, cds, 2);
        for q in unary_queries(n) {
            let built: Vec<bool> = MonoidKind::ALL
                .iter()
                .map(|&kind| match build_counterexample(&sigma, &q, kind) {
                    Ok(f) => {
                        assert_eq!(f.kind(), kind);
                        assert!(f.satisfies_all(&sigma).unwrap());
                        assert!(!f.satisfies(&q).unwrap());
                        true
                    }
                    Err(_) => false,
                })
                .collect();
            assert!(built.iter().all(|&b| b == built[0]), "{q} from {sigma:?}: {built:?}");
            assert_eq!(built[0], !derives(&sigma, &q, RuleSet::Cr).unwrap().derivable);
        }
    }
}

fn assert_sound(sigma: &[Fd], phi: &Fd, seed: u64, per_kind: usize) -> usize {
    assert!(derives(sigma, phi, RuleSet::Full).unwrap().derivable, "{phi} from {sigma:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let contexts = contexts_of(sigma.iter().chain([phi]));
    let shape = FamilyShape {
        domain: 2,
        max_rows: 4,
        budget: 2_000,
    };
    let mut checked = 0;
    for kind in MonoidKind::ALL {
        let mut made = 0;
        for _ in 0..per_kind * 4 {
            if made == per_kind {
                break;
            }
            let Some(b) = family_satisfying(&mut rng, &contexts, sigma, shape) else {
                continue;
            };
            let Some(f) = realise_randomly(&mut rng, &b, kind) else {
                continue;
            };
            assert!(f.satisfies_all(sigma).unwrap());
            assert!(f.satisfies(phi).unwrap(), "{phi} fails for {sigma:?} in\n{f}");
            made += 1;
        }
        checked += made;
    }
    checked
}

#[test]
fn cycle_and_chain_rules_are_sound_on_random_families() {
    let mut checked = 0;
    for k in 2..=6 {
        let (sigma, phi) = cycle_instance(k);
        checked += assert_sound(&sigma, &phi, k as u64, 20);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in 3..=5 {
        let (sigma, phi) = chain_instance(&mut rng, n);
        checked += assert_sound(&sigma, &phi, 100 + n as u64, 20);
    }
    assert!(checked >= 300, "only {checked} families");
}

#[test]
fn closure_members_hold_in_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = FamilyShape {
        domain: 2,
        max_rows: 3,
        budget: 1_000,
    };
    let mut checked = 0;
    for _ in 0..30 {
        let sigma = random_sigma(&mut rng, 5, 6, 2, 3);
        let closure = derivation_closure(&sigma, RuleSet::Full).unwrap();
        let contexts = contexts_of(&sigma);
        for _ in 0..5 {
            let Some(f) = family_satisfying(&mut rng, &contexts, &sigma, shape) else {
                continue;
            };
            for fd in &closure {
                if f.contexts().contains(&fd.vars()) {
                    assert!(f.satisfies(fd).unwrap(), "{fd} from {sigma:?} fails in\n{f}");
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn transitivity_without_a_ternary_context_fails() {
    let sigma: Vec<Fd> = vec![
        Fd::unary("x", "y"),
        Fd::unary("y", "z"),
        "cd x y".parse().unwrap(),
        "cd y z".parse().unwrap(),
        "cd x z".parse().unwrap(),
    ];
    let closure = derivation_closure(&sigma, RuleSet::Full).unwrap();
    assert!(!closure.contains(&Fd::unary("x", "z")));
    let x = Variable::new("x");
    assert!(!chain_rule_derives(&sigma, &x, &Variable::new("z")).unwrap());
}

#[test]
fn traces_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut replayed = 0;
    for _ in 0..60 {
        let sigma = random_sigma(&mut rng, 5, 7, 4, 3);
        for q in unary_queries(5) {
            for rules in [RuleSet::Cr, RuleSet::Full] {
                let d = derives(&sigma, &q, rules).unwrap();
                if let Some(trace) = d.trace {
                    trace.replay(&sigma, &q, rules).unwrap_or_else(|e| panic!("{e}\n{trace}"));
                    replayed += 1;
                }
            }
        }
    }
    assert!(replayed > 100);
}
