use arank_core::{run_law, survey_gap, Budget, Law, Universe};

const B: Budget = Budget(100_000_000);

#[test]
fn every_law_holds_on_its_defaults() {
    for law in Law::ALL {
        for u in law.default_universes(false, 25, 5) {
            let r = run_law(law, &u, B).unwrap();
            assert!(r.holds(), "{law} on {u}: {:?}", r.witness);
        }
    }
}

#[test]
fn every_law_holds_exhaustively() {
    for law in Law::ALL {
        for u in law.default_universes(true, 0, 0) {
            let r = run_law(law, &u, B).unwrap();
            assert!(r.holds(), "{law} on {u}: {:?}", r.witness);
            assert!(r.instances > 0, "{law} on {u} is empty");
        }
    }
}

#[test]
fn same_seed_same_result() {
    let u = Universe::Random { p: 3, n: 2, d: 3, trials: 40, seed: 77 };
    for law in [Law::Subadditivity, Law::Restriction, Law::Shift] {
        assert_eq!(run_law(law, &u, B).unwrap(), run_law(law, &u, B).unwrap());
    }
}

#[test]
fn law_ids_parse_back() {
    for law in Law::ALL {
        assert_eq!(law.id().parse::<Law>().unwrap(), law);
    }
}

#[test]
fn tiny_budget_is_refused() {
    let u = Universe::Exhaustive { p: 2, n: 2, d: 3 };
    assert!(run_law(Law::Subadditivity, &u, Budget(10)).is_err());
}

#[test]
fn survey_ratio_at_least_one() {
    let s = survey_gap(&Universe::Random { p: 2, n: 2, d: 3, trials: 30, seed: 1 }, B).unwrap();
    for row in &s.rows {
        assert!(row.ratio_low.unwrap_or(1.0) >= 1.0 - 1e-12, "{}", row.label);
    }
}
