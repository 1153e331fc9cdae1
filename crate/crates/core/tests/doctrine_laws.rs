use doctrina::doctrine::{
    check_equality_laws, check_existential_laws, check_first_order, validate_doctrine, TableDoctrine,
};
use doctrina::fincat::{validate_category, Category};
use doctrina::fixtures::{materialize, LocalicDoctrine, MaterializeOptions};
use doctrina::lattice::FiniteHeytingAlgebra;
use doctrina::report::Budget;

fn finset_sub_table() -> TableDoctrine {
    let d = LocalicDoctrine::finset_sub(vec![0, 1, 2, 4]);
    materialize(&d, &[0, 1, 2, 4], MaterializeOptions::default()).unwrap()
}

fn localic_table() -> TableDoctrine {
    let d = LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2, 3, 4]);
    materialize(&d, &[1, 2, 3, 4], MaterializeOptions::default()).unwrap()
}

fn full_suite(t: &TableDoctrine) {
    let b = Budget::default();
    let objs = t.universe();
    assert!(validate_category(t.category()).is_ok());
    let r = validate_doctrine(t, &objs, &b);
    assert!(r.is_ok(), "{r}");
    let r = check_existential_laws(t, &objs, &b);
    assert!(r.is_ok(), "{r}");
    for a in &objs {
        let r = check_equality_laws(t, a, &objs, &objs, &b);
        assert!(r.is_ok(), "{r}");
    }
    let r = t.check_declared_exists();
    assert!(r.is_ok(), "{r}");
}

#[test]
fn finset_sub_passes_every_law() {
    full_suite(&finset_sub_table());
}

#[test]
fn localic_chain_passes_every_law() {
    let t = localic_table();
    full_suite(&t);
    let r = check_first_order(&t, &t.universe(), &Budget::default());
    assert!(r.is_ok(), "{r}");
}
