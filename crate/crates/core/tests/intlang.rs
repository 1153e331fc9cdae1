use doctrina::doctrine::{exists_by_scan, Doctrine};
use doctrina::fincat::{Category, Func};
use doctrina::fixtures::LocalicDoctrine;
use doctrina::intlang::{evaluate, parse_formula, RegularFormula, Signature, Term, TypingContext};
use doctrina::lattice::FiniteHeytingAlgebra;
use doctrina::maps::{compose_relations, graph, opposite};
use doctrina::percompletion::build_per_completion;
use doctrina::report::Budget;
use doctrina::sheafify::{extend_along_bijective, sheafify_object, tabulated_relation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain() -> LocalicDoctrine {
    LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2])
}

fn signature(d: &LocalicDoctrine) -> Signature<LocalicDoctrine> {
    Signature::empty()
        .with_sort("One", 1)
        .unwrap()
        .with_sort("Two", 2)
        .unwrap()
        .with_function(d, "swap", &["Two"], "Two", Func::new(2, 2, vec![1, 0]))
        .unwrap()
        .with_function(d, "pt", &["Two"], "One", Func::new(2, 1, vec![0, 0]))
        .unwrap()
        .with_function(d, "left", &["Two", "Two"], "Two", Func::new(4, 2, vec![0, 0, 1, 1]))
        .unwrap()
        .with_function(d, "zero", &[], "Two", Func::new(1, 2, vec![0]))
        .unwrap()
        .with_relation("P", &["Two"], vec![2, 1])
        .unwrap()
        .with_relation("Q", &["Two", "Two"], vec![2, 0, 1, 2])
        .unwrap()
        .with_relation("U", &["One"], vec![1])
        .unwrap()
}

const SORTS: [&str; 2] = ["One", "Two"];

fn gen_term(rng: &mut ChaCha8Rng, env: &[(String, String)], sort: &str, depth: u32) -> Term {
    let vars: Vec<&String> = env.iter().filter(|(_, s)| s == sort).map(|(v, _)| v).collect();
    if (depth == 0 || rng.gen_bool(0.5)) && !vars.is_empty() {
        return Term::var(vars[rng.gen_range(0..vars.len())]);
    }
    match sort {
        "One" => Term::app("pt", vec![gen_term(rng, env, "Two", depth.saturating_sub(1))]),
        _ => match rng.gen_range(0..3) {
            0 => Term::app("swap", vec![gen_term(rng, env, "Two", depth.saturating_sub(1))]),
            1 => Term::app(
                "left",
                vec![
                    gen_term(rng, env, "Two", depth.saturating_sub(1)),
                    gen_term(rng, env, "Two", depth.saturating_sub(1)),
                ],
            ),
            _ => Term::app("zero", vec![]),
        },
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, env: &mut Vec<(String, String)>, depth: u32, fresh: &mut u32) -> RegularFormula {
    let pick = if depth == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..6) };
    match pick {
        0 => RegularFormula::top(),
        1 => {
            let s = SORTS[rng.gen_range(0..2)];
            RegularFormula::eq(gen_term(rng, env, s, 1), gen_term(rng, env, s, 1))
        }
        2 => RegularFormula::rel("P", vec![gen_term(rng, env, "Two", 1)]),
        3 => RegularFormula::rel("Q", vec![gen_term(rng, env, "Two", 1), gen_term(rng, env, "Two", 1)]),
        4 => RegularFormula::and(gen_formula(rng, env, depth - 1, fresh), gen_formula(rng, env, depth - 1, fresh)),
        _ => {
            *fresh += 1;
            let v = format!("b{fresh}");
            let s = SORTS[rng.gen_range(0..2)];
            env.push((v.clone(), s.into()));
            let body = gen_formula(rng, env, depth - 1, fresh);
            env.pop();
            RegularFormula::exists(&v, s, body)
        }
    }
}

fn alpha_rename(phi: &RegularFormula, k: &mut u32) -> RegularFormula {
    match phi {
        RegularFormula::And { left, right, .. } => RegularFormula::and(alpha_rename(left, k), alpha_rename(right, k)),
        RegularFormula::Exists { var, sort, body, .. } => {
            *k += 1;
            let fresh = format!("r{k}");
            RegularFormula::exists(&fresh, sort, alpha_rename(&body.rename_free(var, &fresh), k))
        }
        other => other.clone(),
    }
}

fn context_vars(seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(0..3);
    (0..n).map(|i| (format!("x{i}"), SORTS[rng.gen_range(0..2)].to_string())).collect()
}

fn as_refs(vars: &[(String, String)]) -> Vec<(&str, &str)> {
    vars.iter().map(|(v, s)| (v.as_str(), s.as_str())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn existential_is_exists_along_the_dropping_projection(seed in any::<u64>(), s in 0usize..2) {
        let d = chain();
        let sig = signature(&d);
        let mut vars = context_vars(seed);
        let outer = TypingContext::new(&d, &sig, &as_refs(&vars)).unwrap();
        vars.push(("z".into(), SORTS[s].into()));
        let inner = TypingContext::new(&d, &sig, &as_refs(&vars)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = gen_formula(&mut rng, &mut vars, 3, &mut 0);
        let (_, drop) = inner.dropping(&d, &sig, vars.len() - 1).unwrap();
        let whole = evaluate(&d, &sig, &outer, &RegularFormula::exists("z", SORTS[s], body.clone())).unwrap();
        let (oracle, least) = exists_by_scan(&d, &drop, &evaluate(&d, &sig, &inner, &body).unwrap());
        prop_assert!(least);
        prop_assert_eq!(whole, oracle);
    }

    #[test]
    fn weakening_is_reindexing(seed in any::<u64>(), s in 0usize..2) {
        let d = chain();
        let sig = signature(&d);
        let mut vars = context_vars(seed);
        let small = TypingContext::new(&d, &sig, &as_refs(&vars)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = gen_formula(&mut rng, &mut vars.clone(), 3, &mut 0);
        vars.push(("w".into(), SORTS[s].into()));
        let big = TypingContext::new(&d, &sig, &as_refs(&vars)).unwrap();
        let (_, drop) = big.dropping(&d, &sig, vars.len() - 1).unwrap();
        let v_small = evaluate(&d, &sig, &small, &phi).unwrap();
        prop_assert_eq!(evaluate(&d, &sig, &big, &phi).unwrap(), d.reindex(&drop, &v_small));
    }

    #[test]
    fn alpha_renaming_preserves_the_value(seed in any::<u64>()) {
        let d = chain();
        let sig = signature(&d);
        let mut vars = context_vars(seed);
        let ctx = TypingContext::new(&d, &sig, &as_refs(&vars)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = gen_formula(&mut rng, &mut vars, 4, &mut 0);
        let renamed = alpha_rename(&phi, &mut 0);
        prop_assert_eq!(evaluate(&d, &sig, &ctx, &phi).unwrap(), evaluate(&d, &sig, &ctx, &renamed).unwrap());
    }

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>()) {
        let d = chain();
        let sig = signature(&d);
        let mut vars = context_vars(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = gen_formula(&mut rng, &mut vars, 4, &mut 0);
        let back = parse_formula(&phi.to_string(), &sig).unwrap();
        prop_assert_eq!(back.without_spans(), phi);
    }
}

#[test]
fn xi_matches_the_composed_relation() {
    let base = LocalicDoctrine::new(FiniteHeytingAlgebra::boolpq(), "boolpq", vec![1, 2]);
    let d = build_per_completion(&base, &[1, 2], None).unwrap();
    let a = d.per(2, vec![1, 0, 0, 2]).unwrap();
    let one = d.terminal().unwrap();
    let u = sheafify_object(&d, &a, &[one], &Budget::default());
    let s = u.data().unwrap();
    // the unit is internally bijective, so it extends along itself
    let (dm, q) = (s.eta.clone(), s.eta.clone());
    let (x, y) = (d.dom(&dm), d.cod(&dm));
    let sig = Signature::empty()
        .with_sort("X", x.clone())
        .unwrap()
        .with_sort("Y", y.clone())
        .unwrap()
        .with_sort("A", s.a.clone())
        .unwrap()
        .with_sort("S", s.s.clone())
        .unwrap()
        .with_function(&d, "d", &["X"], "Y", dm.clone())
        .unwrap()
        .with_function(&d, "q", &["X"], "S", q.clone())
        .unwrap()
        .with_function(&d, "eta", &["A"], "S", s.eta.clone())
        .unwrap();
    let ctx = TypingContext::parse(&d, &sig, "y:Y, a:A").unwrap();
    let phi = parse_formula("E x:X. d(x) = y & q(x) = eta(a)", &sig).unwrap();
    let via_language = evaluate(&d, &sig, &ctx, &phi).unwrap();
    let d_op = opposite(&d, &x, &y, &graph(&d, &dm).unwrap()).unwrap();
    let direct = compose_relations(&d, &y, &x, &s.a, &d_op, &tabulated_relation(&d, s, &q).unwrap()).unwrap();
    assert_eq!(via_language, direct);
    let h = extend_along_bijective(&d, s, &dm, &q).unwrap();
    assert_eq!(tabulated_relation(&d, s, &h).unwrap(), via_language);
}

#[test]
fn signature_of_a_table_doctrine_names_its_morphisms() {
    use doctrina::fixtures::{materialize, MaterializeOptions};
    let t = materialize(&chain(), &[1, 2], MaterializeOptions::default()).unwrap();
    let sig = Signature::of(&t);
    assert!(sig.sorts().count() >= 2);
    let names: Vec<String> = t.universe().iter().map(|a| t.render_obj(a)).collect();
    let ctx = TypingContext::parse(&t, &sig, &format!("u:{0}, v:{0}", names[0])).unwrap();
    let v = evaluate(&t, &sig, &ctx, &parse_formula("u = v", &sig).unwrap()).unwrap();
    assert_eq!(v, doctrina::doctrine::equality_predicate(&t, &t.universe()[0]).unwrap());
}
