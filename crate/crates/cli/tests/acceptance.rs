use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use doctrina::doctrine::{check_equality_laws, check_existential_laws, validate_doctrine, Doctrine};
use doctrina::fincat::{inverse, is_epi, is_mono, Category};
use doctrina::fixtures::{
    closed_subobject_doctrine, dense_orthogonal_objects, ArrowObj, ArrowPresheaf, ClosureOperator, LocalicDoctrine,
};
use doctrina::format::DoctrineFile;
use doctrina::lattice::FiniteHeytingAlgebra;
use doctrina::maps::{
    bijective_morphisms, check_functional, graph, internal_bijectivity, is_complete, is_relation_iso, is_sheaf,
};
use doctrina::percompletion::{build_per_completion, check_topos_correspondence, Per, PerDoctrine};
use doctrina::report::{Budget, Coverage, ValidationReport};
use doctrina::sheafify::{
    check_equivalences, extend_along_bijective, reflector, sheafify_object, tabulate_functional, tabulated_relation,
};
use tempfile::TempDir;

type Verdict = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clean(r: &ValidationReport) -> Result<u64, String> {
    ensure(r.is_ok(), || r.to_string())?;
    ensure(r.coverage == Coverage::Exhaustive, || format!("{}: coverage {:?}", r.subject, r.coverage))?;
    Ok(r.checked)
}

fn finset() -> LocalicDoctrine {
    LocalicDoctrine::finset_sub(vec![0, 1, 2, 4])
}

fn per_over(algebra: FiniteHeytingAlgebra, name: &str) -> PerDoctrine {
    build_per_completion(&LocalicDoctrine::new(algebra, name, vec![1, 2]), &[1, 2], None).expect("per completion")
}

fn boolpq() -> PerDoctrine {
    per_over(FiniteHeytingAlgebra::boolpq(), "boolpq")
}

fn split_pair(d: &PerDoctrine) -> Per {
    d.per(2, vec![1, 0, 0, 2]).expect("diag(p, q) is a per")
}

fn law_suite<D: Doctrine>(name: &str, d: &D, limit: Duration) -> Verdict {
    let start = Instant::now();
    let objs = d.universe();
    let b = Budget::with_max(1 << 26);
    let mut n = clean(&validate_doctrine(d, &objs, &b))?;
    n += clean(&check_existential_laws(d, &objs, &b))?;
    for a in &objs {
        n += clean(&check_equality_laws(d, a, &objs, &objs, &b))?;
    }
    let t = start.elapsed();
    ensure(t < limit, || format!("{} took {:.1} s", name, t.as_secs_f64()))?;
    Ok(format!("{}: {n} instances in {:.1} s", name, t.as_secs_f64()))
}

fn criterion_1() -> Verdict {
    let a = law_suite("finset-sub", &finset(), Duration::from_secs(60))?;
    let chain = LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2, 4]);
    let b = law_suite("chain3", &chain, Duration::from_secs(60))?;
    Ok(format!("{a}; {b}"))
}

fn criterion_2() -> Verdict {
    let d = finset();
    let objs = d.universe();
    let mut n = 0;
    for a in &objs {
        for b in &objs {
            for f in d.hom(a, b) {
                let v = internal_bijectivity(&d, &f).map_err(|e| e.to_string())?;
                let injective = {
                    let mut seen = f.map.clone();
                    seen.sort_unstable();
                    seen.windows(2).all(|w| w[0] != w[1])
                };
                let surjective = (0..f.cod).all(|y| f.map.contains(&y));
                ensure(v.injective == injective && v.injective == is_mono(&d, &f), || format!("injectivity of {f:?}"))?;
                ensure(v.surjective == surjective && v.surjective == is_epi(&d, &f), || {
                    format!("surjectivity of {f:?}")
                })?;
                ensure(v.bijective() == inverse(&d, &f).is_some(), || format!("bijectivity of {f:?}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} morphisms"))
}

fn singleton_lemmas<D: Doctrine>(d: &D, objs: &[D::Obj], probes: &[D::Obj]) -> Result<usize, String> {
    for a in objs {
        let u = sheafify_object(d, a, probes, &Budget::default());
        let name = d.render_obj(a);
        ensure(u.singletons.passed(), || format!("singletons for {name}: {}", u.singletons.report))?;
        ensure(u.eta_bijective, || format!("unit of {name} not internally bijective"))?;
        ensure(u.membership_identity, || format!("membership identity fails for {name}"))?;
        ensure(u.passed(), || u.report.to_string())?;
    }
    Ok(objs.len())
}

fn criterion_3() -> Verdict {
    let d = finset();
    let objs = d.universe();
    let a = singleton_lemmas(&d, &objs, &objs)?;
    let p = boolpq();
    let probes = p.universe();
    ensure(probes.len() >= 10, || format!("only {} probes", probes.len()))?;
    let one: Vec<Per> = p.terminal().into_iter().collect();
    let b = singleton_lemmas(&p, &probes, &one)?;
    Ok(format!("{a} finite sets, {b} per objects"))
}

fn tabulations<D: Doctrine>(d: &D, objs: &[D::Obj], scope: &[D::Obj]) -> Result<(usize, usize), String> {
    let b = Budget::default();
    let (mut relations, mut graphs) = (0, 0);
    for a in objs {
        let u = sheafify_object(d, a, &[], &b);
        let s = u.data().ok_or_else(|| format!("no singletons for {}", d.render_obj(a)))?;
        for y in scope {
            let ya = d.product(y, a).ok_or("missing product")?.object;
            for f in d.fiber(&ya) {
                if !check_functional(d, y, a, &f).map_err(|e| e.to_string())?.holds() {
                    continue;
                }
                let h = tabulate_functional(d, s, y, &f).map_err(|e| e.to_string())?;
                ensure(tabulated_relation(d, s, &h).ok() == Some(f.clone()), || "identity fails".into())?;
                let n = d.hom(y, &s.s).iter().filter(|k| tabulated_relation(d, s, k).ok() == Some(f.clone())).count();
                ensure(n == 1, || format!("{n} tabulations of {}", d.render_elem(&ya, &f)))?;
                relations += 1;
            }
            for f in d.hom(y, a) {
                let g = graph(d, &f).map_err(|e| e.to_string())?;
                let h = tabulate_functional(d, s, y, &g).map_err(|e| e.to_string())?;
                ensure(h == d.compose(&s.eta, &f), || format!("graph of {} tabulates elsewhere", d.render_mor(&f)))?;
                graphs += 1;
            }
        }
    }
    Ok((relations, graphs))
}

fn criterion_4() -> Verdict {
    let d = finset();
    let objs = d.universe();
    let (r1, g1) = tabulations(&d, &objs, &objs)?;
    let p = boolpq();
    let objs = p.universe();
    let (r2, g2) = tabulations(&p, &objs, &objs)?;
    Ok(format!("{} functional relations, {} graphs", r1 + r2, g1 + g2))
}

fn criterion_5() -> Verdict {
    let d = boolpq();
    let b = Budget::default();
    let probes = d.universe();
    let one: Vec<Per> = d.terminal().into_iter().collect();
    let mut cov = Coverage::Exhaustive;
    let mut spans = bijective_morphisms(&d, &probes, &b, &mut cov);
    let mut data = Vec::new();
    for a in &probes {
        let u = sheafify_object(&d, a, &one, &b);
        let s = u.data().ok_or("no singletons")?.clone();
        spans.push(s.eta.clone());
        data.push(s);
    }
    let mut scope = probes.clone();
    for s in &data {
        if !scope.contains(&s.s) {
            scope.push(s.s.clone());
        }
    }
    let mut extensions = 0;
    for s in &data {
        for dm in &spans {
            let (x, y) = (d.dom(dm), d.cod(dm));
            for q in d.hom(&x, &s.s) {
                let h = extend_along_bijective(&d, s, dm, &q).map_err(|e| e.to_string())?;
                let n = d.hom(&y, &s.s).iter().filter(|k| d.compose(k, dm) == q).count();
                ensure(n == 1 && d.compose(&h, dm) == q, || format!("{n} extensions of {}", d.render_mor(&q)))?;
                extensions += 1;
            }
        }
        let v = is_sheaf(&d, &s.s, &scope, &b);
        ensure(v.is_sheaf(), || v.report.to_string())?;
    }
    let refl = reflector(&d, &probes, &probes, &b);
    clean(&refl.report)?;
    let total: usize = probes.iter().flat_map(|a| probes.iter().map(|c| d.hom(a, c).len())).sum();
    ensure(refl.morphisms.len() == total, || "reflector skipped morphisms".into())?;
    Ok(format!(
        "{extensions} extensions along {} bijective morphisms, {} reflections checked as sheaves",
        spans.len(),
        data.len()
    ))
}

fn criterion_6() -> Verdict {
    let d = boolpq();
    let b = Budget::default();
    let probes = d.universe();
    let refl = reflector(&d, &probes, &probes, &b);
    clean(&check_equivalences(&d, &refl, &probes, &b))?;
    let mut sheaves = 0;
    for a in &probes {
        let sheaf = is_sheaf(&d, a, &probes, &b).is_sheaf();
        let complete = is_complete(&d, a, &probes, &b).is_complete();
        ensure(sheaf == complete, || format!("{}: sheaf {sheaf}, complete {complete}", d.render_obj(a)))?;
        let s = refl.singletons(a).ok_or("no singletons")?;
        let g = graph(&d, &s.eta).map_err(|e| e.to_string())?;
        ensure(is_relation_iso(&d, a, &s.s, &g) == Ok(true), || format!("graph of unit of {}", d.render_obj(a)))?;
        sheaves += usize::from(sheaf);
    }
    Ok(format!("{sheaves} of {} probes are sheaves", probes.len()))
}

/// Functional relations from the point into `(2, diag(r0, r1))`, computed on
/// bitmask subsets of `{p, q}`.
fn point_relations(r0: u8, r1: u8) -> Vec<[u8; 2]> {
    let leq = |a: u8, b: u8| a & !b == 0;
    let mut out = Vec::new();
    for f0 in 0..4u8 {
        for f1 in 0..4u8 {
            let strict = leq(f0, r0) && leq(f1, r1);
            let single_valued = f0 & f1 == 0;
            let total = f0 | f1 == 3;
            if strict && single_valued && total {
                out.push([f0, f1]);
            }
        }
    }
    out
}

fn criterion_7() -> Verdict {
    let d = boolpq();
    let b = Budget::default();
    let a = split_pair(&d);
    let one = d.terminal().ok_or("no terminal")?;
    let oracle = point_relations(1, 2);
    ensure(oracle == vec![[1, 2]], || format!("oracle found {oracle:?}"))?;
    let ya = d.product(&one, &a).ok_or("missing product")?.object;
    let library: Vec<Vec<u8>> =
        d.fiber(&ya).into_iter().filter(|f| check_functional(&d, &one, &a, f).is_ok_and(|v| v.holds())).collect();
    ensure(library == vec![vec![1, 2]], || format!("library found {library:?}"))?;
    ensure(d.hom(&one, &a).is_empty(), || "the split pair has a global point".into())?;

    let complete = is_complete(&d, &a, std::slice::from_ref(&one), &b);
    ensure(!complete.is_complete(), || "split pair certified complete".into())?;
    ensure(complete.counterexamples == vec![(one.clone(), vec![1, 2])], || {
        format!("counterexamples {:?}", complete.counterexamples)
    })?;

    let u = sheafify_object(&d, &a, std::slice::from_ref(&one), &b);
    let s = u.data().ok_or("no singletons")?;
    ensure(u.eta_bijective, || "unit not bijective".into())?;
    ensure(inverse(&d, &s.eta).is_none(), || "unit invertible".into())?;
    let scope = vec![one.clone(), a.clone(), s.s.clone()];
    let v = is_sheaf(&d, &a, &scope, &b);
    ensure(!v.is_sheaf() && !v.no_extension.is_empty(), || "split pair certified a sheaf".into())?;
    let mut full = d.universe();
    full.push(s.s.clone());
    let v = is_sheaf(&d, &s.s, &full, &b);
    ensure(v.is_sheaf(), || v.report.to_string())?;
    Ok(format!("counterexample F = (p, q) over {}; S_A = {}", d.render_obj(&ya), d.render_obj(&s.s)))
}

fn criterion_8() -> Verdict {
    let b = Budget::default();
    let nn =
        ClosureOperator::new("double-negation", |d: &ArrowPresheaf, a: &ArrowObj, s: &Vec<u8>| d.double_negation(a, s));
    let c = closed_subobject_doctrine(ArrowPresheaf::truncated(2), nn, &b).map_err(|e| e.to_string())?;
    let probes = c.universe();
    let (oracle, cov) = dense_orthogonal_objects(&c, &probes, &b);
    ensure(cov == Coverage::Exhaustive, || format!("oracle coverage {cov:?}"))?;
    let refl = reflector(&c, &probes, &probes, &b);
    clean(&refl.report)?;
    ensure(refl.sheaves == oracle, || format!("{:?} vs {:?}", refl.sheaves, oracle))?;
    Ok(format!("{} of {} objects are sheaves", oracle.len(), probes.len()))
}

fn criterion_9() -> Verdict {
    let d = per_over(FiniteHeytingAlgebra::chain3(), "chain3");
    let probes = d.universe();
    let r = check_topos_correspondence(&d, &probes, &Budget::default());
    clean(&r)?;
    Ok(format!("{} probes; {}", probes.len(), r.notes.join("; ")))
}

fn doctrina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doctrina")).args(args).output().expect("binary runs")
}

fn fixture(dir: &Path, name: &str, args: &[&str]) -> Result<String, String> {
    let path = dir.join(format!("{name}.json")).to_string_lossy().into_owned();
    let mut all = vec!["fixture"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", &path]);
    let o = doctrina(&all);
    ensure(o.status.success(), || format!("fixture {name}: {}", String::from_utf8_lossy(&o.stderr)))?;
    Ok(path)
}

fn criterion_10() -> Verdict {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let clean_fixtures: [(&str, &[&str]); 7] = [
        ("finset", &["finset-sub"]),
        ("localic", &["localic"]),
        ("localic-abc", &["localic", "--algebra", "abc", "--sizes", "1,2"]),
        ("arrow", &["arrow-presheaf"]),
        ("arrow-nn", &["arrow-presheaf", "--closure", "double-negation"]),
        ("per", &["per"]),
        ("per-pq", &["per", "--algebra", "boolpq"]),
    ];
    for (name, args) in clean_fixtures {
        let path = fixture(dir.path(), name, args)?;
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let file = DoctrineFile::parse(&text).map_err(|e| e.to_string())?;
        ensure(file.to_json() == text, || format!("{name} does not round-trip"))?;
        let rebuilt =
            DoctrineFile::from_doctrine(&file.to_doctrine().map_err(|e| e.to_string())?, file.generator.clone());
        ensure(rebuilt == file, || format!("{name} does not rebuild"))?;
        let again = fixture(dir.path(), &format!("{name}-again"), args)?;
        ensure(std::fs::read(&again).ok() == Some(text.into_bytes()), || format!("{name} generation differs"))?;
        let run = || doctrina(&["check", &path, "--report", "json", "--seed", "11", "--budget", "65536"]);
        let (first, second) = (run(), run());
        ensure(first.status.code() == Some(0), || format!("{name}: {}", String::from_utf8_lossy(&first.stdout)))?;
        ensure(first.stdout == second.stdout, || format!("{name} report differs between runs"))?;
    }
    let defects: [(&str, &[&str], &str); 6] = [
        ("associativity", &["localic", "--sizes", "1,2", "--defect", "associativity"], "associativity at"),
        ("reindex", &["localic", "--sizes", "1,2", "--defect", "reindex"], "reindexing"),
        ("forall", &["localic", "--sizes", "1,2", "--defect", "forall"], "forall not right adjoint"),
        ("membership", &["finset-sub", "--defect", "membership"], "power object"),
        ("nucleus", &["localic", "--sizes", "1,2", "--defect", "nucleus"], "not inflationary"),
        ("frobenius", &["localic", "--algebra", "abc", "--closure", "moore", "--sizes", "1,2"], "Frobenius"),
    ];
    for (name, args, law) in defects {
        let path = fixture(dir.path(), name, args)?;
        let o = doctrina(&["check", &path]);
        let out = String::from_utf8_lossy(&o.stdout);
        ensure(o.status.code() == Some(1), || format!("{name} exits {:?}", o.status.code()))?;
        ensure(out.contains(law), || format!("{name} does not name {law:?}"))?;
    }
    Ok(format!("{} fixtures, {} planted defects", clean_fixtures.len(), defects.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("law suite", 120, criterion_1),
        ("internal bijectivity in finite sets", 30, criterion_2),
        ("singletons, unit and membership", 120, criterion_3),
        ("tabulation of functional relations", 120, criterion_4),
        ("extension along bijective maps", 180, criterion_5),
        ("sheaves, complete objects and maps", 120, criterion_6),
        ("split pair witness", 60, criterion_7),
        ("double negation sheaves on arrows", 300, criterion_8),
        ("correspondence on the chain per completion", 300, criterion_9),
        ("serialization, reports and planted defects", 120, criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (title, limit, run)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs > limit as f64 => Err(format!("over the {limit} s limit")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} ({title}): pass in {secs:.1} s, {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({title}): FAIL in {secs:.1} s, {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
