mod common;

use std::collections::BTreeSet;

use hotpie_core::analysis::{gap_report, merge_coverage, modaf_profiles, suggest_paths, FactorLevels};
use hotpie_core::model::{CausalEndpoint, Classification, LifecyclePhase, NewEvidence, NewObject, NewPath, OpContext, Project};
use hotpie_core::stpa::{export_findings, Disposition, NodeMapping};
use hotpie_core::taxonomy::{default_catalog, lookup_templates, FactorRef};
use hotpie_core::{export_dot, load_project, save_project, DotOptions, PrimaryFactor, RepresentationLevel, ViewProfile};
use proptest::prelude::*;

fn factor() -> impl Strategy<Value = PrimaryFactor> {
    (0usize..6).prop_map(|i| PrimaryFactor::ALL[i])
}

fn level() -> impl Strategy<Value = RepresentationLevel> {
    prop_oneof![
        Just(RepresentationLevel::NotRepresented),
        Just(RepresentationLevel::PartiallyRepresented),
        Just(RepresentationLevel::Represented),
    ]
}

fn profile(id: usize) -> impl Strategy<Value = ViewProfile> {
    proptest::array::uniform6(level()).prop_map(move |ls| {
        let mut p = modaf_profiles()[0].clone();
        p.view_id = format!("V-{id}");
        p.notes.clear();
        p.levels = FactorLevels::from_fn(|f| ls[f.index()]);
        p
    })
}

fn profiles() -> impl Strategy<Value = Vec<ViewProfile>> {
    (0usize..6).prop_flat_map(|n| (0..n).map(profile).collect::<Vec<_>>())
}

#[derive(Debug, Clone)]
struct PathSpec {
    from: usize,
    to: usize,
    sf: PrimaryFactor,
    tf: PrimaryFactor,
    definite: bool,
    evidence: Vec<u8>,
}

fn path_spec() -> impl Strategy<Value = PathSpec> {
    (0usize..5, 0usize..5, factor(), factor(), any::<bool>(), proptest::collection::vec(0u8..3, 0..4)).prop_map(
        |(from, to, sf, tf, definite, evidence)| PathSpec { from, to, sf, tf, definite, evidence },
    )
}

fn build(n_objects: usize, specs: &[PathSpec], names: &[String]) -> Project {
    let c = OpContext::new(common::at(1), "prop");
    let mut p = Project::new("rand", "random \"project\" | x", &c);
    let ids: Vec<_> = (0..n_objects)
        .map(|i| {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("object {i}"));
            p.add_object(NewObject::named(format!("{name} {i}")).tag(format!("t{i}")), &c)
                .unwrap()
        })
        .collect();
    for s in specs {
        let (from, to) = (s.from % n_objects, s.to % n_objects);
        if from == to {
            continue;
        }
        let id = p
            .add_path(
                NewPath {
                    source: CausalEndpoint::new(ids[from].clone(), s.sf),
                    target: CausalEndpoint::new(ids[to].clone(), s.tf),
                    keywords: vec!["kw".into()],
                    narrative: "n\"arr\\ative\nline".into(),
                    initial: if s.definite { Classification::Definite } else { Classification::Plausible },
                    phase: LifecyclePhase::Design,
                },
                &c,
            )
            .unwrap();
        for e in &s.evidence {
            let resulting = [Classification::Definite, Classification::Plausible, Classification::Discharged][*e as usize];
            p.record_evidence(
                id.as_str(),
                NewEvidence { text: "e".into(), author: "a".into(), resulting, phase: LifecyclePhase::Design },
                &c,
            )
            .unwrap();
        }
    }
    p
}

fn project() -> impl Strategy<Value = Project> {
    (
        2usize..6,
        proptest::collection::vec(path_spec(), 0..12),
        proptest::collection::vec("[a-zA-Z \\-|{}<>\"]{1,12}", 0..6),
    )
        .prop_map(|(n, specs, names)| build(n, &specs, &names))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn catalog_lookup_contains_every_template(idx in 0usize..274) {
        let cat = default_catalog();
        let t = &cat.templates()[idx];
        prop_assert!(cat.lookup(FactorRef::Secondary(t.secondary)).contains(&t));
        prop_assert!(cat.lookup(FactorRef::Primary(t.secondary.parent())).contains(&t));
    }

    #[test]
    fn search_results_contain_query(q in "[a-z ]{0,4}") {
        let cat = default_catalog();
        let hits = cat.search(&q);
        let needle = q.trim().to_lowercase();
        for h in &hits {
            prop_assert!(h.keyword.contains(&needle));
            prop_assert!(cat.templates().contains(h));
        }
        prop_assert_eq!(hits, cat.search(&q));
    }

    #[test]
    fn merge_is_monotone(ps in profiles(), extra in profile(99)) {
        let base = merge_coverage(&ps).unwrap().merged;
        let mut more = ps.clone();
        more.push(extra.clone());
        let grown = merge_coverage(&more).unwrap().merged;
        for f in PrimaryFactor::ALL {
            prop_assert!(grown.get(f) >= base.get(f));
        }
        prop_assert_eq!(merge_coverage(std::slice::from_ref(&extra)).unwrap().merged, extra.levels);
    }

    #[test]
    fn gap_threshold_is_monotone(ps in profiles()) {
        let low: BTreeSet<_> = gap_report(&ps, RepresentationLevel::NotRepresented).into_iter().collect();
        let mid: BTreeSet<_> = gap_report(&ps, RepresentationLevel::PartiallyRepresented).into_iter().collect();
        let high: BTreeSet<_> = gap_report(&ps, RepresentationLevel::Represented).into_iter().collect();
        prop_assert!(low.is_empty());
        prop_assert!(mid.is_subset(&high));
    }

    #[test]
    fn adding_a_path_flips_exactly_one_prompt(p in project(), sf in factor(), tf in factor()) {
        let cat = default_catalog();
        let a = p.objects()[0].id.clone();
        let b = p.objects()[1].id.clone();
        let before = suggest_paths(&p, cat, a.as_str(), b.as_str(), true).unwrap();
        prop_assert_eq!(before.len(), 36);
        let mut q = p.clone();
        q.add_path(
            NewPath {
                source: CausalEndpoint::new(a.clone(), sf),
                target: CausalEndpoint::new(b.clone(), tf),
                keywords: vec![],
                narrative: String::new(),
                initial: Classification::Plausible,
                phase: LifecyclePhase::Design,
            },
            &OpContext::new(common::at(2), "prop"),
        ).unwrap();
        let after = suggest_paths(&q, cat, a.as_str(), b.as_str(), true).unwrap();
        let changed: Vec<_> = before.iter().zip(&after).filter(|(x, y)| x.covered != y.covered).collect();
        let was_covered = before.iter().any(|x| x.source_factor == sf && x.target_factor == tf && x.covered);
        prop_assert_eq!(changed.len(), if was_covered { 0 } else { 1 });
        prop_assert!(after.iter().any(|x| x.source_factor == sf && x.target_factor == tf && x.covered));
    }

    #[test]
    fn save_load_save_is_identical(p in project()) {
        let saved = save_project(&p);
        let loaded = load_project(&saved).unwrap();
        prop_assert_eq!(&loaded, &p);
        prop_assert_eq!(save_project(&loaded), saved);
    }

    #[test]
    fn dot_output_parses(p in project(), show in any::<bool>()) {
        let dot = export_dot(&p, DotOptions { show_discharged: show });
        let parsed = graphviz_rust::parse(&dot);
        prop_assert!(parsed.is_ok(), "{:?}\n{}", parsed.err(), dot);
        let rendered = p.paths().iter().filter(|x| show || x.classification != Classification::Discharged).count();
        prop_assert_eq!(dot.matches(" -> ").count(), rendered);
        prop_assert_eq!(dot.matches("|{<H>H|<O>O|<T>T|<P>P|<I>I|<E>E}\"]").count(), p.objects().len());
    }

    #[test]
    fn findings_partition_by_classification(p in project(), mapped in proptest::collection::btree_set(0usize..5, 0..5)) {
        let mapping: NodeMapping = p.objects().iter().enumerate()
            .filter(|(i, _)| mapped.contains(i))
            .map(|(i, o)| (format!("n{i}"), o.id.clone()))
            .collect();
        let ids: BTreeSet<_> = mapping.values().collect();
        let in_scope: Vec<_> = p.paths().iter()
            .filter(|x| ids.contains(&x.source.object) && ids.contains(&x.target.object))
            .collect();
        let findings = export_findings(&p, &mapping);
        let definite = in_scope.iter().filter(|x| x.classification == Classification::Definite).count();
        let plausible = in_scope.iter().filter(|x| x.classification == Classification::Plausible).count();
        prop_assert_eq!(findings.len(), definite + plausible);
        for f in &findings {
            let path = p.path(f.path_id.as_str()).unwrap();
            let expected = match path.classification {
                Classification::Definite => Disposition::FeedToSTPA,
                Classification::Plausible => Disposition::TrackAsUncertain,
                Classification::Discharged => panic!("discharged path exported"),
            };
            prop_assert_eq!(f.disposition, expected);
        }
    }
}

#[test]
fn lookup_is_deterministic_and_sorted() {
    let cat = default_catalog();
    for f in ["H", "O", "T", "P", "I", "E", "H1", "E2"] {
        let a = lookup_templates(cat, f).unwrap();
        let b = lookup_templates(cat, f).unwrap();
        assert_eq!(a, b);
        let keys: Vec<_> = a.iter().map(|t| (t.secondary.id(), t.keyword.as_str())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
