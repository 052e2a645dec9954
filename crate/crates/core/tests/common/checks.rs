//! Whole-model checks shared by several test targets. Each one panics on the
//! first mismatch.

use std::collections::BTreeSet;
use std::sync::Arc;

use facet_core::builtin::{file_history, MetaModelRegistry};
use facet_core::fixtures::{
    package_example, random_java_model, random_metamodel, rng, stored_procedure_example,
    RandomModelShape,
};
use facet_core::interchange::{export_metamodel, export_model, import_metamodel, import_model};
use facet_core::stdlib::{standard_library, TCLASS_TRAITS};
use facet_core::tags::tag_dependencies;
use facet_core::{
    Direction, EntityId, MetaModelBuilder, Model, ModelError, Query, QueryResult, TagMetrics, Value,
};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::Oracle;

fn group(ids: &[EntityId]) -> QueryResult {
    ids.iter().copied().collect()
}

pub const FILE_HISTORY_DOCUMENT: &str = r#"{
  "formatVersion": "1.0",
  "name": "file-history",
  "extends": ["famix-core"],
  "classes": [{"name": "Entity"}, {"name": "File"}, {"name": "Commit"}, {"name": "Author"}],
  "generalizations": [
    {"child": "File", "parent": "Entity"},
    {"child": "File", "parent": "TNamedEntity"},
    {"child": "Commit", "parent": "Entity"},
    {"child": "Author", "parent": "Entity"},
    {"child": "Author", "parent": "TNamedEntity"}
  ],
  "properties": [
    {"owner": "Commit", "name": "revision", "type": "Number"},
    {"owner": "Commit", "name": "date", "type": "Object"},
    {"owner": "Commit", "name": "message", "type": "String"}
  ],
  "associations": [
    {"source": "File", "target": "Commit", "shape": "manyToMany", "sourceEnd": "commits", "targetEnd": "files"},
    {"source": "Commit", "target": "Author", "shape": "manyToOne", "sourceEnd": "author", "targetEnd": "commits"}
  ]
}"#;

/// The file-history meta-model built in code and loaded from its document
/// have the same slot tables and export the same text.
pub fn file_history_two_ways() {
    let script = file_history().unwrap();
    let mut registry = MetaModelRegistry::new();
    registry.register(standard_library());
    let loaded = import_metamodel(FILE_HISTORY_DOCUMENT, &registry).unwrap();
    assert_eq!(script.local_summaries(), loaded.local_summaries());
    assert_eq!(export_metamodel(&script), export_metamodel(&loaded));

    let slots = |ty: &str| -> BTreeSet<String> {
        loaded
            .table(loaded.lookup(ty).unwrap())
            .slot_names()
            .map(str::to_owned)
            .collect()
    };
    assert!(slots("File").is_superset(&BTreeSet::from(["name".into(), "commits".into()])));
    assert!(slots("Author").is_superset(&BTreeSet::from(["name".into(), "commits".into()])));
    let commit = slots("Commit");
    for s in ["revision", "date", "message", "files", "author"] {
        assert!(commit.contains(s), "Commit lacks {s}");
    }
    assert!(!commit.contains("name"));
}

/// Every undeclared slot access on every instantiable type fails, and each
/// entity holds exactly its own table's slots.
pub fn check_anti_permissive(mut m: Model) {
    let mm = m.metamodel().clone();
    let all_slots: BTreeSet<String> = mm
        .type_ids()
        .flat_map(|t| {
            mm.table(t)
                .slot_names()
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .chain(["bogus".to_owned(), String::new()])
        .collect();
    let instantiable: Vec<_> = mm.type_ids().filter(|&t| mm.is_instantiable(t)).collect();
    for &ty in &instantiable {
        let e = m.create(ty).unwrap();
        let table = mm.table(ty);
        assert_eq!(m.slot_capacity(e).unwrap(), table.len());
        for slot in &all_slots {
            let declared_property = table.property_index(slot).is_some();
            let declared_link = table.link_index(slot).is_some();
            assert_eq!(m.get_property(e, slot).is_ok(), declared_property, "{slot}");
            if !declared_property {
                assert!(matches!(
                    m.set_property(e, slot, Value::from(true)),
                    Err(ModelError::UnknownSlot { .. })
                ));
                assert!(m.unset_property(e, slot).is_err());
            }
            assert_eq!(m.links(e, slot).is_ok(), declared_link, "{slot}");
            if !declared_link {
                assert!(matches!(
                    m.link(e, slot, e),
                    Err(ModelError::UnknownSlot { .. })
                ));
            }
        }
    }
}

pub fn check_random_metamodel(seed: u64) {
    let mut r = rng(seed);
    let mm = Arc::new(random_metamodel(&mut r, "random"));
    check_anti_permissive(Model::new("m", mm));
}

/// `TClass` uses exactly its seven traits, and a class extending it with
/// modifiers leaves `TClass` unchanged.
pub fn tclass_composition() {
    let lib = standard_library();
    let class = lib.lookup("TClass").unwrap();
    let mut used: Vec<&str> = lib
        .type_def(class)
        .used_traits
        .iter()
        .map(|&t| lib.type_name(t))
        .collect();
    used.sort();
    let mut expected = TCLASS_TRAITS.to_vec();
    expected.sort();
    assert_eq!(used, expected);

    let before = lib.table_summary(class);
    let mut b = MetaModelBuilder::extending("java", &[&lib]).unwrap();
    let java_class = b.new_class("JavaClass").unwrap();
    b.add_generalization(java_class, b.require("TClass").unwrap())
        .unwrap();
    b.add_generalization(java_class, b.require("TWithModifiers").unwrap())
        .unwrap();
    let mm = b.generate().unwrap();
    let table = mm.table(mm.lookup("JavaClass").unwrap());
    assert!(table.property_index("modifiers").is_some());
    assert!(table.property_index("visibility").is_some());
    assert_eq!(mm.table_summary(mm.lookup("TClass").unwrap()), before);
    assert_eq!(lib.table_summary(class), before);
}

/// Package P invokes into Q; the uplift names Q and nothing inside P.
pub fn package_uplift_scenario() {
    let ex = package_example();
    let q = Query::new(&ex.model);
    let invocation = q.resolve_kind("Invocation").unwrap();
    let package = q.resolve_type("Package").unwrap();
    let out = q.outgoing(&ex.p.into(), invocation).unwrap();
    assert_eq!(out.to_vec(), vec![ex.m2]);
    assert_eq!(q.at_scope(&out, package).to_vec(), vec![ex.q]);
    let text = q
        .run(
            "type:Package | outgoing Invocation | at-scope Package",
            None,
        )
        .unwrap();
    assert_eq!(text.to_vec(), vec![ex.q]);
    assert!(q
        .outgoing(&ex.m1.into(), invocation)
        .unwrap()
        .contains(ex.m3));
}

/// Column users lift to their procedures; the view query has none and drops.
pub fn stored_procedure_scenario() {
    let ex = stored_procedure_example();
    let q = Query::new(&ex.model);
    let incoming = q.all_incoming(&ex.column.into());
    assert_eq!(
        incoming.items(),
        &BTreeSet::from([ex.direct, ex.inner_query, ex.view_query])
    );
    let procedure = q.resolve_type("StoredProcedure").unwrap();
    let lifted = q.at_scope(&incoming, procedure);
    assert_eq!(lifted.items(), &BTreeSet::from([ex.direct, ex.nesting]));
    assert!(!lifted.contains(ex.view_query));
}

/// Scope and dependency queries on a random model against the oracle.
pub fn check_model(seed: u64) {
    let mut r = rng(seed);
    let model = random_java_model(&mut r, RandomModelShape::default());
    let oracle = Oracle::new(&model);
    let q = Query::new(&model);
    let ids: Vec<EntityId> = model.entity_ids().collect();
    let kinds = model.metamodel().association_kinds();
    let scopes: Vec<_> = [
        "Package",
        "Class",
        "Method",
        "Attribute",
        "TClass",
        "TNamedEntity",
    ]
    .iter()
    .map(|n| q.resolve_type(n).unwrap())
    .collect();

    for size in [1, 1, 2, 5] {
        let input: Vec<EntityId> = ids.choose_multiple(&mut r, size).copied().collect();
        let receiver = group(&input);
        for &scope in &scopes {
            let at = q.at_scope(&receiver, scope);
            assert_eq!(at.items(), &oracle.at_scope(&input, scope), "seed {seed}");
            assert_eq!(q.at_scope(&at, scope).items(), at.items(), "idempotence");
            assert_eq!(
                q.to_scope(&receiver, scope).items(),
                &oracle.to_scope(&input, scope)
            );
        }
        let mut union_out = BTreeSet::new();
        let mut union_in = BTreeSet::new();
        for &kind in &kinds {
            let out = q.outgoing(&receiver, kind).unwrap();
            assert_eq!(
                out.items(),
                &oracle.dependencies(&input, true, Some(kind)),
                "seed {seed}"
            );
            let inc = q.incoming(&receiver, kind).unwrap();
            assert_eq!(inc.items(), &oracle.dependencies(&input, false, Some(kind)));
            for dep in out.provenance() {
                assert!(out.contains(dep.target));
                assert!(model.metamodel().conforms(dep.kind, kind));
            }
            union_out.extend(out.iter());
            union_in.extend(inc.iter());
        }
        assert_eq!(q.all_outgoing(&receiver).items(), &union_out);
        assert_eq!(q.all_incoming(&receiver).items(), &union_in);
        assert_eq!(
            q.all_outgoing(&receiver).items(),
            &oracle.dependencies(&input, true, None)
        );
        assert_eq!(
            q.all_incoming(&receiver).items(),
            &oracle.dependencies(&input, false, None)
        );
    }

    // An entity's outgoing deps are found from its container too, unless
    // the edge stays inside the container's subtree.
    for &e in ids.iter().take(30) {
        if let Some(parent) = model.container_of(e) {
            let inner = q.all_outgoing(&e.into());
            let outer = q.all_outgoing(&parent.into());
            for t in inner.iter() {
                assert!(outer.contains(t) || oracle.under(t, parent));
            }
        }
    }
}

/// Depth of the deepest containment chain in a model.
pub fn containment_depth(model: &Model) -> usize {
    let oracle = Oracle::new(model);
    model
        .entity_ids()
        .map(|e| oracle.ancestors(e).len())
        .max()
        .unwrap_or(0)
}

/// Five tags on the package example with hand-counted edges.
pub fn hand_counted_fixtures() {
    let ex = package_example();
    let mut m = ex.model;
    let cases: [(&str, Vec<EntityId>, f64, usize); 5] = [
        ("whole-p", vec![ex.p], 1.0 / 2.0, 1),
        ("class-a", vec![ex.a], 1.0 / 2.0, 1),
        ("m1-m3", vec![ex.m1, ex.m3], 1.0 / 2.0, 1),
        ("everything", vec![ex.p, ex.q], 1.0, 0),
        ("m2", vec![ex.m2], 0.0, 1),
    ];
    for (name, members, cohesion, coupling) in cases {
        m.tag(name, members).unwrap();
        let metrics = TagMetrics::of(&m, m.tag_by_name(name).unwrap());
        assert_eq!(metrics.cohesion(), cohesion, "{name}");
        assert_eq!(metrics.coupling(), coupling, "{name}");
    }
}

/// Tag metrics on a random tag against the edge scan, and a tag over
/// classes behaves like a package holding them.
pub fn check_tags(seed: u64) {
    let mut r = rng(seed);
    let mut model = random_java_model(
        &mut r,
        RandomModelShape {
            max_entities: 120,
            max_links: 200,
            ..Default::default()
        },
    );
    let ids: Vec<EntityId> = model.entity_ids().collect();
    let members: BTreeSet<EntityId> = ids
        .iter()
        .copied()
        .filter(|_| r.random_bool(0.15))
        .collect();
    let before = export_model(&model);
    model.tag("t", members.clone()).unwrap();
    let tag = model.tag_by_name("t").unwrap().clone();

    let oracle = Oracle::new(&model);
    let metrics = TagMetrics::of(&model, &tag);
    let (internal, external) = oracle.counts(&members);
    assert_eq!((metrics.internal, metrics.external), (internal, external));
    assert!((0.0..=1.0).contains(&metrics.cohesion()));
    assert_eq!(metrics.coupling(), external);

    // Tagging leaves entity data alone: only the tags section changes.
    let after = export_model(&model);
    let strip = |doc: &str| doc.split(r#","tags":"#).next().unwrap().to_owned();
    assert_eq!(strip(&before), strip(&after));

    let roots: Vec<EntityId> = members
        .iter()
        .copied()
        .filter(|&e| {
            !oracle
                .ancestors(e)
                .iter()
                .skip(1)
                .any(|a| members.contains(a))
        })
        .filter(|&e| model.type_name(e).unwrap() == "Class")
        .collect();
    if !roots.is_empty() {
        let mut real = model.clone();
        let package = real.create_named_type("Package").unwrap();
        for &c in &roots {
            real.link(c, "parentPackage", package).unwrap();
        }
        real.tag("classes", roots.clone()).unwrap();
        let virtual_tag = real.tag_by_name("classes").unwrap();
        let q = Query::new(&real);
        for dir in [Direction::Outgoing, Direction::Incoming] {
            let via_tag = tag_dependencies(&real, virtual_tag, dir);
            let via_package = q.dependencies(&package.into(), dir, None);
            assert_eq!(via_tag.items(), via_package.items());
        }
    }
}

/// Export, import, export gives the same bytes, anchors included.
pub fn check_round_trip(seed: u64) {
    let mut r = rng(seed);
    let model = random_java_model(
        &mut r,
        RandomModelShape {
            sources: true,
            tags: true,
            ..Default::default()
        },
    );
    let registry = MetaModelRegistry::with_builtins();
    let first = export_model(&model);
    let imported = import_model(&first, &registry, "copy").unwrap();
    let second = export_model(&imported);
    assert_eq!(first, second);
    for e in model.entity_ids() {
        assert_eq!(model.source_anchor(e), imported.source_anchor(e));
        assert_eq!(model.source_slice(e), imported.source_slice(e));
    }
}
