//! Ready-made models: the demo system shipped with the CLI, the two worked
//! query scenarios, and (with the `random` feature) seeded generators of
//! random meta-models and models.

use std::sync::Arc;

use crate::builtin::{java_lite, sql_lite};
use crate::model::{EntityId, Model, SourceAnchor};

/// First entity whose `name` is `name`.
pub fn by_name(model: &Model, name: &str) -> Option<EntityId> {
    model.entity_ids().find(|&e| model.name_of(e) == Some(name))
}

/// Appends source snippets and hands back their 1-based inclusive anchors.
struct SourceFile {
    path: String,
    text: String,
}

impl SourceFile {
    fn new(path: &str) -> Self {
        SourceFile {
            path: path.to_owned(),
            text: String::new(),
        }
    }

    fn push(&mut self, s: &str) {
        self.text.push_str(s);
    }

    fn anchored(&mut self, s: &str) -> SourceAnchor {
        let start = self.text.chars().count() + 1;
        self.text.push_str(s);
        SourceAnchor {
            file: self.path.clone(),
            start,
            end: start + s.chars().count() - 1,
        }
    }
}

struct DemoBuilder {
    model: Model,
}

impl DemoBuilder {
    fn named(&mut self, ty: &str, name: &str) -> EntityId {
        let id = self.model.create_named_type(ty).expect("demo type");
        self.model.set_property(id, "name", name).expect("named");
        id
    }

    fn contained(&mut self, ty: &str, name: &str, slot: &str, parent: EntityId) -> EntityId {
        let id = self.named(ty, name);
        self.model.link(id, slot, parent).expect("containment");
        id
    }

    fn link(&mut self, a: EntityId, slot: &str, b: EntityId) {
        self.model.link(a, slot, b).expect("demo link");
    }
}

/// A small Java-like system: three packages (one nested), five classes,
/// methods with source text (two pairs of cloned bodies) and a mix of
/// invocations, accesses, references and inheritance.
pub fn demo_model() -> Model {
    let mut d = DemoBuilder {
        model: Model::new("demo", Arc::new(java_lite().expect("java-lite"))),
    };
    let app = d.named("Package", "app");
    let core = d.named("Package", "core");
    let util = d.contained("Package", "util", "parentPackage", core);

    let main = d.contained("Class", "Main", "parentPackage", app);
    let cli = d.contained("Class", "Cli", "parentPackage", app);
    let engine = d.contained("Class", "Engine", "parentPackage", core);
    let store = d.contained("Class", "Store", "parentPackage", core);
    let strings = d.contained("Class", "Strings", "parentPackage", util);

    let run = d.contained("Method", "run", "parentType", main);
    let parse = d.contained("Method", "parse", "parentType", cli);
    let start = d.contained("Method", "start", "parentType", engine);
    let stop = d.contained("Method", "stop", "parentType", engine);
    let open = d.contained("Method", "open", "parentType", store);
    let save = d.contained("Method", "save", "parentType", store);
    let join = d.contained("Method", "join", "parentType", strings);
    let store_field = d.contained("Attribute", "store", "parentType", engine);
    let path_field = d.contained("Attribute", "path", "parentType", store);

    for (class, visibility) in [
        (main, "public"),
        (cli, "public"),
        (engine, "public"),
        (store, "package"),
        (strings, "public"),
    ] {
        d.model
            .set_property(class, "visibility", visibility)
            .expect("visibility");
    }
    d.model
        .set_property(store_field, "visibility", "private")
        .expect("visibility");
    d.model
        .set_property(path_field, "visibility", "private")
        .expect("visibility");

    let mut sources = Vec::new();
    let mut file = SourceFile::new("app/Main.java");
    file.push("package app;\n\npublic class Main {\n    ");
    let a_run = file.anchored(
        "public void run(String[] args) {\n        Engine engine = new Engine();\n        engine.start();\n        System.out.println(\"started\");\n    }",
    );
    file.push("\n}\n");
    sources.push((file, vec![(run, a_run)]));

    let mut file = SourceFile::new("app/Cli.java");
    file.push("package app;\n\npublic class Cli {\n    ");
    let a_parse = file.anchored(
        "public String parse(String[] args) {\n        if (args.length == 0) {\n            return \"\";\n        }\n        return Strings.join(args, \" \");\n    }",
    );
    file.push("\n}\n");
    sources.push((file, vec![(parse, a_parse)]));

    let mut file = SourceFile::new("core/Engine.java");
    file.push(
        "package core;\n\npublic class Engine {\n    private Store store = new Store();\n\n    ",
    );
    let a_start = file.anchored(
        "public void start() {\n        store.open(\"data\");\n        if (store.isEmpty()) {\n            stop();\n        }\n    }",
    );
    file.push("\n\n    ");
    let a_stop = file.anchored(
        "public void stop() {\n        store.save(\"data\");\n        System.out.println(\"stopped\");\n    }",
    );
    file.push("\n}\n");
    sources.push((file, vec![(start, a_start), (stop, a_stop)]));

    let mut file = SourceFile::new("core/Store.java");
    file.push("package core;\n\nclass Store {\n    private String path;\n\n    ");
    let a_open = file.anchored(
        "void open(String name) {\n        if (name == null || name.isEmpty()) {\n            throw new IllegalArgumentException(\"name\");\n        }\n        path = name + \".db\";\n    }",
    );
    file.push("\n\n    ");
    let a_save = file.anchored(
        "void save(String name) {\n        if (name == null || name.isEmpty()) {\n            throw new IllegalArgumentException(\"name\");\n        }\n        write(Strings.join(new String[] { path, name }, \"/\"));\n    }",
    );
    file.push("\n}\n");
    sources.push((file, vec![(open, a_open), (save, a_save)]));

    let mut file = SourceFile::new("core/util/Strings.java");
    file.push("package core.util;\n\npublic class Strings {\n    ");
    let a_join = file.anchored(
        "public static String join(String[] parts, String sep) {\n        if (parts.length == 0) {\n            return \"\";\n        }\n        return String.join(sep, parts);\n    }",
    );
    file.push("\n}\n");
    sources.push((file, vec![(join, a_join)]));

    for (file, anchors) in sources {
        d.model.add_source_text(file.path, file.text);
        for (id, anchor) in anchors {
            d.model.set_source_anchor(id, anchor).expect("demo anchor");
        }
    }

    d.link(run, "outgoingInvocations", start);
    d.link(run, "invocationReceivers", engine);
    d.link(parse, "outgoingInvocations", join);
    d.link(start, "outgoingInvocations", open);
    d.link(start, "outgoingInvocations", stop);
    d.link(stop, "outgoingInvocations", save);
    d.link(save, "outgoingInvocations", join);
    d.link(start, "accesses", store_field);
    d.link(stop, "accesses", store_field);
    d.link(open, "accesses", path_field);
    d.link(save, "accesses", path_field);
    d.link(run, "references", engine);
    d.link(start, "references", store);
    d.link(store_field, "declaredType", store);
    d.link(cli, "superclasses", main);
    d.model
}

/// The package-communication scenario: `P::A.m1` invokes `Q::C.m2`, and
/// `A.m1` also invokes `A.m3` inside `P`.
pub struct PackageExample {
    pub model: Model,
    pub p: EntityId,
    pub q: EntityId,
    pub a: EntityId,
    pub c: EntityId,
    pub m1: EntityId,
    pub m2: EntityId,
    pub m3: EntityId,
}

pub fn package_example() -> PackageExample {
    let mut d = DemoBuilder {
        model: Model::new("packages", Arc::new(java_lite().expect("java-lite"))),
    };
    let p = d.named("Package", "P");
    let q = d.named("Package", "Q");
    let a = d.contained("Class", "A", "parentPackage", p);
    let c = d.contained("Class", "C", "parentPackage", q);
    let m1 = d.contained("Method", "m1", "parentType", a);
    let m2 = d.contained("Method", "m2", "parentType", c);
    let m3 = d.contained("Method", "m3", "parentType", a);
    d.link(m1, "outgoingInvocations", m2);
    d.link(m1, "outgoingInvocations", m3);
    PackageExample {
        model: d.model,
        p,
        q,
        a,
        c,
        m1,
        m2,
        m3,
    }
}

/// A column referenced directly by one stored procedure, by a query nested
/// two levels deep in another procedure, and by a view's query that no
/// procedure owns.
pub struct StoredProcedureExample {
    pub model: Model,
    pub column: EntityId,
    pub direct: EntityId,
    pub nesting: EntityId,
    pub outer_query: EntityId,
    pub inner_query: EntityId,
    pub view_query: EntityId,
}

pub fn stored_procedure_example() -> StoredProcedureExample {
    let mut d = DemoBuilder {
        model: Model::new("sql", Arc::new(sql_lite().expect("sql-lite"))),
    };
    let table = d.named("Table", "customers");
    let column = d.contained("Column", "email", "parentTable", table);
    let other = d.contained("Column", "id", "parentTable", table);
    let direct = d.named("StoredProcedure", "audit_email");
    let nesting = d.named("StoredProcedure", "mailing_list");
    let view = d.named("View", "contacts");

    let query = |d: &mut DemoBuilder| d.model.create_named_type("Query").expect("query");
    let outer_query = query(&mut d);
    let inner_query = query(&mut d);
    let view_query = query(&mut d);
    d.link(outer_query, "parentProcedure", nesting);
    d.link(inner_query, "parentQuery", outer_query);
    d.link(view_query, "parentView", view);

    d.link(direct, "references", column);
    d.link(inner_query, "references", column);
    d.link(outer_query, "references", other);
    d.link(view_query, "references", column);
    StoredProcedureExample {
        model: d.model,
        column,
        direct,
        nesting,
        outer_query,
        inner_query,
        view_query,
    }
}

#[cfg(feature = "random")]
pub use random::*;

#[cfg(feature = "random")]
mod random {
    use std::sync::Arc;

    use rand::rngs::StdRng;
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};

    use crate::builtin::java_lite;
    use crate::metamodel::{AssociationShape, MetaModel, MetaModelBuilder, TraitCategory, TypeId};
    use crate::model::{EntityId, Model, SourceAnchor};
    use crate::stdlib::standard_library;
    use crate::value::{Value, ValueKind};

    /// Seeded generator for reproducible fixtures.
    pub fn rng(seed: u64) -> StdRng {
        StdRng::seed_from_u64(seed)
    }

    const KINDS: [ValueKind; 4] = [
        ValueKind::String,
        ValueKind::Number,
        ValueKind::Boolean,
        ValueKind::Object,
    ];

    const SHAPES: [AssociationShape; 5] = [
        AssociationShape::ManyToMany,
        AssociationShape::ManyToOne,
        AssociationShape::OneToMany,
        AssociationShape::ContainmentManyToOne,
        AssociationShape::ContainmentOneToMany,
    ];

    const LIBRARY_TRAITS: [&str; 6] = [
        "TNamedEntity",
        "TSourcedEntity",
        "TWithModifiers",
        "TTypedEntity",
        "TWithInvocations",
        "TInvocable",
    ];

    /// A meta-model extending the standard library with random traits and
    /// classes. Slot names are unique per declaring type, so the only shared
    /// slots come from diamonds, which composition merges.
    pub fn random_metamodel(rng: &mut StdRng, name: &str) -> MetaModel {
        let lib = standard_library();
        let mut b = MetaModelBuilder::extending(name, &[&lib]).expect("fresh name");
        let mut local: Vec<TypeId> = Vec::new();
        let trait_count = rng.random_range(1..=6);
        for t in 0..trait_count {
            let category = if rng.random_bool(0.3) {
                TraitCategory::Terminal
            } else {
                TraitCategory::Core
            };
            let id = b.new_trait(&format!("RT{t}"), category).expect("unique");
            for p in 0..rng.random_range(0..=3) {
                let kind = *KINDS.choose(rng).expect("kinds");
                b.add_property(id, &format!("rt{t}p{p}"), kind)
                    .expect("unique");
            }
            for &earlier in &local {
                if rng.random_bool(0.3) {
                    b.add_generalization(id, earlier).expect("acyclic");
                }
            }
            for name in LIBRARY_TRAITS {
                if rng.random_bool(0.15) {
                    b.add_generalization(id, b.require(name).expect("library"))
                        .expect("acyclic");
                }
            }
            local.push(id);
        }
        let traits = local.clone();
        let mut classes = Vec::new();
        for c in 0..rng.random_range(1..=6) {
            let id = b.new_class(&format!("RC{c}")).expect("unique");
            if let Some(&sup) = classes.choose(rng) {
                if rng.random_bool(0.5) {
                    b.add_generalization(id, sup).expect("single superclass");
                }
            }
            for &t in &traits {
                if rng.random_bool(0.35) {
                    b.add_generalization(id, t).expect("acyclic");
                }
            }
            for name in LIBRARY_TRAITS {
                if rng.random_bool(0.15) {
                    b.add_generalization(id, b.require(name).expect("library"))
                        .expect("acyclic");
                }
            }
            for p in 0..rng.random_range(0..=2) {
                let kind = *KINDS.choose(rng).expect("kinds");
                b.add_property(id, &format!("rc{c}p{p}"), kind)
                    .expect("unique");
            }
            classes.push(id);
            local.push(id);
        }
        for i in 0..rng.random_range(0..=5) {
            let a = *local.choose(rng).expect("types");
            let z = *local.choose(rng).expect("types");
            let shape = *SHAPES.choose(rng).expect("shapes");
            b.add_association(a, z, shape, &format!("e{i}a"), &format!("e{i}b"))
                .expect("unique end names");
        }
        b.generate().expect("random meta-models avoid conflicts")
    }

    /// Sizes for [`random_java_model`].
    #[derive(Clone, Copy, Debug)]
    pub struct RandomModelShape {
        pub max_entities: usize,
        /// Upper bound on dependency links. Containment comes on top.
        pub max_links: usize,
        pub sources: bool,
        pub tags: bool,
    }

    impl Default for RandomModelShape {
        fn default() -> Self {
            RandomModelShape {
                max_entities: 200,
                max_links: 400,
                sources: false,
                tags: false,
            }
        }
    }

    fn pick(rng: &mut StdRng, ids: &[EntityId]) -> Option<EntityId> {
        ids.choose(rng).copied()
    }

    /// A random package/class/method/attribute model. Packages may nest, so
    /// the containment tree has at least three levels whenever a method
    /// lands in a class inside a package.
    pub fn random_java_model(rng: &mut StdRng, shape: RandomModelShape) -> Model {
        let mut model = Model::new("random", Arc::new(java_lite().expect("java-lite")));
        let total = rng.random_range(8.min(shape.max_entities)..=shape.max_entities);
        let packages_n = (total / 10).max(1);
        let classes_n = (total / 4).max(1);
        let methods_n = (total / 2).max(1);
        let attributes_n = total.saturating_sub(packages_n + classes_n + methods_n);

        let mut packages = Vec::new();
        for i in 0..packages_n {
            let p = model.create_named_type("Package").expect("package");
            model
                .set_property(p, "name", format!("p{i}"))
                .expect("name");
            if let Some(parent) = pick(rng, &packages) {
                if rng.random_bool(0.4) {
                    model.link(p, "parentPackage", parent).expect("nest");
                }
            }
            packages.push(p);
        }
        let mut classes = Vec::new();
        for i in 0..classes_n {
            let c = model.create_named_type("Class").expect("class");
            model
                .set_property(c, "name", format!("C{i}"))
                .expect("name");
            if rng.random_bool(0.9) {
                let p = pick(rng, &packages).expect("package");
                model.link(c, "parentPackage", p).expect("contain");
            }
            classes.push(c);
        }
        let mut methods = Vec::new();
        for i in 0..methods_n {
            let m = model.create_named_type("Method").expect("method");
            if rng.random_bool(0.8) {
                model
                    .set_property(m, "name", format!("m{i}"))
                    .expect("name");
            }
            if rng.random_bool(0.9) {
                let c = pick(rng, &classes).expect("class");
                model.link(m, "parentType", c).expect("contain");
            }
            methods.push(m);
        }
        let mut attributes = Vec::new();
        for i in 0..attributes_n {
            let a = model.create_named_type("Attribute").expect("attribute");
            model
                .set_property(a, "name", format!("a{i}"))
                .expect("name");
            if rng.random_bool(0.9) {
                let c = pick(rng, &classes).expect("class");
                model.link(a, "parentType", c).expect("contain");
            }
            attributes.push(a);
        }

        for &e in classes.iter().chain(&methods).chain(&attributes) {
            if rng.random_bool(0.3) {
                let v = *["public", "private", "protected"].choose(rng).expect("vis");
                model.set_property(e, "visibility", v).expect("visibility");
            }
            if rng.random_bool(0.1) {
                let flags = serde_json::json!({"static": rng.random_bool(0.5), "order": rng.random_range(0..10)});
                model
                    .set_property(e, "modifiers", Value::Object(flags))
                    .expect("modifiers");
            }
        }
        for &m in &methods {
            if rng.random_bool(0.2) {
                model
                    .set_property(m, "isStub", rng.random_bool(0.5))
                    .expect("stub");
            }
        }

        // `max_links` bounds dependencies; attribute types come later.
        let budget = shape.max_links.saturating_sub(attributes.len());
        let links = rng.random_range(0..=budget);
        for _ in 0..links {
            let (a, slot, b) = match rng.random_range(0..6) {
                0 | 1 => (
                    pick(rng, &methods),
                    "outgoingInvocations",
                    pick(rng, &methods),
                ),
                2 => (
                    pick(rng, &methods),
                    "invocationReceivers",
                    pick(rng, &classes),
                ),
                3 => (pick(rng, &methods), "accesses", pick(rng, &attributes)),
                4 => (pick(rng, &methods), "references", pick(rng, &classes)),
                _ => (pick(rng, &classes), "superclasses", pick(rng, &classes)),
            };
            if let (Some(a), Some(b)) = (a, b) {
                model.link(a, slot, b).expect("random link");
            }
        }
        for &a in &attributes {
            if rng.random_bool(0.3) {
                let c = pick(rng, &classes).expect("class");
                model.link(a, "declaredType", c).expect("typed");
            }
        }

        if shape.sources {
            let anchored: Vec<EntityId> = methods.iter().chain(&attributes).copied().collect();
            let words = [
                "if", "(", ")", "{", "}", "x", "y", "return", ";", "=", "+", "call",
            ];
            for f in 0..rng.random_range(1..=3) {
                let len = rng.random_range(20..200);
                let mut text = String::new();
                for _ in 0..len {
                    text.push_str(words.choose(rng).expect("word"));
                    text.push(if rng.random_bool(0.2) { '\n' } else { ' ' });
                }
                text.push('é');
                let path = format!("src/F{f}.java");
                let chars = text.chars().count();
                model.add_source_text(&path, text);
                for _ in 0..rng.random_range(0..=anchored.len().min(10)) {
                    let e = pick(rng, &anchored).expect("entity");
                    let start = rng.random_range(1..=chars);
                    let end = rng.random_range(start..=chars);
                    model
                        .set_source_anchor(
                            e,
                            SourceAnchor {
                                file: path.clone(),
                                start,
                                end,
                            },
                        )
                        .expect("valid anchor");
                }
            }
        }

        if shape.tags {
            let ids: Vec<EntityId> = model.entity_ids().collect();
            for t in 0..rng.random_range(0..=3) {
                let members: Vec<EntityId> = ids
                    .iter()
                    .copied()
                    .filter(|_| rng.random_bool(0.1))
                    .collect();
                let name = format!("tag-{t}");
                model.tag(&name, members).expect("members exist");
                if rng.random_bool(0.5) {
                    let color = format!("{:06X}", rng.random_range(0..0x1000000u32));
                    model.set_tag_color(&name, Some(&color)).expect("color");
                }
            }
        }
        model
    }
}
