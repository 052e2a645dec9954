//! The predefined trait library, registered as `famix-core`.
//!
//! It holds a representative subset of elementary language concepts: core
//! feature traits (a name, a declared type, ownership of methods...),
//! technical traits for source anchoring, association traits used as
//! dependency kinds, and terminal traits composed from the former. Anything
//! else can be added as data through a meta-model document.

use std::sync::{Arc, OnceLock};

use crate::metamodel::{AssociationShape, MetaModel, MetaModelBuilder, TraitCategory, TypeId};
use crate::value::ValueKind;

pub const STDLIB_NAME: &str = "famix-core";

/// Slot names carrying a source anchor, contributed by `TSourceAnchor`.
pub const ANCHOR_FILE_SLOT: &str = "sourceFile";
pub const ANCHOR_START_SLOT: &str = "sourceStart";
pub const ANCHOR_END_SLOT: &str = "sourceEnd";

/// The seven traits `TClass` is composed of.
pub const TCLASS_TRAITS: [&str; 7] = [
    "TInvocationsReceiver",
    "TPackageable",
    "TType",
    "TWithAttributes",
    "TWithComments",
    "TWithInheritances",
    "TWithMethods",
];

/// Returns the shared, generated standard library.
pub fn standard_library() -> Arc<MetaModel> {
    static LIB: OnceLock<Arc<MetaModel>> = OnceLock::new();
    LIB.get_or_init(|| Arc::new(build().generate().expect("standard library is consistent")))
        .clone()
}

fn build() -> MetaModelBuilder {
    use AssociationShape::*;
    use TraitCategory::*;
    use ValueKind::*;

    let mut b = MetaModelBuilder::new(STDLIB_NAME);
    let t = |b: &mut MetaModelBuilder, name: &str, category| -> TypeId {
        b.new_trait(name, category).expect("unique trait name")
    };

    // association kinds
    let inheritance = t(&mut b, "Inheritance", Association);
    let invocation = t(&mut b, "Invocation", Association);
    let access = t(&mut b, "Access", Association);
    let reference = t(&mut b, "Reference", Association);
    let deref = t(&mut b, "DereferencedInvocation", Association);
    let include = t(&mut b, "FileInclude", Association);
    let trait_usage = t(&mut b, "TraitUsage", Association);

    // technical
    let anchor = t(&mut b, "TSourceAnchor", Technical);
    let sourced = t(&mut b, "TSourcedEntity", Technical);

    // core
    let named = t(&mut b, "TNamedEntity", Core);
    let typed = t(&mut b, "TTypedEntity", Core);
    let ty = t(&mut b, "TType", Core);
    let modifiers = t(&mut b, "TWithModifiers", Core);
    let packageable = t(&mut b, "TPackageable", Core);
    let with_attributes = t(&mut b, "TWithAttributes", Core);
    let with_comments = t(&mut b, "TWithComments", Core);
    let with_inheritances = t(&mut b, "TWithInheritances", Core);
    let with_methods = t(&mut b, "TWithMethods", Core);
    let with_functions = t(&mut b, "TWithFunctions", Core);
    let with_globals = t(&mut b, "TWithGlobalVariables", Core);
    let receiver = t(&mut b, "TInvocationsReceiver", Core);
    let with_invocations = t(&mut b, "TWithInvocations", Core);
    let invocable = t(&mut b, "TInvocable", Core);
    let with_accesses = t(&mut b, "TWithAccesses", Core);
    let accessible = t(&mut b, "TAccessible", Core);
    let with_references = t(&mut b, "TWithReferences", Core);
    let referenceable = t(&mut b, "TReferenceable", Core);
    let with_deref = t(&mut b, "TWithDereferencedInvocations", Core);
    let with_includes = t(&mut b, "TWithFileIncludes", Core);
    let with_traits = t(&mut b, "TWithTraits", Core);

    // terminal
    let class = t(&mut b, "TClass", Terminal);
    let method = t(&mut b, "TMethod", Terminal);
    let function = t(&mut b, "TFunction", Terminal);
    let package = t(&mut b, "TPackage", Terminal);
    let attribute = t(&mut b, "TAttribute", Terminal);
    let comment = t(&mut b, "TComment", Terminal);
    let global = t(&mut b, "TGlobalVariable", Terminal);

    let uses = |b: &mut MetaModelBuilder, child: TypeId, parents: &[TypeId]| {
        for &p in parents {
            b.add_generalization(child, p).expect("acyclic library");
        }
    };
    let prop = |b: &mut MetaModelBuilder, owner: TypeId, name: &str, kind| {
        b.add_property(owner, name, kind).expect("unique property");
    };
    let assoc = |b: &mut MetaModelBuilder,
                 a: TypeId,
                 bb: TypeId,
                 shape,
                 na: &str,
                 nb: &str,
                 kind: Option<TypeId>| {
        let (end, _) = b
            .add_association(a, bb, shape, na, nb)
            .expect("unique ends");
        if let Some(kind) = kind {
            b.set_association_kind(end, kind).expect("association kind");
        }
    };

    prop(&mut b, anchor, "sourceFile", String);
    prop(&mut b, anchor, "sourceStart", Number);
    prop(&mut b, anchor, "sourceEnd", Number);
    uses(&mut b, sourced, &[anchor]);
    prop(&mut b, sourced, "isStub", Boolean);

    prop(&mut b, named, "name", String);
    uses(&mut b, ty, &[named, referenceable]);
    assoc(
        &mut b,
        typed,
        ty,
        ManyToOne,
        "declaredType",
        "typedEntities",
        None,
    );
    prop(&mut b, modifiers, "visibility", String);
    prop(&mut b, modifiers, "modifiers", Object);

    assoc(
        &mut b,
        with_inheritances,
        with_inheritances,
        ManyToMany,
        "superclasses",
        "subclasses",
        Some(inheritance),
    );
    assoc(
        &mut b,
        with_invocations,
        invocable,
        ManyToMany,
        "outgoingInvocations",
        "incomingInvocations",
        Some(invocation),
    );
    assoc(
        &mut b,
        with_invocations,
        receiver,
        ManyToMany,
        "invocationReceivers",
        "receivingInvocations",
        Some(invocation),
    );
    assoc(
        &mut b,
        with_accesses,
        accessible,
        ManyToMany,
        "accesses",
        "incomingAccesses",
        Some(access),
    );
    assoc(
        &mut b,
        with_references,
        referenceable,
        ManyToMany,
        "references",
        "incomingReferences",
        Some(reference),
    );
    assoc(
        &mut b,
        with_deref,
        invocable,
        ManyToMany,
        "dereferencedInvocations",
        "incomingDereferencedInvocations",
        Some(deref),
    );
    assoc(
        &mut b,
        with_includes,
        with_includes,
        ManyToMany,
        "includedFiles",
        "includingFiles",
        Some(include),
    );
    assoc(
        &mut b,
        with_traits,
        with_traits,
        ManyToMany,
        "usedTraits",
        "traitUsers",
        Some(trait_usage),
    );

    let class_traits = [
        receiver,
        packageable,
        ty,
        with_attributes,
        with_comments,
        with_inheritances,
        with_methods,
    ];
    uses(&mut b, class, &class_traits);
    uses(
        &mut b,
        method,
        &[
            named,
            typed,
            with_invocations,
            invocable,
            with_accesses,
            with_references,
            sourced,
        ],
    );
    uses(
        &mut b,
        function,
        &[
            named,
            typed,
            with_invocations,
            invocable,
            with_accesses,
            with_references,
            with_deref,
            sourced,
        ],
    );
    uses(&mut b, package, &[named, packageable]);
    uses(&mut b, attribute, &[named, typed, accessible, sourced]);
    uses(&mut b, global, &[named, typed, accessible, sourced]);
    prop(&mut b, comment, "content", String);

    assoc(
        &mut b,
        packageable,
        package,
        ContainmentManyToOne,
        "parentPackage",
        "childEntities",
        None,
    );
    assoc(
        &mut b,
        attribute,
        with_attributes,
        ContainmentManyToOne,
        "parentType",
        "attributes",
        None,
    );
    assoc(
        &mut b,
        comment,
        with_comments,
        ContainmentManyToOne,
        "commentedEntity",
        "comments",
        None,
    );
    assoc(
        &mut b,
        method,
        with_methods,
        ContainmentManyToOne,
        "parentType",
        "methods",
        None,
    );
    assoc(
        &mut b,
        function,
        with_functions,
        ContainmentManyToOne,
        "functionOwner",
        "functions",
        None,
    );
    assoc(
        &mut b,
        global,
        with_globals,
        ContainmentManyToOne,
        "parentScope",
        "globalVariables",
        None,
    );
    b
}
