//! Tags: named, colored entity groups stored alongside the model.
//!
//! A tag takes its id from the same sequence as entities, so ids never
//! collide, but it owns no slot table. In queries and metrics a tag acts as a
//! virtual container holding its members' subtrees.

use std::collections::BTreeSet;

use crate::model::{EntityId, Model, ModelError};
use crate::query::{Direction, Query, QueryResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tag {
    pub id: EntityId,
    pub name: String,
    /// Six hex digits, no leading `#`.
    pub color: Option<String>,
    pub members: BTreeSet<EntityId>,
}

fn check_color(color: &str) -> Result<(), ModelError> {
    if color.len() == 6 && color.chars().all(|c| c.is_ascii_hexdigit()) {
        Ok(())
    } else {
        Err(ModelError::InvalidColor(color.to_owned()))
    }
}

impl Model {
    /// Adds `entities` to the tag called `name`, creating it when needed.
    /// Nothing changes if any entity is not part of the model.
    pub fn tag(
        &mut self,
        name: &str,
        entities: impl IntoIterator<Item = EntityId>,
    ) -> Result<EntityId, ModelError> {
        let entities: Vec<EntityId> = entities.into_iter().collect();
        if let Some(&bad) = entities.iter().find(|e| !self.contains(**e)) {
            return Err(ModelError::ForeignEntity(bad));
        }
        let id = match self.tag_by_name(name) {
            Some(tag) => tag.id,
            None => {
                let id = self.allocate_id();
                self.tags.insert(
                    id,
                    Tag {
                        id,
                        name: name.to_owned(),
                        color: None,
                        members: BTreeSet::new(),
                    },
                );
                id
            }
        };
        self.tags
            .get_mut(&id)
            .expect("tag just resolved")
            .members
            .extend(entities);
        Ok(id)
    }

    /// Removes members; non-members are ignored and the tag is kept even
    /// when it becomes empty.
    pub fn untag(
        &mut self,
        name: &str,
        entities: impl IntoIterator<Item = EntityId>,
    ) -> Result<(), ModelError> {
        let tag = self.tag_mut(name)?;
        for e in entities {
            tag.members.remove(&e);
        }
        Ok(())
    }

    pub fn delete_tag(&mut self, name: &str) -> Result<(), ModelError> {
        let id = self.tag_mut(name)?.id;
        self.tags.remove(&id);
        Ok(())
    }

    pub fn set_tag_color(&mut self, name: &str, color: Option<&str>) -> Result<(), ModelError> {
        if let Some(c) = color {
            check_color(c)?;
        }
        self.tag_mut(name)?.color = color.map(str::to_ascii_uppercase);
        Ok(())
    }

    /// Restores a stored tag under a freshly allocated id.
    pub(crate) fn insert_tag(&mut self, tag: Tag) -> Result<(), ModelError> {
        if let Some(c) = &tag.color {
            check_color(c)?;
        }
        if let Some(&bad) = tag.members.iter().find(|e| !self.contains(**e)) {
            return Err(ModelError::ForeignEntity(bad));
        }
        if self.tag_by_name(&tag.name).is_some() {
            return Err(ModelError::DuplicateTag(tag.name));
        }
        let id = self.allocate_id();
        self.tags.insert(id, Tag { id, ..tag });
        Ok(())
    }

    fn tag_mut(&mut self, name: &str) -> Result<&mut Tag, ModelError> {
        self.tags
            .values_mut()
            .find(|t| t.name == name)
            .ok_or_else(|| ModelError::UnknownTag(name.to_owned()))
    }

    pub fn tag_by_name(&self, name: &str) -> Option<&Tag> {
        self.tags.values().find(|t| t.name == name)
    }

    pub fn tag_by_id(&self, id: EntityId) -> Option<&Tag> {
        self.tags.get(&id)
    }

    /// Tags in creation order.
    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.tags.values()
    }

    /// The members' subtrees, which is what the tag contains when seen as
    /// a package.
    pub fn tag_scope(&self, tag: &Tag) -> BTreeSet<EntityId> {
        tag.members.iter().flat_map(|&m| self.subtree(m)).collect()
    }
}

/// Dependencies from (outgoing) or to (incoming) the tag, member-to-member
/// edges excluded.
pub fn tag_dependencies(model: &Model, tag: &Tag, direction: Direction) -> QueryResult {
    Query::new(model).scope_dependencies(&model.tag_scope(tag), direction, None)
}

/// Internal and external dependency counts of a tag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TagMetrics {
    pub internal: usize,
    pub external: usize,
}

impl TagMetrics {
    pub fn of(model: &Model, tag: &Tag) -> TagMetrics {
        let scope = model.tag_scope(tag);
        let mut metrics = TagMetrics::default();
        for dep in model.dependencies() {
            match (scope.contains(&dep.source), scope.contains(&dep.target)) {
                (true, true) => metrics.internal += 1,
                (false, false) => {}
                _ => metrics.external += 1,
            }
        }
        metrics
    }

    /// `I / (I + E)`, or 0 when the tag has no dependencies at all.
    pub fn cohesion(&self) -> f64 {
        let total = self.internal + self.external;
        if total == 0 {
            0.0
        } else {
            self.internal as f64 / total as f64
        }
    }

    pub fn coupling(&self) -> usize {
        self.external
    }
}
