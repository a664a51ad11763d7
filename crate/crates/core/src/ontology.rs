//! Event ontology: event type inventory and argument roles.
//!
//! Loaded from a TOML file:
//!
//! ```toml
//! format_version = 1
//! event_types = ["Protest", "Communicate"]
//!
//! [[roles]]
//! name = "agent"
//! id = 1
//!
//! [[roles]]
//! name = "patient"
//! id = 2
//! ```
//!
//! Role ids must be dense from 1. `agent` and `patient` are mandatory; a
//! `related-event` role enables event-event relation decoding.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AGENT: &str = "agent";
pub const PATIENT: &str = "patient";
pub const RELATED_EVENT: &str = "related-event";

pub const ONTOLOGY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleDef {
    pub name: String,
    pub id: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OntologyFile {
    format_version: u32,
    event_types: Vec<String>,
    roles: Vec<RoleDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    event_types: BTreeSet<String>,
    /// Indexed by `id - 1`.
    roles: Vec<String>,
    role_ids: BTreeMap<String, u32>,
}

impl Ontology {
    pub fn new<T, R>(event_types: T, roles: R) -> Result<Self>
    where
        T: IntoIterator,
        T::Item: Into<String>,
        R: IntoIterator<Item = (String, u32)>,
    {
        let mut types = BTreeSet::new();
        for t in event_types {
            let t = t.into();
            if t.trim().is_empty() || t != t.trim() {
                return Err(Error::Ontology(format!("bad event type name `{t}`")));
            }
            if !types.insert(t.clone()) {
                return Err(Error::Ontology(format!("duplicate event type `{t}`")));
            }
        }
        if types.is_empty() {
            return Err(Error::Ontology("no event types".into()));
        }

        let mut by_id: BTreeMap<u32, String> = BTreeMap::new();
        let mut role_ids = BTreeMap::new();
        for (name, id) in roles {
            if name.trim().is_empty() {
                return Err(Error::Ontology("empty role name".into()));
            }
            if role_ids.insert(name.clone(), id).is_some() {
                return Err(Error::Ontology(format!("duplicate role `{name}`")));
            }
            if by_id.insert(id, name.clone()).is_some() {
                return Err(Error::Ontology(format!("duplicate role id {id}")));
            }
        }
        for (expected, id) in (1u32..).zip(by_id.keys()) {
            if *id != expected {
                return Err(Error::Ontology(format!(
                    "role ids must be dense from 1; missing {expected}"
                )));
            }
        }
        for required in [AGENT, PATIENT] {
            if !role_ids.contains_key(required) {
                return Err(Error::Ontology(format!("missing required role `{required}`")));
            }
        }
        Ok(Ontology {
            event_types: types,
            roles: by_id.into_values().collect(),
            role_ids,
        })
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let file: OntologyFile =
            toml::from_str(src).map_err(|e| Error::Ontology(e.to_string()))?;
        if file.format_version != ONTOLOGY_FORMAT_VERSION {
            return Err(Error::Ontology(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        Ontology::new(
            file.event_types,
            file.roles.into_iter().map(|r| (r.name, r.id)),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        let file = OntologyFile {
            format_version: ONTOLOGY_FORMAT_VERSION,
            event_types: self.event_types.iter().cloned().collect(),
            roles: self
                .roles()
                .map(|(name, id)| RoleDef {
                    name: name.to_string(),
                    id,
                })
                .collect(),
        };
        toml::to_string(&file).expect("ontology serializes")
    }

    pub fn event_types(&self) -> &BTreeSet<String> {
        &self.event_types
    }

    pub fn has_event_type(&self, t: &str) -> bool {
        self.event_types.contains(t)
    }

    /// Roles in id order.
    pub fn roles(&self) -> impl Iterator<Item = (&str, u32)> {
        self.roles.iter().zip(1u32..).map(|(n, id)| (n.as_str(), id))
    }

    pub fn role_id(&self, role: &str) -> Option<u32> {
        self.role_ids.get(role).copied()
    }

    pub fn role_name(&self, id: u32) -> Option<&str> {
        self.roles.get((id as usize).checked_sub(1)?).map(String::as_str)
    }

    pub fn has_role(&self, role: &str) -> bool {
        self.role_ids.contains_key(role)
    }

    pub fn has_event_relations(&self) -> bool {
        self.has_role(RELATED_EVENT)
    }

    /// Roles filled by text spans, i.e. everything except `related-event`.
    pub fn span_roles(&self) -> impl Iterator<Item = (&str, u32)> {
        self.roles().filter(|(n, _)| *n != RELATED_EVENT)
    }
}
