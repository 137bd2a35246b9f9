//! Versioned prompt templates for the five agent roles.
//!
//! Templates live in plain-text TOML files named `<role>.<version>.toml`;
//! a builtin copy of the v1 set is compiled in so the library works without
//! touching the filesystem. Placeholders are `{lowercase_names}` and every
//! placeholder referenced by a template must be supplied at render time.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::AgentRole;

pub const BUILTIN_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("failed to read template {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid template file {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("template {path} declares role {found}, expected {expected}")]
    RoleMismatch {
        path: String,
        found: String,
        expected: String,
    },
    #[error("placeholder {{{name}}} is not supplied for role {role}")]
    MissingPlaceholder { role: String, name: String },
}

#[derive(Debug, Clone, Deserialize)]
pub struct PromptTemplate {
    pub role: AgentRole,
    pub version: String,
    pub system: String,
    pub user: String,
}

impl PromptTemplate {
    /// Substitutes `{name}` placeholders in the user template.
    pub fn render_user(&self, vars: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
        render(&self.user, vars).map_err(|name| TemplateError::MissingPlaceholder {
            role: self.role.name().to_string(),
            name,
        })
    }
}

/// Scans for `{name}` where name is `[a-z][a-z0-9_]*`; anything else
/// (JSON braces in prompt examples, stray `{`) passes through verbatim.
fn render(template: &str, vars: &BTreeMap<&str, String>) -> Result<String, String> {
    let mut out = String::with_capacity(template.len());
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some((name, end)) = placeholder_at(template, i) {
                match vars.get(name) {
                    Some(value) => out.push_str(value),
                    None => return Err(name.to_string()),
                }
                i = end;
                continue;
            }
        }
        let ch = template[i..].chars().next().expect("in-bounds char");
        out.push(ch);
        i += ch.len_utf8();
    }
    Ok(out)
}

fn placeholder_at(template: &str, open: usize) -> Option<(&str, usize)> {
    let rest = &template[open + 1..];
    let close = rest.find('}')?;
    let name = &rest[..close];
    let mut chars = name.chars();
    let first = chars.next()?;
    if !first.is_ascii_lowercase() {
        return None;
    }
    if !chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
        return None;
    }
    Some((name, open + 1 + close + 1))
}

/// One template per agent role, all at the same version.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub version: String,
    templates: BTreeMap<AgentRole, PromptTemplate>,
}

impl PromptSet {
    /// The compiled-in v1 templates.
    pub fn builtin() -> Self {
        let sources = [
            include_str!("../../../../prompts/propositioner.v1.toml"),
            include_str!("../../../../prompts/coref_resolver.v1.toml"),
            include_str!("../../../../prompts/extractor.v1.toml"),
            include_str!("../../../../prompts/reconstructor.v1.toml"),
            include_str!("../../../../prompts/inferrer.v1.toml"),
        ];
        let mut templates = BTreeMap::new();
        for source in sources {
            let template: PromptTemplate =
                toml::from_str(source).expect("builtin templates are valid");
            templates.insert(template.role, template);
        }
        let set = Self {
            version: BUILTIN_VERSION.to_string(),
            templates,
        };
        assert_eq!(set.templates.len(), AgentRole::ALL.len());
        set
    }

    /// Loads `<role>.<version>.toml` for every role from `dir`.
    pub fn load_dir(dir: &Path, version: &str) -> Result<Self, TemplateError> {
        let mut templates = BTreeMap::new();
        for role in AgentRole::ALL {
            let path = dir.join(format!("{}.{version}.toml", role.file_stem()));
            let display = path.display().to_string();
            let text = fs::read_to_string(&path).map_err(|source| TemplateError::Read {
                path: display.clone(),
                source,
            })?;
            let template: PromptTemplate =
                toml::from_str(&text).map_err(|source| TemplateError::Parse {
                    path: display.clone(),
                    source,
                })?;
            if template.role != role {
                return Err(TemplateError::RoleMismatch {
                    path: display,
                    found: template.role.name().to_string(),
                    expected: role.name().to_string(),
                });
            }
            templates.insert(role, template);
        }
        Ok(Self {
            version: version.to_string(),
            templates,
        })
    }

    pub fn get(&self, role: AgentRole) -> &PromptTemplate {
        self.templates
            .get(&role)
            .expect("PromptSet always holds all five roles")
    }
}
