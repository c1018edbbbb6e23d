//! Placeholders, bindings, instantiation and `Extends` composition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{
    check_line, classify_element_line, is_placeholder_name, scan_placeholders, substitute_placeholders, Element,
    ElementPart, ModelError, ModuleInstance, Procedure, ProcedureInput, PromptDocument, Span,
};

/// More than this many bases in one `Extends` chain is an error.
pub const MAX_COMPOSE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("`{0}` is not a placeholder name (expected [A-Z][A-Z0-9_]*)")]
    InvalidName(String),
    #[error("value for {name}: {source}")]
    InvalidValue { name: String, source: ModelError },
    #[error("value for {0} contains a placeholder; escape it as \\<")]
    NestedPlaceholder(String),
}

/// Placeholder values keyed by name (without the angle brackets).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateBindings {
    values: BTreeMap<String, String>,
}

impl TemplateBindings {
    pub fn new<K: Into<String>, V: Into<String>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self, BindingError> {
        let mut out = TemplateBindings::default();
        for (k, v) in pairs {
            out.insert(k, v)?;
        }
        Ok(out)
    }

    /// Adds or replaces a binding.
    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<String>) -> Result<(), BindingError> {
        let (name, value) = (name.into(), value.into());
        if !is_placeholder_name(&name) {
            return Err(BindingError::InvalidName(name));
        }
        if let Err(source) = check_line("binding value", &value) {
            return Err(BindingError::InvalidValue { name, source });
        }
        if !scan_placeholders(&value).is_empty() {
            return Err(BindingError::NestedPlaceholder(name));
        }
        self.values.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries of `other` win.
    pub fn merged(&self, other: &TemplateBindings) -> TemplateBindings {
        let mut values = self.values.clone();
        values.extend(other.values.clone());
        TemplateBindings { values }
    }

    /// Reads a flat JSON object of string values.
    pub fn from_json(source: &str) -> Result<Self, String> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(source).map_err(|e| format!("bindings must be a JSON object of strings: {e}"))?;
        Self::new(map).map_err(|e| e.to_string())
    }
}

/// One place a placeholder appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    /// Index into [`PromptDocument::modules`].
    pub module: usize,
    pub module_name: String,
    pub element: usize,
    pub part: ElementPart,
    /// Character span within the field's text (line is always 1).
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placeholder {
    pub name: String,
    /// In document order.
    pub occurrences: Vec<Occurrence>,
}

/// Every distinct placeholder in the document's modules, sorted by name.
pub fn list_placeholders(doc: &PromptDocument) -> Vec<Placeholder> {
    let mut found: BTreeMap<String, Vec<Occurrence>> = BTreeMap::new();
    for (mi, module) in doc.modules().iter().enumerate() {
        for (ei, element) in module.elements().iter().enumerate() {
            for (part, text) in element.parts() {
                for token in scan_placeholders(text) {
                    found.entry(token.name).or_default().push(Occurrence {
                        module: mi,
                        module_name: module.name().as_str().to_string(),
                        element: ei,
                        part,
                        span: token.span,
                    });
                }
            }
        }
    }
    found.into_iter().map(|(name, occurrences)| Placeholder { name, occurrences }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiated {
    pub document: PromptDocument,
    /// Bound names that do not occur in the document.
    pub unused: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("substitution produced an invalid document: {0}")]
    Invalid(#[from] ModelError),
}

/// Substitutes bound placeholders in every module field. Unbound
/// placeholders and escapes are left as written; bullet texts are
/// reclassified, so a substitution may turn freeform text into an
/// assignment or back.
pub fn instantiate(doc: &PromptDocument, bindings: &TemplateBindings) -> Result<Instantiated, InstantiateError> {
    let sub = |text: &str| substitute_placeholders(text, |n| bindings.get(n));
    let mut modules = Vec::with_capacity(doc.modules().len());
    for module in doc.modules() {
        let mut elements = Vec::with_capacity(module.elements().len());
        for element in module.elements() {
            elements.push(match element {
                Element::Assignment { text, .. } | Element::Freeform { text } => classify_element_line(&sub(text))?,
                Element::Procedure(p) => Element::Procedure(Procedure::new(
                    sub(p.name()),
                    p.input().map(|i| ProcedureInput::new(sub(i.property()), sub(i.value()))).transpose()?,
                    p.actions().iter().map(|a| sub(a)).collect(),
                    p.result().map(sub),
                )?),
            });
        }
        modules.push(ModuleInstance::new(module.name().clone(), elements)?);
    }
    let present: Vec<String> = list_placeholders(doc).into_iter().map(|p| p.name).collect();
    let unused = bindings.names().filter(|n| !present.iter().any(|p| p == n)).map(str::to_string).collect();
    Ok(Instantiated { document: doc.with_modules(modules)?, unused })
}

/// A document found by a [`Resolver`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    /// Identity used for cycle detection, such as a canonical path.
    pub key: String,
    /// Short name used in messages.
    pub label: String,
    pub document: PromptDocument,
}

pub trait Resolver {
    /// Finds the document named by an `Extends` reference written in the
    /// document identified by `referrer_key`.
    fn resolve(&self, reference: &str, referrer_key: &str) -> Result<Resolved, ComposeError>;
}

/// In-memory resolver keyed by reference name.
impl Resolver for HashMap<String, PromptDocument> {
    fn resolve(&self, reference: &str, referrer_key: &str) -> Result<Resolved, ComposeError> {
        self.get(reference)
            .map(|doc| Resolved { key: reference.to_string(), label: reference.to_string(), document: doc.clone() })
            .ok_or_else(|| ComposeError::MissingBase {
                reference: reference.to_string(),
                referrer: referrer_key.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain(pub Vec<String>);

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" → "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("document has no Extends reference")]
    NothingToCompose,
    #[error("cannot find base `{reference}` (referenced from {referrer})")]
    MissingBase { reference: String, referrer: String },
    #[error("cycle: {chain}")]
    Cycle { chain: Chain },
    #[error("Extends chain is deeper than {limit} bases: {chain}")]
    DepthExceeded { limit: usize, chain: Chain },
    #[error("base `{label}` is invalid: {message}")]
    InvalidBase { label: String, message: String },
    #[error("composition produced an invalid document: {0}")]
    Invalid(#[from] ModelError),
}

/// Resolves `child`'s `Extends` chain and merges it root first. A module
/// of a derived document replaces the base module of the same name in the
/// base's position; modules only the derived document has are appended.
/// Name and scenario come from the most derived document that sets them.
pub fn compose(child: &Resolved, resolver: &impl Resolver) -> Result<PromptDocument, ComposeError> {
    if child.document.extends().is_none() {
        return Err(ComposeError::NothingToCompose);
    }
    let mut chain = vec![child.clone()];
    loop {
        let current = chain.last().expect("chain starts non-empty");
        let Some(reference) = current.document.extends() else { break };
        let base = resolver.resolve(reference, &current.key)?;
        let labels = || chain.iter().map(|r| r.label.clone()).chain([base.label.clone()]).collect();
        if chain.iter().any(|r| r.key == base.key) {
            return Err(ComposeError::Cycle { chain: Chain(labels()) });
        }
        if chain.len() > MAX_COMPOSE_DEPTH {
            return Err(ComposeError::DepthExceeded { limit: MAX_COMPOSE_DEPTH, chain: Chain(labels()) });
        }
        chain.push(base);
    }
    let mut docs = chain.into_iter().rev().map(|r| r.document);
    let root = docs.next().expect("chain is non-empty");
    let mut acc = root.with_extends(None)?;
    for derived in docs {
        acc = merge(&acc, &derived)?;
    }
    Ok(acc)
}

fn merge(base: &PromptDocument, derived: &PromptDocument) -> Result<PromptDocument, ModelError> {
    let mut modules: Vec<ModuleInstance> = base
        .modules()
        .iter()
        .map(|b| derived.modules().iter().find(|d| d.name() == b.name()).unwrap_or(b).clone())
        .collect();
    for d in derived.modules() {
        if !base.modules().iter().any(|b| b.name() == d.name()) {
            modules.push(d.clone());
        }
    }
    PromptDocument::new(derived.name(), derived.scenario().or(base.scenario()).cloned(), None, modules)
}
