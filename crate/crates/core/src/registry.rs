//! Inherent modules, scenarios and the scenario/module definition matrix.
//!
//! The built-in portion of the matrix is a constant table. Extension modules
//! and custom scenarios are layered on top through functional updates, so a
//! [`ScenarioMatrix`] value never changes once constructed.

use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::model::{check_line, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("`{0}` collides with the inherent module `{1}`")]
    Collision(String, &'static str),
    #[error("scenario `{0}` collides with a built-in scenario")]
    ScenarioCollision(String),
    #[error("extension `{0}` is already registered with different scenarios")]
    DuplicateRegistration(String),
    #[error("scenario `{0}` is already registered")]
    DuplicateScenario(String),
    #[error("extension `{0}` must list at least one scenario or \"all\"")]
    EmptyScope(String),
    #[error("scenario `{scenario}` lists unknown module `{module}`")]
    UnknownModule { scenario: String, module: String },
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("invalid registry file: {0}")]
    File(String),
}

/// The eleven predefined modules, in the column order of the definition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InherentModule {
    Profile,
    Constraint,
    Goal,
    Initialization,
    Example,
    Workflow,
    Skill,
    Suggestion,
    Background,
    Style,
    OutputFormat,
}

impl InherentModule {
    pub const ALL: [InherentModule; 11] = [
        InherentModule::Profile,
        InherentModule::Constraint,
        InherentModule::Goal,
        InherentModule::Initialization,
        InherentModule::Example,
        InherentModule::Workflow,
        InherentModule::Skill,
        InherentModule::Suggestion,
        InherentModule::Background,
        InherentModule::Style,
        InherentModule::OutputFormat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InherentModule::Profile => "Profile",
            InherentModule::Constraint => "Constraint",
            InherentModule::Goal => "Goal",
            InherentModule::Initialization => "Initialization",
            InherentModule::Example => "Example",
            InherentModule::Workflow => "Workflow",
            InherentModule::Skill => "Skill",
            InherentModule::Suggestion => "Suggestion",
            InherentModule::Background => "Background",
            InherentModule::Style => "Style",
            InherentModule::OutputFormat => "OutputFormat",
        }
    }

    /// Morphological variants and the matrix column abbreviations. Matching is
    /// case-insensitive and otherwise exact.
    pub fn aliases(self) -> &'static [&'static str] {
        match self {
            InherentModule::Profile => &["Profiles", "Prof", "Prof."],
            InherentModule::Constraint => &["Constraints", "Cons", "Cons."],
            InherentModule::Goal => &["Goals"],
            InherentModule::Initialization => &["Initialisation", "Init", "Init."],
            InherentModule::Example => &["Examples", "Ex", "Ex."],
            InherentModule::Workflow => &["Workflows", "Wkflo", "Wkflo."],
            InherentModule::Skill => &["Skills"],
            InherentModule::Suggestion => &["Suggestions", "Sug", "Sug."],
            InherentModule::Background => &["Backgrounds", "Bkgrd", "Bkgrd."],
            InherentModule::Style => &["Styles"],
            InherentModule::OutputFormat => &["Output Format", "Output-Format", "Outf", "Outf."],
        }
    }

    /// Position in the canonical module order.
    pub fn column(self) -> usize {
        self as usize
    }

    /// Resolves a canonical name or alias (case-insensitive, surrounding
    /// whitespace ignored).
    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.trim();
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name) || m.aliases().iter().any(|a| a.eq_ignore_ascii_case(name)))
    }

    /// Returns the module whose name or alias matches `name` once case,
    /// punctuation, whitespace and a plural `s` are disregarded.
    pub fn loosely_matching(name: &str) -> Option<Self> {
        let key = loose_key(name);
        if key.is_empty() {
            return None;
        }
        Self::ALL.into_iter().find(|m| loose_key(m.name()) == key || m.aliases().iter().any(|a| loose_key(a) == key))
    }
}

impl fmt::Display for InherentModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn loose_key(s: &str) -> String {
    let mut key: String = s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
    if key.len() > 1 && key.ends_with('s') {
        key.pop();
    }
    key
}

/// Normalised comparison key for scenario names: case, spaces, hyphens and
/// underscores are ignored.
fn scenario_key(s: &str) -> String {
    s.chars().filter(|c| !matches!(c, ' ' | '-' | '_')).flat_map(char::to_lowercase).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinScenario {
    Writing,
    RolePlaying,
    Entertainment,
    SupplementaryLearning,
    PromptOptimisation,
    PromptHacking,
    Drawing,
    BusinessOperation,
}

impl BuiltinScenario {
    pub const ALL: [BuiltinScenario; 8] = [
        BuiltinScenario::Writing,
        BuiltinScenario::RolePlaying,
        BuiltinScenario::Entertainment,
        BuiltinScenario::SupplementaryLearning,
        BuiltinScenario::PromptOptimisation,
        BuiltinScenario::PromptHacking,
        BuiltinScenario::Drawing,
        BuiltinScenario::BusinessOperation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinScenario::Writing => "Writing",
            BuiltinScenario::RolePlaying => "RolePlaying",
            BuiltinScenario::Entertainment => "Entertainment",
            BuiltinScenario::SupplementaryLearning => "SupplementaryLearning",
            BuiltinScenario::PromptOptimisation => "PromptOptimisation",
            BuiltinScenario::PromptHacking => "PromptHacking",
            BuiltinScenario::Drawing => "Drawing",
            BuiltinScenario::BusinessOperation => "BusinessOperation",
        }
    }

    fn row(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Builtin(BuiltinScenario),
    Custom(String),
}

impl ScenarioName {
    /// Resolves built-in names loosely ("Role-playing", "role playing") and
    /// treats anything else as a custom name.
    pub fn parse(name: &str) -> Result<Self, RegistryError> {
        let name = name.trim();
        check_line("scenario", name)?;
        let key = scenario_key(name);
        Ok(BuiltinScenario::ALL
            .into_iter()
            .find(|b| scenario_key(b.name()) == key)
            .map(ScenarioName::Builtin)
            .unwrap_or_else(|| ScenarioName::Custom(name.to_string())))
    }

    pub fn as_str(&self) -> &str {
        match self {
            ScenarioName::Builtin(b) => b.name(),
            ScenarioName::Custom(s) => s,
        }
    }

    fn key(&self) -> String {
        scenario_key(self.as_str())
    }
}

impl From<BuiltinScenario> for ScenarioName {
    fn from(b: BuiltinScenario) -> Self {
        ScenarioName::Builtin(b)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

use InherentModule as M;

/// Modules *not* designed for each built-in scenario; every other cell of the
/// 8 x 11 table is checked.
const UNDEFINED: [&[InherentModule]; 8] = [
    &[M::Suggestion],
    &[M::Workflow, M::OutputFormat],
    &[M::Workflow, M::Background, M::OutputFormat],
    &[],
    &[M::Skill, M::Background, M::Style],
    &[M::Skill, M::Background, M::Style],
    &[M::Skill, M::Suggestion, M::OutputFormat],
    &[M::Style],
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioScope {
    All,
    Only(Vec<ScenarioName>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionModuleDecl {
    pub name: String,
    pub description: String,
    pub scenarios: ScenarioScope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CustomScenario {
    name: String,
    /// Inherent modules resolved to canonical names; anything else is an
    /// extension name checked by [`ScenarioMatrix::validate`].
    defined: Vec<String>,
}

/// A module as listed by [`ScenarioMatrix::modules_for`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefinedModule {
    Inherent(InherentModule),
    Extension(String),
}

impl DefinedModule {
    pub fn name(&self) -> &str {
        match self {
            DefinedModule::Inherent(m) => m.name(),
            DefinedModule::Extension(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioMatrix {
    extensions: Vec<ExtensionModuleDecl>,
    custom: Vec<CustomScenario>,
}

/// The built-in scenario/module matrix with nothing registered.
pub fn builtin_matrix() -> ScenarioMatrix {
    ScenarioMatrix::default()
}

impl ScenarioMatrix {
    pub fn builtin_defined(scenario: BuiltinScenario, module: InherentModule) -> bool {
        !UNDEFINED[scenario.row()].contains(&module)
    }

    /// All scenarios: the eight built-ins followed by custom ones in
    /// registration order.
    pub fn scenarios(&self) -> Vec<ScenarioName> {
        BuiltinScenario::ALL
            .into_iter()
            .map(ScenarioName::Builtin)
            .chain(self.custom.iter().map(|c| ScenarioName::Custom(c.name.clone())))
            .collect()
    }

    pub fn extensions(&self) -> &[ExtensionModuleDecl] {
        &self.extensions
    }

    pub fn extension(&self, name: &str) -> Option<&ExtensionModuleDecl> {
        let name = name.trim();
        self.extensions.iter().find(|e| e.name.eq_ignore_ascii_case(name))
    }

    /// Registration index of an extension module.
    pub fn extension_position(&self, name: &str) -> Option<usize> {
        let name = name.trim();
        self.extensions.iter().position(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn has_scenario(&self, scenario: &ScenarioName) -> bool {
        match scenario {
            ScenarioName::Builtin(_) => true,
            ScenarioName::Custom(_) => self.find_custom(scenario).is_some(),
        }
    }

    fn find_custom(&self, scenario: &ScenarioName) -> Option<&CustomScenario> {
        let key = scenario.key();
        self.custom.iter().find(|c| scenario_key(&c.name) == key)
    }

    /// Whether `module` (canonical name, alias or extension name) is defined
    /// for `scenario`.
    pub fn is_defined(&self, scenario: &ScenarioName, module: &str) -> Result<bool, RegistryError> {
        let custom = match scenario {
            ScenarioName::Builtin(_) => None,
            ScenarioName::Custom(name) => {
                Some(self.find_custom(scenario).ok_or_else(|| RegistryError::UnknownScenario(name.clone()))?)
            }
        };
        if let Some(inherent) = InherentModule::from_name(module) {
            return Ok(match (scenario, custom) {
                (ScenarioName::Builtin(b), _) => Self::builtin_defined(*b, inherent),
                (_, Some(c)) => c.defined.iter().any(|d| d == inherent.name()),
                _ => false,
            });
        }
        let Some(ext) = self.extension(module) else {
            return Ok(false);
        };
        let listed = match &ext.scenarios {
            ScenarioScope::All => true,
            ScenarioScope::Only(list) => list.iter().any(|s| s.key() == scenario.key()),
        };
        let in_custom = custom.is_some_and(|c| c.defined.iter().any(|d| d.eq_ignore_ascii_case(&ext.name)));
        Ok(listed || in_custom)
    }

    /// Modules defined for a scenario: inherent ones in canonical order, then
    /// extensions in registration order.
    pub fn modules_for(&self, scenario: &ScenarioName) -> Result<Vec<DefinedModule>, RegistryError> {
        let mut out = Vec::new();
        for m in InherentModule::ALL {
            if self.is_defined(scenario, m.name())? {
                out.push(DefinedModule::Inherent(m));
            }
        }
        for ext in &self.extensions {
            if self.is_defined(scenario, &ext.name)? {
                out.push(DefinedModule::Extension(ext.name.clone()));
            }
        }
        Ok(out)
    }

    /// Returns a new matrix with `decl` registered. Re-registering an
    /// identical declaration is a no-op.
    pub fn register_extension(&self, decl: ExtensionModuleDecl) -> Result<ScenarioMatrix, RegistryError> {
        let name = decl.name.trim();
        check_line("extension name", name)?;
        if let Some(m) = InherentModule::from_name(name) {
            return Err(RegistryError::Collision(name.to_string(), m.name()));
        }
        if let ScenarioScope::Only(list) = &decl.scenarios {
            if list.is_empty() {
                return Err(RegistryError::EmptyScope(name.to_string()));
            }
            if let Some(unknown) = list.iter().find(|s| !self.has_scenario(s)) {
                return Err(RegistryError::UnknownScenario(unknown.to_string()));
            }
        }
        if let Some(existing) = self.extension(name) {
            return if same_scope(&existing.scenarios, &decl.scenarios) {
                Ok(self.clone())
            } else {
                Err(RegistryError::DuplicateRegistration(name.to_string()))
            };
        }
        let mut next = self.clone();
        next.extensions.push(ExtensionModuleDecl { name: name.to_string(), ..decl });
        Ok(next)
    }

    /// Returns a new matrix with a custom scenario whose defined modules are
    /// `defined`. Extension names may be registered afterwards; call
    /// [`ScenarioMatrix::validate`] once everything is in place.
    pub fn register_scenario(&self, name: &str, defined: &[String]) -> Result<ScenarioMatrix, RegistryError> {
        let scenario = ScenarioName::parse(name)?;
        if let ScenarioName::Builtin(_) = scenario {
            return Err(RegistryError::ScenarioCollision(name.trim().to_string()));
        }
        if self.find_custom(&scenario).is_some() {
            return Err(RegistryError::DuplicateScenario(scenario.to_string()));
        }
        let defined = defined
            .iter()
            .map(|d| match InherentModule::from_name(d) {
                Some(m) => m.name().to_string(),
                None => d.trim().to_string(),
            })
            .collect();
        let mut next = self.clone();
        next.custom.push(CustomScenario { name: scenario.to_string(), defined });
        Ok(next)
    }

    /// Checks that every module listed by a custom scenario is inherent or a
    /// registered extension.
    pub fn validate(&self) -> Result<(), RegistryError> {
        for c in &self.custom {
            for d in &c.defined {
                if InherentModule::from_name(d).is_none() && self.extension(d).is_none() {
                    return Err(RegistryError::UnknownModule { scenario: c.name.clone(), module: d.clone() });
                }
            }
        }
        Ok(())
    }

    /// Loads a registry declaration file on top of the built-in matrix.
    pub fn from_registry_json(source: &str) -> Result<ScenarioMatrix, RegistryError> {
        let file: RegistryFile = serde_json::from_str(source).map_err(|e| RegistryError::File(e.to_string()))?;
        let mut matrix = builtin_matrix();
        for s in &file.scenarios {
            matrix = matrix.register_scenario(&s.name, &s.defined)?;
        }
        for m in file.modules {
            let scenarios = match m.scenarios {
                ScopeRepr::Marker(marker) if marker == "all" => ScenarioScope::All,
                ScopeRepr::Marker(other) => {
                    return Err(RegistryError::File(format!(
                        "module `{}`: scenarios must be a list or \"all\", found \"{other}\"",
                        m.name
                    )))
                }
                ScopeRepr::List(list) => {
                    ScenarioScope::Only(list.iter().map(|s| ScenarioName::parse(s)).collect::<Result<_, _>>()?)
                }
            };
            matrix = matrix.register_extension(ExtensionModuleDecl {
                name: m.name,
                description: m.description,
                scenarios,
            })?;
        }
        matrix.validate()?;
        Ok(matrix)
    }
}

fn same_scope(a: &ScenarioScope, b: &ScenarioScope) -> bool {
    match (a, b) {
        (ScenarioScope::All, ScenarioScope::All) => true,
        (ScenarioScope::Only(x), ScenarioScope::Only(y)) => {
            let mut x: Vec<_> = x.iter().map(ScenarioName::key).collect();
            let mut y: Vec<_> = y.iter().map(ScenarioName::key).collect();
            x.sort();
            x.dedup();
            y.sort();
            y.dedup();
            x == y
        }
        _ => false,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    modules: Vec<ModuleRepr>,
    #[serde(default)]
    scenarios: Vec<ScenarioRepr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleRepr {
    name: String,
    #[serde(default)]
    description: String,
    scenarios: ScopeRepr,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScopeRepr {
    Marker(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRepr {
    name: String,
    defined: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pricing() -> ExtensionModuleDecl {
        ExtensionModuleDecl {
            name: "Pricing".into(),
            description: "price lists".into(),
            scenarios: ScenarioScope::Only(vec![BuiltinScenario::BusinessOperation.into()]),
        }
    }

    #[test]
    fn spot_checks() {
        let m = builtin_matrix();
        let sl = BuiltinScenario::SupplementaryLearning.into();
        assert!(m.is_defined(&sl, "Workflow").unwrap());
        assert!(!m.is_defined(&BuiltinScenario::Writing.into(), "Suggestion").unwrap());
        assert!(!m.is_defined(&BuiltinScenario::RolePlaying.into(), "Workflow").unwrap());
        assert!(m.is_defined(&BuiltinScenario::Drawing.into(), "Style").unwrap());
        assert!(m.is_defined(&BuiltinScenario::Drawing.into(), "style").unwrap());
        assert!(!m.is_defined(&sl, "Pricing").unwrap());
    }

    #[test]
    fn unknown_scenario() {
        let m = builtin_matrix();
        let err = m.is_defined(&ScenarioName::Custom("Cooking".into()), "Goal").unwrap_err();
        assert_eq!(err, RegistryError::UnknownScenario("Cooking".into()));
    }

    #[test]
    fn register_pricing() {
        let m = builtin_matrix().register_extension(pricing()).unwrap();
        for s in BuiltinScenario::ALL {
            assert_eq!(m.is_defined(&s.into(), "Pricing").unwrap(), s == BuiltinScenario::BusinessOperation);
        }
        // identical re-registration is accepted, conflicting is not
        assert_eq!(m.register_extension(pricing()).unwrap(), m);
        let conflicting = ExtensionModuleDecl { scenarios: ScenarioScope::All, ..pricing() };
        assert_eq!(
            m.register_extension(conflicting).unwrap_err(),
            RegistryError::DuplicateRegistration("Pricing".into())
        );
    }

    #[test]
    fn register_collisions() {
        let m = builtin_matrix();
        for name in ["Profile", "profile", "Constraints", "Output Format", "Init"] {
            let decl =
                ExtensionModuleDecl { name: name.into(), description: String::new(), scenarios: ScenarioScope::All };
            assert!(matches!(m.register_extension(decl), Err(RegistryError::Collision(..))), "{name}");
        }
        let empty = ExtensionModuleDecl { scenarios: ScenarioScope::Only(vec![]), ..pricing() };
        assert!(matches!(m.register_extension(empty), Err(RegistryError::EmptyScope(_))));
    }

    #[test]
    fn register_global() {
        let m = builtin_matrix()
            .register_extension(ExtensionModuleDecl {
                name: "Safety".into(),
                description: String::new(),
                scenarios: ScenarioScope::All,
            })
            .unwrap();
        let hits = BuiltinScenario::ALL.into_iter().filter(|s| m.is_defined(&(*s).into(), "Safety").unwrap()).count();
        assert_eq!(hits, 8);
    }

    #[test]
    fn alias_resolution_is_a_function() {
        let mut seen = std::collections::HashMap::new();
        for m in InherentModule::ALL {
            for alias in std::iter::once(m.name()).chain(m.aliases().iter().copied()) {
                let prev = seen.insert(alias.to_ascii_lowercase(), m);
                assert!(prev.is_none() || prev == Some(m), "alias {alias} maps twice");
                assert_eq!(InherentModule::from_name(alias), Some(m));
            }
        }
        assert_eq!(InherentModule::from_name("Rules"), None);
    }

    #[test]
    fn loose_matching() {
        assert_eq!(InherentModule::loosely_matching("Work Flow"), Some(InherentModule::Workflow));
        assert_eq!(InherentModule::loosely_matching("output_formats"), Some(InherentModule::OutputFormat));
        assert_eq!(InherentModule::loosely_matching("Pricing"), None);
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!(ScenarioName::parse("Role-playing").unwrap(), ScenarioName::Builtin(BuiltinScenario::RolePlaying));
        assert_eq!(
            ScenarioName::parse("Supplementary Learning").unwrap(),
            ScenarioName::Builtin(BuiltinScenario::SupplementaryLearning)
        );
        assert_eq!(ScenarioName::parse("Cooking").unwrap(), ScenarioName::Custom("Cooking".into()));
    }

    #[test]
    fn custom_scenarios() {
        let m = builtin_matrix()
            .register_scenario("Cooking", &["Profile".into(), "goals".into(), "Recipe".into()])
            .unwrap();
        assert_eq!(
            m.validate(),
            Err(RegistryError::UnknownModule { scenario: "Cooking".into(), module: "Recipe".into() })
        );
        let m = m
            .register_extension(ExtensionModuleDecl {
                name: "Recipe".into(),
                description: String::new(),
                scenarios: ScenarioScope::Only(vec![ScenarioName::Custom("cooking".into())]),
            })
            .unwrap();
        m.validate().unwrap();
        let cooking = ScenarioName::Custom("Cooking".into());
        let names: Vec<_> = m.modules_for(&cooking).unwrap().iter().map(|d| d.name().to_string()).collect();
        assert_eq!(names, ["Profile", "Goal", "Recipe"]);
        assert!(matches!(m.register_scenario("Drawing", &[]), Err(RegistryError::ScenarioCollision(_))));
        assert!(matches!(m.register_scenario("COOKING", &[]), Err(RegistryError::DuplicateScenario(_))));
    }

    #[test]
    fn registry_file() {
        let src = r#"{
            "modules": [
                {"name": "Pricing", "description": "prices", "scenarios": ["BusinessOperation", "Cooking"]},
                {"name": "Safety", "description": "", "scenarios": "all"}
            ],
            "scenarios": [{"name": "Cooking", "defined": ["Profile", "Goal"]}]
        }"#;
        let m = ScenarioMatrix::from_registry_json(src).unwrap();
        let cooking = ScenarioName::Custom("Cooking".into());
        assert!(m.is_defined(&cooking, "Pricing").unwrap());
        assert!(m.is_defined(&cooking, "Safety").unwrap());
        assert!(!m.is_defined(&cooking, "Style").unwrap());
        assert_eq!(m.extension_position("safety"), Some(1));

        let bad = r#"{"modules": [{"name": "X", "description": "", "scenarios": "some"}]}"#;
        assert!(matches!(ScenarioMatrix::from_registry_json(bad), Err(RegistryError::File(_))));
    }
}
