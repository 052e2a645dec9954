//! Where `--model` arguments come from and where changed models go.
//!
//! A model argument is tried, in order, as a path to a model document, as a
//! name under the model home (`$MM_HOME`, default `./.mm`), and as the name
//! of a built-in model.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use facet_core::builtin::MetaModelRegistry;
use facet_core::fixtures::demo_model;
use facet_core::interchange::{export_model, import_model};
use facet_core::Model;

pub const HOME_VAR: &str = "MM_HOME";
pub const BUILTIN_MODELS: [&str; 1] = ["demo"];

pub struct Store {
    home: PathBuf,
    registry: MetaModelRegistry,
}

impl Store {
    pub fn new(home: impl Into<PathBuf>) -> Store {
        Store {
            home: home.into(),
            registry: MetaModelRegistry::with_builtins(),
        }
    }

    pub fn from_env() -> Store {
        Store::new(std::env::var_os(HOME_VAR).map_or_else(|| PathBuf::from(".mm"), PathBuf::from))
    }

    pub fn registry(&self) -> &MetaModelRegistry {
        &self.registry
    }

    pub fn home_path(&self, name: &str) -> PathBuf {
        self.home.join(format!("{name}.json"))
    }

    /// Loads a model and remembers the file it should be saved back to.
    pub fn load(&self, arg: &str) -> Result<(Model, PathBuf)> {
        let as_path = Path::new(arg);
        if as_path.is_file() {
            let name = as_path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(arg)
                .to_owned();
            return Ok((self.read(as_path, &name)?, as_path.to_owned()));
        }
        let home = self.home_path(arg);
        if home.is_file() {
            return Ok((self.read(&home, arg)?, home));
        }
        match arg {
            "demo" => Ok((demo_model(), home)),
            _ => Err(anyhow!("unknown model '{arg}'")),
        }
    }

    fn read(&self, path: &Path, name: &str) -> Result<Model> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Ok(import_model(&text, &self.registry, name)?)
    }

    pub fn save(&self, model: &Model, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        fs::write(path, export_model(model))
            .with_context(|| format!("cannot write {}", path.display()))
    }

    /// Every model reachable by name: built-ins plus documents in the home.
    pub fn names(&self) -> Result<Vec<String>> {
        let mut names: Vec<String> = BUILTIN_MODELS.iter().map(|s| s.to_string()).collect();
        if let Ok(entries) = fs::read_dir(&self.home) {
            for entry in entries {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                        names.push(stem.to_owned());
                    }
                }
            }
        }
        names.sort();
        names.dedup();
        Ok(names)
    }

    pub fn check_name(name: &str) -> Result<()> {
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_alphanumeric() || "-_.".contains(c))
        {
            bail!("invalid model name '{name}'");
        }
        Ok(())
    }
}
