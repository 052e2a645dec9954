use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use facet_bus::dup;
use facet_core::interchange::{export_model, import_metamodel, import_model, import_vcs_log};
use facet_core::{EntityId, Model, Query, TagMetrics};

use crate::session::Session;
use crate::store::Store;

#[derive(Parser, Debug)]
#[command(
    name = "mm",
    version,
    about = "Build, query, tag and measure models of software systems"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Work with meta-model documents.
    Metamodel {
        #[command(subcommand)]
        action: MetamodelAction,
    },
    /// Load a model document and store it in the model home.
    Import {
        #[arg(long)]
        metamodel: String,
        file: PathBuf,
        /// Name to store the model under (default: the file stem).
        #[arg(long = "as")]
        name: Option<String>,
    },
    /// Load a `revision,date,author,message,files` CSV log.
    ImportVcs {
        csv: PathBuf,
        #[arg(long = "as")]
        name: Option<String>,
    },
    /// Run a query pipeline and print `id<TAB>type<TAB>name` per entity.
    Query {
        #[arg(long)]
        model: String,
        pipeline: String,
    },
    /// Tag the result of a pipeline and save the model.
    Tag {
        #[arg(long)]
        model: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        color: Option<String>,
        pipeline: String,
    },
    /// Print the cohesion and coupling of a tag.
    Metrics {
        #[arg(long)]
        model: String,
        #[arg(long)]
        tag: String,
    },
    /// Print a duplication report for anchored entities (all of them, or
    /// those selected by a pipeline).
    Dup {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = dup::DEFAULT_MIN_TOKENS)]
        min_tokens: usize,
        pipeline: Option<String>,
    },
    /// Write a model document (`-` for standard output).
    Export {
        #[arg(long)]
        model: String,
        file: PathBuf,
    },
    /// Start the analysis service.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Models to load; the first one is active.
        #[arg(long, default_value = "demo")]
        model: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum MetamodelAction {
    /// Validate a meta-model document and print its slot tables.
    Check { file: PathBuf },
    /// List the registered meta-models.
    List,
}

pub fn run<I, T>(args: I, store: &Store, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli, store, out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model")
        .to_owned()
}

fn counts(model: &Model) -> String {
    format!("{} entities, {} links", model.len(), model.link_count())
}

fn execute(cli: Cli, store: &Store, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Metamodel {
            action: MetamodelAction::Check { file },
        } => {
            let mm = import_metamodel(&read(&file)?, store.registry())?;
            write!(out, "metamodel {}", mm.name())?;
            if !mm.imports().is_empty() {
                write!(out, " (extends {})", mm.imports().join(", "))?;
            }
            writeln!(out)?;
            for summary in mm.local_summaries() {
                write!(out, "{summary}")?;
            }
        }
        Command::Metamodel {
            action: MetamodelAction::List,
        } => {
            for name in store.registry().names() {
                writeln!(out, "{name}")?;
            }
        }
        Command::Import {
            metamodel,
            file,
            name,
        } => {
            let name = name.unwrap_or_else(|| stem(&file));
            Store::check_name(&name)?;
            store.registry().require(&metamodel)?;
            let text = read(&file)?;
            let model = import_model(&text, store.registry(), &name)?;
            if model.metamodel().name() != metamodel {
                bail!(
                    "document uses meta-model '{}', not '{metamodel}'",
                    model.metamodel().name()
                );
            }
            store.save(&model, &store.home_path(&name))?;
            writeln!(out, "imported {name}: {}", counts(&model))?;
        }
        Command::ImportVcs { csv, name } => {
            let name = name.unwrap_or_else(|| stem(&csv));
            Store::check_name(&name)?;
            let model = import_vcs_log(&read(&csv)?, store.registry(), &name)?;
            store.save(&model, &store.home_path(&name))?;
            writeln!(out, "imported {name}: {}", counts(&model))?;
        }
        Command::Query { model, pipeline } => {
            let (model, _) = store.load(&model)?;
            let result = Query::new(&model).run(&pipeline, None)?;
            for id in result.iter() {
                print_entity(out, &model, id)?;
            }
        }
        Command::Tag {
            model,
            name,
            color,
            pipeline,
        } => {
            let (mut model, path) = store.load(&model)?;
            let result = Query::new(&model).run(&pipeline, None)?;
            model.tag(&name, result.iter())?;
            if color.is_some() {
                model.set_tag_color(&name, color.as_deref())?;
            }
            store.save(&model, &path)?;
            let tag = model.tag_by_name(&name).expect("just tagged");
            writeln!(out, "tag {name}: {} members", tag.members.len())?;
            print_metrics(out, &model, &name)?;
        }
        Command::Metrics { model, tag } => {
            let (model, _) = store.load(&model)?;
            print_metrics(out, &model, &tag)?;
        }
        Command::Dup {
            model,
            min_tokens,
            pipeline,
        } => {
            if min_tokens == 0 {
                bail!("--min-tokens must be at least 1");
            }
            let (model, _) = store.load(&model)?;
            let inputs: Vec<EntityId> = match pipeline {
                Some(p) => Query::new(&model).run(&p, None)?.to_vec(),
                None => model
                    .entity_ids()
                    .filter(|&e| model.source_anchor(e).is_some())
                    .collect(),
            };
            let report = dup::detect(&model, &inputs, min_tokens);
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Export { model, file } => {
            let (model, _) = store.load(&model)?;
            let doc = export_model(&model);
            if file.as_os_str() == "-" {
                writeln!(out, "{doc}")?;
            } else {
                fs::write(&file, doc)
                    .with_context(|| format!("cannot write {}", file.display()))?;
                writeln!(out, "exported {}: {}", model.name(), counts(&model))?;
            }
        }
        Command::Serve { port, host, model } => {
            let mut models = Vec::new();
            for arg in &model {
                models.push(store.load(arg)?.0);
            }
            let first = models
                .first()
                .map(|m| m.name().to_owned())
                .unwrap_or_default();
            let session = Session::new(models).with_active(&first);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::service::serve(session, &host, port))?;
        }
    }
    Ok(())
}

fn print_entity(out: &mut dyn Write, model: &Model, id: EntityId) -> Result<()> {
    let ty = model.type_name(id)?;
    writeln!(out, "{id}\t{ty}\t{}", model.name_of(id).unwrap_or(""))?;
    Ok(())
}

fn print_metrics(out: &mut dyn Write, model: &Model, tag: &str) -> Result<()> {
    let Some(tag) = model.tag_by_name(tag) else {
        bail!("unknown tag '{tag}'");
    };
    let metrics = TagMetrics::of(model, tag);
    writeln!(
        out,
        "cohesion={:?} coupling={}",
        metrics.cohesion(),
        metrics.coupling()
    )?;
    Ok(())
}
