use std::borrow::Cow;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hotpie_core::analysis::{
    gap_report, merge_coverage, modaf_profiles, parse_profiles, select_views, stale_report,
    suggest_paths, SuggestionPrompt, ViewProfile,
};
use hotpie_core::io::{
    canonical_json, coverage_csv, export_dot, findings_markdown, load_project_file, render_report,
    save_project_file, DotOptions,
};
use hotpie_core::model::{CausalEndpoint, CausalPath, NewEvidence, NewObject, NewPath, OpContext, Project};
use hotpie_core::stpa::{export_findings, import_control_structure, materialize, prompts_for_relations, stored_mapping};
use hotpie_core::taxonomy::{default_catalog, load_catalog, FactorRef, PathTemplate, ReferenceCatalog};
use hotpie_core::{bundled, AnalysisError, IoError, ModelError, StpaError, TaxonomyError};
use serde_json::{json, Value};

use crate::{
    CatalogCmd, Cli, Command, EvidenceCmd, ExportCmd, Format, InitArgs, ObjectCmd, PathCmd, PhaseCmd, ServeArgs,
    StpaCmd, ViewArgs,
};

#[derive(Debug)]
pub enum CliError {
    Domain { name: &'static str, message: String },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Usage(_) => 2,
        }
    }

    pub fn report(&self, format: Format) {
        let (name, message) = match self {
            CliError::Domain { name, message } => (*name, message.as_str()),
            CliError::Usage(m) => ("UsageError", m.as_str()),
        };
        match format {
            Format::Text => eprintln!("error[{name}]: {message}"),
            Format::Json => eprintln!("{}", json!({ "error": name, "message": message })),
        }
    }

    fn domain(name: &'static str, message: impl Into<String>) -> Self {
        CliError::Domain {
            name,
            message: message.into(),
        }
    }
}

macro_rules! domain_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::domain(e.name(), e.to_string())
            }
        }
    )*};
}

domain_error!(ModelError, TaxonomyError, AnalysisError, StpaError, IoError);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::domain("IoError", e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// `OBJECT:FACTOR` as given on the command line; the object is resolved
/// against the project later.
#[derive(Debug, Clone)]
pub struct EndpointArg {
    object: String,
    factor: FactorRef,
}

impl FromStr for EndpointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (object, factor) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected OBJECT:FACTOR, got '{s}'"))?;
        let factor = factor.parse::<FactorRef>().map_err(|e| e.to_string())?;
        Ok(EndpointArg {
            object: object.to_string(),
            factor,
        })
    }
}

impl EndpointArg {
    fn resolve(&self, project: &Project) -> CliResult<CausalEndpoint> {
        let id = project.resolve_object(&self.object)?.id.clone();
        Ok(match self.factor {
            FactorRef::Primary(p) => CausalEndpoint::new(id, p),
            FactorRef::Secondary(s) => CausalEndpoint::secondary(id, s),
        })
    }
}

struct Session {
    project: Option<PathBuf>,
    catalog: Option<PathBuf>,
    profiles: Option<PathBuf>,
    format: Format,
    author: String,
}

/// Held while a mutating command reads, changes and writes the project.
/// The lock lives on a sibling file because saving replaces the project
/// file itself.
struct ProjectLock(File);

impl ProjectLock {
    fn acquire(project: &Path) -> CliResult<Self> {
        let mut name = project.file_name().unwrap_or_default().to_os_string();
        name.push(".lock");
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(project.with_file_name(name))?;
        file.lock()?;
        Ok(ProjectLock(file))
    }
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

impl Session {
    fn project_path(&self) -> CliResult<&Path> {
        self.project
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --project <FILE>".into()))
    }

    fn load(&self) -> CliResult<Project> {
        Ok(load_project_file(self.project_path()?)?)
    }

    fn ctx(&self) -> OpContext {
        OpContext::now(self.author.clone())
    }

    fn mutate<T>(&self, f: impl FnOnce(&mut Project, &OpContext) -> CliResult<T>) -> CliResult<T> {
        let path = self.project_path()?;
        let _lock = ProjectLock::acquire(path)?;
        let mut project = load_project_file(path)?;
        let out = f(&mut project, &self.ctx())?;
        save_project_file(&project, path)?;
        Ok(out)
    }

    fn catalog(&self) -> CliResult<Cow<'static, ReferenceCatalog>> {
        match &self.catalog {
            None => Ok(Cow::Borrowed(default_catalog())),
            Some(p) => Ok(Cow::Owned(load_catalog(File::open(p)?)?)),
        }
    }

    fn profiles(&self) -> CliResult<Cow<'static, [ViewProfile]>> {
        match &self.profiles {
            None => Ok(Cow::Borrowed(modaf_profiles())),
            Some(p) => Ok(Cow::Owned(parse_profiles(&std::fs::read_to_string(p)?)?)),
        }
    }

    fn views(&self, args: &ViewArgs) -> CliResult<Vec<ViewProfile>> {
        let ids: Vec<&str> = args.views.iter().map(String::as_str).collect();
        Ok(select_views(&self.profiles()?, &ids)?)
    }

    fn emit(&self, text: impl AsRef<str>, value: Value) {
        match self.format {
            Format::Text => print!("{}", text.as_ref()),
            Format::Json => print!("{}", canonical_json(&value)),
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    let s = Session {
        project: cli.project,
        catalog: cli.catalog,
        profiles: cli.profiles,
        format: cli.format,
        author: cli.author,
    };
    match cli.command {
        Command::Init(args) => init(&s, args),
        Command::Object(cmd) => object(&s, cmd),
        Command::Path(cmd) => path(&s, cmd),
        Command::Evidence(EvidenceCmd::Add {
            path,
            text,
            resulting,
            phase,
        }) => {
            let author = s.author.clone();
            let updated = s.mutate(|p, ctx| {
                let phase = phase.unwrap_or(p.current_phase());
                let before = p.path(&path).map(|x| x.classification);
                p.record_evidence(
                    &path,
                    NewEvidence {
                        text,
                        author,
                        resulting,
                        phase,
                    },
                    ctx,
                )?;
                let after = p.path(&path).expect("path exists after recording").clone();
                Ok((before, after))
            })?;
            let (before, after) = updated;
            let text = format!(
                "{}: {} -> {}\n",
                after.id,
                before.map(|c| c.to_string()).unwrap_or_default(),
                after.classification
            );
            s.emit(text, json!(after));
            Ok(())
        }
        Command::Phase(PhaseCmd::Advance { phase }) => {
            s.mutate(|p, ctx| Ok(p.advance_phase(phase, ctx)?))?;
            s.emit(format!("phase: {phase}\n"), json!({ "current_phase": phase }));
            Ok(())
        }
        Command::Suggest {
            source,
            target,
            uncovered_only,
        } => {
            let p = s.load()?;
            let catalog = s.catalog()?;
            let a = p.resolve_object(&source)?.id.clone();
            let b = p.resolve_object(&target)?.id.clone();
            let prompts = suggest_paths(&p, &catalog, a.as_str(), b.as_str(), !uncovered_only)?;
            s.emit(prompt_lines(&prompts), json!(prompts));
            Ok(())
        }
        Command::Coverage(args) => {
            let matrix = merge_coverage(&s.views(&args)?)?;
            let mut text = format!("{:<8} H O T P I E\n", "view");
            for row in &matrix.rows {
                writeln!(text, "{:<8} {}", row.view_id, level_codes(row.levels.iter().map(|(_, l)| l.code()))).unwrap();
            }
            writeln!(text, "{:<8} {}", "MERGED", level_codes(matrix.merged.iter().map(|(_, l)| l.code()))).unwrap();
            s.emit(text, json!(matrix));
            Ok(())
        }
        Command::Gaps { views, threshold } => {
            let gaps = gap_report(&s.views(&views)?, threshold);
            let text: String = gaps.iter().map(|(f, l)| format!("{f}: {}\n", l.label())).collect();
            let value: Vec<Value> = gaps.iter().map(|(f, l)| json!({ "factor": f, "level": l })).collect();
            s.emit(text, json!(value));
            Ok(())
        }
        Command::Stale { as_of } => {
            let p = s.load()?;
            let as_of = as_of.unwrap_or(p.current_phase());
            let paths = stale_report(&p, as_of);
            s.emit(path_lines(paths.iter().copied()), json!(paths));
            Ok(())
        }
        Command::Report { views } => {
            let p = s.load()?;
            let selected = match views {
                Some(v) => Some(s.views(&ViewArgs { views: v })?),
                None => None,
            };
            let md = render_report(&p, selected.as_deref());
            s.emit(&md, json!({ "markdown": md }));
            Ok(())
        }
        Command::Export(ExportCmd::Dot { show_discharged }) => {
            let dot = export_dot(&s.load()?, DotOptions { show_discharged });
            print!("{dot}");
            Ok(())
        }
        Command::Export(ExportCmd::Csv(args)) => {
            print!("{}", coverage_csv(&merge_coverage(&s.views(&args)?)?));
            Ok(())
        }
        Command::Stpa(cmd) => stpa(&s, cmd),
        Command::Catalog(cmd) => catalog(&s, cmd),
        Command::Serve(args) => serve(&s, args),
    }
}

fn level_codes<'a>(codes: impl Iterator<Item = &'a str>) -> String {
    codes.collect::<Vec<_>>().join(" ")
}

fn init(s: &Session, args: InitArgs) -> CliResult {
    let mut project = match args.example.as_deref() {
        Some(_) => bundled::arp4761_project(),
        None => {
            let id = args
                .id
                .clone()
                .ok_or_else(|| CliError::Usage("init needs --id (or --example)".into()))?;
            let name = args.name.clone().unwrap_or_else(|| id.clone());
            if name.trim().is_empty() {
                return Err(ModelError::EmptyName.into());
            }
            Project::new(id, name, &s.ctx())
        }
    };
    if args.example.is_some() && (args.id.is_some() || args.name.is_some()) {
        // re-key the example through its file form so it stays validated
        let mut doc: Value = serde_json::from_str(&hotpie_core::save_project(&project)).expect("saved project is JSON");
        if let Some(id) = &args.id {
            doc["id"] = json!(id);
        }
        if let Some(name) = &args.name {
            doc["name"] = json!(name);
        }
        project = hotpie_core::load_project(&doc.to_string())?;
    }
    let path = s
        .project
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", project.id())));
    if path.exists() && !args.force {
        return Err(CliError::domain(
            "ProjectExists",
            format!("{} already exists (use --force to overwrite)", path.display()),
        ));
    }
    save_project_file(&project, &path)?;
    s.emit(
        format!("created {} ({})\n", path.display(), project.id()),
        json!({ "path": path, "id": project.id() }),
    );
    Ok(())
}

fn object(s: &Session, cmd: ObjectCmd) -> CliResult {
    match cmd {
        ObjectCmd::Add {
            name,
            description,
            abstraction,
            tags,
        } => {
            let id = s.mutate(|p, ctx| {
                let mut new = NewObject::named(name)
                    .description(description)
                    .abstraction(abstraction);
                new.tags = tags;
                Ok(p.add_object(new, ctx)?)
            })?;
            s.emit(format!("{id}\n"), json!({ "id": id }));
        }
        ObjectCmd::Ls => {
            let p = s.load()?;
            let mut text = String::new();
            for o in p.objects() {
                writeln!(text, "{}\t{}\t{:?}\t{}", o.id, o.name, o.abstraction, o.tags.join(",")).unwrap();
            }
            s.emit(text, json!(p.objects()));
        }
        ObjectCmd::Rm { object } => {
            let id = s.mutate(|p, ctx| {
                let id = p.resolve_object(&object)?.id.clone();
                p.remove_object(id.as_str(), ctx)?;
                Ok(id)
            })?;
            s.emit(format!("removed {id}\n"), json!({ "removed": id }));
        }
    }
    Ok(())
}

fn path_lines<'a>(paths: impl Iterator<Item = &'a CausalPath>) -> String {
    let mut text = String::new();
    for p in paths {
        writeln!(
            text,
            "{}\t{}\t{} -> {}\t{}",
            p.id,
            p.classification,
            p.source,
            p.target,
            p.keywords.join(", ")
        )
        .unwrap();
    }
    text
}

fn path(s: &Session, cmd: PathCmd) -> CliResult {
    match cmd {
        PathCmd::Add {
            from,
            to,
            keywords,
            narrative,
            initial,
            phase,
        } => {
            let catalog = s.catalog()?;
            for k in catalog.unknown_keywords(&keywords) {
                eprintln!("warning: keyword '{k}' is not in the catalog");
            }
            let id = s.mutate(|p, ctx| {
                let new = NewPath {
                    source: from.resolve(p)?,
                    target: to.resolve(p)?,
                    keywords,
                    narrative,
                    initial,
                    phase: phase.unwrap_or(p.current_phase()),
                };
                Ok(p.add_path(new, ctx)?)
            })?;
            s.emit(format!("{id}\n"), json!({ "id": id }));
        }
        PathCmd::Ls {
            classification,
            phase,
        } => {
            let p = s.load()?;
            let paths: Vec<&CausalPath> = p
                .paths()
                .iter()
                .filter(|x| classification.is_none_or(|c| x.classification == c))
                .filter(|x| phase.is_none_or(|ph| x.last_touched_phase() == ph))
                .collect();
            s.emit(path_lines(paths.iter().copied()), json!(paths));
        }
        PathCmd::Show { path } => {
            let p = s.load()?;
            let cp = p
                .path(&path)
                .ok_or_else(|| ModelError::UnknownPath(path.clone()))?;
            let mut text = path_lines(std::iter::once(cp));
            if !cp.narrative.is_empty() {
                writeln!(text, "  {}", cp.narrative).unwrap();
            }
            writeln!(text, "  created {} as {}", cp.created_phase, cp.initial_classification).unwrap();
            for e in &cp.evidence {
                writeln!(
                    text,
                    "  [{}] {} {}: {} -> {}",
                    e.phase,
                    e.timestamp.format("%Y-%m-%dT%H:%M:%S%.3fZ"),
                    e.author,
                    e.text,
                    e.resulting_classification
                )
                .unwrap();
            }
            s.emit(text, json!(cp));
        }
    }
    Ok(())
}

fn prompt_lines(prompts: &[SuggestionPrompt]) -> String {
    let mut text = String::new();
    for p in prompts {
        let sample: Vec<&str> = p.keywords().take(4).collect();
        let total = p.templates.len();
        let more = if total > sample.len() {
            format!(" (+{} more)", total - sample.len())
        } else {
            String::new()
        };
        writeln!(
            text,
            "{}:{} -> {}:{}\t{}\t{}{}",
            p.source_object,
            p.source_factor,
            p.target_object,
            p.target_factor,
            if p.covered { "covered" } else { "open" },
            sample.join(", "),
            more
        )
        .unwrap();
    }
    text
}

fn stpa(s: &Session, cmd: StpaCmd) -> CliResult {
    match cmd {
        StpaCmd::Import { structure } => {
            let cs = import_control_structure(&std::fs::read_to_string(&structure)?)?;
            let mapping = s.mutate(|p, ctx| Ok(materialize(p, &cs, ctx)))?;
            let text: String = mapping.iter().map(|(n, o)| format!("{n}\t{o}\n")).collect();
            s.emit(text, json!(mapping));
        }
        StpaCmd::Prompts { structure } => {
            let cs = import_control_structure(&std::fs::read_to_string(&structure)?)?;
            let p = s.load()?;
            let prompts = prompts_for_relations(&p, &*s.catalog()?, &cs, &stored_mapping(&p))?;
            s.emit(prompt_lines(&prompts), json!(prompts));
        }
        StpaCmd::Findings => {
            let p = s.load()?;
            let findings = export_findings(&p, &stored_mapping(&p));
            s.emit(findings_markdown(&p, &findings), json!(findings));
        }
    }
    Ok(())
}

fn template_lines(templates: &[&PathTemplate]) -> String {
    templates
        .iter()
        .map(|t| {
            let cites: Vec<String> = t.citations.iter().map(u32::to_string).collect();
            format!("{}\t{}\t[{}]\n", t.secondary.id(), t.keyword, cites.join(","))
        })
        .collect()
}

fn catalog(s: &Session, cmd: CatalogCmd) -> CliResult {
    let catalog = s.catalog()?;
    match cmd {
        CatalogCmd::Ls { factor } => {
            let templates: Vec<&PathTemplate> = match factor {
                Some(f) => catalog.lookup(f),
                None => catalog.templates().iter().collect(),
            };
            s.emit(template_lines(&templates), json!(templates));
        }
        CatalogCmd::Search { query } => {
            let hits = catalog.search(&query);
            s.emit(template_lines(&hits), json!(hits));
        }
        CatalogCmd::Dump => print!("{}", catalog.to_json()),
    }
    Ok(())
}

fn serve(s: &Session, args: ServeArgs) -> CliResult {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let config = hotpie_service::ServiceConfig {
        bind: args.bind,
        root: args.root,
        catalog: s.catalog.clone(),
        profiles: s.profiles.clone(),
        cors_origins: args.cors_origins,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(hotpie_service::serve(config))
        .map_err(|e| CliError::domain("ServeError", e.to_string()))
}
