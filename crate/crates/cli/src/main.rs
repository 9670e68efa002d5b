//! `hotpie`: command-line front end for HOT-PIE hazard analysis projects.
//!
//! Exit status is 0 on success, 1 on a domain error (named on stderr) and
//! 2 on a usage error.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hotpie_core::model::{Abstraction, Classification, LifecyclePhase};
use hotpie_core::taxonomy::FactorRef;
use hotpie_core::RepresentationLevel;

use crate::commands::EndpointArg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "hotpie", version, about = "Causal-factor hazard analysis with tracked uncertainty")]
pub struct Cli {
    /// Project file; required by every command except init, catalog and serve.
    #[arg(long, global = true)]
    pub project: Option<PathBuf>,
    /// Reference catalog (default: bundled).
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// View-profile document (default: bundled).
    #[arg(long, global = true)]
    pub profiles: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Recorded as the actor of mutations and as the evidence author.
    #[arg(long, global = true, env = "HOTPIE_AUTHOR", default_value = "unknown")]
    pub author: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project file.
    Init(InitArgs),
    #[command(subcommand)]
    Object(ObjectCmd),
    #[command(subcommand)]
    Path(PathCmd),
    #[command(subcommand)]
    Evidence(EvidenceCmd),
    #[command(subcommand)]
    Phase(PhaseCmd),
    /// List the 36 factor-pair prompts between two objects.
    Suggest {
        source: String,
        target: String,
        /// Hide pairs already covered by a path.
        #[arg(long)]
        uncovered_only: bool,
    },
    /// Coverage matrix of the selected views.
    Coverage(ViewArgs),
    /// Factors below the threshold after merging the selected views.
    Gaps {
        #[command(flatten)]
        views: ViewArgs,
        #[arg(long, default_value = "R")]
        threshold: RepresentationLevel,
    },
    /// Plausible paths with no information since before a phase.
    Stale {
        /// Defaults to the current project phase.
        #[arg(long)]
        as_of: Option<LifecyclePhase>,
    },
    /// Markdown session report.
    Report {
        /// Include coverage sections for these views (comma separated).
        #[arg(long, value_delimiter = ',')]
        views: Option<Vec<String>>,
    },
    #[command(subcommand)]
    Export(ExportCmd),
    #[command(subcommand)]
    Stpa(StpaCmd),
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub name: Option<String>,
    /// Start from a bundled example project.
    #[arg(long, value_parser = ["arp4761"])]
    pub example: Option<String>,
    /// Overwrite an existing file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ViewArgs {
    /// View ids, comma separated; all views when omitted.
    #[arg(long, value_delimiter = ',')]
    pub views: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum ObjectCmd {
    Add {
        name: String,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long, default_value = "macro")]
        abstraction: Abstraction,
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
    Ls,
    /// Remove an object no path refers to.
    Rm { object: String },
}

#[derive(Debug, Subcommand)]
pub enum PathCmd {
    /// Endpoints are OBJECT:FACTOR, where FACTOR is a primary (H, Human)
    /// or secondary (H2) factor and OBJECT an id or unique name.
    Add {
        #[arg(long)]
        from: EndpointArg,
        #[arg(long)]
        to: EndpointArg,
        #[arg(long = "keyword")]
        keywords: Vec<String>,
        #[arg(long, default_value = "")]
        narrative: String,
        #[arg(long)]
        initial: Classification,
        /// Defaults to the current project phase.
        #[arg(long)]
        phase: Option<LifecyclePhase>,
    },
    Ls {
        #[arg(long)]
        classification: Option<Classification>,
        /// Only paths whose latest information is from this phase.
        #[arg(long)]
        phase: Option<LifecyclePhase>,
    },
    /// Path details with its evidence history.
    Show { path: String },
}

#[derive(Debug, Subcommand)]
pub enum EvidenceCmd {
    Add {
        path: String,
        #[arg(long)]
        text: String,
        #[arg(long)]
        resulting: Classification,
        /// Defaults to the current project phase.
        #[arg(long)]
        phase: Option<LifecyclePhase>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PhaseCmd {
    Advance { phase: LifecyclePhase },
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    Dot {
        #[arg(long)]
        show_discharged: bool,
    },
    Csv(ViewArgs),
}

#[derive(Debug, Subcommand)]
pub enum StpaCmd {
    /// Create one object per control-structure node and record the mapping.
    Import { structure: PathBuf },
    /// Uncovered prompts for every relation of an imported structure.
    Prompts { structure: PathBuf },
    /// Non-discharged paths between mapped objects, with their disposition.
    Findings,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCmd {
    /// Templates, optionally limited to one factor (H, Human, H2...).
    Ls {
        #[arg(long)]
        factor: Option<FactorRef>,
    },
    Search { query: String },
    /// Print the catalog document.
    Dump,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Directory of project files.
    #[arg(long, default_value = ".")]
    pub root: PathBuf,
    #[arg(long = "cors-origin")]
    pub cors_origins: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report(format);
            ExitCode::from(e.exit_code())
        }
    }
}
