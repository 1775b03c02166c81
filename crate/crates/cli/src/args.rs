//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Top-level help. The command table is the published contract agents
/// discover with `lore --help`; keep its one-liners unchanged.
pub const HELP: &str = "\
Lore -- Query and author institutional knowledge from git history

Query commands:
  lore context <path>       Full lore summary for a code region
  lore constraints <path>   Active constraints shaping this code
  lore rejected <path>      Previously rejected alternatives
  lore directives <path>    Forward-looking warnings
  lore coverage <path>      Test coverage map
  lore stale [--older-than] Flag outdated assumptions

Authoring commands:
  lore commit               Interactive commit builder
  lore commit --from-json   Commit from structured input
  lore validate             Check recent commits for lore format

coverage lists the Tested/Not-tested claims recorded in commit trailers.
It does not run tests or measure code coverage.

Options:
  --format <human|json>     Output format (default: human)
  --max-count <N>           Consider at most the N newest commits
  --include-merges          Include merge commits
  --older-than <AGE>        Age such as 90d, 12w, 6m or 1y (default: .lore, else 180d)
  --depth <N>               Related: hops followed by context (default: 1)
  --from-json <FILE|->      Read the commit as a JSON document, `-` for stdin
  --strict                  validate: warnings fail too
  -h, --help                Print help; `lore <command> --help` for one command

Exit status:
  0 success, 1 validation failed, 2 usage error,
  3 repository or environment error, 4 invalid input data

Environment:
  LORE_GIT                  git executable to run (default: git)
  NO_COLOR                  Disable colored output
";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "lore",
    version,
    override_help = HELP,
    arg_required_else_help = true,
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// File or directory, relative to the current directory.
    pub path: String,
    /// Consider at most the N newest commits touching the path.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_count: Option<u64>,
    /// Include merge commits.
    #[arg(long)]
    pub include_merges: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full lore summary for a code region
    Context {
        #[command(flatten)]
        query: QueryArgs,
        /// Related: hops to follow; 0 disables expansion.
        #[arg(long, value_name = "N", default_value_t = 1)]
        depth: usize,
    },
    /// Active constraints shaping this code
    Constraints {
        #[command(flatten)]
        query: QueryArgs,
        /// Age after which an entry on a since-modified path is marked stale.
        #[arg(long, value_name = "AGE")]
        older_than: Option<String>,
    },
    /// Previously rejected alternatives
    Rejected {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Forward-looking warnings
    Directives {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Test coverage map: Tested/Not-tested trailer claims, not code coverage
    Coverage {
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Flag outdated assumptions
    Stale {
        /// Limit to one file or directory.
        path: Option<String>,
        /// Minimum age, e.g. 90d, 12w, 6m, 1y.
        #[arg(long, value_name = "AGE")]
        older_than: Option<String>,
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
        max_count: Option<u64>,
        #[arg(long)]
        include_merges: bool,
    },
    /// Interactive commit builder; --from-json commits from structured input
    Commit {
        /// JSON document to commit, `-` for stdin.
        #[arg(long, value_name = "FILE|-")]
        from_json: Option<PathBuf>,
    },
    /// Check recent commits for lore format
    Validate {
        /// Revision range, e.g. origin/main..HEAD.
        range: Option<String>,
        /// Check the N most recent commits (default: .lore, else 20).
        #[arg(long, visible_alias = "max-count", value_name = "N",
              value_parser = clap::value_parser!(u64).range(1..))]
        last: Option<u64>,
        /// Fail on warnings as well as errors.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        include_merges: bool,
    },
}
