//! `restpark` binary: serve an N-Triples file over the triple-pattern
//! protocol, query a remote endpoint, or run a federation plan.

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use restpark::client::{Client, Endpoint};
use restpark::federation::{run_plan_with_parallelism, BindingTable, QueryPlan};
use restpark::ntriples::{parse_document, serialize_document};
use restpark::server::{Server, ServerError};
use restpark::service::pattern_from_texts;
use restpark::store::{PageRequest, TripleStore, MAX_PAGE_SIZE};
use restpark::{Term, Triple};

/// Transport, protocol, or plan-execution failure.
const EXIT_FAILURE: u8 = 1;
/// Unusable input: bad flags, unreadable files. Matches clap's usage code.
const EXIT_USAGE: u8 = 2;
/// The listen address could not be bound.
const EXIT_BIND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "restpark",
    version,
    about = "Triple-pattern queries over HTTP: serve a dataset, query one, join several"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve an N-Triples file at /restpark
    Serve(ServeArgs),
    /// Query an endpoint and print every match as N-Triples
    Query(QueryArgs),
    /// Execute a federation plan and print the result table
    Demo(DemoArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// N-Triples file to load (bad lines are skipped with a warning)
    #[arg(long, value_name = "FILE")]
    data: PathBuf,

    /// Listen address
    #[arg(long, default_value = "127.0.0.1:8080", value_name = "ADDR")]
    bind: SocketAddr,

    /// Path prefix in front of /restpark, e.g. /dblp
    #[arg(long, default_value = "", value_name = "PATH")]
    mount: String,
}

#[derive(Args)]
struct QueryArgs {
    /// Server base URL, e.g. http://127.0.0.1:8080
    #[arg(long, value_name = "URL")]
    endpoint: String,

    /// Subject: an IRI, or _:label for a blank node
    #[arg(long, value_name = "TERM")]
    subject: Option<String>,

    /// Predicate IRI
    #[arg(long, value_name = "IRI")]
    predicate: Option<String>,

    /// Object: an IRI, _:label, or a quoted literal like '"Tim Berners-Lee"'
    #[arg(long, value_name = "TERM")]
    object: Option<String>,

    /// Fetch only this page instead of walking every page
    #[arg(long, value_name = "N")]
    page: Option<usize>,

    /// Matches per request
    #[arg(long, default_value_t = 100, value_name = "N")]
    page_size: usize,
}

#[derive(Args)]
struct DemoArgs {
    /// Plan document (JSON)
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,

    /// Endpoint for plan steps that name none
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,

    /// Concurrent requests within one plan step
    #[arg(long, default_value_t = 4, value_name = "N")]
    parallelism: usize,

    /// Matches per request while paginating
    #[arg(long, default_value_t = 100, value_name = "N")]
    page_size: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn request(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => cmd_serve(args),
        Command::Query(args) => cmd_query(args),
        Command::Demo(args) => cmd_demo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn cmd_serve(args: ServeArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.data)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.data.display())))?;
    let report = parse_document(&text, false).expect("lenient parsing collects errors instead");
    for error in &report.errors {
        log::warn!(
            "{}: skipping line {}: {}",
            args.data.display(),
            error.line,
            error.message
        );
    }
    log::info!(
        "loaded {} triples from {} ({} bad lines skipped)",
        report.triples.len(),
        args.data.display(),
        report.errors.len()
    );
    let server = Server::new(TripleStore::build(report.triples)).with_mount_prefix(&args.mount);
    server.run(args.bind).map_err(|e| match e {
        ServerError::Bind { .. } => Failure {
            code: EXIT_BIND,
            message: e.to_string(),
        },
        ServerError::Runtime(_) => Failure::request(e.to_string()),
    })
}

fn cmd_query(args: QueryArgs) -> Result<(), Failure> {
    let endpoint = Endpoint::new(&args.endpoint).map_err(|e| Failure::usage(e.to_string()))?;
    let pattern = pattern_from_texts(
        args.subject.as_deref(),
        args.predicate.as_deref(),
        args.object.as_deref(),
    )
    .map_err(|e| Failure::usage(e.to_string()))?;
    if !(1..=MAX_PAGE_SIZE).contains(&args.page_size) {
        return Err(Failure::usage(format!(
            "--page-size must be between 1 and {MAX_PAGE_SIZE}"
        )));
    }

    let client = Client::new().with_page_size(args.page_size);
    let triples: Vec<Triple> = match args.page {
        Some(page) => {
            let request = PageRequest::new(page, args.page_size)
                .map_err(|e| Failure::usage(e.to_string()))?;
            let result = client
                .query_page(&endpoint, &pattern, request)
                .map_err(|e| Failure::request(e.to_string()))?;
            log::info!(
                "page {} of {} total matches",
                result.page,
                result.total_count
            );
            result.triples
        }
        None => client
            .query_all(&endpoint, &pattern)
            .map_err(|e| Failure::request(e.to_string()))?,
    };
    log::info!("{} matches", triples.len());
    print!("{}", serialize_document(&triples));
    Ok(())
}

fn cmd_demo(args: DemoArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.plan)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.plan.display())))?;
    let plan = QueryPlan::from_json(&text).map_err(|e| Failure::request(e.to_string()))?;
    let fallback = args
        .endpoint
        .as_deref()
        .map(Endpoint::new)
        .transpose()
        .map_err(|e| Failure::usage(e.to_string()))?;

    let client = Client::new().with_page_size(args.page_size.clamp(1, MAX_PAGE_SIZE));
    let table = run_plan_with_parallelism(&plan, &client, fallback.as_ref(), args.parallelism)
        .map_err(|e| Failure::request(e.to_string()))?;
    log::info!("{} rows", table.len());
    print_table(&table).map_err(|e| Failure::request(format!("cannot write output: {e}")))
}

/// Write the table twice: aligned columns for people, then one JSON object
/// per row (columns in plan order) for machines, separated by a blank line.
fn print_table(table: &BindingTable) -> io::Result<()> {
    let headers: Vec<String> = table.columns().iter().map(|c| format!("?{c}")).collect();
    let cells: Vec<Vec<String>> = table
        .rows()
        .iter()
        .map(|row| row.iter().map(Term::to_string).collect())
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in &cells {
        for (width, cell) in widths.iter_mut().zip(row) {
            *width = (*width).max(cell.chars().count());
        }
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_row(&mut out, &headers, &widths)?;
    for row in &cells {
        write_row(&mut out, row, &widths)?;
    }
    writeln!(out)?;
    for row in table.rows() {
        writeln!(out, "{}", json_row(table.columns(), row))?;
    }
    Ok(())
}

fn write_row(out: &mut impl Write, cells: &[String], widths: &[usize]) -> io::Result<()> {
    let mut line = String::new();
    for (cell, width) in cells.iter().zip(widths) {
        if !line.is_empty() {
            line.push_str("  ");
        }
        line.push_str(cell);
        line.extend(std::iter::repeat(' ').take(width - cell.chars().count()));
    }
    writeln!(out, "{}", line.trim_end())
}

/// `{"name":"...","birth":"..."}` with values in N-Triples term syntax.
/// Built by hand so the keys keep plan order instead of being sorted.
fn json_row(columns: &[String], row: &[Term]) -> String {
    let mut line = String::from("{");
    for (i, (column, term)) in columns.iter().zip(row).enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&serde_json::to_string(column).expect("strings always serialize"));
        line.push(':');
        line.push_str(&serde_json::to_string(&term.to_string()).expect("strings always serialize"));
    }
    line.push('}');
    line
}
