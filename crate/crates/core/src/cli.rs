//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 when an `--expect-*` assertion fails, 2 on usage or IO errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::benchkit::{
    consistency_vector, read_answers, roundtrip_report, synthesis_matrix, visibility_vector,
    CONSISTENCY_CAVEAT,
};
use crate::census::{census, census_rows, diff, diff_rows, rows_to_csv, rows_to_markdown};
use crate::geomcheck::{
    check_validity, classify_tuple, context_precision, evaluate_or_hidden, suite_entries,
    EvalOptions, DEFAULT_SEGMENTS,
};
use crate::geomgen::{generate_geometry_suite, SuiteConfig, DEFAULT_PRECISION, DEFAULT_SPACING};
use crate::georef::detect_georef;
use crate::schema::{SchemaVersion, TypeRegistry};
use crate::spf::{parse_spf, write_spf, InstanceGraph};

/// Fixed clock for generation, RFC 3339 or Unix seconds.
pub const TIMESTAMP_ENV: &str = "IFCAUDIT_TIMESTAMP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
    Plain,
}

#[derive(Debug, Parser)]
#[command(name = "ifcaudit", version, about = "Audit IFC STEP physical files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a file and report its header and diagnostics.
    Parse {
        file: PathBuf,
        /// Also write the file back out in normalized form.
        #[arg(long)]
        rewrite: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Count instances per type.
    Census {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the census of an export with its reference.
    Diff {
        reference: PathBuf,
        exported: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Exit 1 if any type count changed.
        #[arg(long)]
        expect_unchanged: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Detect levels of georeferencing.
    Georef {
        file: PathBuf,
        /// Override the schema declared in the file header.
        #[arg(long, value_parser = parse_schema)]
        schema: Option<SchemaVersion>,
        #[command(flatten)]
        output: Output,
    },
    /// Write the geometry conformance suite.
    Generate {
        #[arg(long, value_parser = parse_schema)]
        schema: SchemaVersion,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SPACING)]
        spacing: f64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: f64,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Add the extra item with a depth below the precision.
        #[arg(long)]
        below_precision: bool,
    },
    /// Check validity and evaluate every item of a suite file.
    Check {
        file: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Exit 1 if a verdict disagrees with the manifest.
        #[arg(long, requires = "manifest")]
        expect_manifest: bool,
        #[arg(long, default_value_t = DEFAULT_SEGMENTS)]
        segments: usize,
        /// Dump each mesh as an ASCII triangle list into this directory.
        #[arg(long)]
        mesh_dir: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Interoperability and benchmark reports.
    Report {
        #[command(subcommand)]
        report: ReportCommand,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Compare an exported model with the model it came from.
    Roundtrip {
        reference: PathBuf,
        exported: PathBuf,
        /// Exit 1 unless the round trip left the model unchanged.
        #[arg(long)]
        expect_unchanged: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Aggregate benchmark answers (CSV or JSON lines).
    Answers {
        records: PathBuf,
        /// Directory for synthesis.md, scores.csv and metrics.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_schema(s: &str) -> Result<SchemaVersion, String> {
    s.parse()
        .map_err(|e: crate::schema::SchemaError| e.to_string())
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    timestamp: Option<String>,
}

impl Io<'_> {
    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "{msg}");
    }

    fn emit(&mut self, output: &Output, text: &str) -> Result<(), Failure> {
        match &output.out {
            Some(path) => write_file(path, text.as_bytes()),
            None => {
                self.stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<InstanceGraph, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_spf(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

/// Serializes through `Value` so object keys come out sorted.
fn to_json<T: serde::Serialize>(v: &T) -> String {
    pretty(&serde_json::to_value(v).expect("report types serialize"))
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(secs) = s.parse::<i64>() {
        return DateTime::from_timestamp(secs, 0)
            .ok_or_else(|| format!("timestamp {s} out of range"));
    }
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| format!("{TIMESTAMP_ENV}={s:?}: {e}"))
}

/// Runs with the process environment and standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let timestamp = std::env::var(TIMESTAMP_ENV).ok();
    run_with(
        args,
        timestamp,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// Runs with explicit streams and clock setting.
pub fn run_with<I, T>(
    args: I,
    timestamp: Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let mut io = Io {
        stdout,
        stderr,
        timestamp,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            io.note(&format!("error: {msg}"));
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, io: &mut Io) -> Outcome {
    match command {
        Command::Parse {
            file,
            rewrite,
            output,
        } => cmd_parse(&file, rewrite.as_deref(), &output, io),
        Command::Census {
            file,
            format,
            output,
        } => cmd_census(&file, format, &output, io),
        Command::Diff {
            reference,
            exported,
            format,
            expect_unchanged,
            output,
        } => cmd_diff(&reference, &exported, format, expect_unchanged, &output, io),
        Command::Georef {
            file,
            schema,
            output,
        } => {
            let graph = load(&file)?;
            let schema = match schema.or_else(|| SchemaVersion::from_header(graph.header())) {
                Some(s) => s,
                None => {
                    io.note("warning: no recognised FILE_SCHEMA; reading as IFC2X3");
                    SchemaVersion::Ifc2x3
                }
            };
            let report = detect_georef(&graph, schema);
            io.emit(&output, &pretty(&report.to_json()))?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            schema,
            out,
            spacing,
            precision,
            manifest,
            below_precision,
        } => {
            let timestamp = match &io.timestamp {
                Some(t) => parse_timestamp(t)?,
                None => crate::geomgen::default_timestamp(),
            };
            let config = SuiteConfig {
                spacing,
                precision,
                timestamp,
                with_below_precision: below_precision,
            };
            let (graph, m) = generate_geometry_suite(schema, &config)?;
            write_file(&out, &write_spf(&graph))?;
            if let Some(path) = manifest {
                write_file(&path, to_json(&m).as_bytes())?;
            }
            io.note(&format!(
                "wrote {} items to {}",
                m.items.len(),
                out.display()
            ));
            Ok(EXIT_OK)
        }
        Command::Check {
            file,
            manifest,
            expect_manifest,
            segments,
            mesh_dir,
            output,
        } => cmd_check(
            &file,
            manifest.as_deref(),
            expect_manifest,
            segments,
            mesh_dir.as_deref(),
            &output,
            io,
        ),
        Command::Report { report } => match report {
            ReportCommand::Roundtrip {
                reference,
                exported,
                expect_unchanged,
                output,
            } => {
                let r = roundtrip_report(
                    &TypeRegistry::default(),
                    &load(&reference)?,
                    &load(&exported)?,
                );
                io.emit(&output, &to_json(&r))?;
                Ok(if expect_unchanged && !r.unchanged {
                    io.note("round trip changed the model");
                    EXIT_FINDING
                } else {
                    EXIT_OK
                })
            }
            ReportCommand::Answers { records, out } => cmd_answers(&records, out.as_deref(), io),
        },
    }
}

fn cmd_parse(file: &Path, rewrite: Option<&Path>, output: &Output, io: &mut Io) -> Outcome {
    let graph = load(file)?;
    for d in graph.diagnostics() {
        io.note(&format!("diagnostic: {d:?}"));
    }
    if let Some(path) = rewrite {
        write_file(path, &write_spf(&graph))?;
    }
    let v = json!({
        "file_schema": graph.header().file_schema,
        "schema": SchemaVersion::from_header(graph.header()),
        "instances": graph.len(),
        "byte_size": graph.byte_size(),
        "header": graph.header(),
        "diagnostics": graph.diagnostics(),
    });
    io.emit(output, &pretty(&v))?;
    Ok(EXIT_OK)
}

fn cmd_census(file: &Path, format: OutputFormat, output: &Output, io: &mut Io) -> Outcome {
    let graph = load(file)?;
    let registry = TypeRegistry::default();
    let c = census(&graph);
    let rows = census_rows(&registry, &c);
    let text = match format {
        OutputFormat::Json => pretty(&json!({
            "schema": c.schema,
            "total": c.total,
            "byte_size": c.byte_size,
            "counts": c.counts,
            "rows": rows.iter().map(|(g, t, n)| json!({"group": g, "type": t, "count": n})).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["group", "type", "count"])?;
            for (g, t, n) in &rows {
                w.write_record([g.to_string(), t.to_string(), n.to_string()])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?
        }
        OutputFormat::Markdown => {
            let mut s = String::from("| group | type | count |\n|---|---|---:|\n");
            for (g, t, n) in &rows {
                let _ = writeln!(s, "| {g} | {t} | {n} |");
            }
            s
        }
        OutputFormat::Plain => {
            let mut s = String::new();
            for (_, t, n) in &rows {
                let _ = writeln!(s, "{t} {n}");
            }
            let _ = writeln!(s, "total {}", c.total);
            s
        }
    };
    io.emit(output, &text)?;
    Ok(EXIT_OK)
}

fn cmd_diff(
    reference: &Path,
    exported: &Path,
    format: OutputFormat,
    expect_unchanged: bool,
    output: &Output,
    io: &mut Io,
) -> Outcome {
    let registry = TypeRegistry::default();
    let a = census(&load(reference)?);
    let b = census(&load(exported)?);
    let d = diff(&registry, &a, &b);
    for msg in &d.diagnostics {
        io.note(&format!("diagnostic: {msg}"));
    }
    let rows = diff_rows(&registry, &a, &b);
    let text = match format {
        OutputFormat::Json => pretty(&json!({ "diff": d, "rows": rows })),
        OutputFormat::Csv => rows_to_csv(&rows),
        OutputFormat::Markdown => rows_to_markdown(&rows),
        OutputFormat::Plain => {
            let mut s = String::new();
            for r in rows.iter().filter(|r| r.delta != 0) {
                let _ = writeln!(s, "{} {:+}", r.type_name, r.delta);
            }
            s
        }
    };
    io.emit(output, &text)?;
    if expect_unchanged && !d.is_empty() {
        io.note(&format!("{} type count(s) changed", d.deltas.len()));
        return Ok(EXIT_FINDING);
    }
    Ok(EXIT_OK)
}

fn expected_reasons(manifest: &Value) -> Result<BTreeMap<String, BTreeSet<String>>, Failure> {
    let items = manifest
        .get("items")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure("manifest has no items array".into()))?;
    items
        .iter()
        .map(|item| {
            let slot = item.get("slot").and_then(Value::as_str);
            let reasons = item
                .pointer("/expected_validity/reasons")
                .and_then(Value::as_array);
            match (slot, reasons) {
                (Some(s), Some(r)) => Ok((
                    s.to_string(),
                    r.iter()
                        .filter_map(Value::as_str)
                        .map(str::to_string)
                        .collect(),
                )),
                _ => Err(Failure(
                    "manifest item lacks slot or expected_validity".into(),
                )),
            }
        })
        .collect()
}

fn cmd_check(
    file: &Path,
    manifest: Option<&Path>,
    expect_manifest: bool,
    segments: usize,
    mesh_dir: Option<&Path>,
    output: &Output,
    io: &mut Io,
) -> Outcome {
    if segments < 3 {
        return Err(Failure(format!("--segments {segments}: need at least 3")));
    }
    let graph = load(file)?;
    let expected = match manifest {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            Some(expected_reasons(&serde_json::from_str(&text)?)?)
        }
        None => None,
    };
    if let Some(dir) = mesh_dir {
        fs::create_dir_all(dir)?;
    }
    let precision = context_precision(&graph).unwrap_or(DEFAULT_PRECISION);
    let mut results = Vec::new();
    let (mut invalid, mut disagreements) = (0usize, 0usize);
    for entry in suite_entries(&graph)? {
        let slot = entry
            .description
            .clone()
            .or_else(|| entry.name.clone())
            .unwrap_or_else(|| format!("#{}", entry.product));
        let verdict = match check_validity(&graph, entry.root, precision) {
            Ok(v) => v,
            Err(e) => {
                io.note(&format!("{slot}: {e}"));
                results
                    .push(json!({"slot": slot, "definition": entry.name, "error": e.to_string()}));
                continue;
            }
        };
        let options = EvalOptions {
            segments,
            precision,
            transform: entry.placement,
        };
        let outcome = evaluate_or_hidden(&graph, entry.root, &options);
        let mut row = json!({
            "slot": slot,
            "definition": entry.name,
            "validity": verdict.status,
            "reasons": verdict.reasons,
            "validity_warnings": verdict.warnings,
        });
        match &outcome {
            Ok(o) => {
                let tuple = classify_tuple(&verdict, o.displayed, None);
                let extra = json!({
                    "displayed": o.displayed,
                    "z_relation": o.z_relation,
                    "volume": o.volume(),
                    "area": o.area(),
                    "centroid": o.centroid(),
                    "smooth_curves": o.smooth_curves,
                    "shape_class": o.shape_class,
                    "warnings": o.warnings,
                    "tuple": tuple.to_string(),
                    "flags": tuple.flags,
                });
                merge(&mut row, extra);
                if let (Some(dir), Some(mesh)) = (mesh_dir, &o.mesh) {
                    write_file(&dir.join(format!("{slot}.txt")), mesh.to_ascii().as_bytes())?;
                }
            }
            Err(e) => {
                io.note(&format!("{slot}: {e}"));
                merge(
                    &mut row,
                    json!({"displayed": false, "error": e.to_string()}),
                );
            }
        }
        if !verdict.is_valid() {
            invalid += 1;
        }
        if let Some(exp) = &expected {
            let actual: BTreeSet<String> =
                verdict.reasons.iter().map(|r| format!("{r:?}")).collect();
            let agrees = exp.get(&slot).map(|e| *e == actual);
            if agrees != Some(true) {
                disagreements += 1;
                io.note(&format!("{slot}: verdict differs from manifest"));
            }
            merge(&mut row, json!({"matches_manifest": agrees}));
        }
        results.push(row);
    }
    io.note(&format!(
        "{} items checked, {invalid} flagged Invalid",
        results.len()
    ));
    io.emit(output, &pretty(&Value::Array(results)))?;
    Ok(if expect_manifest && disagreements > 0 {
        EXIT_FINDING
    } else {
        EXIT_OK
    })
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn cmd_answers(records: &Path, out: Option<&Path>, io: &mut Io) -> Outcome {
    let text =
        fs::read_to_string(records).map_err(|e| Failure(format!("{}: {e}", records.display())))?;
    let answers = read_answers(&text)?;
    let matrix = synthesis_matrix(&answers);
    for d in matrix.diagnostics() {
        io.note(&format!("conflict: {d}"));
    }
    let slot_map = |m: BTreeMap<crate::geomgen::Slot, f64>| -> BTreeMap<String, f64> {
        m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    };
    let metrics = json!({
        "visibility": slot_map(visibility_vector(&answers)),
        "consistency": slot_map(consistency_vector(&answers)),
        "consistency_caveat": CONSISTENCY_CAVEAT,
        "diagnostics": matrix.diagnostics(),
        "records": answers.len(),
    });
    let markdown = format!("{}\n{CONSISTENCY_CAVEAT}\n", matrix.to_markdown());
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(&dir.join("synthesis.md"), markdown.as_bytes())?;
            write_file(&dir.join("scores.csv"), matrix.to_csv().as_bytes())?;
            write_file(&dir.join("metrics.json"), pretty(&metrics).as_bytes())?;
            io.note(&format!(
                "{} records summarised into {}",
                answers.len(),
                dir.display()
            ));
        }
        None => io.stdout.write_all(markdown.as_bytes())?,
    }
    Ok(EXIT_OK)
}
