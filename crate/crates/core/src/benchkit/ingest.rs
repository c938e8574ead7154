use serde::Deserialize;

use super::{AnswerRecord, AnswerValue, BenchError, Category, SupportScore, TimingBucket};

/// First line of a CSV answer file.
pub const CSV_MAGIC: &str = "#answers v1";
/// First line of a JSON lines answer file.
pub const JSONL_MAGIC: &str = r#"{"answers_schema":1}"#;

#[derive(Debug, Deserialize)]
struct RawRecord {
    respondent: String,
    software: String,
    #[serde(default)]
    version: String,
    tester_expertise: u8,
    #[serde(default)]
    dataset: String,
    question_id: String,
    category: String,
    value: String,
    #[serde(default)]
    item_slot: Option<String>,
}

fn format_error(line: usize, reason: impl ToString) -> BenchError {
    BenchError::Format {
        line,
        reason: reason.to_string(),
    }
}

fn validate(raw: RawRecord, line: usize) -> Result<AnswerRecord, BenchError> {
    let err = |r: String| format_error(line, r);
    if !(1..=4).contains(&raw.tester_expertise) {
        return Err(err(format!(
            "expertise {} outside 1-4",
            raw.tester_expertise
        )));
    }
    let category: Category = raw.category.parse().map_err(err)?;
    let value = match category {
        Category::Timing => AnswerValue::Timing(raw.value.parse::<TimingBucket>().map_err(err)?),
        Category::GeometryItem => AnswerValue::Text(raw.value.trim().to_string()),
        _ => AnswerValue::Score(raw.value.parse::<SupportScore>().map_err(err)?),
    };
    let item_slot = match raw.item_slot.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(s) => Some(s.parse().map_err(|e| format_error(line, e))?),
    };
    if category == Category::GeometryItem && item_slot.is_none() {
        return Err(err("geometry item answer without item_slot".to_string()));
    }
    Ok(AnswerRecord {
        respondent: raw.respondent,
        software: raw.software,
        version: raw.version,
        tester_expertise: raw.tester_expertise,
        dataset: raw.dataset,
        question_id: raw.question_id.trim().to_ascii_lowercase(),
        category,
        value,
        item_slot,
    })
}

/// CSV with a magic first line, then a header row naming the columns.
pub fn read_answers_csv(text: &str) -> Result<Vec<AnswerRecord>, BenchError> {
    let body = text
        .strip_prefix(CSV_MAGIC)
        .and_then(|r| {
            r.strip_prefix('\n')
                .or(r.strip_prefix("\r\n"))
                .or(Some(r).filter(|r| r.is_empty()))
        })
        .ok_or_else(|| format_error(1, format!("expected {CSV_MAGIC:?}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RawRecord>().enumerate() {
        // Magic line and header precede the first record.
        let line = i + 3;
        out.push(validate(row.map_err(|e| format_error(line, e))?, line)?);
    }
    Ok(out)
}

/// JSON lines with a schema object on the first line.
pub fn read_answers_jsonl(text: &str) -> Result<Vec<AnswerRecord>, BenchError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let header: serde_json::Value = match lines.next() {
        Some((_, l)) => serde_json::from_str(l).map_err(|e| format_error(1, e))?,
        None => return Err(format_error(1, "empty input")),
    };
    if header
        .get("answers_schema")
        .and_then(serde_json::Value::as_u64)
        != Some(1)
    {
        return Err(format_error(1, format!("expected {JSONL_MAGIC}")));
    }
    lines
        .map(|(i, l)| {
            let raw: RawRecord = serde_json::from_str(l).map_err(|e| format_error(i + 1, e))?;
            validate(raw, i + 1)
        })
        .collect()
}

/// Dispatches on the first line.
pub fn read_answers(text: &str) -> Result<Vec<AnswerRecord>, BenchError> {
    if text.starts_with(CSV_MAGIC) {
        read_answers_csv(text)
    } else if text.trim_start().starts_with('{') {
        read_answers_jsonl(text)
    } else {
        Err(format_error(1, "unrecognised answer file header"))
    }
}
