use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{AnswerRecord, AnswerValue, Category, SupportScore, TimingBucket};

/// Printed next to consistency figures.
pub const CONSISTENCY_CAVEAT: &str =
    "Consistency is uncorrected: questions with few possible answers agree more often by chance.";

/// Commutative monoid over support scores, counted in half units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreAccumulator {
    sum: u64,
    n: u64,
    min: u32,
    max: u32,
    not_applicable: u64,
}

impl ScoreAccumulator {
    pub fn of(score: SupportScore) -> Self {
        match score.half_units() {
            Some(h) => Self {
                sum: u64::from(h),
                n: 1,
                min: h,
                max: h,
                not_applicable: 0,
            },
            None => Self {
                not_applicable: 1,
                ..Self::default()
            },
        }
    }

    pub fn merge(self, other: Self) -> Self {
        let (min, max) = match (self.n, other.n) {
            (0, _) => (other.min, other.max),
            (_, 0) => (self.min, self.max),
            _ => (self.min.min(other.min), self.max.max(other.max)),
        };
        Self {
            sum: self.sum + other.sum,
            n: self.n + other.n,
            min,
            max,
            not_applicable: self.not_applicable + other.not_applicable,
        }
    }

    pub fn tests(&self) -> u64 {
        self.n + self.not_applicable
    }

    /// Mean rounded to the nearest half, ties down. NotApplicable when no
    /// test produced a score.
    pub fn score(&self) -> SupportScore {
        if self.n == 0 {
            return SupportScore::NotApplicable;
        }
        // ceil((2S - n) / 2n) is the half-unit mean rounded half down.
        let num = 2 * self.sum as i64 - self.n as i64;
        let den = 2 * self.n as i64;
        let k = num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0);
        SupportScore::from_half_units(k.clamp(0, 2) as u32)
    }

    /// Scores more than half a point apart.
    pub fn conflict(&self) -> bool {
        self.n > 0 && self.max - self.min > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub score: SupportScore,
    pub tests: u64,
    pub conflict: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthesisMatrix {
    acc: BTreeMap<(String, Category), ScoreAccumulator>,
    /// Per dataset, every timing answer including failures.
    pub timing: BTreeMap<String, BTreeMap<TimingBucket, u64>>,
}

impl SynthesisMatrix {
    pub fn add(&mut self, record: &AnswerRecord) {
        match &record.value {
            AnswerValue::Score(s) if record.category != Category::GeometryItem => {
                let slot = self
                    .acc
                    .entry((record.software.clone(), record.category))
                    .or_default();
                *slot = slot.merge(ScoreAccumulator::of(*s));
            }
            AnswerValue::Timing(t) => {
                *self
                    .timing
                    .entry(record.dataset.clone())
                    .or_default()
                    .entry(*t)
                    .or_insert(0) += 1;
            }
            _ => {}
        }
    }

    pub fn cell(&self, software: &str, category: Category) -> Option<Cell> {
        self.acc
            .get(&(software.to_string(), category))
            .map(|a| Cell {
                score: a.score(),
                tests: a.tests(),
                conflict: a.conflict(),
            })
    }

    pub fn cells(&self) -> impl Iterator<Item = (&str, Category, Cell)> + '_ {
        self.acc
            .keys()
            .map(|(s, c)| (s.as_str(), *c, self.cell(s, *c).expect("key exists")))
    }

    pub fn software(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.acc.keys().map(|(s, _)| s.as_str()).collect();
        v.dedup();
        v
    }

    pub fn categories(&self) -> Vec<Category> {
        let mut v: Vec<Category> = self.acc.keys().map(|(_, c)| *c).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn diagnostics(&self) -> Vec<String> {
        self.cells()
            .filter(|(_, _, c)| c.conflict)
            .map(|(s, cat, c)| format!("{s} / {cat}: {} tests disagree by more than 0.5", c.tests))
            .collect()
    }

    /// Measured durations only.
    pub fn timing_distribution(&self, dataset: &str) -> BTreeMap<TimingBucket, u64> {
        self.timing
            .get(dataset)
            .map(|m| {
                m.iter()
                    .filter(|(b, _)| b.is_timing())
                    .map(|(b, n)| (*b, *n))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Share of timing answers that produced a result.
    pub fn success_rate(&self, dataset: &str) -> Option<f64> {
        let m = self.timing.get(dataset)?;
        let total: u64 = m.values().sum();
        let ok: u64 = m
            .iter()
            .filter(|(b, _)| b.is_timing())
            .map(|(_, n)| n)
            .sum();
        (total > 0).then(|| ok as f64 / total as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["software", "category", "score", "tests", "conflict"])
            .expect("in-memory write");
        for (s, cat, c) in self.cells() {
            w.write_record([
                s.to_string(),
                cat.to_string(),
                c.score.to_string(),
                c.tests.to_string(),
                c.conflict.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let cats = self.categories();
        let mut out = String::from("| Software |");
        for c in &cats {
            let _ = write!(out, " {c} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(cats.len()));
        out.push('\n');
        for s in self.software() {
            let _ = write!(out, "| {s} |");
            for c in &cats {
                let text = match self.cell(s, *c) {
                    Some(cell) if cell.conflict => format!("{}*", cell.score),
                    Some(cell) => cell.score.to_string(),
                    None => String::new(),
                };
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
        if self.cells().any(|(_, _, c)| c.conflict) {
            out.push_str("\n\\* tests of the same software disagree by more than 0.5\n");
        }
        if !self.timing.is_empty() {
            out.push_str("\n| Dataset | Success rate |");
            for b in TimingBucket::ALL {
                let _ = write!(out, " {b:?} |");
            }
            out.push_str("\n|---|---|");
            out.push_str(&"---|".repeat(TimingBucket::ALL.len()));
            out.push('\n');
            for (dataset, counts) in &self.timing {
                let rate = self.success_rate(dataset).unwrap_or(0.0);
                let _ = write!(out, "| {dataset} | {rate:.2} |");
                for b in TimingBucket::ALL {
                    let _ = write!(out, " {} |", counts.get(&b).copied().unwrap_or(0));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// One cell per (software, category); repeated tests are reduced by the
/// rounded mean.
pub fn synthesis_matrix(answers: &[AnswerRecord]) -> SynthesisMatrix {
    let mut m = SynthesisMatrix::default();
    for a in answers {
        m.add(a);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(software: &str, category: Category, value: AnswerValue, dataset: &str) -> AnswerRecord {
        AnswerRecord {
            respondent: "r".into(),
            software: software.into(),
            version: String::new(),
            tester_expertise: 1,
            dataset: dataset.into(),
            question_id: "q".into(),
            category,
            value,
            item_slot: None,
        }
    }

    #[test]
    fn single_record() {
        let m = synthesis_matrix(&[rec(
            "X",
            Category::Georeferencing,
            AnswerValue::Score(SupportScore::Full),
            "d",
        )]);
        let c = m.cell("X", Category::Georeferencing).unwrap();
        assert_eq!(
            (c.score, c.tests, c.conflict),
            (SupportScore::Full, 1, false)
        );
    }

    #[test]
    fn full_and_none_conflict() {
        let m = synthesis_matrix(&[
            rec(
                "X",
                Category::Query,
                AnswerValue::Score(SupportScore::Full),
                "d",
            ),
            rec(
                "X",
                Category::Query,
                AnswerValue::Score(SupportScore::None),
                "d",
            ),
        ]);
        let c = m.cell("X", Category::Query).unwrap();
        assert_eq!(c.score, SupportScore::Partial);
        assert!(c.conflict);
        assert_eq!(m.diagnostics().len(), 1);
        assert!(m.to_markdown().contains("0.5*"));
    }

    #[test]
    fn rounding_ties_down() {
        use SupportScore::*;
        let acc = |s: &[SupportScore]| {
            s.iter()
                .map(|&x| ScoreAccumulator::of(x))
                .fold(ScoreAccumulator::default(), ScoreAccumulator::merge)
        };
        assert_eq!(acc(&[Full, Partial]).score(), Partial);
        assert_eq!(acc(&[Partial, None]).score(), None);
        assert_eq!(acc(&[Full, Full, Partial]).score(), Full);
        assert_eq!(acc(&[NotApplicable]).score(), NotApplicable);
        assert_eq!(acc(&[NotApplicable, Full]).score(), Full);
        assert!(!acc(&[Full, Partial]).conflict());
    }

    #[test]
    fn timing_tally() {
        use TimingBucket::*;
        let answers: Vec<_> = [
            ("a", Immediate),
            ("a", Crashed),
            ("b", OneToFive),
            ("b", OneToFive),
            ("c", NoResult),
        ]
        .into_iter()
        .map(|(d, t)| rec("X", Category::Timing, AnswerValue::Timing(t), d))
        .collect();
        let m = synthesis_matrix(&answers);
        assert_eq!(m.timing_distribution("a"), BTreeMap::from([(Immediate, 1)]));
        assert_eq!(m.timing_distribution("b"), BTreeMap::from([(OneToFive, 2)]));
        assert!(m.timing_distribution("c").is_empty());
        assert_eq!(m.success_rate("a"), Some(0.5));
        assert_eq!(m.success_rate("c"), Some(0.0));
    }
}
