use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use super::{AnswerRecord, BenchError, Category};
use crate::geomgen::Slot;

pub const Q_DISPLAYED: &str = "displayed";
pub const Q_POSITION: &str = "position";
pub const Q_SHADING: &str = "shading";
pub const Q_SHAPE: &str = "shape";
pub const FOLLOW_UP_QUESTIONS: [&str; 3] = [Q_POSITION, Q_SHADING, Q_SHAPE];

fn slot_answers(answers: &[AnswerRecord], slot: Slot) -> impl Iterator<Item = &AnswerRecord> {
    answers
        .iter()
        .filter(move |a| a.category == Category::GeometryItem && a.item_slot == Some(slot))
}

/// Fraction of displayed/not-displayed answers for `slot` that say displayed.
pub fn visibility_ratio(answers: &[AnswerRecord], slot: Slot) -> Result<f64, BenchError> {
    let (mut yes, mut n) = (0u32, 0u32);
    for a in slot_answers(answers, slot).filter(|a| a.question_id == Q_DISPLAYED) {
        if let Some(b) = a.value.as_bool() {
            n += 1;
            yes += u32::from(b);
        }
    }
    if n == 0 {
        return Err(BenchError::NoAnswers(slot));
    }
    Ok(f64::from(yes) / f64::from(n))
}

/// Visibility ratio of every slot that has answers.
pub fn visibility_vector(answers: &[AnswerRecord]) -> BTreeMap<Slot, f64> {
    slots(answers)
        .into_iter()
        .filter_map(|s| visibility_ratio(answers, s).ok().map(|r| (s, r)))
        .collect()
}

/// Fraction of equal unordered pairs; `None` below two values.
pub fn pairwise_agreement<T: Eq + Hash>(values: &[T]) -> Option<f64> {
    let n = values.len() as u64;
    if n < 2 {
        return None;
    }
    let mut counts: HashMap<&T, u64> = HashMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let equal: u64 = counts.values().map(|c| c * (c - 1) / 2).sum();
    Some(equal as f64 / (n * (n - 1) / 2) as f64)
}

/// Mean pairwise agreement over the follow-up questions, among respondents
/// who did not report the item as hidden.
pub fn consistency(answers: &[AnswerRecord], slot: Slot) -> Result<f64, BenchError> {
    let hidden: BTreeSet<&str> = slot_answers(answers, slot)
        .filter(|a| a.question_id == Q_DISPLAYED && a.value.as_bool() == Some(false))
        .map(|a| a.respondent.as_str())
        .collect();
    let mut per_question: BTreeMap<&str, BTreeMap<&str, String>> = BTreeMap::new();
    for a in slot_answers(answers, slot) {
        if FOLLOW_UP_QUESTIONS.contains(&a.question_id.as_str())
            && !hidden.contains(a.respondent.as_str())
        {
            // A respondent's last answer to a question counts.
            per_question
                .entry(a.question_id.as_str())
                .or_default()
                .insert(
                    &a.respondent,
                    a.value.to_string().trim().to_ascii_lowercase(),
                );
        }
    }
    let eligible: BTreeSet<&str> = per_question
        .values()
        .flat_map(|m| m.keys().copied())
        .collect();
    let scores: Vec<f64> = per_question
        .values()
        .filter_map(|m| pairwise_agreement(&m.values().collect::<Vec<_>>()))
        .collect();
    if eligible.len() < 2 || scores.is_empty() {
        return Err(BenchError::TooFewRespondents {
            slot,
            eligible: eligible.len(),
        });
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Consistency of every slot with enough eligible respondents.
pub fn consistency_vector(answers: &[AnswerRecord]) -> BTreeMap<Slot, f64> {
    slots(answers)
        .into_iter()
        .filter_map(|s| consistency(answers, s).ok().map(|r| (s, r)))
        .collect()
}

fn slots(answers: &[AnswerRecord]) -> BTreeSet<Slot> {
    answers.iter().filter_map(|a| a.item_slot).collect()
}
