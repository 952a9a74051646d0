//! Greedy ROUGE-2 pseudo-labels under a character budget.

use serde::{Deserialize, Serialize};

use crate::corpus::Unit;
use crate::rouge::rouge_n;

pub const DEFAULT_BUDGET_CHARS: usize = 1200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledUnit {
    pub unit: Unit,
    pub score: f64,
    pub gold: bool,
}

/// What happens to the unit whose length pushes the total past the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetRule {
    /// Select it, then stop.
    #[default]
    KeepCrossing,
    /// Stop without selecting it.
    DropCrossing,
}

/// Rank by score (descending, ties in input order) and select from the top
/// until the cumulative length exceeds `budget`. Returns one flag per input.
pub fn select_with_budget(scores: &[f64], lengths: &[usize], budget: usize, rule: BudgetRule) -> Vec<bool> {
    debug_assert_eq!(scores.len(), lengths.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut selected = vec![false; scores.len()];
    let mut total = 0usize;
    for i in order {
        let next = total + lengths[i];
        if next > budget {
            if rule == BudgetRule::KeepCrossing {
                selected[i] = true;
            }
            break;
        }
        selected[i] = true;
        total = next;
    }
    selected
}

/// Score each unit with ROUGE-2 F1 against the summary and mark the greedy
/// budgeted selection as gold. `unit_tokens[i]` are the ROUGE tokens of
/// `units[i]`.
pub fn make_oracle_labels<S: AsRef<str>>(
    units: &[Unit],
    unit_tokens: &[Vec<S>],
    summary_tokens: &[S],
    budget_chars: usize,
    rule: BudgetRule,
) -> Vec<LabeledUnit> {
    assert_eq!(units.len(), unit_tokens.len(), "one token list per unit");
    let summary: Vec<&str> = summary_tokens.iter().map(AsRef::as_ref).collect();
    let scores: Vec<f64> = unit_tokens
        .iter()
        .map(|t| {
            let t: Vec<&str> = t.iter().map(AsRef::as_ref).collect();
            rouge_n(&t, &summary, 2).f1
        })
        .collect();
    let lengths: Vec<usize> = units.iter().map(|u| u.text_len).collect();
    let gold = select_with_budget(&scores, &lengths, budget_chars, rule);
    units
        .iter()
        .zip(scores)
        .zip(gold)
        .map(|((unit, score), gold)| LabeledUnit {
            unit: unit.clone(),
            score,
            gold,
        })
        .collect()
}
