//! Wisconsin Card Sorting Test: deck, reward oracle and card percepts.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{FeatureDef, FeatureSchema, Percept, Reward};

pub const COLORS: [&str; 4] = ["red", "green", "yellow", "blue"];
pub const FORMS: [&str; 4] = ["triangle", "star", "cross", "circle"];
pub const PILES: [&str; 4] = ["pile1", "pile2", "pile3", "pile4"];

/// Correct assignments in a row that complete a run.
pub const RUN_LENGTH: u32 = 5;
/// Completed runs that end the test.
pub const RUNS_TO_COMPLETE: u32 = 9;
pub const DECK_SIZE: usize = 60;

/// A card; `color` and `form` index [`COLORS`] and [`FORMS`], `number` is 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WcstCard {
    pub color: u8,
    pub form: u8,
    pub number: u8,
}

impl WcstCard {
    pub fn new(color: u8, form: u8, number: u8) -> Result<Self> {
        if color > 3 || form > 3 || !(1..=4).contains(&number) {
            return Err(Error::InvalidValue(format!("invalid card ({color}, {form}, {number})")));
        }
        Ok(Self { color, form, number })
    }

    /// Stimulus card above pile `pile` (1-based): one red triangle, two green stars,
    /// three yellow crosses, four blue circles.
    pub fn stimulus(pile: u8) -> Self {
        debug_assert!((1..=4).contains(&pile));
        Self {
            color: pile - 1,
            form: pile - 1,
            number: pile,
        }
    }

    fn attribute(&self, rule: SortingRule) -> u8 {
        match rule {
            SortingRule::Color => self.color,
            SortingRule::Form => self.form,
            SortingRule::Number => self.number - 1,
        }
    }

    pub fn label(&self) -> String {
        format!(
            "{}-{}-{}",
            self.number, COLORS[self.color as usize], FORMS[self.form as usize]
        )
    }
}

impl fmt::Display for WcstCard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SortingRule {
    Color,
    Form,
    Number,
}

impl SortingRule {
    /// color → form → number → color.
    pub fn next(self) -> Self {
        match self {
            SortingRule::Color => SortingRule::Form,
            SortingRule::Form => SortingRule::Number,
            SortingRule::Number => SortingRule::Color,
        }
    }

    /// Index of the feature this rule sorts by in [`wcst_schema`].
    pub fn feature_index(self) -> usize {
        match self {
            SortingRule::Color => 0,
            SortingRule::Form => 1,
            SortingRule::Number => 2,
        }
    }
}

pub fn wcst_schema() -> FeatureSchema {
    FeatureSchema::new(vec![
        FeatureDef::new("color", COLORS),
        FeatureDef::new("form", FORMS),
        FeatureDef::new("number", ["1", "2", "3", "4"]),
    ])
    .expect("static schema is valid")
}

pub fn wcst_actions() -> Vec<String> {
    PILES.iter().map(|p| p.to_string()).collect()
}

/// Pile number (1..=4) of an action name.
pub fn pile_of(action: &str) -> Result<u8> {
    PILES
        .iter()
        .position(|p| *p == action)
        .map(|i| i as u8 + 1)
        .ok_or_else(|| Error::UnknownAction(action.to_string()))
}

/// The 60 response cards: every color × form × number combination except the four
/// stimulus cards, shuffled by `seed`.
pub fn wcst_deck(seed: u64) -> Vec<WcstCard> {
    let stimuli: Vec<WcstCard> = (1..=4).map(WcstCard::stimulus).collect();
    let mut deck: Vec<WcstCard> = (0..4u8)
        .flat_map(|c| {
            (0..4u8).flat_map(move |f| {
                (1..=4u8).map(move |n| WcstCard {
                    color: c,
                    form: f,
                    number: n,
                })
            })
        })
        .filter(|card| !stimuli.contains(card))
        .collect();
    deck.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    deck
}

/// Three exact unit feature vectors: color, form and number.
pub fn wcst_percept(card: &WcstCard) -> Percept {
    let unit = |i: u8| (0..4).map(|j| if j == i { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    Percept::from_values(
        &wcst_schema(),
        &[unit(card.color), unit(card.form), unit(card.number - 1)],
    )
    .expect("card percepts are valid")
}

/// Test progress. The deck is dealt in order and reshuffled when exhausted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WcstState {
    pub active_rule: SortingRule,
    pub consecutive_correct: u32,
    pub completed_runs: u32,
    pub deck: Vec<WcstCard>,
    pub presented_count: u64,
    seed: u64,
    reshuffles: u64,
}

impl WcstState {
    pub fn new(seed: u64) -> Self {
        Self {
            active_rule: SortingRule::Color,
            consecutive_correct: 0,
            completed_runs: 0,
            deck: wcst_deck(seed),
            presented_count: 0,
            seed,
            reshuffles: 0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completed_runs >= RUNS_TO_COMPLETE
    }

    /// Deals the next card, mixing a fresh 60-card deck when the current one is used up.
    pub fn deal(&mut self) -> Result<WcstCard> {
        if self.is_complete() {
            return Err(Error::TestComplete);
        }
        if self.deck.is_empty() {
            self.reshuffles += 1;
            self.deck = wcst_deck(
                self.seed
                    .wrapping_add(self.reshuffles.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
        }
        self.presented_count += 1;
        Ok(self.deck.remove(0))
    }
}

/// Result of assigning one card.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub reward: Reward,
    /// The run that was completed by this assignment, if any.
    pub completed_rule: Option<SortingRule>,
}

/// Judges placing `card` on pile `pile` (1..=4) under the active rule and advances the state.
pub fn wcst_oracle(state: &mut WcstState, card: &WcstCard, pile: u8) -> Result<Assignment> {
    if state.is_complete() {
        return Err(Error::TestComplete);
    }
    if !(1..=4).contains(&pile) {
        return Err(Error::InvalidValue(format!("pile {pile} out of range")));
    }
    let rule = state.active_rule;
    let correct = card.attribute(rule) == WcstCard::stimulus(pile).attribute(rule);
    if !correct {
        state.consecutive_correct = 0;
        return Ok(Assignment {
            reward: Reward::Negative,
            completed_rule: None,
        });
    }
    state.consecutive_correct += 1;
    let mut completed_rule = None;
    if state.consecutive_correct == RUN_LENGTH {
        state.completed_runs += 1;
        state.consecutive_correct = 0;
        state.active_rule = rule.next();
        completed_rule = Some(rule);
    }
    Ok(Assignment {
        reward: Reward::Positive,
        completed_rule,
    })
}
