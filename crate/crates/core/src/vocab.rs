//! The closed answer vocabulary and the question tokenizer.

use std::sync::OnceLock;

const ANSWER_DATA: &str = include_str!("../data/answers.txt");

pub const ANSWER_COUNT: usize = 40;

/// All candidate answers in file order.
pub fn answers() -> &'static [String] {
    static CELL: OnceLock<Vec<String>> = OnceLock::new();
    CELL.get_or_init(|| {
        ANSWER_DATA
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

pub fn is_answer(s: &str) -> bool {
    answers().iter().any(|a| a == s)
}

pub fn answer_index(s: &str) -> Option<usize> {
    answers().iter().position(|a| a == s)
}

/// Whitespace tokenization; punctuation is already detached in generated text.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
