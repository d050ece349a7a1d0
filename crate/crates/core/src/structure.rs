//! Tokenization and abbreviation-aware sentence splitting.
//!
//! Positions are byte offsets into the source text. Period attachment is
//! decided once, in [`tokenize`]: an abbreviation such as `Dr.` comes out as
//! a single token, so [`split_sentences`] only has to look for standalone
//! terminators.

use std::collections::BTreeSet;

/// Characters that always form a token of their own.
pub const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '(', ')', '"', '\''];

const TERMINATORS: &[&str] = &[".", "!", "?"];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub offset: usize,
    pub length: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: usize,
    pub tokens: Vec<Token>,
}

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Splits `text` into tokens. Whitespace separates tokens, punctuation
/// characters stand alone, and a word followed by a period stays one token
/// when that word-plus-period form is a listed abbreviation.
pub fn tokenize(text: &str, abbreviations: &BTreeSet<String>) -> Vec<Token> {
    // longest first so `e.g.` wins over a hypothetical `e.`
    let mut abbrevs: Vec<&str> = abbreviations
        .iter()
        .map(String::as_str)
        .filter(|a| a.ends_with('.'))
        .collect();
    abbrevs.sort_by_key(|a| std::cmp::Reverse(a.len()));

    let mut tokens = Vec::new();
    let mut push = |offset: usize, form: &str| {
        tokens.push(Token {
            id: tokens.len(),
            form: form.to_string(),
            offset,
            length: form.len(),
        });
    };

    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        // one whitespace-delimited run
        let run_end = text[start..]
            .find(char::is_whitespace)
            .map_or(text.len(), |i| start + i);
        let run = &text[start..run_end];
        let mut pos = 0;
        while pos < run.len() {
            let rest = &run[pos..];
            if let Some(abbr) = abbrevs.iter().find(|a| {
                rest.starts_with(**a) && rest[a.len()..].chars().next().is_none_or(is_punct)
            }) {
                push(start + pos, abbr);
                pos += abbr.len();
                continue;
            }
            let first = rest.chars().next().expect("non-empty rest");
            if is_punct(first) {
                push(start + pos, &rest[..first.len_utf8()]);
                pos += first.len_utf8();
                continue;
            }
            let word_len = rest.find(is_punct).unwrap_or(rest.len());
            push(start + pos, &rest[..word_len]);
            pos += word_len;
        }
        while chars.peek().is_some_and(|&(i, _)| i < run_end) {
            chars.next();
        }
    }
    tokens
}

fn is_terminator(token: &Token) -> bool {
    TERMINATORS.contains(&token.form.as_str())
}

/// Groups tokens into sentences ending at each standalone `.`, `!` or `?`.
/// Trailing tokens without a terminator form a final sentence.
pub fn split_sentences(tokens: &[Token], abbreviations: &BTreeSet<String>) -> Vec<Sentence> {
    split_with_breaks(tokens, abbreviations, &BTreeSet::new())
}

fn split_with_breaks(tokens: &[Token], abbreviations: &BTreeSet<String>, breaks: &BTreeSet<usize>) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if breaks.contains(&i) && !current.is_empty() {
            sentences.push(Sentence {
                id: sentences.len(),
                tokens: std::mem::take(&mut current),
            });
        }
        current.push(token.clone());
        // abbreviation tokens carry their period and are never bare terminators
        let abbreviation = token.form.ends_with('.') && abbreviations.contains(&token.form);
        if is_terminator(token) && !abbreviation {
            sentences.push(Sentence {
                id: sentences.len(),
                tokens: std::mem::take(&mut current),
            });
        }
    }
    if !current.is_empty() {
        sentences.push(Sentence {
            id: sentences.len(),
            tokens: current,
        });
    }
    sentences
}

/// Tokenizes and splits `text`; a blank line additionally closes any open
/// sentence.
pub fn segment(text: &str, abbreviations: &BTreeSet<String>) -> Vec<Sentence> {
    let tokens = tokenize(text, abbreviations);
    let breaks: BTreeSet<usize> = tokens
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| is_blank_line_gap(&text[pair[0].end()..pair[1].offset]))
        .map(|(i, _)| i + 1)
        .collect();
    split_with_breaks(&tokens, abbreviations, &breaks)
}

fn is_blank_line_gap(gap: &str) -> bool {
    let mut lines = gap.split('\n');
    lines.next();
    // a blank line is a full line (not the first or last fragment) with only whitespace
    let inner: Vec<&str> = lines.collect();
    inner.len() >= 2 && inner[..inner.len() - 1].iter().all(|l| l.trim().is_empty())
}
