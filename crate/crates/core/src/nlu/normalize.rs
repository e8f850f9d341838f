use serde::{Deserialize, Serialize};

/// Half-open character range into the original utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn union(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// One normalized token. Number words and digit strings carry their value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased text; for numbers, the decimal value.
    pub norm: String,
    pub number: Option<i64>,
    /// Digits as written ("0100" stays "0100"), used for phone numbers.
    pub digits: Option<String>,
    pub span: Span,
    pub(crate) bytes: (usize, usize),
}

impl Token {
    pub fn is_number(&self) -> bool {
        self.number.is_some()
    }
}

impl PartialEq<&str> for Token {
    fn eq(&self, other: &&str) -> bool {
        self.norm == *other
    }
}

enum NumberWord {
    Unit(i64),
    Teen(i64),
    Tens(i64),
    Hundred,
    Thousand,
}

fn number_word(w: &str) -> Option<NumberWord> {
    use NumberWord::*;
    Some(match w {
        "zero" | "oh" => Unit(0),
        "one" => Unit(1),
        "two" => Unit(2),
        "three" => Unit(3),
        "four" => Unit(4),
        "five" => Unit(5),
        "six" => Unit(6),
        "seven" => Unit(7),
        "eight" => Unit(8),
        "nine" => Unit(9),
        "ten" => Teen(10),
        "eleven" => Teen(11),
        "twelve" => Teen(12),
        "thirteen" => Teen(13),
        "fourteen" => Teen(14),
        "fifteen" => Teen(15),
        "sixteen" => Teen(16),
        "seventeen" => Teen(17),
        "eighteen" => Teen(18),
        "nineteen" => Teen(19),
        "twenty" => Tens(20),
        "thirty" => Tens(30),
        "forty" => Tens(40),
        "fifty" => Tens(50),
        "sixty" => Tens(60),
        "seventy" => Tens(70),
        "eighty" => Tens(80),
        "ninety" => Tens(90),
        "hundred" => Hundred,
        "thousand" => Thousand,
        _ => return None,
    })
}

struct RawWord {
    text: String,
    span: Span,
    bytes: (usize, usize),
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn split_words(text: &str) -> Vec<RawWord> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        let mut word = String::new();
        while i < chars.len() {
            let c = chars[i].1;
            if c.is_alphanumeric() {
                word.extend(c.to_lowercase());
                i += 1;
            } else if is_apostrophe(c) && i + 1 < chars.len() && chars[i + 1].1.is_alphanumeric() && !word.is_empty() {
                i += 1;
            } else {
                break;
            }
        }
        let byte_end = chars.get(i).map_or(text.len(), |(b, _)| *b);
        words.push(RawWord {
            text: word,
            span: Span::new(start, i),
            bytes: (chars[start].0, byte_end),
        });
    }
    words
}

struct PendingNumber {
    value: i64,
    /// Tens were just added and a unit may still follow ("twenty" + "five").
    open_tens: bool,
    span: Span,
    bytes: (usize, usize),
}

impl PendingNumber {
    fn into_token(self) -> Token {
        Token {
            norm: self.value.to_string(),
            number: Some(self.value),
            digits: Some(self.value.to_string()),
            span: self.span,
            bytes: self.bytes,
        }
    }
}

/// Lowercase, strip punctuation, split on hyphens, and fold number words into integers.
pub fn normalize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut pending: Option<PendingNumber> = None;

    for w in split_words(text) {
        let Some(kind) = number_word(&w.text) else {
            if let Some(p) = pending.take() {
                out.push(p.into_token());
            }
            out.push(word_token(w));
            continue;
        };
        // "oh" only counts as a digit inside a number run.
        if w.text == "oh" && pending.is_none() {
            out.push(word_token(w));
            continue;
        }
        pending = Some(match (pending.take(), kind) {
            (Some(mut p), NumberWord::Unit(u)) if p.open_tens || (p.value >= 100 && p.value % 100 == 0) => {
                p.value += u;
                p.open_tens = false;
                extend(p, &w)
            }
            (Some(mut p), NumberWord::Teen(t)) if p.value >= 100 && p.value % 100 == 0 => {
                p.value += t;
                p.open_tens = false;
                extend(p, &w)
            }
            (Some(mut p), NumberWord::Tens(t)) if p.value >= 100 && p.value % 100 == 0 => {
                p.value += t;
                p.open_tens = true;
                extend(p, &w)
            }
            (Some(mut p), NumberWord::Hundred) if p.value % 100 != 0 || p.value == 0 => {
                p.value *= 100;
                p.open_tens = false;
                extend(p, &w)
            }
            (Some(mut p), NumberWord::Thousand) if p.value < 1000 => {
                p.value *= 1000;
                p.open_tens = false;
                extend(p, &w)
            }
            (prev, kind) => {
                if let Some(p) = prev {
                    out.push(p.into_token());
                }
                let (value, open_tens) = match kind {
                    NumberWord::Unit(v) | NumberWord::Teen(v) => (v, false),
                    NumberWord::Tens(v) => (v, true),
                    NumberWord::Hundred => (100, false),
                    NumberWord::Thousand => (1000, false),
                };
                PendingNumber { value, open_tens, span: w.span, bytes: w.bytes }
            }
        });
    }
    if let Some(p) = pending {
        out.push(p.into_token());
    }
    out
}

fn extend(mut p: PendingNumber, w: &RawWord) -> PendingNumber {
    p.span = p.span.union(&w.span);
    p.bytes.1 = w.bytes.1;
    p
}

fn word_token(w: RawWord) -> Token {
    let all_digits = w.text.chars().all(|c| c.is_ascii_digit());
    if all_digits {
        let number = w.text.parse::<i64>().ok();
        let norm = number.map_or_else(|| w.text.clone(), |n| n.to_string());
        Token { norm, number, digits: Some(w.text), span: w.span, bytes: w.bytes }
    } else {
        Token { norm: w.text, number: None, digits: None, span: w.span, bytes: w.bytes }
    }
}

/// Normalized token texts, mostly for matching lexicon phrases.
pub fn normalize_words(text: &str) -> Vec<String> {
    normalize(text).into_iter().map(|t| t.norm).collect()
}
