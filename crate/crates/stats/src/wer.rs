//! Word error rate over tokenized transcripts.

use serde::{Deserialize, Serialize};

use crate::StatsError;

/// Characters removed by the default transcript normalization.
pub const DEFAULT_STRIP_CHARS: &str = ".,!?;:\"'()";

/// Transcript normalization rules. The defaults are frozen; tests depend on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizeOptions {
    pub lowercase: bool,
    pub strip_chars: String,
}

impl Default for TokenizeOptions {
    fn default() -> Self {
        Self { lowercase: true, strip_chars: DEFAULT_STRIP_CHARS.to_owned() }
    }
}

pub fn tokenize_transcript(text: &str) -> Vec<String> {
    tokenize_with(text, &TokenizeOptions::default())
}

pub fn tokenize_with(text: &str, options: &TokenizeOptions) -> Vec<String> {
    let cleaned: String = text.chars().filter(|c| !options.strip_chars.contains(*c)).collect();
    let cleaned = if options.lowercase { cleaned.to_lowercase() } else { cleaned };
    cleaned.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerResult {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_len: usize,
    pub wer: f64,
}

impl WerResult {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Word-level edit alignment. Backtrace prefers match, then substitution,
/// then deletion, then insertion among optimal moves.
pub fn wer<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<WerResult, StatsError> {
    if reference.is_empty() {
        return Err(StatsError::EmptyReference);
    }
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut d = vec![0u32; (n + 1) * width];
    for j in 0..=m {
        d[j] = j as u32;
    }
    for i in 1..=n {
        d[i * width] = i as u32;
        for j in 1..=m {
            let cost = u32::from(reference[i - 1] != hypothesis[j - 1]);
            let diag = d[(i - 1) * width + j - 1] + cost;
            let up = d[(i - 1) * width + j] + 1;
            let left = d[i * width + j - 1] + 1;
            d[i * width + j] = diag.min(up).min(left);
        }
    }

    let (mut i, mut j) = (n, m);
    let (mut subs, mut dels, mut ins) = (0, 0, 0);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let diag = d[(i - 1) * width + j - 1];
            if reference[i - 1] == hypothesis[j - 1] && here == diag {
                i -= 1;
                j -= 1;
                continue;
            }
            if here == diag + 1 {
                subs += 1;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            dels += 1;
            i -= 1;
        } else {
            ins += 1;
            j -= 1;
        }
    }

    Ok(WerResult {
        substitutions: subs,
        deletions: dels,
        insertions: ins,
        ref_len: n,
        wer: (subs + dels + ins) as f64 / n as f64,
    })
}

/// Tokenizes both transcripts with the default rules and scores them.
pub fn transcript_wer(reference: &str, hypothesis: &str) -> Result<WerResult, StatsError> {
    wer(&tokenize_transcript(reference), &tokenize_transcript(hypothesis))
}
