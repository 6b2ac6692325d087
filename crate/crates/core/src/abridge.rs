//! Naive and extractive abridgers.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::passage::Label;
use crate::text::{Document, Span, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExtractMethod {
    Copy,
    RandToks,
    ExtToks,
    PerfectExtToks,
    ExtSents,
}

impl ExtractMethod {
    /// Whether the method reads token labels.
    pub fn needs_labels(self) -> bool {
        matches!(
            self,
            ExtractMethod::ExtToks | ExtractMethod::PerfectExtToks | ExtractMethod::ExtSents
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtractMethod::Copy => "copy",
            ExtractMethod::RandToks => "rand_toks",
            ExtractMethod::ExtToks => "ext_toks",
            ExtractMethod::PerfectExtToks => "perfect_ext_toks",
            ExtractMethod::ExtSents => "ext_sents",
        }
    }
}

impl FromStr for ExtractMethod {
    type Err = Error;

    /// Accepts the short command-line names as well as the long ones.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "copy" => Ok(ExtractMethod::Copy),
            "rand" | "rand_toks" => Ok(ExtractMethod::RandToks),
            "tokens" | "ext_toks" => Ok(ExtractMethod::ExtToks),
            "perfect" | "perfect_ext_toks" => Ok(ExtractMethod::PerfectExtToks),
            "sents" | "ext_sents" => Ok(ExtractMethod::ExtSents),
            other => Err(Error::UnknownMethod(other.into())),
        }
    }
}

impl fmt::Display for ExtractMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtractConfig {
    pub method: ExtractMethod,
    /// Share of tokens kept by the random baseline.
    pub t: f64,
    /// Preserved share a sentence needs to be kept.
    pub p: f64,
    pub seed: Option<u64>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            method: ExtractMethod::Copy,
            t: 0.6,
            p: 0.65,
            seed: None,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::InvalidConfig(alloc::format!(
                "t must lie in [0, 1], got {}",
                self.t
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(alloc::format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        if self.method == ExtractMethod::RandToks && self.seed.is_none() {
            return Err(Error::InvalidConfig("rand_toks needs a seed".into()));
        }
        Ok(())
    }
}

/// The chapter unchanged.
pub fn abridge_copy(chapter: &Document) -> String {
    chapter.text().into()
}

/// Number of tokens kept out of `n` at rate `t`, rounding halves up.
pub fn token_budget(n: usize, t: f64) -> usize {
    let k = (t * n as f64 + 0.5) as usize;
    k.min(n)
}

/// A seeded uniform sample of `round(t * N)` tokens, in original order,
/// joined by single spaces.
pub fn abridge_rand_tokens(chapter: &Document, t: f64, seed: u64) -> String {
    let tokens = chapter.all_tokens();
    let k = token_budget(tokens.len(), t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, tokens.len(), k).into_vec();
    picked.sort_unstable();
    join_tokens(chapter, picked.into_iter().map(|i| &tokens[i]))
}

/// Checks that `labels` cover the chapter tokens one to one.
///
/// The error carries the start offset of the first token (or label) that
/// does not line up.
pub fn check_labels(tokens: &[Token], labels: &[(Span, Label)]) -> Result<()> {
    for (i, t) in tokens.iter().enumerate() {
        match labels.get(i) {
            Some((span, _)) if *span == t.span => {}
            Some((span, _)) => {
                return Err(Error::LabelMismatch {
                    offset: span.start.min(t.span.start),
                })
            }
            None => return Err(Error::LabelMismatch { offset: t.span.start }),
        }
    }
    if let Some((span, _)) = labels.get(tokens.len()) {
        return Err(Error::LabelMismatch { offset: span.start });
    }
    Ok(())
}

/// Tokens labeled preserved, in order, joined by single spaces.
pub fn abridge_ext_tokens(chapter: &Document, labels: &[(Span, Label)]) -> Result<String> {
    let tokens = chapter.all_tokens();
    check_labels(&tokens, labels)?;
    let kept = tokens
        .iter()
        .zip(labels)
        .filter(|(_, (_, l))| *l == Label::Preserved)
        .map(|(t, _)| t);
    Ok(join_tokens(chapter, kept))
}

/// Sentences whose preserved share of tokens reaches `p`, verbatim.
///
/// A kept sentence is preceded by the whitespace that preceded it in the
/// chapter, except the first one written.
pub fn abridge_ext_sents(chapter: &Document, labels: &[(Span, Label)], p: f64) -> Result<String> {
    let tokens = chapter.all_tokens();
    check_labels(&tokens, labels)?;
    let mut out = String::new();
    let mut next = 0;
    let mut prev_end = 0;
    for sentence in chapter.sentences() {
        let (mut total, mut kept) = (0usize, 0usize);
        while next < labels.len() && sentence.encloses(&labels[next].0) {
            total += 1;
            kept += (labels[next].1 == Label::Preserved) as usize;
            next += 1;
        }
        let share = if total == 0 { 1.0 } else { kept as f64 / total as f64 };
        if share >= p {
            if !out.is_empty() {
                out.push_str(chapter.slice(Span::new(prev_end, sentence.start)));
            }
            out.push_str(chapter.slice(*sentence));
        }
        prev_end = sentence.end;
    }
    Ok(out)
}

fn join_tokens<'a>(chapter: &Document, tokens: impl Iterator<Item = &'a Token>) -> String {
    let mut out = String::new();
    for t in tokens {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(chapter.slice(t.span));
    }
    out
}

/// Runs `config.method` on a chapter. Label-driven methods need `labels`;
/// for [`ExtractMethod::PerfectExtToks`] these should be the gold labels.
pub fn abridge(chapter: &Document, labels: Option<&[(Span, Label)]>, config: &ExtractConfig) -> Result<String> {
    config.validate()?;
    let labels = || labels.ok_or_else(|| Error::InvalidConfig(alloc::format!("{} needs token labels", config.method)));
    match config.method {
        ExtractMethod::Copy => Ok(abridge_copy(chapter)),
        ExtractMethod::RandToks => Ok(abridge_rand_tokens(chapter, config.t, config.seed.unwrap_or_default())),
        ExtractMethod::ExtToks | ExtractMethod::PerfectExtToks => abridge_ext_tokens(chapter, labels()?),
        ExtractMethod::ExtSents => abridge_ext_sents(chapter, labels()?, config.p),
    }
}

/// Labels listing every token of the chapter with the same label.
pub fn uniform_labels(chapter: &Document, label: Label) -> Vec<(Span, Label)> {
    chapter.all_tokens().into_iter().map(|t| (t.span, label)).collect()
}
