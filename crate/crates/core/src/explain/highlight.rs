use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize_aspect, AspectOpinionRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PolaritySign {
    Positive,
    Negative,
    Neutral,
}

impl PolaritySign {
    pub fn of(polarity: f64) -> Self {
        if polarity > 0.0 {
            PolaritySign::Positive
        } else if polarity < 0.0 {
            PolaritySign::Negative
        } else {
            PolaritySign::Neutral
        }
    }
}

/// A highlighted stretch of review text. Offsets are UTF-8 byte offsets,
/// `end` exclusive. `term` is the aspect key itself or one of its lexicon
/// variants; `text[start..end]` equals it up to case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightSpan {
    pub start: usize,
    pub end: usize,
    pub aspect: String,
    pub term: String,
    pub polarity: PolaritySign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightedReview {
    pub text: String,
    pub spans: Vec<HighlightSpan>,
}

/// Variant → canonical aspect mapping, both normalized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    canonical: HashMap<String, String>,
}

impl SynonymLexicon {
    pub fn insert(&mut self, variant: &str, canonical: &str) {
        self.canonical.insert(normalize_aspect(variant), normalize_aspect(canonical));
    }

    /// Reads `variant \t canonical` lines. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut lexicon = Self::default();
        for (n, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((v, c)) if !v.trim().is_empty() && !c.trim().is_empty() => lexicon.insert(v, c),
                _ => {
                    return Err(Error::Invalid(format!(
                        "synonym lexicon line {}: expected `variant<TAB>canonical`",
                        n + 1
                    )))
                }
            }
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(file)
    }

    pub fn variants_of<'a>(&'a self, aspect: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.canonical
            .iter()
            .filter(move |(_, c)| c.as_str() == aspect)
            .map(|(v, _)| v.as_str())
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }
}

pub fn highlight_aspects(text: &str, opinions: &[AspectOpinionRecord]) -> HighlightedReview {
    highlight_aspects_with(text, opinions, None)
}

/// Marks whole-word, case-insensitive occurrences of every opinion's aspect
/// (and its lexicon variants). Where candidates overlap, the longer one wins,
/// then the earlier one. Opinions repeated for an aspect take the sign of
/// their summed polarity.
pub fn highlight_aspects_with(
    text: &str,
    opinions: &[AspectOpinionRecord],
    lexicon: Option<&SynonymLexicon>,
) -> HighlightedReview {
    let mut polarity: Vec<(String, f64)> = Vec::new();
    for o in opinions {
        let key = normalize_aspect(&o.aspect);
        if key.is_empty() || !o.polarity.is_finite() {
            continue;
        }
        match polarity.iter_mut().find(|(k, _)| *k == key) {
            Some((_, p)) => *p += o.polarity,
            None => polarity.push((key, o.polarity)),
        }
    }

    let folded = Folded::new(text);
    // (start, end, char length, aspect index, term)
    let mut candidates = Vec::new();
    for (index, (aspect, _)) in polarity.iter().enumerate() {
        let mut terms: Vec<&str> = vec![aspect.as_str()];
        if let Some(lex) = lexicon {
            terms.extend(lex.variants_of(aspect));
        }
        terms.sort_unstable();
        terms.dedup();
        for term in terms {
            for (start, end, chars) in folded.find_words(term) {
                candidates.push((start, end, chars, index, term));
            }
        }
    }
    candidates.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.3.cmp(&b.3)));

    let mut spans: Vec<HighlightSpan> = Vec::new();
    for (start, end, _, index, term) in candidates {
        if spans.iter().any(|s| start < s.end && s.start < end) {
            continue;
        }
        let (aspect, p) = &polarity[index];
        spans.push(HighlightSpan {
            start,
            end,
            aspect: aspect.clone(),
            term: term.to_owned(),
            polarity: PolaritySign::of(*p),
        });
    }
    spans.sort_by_key(|s| s.start);
    HighlightedReview {
        text: text.to_owned(),
        spans,
    }
}

/// Text as chars with byte offsets, for case-insensitive matching without
/// changing offsets.
struct Folded<'a> {
    text: &'a str,
    chars: Vec<(usize, char)>,
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn same_folded(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

impl<'a> Folded<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            chars: text.char_indices().collect(),
        }
    }

    fn byte_at(&self, i: usize) -> usize {
        self.chars.get(i).map_or(self.text.len(), |c| c.0)
    }

    /// Whole-word matches of `term` as (start byte, end byte, char count).
    fn find_words(&self, term: &str) -> Vec<(usize, usize, usize)> {
        let pattern: Vec<char> = term.chars().collect();
        let n = pattern.len();
        let mut out = Vec::new();
        if n == 0 || n > self.chars.len() {
            return out;
        }
        for i in 0..=self.chars.len() - n {
            if i > 0 && is_word(self.chars[i - 1].1) && is_word(pattern[0]) {
                continue;
            }
            if let Some(&(_, next)) = self.chars.get(i + n) {
                if is_word(next) && is_word(pattern[n - 1]) {
                    continue;
                }
            }
            if self.chars[i..i + n].iter().zip(&pattern).all(|(&(_, c), &p)| same_folded(c, p)) {
                out.push((self.byte_at(i), self.byte_at(i + n), n));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(aspect: &str, p: f64) -> AspectOpinionRecord {
        AspectOpinionRecord::new("u", "i", aspect, p)
    }

    #[test]
    fn single_aspect() {
        let h = highlight_aspects("The battery is great", &[op("battery", 1.0)]);
        assert_eq!(h.spans.len(), 1);
        let s = &h.spans[0];
        assert_eq!(&h.text[s.start..s.end], "battery");
        assert_eq!(s.polarity, PolaritySign::Positive);
    }

    #[test]
    fn absent_aspect() {
        assert!(highlight_aspects("The battery is great", &[op("screen", -1.0)]).spans.is_empty());
    }

    #[test]
    fn longer_match_wins() {
        let h = highlight_aspects(
            "Battery life is long, the battery itself is small",
            &[op("battery", -1.0), op("Battery Life", 1.0)],
        );
        let got: Vec<_> = h.spans.iter().map(|s| (&h.text[s.start..s.end], s.aspect.as_str())).collect();
        assert_eq!(got, [("Battery life", "battery life"), ("battery", "battery")]);
        assert_eq!(h.spans[0].polarity, PolaritySign::Positive);
        assert_eq!(h.spans[1].polarity, PolaritySign::Negative);
    }

    #[test]
    fn whole_words_only() {
        let h = highlight_aspects("batteryless, rebattery; BATTERY.", &[op("battery", 0.0)]);
        assert_eq!(h.spans.len(), 1);
        assert_eq!(&h.text[h.spans[0].start..h.spans[0].end], "BATTERY");
        assert_eq!(h.spans[0].polarity, PolaritySign::Neutral);
    }

    #[test]
    fn multibyte_offsets() {
        let h = highlight_aspects("Très bon café, le CAFÉ est chaud", &[op("café", 1.0)]);
        let got: Vec<_> = h.spans.iter().map(|s| &h.text[s.start..s.end]).collect();
        assert_eq!(got, ["café", "CAFÉ"]);
    }

    #[test]
    fn lexicon_variants() {
        let lex = SynonymLexicon::parse("# comment\nrooms\troom\nchambre\troom\n".as_bytes()).unwrap();
        assert_eq!(lex.len(), 2);
        let h = highlight_aspects_with("Rooms were fine, the chambre too", &[op("room", 1.0)], Some(&lex));
        let got: Vec<_> = h.spans.iter().map(|s| (s.term.as_str(), s.aspect.as_str())).collect();
        assert_eq!(got, [("rooms", "room"), ("chambre", "room")]);
        assert!(SynonymLexicon::parse("no tab here\n".as_bytes()).is_err());
    }

    #[test]
    fn summed_polarity() {
        let h = highlight_aspects("staff", &[op("staff", 1.0), op("staff", -2.0)]);
        assert_eq!(h.spans[0].polarity, PolaritySign::Negative);
    }
}
