//! Tab-separated dataset files.
//!
//! * ratings: `user \t item \t rating`, optional header (non-numeric rating)
//! * opinions: `user \t item \t aspect \t polarity`
//! * reviews: `user \t item \t text`, newlines in text written as `\n`

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::records::{AspectOpinionRecord, RatingRecord};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadWarning {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Keep only users with at least this many rating records.
    pub min_user_ratings: Option<usize>,
}

/// Review texts keyed by (user, item).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReviewIndex {
    texts: HashMap<(String, String), String>,
}

impl ReviewIndex {
    pub fn insert(&mut self, user: impl Into<String>, item: impl Into<String>, text: String) {
        self.texts.insert((user.into(), item.into()), text);
    }

    pub fn get(&self, user: &str, item: &str) -> Option<&str> {
        self.texts
            .get(&(user.to_owned(), item.to_owned()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub ratings: Vec<RatingRecord>,
    pub opinions: Vec<AspectOpinionRecord>,
    pub reviews: ReviewIndex,
    pub warnings: Vec<LoadWarning>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_dataset(
    ratings_path: &Path,
    opinions_path: &Path,
    reviews_path: Option<&Path>,
    options: LoadOptions,
) -> Result<Dataset> {
    let mut warnings = Vec::new();
    let mut ratings = parse_ratings(open(ratings_path)?, &label(ratings_path), &mut warnings)?;
    if let Some(min) = options.min_user_ratings {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for r in &ratings {
            *counts.entry(r.user.as_str()).or_default() += 1;
        }
        let keep: Vec<bool> = ratings.iter().map(|r| counts[r.user.as_str()] >= min).collect();
        let mut keep = keep.into_iter();
        ratings.retain(|_| keep.next().unwrap_or(false));
    }
    let opinions = parse_opinions(open(opinions_path)?, &label(opinions_path), &mut warnings)?;
    let reviews = match reviews_path {
        Some(p) => parse_reviews(open(p)?, &label(p), &mut warnings)?,
        None => ReviewIndex::default(),
    };
    for w in &warnings {
        log::warn!("{}:{}: {}", w.file, w.line, w.message);
    }
    Ok(Dataset {
        ratings,
        opinions,
        reviews,
        warnings,
    })
}

fn lines<R: Read>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

fn strip_line_end(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

pub fn parse_ratings<R: Read>(
    reader: R,
    file: &str,
    warnings: &mut Vec<LoadWarning>,
) -> Result<Vec<RatingRecord>> {
    let mut out = Vec::new();
    for (line_no, line) in lines(reader) {
        let line = line?;
        let line = strip_line_end(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let warn = |message: String| LoadWarning {
            file: file.to_owned(),
            line: line_no,
            message,
        };
        if fields.len() != 3 {
            warnings.push(warn(format!("expected 3 fields, found {}", fields.len())));
            continue;
        }
        match fields[2].trim().parse::<f64>() {
            Ok(v) if (1.0..=5.0).contains(&v) => {
                out.push(RatingRecord::new(fields[0], fields[1], v));
            }
            Ok(v) => warnings.push(warn(format!("rating {v} outside [1, 5]"))),
            // header
            Err(_) if line_no == 1 => {}
            Err(_) => warnings.push(warn(format!("non-numeric rating `{}`", fields[2]))),
        }
    }
    Ok(out)
}

pub fn parse_opinions<R: Read>(
    reader: R,
    file: &str,
    warnings: &mut Vec<LoadWarning>,
) -> Result<Vec<AspectOpinionRecord>> {
    let mut out = Vec::new();
    for (line_no, line) in lines(reader) {
        let line = line?;
        let line = strip_line_end(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let warn = |message: String| LoadWarning {
            file: file.to_owned(),
            line: line_no,
            message,
        };
        if fields.len() != 4 {
            warnings.push(warn(format!("expected 4 fields, found {}", fields.len())));
            continue;
        }
        let aspect = fields[2].trim();
        if aspect.is_empty() {
            warnings.push(warn("empty aspect".into()));
            continue;
        }
        match fields[3].trim().parse::<f64>() {
            Ok(p) if p.is_finite() => {
                out.push(AspectOpinionRecord::new(fields[0], fields[1], aspect, p));
            }
            Ok(p) => warnings.push(warn(format!("polarity {p} is not finite"))),
            Err(_) if line_no == 1 => {}
            Err(_) => warnings.push(warn(format!("non-numeric polarity `{}`", fields[3]))),
        }
    }
    Ok(out)
}

/// Writes opinions in the same layout [`parse_opinions`] reads.
pub fn write_opinions<W: Write>(mut writer: W, opinions: &[AspectOpinionRecord]) -> Result<()> {
    for o in opinions {
        writeln!(writer, "{}\t{}\t{}\t{}", o.user, o.item, o.aspect, o.polarity)?;
    }
    Ok(())
}

fn unescape_review(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn parse_reviews<R: Read>(
    reader: R,
    file: &str,
    warnings: &mut Vec<LoadWarning>,
) -> Result<ReviewIndex> {
    let mut index = ReviewIndex::default();
    for (line_no, line) in lines(reader) {
        let line = line?;
        let line = strip_line_end(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            warnings.push(LoadWarning {
                file: file.to_owned(),
                line: line_no,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
            continue;
        }
        index.insert(fields[0], fields[1], unescape_review(fields[2]));
    }
    Ok(index)
}
