#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use kgrec_service::cli::{run, Cli};

pub struct Fixture {
    pub dir: tempfile::TempDir,
}

/// Hotel-style data: twelve guests, four hotels. Guests g0..g8 rate h0 with
/// 4 or 5; g0..g5 like its `locations`.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut ratings = String::from("user\titem\trating\n");
    let mut opinions = String::new();
    let mut reviews = String::new();
    for g in 0..12 {
        let rating = match g {
            0..=8 => 4 + g % 2,
            _ => 2,
        };
        writeln!(ratings, "g{g}\th0\t{rating}").unwrap();
        writeln!(ratings, "g{g}\th{}\t{}", 1 + g % 3, 1 + g % 5).unwrap();
        if g < 6 {
            writeln!(opinions, "g{g}\th0\tLocations\t1").unwrap();
            writeln!(reviews, "g{g}\th0\tGreat locations, noisy Rooms.\\nWould return.").unwrap();
        }
        if g % 4 == 0 {
            writeln!(opinions, "g{g}\th0\trooms\t-1").unwrap();
            writeln!(opinions, "g{g}\th{}\tprice\t0", 1 + g % 3).unwrap();
        }
    }
    let p = |n: &str| dir.path().join(n);
    fs::write(p("ratings.tsv"), ratings).unwrap();
    fs::write(p("opinions.tsv"), opinions).unwrap();
    fs::write(p("reviews.tsv"), reviews).unwrap();
    let f = Fixture { dir };
    f.kgrec(&[
        "ingest", "--ratings", &f.path("ratings.tsv"), "--opinions", &f.path("opinions.tsv"),
        "--reviews", &f.path("reviews.tsv"), "--out", &f.path("graph.kg"), "--stats", &f.path("stats.json"),
    ]);
    f.kgrec(&[
        "train", "--graph", &f.path("graph.kg"), "--dim", "8", "--epochs", "3", "--negatives", "2",
        "--seed", "5", "--out", &f.path("model.bin"), "--log", &f.path("train.jsonl"),
    ]);
    f
}

impl Fixture {
    pub fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Runs the CLI in-process and returns its standard output.
    pub fn kgrec(&self, args: &[&str]) -> String {
        let cli = Cli::try_parse_from(std::iter::once("kgrec").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        run(cli, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    pub fn session(&self) -> kgrec_service::ApiSession {
        kgrec_service::ApiSession::load(
            Path::new(&self.path("model.bin")),
            Path::new(&self.path("graph.kg")),
            Some(Path::new(&self.path("reviews.tsv"))),
        )
        .unwrap()
    }
}
