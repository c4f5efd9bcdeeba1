//! Line-oriented graph file.
//!
//! ```text
//! kgrec-graph 1
//! variant GERA
//! users <n>
//! <key>            (n lines, escaped)
//! items <n>
//! <key>
//! aspects <n>
//! <key>
//! edges <m>
//! <relation>\t<src>\t<dst>\tR\t<record>\t<rating>
//! <relation>\t<src>\t<dst>\tO\t<record>\t<item>\t<polarity>
//! <relation>\t<src>\t<dst>\tB\t<record>
//! end
//! ```
//!
//! Keys escape `\`, tab, CR and LF as `\\`, `\t`, `\r`, `\n`. Numbers use
//! Rust's shortest round-trip formatting, so read(write(g)) == g and writing
//! the same graph twice yields identical bytes.

use std::io::{BufRead, Write};

use super::{Edge, GraphVariant, KnowledgeGraph, NodeId, NodeKind, NodeRegistry, Provenance, RelationType, Triple};
use crate::error::{Error, Result};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "kgrec-graph";

fn escape(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    for c in key.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next() {
            Some('\\') => '\\',
            Some('t') => '\t',
            Some('n') => '\n',
            Some('r') => '\r',
            other => {
                return Err(Error::GraphFormat {
                    line,
                    message: format!("bad escape `\\{}`", other.map(String::from).unwrap_or_default()),
                })
            }
        });
    }
    Ok(out)
}

fn section(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::User => "users",
        NodeKind::Item => "items",
        NodeKind::Aspect => "aspects",
    }
}

pub fn write_graph<W: Write>(graph: &KnowledgeGraph, mut w: W) -> Result<()> {
    writeln!(w, "{MAGIC} {GRAPH_FORMAT_VERSION}")?;
    writeln!(w, "variant {}", graph.variant())?;
    for kind in NodeKind::ALL {
        let reg = graph.registry(kind);
        writeln!(w, "{} {}", section(kind), reg.len())?;
        for key in reg.keys() {
            writeln!(w, "{}", escape(key))?;
        }
    }
    writeln!(w, "edges {}", graph.edge_count())?;
    for edge in graph.edges() {
        let t = edge.triple;
        write!(w, "{}\t{}\t{}\t", t.relation, t.source.ordinal, t.destination.ordinal)?;
        match edge.provenance {
            Provenance::Rating { record, value } => writeln!(w, "R\t{record}\t{value:?}")?,
            Provenance::Opinion {
                record,
                item,
                polarity,
            } => writeln!(w, "O\t{record}\t{item}\t{polarity:?}")?,
            Provenance::BelongsTo { record } => writeln!(w, "B\t{record}")?,
        }
    }
    writeln!(w, "end")?;
    Ok(())
}

struct LineReader<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> LineReader<R> {
    fn next(&mut self) -> Result<&str> {
        self.buf.clear();
        self.line += 1;
        if self.inner.read_line(&mut self.buf)? == 0 {
            return Err(self.err("unexpected end of file"));
        }
        if self.buf.ends_with('\n') {
            self.buf.pop();
        }
        Ok(&self.buf)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::GraphFormat {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, name: &str) -> Result<usize> {
        let line = self.next()?.to_owned();
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| self.err(format!("expected `{name} <count>`, found `{line}`")))
    }
}

fn field<T: std::str::FromStr>(fields: &[&str], i: usize, line: usize) -> Result<T> {
    fields
        .get(i)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::GraphFormat {
            line,
            message: format!("bad or missing field {i}"),
        })
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<KnowledgeGraph> {
    let mut r = LineReader {
        inner: reader,
        line: 0,
        buf: String::new(),
    };
    let magic = r.next()?.to_owned();
    let version = magic
        .strip_prefix(MAGIC)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| r.err("not a graph file"))?;
    if version != GRAPH_FORMAT_VERSION {
        return Err(r.err(format!("unsupported graph format version {version}")));
    }
    let variant_line = r.next()?.to_owned();
    let variant: GraphVariant = variant_line
        .strip_prefix("variant ")
        .ok_or_else(|| r.err("expected `variant <name>`"))?
        .parse()?;

    let mut registries: [NodeRegistry; 3] = Default::default();
    for kind in NodeKind::ALL {
        let n = r.header(section(kind))?;
        for _ in 0..n {
            let line = r.line + 1;
            let key = unescape(r.next()?, line)?;
            let before = registries[kind.index()].len();
            registries[kind.index()].intern(&key);
            if registries[kind.index()].len() == before {
                return Err(r.err(format!("duplicate {kind} key")));
            }
        }
    }

    let m = r.header("edges")?;
    let mut groups: [Vec<Edge>; 6] = Default::default();
    let mut last_relation = 0;
    for _ in 0..m {
        let line_no = r.line + 1;
        let line = r.next()?;
        let fields: Vec<&str> = line.split('\t').collect();
        let relation: RelationType = fields[0].parse()?;
        if relation.index() < last_relation {
            return Err(r.err("edges not grouped by relation"));
        }
        last_relation = relation.index();
        let (src_kind, dst_kind) = relation.endpoints();
        let src: u32 = field(&fields, 1, line_no)?;
        let dst: u32 = field(&fields, 2, line_no)?;
        if src as usize >= registries[src_kind.index()].len()
            || dst as usize >= registries[dst_kind.index()].len()
        {
            return Err(r.err("edge references unknown node"));
        }
        let record: usize = field(&fields, 4, line_no)?;
        let provenance = match (fields.get(3).copied(), fields.len()) {
            (Some("R"), 6) if relation.is_rating() => Provenance::Rating {
                record,
                value: field(&fields, 5, line_no)?,
            },
            (Some("O"), 7) if relation.is_opinion() => Provenance::Opinion {
                record,
                item: field(&fields, 5, line_no)?,
                polarity: field(&fields, 6, line_no)?,
            },
            (Some("B"), 5) if relation == RelationType::BelongsTo => {
                Provenance::BelongsTo { record }
            }
            _ => return Err(r.err("provenance does not match relation")),
        };
        groups[relation.index()].push(Edge {
            triple: Triple::new(
                NodeId::new(src_kind, src),
                relation,
                NodeId::new(dst_kind, dst),
            ),
            provenance,
        });
    }
    if r.next()? != "end" {
        return Err(r.err("expected `end`"));
    }
    Ok(KnowledgeGraph::from_parts(variant, registries, groups))
}

impl KnowledgeGraph {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_graph(self, &mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        read_graph(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AspectOpinionRecord, RatingRecord};

    fn sample() -> KnowledgeGraph {
        let ratings = vec![
            RatingRecord::new("user\tone", "item\\1", 2.5),
            RatingRecord::new("u2", "item\\1", 4.0),
        ];
        let opinions = vec![
            AspectOpinionRecord::new("user\tone", "item\\1", "Battery\nLife", 0.3333333333333333),
            AspectOpinionRecord::new("u3", "i9", "screen", -1e-7),
            AspectOpinionRecord::new("u3", "i9", "price", 0.0),
        ];
        KnowledgeGraph::build(&ratings, &opinions, GraphVariant::Gera).0
    }

    #[test]
    fn roundtrip_exact() {
        let g = sample();
        let bytes = g.to_bytes();
        let back = read_graph(bytes.as_slice()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn rejects_wrong_version() {
        let mut bytes = sample().to_bytes();
        bytes[12] = b'9';
        assert!(read_graph(bytes.as_slice()).is_err());
    }

    #[test]
    fn rejects_truncation() {
        let bytes = sample().to_bytes();
        let cut = &bytes[..bytes.len() - 4];
        assert!(read_graph(cut).is_err());
    }

    #[test]
    fn rejects_dangling_edge() {
        let text = "kgrec-graph 1\nvariant GER\nusers 1\nu\nitems 1\ni\naspects 0\nedges 1\nhighRating\t0\t3\tR\t0\t5.0\nend\n";
        assert!(read_graph(text.as_bytes()).is_err());
    }
}
