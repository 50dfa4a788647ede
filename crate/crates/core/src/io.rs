//! Edge-list text format.
//!
//! ```text
//! # comment
//! n 4
//! 0 1
//! 1 2
//! ```
//!
//! A `bipartite <n_left> <n_right>` header instead reads `i j` as left-`i`
//! visits right-`j`. Several graphs may share one file separated by `---`
//! lines; a collection is either such a file or a directory of them.
//!
//! Endpoints are normally 0-based indices. If any endpoint in a section is not
//! a non-negative integer, every endpoint in that section is treated as an
//! opaque label and mapped to dense indices in order of first appearance; the
//! mapping for the (left) node mode is kept in [`LoadedGraph::labels`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph};

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeListData {
    OneMode(Graph),
    Bipartite(BipartiteGraph),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub id: String,
    pub data: EdgeListData,
    /// External label of each dense node index, when the file used labels.
    pub labels: Option<Vec<String>>,
}

impl LoadedGraph {
    /// The one-mode graph, projecting bipartite input.
    pub fn graph(&self) -> Result<Graph> {
        match &self.data {
            EdgeListData::OneMode(g) => Ok(g.clone()),
            EdgeListData::Bipartite(b) => b.project_one_mode(),
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

enum Header {
    OneMode(usize),
    Bipartite(usize, usize),
}

fn parse_header(tokens: &[&str], path: &Path, line: usize) -> Result<Header> {
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(path, line, format!("invalid node count `{s}`")))
    };
    match tokens {
        ["n", c] => Ok(Header::OneMode(count(c)?)),
        ["bipartite", l, r] => Ok(Header::Bipartite(count(l)?, count(r)?)),
        _ => Err(parse_err(
            path,
            line,
            "expected header `n <count>` or `bipartite <n_left> <n_right>`",
        )),
    }
}

/// Assigns dense indices to labels, capped at `limit`.
struct Labeler {
    index: HashMap<String, usize>,
    names: Vec<String>,
    limit: usize,
}

impl Labeler {
    fn new(limit: usize) -> Self {
        Labeler {
            index: HashMap::new(),
            names: Vec::new(),
            limit,
        }
    }

    fn get(&mut self, label: &str, path: &Path, line: usize) -> Result<usize> {
        if let Some(&i) = self.index.get(label) {
            return Ok(i);
        }
        if self.names.len() == self.limit {
            return Err(parse_err(
                path,
                line,
                format!("label `{label}` exceeds the declared {} nodes", self.limit),
            ));
        }
        let i = self.names.len();
        self.index.insert(label.to_string(), i);
        self.names.push(label.to_string());
        Ok(i)
    }
}

fn parse_section(lines: &[(usize, &str)], path: &Path, id: String) -> Result<LoadedGraph> {
    let mut rows = lines.iter().filter_map(|&(no, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#'))
            .then(|| (no, t.split_whitespace().collect::<Vec<_>>()))
    });
    let (hline, htoks) = rows
        .next()
        .ok_or_else(|| parse_err(path, lines.first().map_or(1, |l| l.0), "missing header"))?;
    let header = parse_header(&htoks, path, hline)?;

    let mut pairs = Vec::new();
    for (no, toks) in rows {
        if toks.len() != 2 {
            return Err(parse_err(
                path,
                no,
                format!("expected `i j`, found {} fields", toks.len()),
            ));
        }
        pairs.push((no, toks[0], toks[1]));
    }
    let labeled = pairs
        .iter()
        .any(|(_, a, b)| a.parse::<usize>().is_err() || b.parse::<usize>().is_err());

    let (left_n, right_n) = match header {
        Header::OneMode(n) => (n, n),
        Header::Bipartite(l, r) => (l, r),
    };
    let mut left = Labeler::new(left_n);
    let mut right = Labeler::new(right_n);
    let one_mode = matches!(header, Header::OneMode(_));
    let mut edges = Vec::with_capacity(pairs.len());
    for &(no, a, b) in &pairs {
        let (i, j) = if labeled {
            let i = left.get(a, path, no)?;
            let j = if one_mode {
                left.get(b, path, no)?
            } else {
                right.get(b, path, no)?
            };
            (i, j)
        } else {
            let i: usize = a.parse().unwrap();
            let j: usize = b.parse().unwrap();
            if i >= left_n || j >= right_n {
                return Err(parse_err(
                    path,
                    no,
                    format!("index out of range in `{a} {b}`"),
                ));
            }
            (i, j)
        };
        if one_mode && i == j {
            return Err(parse_err(path, no, format!("self-loop on `{a}`")));
        }
        edges.push((i, j));
    }

    let data = match header {
        Header::OneMode(n) => {
            if n == 0 {
                return Err(parse_err(path, hline, "graph must have at least one node"));
            }
            EdgeListData::OneMode(
                Graph::from_edges(n, edges).map_err(|e| parse_err(path, hline, e.to_string()))?,
            )
        }
        Header::Bipartite(l, r) => EdgeListData::Bipartite(
            BipartiteGraph::new(l, r, edges).map_err(|e| parse_err(path, hline, e.to_string()))?,
        ),
    };
    Ok(LoadedGraph {
        id,
        data,
        labels: labeled.then_some(left.names),
    })
}

/// Parses every `---`-separated graph in `text`. `path` is used for ids and
/// error messages only.
pub fn parse_edge_lists(text: &str, path: &Path) -> Result<Vec<LoadedGraph>> {
    let stem = path
        .file_stem()
        .map_or_else(|| "graph".to_string(), |s| s.to_string_lossy().into_owned());
    let mut sections: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            sections.push(Vec::new());
        } else {
            sections.last_mut().unwrap().push((i + 1, line));
        }
    }
    // a trailing separator or blank tail is not a graph
    sections.retain(|s| {
        s.iter()
            .any(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'))
    });
    if sections.is_empty() {
        return Err(parse_err(path, 1, "no graphs found"));
    }
    let multi = sections.len() > 1;
    sections
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let id = if multi {
                format!("{stem}#{k}")
            } else {
                stem.clone()
            };
            parse_section(s, path, id)
        })
        .collect()
}

pub fn read_edge_list_file(path: &Path) -> Result<Vec<LoadedGraph>> {
    parse_edge_lists(&crate::error::read_input(path)?, path)
}

/// Reads a single file, or every `*.edges` / `*.txt` file of a directory in
/// file-name order (so manifests and reports next to the graphs are skipped).
pub fn read_collection(path: &Path) -> Result<Vec<LoadedGraph>> {
    if !path.is_dir() {
        return read_edge_list_file(path);
    }
    let entries = fs::read_dir(path).map_err(|source| Error::Input {
        path: path.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().starts_with('.'))
                && p.extension().is_some_and(|e| e == "edges" || e == "txt")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(parse_err(
            path,
            0,
            "directory holds no .edges or .txt files",
        ));
    }
    let mut out = Vec::new();
    for f in files {
        out.extend(read_edge_list_file(&f)?);
    }
    Ok(out)
}

/// Reads a collection and projects every entry to a one-mode graph.
pub fn read_graphs(path: &Path) -> Result<Vec<(String, Graph)>> {
    read_collection(path)?
        .into_iter()
        .map(|l| Ok((l.id.clone(), l.graph()?)))
        .collect()
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut s = format!("n {}\n", g.node_count());
    for (i, j) in g.edge_list() {
        writeln!(s, "{i} {j}").unwrap();
    }
    s
}

pub fn format_bipartite(b: &BipartiteGraph) -> String {
    let mut s = format!("bipartite {} {}\n", b.n_left(), b.n_right());
    for &(i, j) in b.edges() {
        writeln!(s, "{i} {j}").unwrap();
    }
    s
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<LoadedGraph>> {
        parse_edge_lists(text, Path::new("t.edges"))
    }

    #[test]
    fn round_trip() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4), (1, 4)]).unwrap();
        let back = parse(&format_edge_list(&g)).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].id, "t");
        assert_eq!(back[0].graph().unwrap(), g);
    }

    #[test]
    fn comments_and_sections() {
        let text = "# two graphs\nn 3\n0 1\n---\n# second\nn 2\n\n1 0\n---\n";
        let gs = parse(text).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].id, "t#0");
        assert_eq!(gs[1].graph().unwrap().edge_count(), 1);
    }

    #[test]
    fn bipartite_is_projected() {
        let gs = parse("bipartite 3 2\n0 0\n1 0\n1 1\n2 1\n").unwrap();
        let g = gs[0].graph().unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn labels_are_mapped() {
        let gs = parse("n 3\nalice bob\nbob carol\n").unwrap();
        assert_eq!(gs[0].labels.as_deref().unwrap(), ["alice", "bob", "carol"]);
        assert_eq!(gs[0].graph().unwrap().edge_list(), vec![(0, 1), (1, 2)]);
        assert!(parse("n 2\na b\nb c\n").is_err());
    }

    #[test]
    fn errors_name_line() {
        let e = parse("n 3\n0 1\n0 7\n").unwrap_err();
        assert_eq!(e.to_string(), "t.edges:3: index out of range in `0 7`");
        let e = parse("# c\nn 3\n1 1\n").unwrap_err();
        assert!(e.to_string().starts_with("t.edges:3:"));
        assert!(parse("m 3\n").is_err());
        assert!(parse("n 3\n0 1 2\n").is_err());
        assert!(parse("# nothing\n").is_err());
    }
}
