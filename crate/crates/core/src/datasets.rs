//! Real networks: the karate club (bundled) and the political blogs network
//! (read from a local GML copy, see [`polblogs_path`]).

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};

const KARATE_EDGES: &str = include_str!("../data/karate.tsv");
const KARATE_LABELS: &str = include_str!("../data/karate_labels.tsv");

/// A graph with ground-truth communities.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub labels: NodeLabels,
}

/// Zachary's karate club: 34 members, 78 ties, split into the factions
/// that followed the instructor ("Mr. Hi") and the officer.
pub fn karate() -> Dataset {
    let graph = Graph::parse_edge_list(KARATE_EDGES).expect("bundled karate edge list");
    let labels = NodeLabels::parse(KARATE_LABELS, graph.node_count()).expect("bundled karate labels");
    Dataset { graph, labels }
}

pub const POLBLOGS_FILE: &str = "polblogs.gml";

/// Directory for downloaded data: `$LRDPG_DATA_DIR`, else `./data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("LRDPG_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

pub fn polblogs_path() -> PathBuf {
    data_dir().join(POLBLOGS_FILE)
}

/// Loads the political blogs network if a copy exists under [`data_dir`].
pub fn load_polblogs() -> Result<Option<Dataset>> {
    let path = polblogs_path();
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    parse_polblogs_gml(&text).map(Some)
}

/// Parses the blogs GML (directed links, `value` 0 = liberal,
/// 1 = conservative). Links are made undirected, self-links and repeated
/// links are dropped, and then so are the blogs left without any link.
pub fn parse_polblogs_gml(text: &str) -> Result<Dataset> {
    let root = gml::parse(text)?;
    let graph_node = root
        .iter()
        .find_map(|(k, v)| (k == "graph").then_some(v))
        .and_then(gml::Value::as_list)
        .ok_or_else(|| Error::validation("GML has no graph block"))?;

    let mut ids = Vec::new();
    let mut sides = Vec::new();
    let mut edges = Vec::new();
    for (key, value) in graph_node {
        let Some(fields) = value.as_list() else { continue };
        let num = |name: &str| {
            fields
                .iter()
                .find(|(k, _)| k == name)
                .and_then(|(_, v)| v.as_num())
        };
        match key.as_str() {
            "node" => {
                let id = num("id").ok_or_else(|| Error::validation("GML node without id"))?;
                let side = num("value").ok_or_else(|| Error::validation(format!("GML node {id} without value")))?;
                ids.push(id as i64);
                sides.push(side as i64);
            }
            "edge" => {
                let (s, t) = num("source")
                    .zip(num("target"))
                    .ok_or_else(|| Error::validation("GML edge without source/target"))?;
                edges.push((s as i64, t as i64));
            }
            _ => {}
        }
    }
    let index: std::collections::HashMap<i64, usize> =
        ids.iter().enumerate().map(|(pos, &id)| (id, pos)).collect();
    let lookup = |id: i64| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::validation(format!("GML edge references unknown node {id}")))
    };
    let mut pairs = Vec::with_capacity(edges.len());
    for (s, t) in edges {
        let (a, b) = (lookup(s)?, lookup(t)?);
        if a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    let full = Graph::from_edges(ids.len(), pairs)?;
    let names = vec!["liberal".to_string(), "conservative".to_string()];
    let labels = sides
        .iter()
        .map(|&s| match s {
            0 | 1 => Ok(s as usize),
            other => Err(Error::validation(format!("GML node value {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = NodeLabels::with_names(labels, names)?;
    let (graph, kept) = full.drop_isolated()?;
    Ok(Dataset {
        graph,
        labels: labels.select(&kept),
    })
}

/// Just enough GML for the usual network files: nested `key value` lists
/// with numbers, quoted strings and `[ ... ]` blocks.
mod gml {
    use crate::error::{Error, Result};

    #[derive(Debug, Clone, PartialEq)]
    pub enum Value {
        Num(f64),
        Str(String),
        List(Vec<(String, Value)>),
    }

    impl Value {
        pub fn as_num(&self) -> Option<f64> {
            match self {
                Value::Num(x) => Some(*x),
                _ => None,
            }
        }

        pub fn as_list(&self) -> Option<&[(String, Value)]> {
            match self {
                Value::List(l) => Some(l),
                _ => None,
            }
        }
    }

    #[derive(Debug, PartialEq)]
    enum Token {
        Open,
        Close,
        Word(String),
        Quoted(String),
    }

    fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
        let mut out = Vec::new();
        let mut chars = text.chars().peekable();
        let mut line = 1;
        while let Some(&c) = chars.peek() {
            match c {
                '\n' => {
                    line += 1;
                    chars.next();
                }
                c if c.is_whitespace() => {
                    chars.next();
                }
                '[' | ']' => {
                    chars.next();
                    out.push((line, if c == '[' { Token::Open } else { Token::Close }));
                }
                '"' => {
                    chars.next();
                    let start = line;
                    let mut s = String::new();
                    loop {
                        match chars.next() {
                            Some('"') => break,
                            Some(ch) => {
                                if ch == '\n' {
                                    line += 1;
                                }
                                s.push(ch);
                            }
                            None => {
                                return Err(Error::Parse {
                                    line: start,
                                    message: "unterminated string".into(),
                                })
                            }
                        }
                    }
                    out.push((start, Token::Quoted(s)));
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&ch) = chars.peek() {
                        if ch.is_whitespace() || ch == '[' || ch == ']' || ch == '"' {
                            break;
                        }
                        s.push(ch);
                        chars.next();
                    }
                    out.push((line, Token::Word(s)));
                }
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Vec<(String, Value)>> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let list = parse_list(&tokens, &mut pos, false)?;
        Ok(list)
    }

    fn parse_list(tokens: &[(usize, Token)], pos: &mut usize, nested: bool) -> Result<Vec<(String, Value)>> {
        let mut out = Vec::new();
        loop {
            let Some((line, tok)) = tokens.get(*pos) else {
                if nested {
                    return Err(Error::Parse {
                        line: tokens.last().map_or(1, |t| t.0),
                        message: "unclosed [".into(),
                    });
                }
                return Ok(out);
            };
            *pos += 1;
            let key = match tok {
                Token::Close if nested => return Ok(out),
                Token::Word(w) => w.clone(),
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("expected a key, got {other:?}"),
                    })
                }
            };
            let Some((vline, vtok)) = tokens.get(*pos) else {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("key {key} has no value"),
                });
            };
            *pos += 1;
            let value = match vtok {
                Token::Open => Value::List(parse_list(tokens, pos, true)?),
                Token::Quoted(s) => Value::Str(s.clone()),
                Token::Word(w) => w.parse::<f64>().map(Value::Num).map_err(|_| Error::Parse {
                    line: *vline,
                    message: format!("bad value {w:?} for key {key}"),
                })?,
                Token::Close => {
                    return Err(Error::Parse {
                        line: *vline,
                        message: format!("key {key} has no value"),
                    })
                }
            };
            out.push((key, value));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let k = karate();
        assert_eq!(k.graph.node_count(), 34);
        assert_eq!(k.graph.edge_count(), 78);
        assert_eq!(k.labels.k(), 2);
        let hi = k.labels.as_slice().iter().filter(|&&c| c == k.labels.as_slice()[0]).count();
        assert_eq!(hi, 16);
        assert_eq!(k.graph.degrees()[33], 17);
        assert_eq!(k.graph.degrees()[0], 16);
    }

    const SAMPLE: &str = r#"
Creator "test"
graph
[
  directed 1
  node [ id 1 label "a.com" value 0 source "x" ]
  node [ id 2 label "b.com" value 1 source "y" ]
  node [ id 3 label "c.com" value 1 source "y" ]
  node [ id 4 label "lonely.com" value 0 source "z" ]
  node [ id 5 label "self.com" value 1 source "z" ]
  edge [ source 1 target 2 ]
  edge [ source 2 target 1 ]
  edge [ source 3 target 2 ]
  edge [ source 5 target 5 ]
]
"#;

    #[test]
    fn gml_symmetrizes_and_drops_isolated() {
        let d = parse_polblogs_gml(SAMPLE).unwrap();
        assert_eq!(d.graph.node_count(), 3);
        assert_eq!(d.graph.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(d.labels.names(), &["liberal".to_string(), "conservative".to_string()]);
        assert_eq!(d.labels.as_slice(), &[0, 1, 1]);
    }

    #[test]
    fn gml_errors() {
        assert!(parse_polblogs_gml("graph [ node [ id 1 value 0 ] edge [ source 1 target 9 ] ]").is_err());
        assert!(parse_polblogs_gml("graph [ node [ id 1 ]").is_err());
        assert!(parse_polblogs_gml("nothing 1").is_err());
        assert!(matches!(gml::parse("a \"open"), Err(Error::Parse { line: 1, .. })));
    }
}
