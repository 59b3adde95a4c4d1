//! Parser and serializer for the GML subset used by the bundled network
//! files: `graph [ ... node [ id N ... ] ... edge [ source N target M ] ]`
//! with nested bracket lists, integer/real/quoted-string values.

use crate::error::DfmError;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum GmlValue {
    Int(i64),
    Real(f64),
    Str(String),
    List(Vec<(String, GmlValue)>),
}

impl GmlValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GmlValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            GmlValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmlNode {
    pub id: i64,
    /// Attributes other than `id`, in document order.
    pub attrs: Vec<(String, GmlValue)>,
}

impl GmlNode {
    pub fn attr(&self, key: &str) -> Option<&GmlValue> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmlGraph {
    pub directed: bool,
    pub nodes: Vec<GmlNode>,
    pub edges: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Key(String),
    Num(String),
    Str(String),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '[' => {
                out.push((Token::Open, line));
                chars.next();
            }
            ']' => {
                out.push((Token::Close, line));
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\n') => {
                            return Err(DfmError::GmlSyntax {
                                line,
                                msg: "unterminated string".into(),
                            })
                        }
                        Some(ch) => s.push(ch),
                        None => {
                            return Err(DfmError::GmlSyntax {
                                line,
                                msg: "unterminated string".into(),
                            })
                        }
                    }
                }
                out.push((Token::Str(s), line));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        s.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Token::Key(s), line));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_digit()
                        || ch == '-'
                        || ch == '+'
                        || ch == '.'
                        || ch == 'e'
                        || ch == 'E'
                    {
                        s.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Token::Num(s), line));
            }
            other => {
                return Err(DfmError::GmlSyntax {
                    line,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

fn parse_list(
    tokens: &[(Token, usize)],
    pos: &mut usize,
    top_level: bool,
) -> Result<Vec<(String, GmlValue)>> {
    let mut items = Vec::new();
    loop {
        if *pos >= tokens.len() {
            if top_level {
                return Ok(items);
            }
            let line = tokens.last().map(|(_, l)| *l).unwrap_or(1);
            return Err(DfmError::GmlSyntax {
                line,
                msg: "missing closing bracket".into(),
            });
        }
        match &tokens[*pos] {
            (Token::Close, line) => {
                if top_level {
                    return Err(DfmError::GmlSyntax {
                        line: *line,
                        msg: "unmatched closing bracket".into(),
                    });
                }
                *pos += 1;
                return Ok(items);
            }
            (Token::Key(key), line) => {
                let key = key.clone();
                let line = *line;
                *pos += 1;
                if *pos >= tokens.len() {
                    return Err(DfmError::GmlSyntax {
                        line,
                        msg: format!("key `{key}` has no value"),
                    });
                }
                let value = match &tokens[*pos] {
                    (Token::Open, _) => {
                        *pos += 1;
                        GmlValue::List(parse_list(tokens, pos, false)?)
                    }
                    (Token::Num(raw), line) => {
                        let v = if raw.contains('.') || raw.contains('e') || raw.contains('E') {
                            GmlValue::Real(raw.parse().map_err(|_| DfmError::GmlSyntax {
                                line: *line,
                                msg: format!("bad number `{raw}`"),
                            })?)
                        } else {
                            GmlValue::Int(raw.parse().map_err(|_| DfmError::GmlSyntax {
                                line: *line,
                                msg: format!("bad integer `{raw}`"),
                            })?)
                        };
                        *pos += 1;
                        v
                    }
                    (Token::Str(s), _) => {
                        let v = GmlValue::Str(s.clone());
                        *pos += 1;
                        v
                    }
                    (tok, line) => {
                        return Err(DfmError::GmlSyntax {
                            line: *line,
                            msg: format!("unexpected token {tok:?} after key `{key}`"),
                        })
                    }
                };
                items.push((key, value));
            }
            (tok, line) => {
                return Err(DfmError::GmlSyntax {
                    line: *line,
                    msg: format!("expected a key, found {tok:?}"),
                })
            }
        }
    }
}

/// Parses a GML document into a graph, validating node-id uniqueness and
/// edge endpoints.
pub fn parse_gml(text: &str) -> Result<GmlGraph> {
    let tokens = tokenize(text)?;
    let mut pos = 0usize;
    let doc = parse_list(&tokens, &mut pos, true)?;
    let graph_items = doc
        .iter()
        .find_map(|(k, v)| match (k.as_str(), v) {
            ("graph", GmlValue::List(items)) => Some(items),
            _ => None,
        })
        .ok_or_else(|| DfmError::Gml("no `graph [ ... ]` block".into()))?;

    let mut directed = false;
    let mut nodes: Vec<GmlNode> = Vec::new();
    let mut edges = Vec::new();
    for (key, value) in graph_items {
        match (key.as_str(), value) {
            ("directed", GmlValue::Int(v)) => directed = *v != 0,
            ("node", GmlValue::List(items)) => {
                let mut id = None;
                let mut attrs = Vec::new();
                for (k, v) in items {
                    if k == "id" {
                        id = v.as_int();
                    } else {
                        attrs.push((k.clone(), v.clone()));
                    }
                }
                let id = id.ok_or_else(|| DfmError::Gml("node without integer id".into()))?;
                nodes.push(GmlNode { id, attrs });
            }
            ("edge", GmlValue::List(items)) => {
                let get = |name: &str| {
                    items
                        .iter()
                        .find(|(k, _)| k == name)
                        .and_then(|(_, v)| v.as_int())
                };
                let source = get("source")
                    .ok_or_else(|| DfmError::Gml("edge without integer source".into()))?;
                let target = get("target")
                    .ok_or_else(|| DfmError::Gml("edge without integer target".into()))?;
                edges.push((source, target));
            }
            _ => {} // other graph attributes ignored
        }
    }

    let mut seen = std::collections::HashSet::new();
    for node in &nodes {
        if !seen.insert(node.id) {
            return Err(DfmError::Gml(format!("duplicate node id {}", node.id)));
        }
    }
    for &(s, t) in &edges {
        if !seen.contains(&s) || !seen.contains(&t) {
            return Err(DfmError::Gml(format!(
                "edge ({s},{t}) references an undeclared node"
            )));
        }
    }
    Ok(GmlGraph {
        directed,
        nodes,
        edges,
    })
}

fn write_value(out: &mut String, value: &GmlValue, indent: usize) {
    match value {
        GmlValue::Int(v) => out.push_str(&v.to_string()),
        GmlValue::Real(v) => out.push_str(&format!("{v:?}")),
        GmlValue::Str(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        GmlValue::List(items) => {
            out.push_str("[\n");
            for (k, v) in items {
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(k);
                out.push(' ');
                write_value(out, v, indent + 1);
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
    }
}

/// Serializes a graph back to GML text.
pub fn serialize_gml(graph: &GmlGraph) -> String {
    let mut out = String::from("graph [\n");
    if graph.directed {
        out.push_str("  directed 1\n");
    }
    for node in &graph.nodes {
        out.push_str("  node [\n");
        out.push_str(&format!("    id {}\n", node.id));
        for (k, v) in &node.attrs {
            out.push_str("    ");
            out.push_str(k);
            out.push(' ');
            write_value(&mut out, v, 2);
            out.push('\n');
        }
        out.push_str("  ]\n");
    }
    for &(s, t) in &graph.edges {
        out.push_str(&format!(
            "  edge [\n    source {s}\n    target {t}\n  ]\n"
        ));
    }
    out.push_str("]\n");
    out
}
