//! The HOMRF text format.
//!
//! ```text
//! HOMRF
//! <node count>
//! <label count per node>
//! <factor count>
//! <scope size> <node ids...>     (one block per factor)
//! <table values...>
//! J
//! <edge count>
//! <source factor> <target factor>
//! ORDER                          (optional)
//! <node permutation>
//! ```
//!
//! Tokens are whitespace separated and may span lines; `#` starts a comment.
//! Table values are row-major over the scope as listed.

use std::fmt::Write as _;

use crate::decomposition::NodeOrder;
use crate::error::{Error, Result};
use crate::jstructure::JStructure;
use crate::model::{FactorId, Model};

#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub model: Model,
    pub j: JStructure,
    pub order: Option<NodeOrder>,
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let body = line.split('#').next().unwrap_or("");
                body.split_whitespace().map(move |t| (i + 1, t))
            })
            .collect::<Vec<_>>();
        let last_line = text.lines().count().max(1);
        Tokens { items, pos: 0, last_line }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::Parse {
            line: self.last_line,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse { line, message: format!("expected {what}, found '{tok}'") })
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let (line, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse { line, message: format!("expected {what}, found '{tok}'") })
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let (line, tok) = self.next(word)?;
        if tok != word {
            return Err(Error::Parse { line, message: format!("expected '{word}', found '{tok}'") });
        }
        Ok(())
    }
}

/// Parses a model, closes its J section, and reads the optional order.
pub fn parse_model(text: &str) -> Result<ParsedModel> {
    let mut tk = Tokens::new(text);
    tk.keyword("HOMRF")?;
    let nodes = tk.usize("node count")?;
    let labels = (0..nodes).map(|v| tk.usize(&format!("label count of node {v}"))).collect::<Result<Vec<_>>>()?;
    let count = tk.usize("factor count")?;
    let mut factors = Vec::with_capacity(count);
    for f in 0..count {
        let arity = tk.usize(&format!("scope size of factor {f}"))?;
        let line = tk.line();
        let scope = (0..arity).map(|_| tk.usize(&format!("node id in factor {f}"))).collect::<Result<Vec<_>>>()?;
        let size: usize = scope.iter().map(|&v| labels.get(v).copied().unwrap_or(1)).product();
        let mut table = Vec::with_capacity(size);
        for k in 0..size {
            match tk.peek() {
                Some(tok) if tok.parse::<f64>().is_ok() => table.push(tk.f64("cost")?),
                _ => {
                    return Err(Error::Parse {
                        line: tk.line(),
                        message: format!(
                            "factor {f} (declared at line {line}): expected {size} table values, found {k}"
                        ),
                    })
                }
            }
        }
        factors.push((scope, table));
    }
    let model = Model::new(labels, factors)?;
    let mut edges: Vec<(FactorId, FactorId)> = Vec::new();
    if tk.peek().is_some() {
        tk.keyword("J")?;
        let n = tk.usize("edge count")?;
        for _ in 0..n {
            edges.push((tk.usize("edge source")?, tk.usize("edge target")?));
        }
    }
    let j = JStructure::new(&model, edges)?;
    let mut order = None;
    if tk.peek().is_some() {
        tk.keyword("ORDER")?;
        let perm = (0..model.node_count()).map(|_| tk.usize("node in order")).collect::<Result<Vec<_>>>()?;
        order = Some(NodeOrder::new(perm)?);
    }
    if let Some(tok) = tk.peek() {
        return Err(Error::Parse { line: tk.line(), message: format!("trailing input '{tok}'") });
    }
    Ok(ParsedModel { model, j, order })
}

/// Serializes in canonical form; values carry 17 significant digits so
/// parsing restores them bit for bit.
pub fn write_model(model: &Model, j: &JStructure, order: Option<&NodeOrder>) -> String {
    let mut out = String::from("HOMRF\n");
    let _ = writeln!(out, "{}", model.node_count());
    let _ = writeln!(out, "{}", join(model.label_counts().iter()));
    let _ = writeln!(out, "{}", model.factor_count());
    for f in 0..model.factor_count() {
        let scope = model.scope(f);
        let _ = writeln!(out, "{} {}", scope.len(), join(scope.iter()));
        let _ = writeln!(out, "{}", join(model.table(f).iter().map(|v| format!("{v:.16e}"))));
    }
    let _ = writeln!(out, "J\n{}", j.edges().len());
    for &(a, b) in j.edges() {
        let _ = writeln!(out, "{a} {b}");
    }
    if let Some(order) = order {
        let _ = writeln!(out, "ORDER\n{}", join(order.nodes().iter()));
    }
    out
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
