//! Model files: the tree text form preceded by one comment line recording
//! the attribute count and label set, e.g.
//!
//! ```text
//! # msi-model attributes=2 labels=0,1
//! def tree{X1}:
//!     if X1 <= 50:
//!         return 0
//!     else:
//!         return 1
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::split::Split;
use crate::tree::{NodeId, Tree, TreeNode};

const MAGIC: &str = "# msi-model";

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub tree: Tree,
    pub n_classes: usize,
    declared: bool,
}

impl Model {
    pub fn new(tree: Tree, n_classes: usize) -> Self {
        Model {
            tree,
            n_classes,
            declared: true,
        }
    }

    /// Whether the attribute count came from a header rather than being
    /// inferred from the attributes the tree uses.
    pub fn declares_attributes(&self) -> bool {
        self.declared
    }

    /// Adopts `n_features` as the attribute count of a model read without a
    /// header; a declared count must match exactly.
    pub fn fit_width(&mut self, n_features: usize) -> Result<()> {
        if self.declared {
            if let Some(&a) = self.tree.used_attributes().last() {
                if a >= n_features {
                    return Err(Error::AttributeOutOfRange {
                        attribute: a,
                        available: n_features,
                    });
                }
            }
            if n_features != self.tree.n_features() {
                return Err(Error::DimensionMismatch {
                    expected: self.tree.n_features(),
                    found: n_features,
                });
            }
            return Ok(());
        }
        self.tree = self.tree.clone().with_n_features(n_features)?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let labels: Vec<String> = (0..self.n_classes).map(|c| c.to_string()).collect();
        format!(
            "{MAGIC} attributes={} labels={}\n{}",
            self.tree.n_features(),
            labels.join(","),
            self.tree.serialize()
        )
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::parse(&text)
    }

    /// Parses a model file. The header comment is optional; without it the
    /// attribute count is taken from the highest attribute used and the
    /// label set from the returned labels.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();

        let mut header: Option<(usize, usize)> = None;
        while let Some(&(no, line)) = lines.peek() {
            if !line.starts_with('#') {
                break;
            }
            if let Some(rest) = line.strip_prefix(MAGIC) {
                header = Some(parse_header(no, rest)?);
            }
            lines.next();
        }

        let (no, def) = lines.next().ok_or(Error::ModelParse {
            line: 0,
            message: "missing `def tree{...}:` line".into(),
        })?;
        let listed = parse_def(no, def)?;

        let lines: Vec<(usize, &str)> = lines.collect();
        let mut pos = 0;
        let ast = parse_block(&lines, &mut pos, 1)?;
        if let Some(&(no, _)) = lines.get(pos) {
            return Err(Error::ModelParse {
                line: no,
                message: "unexpected trailing content".into(),
            });
        }

        let used = ast.attributes();
        if used != listed {
            return Err(Error::ModelParse {
                line: no,
                message: format!(
                    "header lists {} but body uses {}",
                    fmt_attrs(&listed),
                    fmt_attrs(&used)
                ),
            });
        }
        let max_attr = used.last().map_or(0, |a| a + 1);
        let max_label = ast.max_label() + 1;
        let (n_features, n_classes) = header.unwrap_or((max_attr, max_label));
        if let Some(&a) = used.last() {
            if a >= n_features {
                return Err(Error::AttributeOutOfRange {
                    attribute: a,
                    available: n_features,
                });
            }
        }
        if max_label > n_classes {
            return Err(Error::ModelParse {
                line: no,
                message: format!("label {} outside header label set", max_label - 1),
            });
        }

        let mut tree = Tree::new(TreeNode::leaf(ast.first_label(), Vec::new()), n_features);
        attach(&mut tree, NodeId::ROOT, &ast)?;
        Ok(Model {
            tree,
            n_classes,
            declared: header.is_some(),
        })
    }
}

fn fmt_attrs(a: &[usize]) -> String {
    let names: Vec<String> = a.iter().map(|j| format!("X{}", j + 1)).collect();
    format!("{{{}}}", names.join(","))
}

enum Ast {
    Leaf(usize),
    Branch(Split, Box<Ast>, Box<Ast>),
}

impl Ast {
    fn attributes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(a) = stack.pop() {
            if let Ast::Branch(s, l, r) = a {
                out.push(s.feature);
                stack.push(l);
                stack.push(r);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn max_label(&self) -> usize {
        match self {
            Ast::Leaf(c) => *c,
            Ast::Branch(_, l, r) => l.max_label().max(r.max_label()),
        }
    }

    fn first_label(&self) -> usize {
        match self {
            Ast::Leaf(c) => *c,
            Ast::Branch(_, l, _) => l.first_label(),
        }
    }
}

fn attach(tree: &mut Tree, at: NodeId, ast: &Ast) -> Result<()> {
    if let Ast::Branch(split, l, r) = ast {
        let (li, ri) = tree.grow(
            at,
            *split,
            TreeNode::leaf(l.first_label(), Vec::new()),
            TreeNode::leaf(r.first_label(), Vec::new()),
        )?;
        attach(tree, li, l)?;
        attach(tree, ri, r)?;
    }
    Ok(())
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelParse {
        line,
        message: message.into(),
    }
}

fn parse_header(no: usize, rest: &str) -> Result<(usize, usize)> {
    let mut attributes = None;
    let mut classes = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("attributes", v)) => {
                attributes = Some(v.parse().map_err(|_| err(no, "bad attribute count"))?)
            }
            Some(("labels", v)) => {
                let labels: Vec<usize> = v
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(no, "bad label list"))?;
                classes = Some(labels.iter().max().map_or(0, |m| m + 1));
            }
            _ => return Err(err(no, format!("unknown header field {field:?}"))),
        }
    }
    match (attributes, classes) {
        (Some(a), Some(c)) => Ok((a, c)),
        _ => Err(err(no, "header needs attributes= and labels=")),
    }
}

fn parse_attr(no: usize, token: &str) -> Result<usize> {
    token
        .strip_prefix('X')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .map(|n| n - 1)
        .ok_or_else(|| err(no, format!("bad attribute {token:?}")))
}

fn parse_def(no: usize, line: &str) -> Result<Vec<usize>> {
    let inner = line
        .strip_prefix("def tree{")
        .and_then(|s| s.strip_suffix("}:"))
        .ok_or_else(|| err(no, "expected `def tree{...}:`"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|t| parse_attr(no, t)).collect()
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start_matches(' ').len()
}

fn parse_block(lines: &[(usize, &str)], pos: &mut usize, level: usize) -> Result<Ast> {
    let &(no, line) = lines
        .get(*pos)
        .ok_or_else(|| err(lines.last().map_or(0, |l| l.0), "unexpected end of model"))?;
    if indent_of(line) != 4 * level {
        return Err(err(
            no,
            format!("expected indentation of {} spaces", 4 * level),
        ));
    }
    *pos += 1;
    let body = line.trim();
    if let Some(label) = body.strip_prefix("return ") {
        let label = label
            .trim()
            .parse()
            .map_err(|_| err(no, format!("bad label {label:?}")))?;
        return Ok(Ast::Leaf(label));
    }
    let cond = body
        .strip_prefix("if ")
        .and_then(|s| s.strip_suffix(':'))
        .ok_or_else(|| err(no, "expected `if` or `return`"))?;
    let (attr, threshold) = cond
        .split_once(" <= ")
        .ok_or_else(|| err(no, "expected `X<k> <= <threshold>`"))?;
    let feature = parse_attr(no, attr.trim())?;
    let threshold: f64 = threshold
        .trim()
        .parse()
        .map_err(|_| err(no, format!("bad threshold {threshold:?}")))?;
    let split = Split::new(feature, threshold).map_err(|_| err(no, "threshold must be finite"))?;
    let left = parse_block(lines, pos, level + 1)?;
    match lines.get(*pos) {
        Some(&(_, l)) if indent_of(l) == 4 * level && l.trim() == "else:" => *pos += 1,
        Some(&(n, _)) => return Err(err(n, "expected `else:`")),
        None => return Err(err(no, "missing `else:`")),
    }
    let right = parse_block(lines, pos, level + 1)?;
    Ok(Ast::Branch(split, Box::new(left), Box::new(right)))
}
