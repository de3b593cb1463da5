//! Versioned plain-text model format, chosen for cross-language
//! reproducibility. Coefficients and thresholds are printed with Rust's
//! shortest round-trip `f64` formatting, so parse(write(model)) is bit-exact.
//!
//! ```text
//! drboost-model v1
//! loss exponential
//! features 23
//! terms 2
//! term 0.4236489301936017
//! split 3 0.75
//! leaf 1
//! leaf -1
//! term 0.25
//! leaf 1
//! ```
//!
//! Tree nodes appear in preorder; `split <feature> <threshold>` is followed
//! by the left subtree then the right subtree.

use crate::CliError;
use drboost::{Ensemble, MarginLoss, Node, Tree};
use std::fmt::Write as _;
use std::path::Path;

const MAGIC: &str = "drboost-model v1";

pub struct ModelFile {
    pub loss: MarginLoss,
    pub features: usize,
    pub ensemble: Ensemble,
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<(), CliError> {
    std::fs::write(path, render(model))?;
    Ok(())
}

pub fn render(model: &ModelFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "loss {}", model.loss.name());
    let _ = writeln!(out, "features {}", model.features);
    let _ = writeln!(out, "terms {}", model.ensemble.len());
    for term in model.ensemble.terms() {
        let _ = writeln!(out, "term {}", term.coefficient);
        render_node(term.learner.root(), &mut out);
    }
    out
}

fn render_node(node: &Node, out: &mut String) {
    match node {
        Node::Leaf { value } => {
            let _ = writeln!(out, "leaf {value}");
        }
        Node::Split { feature, threshold, left, right } => {
            let _ = writeln!(out, "split {feature} {threshold}");
            render_node(left, out);
            render_node(right, out);
        }
    }
}

pub fn read_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse(&text).map_err(|m| CliError::Data(format!("{}: {m}", path.display())))
}

pub fn parse(text: &str) -> Result<ModelFile, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(format!("missing header {MAGIC:?}"));
    }
    let loss_line = lines.next().ok_or("missing loss line")?;
    let loss = match loss_line.trim().strip_prefix("loss ") {
        Some(name) => MarginLoss::parse(name.trim()).map_err(|e| e.to_string())?,
        None => return Err(format!("expected `loss <kind>`, got {loss_line:?}")),
    };
    let features = field(lines.next(), "features")?;
    let terms = field(lines.next(), "terms")?;

    let mut ensemble = Ensemble::new();
    for t in 0..terms {
        let line = lines.next().ok_or(format!("missing term {t}"))?;
        let coefficient: f64 = match line.trim().strip_prefix("term ") {
            Some(v) => v.trim().parse().map_err(|_| format!("bad coefficient {v:?}"))?,
            None => return Err(format!("expected `term <coef>`, got {line:?}")),
        };
        let root = parse_node(&mut lines)?;
        ensemble.push(coefficient, Tree::new(features, root));
    }
    if lines.next().is_some() {
        return Err("trailing content after the last tree".into());
    }
    Ok(ModelFile { loss, features, ensemble })
}

fn field(line: Option<&str>, name: &str) -> Result<usize, String> {
    let line = line.ok_or(format!("missing {name} line"))?;
    match line.trim().strip_prefix(name).map(str::trim) {
        Some(v) => v.parse().map_err(|_| format!("bad {name} value {v:?}")),
        None => Err(format!("expected `{name} <count>`, got {line:?}")),
    }
}

fn parse_node<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Node, String> {
    let line = lines.next().ok_or("unexpected end of tree")?.trim();
    if let Some(v) = line.strip_prefix("leaf ") {
        let value: f64 = v.trim().parse().map_err(|_| format!("bad leaf value {v:?}"))?;
        return Ok(Node::Leaf { value });
    }
    if let Some(rest) = line.strip_prefix("split ") {
        let mut parts = rest.split_whitespace();
        let feature: usize = parts
            .next()
            .ok_or("split missing feature")?
            .parse()
            .map_err(|_| "bad split feature".to_string())?;
        let threshold: f64 = parts
            .next()
            .ok_or("split missing threshold")?
            .parse()
            .map_err(|_| "bad split threshold".to_string())?;
        let left = parse_node(lines)?;
        let right = parse_node(lines)?;
        return Ok(Node::Split {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        });
    }
    Err(format!("unrecognized node line {line:?}"))
}
