//! Newick text for unrooted trees.
//!
//! Output is deterministic: the tree is hung from the internal node adjacent
//! to the lexicographically smallest label, which becomes a trifurcating
//! root, and siblings are ordered by their smallest descendant label.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tree::{check_labels, LabeledTree, NodeId};

pub fn to_newick(tree: &LabeledTree) -> String {
    let smallest = (0..tree.n())
        .min_by(|&a, &b| tree.labels()[a].cmp(&tree.labels()[b]))
        .expect("tree has leaves");
    let root = tree.attachment(smallest);
    let mut children: Vec<(String, &str)> = tree
        .neighbors(root)
        .iter()
        .map(|&child| render(tree, child, root))
        .collect();
    children.sort_by(|a, b| a.1.cmp(b.1));
    let mut out = String::from("(");
    out.push_str(
        &children
            .iter()
            .map(|c| c.0.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str(");");
    out
}

/// Renders the subtree at `node` away from `parent`; returns the text and
/// the smallest label inside it.
fn render(tree: &LabeledTree, node: NodeId, parent: NodeId) -> (String, &str) {
    if let Some(label) = tree.label_of(node) {
        return (label.to_string(), label);
    }
    let mut children: Vec<_> = tree
        .neighbors(node)
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| render(tree, c, node))
        .collect();
    children.sort_by(|a, b| a.1.cmp(b.1));
    let min = children[0].1;
    let text = format!(
        "({})",
        children
            .iter()
            .map(|c| c.0.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    (text, min)
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    adj: Vec<Vec<usize>>,
    names: Vec<Option<String>>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            other => Err(Error::format(format!(
                "newick: expected '{}' at byte {}, found {}",
                byte as char,
                self.pos,
                other.map_or("end of input".to_string(), |b| format!("'{}'", b as char))
            ))),
        }
    }

    fn name(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && !b"(),;:".contains(&self.text[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.text[start..self.pos])
            .trim()
            .to_string()
    }

    fn branch_length(&mut self) -> Result<()> {
        if self.peek() == Some(b':') {
            self.pos += 1;
            let len = self.name();
            len.parse::<f64>()
                .map_err(|_| Error::format(format!("newick: bad branch length {len:?}")))?;
        }
        Ok(())
    }

    fn node(&mut self) -> Result<usize> {
        let id = self.adj.len();
        self.adj.push(Vec::new());
        self.names.push(None);
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = self.node()?;
                self.adj[id].push(child);
                self.adj[child].push(id);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    _ => break,
                }
            }
            self.expect(b')')?;
            // internal node names are ignored
            self.name();
        } else {
            let name = self.name();
            if name.is_empty() {
                return Err(Error::format(format!(
                    "newick: empty leaf name at byte {}",
                    self.pos
                )));
            }
            self.names[id] = Some(name);
        }
        self.branch_length()?;
        Ok(id)
    }
}

/// Parses a Newick tree; objects are numbered in order of appearance.
pub fn parse_newick(text: &str) -> Result<LabeledTree> {
    parse_impl(text, None)
}

/// Parses a Newick tree over exactly the given `labels`, numbering objects
/// by their position in `labels`.
pub fn parse_newick_with_labels(text: &str, labels: &[String]) -> Result<LabeledTree> {
    parse_impl(text, Some(labels))
}

fn parse_impl(text: &str, labels: Option<&[String]>) -> Result<LabeledTree> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        adj: Vec::new(),
        names: Vec::new(),
    };
    let root = p.node()?;
    p.expect(b';')?;
    if p.peek().is_some() {
        return Err(Error::format("newick: trailing text after ';'"));
    }
    let Parser { mut adj, names, .. } = p;

    // An unrooted tree written with a bifurcating root: splice the root out.
    if names[root].is_none() && adj[root].len() == 2 {
        let (a, b) = (adj[root][0], adj[root][1]);
        adj[root].clear();
        for (x, y) in [(a, b), (b, a)] {
            let slot = adj[x].iter().position(|&v| v == root).expect("child links root");
            adj[x][slot] = y;
        }
    }

    let leaf_names: Vec<String> = names.iter().flatten().cloned().collect();
    let labels: Vec<String> = match labels {
        Some(l) => l.to_vec(),
        None => leaf_names.clone(),
    };
    check_labels(&labels)?;
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut seen = vec![false; labels.len()];
    for name in &leaf_names {
        match index.get(name.as_str()) {
            Some(&k) if !seen[k] => seen[k] = true,
            Some(_) => return Err(Error::format(format!("newick: leaf {name:?} appears twice"))),
            None => return Err(Error::format(format!("newick: unknown leaf {name:?}"))),
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::format(format!("newick: leaf {:?} missing", labels[k])));
    }

    // drop the spliced-out root, if any
    let keep: Vec<bool> = adj
        .iter()
        .enumerate()
        .map(|(i, a)| !(i == root && a.is_empty()))
        .collect();
    let mut remap = vec![usize::MAX; adj.len()];
    let mut next = 0;
    for (i, &k) in keep.iter().enumerate() {
        if k {
            remap[i] = next;
            next += 1;
        }
    }
    let compact_adj: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, nbrs)| nbrs.iter().map(|&v| remap[v]).collect())
        .collect();
    let kind: Vec<Option<usize>> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, name)| name.as_ref().map(|nm| index[nm.as_str()]))
        .collect();
    let labels: Arc<[String]> = labels.into();
    Ok(LabeledTree::from_graph(labels, &compact_adj, &kind)?)
}
