//! Bracket notation for trees: `[x]0` and `[e2]0` are leaves, `[in]0` is a
//! free leaf, `[ [x]0 [e1]0 ]1` is a layer-1 node. A trailing `!` after the
//! layer marks a freed edge. A whole literal may end in `:out`, `:eK` or
//! `:pruned` to give the root mode.

use super::{LeafDecor, RootMode, Tree};
use crate::error::{Error, Result};

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.error("expected a number"))
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn tree(&mut self) -> Result<Tree> {
        self.expect(b'[')?;
        let mut children = Vec::new();
        let mut leaf = None;
        match self.peek() {
            Some(b'[') | Some(b']') => {
                while self.peek() == Some(b'[') {
                    children.push(self.tree()?);
                }
            }
            _ => {
                let w = self.word();
                leaf = Some(match w.as_str() {
                    "x" => LeafDecor::X,
                    "in" => LeafDecor::Free,
                    _ => match w.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()) {
                        Some(i) if i >= 1 => LeafDecor::Basis(i),
                        _ => return Err(self.error(&format!("unknown leaf '{w}'"))),
                    },
                });
            }
        }
        self.expect(b']')?;
        let layer = self.number()?;
        let freed = if self.peek() == Some(b'!') {
            self.pos += 1;
            true
        } else {
            false
        };
        match leaf {
            Some(decor) if layer == 0 => Ok(Tree::Leaf { decor, freed }),
            Some(_) => Err(self.error("leaves have layer 0")),
            None if layer == 0 => Err(self.error("nodes have layer at least 1")),
            None => {
                if children.iter().any(|c| c.layer() + 1 != layer) {
                    return Err(self.error("children must sit one layer below their parent"));
                }
                children.sort();
                Ok(Tree::Node { layer, children, freed })
            }
        }
    }
}

/// Parse a literal, returning the tree and its root mode when given.
pub fn parse_tree(text: &str) -> Result<(Tree, Option<RootMode>)> {
    let (body, suffix) = match text.rfind(':') {
        Some(i) => (&text[..i], Some(text[i + 1..].trim())),
        None => (text, None),
    };
    let mut p = Parser { s: body.as_bytes(), pos: 0 };
    let t = p.tree()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("trailing input"));
    }
    let root = match suffix {
        None => None,
        Some("out") => Some(RootMode::FreeOut),
        Some("pruned") => Some(RootMode::Pruned),
        Some(s) => match s.strip_prefix('e').and_then(|d| d.parse::<usize>().ok()) {
            Some(k) if k >= 1 => Some(RootMode::FixedBasis(k)),
            _ => return Err(Error::Parse(format!("unknown root mode '{s}'"))),
        },
    };
    Ok((t, root))
}

/// Canonical literal for a tree, with an optional root suffix.
pub fn format_tree(t: &Tree, root: Option<RootMode>) -> String {
    let mut s = String::new();
    write_tree(t, &mut s);
    match root {
        None => {}
        Some(RootMode::FreeOut) => s.push_str(":out"),
        Some(RootMode::Pruned) => s.push_str(":pruned"),
        Some(RootMode::FixedBasis(k)) => s.push_str(&format!(":e{k}")),
    }
    s
}

fn write_tree(t: &Tree, s: &mut String) {
    match t {
        Tree::Leaf { decor, freed } => {
            match decor {
                LeafDecor::X => s.push_str("[x]0"),
                LeafDecor::Free => s.push_str("[in]0"),
                LeafDecor::Basis(i) => s.push_str(&format!("[e{i}]0")),
            }
            if *freed {
                s.push('!');
            }
        }
        Tree::Node { layer, children, freed } => {
            s.push('[');
            for c in children {
                s.push(' ');
                write_tree(c, s);
            }
            if !children.is_empty() {
                s.push(' ');
            }
            s.push_str(&format!("]{layer}"));
            if *freed {
                s.push('!');
            }
        }
    }
}
