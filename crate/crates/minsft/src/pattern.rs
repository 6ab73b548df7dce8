//! The universal currency: finite multi-layer patterns, their text format,
//! and rule violations reported by the validators.

use crate::geom::{Box2, Coord, Pos2};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Support of a pattern: a 2D box or a stack of `depth` identical 2D boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub base: Box2,
    pub z0: Coord,
    pub depth: Coord,
}

impl Support {
    pub fn flat(base: Box2) -> Self {
        Support { base, z0: 0, depth: 1 }
    }

    pub fn is_3d(&self) -> bool {
        self.depth > 1 || self.z0 != 0
    }

    pub fn cells_per_section(&self) -> usize {
        (self.base.w * self.base.h) as usize
    }

    pub fn total_cells(&self) -> usize {
        self.cells_per_section() * self.depth as usize
    }
}

/// One named layer of symbol codes, row-major per section, sections stacked.
/// Code 0 is the layer's blank symbol by convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub name: String,
    pub codes: Vec<u32>,
}

/// A finite mapping from a box to per-layer symbol codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub support: Support,
    pub layers: Vec<Layer>,
}

impl Pattern {
    pub fn new_2d(base: Box2, layer_names: &[&str]) -> Self {
        Self::new_3d(Support::flat(base), layer_names)
    }

    pub fn new_3d(support: Support, layer_names: &[&str]) -> Self {
        assert!(support.base.w > 0 && support.base.h > 0 && support.depth > 0);
        let n = support.total_cells();
        let layers = layer_names
            .iter()
            .map(|name| Layer { name: (*name).to_string(), codes: vec![0; n] })
            .collect();
        Pattern { support, layers }
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    fn offset(&self, p: Pos2, z: Coord) -> usize {
        let b = self.support.base;
        debug_assert!(b.contains(p), "position {p:?} outside support {b:?}");
        let zrel = (z - self.support.z0) as usize;
        zrel * self.support.cells_per_section()
            + ((p.y - b.y0) * b.w + (p.x - b.x0)) as usize
    }

    pub fn get(&self, layer: usize, p: Pos2) -> u32 {
        self.get_z(layer, p, self.support.z0)
    }

    pub fn get_z(&self, layer: usize, p: Pos2, z: Coord) -> u32 {
        self.layers[layer].codes[self.offset(p, z)]
    }

    pub fn set(&mut self, layer: usize, p: Pos2, code: u32) {
        self.set_z(layer, p, self.support.z0, code);
    }

    pub fn set_z(&mut self, layer: usize, p: Pos2, z: Coord, code: u32) {
        let at = self.offset(p, z);
        self.layers[layer].codes[at] = code;
    }

    /// Extract one section of a stack as a 2D pattern.
    pub fn section(&self, z: Coord) -> Pattern {
        assert!(z >= self.support.z0 && z < self.support.z0 + self.support.depth);
        let names: Vec<&str> = self.layers.iter().map(|l| l.name.as_str()).collect();
        let mut out = Pattern::new_2d(self.support.base, &names);
        let per = self.support.cells_per_section();
        let at = (z - self.support.z0) as usize * per;
        for (i, layer) in self.layers.iter().enumerate() {
            out.layers[i].codes.copy_from_slice(&layer.codes[at..at + per]);
        }
        out
    }

    /// Extract the sub-pattern on `b` (2D patterns only).
    pub fn crop(&self, b: Box2) -> Pattern {
        assert!(!self.support.is_3d());
        assert!(self.support.base.contains_box(&b), "crop box outside support");
        let names: Vec<&str> = self.layers.iter().map(|l| l.name.as_str()).collect();
        let mut out = Pattern::new_2d(b, &names);
        for (i, _) in self.layers.iter().enumerate() {
            for p in b.iter() {
                out.set(i, p, self.get(i, p));
            }
        }
        out
    }
}

/// A reified broken local rule: which rule, where, and a short explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleViolation {
    pub rule: &'static str,
    pub positions: Vec<(Coord, Coord, Coord)>,
    pub detail: String,
}

impl RuleViolation {
    pub fn at(rule: &'static str, p: Pos2, detail: String) -> Self {
        RuleViolation { rule, positions: vec![(p.x, p.y, 0)], detail }
    }

    pub fn at_z(rule: &'static str, p: Pos2, z: Coord, detail: String) -> Self {
        RuleViolation { rule, positions: vec![(p.x, p.y, z)], detail }
    }
}

/// Deterministic report order: by first position, then rule id.
pub fn sort_violations(violations: &mut [RuleViolation]) {
    violations.sort_by(|a, b| {
        let ka = (a.positions.first().copied().unwrap_or((0, 0, 0)), a.rule);
        let kb = (b.positions.first().copied().unwrap_or((0, 0, 0)), b.rule);
        ka.cmp(&kb)
    });
}

#[derive(Debug, Error)]
pub enum PatternIoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown layer name {0:?}")]
    UnknownLayer(String),
    #[error("missing layer {0:?}")]
    MissingLayer(&'static str),
}

fn parse_err(line: usize, msg: impl Into<String>) -> PatternIoError {
    PatternIoError::Parse { line, msg: msg.into() }
}

pub const PATTERN_MAGIC: &str = "sft-pattern v1";

/// Serialize to the v1 text format. Deterministic bytes for a given value.
pub fn write_pattern(p: &Pattern) -> Vec<u8> {
    let mut s = String::new();
    let b = p.support.base;
    s.push_str(PATTERN_MAGIC);
    s.push('\n');
    if p.support.is_3d() {
        let _ = writeln!(
            s,
            "support {} {} {} {} {} {}",
            b.x0, b.y0, p.support.z0, b.w, b.h, p.support.depth
        );
    } else {
        let _ = writeln!(s, "support {} {} {} {}", b.x0, b.y0, b.w, b.h);
    }
    let names: Vec<&str> = p.layers.iter().map(|l| l.name.as_str()).collect();
    let _ = writeln!(s, "layers {}", names.join(","));
    for layer in &p.layers {
        let _ = writeln!(s, "layer {}", layer.name);
        let per_row = b.w as usize;
        for row in layer.codes.chunks(per_row) {
            let mut first = true;
            for c in row {
                if !first {
                    s.push(' ');
                }
                let _ = write!(s, "{c}");
                first = false;
            }
            s.push('\n');
        }
    }
    s.into_bytes()
}

/// Parse the v1 text format.
pub fn parse_pattern(bytes: &[u8]) -> Result<Pattern, PatternIoError> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, e.to_string()))?;
    let mut lines = text.lines().enumerate();

    let (_, magic) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if magic.trim() != PATTERN_MAGIC {
        return Err(parse_err(1, format!("bad magic {magic:?}")));
    }

    let (ln, supp) = lines.next().ok_or_else(|| parse_err(2, "missing support line"))?;
    let toks: Vec<&str> = supp.split_whitespace().collect();
    let support = match toks.as_slice() {
        ["support", x0, y0, w, h] => {
            let g = |s: &str| s.parse::<Coord>().map_err(|e| parse_err(ln + 1, e.to_string()));
            Support::flat(Box2::new(g(x0)?, g(y0)?, g(w)?, g(h)?))
        }
        ["support", x0, y0, z0, w, h, d] => {
            let g = |s: &str| s.parse::<Coord>().map_err(|e| parse_err(ln + 1, e.to_string()));
            Support { base: Box2::new(g(x0)?, g(y0)?, g(w)?, g(h)?), z0: g(z0)?, depth: g(d)? }
        }
        _ => return Err(parse_err(ln + 1, "malformed support line")),
    };
    if support.base.w <= 0 || support.base.h <= 0 || support.depth <= 0 {
        return Err(parse_err(ln + 1, "support extents must be strictly positive"));
    }

    let (ln, names_line) = lines.next().ok_or_else(|| parse_err(3, "missing layers line"))?;
    let names_line = names_line
        .strip_prefix("layers ")
        .ok_or_else(|| parse_err(ln + 1, "expected `layers <names>`"))?;
    let declared: Vec<String> = names_line.split(',').map(|s| s.trim().to_string()).collect();
    if declared.is_empty() || declared.iter().any(|n| n.is_empty()) {
        return Err(parse_err(ln + 1, "empty layer name"));
    }

    let total = support.total_cells();
    let mut layers: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut buf: Vec<u32> = Vec::new();

    let finish = |name: Option<String>,
                      buf: &mut Vec<u32>,
                      layers: &mut BTreeMap<String, Vec<u32>>,
                      ln: usize|
     -> Result<(), PatternIoError> {
        if let Some(n) = name {
            if buf.len() != total {
                return Err(parse_err(
                    ln,
                    format!("layer {n:?} has {} codes, support needs {total}", buf.len()),
                ));
            }
            layers.insert(n, std::mem::take(buf));
        }
        Ok(())
    };

    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("layer ") {
            let name = name.trim().to_string();
            if !declared.contains(&name) {
                return Err(PatternIoError::UnknownLayer(name));
            }
            finish(current.take(), &mut buf, &mut layers, ln + 1)?;
            current = Some(name);
        } else {
            if current.is_none() {
                return Err(parse_err(ln + 1, "symbol codes before any `layer` line"));
            }
            for tok in line.split_whitespace() {
                let c: u32 = tok.parse().map_err(|e| parse_err(ln + 1, format!("{e}: {tok:?}")))?;
                buf.push(c);
            }
            if buf.len() > total {
                return Err(parse_err(ln + 1, "more codes than the support holds"));
            }
        }
    }
    finish(current.take(), &mut buf, &mut layers, text.lines().count())?;

    let mut out_layers = Vec::with_capacity(declared.len());
    for name in &declared {
        let codes = layers
            .remove(name)
            .ok_or_else(|| parse_err(text.lines().count(), format!("layer {name:?} missing body")))?;
        out_layers.push(Layer { name: name.clone(), codes });
    }
    Ok(Pattern { support, layers: out_layers })
}
