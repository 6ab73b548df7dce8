//! First-layer Robinson tiles, their local rules, supertile generation, the
//! alignment layer, quarter-plane tiling and block completion.
//!
//! Tiles are modeled by their arrow content. Every arrow crossing a tile edge
//! sits on one of three tracks (minus / center / plus) and is either outgoing
//! or incoming; two adjacent tiles are legal when the arrows across the shared
//! edge pair up exactly. Corners emit on all four edges (doubled on the two
//! edges facing the structure they anchor), arm tiles carry the principal
//! arrows of a cross arm through and absorb the lateral arrows.

use crate::geom::{line_level, line_orient_bit, Box2, Coord, Pos2};
use crate::pattern::{sort_violations, Pattern, RuleViolation};
use std::collections::HashMap;
use thiserror::Error;

pub const LAYER_ROBINSON: &str = "robinson";

#[derive(Debug, Error)]
pub enum RobinsonError {
    #[error("supertile order {0} exceeds the configured cap {1}")]
    OrderTooLarge(u32, u32),
    #[error("window side {0} exceeds the configured cap {1}")]
    WindowTooLarge(i64, i64),
    #[error("pattern does not declare the {0:?} layer")]
    MissingLayer(&'static str),
    #[error("block embeds in no supertile up to order {0}")]
    NotFound(u32),
}

/// Corner orientation, named after the supertile corner the tile occupies.
/// A `Sw` corner has its doubled arms pointing north and east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orient {
    Sw,
    Se,
    Nw,
    Ne,
}

impl Orient {
    pub const ALL: [Orient; 4] = [Orient::Sw, Orient::Se, Orient::Nw, Orient::Ne];

    pub fn from_bits(bx: u8, by: u8) -> Orient {
        match (bx, by) {
            (0, 0) => Orient::Sw,
            (1, 0) => Orient::Se,
            (0, 1) => Orient::Nw,
            _ => Orient::Ne,
        }
    }

    /// Horizontal half: 0 = west, 1 = east.
    pub fn bx(self) -> u8 {
        matches!(self, Orient::Se | Orient::Ne) as u8
    }

    /// Vertical half: 0 = south, 1 = north.
    pub fn by(self) -> u8 {
        matches!(self, Orient::Nw | Orient::Ne) as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Orient::Sw => "sw",
            Orient::Se => "se",
            Orient::Nw => "nw",
            Orient::Ne => "ne",
        }
    }

    pub fn parse(s: &str) -> Option<Orient> {
        match s {
            "sw" => Some(Orient::Sw),
            "se" => Some(Orient::Se),
            "nw" => Some(Orient::Nw),
            "ne" => Some(Orient::Ne),
            _ => None,
        }
    }
}

/// Track of an arrow along an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir4 {
    N,
    E,
    S,
    W,
}

impl Dir4 {
    fn index(self) -> usize {
        match self {
            Dir4::N => 0,
            Dir4::E => 1,
            Dir4::S => 2,
            Dir4::W => 3,
        }
    }

    fn opposite(self) -> Dir4 {
        match self {
            Dir4::N => Dir4::S,
            Dir4::E => Dir4::W,
            Dir4::S => Dir4::N,
            Dir4::W => Dir4::E,
        }
    }
}

/// Non-blank Robinson symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileKind {
    Corner {
        red: bool,
        /// Petal valuation carried by the symbol: red corners exist with 0
        /// and 1, blue corners only with 0.
        bit: u8,
        orient: Orient,
    },
    Arm {
        /// Axis of the principal (through) arrows.
        vertical: bool,
        /// Direction the principal arrows point: N/S for vertical arms,
        /// E/W for horizontal ones.
        dir: Dir4,
        /// 1 = single principal arrow (3/5-arrow symbols),
        /// 2 = doubled (4/6-arrow symbols).
        pmult: u8,
        pside: Side,
        /// Lateral input multiplicity per side: 1 (3/4-arrow) or 2 (5/6).
        smult: u8,
        sside: Side,
    },
}

/// A full first+second layer symbol: tile kind plus the 0,1-counter pair on
/// arm tiles and the alignment mark (legal on single-principal arms only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobinsonTile {
    pub kind: TileKind,
    /// (i, j) with i attached to the row and j to the column. Arms only.
    pub parity: Option<(u8, u8)>,
    pub align: Option<Orient>,
}

impl RobinsonTile {
    pub fn corner(red: bool, bit: u8, orient: Orient) -> Self {
        RobinsonTile { kind: TileKind::Corner { red, bit, orient }, parity: None, align: None }
    }

    pub fn is_blue(&self) -> bool {
        matches!(self.kind, TileKind::Corner { red: false, .. })
    }

    pub fn is_corner(&self) -> bool {
        matches!(self.kind, TileKind::Corner { .. })
    }

    /// Number of arrows drawn in the symbol (3, 4, 5 or 6 for arms).
    pub fn arrow_count(&self) -> u8 {
        match self.kind {
            TileKind::Corner { .. } => 6,
            TileKind::Arm { pmult, smult, .. } => pmult + 2 * smult,
        }
    }
}

// ---------------------------------------------------------------------------
// symbol codes

const ALIGN_CODES: [Option<Orient>; 5] =
    [None, Some(Orient::Sw), Some(Orient::Se), Some(Orient::Nw), Some(Orient::Ne)];

pub fn encode_tile(t: &RobinsonTile) -> u32 {
    let mut c: u32 = 1;
    match t.kind {
        TileKind::Corner { red, bit, orient } => {
            c |= (red as u32) << 2;
            c |= (bit as u32) << 3;
            c |= ((orient.bx() as u32) | ((orient.by() as u32) << 1)) << 4;
        }
        TileKind::Arm { vertical, dir, pmult, pside, smult, sside } => {
            c |= 1 << 1;
            c |= (!vertical as u32) << 2;
            let sign = matches!(dir, Dir4::S | Dir4::W) as u32;
            c |= sign << 3;
            c |= (((pmult == 2) as u32) | (((pside == Side::Plus) as u32) << 1)) << 4;
            c |= (((smult == 2) as u32) | (((sside == Side::Plus) as u32) << 1)) << 6;
            let (i, j) = t.parity.unwrap_or((0, 0));
            c |= ((i as u32) | ((j as u32) << 1)) << 8;
            let a = ALIGN_CODES.iter().position(|x| *x == t.align).unwrap() as u32;
            c |= a << 10;
        }
    }
    c
}

pub fn decode_tile(code: u32) -> Option<RobinsonTile> {
    if code == 0 {
        return None;
    }
    if code & 2 == 0 {
        let red = code & (1 << 2) != 0;
        let bit = ((code >> 3) & 1) as u8;
        let orient = Orient::from_bits(((code >> 4) & 1) as u8, ((code >> 5) & 1) as u8);
        Some(RobinsonTile::corner(red, bit, orient))
    } else {
        let vertical = code & (1 << 2) == 0;
        let sign = (code >> 3) & 1;
        let dir = match (vertical, sign) {
            (true, 0) => Dir4::N,
            (true, _) => Dir4::S,
            (false, 0) => Dir4::E,
            (false, _) => Dir4::W,
        };
        let pmult = 1 + ((code >> 4) & 1) as u8;
        let pside = if (code >> 5) & 1 == 0 { Side::Minus } else { Side::Plus };
        let smult = 1 + ((code >> 6) & 1) as u8;
        let sside = if (code >> 7) & 1 == 0 { Side::Minus } else { Side::Plus };
        let parity = Some((((code >> 8) & 1) as u8, ((code >> 9) & 1) as u8));
        let align = ALIGN_CODES[((code >> 10) & 7) as usize];
        Some(RobinsonTile {
            kind: TileKind::Arm { vertical, dir, pmult, pside, smult, sside },
            parity,
            align,
        })
    }
}

// ---------------------------------------------------------------------------
// edge signatures

/// Per-edge arrow set: bits 0..2 outgoing on minus/center/plus, bits 3..5
/// incoming on minus/center/plus.
pub type EdgeSig = [u8; 4];

const OUT_M: u8 = 1;
const OUT_C: u8 = 2;
const OUT_P: u8 = 4;
const IN_SHIFT: u8 = 3;

fn track_bit(side: Option<Side>) -> u8 {
    match side {
        None => OUT_C,
        Some(Side::Minus) => OUT_M | OUT_C,
        Some(Side::Plus) => OUT_P | OUT_C,
    }
}

fn pair(side: Side) -> Option<Side> {
    Some(side)
}

/// Arrow content of each edge of a tile.
pub fn edge_signature(t: &RobinsonTile) -> EdgeSig {
    let mut sig = [0u8; 4];
    match t.kind {
        TileKind::Corner { orient, .. } => {
            let v_edge = if orient.by() == 0 { Dir4::N } else { Dir4::S };
            let h_edge = if orient.bx() == 0 { Dir4::E } else { Dir4::W };
            let v_side = if orient.bx() == 0 { Side::Minus } else { Side::Plus };
            let h_side = if orient.by() == 0 { Side::Minus } else { Side::Plus };
            sig[v_edge.index()] |= track_bit(pair(v_side));
            sig[h_edge.index()] |= track_bit(pair(h_side));
            sig[v_edge.opposite().index()] |= OUT_C;
            sig[h_edge.opposite().index()] |= OUT_C;
        }
        TileKind::Arm { dir, pmult, pside, smult, sside, .. } => {
            let ptracks = track_bit(if pmult == 2 { pair(pside) } else { None });
            let stracks = track_bit(if smult == 2 { pair(sside) } else { None });
            sig[dir.index()] |= ptracks;
            sig[dir.opposite().index()] |= ptracks << IN_SHIFT;
            let (s1, s2) = match dir {
                Dir4::N | Dir4::S => (Dir4::W, Dir4::E),
                _ => (Dir4::N, Dir4::S),
            };
            sig[s1.index()] |= stracks << IN_SHIFT;
            sig[s2.index()] |= stracks << IN_SHIFT;
        }
    }
    sig
}

/// Arrows crossing the shared edge must pair up: outgoing on one side equals
/// incoming on the other, track by track.
pub fn edges_match(a: &RobinsonTile, b: &RobinsonTile, edge_of_a: Dir4) -> bool {
    let sa = edge_signature(a)[edge_of_a.index()];
    let sb = edge_signature(b)[edge_of_a.opposite().index()];
    let out_a = sa & 0b111;
    let in_a = (sa >> IN_SHIFT) & 0b111;
    let out_b = sb & 0b111;
    let in_b = (sb >> IN_SHIFT) & 0b111;
    out_a == in_b && in_a == out_b
}

// ---------------------------------------------------------------------------
// the quarter-plane limit configuration

/// Content of the nested-supertile limit configuration at `(x, y)`, x, y >= 0.
///
/// The configuration is the increasing union of the south-west supertiles
/// anchored at the origin; every finite window of it is a legal pattern.
pub fn limit_tile(x: Coord, y: Coord) -> RobinsonTile {
    debug_assert!(x >= 0 && y >= 0);
    let a = line_level(x);
    let b = line_level(y);
    if a == b {
        let orient = Orient::from_bits(line_orient_bit(x, a), line_orient_bit(y, a));
        return RobinsonTile::corner(a > 0, (a % 2) as u8, orient);
    }
    let (vertical, hi, lo, u, v) =
        if a > b { (true, a, b, x, y) } else { (false, b, a, y, x) };
    // u is on the level-`hi` center line, v crosses it at level `lo`.
    let span = 1i64 << hi;
    let t = (v + 1).rem_euclid(span << 1);
    let owner_v = if t < span { v + (span - t) } else { v - (t - span) };
    let owner_bu = line_orient_bit(u, hi);
    let owner_bv = line_orient_bit(owner_v, hi);
    let outward_hi_side = v > owner_v; // arm points away from its cross center
    let pmult = if outward_hi_side == (owner_bv == 0) { 2 } else { 1 };
    let pside = if pmult == 2 && owner_bu != 0 { Side::Plus } else { Side::Minus };
    // Lateral inputs come from the flanking structures owned by the level-`lo`
    // line through v; their anchor sits at distance 2^lo.
    let flank = u - (1i64 << lo);
    let smult = if line_orient_bit(flank, lo) == 0 { 2 } else { 1 };
    let sside = if smult == 2 && line_orient_bit(v, lo) != 0 { Side::Plus } else { Side::Minus };
    let dir = match (vertical, outward_hi_side) {
        (true, true) => Dir4::N,
        (true, false) => Dir4::S,
        (false, true) => Dir4::E,
        (false, false) => Dir4::W,
    };
    let parity = Some(((line_level(y) % 2) as u8, ((line_level(x) % 2) as u8)));
    let align = if pmult == 1 {
        Some(Orient::from_bits(
            if vertical { owner_bu } else { line_orient_bit(owner_v, hi) },
            if vertical { owner_bv } else { line_orient_bit(u, hi) },
        ))
    } else {
        None
    };
    RobinsonTile {
        kind: TileKind::Arm { vertical, dir, pmult, pside, smult, sside },
        parity,
        align,
    }
}

/// Side of the order-`n` supertile.
pub fn supertile_side(n: u32) -> i64 {
    (1i64 << (n + 1)) - 1
}

/// `chi(n) = ceil(log2 n) + 4`: order of a supertile containing any n-block.
pub fn chi(n: u64) -> u32 {
    assert!(n >= 1);
    ceil_log2(n) + 4
}

/// `chi'(n) = ceil(ceil(log2 n) / 2) + 2`: order of a containing cell.
pub fn chi_prime(n: u64) -> u32 {
    assert!(n >= 1);
    ceil_log2(n).div_ceil(2) + 2
}

fn ceil_log2(n: u64) -> u32 {
    64 - (n - 1).leading_zeros().min(64)
}

// ---------------------------------------------------------------------------
// supertile generation

struct Grid {
    side: i64,
    codes: Vec<u32>,
}

impl Grid {
    fn new(side: i64) -> Grid {
        Grid { side, codes: vec![0; (side * side) as usize] }
    }

    fn get(&self, x: i64, y: i64) -> u32 {
        self.codes[(y * self.side + x) as usize]
    }

    fn set(&mut self, x: i64, y: i64, c: u32) {
        self.codes[(y * self.side + x) as usize] = c;
    }
}

fn build_supertile(memo: &mut HashMap<(Orient, u32), Grid>, c: Orient, n: u32) -> &Grid {
    if !memo.contains_key(&(c, n)) {
        let g = build_supertile_uncached(memo, c, n);
        memo.insert((c, n), g);
    }
    &memo[&(c, n)]
}

fn build_supertile_uncached(
    memo: &mut HashMap<(Orient, u32), Grid>,
    c: Orient,
    n: u32,
) -> Grid {
    if n == 0 {
        let mut g = Grid::new(1);
        g.set(0, 0, encode_tile(&RobinsonTile::corner(false, 0, c)));
        return g;
    }
    let side = supertile_side(n);
    let m = (1i64 << n) - 1;
    let mut g = Grid::new(side);

    // four quadrants, each the previous-order supertile of its own position
    for (qc, ox, oy) in [
        (Orient::Sw, 0, 0),
        (Orient::Se, m + 1, 0),
        (Orient::Nw, 0, m + 1),
        (Orient::Ne, m + 1, m + 1),
    ] {
        build_supertile(memo, qc, n - 1);
        let q = &memo[&(qc, n - 1)];
        for y in 0..q.side {
            for x in 0..q.side {
                let v = q.get(x, y);
                g.set(ox + x, oy + y, v);
            }
        }
    }

    // center red corner; its valuation is the order parity
    g.set(m, m, encode_tile(&RobinsonTile::corner(true, (n % 2) as u8, c)));

    // cross arms, read the lateral inputs off the quadrant borders
    let pside_v = if c.bx() == 0 { Side::Minus } else { Side::Plus };
    let pside_h = if c.by() == 0 { Side::Minus } else { Side::Plus };
    for step in 1..=m {
        for (dir, x, y) in [
            (Dir4::N, m, m + step),
            (Dir4::S, m, m - step),
            (Dir4::E, m + step, m),
            (Dir4::W, m - step, m),
        ] {
            let vertical = matches!(dir, Dir4::N | Dir4::S);
            let doubled = match dir {
                Dir4::N => c.by() == 0,
                Dir4::S => c.by() == 1,
                Dir4::E => c.bx() == 0,
                Dir4::W => c.bx() == 1,
            };
            let (n1, n2) = if vertical { ((x - 1, y), (x + 1, y)) } else { ((x, y - 1), (x, y + 1)) };
            let lateral_edge = if vertical { Dir4::E } else { Dir4::N };
            let s1 = emitted_tracks(&g, n1, lateral_edge);
            let s2 = emitted_tracks(&g, n2, lateral_edge.opposite());
            debug_assert_eq!(s1, s2, "asymmetric lateral inputs at ({x},{y})");
            let (smult, sside) = s1;
            let i = (line_level(y) % 2) as u8;
            let j = (line_level(x) % 2) as u8;
            let pmult = if doubled { 2 } else { 1 };
            let align = if pmult == 1 { Some(c) } else { None };
            let pside = match pmult {
                2 if vertical => pside_v,
                2 => pside_h,
                _ => Side::Minus,
            };
            let tile = RobinsonTile {
                kind: TileKind::Arm {
                    vertical,
                    dir,
                    pmult,
                    pside,
                    smult,
                    sside: if smult == 2 { sside.unwrap_or(Side::Minus) } else { Side::Minus },
                },
                parity: Some((i, j)),
                align,
            };
            g.set(x, y, encode_tile(&tile));
        }
    }
    g
}

/// Multiplicity and pair side of the arrows a placed tile emits on `edge`.
fn emitted_tracks(g: &Grid, at: (i64, i64), edge: Dir4) -> (u8, Option<Side>) {
    let t = decode_tile(g.get(at.0, at.1)).expect("quadrants placed before arms");
    let sig = edge_signature(&t)[edge.index()] & 0b111;
    let mult = sig.count_ones() as u8;
    debug_assert!(mult == 1 || mult == 2, "quadrant border emits {mult} arrows");
    let side = if sig & OUT_M != 0 {
        Some(Side::Minus)
    } else if sig & OUT_P != 0 {
        Some(Side::Plus)
    } else {
        None
    };
    (mult, side)
}

/// The order-`n` supertile with the given corner orientation, anchored at the
/// origin: a square pattern of side `2^(n+1) - 1`.
pub fn generate_supertile(corner: Orient, n: u32, max_order: u32) -> Result<Pattern, RobinsonError> {
    if n > max_order {
        return Err(RobinsonError::OrderTooLarge(n, max_order));
    }
    let mut memo = HashMap::new();
    let g = build_supertile(&mut memo, corner, n);
    let side = g.side;
    let mut p = Pattern::new_2d(Box2::square(0, 0, side), &[LAYER_ROBINSON]);
    p.layers[0].codes.copy_from_slice(&g.codes);
    Ok(p)
}

/// Fill `window` with the limit configuration: the periodic nesting of
/// supertile grids of every order at once (the order-`n` grid recurs with
/// period `2^(n+2)` in both axes). The window must lie in the quarter plane.
pub fn tile_plane(n: u32, window: Box2, max_window: i64) -> Result<Pattern, RobinsonError> {
    let _ = n; // every order's periodic grid is realized simultaneously
    if window.w.max(window.h) > max_window {
        return Err(RobinsonError::WindowTooLarge(window.w.max(window.h), max_window));
    }
    assert!(window.x0 >= 0 && window.y0 >= 0, "window must lie in the quarter plane");
    let mut p = Pattern::new_2d(window, &[LAYER_ROBINSON]);
    let mut k = 0usize;
    for y in window.y0..=window.y1() {
        for x in window.x0..=window.x1() {
            p.layers[0].codes[k] = encode_tile(&limit_tile(x, y));
            k += 1;
        }
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// local rule checking

struct TileGrid<'a> {
    p: &'a Pattern,
    layer: usize,
}

impl<'a> TileGrid<'a> {
    fn tile(&self, pos: Pos2) -> Option<RobinsonTile> {
        decode_tile(self.p.get(self.layer, pos))
    }
}

/// Validate every Robinson and alignment rule instantiable inside the
/// support. Constraints reaching outside the support are skipped.
pub fn check_robinson_rules(p: &Pattern) -> Result<Vec<RuleViolation>, RobinsonError> {
    let layer = p
        .layer_index(LAYER_ROBINSON)
        .ok_or(RobinsonError::MissingLayer(LAYER_ROBINSON))?;
    let g = TileGrid { p, layer };
    let b = p.support.base;
    let mut out = Vec::new();

    for pos in b.iter() {
        let Some(t) = g.tile(pos) else { continue };

        // rule 1: arrow correspondence with the east and north neighbors
        for (dp, edge) in [(Pos2::new(1, 0), Dir4::E), (Pos2::new(0, 1), Dir4::N)] {
            let q = Pos2::new(pos.x + dp.x, pos.y + dp.y);
            if !b.contains(q) {
                continue;
            }
            if let Some(u) = g.tile(q) {
                if !edges_match(&t, &u, edge) {
                    out.push(RuleViolation {
                        rule: "arrow-correspondence",
                        positions: vec![(pos.x, pos.y, 0), (q.x, q.y, 0)],
                        detail: "arrows across the shared edge do not pair up".to_string(),
                    });
                }
            }
        }

        // rule 2: a blue symbol in every full 2x2 square, and blue symbols
        // recur at distance 2 along both axes
        if pos.x < b.x1() && pos.y < b.y1() {
            let square = [
                pos,
                Pos2::new(pos.x + 1, pos.y),
                Pos2::new(pos.x, pos.y + 1),
                Pos2::new(pos.x + 1, pos.y + 1),
            ];
            let tiles: Vec<Option<RobinsonTile>> = square.iter().map(|q| g.tile(*q)).collect();
            if tiles.iter().all(|t| t.is_some())
                && !tiles.iter().any(|t| t.as_ref().is_some_and(|t| t.is_blue()))
            {
                out.push(RuleViolation::at(
                    "blue-density",
                    pos,
                    "2x2 square without a blue symbol".into(),
                ));
            }
        }
        if t.is_blue() {
            for (dx, dy) in [(2i64, 0i64), (0, 2)] {
                let q = Pos2::new(pos.x + dx, pos.y + dy);
                if b.contains(q) {
                    if let Some(u) = g.tile(q) {
                        if !u.is_blue() {
                            out.push(RuleViolation {
                                rule: "blue-period",
                                positions: vec![(pos.x, pos.y, 0), (q.x, q.y, 0)],
                                detail: "blue symbol not repeated at distance 2".into(),
                            });
                        }
                    }
                }
            }
        }

        // rule 3: i transmitted horizontally, j vertically (between arms)
        if let Some((i, j)) = t.parity {
            let east = Pos2::new(pos.x + 1, pos.y);
            if b.contains(east) {
                if let Some(u) = g.tile(east) {
                    if let Some((iu, _)) = u.parity {
                        if iu != i {
                            out.push(RuleViolation {
                                rule: "parity-transmission",
                                positions: vec![(pos.x, pos.y, 0), (east.x, east.y, 0)],
                                detail: format!("i mark changes along the row: {i} vs {iu}"),
                            });
                        }
                    }
                }
            }
            let north = Pos2::new(pos.x, pos.y + 1);
            if b.contains(north) {
                if let Some(u) = g.tile(north) {
                    if let Some((_, ju)) = u.parity {
                        if ju != j {
                            out.push(RuleViolation {
                                rule: "parity-transmission",
                                positions: vec![(pos.x, pos.y, 0), (north.x, north.y, 0)],
                                detail: format!("j mark changes along the column: {j} vs {ju}"),
                            });
                        }
                    }
                }
            }
            // rule 4: on five and six arrows symbols the marks differ
            if matches!(t.kind, TileKind::Arm { smult: 2, .. }) && i == j {
                out.push(RuleViolation::at(
                    "parity-distinct",
                    pos,
                    format!("i = j = {i} on a {}-arrow symbol", t.arrow_count()),
                ));
            }
        }

        check_alignment(&g, b, pos, &t, &mut out);
    }

    sort_violations(&mut out);
    Ok(out)
}

fn is_single_arm(t: &RobinsonTile) -> bool {
    matches!(t.kind, TileKind::Arm { pmult: 1, .. })
}

fn check_alignment(
    g: &TileGrid,
    b: Box2,
    pos: Pos2,
    t: &RobinsonTile,
    out: &mut Vec<RuleViolation>,
) {
    // localization: marks only on three and five arrows symbols
    if t.align.is_some() && !is_single_arm(t) {
        out.push(RuleViolation::at(
            "alignment-localization",
            pos,
            "orientation mark on a symbol that cannot carry one".into(),
        ));
    }
    let TileKind::Arm { vertical, dir, pmult, .. } = t.kind else { return };
    if pmult != 1 {
        return;
    }

    let step = |d: Dir4| match d {
        Dir4::N => Pos2::new(pos.x, pos.y + 1),
        Dir4::S => Pos2::new(pos.x, pos.y - 1),
        Dir4::E => Pos2::new(pos.x + 1, pos.y),
        Dir4::W => Pos2::new(pos.x - 1, pos.y),
    };

    // induction: the long arrow originating in a corner forces its
    // orientation onto the mark
    let rear = step(dir.opposite());
    if b.contains(rear) {
        if let Some(u) = g.tile(rear) {
            if let TileKind::Corner { orient, .. } = u.kind {
                if t.align != Some(orient) {
                    out.push(RuleViolation::at(
                        "alignment-induction",
                        pos,
                        format!("mark {:?} under a {} corner", t.align, orient.name()),
                    ));
                }
            }
        }
    }

    // transmission: the mark travels in the pointed direction along
    // single-principal arms of the same direction
    let ahead = step(dir);
    if b.contains(ahead) {
        if let Some(u) = g.tile(ahead) {
            if let TileKind::Arm { vertical: uv, dir: ud, pmult: 1, .. } = u.kind {
                if uv == vertical && ud == dir && u.align != t.align {
                    out.push(RuleViolation {
                        rule: "alignment-transmission",
                        positions: vec![(pos.x, pos.y, 0), (ahead.x, ahead.y, 0)],
                        detail: format!("mark changes along the arm: {:?} vs {:?}", t.align, u.align),
                    });
                }
            }
        }
    }

    // synchronization and coherence on the meeting patterns
    if vertical && matches!(t.kind, TileKind::Arm { smult: 1, .. }) {
        let (w, e) = (Pos2::new(pos.x - 1, pos.y), Pos2::new(pos.x + 1, pos.y));
        if b.contains(w) && b.contains(e) {
            if let (Some(a), Some(c)) = (g.tile(w), g.tile(e)) {
                let a_in = matches!(a.kind, TileKind::Arm { vertical: false, dir: Dir4::E, pmult: 1, .. });
                let c_in = matches!(c.kind, TileKind::Arm { vertical: false, dir: Dir4::W, pmult: 1, .. });
                if a_in && c_in {
                    let ok = matches!(
                        (a.align, c.align),
                        (Some(Orient::Ne), Some(Orient::Nw)) | (Some(Orient::Se), Some(Orient::Sw))
                    );
                    if !ok {
                        out.push(RuleViolation::at(
                            "alignment-synchronization",
                            pos,
                            format!("marks {:?} / {:?} meet across a column", a.align, c.align),
                        ));
                    }
                }
            }
        }
    }
    if !vertical && matches!(t.kind, TileKind::Arm { smult: 1, .. }) {
        let (s, n) = (Pos2::new(pos.x, pos.y - 1), Pos2::new(pos.x, pos.y + 1));
        if b.contains(s) && b.contains(n) {
            if let (Some(a), Some(c)) = (g.tile(s), g.tile(n)) {
                let a_in = matches!(a.kind, TileKind::Arm { vertical: true, dir: Dir4::N, pmult: 1, .. });
                let c_in = matches!(c.kind, TileKind::Arm { vertical: true, dir: Dir4::S, pmult: 1, .. });
                if a_in && c_in {
                    let ok = matches!(
                        (a.align, c.align),
                        (Some(Orient::Ne), Some(Orient::Se)) | (Some(Orient::Nw), Some(Orient::Sw))
                    );
                    if !ok {
                        out.push(RuleViolation::at(
                            "alignment-synchronization",
                            pos,
                            format!("marks {:?} / {:?} meet across a row", a.align, c.align),
                        ));
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// block completion

/// Find the smallest order `o <= chi(side)` and the lexicographically
/// smallest offset such that `block` occurs at that offset inside an order-o
/// supertile. All four corner variants are searched (blocks touching the
/// arms of a high-order cross pin the orientation of its center, so one
/// variant alone does not realize every block); ties break by corner in the
/// order sw, se, nw, ne, then by offset.
pub fn complete_block(block: &Pattern) -> Result<(u32, (i64, i64)), RobinsonError> {
    let layer = block
        .layer_index(LAYER_ROBINSON)
        .ok_or(RobinsonError::MissingLayer(LAYER_ROBINSON))?;
    let b = block.support.base;
    let side = b.w.max(b.h) as u64;
    let cap = chi(side.max(1));
    let mut memo = HashMap::new();
    for o in 0..=cap {
        for corner in Orient::ALL {
            let g = build_supertile(&mut memo, corner, o);
            let s = g.side;
            if s < b.w || s < b.h {
                continue;
            }
            for oy in 0..=(s - b.h) {
                'offset: for ox in 0..=(s - b.w) {
                    for (k, pos) in b.iter().enumerate() {
                        let want = block.layers[layer].codes[k];
                        let have = g.get(ox + (pos.x - b.x0), oy + (pos.y - b.y0));
                        if want != have {
                            continue 'offset;
                        }
                    }
                    return Ok((o, (ox, oy)));
                }
            }
        }
    }
    Err(RobinsonError::NotFound(cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supertile_sides_match_the_induction() {
        for n in 0..6 {
            let p = generate_supertile(Orient::Sw, n, 10).unwrap();
            assert_eq!(p.support.base.w, supertile_side(n));
        }
    }

    #[test]
    fn order_zero_is_a_single_blue_corner() {
        let p = generate_supertile(Orient::Sw, 0, 10).unwrap();
        let t = decode_tile(p.get(0, Pos2::new(0, 0))).unwrap();
        assert_eq!(t, RobinsonTile::corner(false, 0, Orient::Sw));
    }

    #[test]
    fn order_two_layout_matches_the_figure() {
        // blue corners on the even-even lattice, quadrant red centers with
        // the orientation of their quadrant, center red of the asked corner
        let p = generate_supertile(Orient::Sw, 2, 10).unwrap();
        for y in 0..7 {
            for x in 0..7 {
                let t = decode_tile(p.get(0, Pos2::new(x, y))).unwrap();
                assert_eq!(t.is_blue(), x % 2 == 0 && y % 2 == 0, "at ({x},{y})");
            }
        }
        let center = decode_tile(p.get(0, Pos2::new(3, 3))).unwrap();
        assert_eq!(center.kind, TileKind::Corner { red: true, bit: 0, orient: Orient::Sw });
        for (x, y, o) in [(1, 1, Orient::Sw), (5, 1, Orient::Se), (1, 5, Orient::Nw), (5, 5, Orient::Ne)] {
            let t = decode_tile(p.get(0, Pos2::new(x, y))).unwrap();
            assert_eq!(t.kind, TileKind::Corner { red: true, bit: 1, orient: o }, "at ({x},{y})");
        }
        // arm arrow counts on the south arm of the big cross: 3, 5, 3
        for (y, count) in [(0, 3), (1, 5), (2, 3)] {
            let t = decode_tile(p.get(0, Pos2::new(3, y))).unwrap();
            assert_eq!(t.arrow_count(), count, "south arm at height {y}");
        }
        // north arm of a sw supertile carries the doubled arrows: 4, 6, 4
        for (y, count) in [(4, 4), (5, 6), (6, 4)] {
            let t = decode_tile(p.get(0, Pos2::new(3, y))).unwrap();
            assert_eq!(t.arrow_count(), count, "north arm at height {y}");
        }
    }

    #[test]
    fn generated_supertiles_have_no_violations() {
        for c in Orient::ALL {
            for n in 0..5 {
                let p = generate_supertile(c, n, 10).unwrap();
                let v = check_robinson_rules(&p).unwrap();
                assert!(v.is_empty(), "St_{}({n}): {:?}", c.name(), v.first());
            }
        }
    }

    #[test]
    fn single_cell_pattern_has_no_violations() {
        let p = generate_supertile(Orient::Ne, 0, 10).unwrap();
        assert!(check_robinson_rules(&p).unwrap().is_empty());
    }

    #[test]
    fn forbidden_stack_from_rule_one_is_caught() {
        // a five arrows symbol emitting a single arrow down, stacked on a
        // four arrows symbol expecting a doubled one
        let five = RobinsonTile {
            kind: TileKind::Arm {
                vertical: true,
                dir: Dir4::S,
                pmult: 1,
                pside: Side::Minus,
                smult: 2,
                sside: Side::Minus,
            },
            parity: Some((0, 1)),
            align: Some(Orient::Sw),
        };
        let four = RobinsonTile {
            kind: TileKind::Arm {
                vertical: true,
                dir: Dir4::S,
                pmult: 2,
                pside: Side::Minus,
                smult: 1,
                sside: Side::Minus,
            },
            parity: Some((1, 1)),
            align: None,
        };
        let mut p = Pattern::new_2d(Box2::new(0, 0, 1, 2), &[LAYER_ROBINSON]);
        p.set(0, Pos2::new(0, 1), encode_tile(&five));
        p.set(0, Pos2::new(0, 0), encode_tile(&four));
        let v = check_robinson_rules(&p).unwrap();
        assert!(v.iter().any(|v| v.rule == "arrow-correspondence"), "{v:?}");
    }

    #[test]
    fn limit_configuration_agrees_with_recursive_supertiles() {
        let n = 5;
        let p = generate_supertile(Orient::Sw, n, 10).unwrap();
        let side = supertile_side(n);
        for y in 0..side {
            for x in 0..side {
                assert_eq!(
                    p.get(0, Pos2::new(x, y)),
                    encode_tile(&limit_tile(x, y)),
                    "mismatch at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn tile_plane_windows_validate_and_restrict_consistently() {
        let w = tile_plane(3, Box2::new(0, 0, 64, 64), 4096).unwrap();
        assert!(check_robinson_rules(&w).unwrap().is_empty());
        // determinism / translation consistency on an interior window
        let sub = tile_plane(3, Box2::new(17, 5, 20, 20), 4096).unwrap();
        let crop = w.crop(Box2::new(17, 5, 20, 20));
        assert_eq!(sub, crop);
    }

    #[test]
    fn blue_corners_occupy_one_parity_class() {
        let w = tile_plane(0, Box2::new(0, 0, 4, 4), 4096).unwrap();
        for pos in w.support.base.iter() {
            let t = decode_tile(w.get(0, pos)).unwrap();
            assert_eq!(t.is_blue(), pos.x % 2 == 0 && pos.y % 2 == 0);
        }
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(1), 4);
        assert_eq!(chi(3), 6);
        assert_eq!(chi(4), 6);
        assert_eq!(chi_prime(4), 3);
        assert_eq!(chi_prime(1), 2);
    }

    #[test]
    fn completing_a_supertile_finds_itself() {
        let p = generate_supertile(Orient::Sw, 2, 10).unwrap();
        let (order, off) = complete_block(&p).unwrap();
        assert_eq!((order, off), (2, (0, 0)));
    }

    #[test]
    fn corrupted_parity_and_alignment_marks_are_caught() {
        let base = tile_plane(3, Box2::new(0, 0, 24, 24), 4096).unwrap();

        // flip the i mark of an arm tile with arm neighbors: transmission
        // (and distinctness, it sits on a five arrows symbol) break
        let mut p = base.clone();
        let pos = Pos2::new(3, 1);
        let mut t = decode_tile(p.get(0, pos)).unwrap();
        let (i, j) = t.parity.unwrap();
        t.parity = Some((i ^ 1, j));
        p.set(0, pos, encode_tile(&t));
        let v = check_robinson_rules(&p).unwrap();
        assert!(v.iter().any(|v| v.rule.starts_with("parity")), "{v:?}");

        // blank out the alignment mark of an arm fed by a corner
        let mut p = base.clone();
        let pos = Pos2::new(0, 1); // south arm tile right above the sw corner? no: above (0,0)
        let mut t = decode_tile(p.get(0, pos)).unwrap();
        assert!(t.align.is_some());
        t.align = None;
        p.set(0, pos, encode_tile(&t));
        let v = check_robinson_rules(&p).unwrap();
        assert!(v.iter().any(|v| v.rule.starts_with("alignment")), "{v:?}");

        // swap the marks meeting across a crossing column: synchronization
        let mut p = base.clone();
        let mut fired = false;
        'outer: for y in 0..24 {
            for x in 1..23 {
                let (a, b, c) = (
                    decode_tile(p.get(0, Pos2::new(x - 1, y))),
                    decode_tile(p.get(0, Pos2::new(x, y))),
                    decode_tile(p.get(0, Pos2::new(x + 1, y))),
                );
                let (Some(a), Some(b), Some(c)) = (a, b, c) else { continue };
                let a_in = matches!(a.kind, TileKind::Arm { vertical: false, dir: Dir4::E, pmult: 1, .. });
                let b_v = matches!(b.kind, TileKind::Arm { vertical: true, smult: 1, .. });
                let c_in = matches!(c.kind, TileKind::Arm { vertical: false, dir: Dir4::W, pmult: 1, .. });
                if a_in && b_v && c_in {
                    // corrupt the right-hand mark to break the pairing
                    let mut cc = c;
                    cc.align = Some(match cc.align.unwrap() {
                        Orient::Nw => Orient::Sw,
                        _ => Orient::Nw,
                    });
                    p.set(0, Pos2::new(x + 1, y), encode_tile(&cc));
                    fired = true;
                    break 'outer;
                }
            }
        }
        assert!(fired, "no meeting triple found in the window");
        let v = check_robinson_rules(&p).unwrap();
        assert!(
            v.iter().any(|v| v.rule == "alignment-synchronization" || v.rule == "alignment-transmission"),
            "{v:?}"
        );
    }

    #[test]
    fn tile_codes_round_trip() {
        for x in 0..40 {
            for y in 0..40 {
                let t = limit_tile(x, y);
                assert_eq!(decode_tile(encode_tile(&t)), Some(t));
            }
        }
    }

    #[test]
    fn order_cap_is_enforced() {
        assert!(matches!(
            generate_supertile(Orient::Sw, 11, 10),
            Err(RobinsonError::OrderTooLarge(11, 10))
        ));
    }
}
