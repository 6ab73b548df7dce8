//! Petal and cell extraction from Robinson-layer patterns, organite
//! subdivision of large cells, functional-area assignment and modularity
//! marks together with their layer validators.

use crate::geom::{Box2, Coord, Pos2};
use crate::pattern::{sort_violations, Pattern, RuleViolation};
use crate::robinson::{decode_tile, Orient, RobinsonTile, TileKind, LAYER_ROBINSON};
use std::collections::BTreeMap;
use thiserror::Error;

pub const LAYER_SUBDIVISION: &str = "subdivision";
pub const LAYER_MODULARITY: &str = "modularity";
pub const LAYER_FUNCTIONAL: &str = "functional";

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("pattern does not declare the {0:?} layer")]
    MissingLayer(&'static str),
    #[error("cell of order {0} is too small to subdivide")]
    CellTooSmall(u32),
}

/// Role of a petal, read off the valuation bit of its corner symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PetalRole {
    Support,
    Transmission,
}

impl PetalRole {
    pub fn name(self) -> &'static str {
        match self {
            PetalRole::Support => "support",
            PetalRole::Transmission => "transmission",
        }
    }
}

/// A detected petal: the square of positions joining four corner symbols
/// around the next-order corner between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Petal {
    pub order: u32,
    pub bounds: Box2,
    pub role: PetalRole,
    pub corners: [Pos2; 4],
}

impl Petal {
    pub fn side(&self) -> Coord {
        self.bounds.w
    }

    pub fn center(&self) -> Pos2 {
        Pos2::new(self.bounds.x0 + self.bounds.w / 2, self.bounds.y0 + self.bounds.h / 2)
    }
}

pub fn petal_side(order: u32) -> Coord {
    (1i64 << (order + 1)) + 1
}

pub fn cell_side(order: u32) -> Coord {
    (1i64 << (2 * order + 2)) + 1
}

/// Spatial period with which order-`n` cells repeat in larger structures.
pub fn cell_period(order: u32) -> Coord {
    1i64 << (2 * order + 4)
}

/// Function of a blue-corner position inside a cell's cytoplasm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Computation,
    TransferH,
    TransferV,
    NoFunction,
}

/// Fixed function of an organite, addressed by its coordinates in the 8x8
/// subdivision grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrganiteFunction {
    Machine,
    Demultiplexer,
    LinearIncrement,
    SystemCounter,
    Transport,
    NoFunction,
}

/// The fixed organite function table.
pub fn organite_function(i: u8, j: u8) -> OrganiteFunction {
    use OrganiteFunction::*;
    match (i, j) {
        (6, 5) => Machine,
        (1, 3) | (3, 3) | (6, 3) | (3, 7) | (6, 7) => Demultiplexer,
        (2, 3) => LinearIncrement,
        (3, 4) | (4, 3) | (4, 4) => SystemCounter,
        // the sub-units the transport circuits route through: the linear
        // counter loop, the modularity spine, the random channels and the
        // extraction faces around the machine
        (0, 3)
        | (0, 7)
        | (1, 1)
        | (1, 4..=7)
        | (2, 1)
        | (2, 2)
        | (2, 4..=6)
        | (3, 0..=2)
        | (3, 5)
        | (3, 6)
        | (4, 1)
        | (4, 5)
        | (4, 7)
        | (5, 1..=7)
        | (6, 1)
        | (6, 4)
        | (7, 3..=7) => Transport,
        _ => NoFunction,
    }
}

/// A detected two-dimensional cell: the region enclosed in an odd-order
/// petal, annotated step by step by the other operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRecord {
    pub order: u32,
    pub bounds: Box2,
    pub enclosing_petal_order: u32,
    /// 8x8 organite partition, present once the cell has been subdivided.
    pub organites: Option<Vec<Box2>>,
    /// Level class modulo 4.
    pub modularity: Option<u8>,
    pub function_map: Option<BTreeMap<(Coord, Coord), Function>>,
}

impl CellRecord {
    pub fn side(&self) -> Coord {
        self.bounds.w
    }

    pub fn center(&self) -> Pos2 {
        Pos2::new(self.bounds.x0 + self.bounds.w / 2, self.bounds.y0 + self.bounds.h / 2)
    }

    pub fn organite_box(&self, i: u8, j: u8) -> Box2 {
        debug_assert!(i < 8 && j < 8);
        let w = (self.bounds.w - 1) / 8;
        Box2::new(
            self.bounds.x0 + i as Coord * w,
            self.bounds.y0 + j as Coord * w,
            w,
            w,
        )
    }

    /// Organite coordinates of a position inside the cell.
    pub fn organite_of(&self, p: Pos2) -> (u8, u8) {
        let w = (self.bounds.w - 1) / 8;
        let i = ((p.x - self.bounds.x0) / w).min(7);
        let j = ((p.y - self.bounds.y0) / w).min(7);
        (i as u8, j as u8)
    }
}

// ---------------------------------------------------------------------------
// extraction

struct Tiles<'a> {
    p: &'a Pattern,
    layer: usize,
}

impl<'a> Tiles<'a> {
    fn new(p: &'a Pattern) -> Result<Self, HierarchyError> {
        let layer = p
            .layer_index(LAYER_ROBINSON)
            .ok_or(HierarchyError::MissingLayer(LAYER_ROBINSON))?;
        Ok(Tiles { p, layer })
    }

    fn tile(&self, pos: Pos2) -> Option<RobinsonTile> {
        decode_tile(self.p.get(self.layer, pos))
    }
}

fn corner_orient(t: &RobinsonTile) -> Option<(Orient, u8)> {
    match t.kind {
        TileKind::Corner { orient, bit, .. } => Some((orient, bit)),
        _ => None,
    }
}

/// True when the tile carries a doubled arrow pair along the given axis,
/// as petal edges must.
fn has_double(t: &RobinsonTile, horizontal: bool) -> bool {
    match t.kind {
        TileKind::Corner { .. } => true,
        TileKind::Arm { vertical, pmult, smult, .. } => {
            if vertical == !horizontal {
                pmult == 2
            } else {
                smult == 2
            }
        }
    }
}

/// Extract every petal fully contained in the support.
pub fn extract_petals(p: &Pattern) -> Result<Vec<Petal>, HierarchyError> {
    let g = Tiles::new(p)?;
    let b = p.support.base;
    let mut out = Vec::new();
    let max_order = (0..).take_while(|k| petal_side(*k) <= b.w.min(b.h)).last();
    let Some(max_order) = max_order else { return Ok(out) };

    for pos in b.iter() {
        let Some(t) = g.tile(pos) else { continue };
        let Some((Orient::Ne, bit)) = corner_orient(&t) else { continue };
        // `pos` is a candidate north-east petal corner
        for k in 0..=max_order {
            let d = 1i64 << k;
            let bounds = Box2::square(pos.x - 2 * d, pos.y - 2 * d, petal_side(k));
            if !b.contains_box(&bounds) {
                continue;
            }
            if let Some(petal) = try_petal(&g, k, bounds, bit) {
                out.push(petal);
            }
        }
    }
    out.sort_by_key(|p| (p.order, p.bounds.x0, p.bounds.y0));
    Ok(out)
}

fn try_petal(g: &Tiles, order: u32, bounds: Box2, bit: u8) -> Option<Petal> {
    let (x0, y0, x1, y1) = (bounds.x0, bounds.y0, bounds.x1(), bounds.y1());
    let want = [
        (Pos2::new(x0, y0), Orient::Sw),
        (Pos2::new(x1, y0), Orient::Se),
        (Pos2::new(x0, y1), Orient::Nw),
        (Pos2::new(x1, y1), Orient::Ne),
    ];
    let mut corners = [Pos2::new(0, 0); 4];
    for (i, (q, o)) in want.iter().enumerate() {
        let t = g.tile(*q)?;
        let (orient, cbit) = corner_orient(&t)?;
        if orient != *o || cbit != bit {
            return None;
        }
        corners[i] = *q;
    }
    // edges must carry the doubled arrows joining the corners
    for x in x0 + 1..x1 {
        for y in [y0, y1] {
            if !has_double(&g.tile(Pos2::new(x, y))?, true) {
                return None;
            }
        }
    }
    for y in y0 + 1..y1 {
        for x in [x0, x1] {
            if !has_double(&g.tile(Pos2::new(x, y))?, false) {
                return None;
            }
        }
    }
    let role = if bit == 1 { PetalRole::Support } else { PetalRole::Transmission };
    Some(Petal { order, bounds, role, corners })
}

/// Detect every complete two-dimensional cell: one per complete odd-order
/// petal.
pub fn detect_cells(p: &Pattern) -> Result<Vec<CellRecord>, HierarchyError> {
    let petals = extract_petals(p)?;
    let mut out: Vec<CellRecord> = petals
        .into_iter()
        .filter(|petal| petal.order % 2 == 1)
        .map(|petal| CellRecord {
            order: (petal.order - 1) / 2,
            bounds: petal.bounds,
            enclosing_petal_order: petal.order,
            organites: None,
            modularity: None,
            function_map: None,
        })
        .collect();
    out.sort_by_key(|c| (c.order, c.bounds.x0, c.bounds.y0));
    Ok(out)
}

// ---------------------------------------------------------------------------
// subdivision layer codes

pub const SUBDIV_GRAY: u32 = 1;

/// Code for a partial address of 1..=3 base-4 digits (most significant
/// first, the digit of the coarsest subdivision level leading).
pub fn subdiv_addr_code(digits: &[u8]) -> u32 {
    debug_assert!((1..=3).contains(&digits.len()));
    let mut v = 0u32;
    for d in digits {
        debug_assert!(*d < 4);
        v = v * 4 + *d as u32;
    }
    2 + ((digits.len() as u32 - 1) << 6) + v
}

pub fn subdiv_decode(code: u32) -> Option<Vec<u8>> {
    if code < 2 {
        return None;
    }
    let c = code - 2;
    let len = (c >> 6) + 1;
    let mut v = c & 63;
    let mut digits = vec![0u8; len as usize];
    for d in digits.iter_mut().rev() {
        *d = (v % 4) as u8;
        v /= 4;
    }
    Some(digits)
}

/// Quadrant code used by the hierarchical addressing: 0 = north west,
/// 1 = north east, 2 = south east, 3 = south west.
pub fn quadrant_code(dx: u8, dy: u8) -> u8 {
    match (dx, dy) {
        (0, 1) => 0,
        (1, 1) => 1,
        (1, 0) => 2,
        _ => 3,
    }
}

/// Recode an address triplet into organite coordinates, west-to-east and
/// south-to-north.
pub fn triplet_to_organite(t: [u8; 3]) -> (u8, u8) {
    let mut i = 0u8;
    let mut j = 0u8;
    for (k, d) in t.iter().enumerate() {
        let dx = matches!(d, 1 | 2) as u8;
        let dy = matches!(d, 0 | 1) as u8;
        i |= dx << (2 - k);
        j |= dy << (2 - k);
    }
    (i, j)
}

/// Address digits of a position inside `root`, one quadrant code per
/// subdivision level, `depth <= 3`.
pub fn address_in(root: &Box2, p: Pos2, depth: u32) -> Vec<u8> {
    let mut digits = Vec::with_capacity(depth as usize);
    let mut bx = *root;
    for _ in 0..depth {
        let hw = (bx.w - 1) / 2;
        let dx = (p.x >= bx.x0 + hw) as u8;
        let dy = (p.y >= bx.y0 + hw) as u8;
        digits.push(quadrant_code(dx, dy));
        bx = Box2::new(bx.x0 + dx as Coord * hw, bx.y0 + dy as Coord * hw, hw + 1, hw + 1);
    }
    digits
}

/// The organite triplet of a functional position inside an order >= 3 cell.
pub fn organite_triplet(cell: &Box2, p: Pos2) -> [u8; 3] {
    let v = address_in(cell, p, 3);
    [v[0], v[1], v[2]]
}

// ---------------------------------------------------------------------------
// subdivision

/// Subdivide an order >= 3 cell into its 64 organites and, when the pattern
/// carries the subdivision layer, validate the signal content over the cell.
pub fn subdivide_cell(
    c: &CellRecord,
    p: &Pattern,
) -> Result<(CellRecord, Vec<RuleViolation>), HierarchyError> {
    if c.order < 3 {
        return Err(HierarchyError::CellTooSmall(c.order));
    }
    let mut organites = Vec::with_capacity(64);
    for j in 0..8u8 {
        for i in 0..8u8 {
            organites.push(c.organite_box(i, j));
        }
    }
    let mut annotated = c.clone();
    annotated.organites = Some(organites);

    let mut violations = Vec::new();
    if p.layer_index(LAYER_SUBDIVISION).is_some() {
        let cells = detect_cells(p)?;
        validate_subdivision_for_cell(c, p, &cells, &mut violations)?;
        sort_violations(&mut violations);
    }
    Ok((annotated, violations))
}

/// Check the subdivision-layer content rooted at the order >= 3 cell `c`:
/// organite triplets on its cytoplasm functional positions, gray blocking on
/// blue corners of its small descendants, and the digit-append relation on
/// the border rings of the cells it addresses.
pub fn validate_subdivision_for_cell(
    c: &CellRecord,
    p: &Pattern,
    cells: &[CellRecord],
    out: &mut Vec<RuleViolation>,
) -> Result<(), HierarchyError> {
    let layer = p
        .layer_index(LAYER_SUBDIVISION)
        .ok_or(HierarchyError::MissingLayer(LAYER_SUBDIVISION))?;
    let g = Tiles::new(p)?;

    // smallest containing child order per position (255 = cytoplasm)
    let b = c.bounds;
    let mut host = vec![255u8; (b.w * b.h) as usize];
    let mut children: Vec<&CellRecord> = cells
        .iter()
        .filter(|d| d.bounds != c.bounds && c.bounds.contains_box(&d.bounds))
        .collect();
    children.sort_by_key(|d| std::cmp::Reverse(d.order));
    for d in &children {
        for y in d.bounds.y0..=d.bounds.y1() {
            let row = (y - b.y0) * b.w;
            for x in d.bounds.x0..=d.bounds.x1() {
                host[(row + x - b.x0) as usize] = d.order as u8;
            }
        }
    }
    let interior = Box2::new(b.x0 + 1, b.y0 + 1, b.w - 2, b.h - 2);

    for pos in interior.iter() {
        let Some(t) = g.tile(pos) else { continue };
        if !t.is_blue() {
            continue;
        }
        let code = p.get(layer, pos);
        match host[((pos.y - b.y0) * b.w + pos.x - b.x0) as usize] {
            255 => {
                // cytoplasm of `c`: the full triplet of its organite
                let want = subdiv_addr_code(&organite_triplet(&c.bounds, pos));
                if code != want {
                    out.push(RuleViolation::at(
                        "subdivision-address",
                        pos,
                        format!("functional position carries code {code}, expected {want}"),
                    ));
                }
            }
            order if order <= 2 => {
                if code != SUBDIV_GRAY {
                    out.push(RuleViolation::at(
                        "subdivision-gray",
                        pos,
                        format!("blue corner in an order {order} cell must be gray"),
                    ));
                }
            }
            _ => {} // addressed by the smaller >= 3 cell
        }
    }

    // border rings of the cells whose addressing root is `c`
    for d in &children {
        let root_order = d.order.max(2) + 1;
        if root_order != c.order {
            continue;
        }
        let depth = (c.order - d.order).min(3);
        let want = subdiv_addr_code(&address_in(&c.bounds, d.center(), depth));
        for pos in ring_positions(&d.bounds) {
            let code = p.get(layer, pos);
            if code != want {
                out.push(RuleViolation::at(
                    "subdivision-ring",
                    pos,
                    format!("cell border carries code {code}, expected address {want}"),
                ));
                break; // one report per ring is enough
            }
        }
    }
    Ok(())
}

pub fn ring_positions(b: &Box2) -> Vec<Pos2> {
    let mut v = Vec::with_capacity(2 * (b.w + b.h) as usize);
    for x in b.x0..=b.x1() {
        v.push(Pos2::new(x, b.y0));
        v.push(Pos2::new(x, b.y1()));
    }
    for y in b.y0 + 1..b.y1() {
        v.push(Pos2::new(b.x0, y));
        v.push(Pos2::new(b.x1(), y));
    }
    v
}

// ---------------------------------------------------------------------------
// functional areas

/// Assign to every blue corner in the cytoplasm of `c` its function: whether
/// its row and column ranges inside the cell meet smaller complete cells.
pub fn assign_functional_areas(
    c: &CellRecord,
    p: &Pattern,
) -> Result<BTreeMap<(Coord, Coord), Function>, HierarchyError> {
    let cells = detect_cells(p)?;
    assign_functional_areas_geometric(c, p, &cells)
}

/// Obstacle geometry of a cell, precomputed for position-wise lookups: the
/// boxes of the complete cells strictly inside it, their column and row
/// shadows, and an interior occupancy bitmap.
pub struct Obstacles {
    bounds: Box2,
    pub col_hit: Vec<bool>,
    pub row_hit: Vec<bool>,
    occupied: Vec<bool>,
}

impl Obstacles {
    pub fn inside(c: &CellRecord, cells: &[CellRecord]) -> Obstacles {
        let boxes: Vec<Box2> = cells
            .iter()
            .filter(|d| d.bounds != c.bounds && c.bounds.contains_box(&d.bounds))
            .map(|d| d.bounds)
            .collect();
        let b = c.bounds;
        let mut col_hit = vec![false; b.w as usize];
        let mut row_hit = vec![false; b.h as usize];
        let mut occupied = vec![false; (b.w * b.h) as usize];
        for o in &boxes {
            for x in o.x0..=o.x1() {
                col_hit[(x - b.x0) as usize] = true;
            }
            for y in o.y0..=o.y1() {
                row_hit[(y - b.y0) as usize] = true;
            }
            for y in o.y0..=o.y1() {
                let row = (y - b.y0) * b.w;
                for x in o.x0..=o.x1() {
                    occupied[(row + x - b.x0) as usize] = true;
                }
            }
        }
        Obstacles { bounds: b, col_hit, row_hit, occupied }
    }

    pub fn occupied(&self, p: Pos2) -> bool {
        self.occupied[((p.y - self.bounds.y0) * self.bounds.w + p.x - self.bounds.x0) as usize]
    }

    pub fn hits_col(&self, x: Coord) -> bool {
        self.col_hit[(x - self.bounds.x0) as usize]
    }

    pub fn hits_row(&self, y: Coord) -> bool {
        self.row_hit[(y - self.bounds.y0) as usize]
    }
}

pub fn assign_functional_areas_geometric(
    c: &CellRecord,
    p: &Pattern,
    cells: &[CellRecord],
) -> Result<BTreeMap<(Coord, Coord), Function>, HierarchyError> {
    let g = Tiles::new(p)?;
    let obstacles = Obstacles::inside(c, cells);
    let interior = Box2::new(c.bounds.x0 + 1, c.bounds.y0 + 1, c.bounds.w - 2, c.bounds.h - 2);
    let mut map = BTreeMap::new();
    for pos in interior.iter() {
        let Some(t) = g.tile(pos) else { continue };
        if !t.is_blue() || obstacles.occupied(pos) {
            continue;
        }
        let f = match (obstacles.hits_col(pos.x), obstacles.hits_row(pos.y)) {
            (false, false) => Function::Computation,
            (true, false) => Function::TransferV,
            (false, true) => Function::TransferH,
            (true, true) => Function::NoFunction,
        };
        map.insert((pos.x, pos.y), f);
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// modularity marks

pub const MOD_PAIR_BASE: u32 = 16;

pub fn modularity_value_code(v: u8) -> u32 {
    1 + v as u32
}

pub fn modularity_pair_code(a: u8, b: u8) -> u32 {
    MOD_PAIR_BASE + (a as u32) * 4 + b as u32
}

/// The two border segments of a cell that carry its mark: the east half of
/// the north side and the north half of the east side.
pub fn modularity_segments(bounds: &Box2) -> Vec<Pos2> {
    let cx = bounds.x0 + (bounds.w - 1) / 2;
    let cy = bounds.y0 + (bounds.h - 1) / 2;
    let mut v = Vec::new();
    for x in cx..=bounds.x1() {
        v.push(Pos2::new(x, bounds.y1()));
    }
    for y in cy..=bounds.y1() - 1 {
        v.push(Pos2::new(bounds.x1(), y));
    }
    v
}

/// Transformation positions of a parent cell: the inner ends of its marked
/// segments, where the north-east child's mark is turned into the parent's.
pub fn transformation_positions(bounds: &Box2) -> [Pos2; 2] {
    let cx = bounds.x0 + (bounds.w - 1) / 2;
    let cy = bounds.y0 + (bounds.h - 1) / 2;
    [Pos2::new(cx, bounds.y1()), Pos2::new(bounds.x1(), cy)]
}

/// Center of the north-east order-(n-1) child of an order-n cell.
pub fn ne_child_center(c: &CellRecord) -> Pos2 {
    let d = 1i64 << (2 * c.order);
    let ctr = c.center();
    Pos2::new(ctr.x + d, ctr.y + d)
}

/// Assign every cell its level class modulo 4 and, when the pattern carries
/// the modularity layer, validate localization, values and the
/// parent-transformation pairs.
pub fn modularity_marks(
    cells: &[CellRecord],
    p: Option<&Pattern>,
) -> (Vec<CellRecord>, Vec<RuleViolation>) {
    let mut marked: Vec<CellRecord> = cells.to_vec();
    for c in &mut marked {
        c.modularity = Some((c.order % 4) as u8);
    }
    let mut violations = Vec::new();
    if let Some(p) = p {
        if let Some(layer) = p.layer_index(LAYER_MODULARITY) {
            validate_modularity_layer(&marked, p, layer, &mut violations);
            sort_violations(&mut violations);
        }
    }
    (marked, violations)
}

fn validate_modularity_layer(
    cells: &[CellRecord],
    p: &Pattern,
    layer: usize,
    out: &mut Vec<RuleViolation>,
) {
    use std::collections::HashMap;
    let mut expected: HashMap<(Coord, Coord), u32> = HashMap::new();
    for c in cells {
        let v = (c.order % 4) as u8;
        for pos in modularity_segments(&c.bounds) {
            expected.insert((pos.x, pos.y), modularity_value_code(v));
        }
    }
    // transformation pairs overwrite the segment ends on parents whose
    // north-east child is complete in the window
    for c in cells {
        if c.order == 0 {
            continue;
        }
        let child_center = ne_child_center(c);
        let child_side = cell_side(c.order - 1);
        let child_box = Box2::square(
            child_center.x - (child_side - 1) / 2,
            child_center.y - (child_side - 1) / 2,
            child_side,
        );
        let have_child = cells.iter().any(|d| d.bounds == child_box);
        if !have_child {
            continue;
        }
        let a = ((c.order - 1) % 4) as u8;
        let b = (c.order % 4) as u8;
        for pos in transformation_positions(&c.bounds) {
            expected.insert((pos.x, pos.y), modularity_pair_code(a, b));
        }
    }

    for pos in p.support.base.iter() {
        let code = p.get(layer, pos);
        let want = expected.get(&(pos.x, pos.y)).copied().unwrap_or(0);
        if code != want {
            let rule = if want == 0 {
                "modularity-localization"
            } else if code == 0 {
                "modularity-missing"
            } else {
                "modularity-value"
            };
            out.push(RuleViolation::at(
                rule,
                pos,
                format!("modularity code {code}, expected {want}"),
            ));
        }
    }
}

/// Paint the modularity layer the validator expects (generator side).
pub fn paint_modularity_layer(p: &mut Pattern, cells: &[CellRecord]) {
    let layer = p.layer_index(LAYER_MODULARITY).expect("modularity layer declared");
    for c in cells {
        let v = (c.order % 4) as u8;
        for pos in modularity_segments(&c.bounds) {
            p.set(layer, pos, modularity_value_code(v));
        }
    }
    for c in cells {
        if c.order == 0 {
            continue;
        }
        let child_center = ne_child_center(c);
        let child_side = cell_side(c.order - 1);
        let child_box = Box2::square(
            child_center.x - (child_side - 1) / 2,
            child_center.y - (child_side - 1) / 2,
            child_side,
        );
        if !cells.iter().any(|d| d.bounds == child_box) {
            continue;
        }
        let a = ((c.order - 1) % 4) as u8;
        let b = (c.order % 4) as u8;
        for pos in transformation_positions(&c.bounds) {
            p.set(layer, pos, modularity_pair_code(a, b));
        }
    }
}

/// Paint the subdivision layer the validator expects (generator side).
pub fn paint_subdivision_layer(p: &mut Pattern, cells: &[CellRecord]) {
    let layer = p.layer_index(LAYER_SUBDIVISION).expect("subdivision layer declared");
    let rob = p.layer_index(LAYER_ROBINSON).expect("robinson layer present");
    let big: Vec<CellRecord> = cells.iter().filter(|c| c.order >= 3).cloned().collect();
    let small: Vec<CellRecord> = cells.iter().filter(|c| c.order <= 2).cloned().collect();
    for c in &big {
        let deep = Obstacles::inside(c, &big);
        let shallow = Obstacles::inside(c, &small);
        let interior = Box2::new(c.bounds.x0 + 1, c.bounds.y0 + 1, c.bounds.w - 2, c.bounds.h - 2);
        for pos in interior.iter() {
            let Some(t) = decode_tile(p.get(rob, pos)) else { continue };
            if !t.is_blue() {
                continue;
            }
            if deep.occupied(pos) {
                continue; // painted by the smaller root
            }
            let code = if shallow.occupied(pos) {
                SUBDIV_GRAY
            } else {
                subdiv_addr_code(&organite_triplet(&c.bounds, pos))
            };
            p.set(layer, pos, code);
        }
    }
    // border rings carry the address of the cell inside its addressing root
    for d in cells {
        let root_order = d.order.max(2) + 1;
        let Some(root) = cells
            .iter()
            .find(|r| r.order == root_order && r.bounds.contains_box(&d.bounds))
        else {
            continue;
        };
        let depth = (root.order - d.order).min(3);
        let code = subdiv_addr_code(&address_in(&root.bounds, d.center(), depth));
        for pos in ring_positions(&d.bounds) {
            p.set(layer, pos, code);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robinson::{generate_supertile, tile_plane};

    #[test]
    fn order_two_supertile_contains_the_four_order_zero_petals() {
        let p = generate_supertile(Orient::Sw, 2, 10).unwrap();
        let petals = extract_petals(&p).unwrap();
        let zero: Vec<&Petal> = petals.iter().filter(|p| p.order == 0).collect();
        assert_eq!(zero.len(), 4);
        for petal in &zero {
            assert_eq!(petal.side(), 3);
            assert_eq!(petal.role, PetalRole::Transmission);
        }
        // the order-1 petal joining the four red quadrant centers
        let one: Vec<&Petal> = petals.iter().filter(|p| p.order == 1).collect();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].side(), 5);
        assert_eq!(one[0].role, PetalRole::Support);
        assert_eq!(one[0].bounds, Box2::square(1, 1, 5));
    }

    #[test]
    fn order_zero_supertile_has_no_petal() {
        let p = generate_supertile(Orient::Sw, 0, 10).unwrap();
        assert!(extract_petals(&p).unwrap().is_empty());
    }

    #[test]
    fn petal_sides_follow_the_size_law() {
        let p = generate_supertile(Orient::Sw, 4, 10).unwrap();
        let petals = extract_petals(&p).unwrap();
        assert!(!petals.is_empty());
        for petal in &petals {
            assert_eq!(petal.side(), petal_side(petal.order));
            assert!([3, 5, 9, 17].contains(&petal.side()));
            assert_eq!(
                petal.role,
                if petal.order % 2 == 1 { PetalRole::Support } else { PetalRole::Transmission }
            );
        }
    }

    #[test]
    fn cells_follow_the_size_law_and_period() {
        let w = tile_plane(5, Box2::new(0, 0, 64, 64), 4096).unwrap();
        let cells = detect_cells(&w).unwrap();
        let zero: Vec<&CellRecord> = cells.iter().filter(|c| c.order == 0).collect();
        assert!(!zero.is_empty());
        for c in &zero {
            assert_eq!(c.side(), 5);
            assert_eq!(c.enclosing_petal_order, 1);
        }
        // anchors recur with period 16 in both directions
        let anchors: Vec<(i64, i64)> = zero.iter().map(|c| (c.bounds.x0, c.bounds.y0)).collect();
        for &(x, y) in &anchors {
            for (dx, dy) in [(16i64, 0i64), (0, 16)] {
                if x + dx + 4 < 64 && y + dy + 4 < 64 {
                    assert!(anchors.contains(&(x + dx, y + dy)), "missing at ({},{})", x + dx, y + dy);
                }
            }
        }
    }

    #[test]
    fn small_supertile_has_no_complete_cell() {
        let p = generate_supertile(Orient::Sw, 1, 10).unwrap();
        assert!(detect_cells(&p).unwrap().is_empty());
    }

    #[test]
    fn organite_lookup_matches_the_function_table() {
        assert_eq!(organite_function(6, 5), OrganiteFunction::Machine);
        assert_eq!(organite_function(2, 3), OrganiteFunction::LinearIncrement);
        assert_eq!(organite_function(1, 3), OrganiteFunction::Demultiplexer);
        assert_eq!(organite_function(4, 4), OrganiteFunction::SystemCounter);
        assert_eq!(organite_function(0, 0), OrganiteFunction::NoFunction);
    }

    #[test]
    fn subdividing_small_cells_is_rejected() {
        let c = CellRecord {
            order: 2,
            bounds: Box2::square(0, 0, cell_side(2)),
            enclosing_petal_order: 5,
            organites: None,
            modularity: None,
            function_map: None,
        };
        let p = generate_supertile(Orient::Sw, 1, 10).unwrap();
        assert!(matches!(subdivide_cell(&c, &p), Err(HierarchyError::CellTooSmall(2))));
    }

    #[test]
    fn organite_partition_is_exact() {
        let c = CellRecord {
            order: 3,
            bounds: Box2::square(10, 20, cell_side(3)),
            enclosing_petal_order: 7,
            organites: None,
            modularity: None,
            function_map: None,
        };
        let w = (cell_side(3) - 1) / 8;
        let mut covered = 0i64;
        for j in 0..8u8 {
            for i in 0..8u8 {
                let b = c.organite_box(i, j);
                assert_eq!(b.w, w);
                covered += b.area();
                for j2 in 0..8u8 {
                    for i2 in 0..8u8 {
                        if (i, j) < (i2, j2) {
                            assert!(!b.intersects(&c.organite_box(i2, j2)));
                        }
                    }
                }
            }
        }
        assert_eq!(covered, (cell_side(3) - 1) * (cell_side(3) - 1));
    }

    #[test]
    fn triplet_recode_matches_the_address_figure() {
        // south-west-most area is 333 and recodes to (0, 0); the figure's
        // first row runs 333, 332, 330, 331 across the bottom corner
        assert_eq!(triplet_to_organite([3, 3, 3]), (0, 0));
        assert_eq!(triplet_to_organite([3, 3, 2]), (1, 0));
        assert_eq!(triplet_to_organite([3, 3, 0]), (0, 1));
        assert_eq!(triplet_to_organite([3, 3, 1]), (1, 1));
        assert_eq!(triplet_to_organite([1, 1, 1]), (7, 7));
        assert_eq!(triplet_to_organite([2, 2, 2]), (7, 0));
    }

    #[test]
    fn subdiv_codes_round_trip() {
        for len in 1..=3usize {
            for v in 0..(1u32 << (2 * len)) {
                let mut digits = vec![0u8; len];
                let mut x = v;
                for d in digits.iter_mut().rev() {
                    *d = (x % 4) as u8;
                    x /= 4;
                }
                assert_eq!(subdiv_decode(subdiv_addr_code(&digits)), Some(digits));
            }
        }
    }

    #[test]
    fn modularity_assignment_is_order_mod_four() {
        let w = tile_plane(5, Box2::new(0, 0, 96, 96), 4096).unwrap();
        let cells = detect_cells(&w).unwrap();
        let (marked, violations) = modularity_marks(&cells, None);
        assert!(violations.is_empty());
        for c in &marked {
            assert_eq!(c.modularity, Some((c.order % 4) as u8));
        }
        assert!(marked.iter().any(|c| c.order == 0 && c.modularity == Some(0)));
    }

    #[test]
    fn functional_area_rule_is_three_way() {
        let w = tile_plane(5, Box2::new(0, 0, 90, 90), 4096).unwrap();
        let cells = detect_cells(&w).unwrap();
        let c1 = cells.iter().find(|c| c.order == 1).expect("an order-1 cell");
        let map = assign_functional_areas(c1, &w).unwrap();
        assert!(!map.is_empty());
        let obstacles: Vec<Box2> = cells
            .iter()
            .filter(|d| d.bounds != c1.bounds && c1.bounds.contains_box(&d.bounds))
            .map(|d| d.bounds)
            .collect();
        assert!(!obstacles.is_empty());
        for ((x, y), f) in &map {
            let col = obstacles.iter().any(|o| *x >= o.x0 && *x <= o.x1());
            let row = obstacles.iter().any(|o| *y >= o.y0 && *y <= o.y1());
            let want = match (col, row) {
                (false, false) => Function::Computation,
                (true, false) => Function::TransferV,
                (false, true) => Function::TransferH,
                (true, true) => Function::NoFunction,
            };
            assert_eq!(*f, want);
        }
        // idempotence
        let again = assign_functional_areas(c1, &w).unwrap();
        assert_eq!(map, again);
    }
}
