//! Integer boxes and positions shared by all layers.

/// Signed grid coordinate. Windows can sit anywhere in the plane.
pub type Coord = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos2 {
    pub x: Coord,
    pub y: Coord,
}

impl Pos2 {
    pub const fn new(x: Coord, y: Coord) -> Self {
        Pos2 { x, y }
    }
}

/// Axis-aligned box with strictly positive extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Box2 {
    pub x0: Coord,
    pub y0: Coord,
    pub w: Coord,
    pub h: Coord,
}

impl Box2 {
    pub const fn new(x0: Coord, y0: Coord, w: Coord, h: Coord) -> Self {
        Box2 { x0, y0, w, h }
    }

    /// Square box anchored at `(x0, y0)`.
    pub const fn square(x0: Coord, y0: Coord, side: Coord) -> Self {
        Box2 { x0, y0, w: side, h: side }
    }

    pub const fn x1(&self) -> Coord {
        self.x0 + self.w - 1
    }

    pub const fn y1(&self) -> Coord {
        self.y0 + self.h - 1
    }

    pub fn contains(&self, p: Pos2) -> bool {
        p.x >= self.x0 && p.x <= self.x1() && p.y >= self.y0 && p.y <= self.y1()
    }

    pub fn contains_box(&self, b: &Box2) -> bool {
        b.x0 >= self.x0 && b.x1() <= self.x1() && b.y0 >= self.y0 && b.y1() <= self.y1()
    }

    pub fn intersects(&self, b: &Box2) -> bool {
        self.x0 <= b.x1() && b.x0 <= self.x1() && self.y0 <= b.y1() && b.y0 <= self.y1()
    }

    pub fn area(&self) -> i64 {
        self.w * self.h
    }

    /// Iterate positions row-major (y outer, x inner).
    pub fn iter(&self) -> impl Iterator<Item = Pos2> + '_ {
        let b = *self;
        (b.y0..=b.y1()).flat_map(move |y| (b.x0..=b.x1()).map(move |x| Pos2::new(x, y)))
    }
}

/// 2-adic valuation of `t + 1`; the structural "level" of a grid line.
///
/// Level-0 lines are the even ones (blue corner lattice), level-k lines for
/// k >= 1 are the center lines of the order-k crosses.
pub fn line_level(t: Coord) -> u32 {
    debug_assert!(t >= -1);
    (t + 1).trailing_zeros()
}

/// Orientation bit of the level-`k` line through `t`: 0 for the west/south
/// member of a pair of consecutive same-level lines, 1 for the east/north one.
pub fn line_orient_bit(t: Coord, level: u32) -> u8 {
    (((t + 1) >> (level + 1)) & 1) as u8
}
