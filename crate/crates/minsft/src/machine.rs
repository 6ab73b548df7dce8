//! The multi-head computing-machine model on a rectangular area, the
//! computation-active gating, and the four signal families with the
//! admissibility rule.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("bottom tape length {0} does not match the {1} active columns")]
    DimensionMismatch(usize, usize),
    #[error("flag stream length {0} does not match extent {1}")]
    LengthMismatch(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Up,
}

impl Move {
    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
            Move::Up => 'U',
        }
    }
}

/// A computing machine `(Q, A, delta, q0, qe, qs, #)`. The transition table
/// is total; the error and shadow states are fixed points that do not act on
/// the tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub states: u16,
    pub alphabet: u16,
    pub q0: u16,
    pub qe: u16,
    pub qs: u16,
    pub blank: u16,
    delta: Vec<(u16, u16, Move)>,
}

impl MachineSpec {
    /// Build a machine from explicit transitions; unspecified pairs default
    /// to the inert rule `(a, q, Up)`.
    pub fn new(
        states: u16,
        alphabet: u16,
        q0: u16,
        qe: u16,
        qs: u16,
        blank: u16,
        rules: &[((u16, u16), (u16, u16, Move))],
    ) -> Self {
        assert!(q0 < states && qe < states && qs < states && blank < alphabet);
        let mut delta = Vec::with_capacity(states as usize * alphabet as usize);
        for a in 0..alphabet {
            for q in 0..states {
                delta.push((a, q, Move::Up));
            }
        }
        let mut m = MachineSpec { states, alphabet, q0, qe, qs, blank, delta };
        for ((a, q), (a2, q2, mv)) in rules {
            assert!(
                *q != qe && *q != qs,
                "the error and shadow states are fixed and cannot be redefined"
            );
            let at = m.index(*a, *q);
            m.delta[at] = (*a2, *q2, *mv);
        }
        m
    }

    fn index(&self, a: u16, q: u16) -> usize {
        a as usize * self.states as usize + q as usize
    }

    pub fn delta(&self, a: u16, q: u16) -> (u16, u16, Move) {
        self.delta[self.index(a, q)]
    }

    /// Grow the state and letter sets to the next double power of two with
    /// inert extras.
    pub fn padded(&self) -> MachineSpec {
        let mut m = self.clone();
        m.states = next_double_power(self.states);
        m.alphabet = next_double_power(self.alphabet);
        let mut delta = Vec::with_capacity(m.states as usize * m.alphabet as usize);
        for a in 0..m.alphabet {
            for q in 0..m.states {
                if a < self.alphabet && q < self.states {
                    delta.push(self.delta(a, q));
                } else {
                    delta.push((a, q, Move::Up));
                }
            }
        }
        m.delta = delta;
        m
    }
}

fn next_double_power(n: u16) -> u16 {
    let mut e = 1u32;
    while (1u32 << e) < n as u32 {
        e *= 2;
    }
    (1u32 << e) as u16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrDir {
    Left,
    Right,
}

/// A rectangular computation area with its gating and initialization data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationArea {
    pub width: usize,
    pub height: usize,
    pub active_cols: Vec<bool>,
    pub active_rows: Vec<bool>,
    /// One `(letter, state)` per active column, left to right.
    pub bottom: Vec<(u16, u16)>,
    /// State entering from the west (resp. east) side at each row; the
    /// shadow state means no entry.
    pub west: Vec<u16>,
    pub east: Vec<u16>,
    /// Error-propagation direction above each top column.
    pub arrows: Vec<ErrDir>,
}

impl ComputationArea {
    /// Fully active area with a clean tape: one initial head on the leftmost
    /// column, shadow heads elsewhere, no side entries.
    pub fn clean(spec: &MachineSpec, width: usize, height: usize) -> Self {
        let mut bottom = vec![(spec.blank, spec.qs); width];
        bottom[0] = (spec.blank, spec.q0);
        ComputationArea {
            width,
            height,
            active_cols: vec![true; width],
            active_rows: vec![true; height],
            bottom,
            west: vec![spec.qs; height],
            east: vec![spec.qs; height],
            arrows: vec![ErrDir::Left; width],
        }
    }

    pub fn active_col_indices(&self) -> Vec<usize> {
        (0..self.width).filter(|x| self.active_cols[*x]).collect()
    }
}

/// Content of one diagram position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Content {
    /// Letter on an active column outside active rows.
    Letter(u16),
    /// Letter plus head state on a computation position (shadow = no head).
    LetterHead(u16, u16),
    /// Sideways head-transport tracks on non-active columns.
    Pass(u16, u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadEvent {
    Move,
    Fuse,
    BorderHit,
}

/// The grid of per-position contents produced by the row semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceTimeDiagram {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Content>,
    pub head_events: Vec<(usize, usize, u16, HeadEvent)>,
}

impl SpaceTimeDiagram {
    pub fn get(&self, x: usize, y: usize) -> Content {
        self.cells[y * self.width + x]
    }

    /// Non-shadow head states in a row, left to right with their column.
    pub fn heads_in_row(&self, qs: u16, y: usize) -> Vec<(usize, u16)> {
        (0..self.width)
            .filter_map(|x| match self.get(x, y) {
                Content::LetterHead(_, q) if q != qs => Some((x, q)),
                _ => None,
            })
            .collect()
    }
}

struct Config {
    letters: Vec<u16>,     // per active column
    heads: Vec<Option<u16>>, // per active column, non-shadow heads only
}

/// Run the area row by row. Row 0 shows the initial tape; every further
/// computation-active row applies one machine step (collision fusion, side
/// absorption, standard delta moves, border errors, idle copying), inactive
/// rows transport the content unchanged.
pub fn run_area(spec: &MachineSpec, area: &ComputationArea) -> Result<SpaceTimeDiagram, MachineError> {
    let cols = area.active_col_indices();
    if area.bottom.len() != cols.len() {
        return Err(MachineError::DimensionMismatch(area.bottom.len(), cols.len()));
    }
    assert!(area.width >= 1 && area.height >= 1);
    assert_eq!(area.active_cols.len(), area.width);
    assert_eq!(area.active_rows.len(), area.height);
    assert_eq!(area.west.len(), area.height);
    assert_eq!(area.east.len(), area.height);

    let mut cfg = Config {
        letters: area.bottom.iter().map(|(a, _)| *a).collect(),
        heads: area.bottom.iter().map(|(_, q)| (*q != spec.qs).then_some(*q)).collect(),
    };
    let mut cells = vec![Content::Pass(spec.qs, spec.qs); area.width * area.height];
    let mut events = Vec::new();

    render_row(spec, area, &cols, &cfg, 0, true, &mut cells);
    for y in 1..area.height {
        let mut travel: Vec<(usize, usize, u16, bool)> = Vec::new();
        if area.active_rows[y] {
            step(spec, area, &cols, &mut cfg, y, &mut events, &mut travel);
        }
        render_row(spec, area, &cols, &cfg, y, area.active_rows[y], &mut cells);
        for (xa, xb, q, east) in travel {
            for x in xa..=xb {
                if !area.active_cols[x] {
                    let at = y * area.width + x;
                    if let Content::Pass(we, ew) = cells[at] {
                        cells[at] = if east { Content::Pass(q, ew) } else { Content::Pass(we, q) };
                    }
                }
            }
        }
    }
    Ok(SpaceTimeDiagram { width: area.width, height: area.height, cells, head_events: events })
}

fn render_row(
    spec: &MachineSpec,
    area: &ComputationArea,
    cols: &[usize],
    cfg: &Config,
    y: usize,
    active: bool,
    cells: &mut [Content],
) {
    for (ci, &x) in cols.iter().enumerate() {
        let at = y * area.width + x;
        cells[at] = if active {
            Content::LetterHead(cfg.letters[ci], cfg.heads[ci].unwrap_or(spec.qs))
        } else {
            Content::Letter(cfg.letters[ci])
        };
    }
}

fn step(
    spec: &MachineSpec,
    area: &ComputationArea,
    cols: &[usize],
    cfg: &mut Config,
    y: usize,
    events: &mut Vec<(usize, usize, u16, HeadEvent)>,
    travel: &mut Vec<(usize, usize, u16, bool)>,
) {
    let n = cols.len();
    if n == 0 {
        return;
    }
    // phase 1: every local head applies delta and tentatively emits
    let mut writes: Vec<Option<u16>> = vec![None; n];
    let mut incoming: Vec<Vec<u16>> = vec![Vec::new(); n];
    let mut border: Vec<Option<u16>> = vec![None; n];
    let mut self_pushed: Vec<bool> = vec![false; n];
    for ci in 0..n {
        let Some(q) = cfg.heads[ci] else { continue };
        let (a2, q2, mv) = spec.delta(cfg.letters[ci], q);
        // a transition into the shadow state ends the head; shadow symbols
        // never count as head inputs anywhere
        match mv {
            Move::Up => {
                writes[ci] = Some(a2);
                if q2 != spec.qs {
                    incoming[ci].push(q2);
                    self_pushed[ci] = true;
                }
            }
            Move::Right => {
                if ci + 1 < n {
                    writes[ci] = Some(a2);
                    if q2 != spec.qs {
                        incoming[ci + 1].push(q2);
                        travel.push((cols[ci] + 1, cols[ci + 1] - 1, q2, true));
                        events.push((cols[ci + 1], y, q2, HeadEvent::Move));
                    }
                } else {
                    border[ci] = Some(q);
                }
            }
            Move::Left => {
                if ci > 0 {
                    writes[ci] = Some(a2);
                    if q2 != spec.qs {
                        incoming[ci - 1].push(q2);
                        travel.push((cols[ci - 1] + 1, cols[ci] - 1, q2, false));
                        events.push((cols[ci - 1], y, q2, HeadEvent::Move));
                    }
                } else {
                    border[ci] = Some(q);
                }
            }
        }
    }
    // side entries arrive at the outermost active columns
    if area.west[y] != spec.qs {
        incoming[0].push(area.west[y]);
        events.push((cols[0], y, area.west[y], HeadEvent::Move));
    }
    if area.east[y] != spec.qs {
        incoming[n - 1].push(area.east[y]);
        events.push((cols[n - 1], y, area.east[y], HeadEvent::Move));
    }

    // phase 2: resolve each computation position from its input heads
    let mut next_letters = cfg.letters.clone();
    let mut next_heads: Vec<Option<u16>> = vec![None; n];
    for ci in 0..n {
        let local = cfg.heads[ci];
        let arrivals_from_others = incoming[ci].len() - usize::from(self_pushed[ci]);
        let inputs = usize::from(local.is_some()) + arrivals_from_others;
        if inputs >= 2 {
            // collision: fuse into a single error head, letter unchanged
            next_heads[ci] = Some(spec.qe);
            events.push((cols[ci], y, spec.qe, HeadEvent::Fuse));
            continue;
        }
        if let Some(q) = border[ci] {
            // the delta move points outside the area
            let _ = q;
            next_heads[ci] = Some(spec.qe);
            events.push((cols[ci], y, spec.qe, HeadEvent::BorderHit));
            continue;
        }
        if local.is_some() {
            // a lone local head: the standard rule applies
            if let Some(a2) = writes[ci] {
                next_letters[ci] = a2;
            }
            if self_pushed[ci] {
                next_heads[ci] = incoming[ci].first().copied();
            }
        } else if let Some(q) = incoming[ci].first() {
            // a lone arriving head lands without touching the letter
            next_heads[ci] = Some(*q);
        }
    }
    cfg.letters = next_letters;
    cfg.heads = next_heads.into_iter().map(|h| h.filter(|q| *q != spec.qs)).collect();
}

// ---------------------------------------------------------------------------
// reference equivalence

/// Conventional single-head simulator on a bounded tape: the independent
/// oracle for the well-initialized behavior of [`run_area`].
pub struct ReferenceMachine {
    pub tape: Vec<u16>,
    pub pos: usize,
    pub state: u16,
}

impl ReferenceMachine {
    pub fn start(spec: &MachineSpec, width: usize) -> Self {
        ReferenceMachine { tape: vec![spec.blank; width], pos: 0, state: spec.q0 }
    }

    pub fn step(&mut self, spec: &MachineSpec) {
        let (a2, q2, mv) = spec.delta(self.tape[self.pos], self.state);
        match mv {
            Move::Up => {
                self.tape[self.pos] = a2;
                self.state = q2;
            }
            Move::Right => {
                if self.pos + 1 < self.tape.len() {
                    self.tape[self.pos] = a2;
                    self.pos += 1;
                    self.state = q2;
                } else {
                    self.state = spec.qe;
                }
            }
            Move::Left => {
                if self.pos > 0 {
                    self.tape[self.pos] = a2;
                    self.pos -= 1;
                    self.state = q2;
                } else {
                    self.state = spec.qe;
                }
            }
        }
    }
}

/// True when the multi-head area semantics, started well initialized, agrees
/// with the conventional simulator configuration for configuration.
pub fn reference_equivalence(spec: &MachineSpec, width: usize, steps: usize) -> bool {
    let area = ComputationArea::clean(spec, width, steps + 1);
    let Ok(diagram) = run_area(spec, &area) else { return false };
    let mut reference = ReferenceMachine::start(spec, width);
    for y in 0..=steps {
        let heads = diagram.heads_in_row(spec.qs, y);
        if heads != vec![(reference.pos, reference.state)] {
            return false;
        }
        for x in 0..width {
            let Content::LetterHead(a, _) = diagram.get(x, y) else { return false };
            if a != reference.tape[x] {
                return false;
            }
        }
        reference.step(spec);
    }
    true
}

// ---------------------------------------------------------------------------
// signals

/// The four initialization verdicts, the error-signal path and the
/// admissibility bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalReport {
    /// First column (left to right) of the top row carrying an error state
    /// or an off column; `width` when the top row is clean.
    pub first_error_col: usize,
    /// First dirty bottom position from the left; `width` when clean.
    pub empty_tape_lr: usize,
    /// Start of the clean bottom suffix from the right; `0` when clean.
    pub empty_tape_rl: usize,
    pub left_side_clean: bool,
    pub right_side_clean: bool,
    pub error_path: Vec<(usize, usize)>,
    pub admissible: bool,
}

/// Compute the error, empty-tape and empty-sides colorings of a diagram and
/// apply the forbidding rule.
pub fn compute_signals(
    spec: &MachineSpec,
    diagram: &SpaceTimeDiagram,
    area: &ComputationArea,
) -> SignalReport {
    let w = diagram.width;
    let top = diagram.height - 1;

    let col_error = |x: usize| -> bool {
        if !area.active_cols[x] {
            return true;
        }
        matches!(diagram.get(x, top), Content::LetterHead(_, q) if q == spec.qe)
    };
    let first_error_col = (0..w).find(|x| col_error(*x)).unwrap_or(w);

    // the initial tape is clean when every active position carries a shadow
    // blank, except the leftmost which carries the initial head
    let leftmost_active = (0..w).find(|x| area.active_cols[*x]);
    let tape_clean = |x: usize| -> bool {
        if !area.active_cols[x] {
            return false;
        }
        match diagram.get(x, 0) {
            Content::LetterHead(a, q) => {
                a == spec.blank && if Some(x) == leftmost_active { q == spec.q0 } else { q == spec.qs }
            }
            _ => false,
        }
    };
    let empty_tape_lr = (0..w).find(|x| !tape_clean(*x)).unwrap_or(w);
    let empty_tape_rl = (0..w).rev().find(|x| !tape_clean(*x)).map_or(0, |x| x + 1);

    let left_side_clean =
        (0..diagram.height).all(|y| area.west[y] == spec.qs && area.active_rows[y]);
    let right_side_clean =
        (0..diagram.height).all(|y| area.east[y] == spec.qs && area.active_rows[y]);

    let mut error_path = Vec::new();
    let mut admissible = true;
    if first_error_col < w {
        let dir = area.arrows[first_error_col];
        let arrival_col = match dir {
            ErrDir::Left => {
                for x in (0..=first_error_col).rev() {
                    error_path.push((x, top));
                }
                for y in (0..top).rev() {
                    error_path.push((0, y));
                }
                0
            }
            ErrDir::Right => {
                for x in first_error_col..w {
                    error_path.push((x, top));
                }
                for y in (0..top).rev() {
                    error_path.push((w - 1, y));
                }
                w - 1
            }
        };
        let tape_lr_green = arrival_col < empty_tape_lr;
        let tape_rl_green = arrival_col >= empty_tape_rl;
        admissible = !(tape_lr_green && tape_rl_green && left_side_clean && right_side_clean);
    }

    SignalReport {
        first_error_col,
        empty_tape_lr,
        empty_tape_rl,
        left_side_clean,
        right_side_clean,
        error_path,
        admissible,
    }
}

/// True when the area's gating equals the flags decoded from the digit
/// streams positionally.
pub fn active_gating_consistency(
    area: &ComputationArea,
    col_digits: &[u64],
    row_digits: &[u64],
    l: u32,
) -> Result<bool, MachineError> {
    if col_digits.len() != area.width {
        return Err(MachineError::LengthMismatch(col_digits.len(), area.width));
    }
    if row_digits.len() != area.height {
        return Err(MachineError::LengthMismatch(row_digits.len(), area.height));
    }
    let ok_cols = col_digits
        .iter()
        .zip(&area.active_cols)
        .all(|(d, on)| crate::counters::decode_linear_digit(*d, l).on_col == *on);
    let ok_rows = row_digits
        .iter()
        .zip(&area.active_rows)
        .all(|(d, on)| crate::counters::decode_linear_digit(*d, l).on_row == *on);
    Ok(ok_cols && ok_rows)
}

// ---------------------------------------------------------------------------
// machine files

pub const MACHINE_MAGIC: &str = "machine v1";

pub fn write_machine(m: &MachineSpec) -> Vec<u8> {
    use std::fmt::Write as _;
    let mut s = String::new();
    s.push_str(MACHINE_MAGIC);
    s.push('\n');
    let _ = writeln!(s, "states {}", m.states);
    let _ = writeln!(s, "alphabet {}", m.alphabet);
    let _ = writeln!(s, "init {} error {} shadow {} blank {}", m.q0, m.qe, m.qs, m.blank);
    for a in 0..m.alphabet {
        for q in 0..m.states {
            let (a2, q2, mv) = m.delta(a, q);
            if (a2, q2, mv) != (a, q, Move::Up) {
                let _ = writeln!(s, "{a} {q} -> {a2} {q2} {}", mv.letter());
            }
        }
    }
    s.into_bytes()
}

pub fn parse_machine(bytes: &[u8]) -> Result<MachineSpec, MachineError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| MachineError::Parse { line: 0, msg: e.to_string() })?;
    let err = |line: usize, msg: &str| MachineError::Parse { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    if magic.trim() != MACHINE_MAGIC {
        return Err(err(1, "bad magic"));
    }
    let mut states = None;
    let mut alphabet = None;
    let mut specials: Option<(u16, u16, u16, u16)> = None;
    let mut rules: Vec<((u16, u16), (u16, u16, Move))> = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let g = |s: &str| s.parse::<u16>().map_err(|_| err(ln + 1, "bad number"));
        match toks.as_slice() {
            ["states", n] => states = Some(g(n)?),
            ["alphabet", n] => alphabet = Some(g(n)?),
            ["init", a, "error", b, "shadow", c, "blank", d] => {
                specials = Some((g(a)?, g(b)?, g(c)?, g(d)?));
            }
            [a, q, "->", a2, q2, mv] => {
                let mv = match *mv {
                    "L" => Move::Left,
                    "R" => Move::Right,
                    "U" => Move::Up,
                    _ => return Err(err(ln + 1, "move must be L, R or U")),
                };
                rules.push(((g(a)?, g(q)?), (g(a2)?, g(q2)?, mv)));
            }
            _ => return Err(err(ln + 1, "unrecognized line")),
        }
    }
    let states = states.ok_or_else(|| err(0, "missing states"))?;
    let alphabet = alphabet.ok_or_else(|| err(0, "missing alphabet"))?;
    let (q0, qe, qs, blank) = specials.ok_or_else(|| err(0, "missing declarations"))?;
    Ok(MachineSpec::new(states, alphabet, q0, qe, qs, blank, &rules))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// q0 = 0, qe = 1, qs = 2, worker = 3; a unary incrementer that writes a
    /// mark and walks right.
    fn incrementer() -> MachineSpec {
        MachineSpec::new(
            4,
            2,
            0,
            1,
            2,
            0,
            &[((0, 0), (1, 3, Move::Right)), ((0, 3), (1, 3, Move::Right))],
        )
    }

    /// Writes one mark and then idles in place forever.
    fn stationary() -> MachineSpec {
        MachineSpec::new(4, 2, 0, 1, 2, 0, &[((0, 0), (1, 3, Move::Up)), ((1, 3), (1, 3, Move::Up))])
    }

    #[test]
    fn idle_row_copies_letters_upward() {
        let spec = incrementer();
        let mut area = ComputationArea::clean(&spec, 5, 3);
        area.bottom[0] = (spec.blank, spec.qs); // all-shadow bottom row
        let d = run_area(&spec, &area).unwrap();
        for y in 0..3 {
            assert!(d.heads_in_row(spec.qs, y).is_empty());
            for x in 0..5 {
                assert_eq!(d.get(x, y), Content::LetterHead(spec.blank, spec.qs));
            }
        }
    }

    #[test]
    fn reference_equivalence_on_the_incrementer() {
        assert!(reference_equivalence(&incrementer(), 12, 10));
        assert!(reference_equivalence(&stationary(), 6, 10));
    }

    #[test]
    fn halting_state_is_a_fixed_point() {
        let spec = MachineSpec::new(4, 2, 0, 1, 2, 0, &[((0, 0), (0, 1, Move::Up))]);
        assert!(reference_equivalence(&spec, 4, 8));
    }

    #[test]
    fn two_heads_meeting_fuse_into_one_error_head() {
        // two walkers started facing each other; q3 walks right, q4... use
        // side entry: a head entering west while the initial head idles.
        let spec = stationary();
        let mut area = ComputationArea::clean(&spec, 3, 4);
        area.west[2] = 3; // a head enters at the leftmost column at row 2
        let d = run_area(&spec, &area).unwrap();
        // row 2: the entering head lands on the column where the initial
        // head idles: collision, fused into a single error head
        let heads = d.heads_in_row(spec.qs, 2);
        assert_eq!(heads, vec![(0, spec.qe)]);
        let fusions: Vec<_> =
            d.head_events.iter().filter(|e| e.3 == HeadEvent::Fuse).collect();
        assert_eq!(fusions.len(), 1);
    }

    #[test]
    fn walking_into_the_border_errors() {
        let spec = incrementer();
        let area = ComputationArea::clean(&spec, 3, 6);
        let d = run_area(&spec, &area).unwrap();
        // width 3: after two moves the head hits the east border
        let top_heads = d.heads_in_row(spec.qs, 5);
        assert_eq!(top_heads, vec![(2, spec.qe)]);
        assert!(d.head_events.iter().any(|e| e.3 == HeadEvent::BorderHit));
    }

    #[test]
    fn moving_left_from_the_leftmost_column_errors() {
        let spec = MachineSpec::new(4, 2, 0, 1, 2, 0, &[((0, 0), (0, 3, Move::Left))]);
        let area = ComputationArea::clean(&spec, 3, 3);
        let d = run_area(&spec, &area).unwrap();
        assert_eq!(d.heads_in_row(spec.qs, 1), vec![(0, spec.qe)]);
    }

    #[test]
    fn clean_error_run_is_inadmissible() {
        // a machine that immediately errors on a pristine area: the
        // forbidden configuration
        let spec = MachineSpec::new(4, 2, 0, 1, 2, 0, &[((0, 0), (0, 1, Move::Up))]);
        let area = ComputationArea::clean(&spec, 4, 4);
        let d = run_area(&spec, &area).unwrap();
        let r = compute_signals(&spec, &d, &area);
        assert!(r.first_error_col < 4);
        assert!(!r.admissible);
        assert!(!r.error_path.is_empty());
    }

    #[test]
    fn tape_dirt_discharges_the_error() {
        let spec = MachineSpec::new(4, 2, 0, 1, 2, 0, &[((0, 0), (0, 1, Move::Up))]);
        let mut area = ComputationArea::clean(&spec, 4, 4);
        area.bottom[2] = (1, spec.qs); // one non-blank initial letter
        let d = run_area(&spec, &area).unwrap();
        let r = compute_signals(&spec, &d, &area);
        assert!(r.first_error_col < 4);
        assert!(r.admissible);
    }

    #[test]
    fn no_error_means_nothing_to_propagate() {
        let spec = stationary();
        let area = ComputationArea::clean(&spec, 4, 4);
        let d = run_area(&spec, &area).unwrap();
        let r = compute_signals(&spec, &d, &area);
        assert_eq!(r.first_error_col, 4);
        assert!(r.error_path.is_empty());
        assert!(r.admissible);
    }

    #[test]
    fn gating_consistency_round_trips() {
        use crate::counters::{decode_linear_digit, encode_linear_digit};
        let spec = stationary();
        let l = 1;
        let mut area = ComputationArea::clean(&spec, 4, 3);
        area.active_cols[2] = false;
        area.bottom = vec![(0, spec.q0), (0, spec.qs), (0, spec.qs)];
        let digits = |flags: &[bool], row: bool| -> Vec<u64> {
            flags
                .iter()
                .map(|on| {
                    let mut d = decode_linear_digit(0, l);
                    d.on_col = *on;
                    d.on_row = row;
                    if row {
                        d.on_row = *on;
                    }
                    encode_linear_digit(&d, l)
                })
                .collect()
        };
        let col_digits = digits(&area.active_cols.clone(), false);
        let row_digits = digits(&area.active_rows.clone(), true);
        assert!(active_gating_consistency(&area, &col_digits, &row_digits, l).unwrap());
        let mut flipped = area.active_cols.clone();
        flipped[1] = !flipped[1];
        let bad = digits(&flipped, false);
        assert!(!active_gating_consistency(&area, &bad, &row_digits, l).unwrap());
        assert!(matches!(
            active_gating_consistency(&area, &bad[..2], &row_digits, l),
            Err(MachineError::LengthMismatch(2, 4))
        ));
    }

    #[test]
    fn transitions_into_the_shadow_state_end_the_head() {
        // the initial head writes a mark and dissolves rightwards into the
        // shadow state; the stationary worker next door must not fuse
        let spec = MachineSpec::new(5, 2, 0, 1, 2, 0, &[((0, 0), (1, 2, Move::Right))]);
        let mut area = ComputationArea::clean(&spec, 3, 3);
        area.bottom[1] = (0, 4); // an idle head in the inert state 4
        let d = run_area(&spec, &area).unwrap();
        // after one step: no head at column 0, the idle head untouched
        assert_eq!(d.heads_in_row(spec.qs, 1), vec![(1, 4)]);
        assert!(d.head_events.iter().all(|e| e.3 != HeadEvent::Fuse));
        // the mark was written before the head dissolved
        assert_eq!(d.get(0, 1), Content::LetterHead(1, spec.qs));
    }

    #[test]
    fn tape_must_match_the_active_columns() {
        let spec = incrementer();
        let mut area = ComputationArea::clean(&spec, 4, 3);
        area.active_cols[1] = false; // bottom still has 4 entries
        assert!(matches!(
            run_area(&spec, &area),
            Err(MachineError::DimensionMismatch(4, 3))
        ));
    }

    #[test]
    fn machine_files_round_trip() {
        let m = incrementer();
        let bytes = write_machine(&m);
        let n = parse_machine(&bytes).unwrap();
        assert_eq!(m, n);
    }

    #[test]
    fn padding_grows_to_double_powers() {
        let m = incrementer().padded();
        assert_eq!(m.states, 4);
        assert_eq!(m.alphabet, 2);
        let spec = MachineSpec::new(5, 3, 0, 1, 2, 0, &[]);
        let p = spec.padded();
        assert_eq!(p.states, 16);
        assert_eq!(p.alphabet, 4);
        // inert extras
        assert_eq!(p.delta(3, 9), (3, 9, Move::Up));
    }
}
