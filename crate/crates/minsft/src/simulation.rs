//! Effective-system oracles, the assembler producing finite witness stacks
//! with every layer populated, the whole-stack validator, the simulation
//! map and the commuting-diagram check.

use crate::config::Config;
use crate::counters::{
    decode_linear_digit, linear_step, system_step, CounterParams, LinearCounterState,
    SystemCounterState, SystemParams,
};
use crate::geom::{line_level, Box2, Coord, Pos2};
use crate::hierarchy::{
    self, assign_functional_areas_geometric, cell_period, detect_cells, extract_petals,
    modularity_marks, paint_modularity_layer, paint_subdivision_layer, CellRecord, Function,
    HierarchyError, Petal, LAYER_FUNCTIONAL, LAYER_MODULARITY, LAYER_SUBDIVISION,
};
use crate::machine::{
    compute_signals, run_area, ComputationArea, Content, ErrDir, MachineError, MachineSpec,
    Move, SignalReport, SpaceTimeDiagram,
};
use crate::pattern::{sort_violations, Pattern, RuleViolation, Support};
use crate::robinson::{
    check_robinson_rules, decode_tile, tile_plane, RobinsonError, TileKind, LAYER_ROBINSON,
};
use thiserror::Error;

pub const LAYER_SYSTEM_BITS: &str = "system-bits";
pub const LAYER_CHANNELS: &str = "channels";
pub const LAYER_LINEAR_COUNTER: &str = "linear-counter";
pub const LAYER_SYSTEM_COUNTER: &str = "system-counter";
pub const LAYER_MACHINE: &str = "machine";

pub const SECTION_LAYERS: [&str; 9] = [
    LAYER_ROBINSON,
    LAYER_SUBDIVISION,
    LAYER_SYSTEM_BITS,
    LAYER_MODULARITY,
    LAYER_FUNCTIONAL,
    LAYER_CHANNELS,
    LAYER_LINEAR_COUNTER,
    LAYER_SYSTEM_COUNTER,
    LAYER_MACHINE,
];

#[derive(Debug, Error)]
pub enum SimError {
    #[error("membership oracle rejects the generated prefix at length {0}")]
    OracleRejection(usize),
    #[error("oracle step budget exceeded")]
    BudgetExceeded,
    #[error("window contains no complete cell of order {0}")]
    NoCompleteCell(u32),
    #[error("two order-{0} cells disagree on the system bit")]
    InconsistentBits(u32),
    #[error("no recurrence found within {0} orbit steps")]
    BoundExceeded(u64),
    #[error(transparent)]
    Robinson(#[from] RobinsonError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

// ---------------------------------------------------------------------------
// effective systems

/// An effective dynamical system on `{0..alphabet}^N` given by oracles: a
/// membership procedure for cylinders of the phase space, one for the graph
/// of the map, and a generator of orbit prefixes of a designated point.
pub struct EffectiveSystemSpec {
    pub name: String,
    pub alphabet: u8,
    pub membership: Box<dyn Fn(&[u8]) -> bool + Send + Sync>,
    /// Does the cylinder of pairs `(x_i, f(x)_i)` meet the graph?
    pub graph: Box<dyn Fn(&[u8], &[u8]) -> bool + Send + Sync>,
    /// Prefix of `f^c(z)` for the designated point `z`.
    pub orbit_prefix: Box<dyn Fn(u64, usize) -> Vec<u8> + Send + Sync>,
}

/// The binary odometer: the full shift `{0,1}^N` with the add-one-with-carry
/// map, a concrete minimal effective system.
pub fn odometer_system() -> EffectiveSystemSpec {
    fn prefix(c: u64, len: usize) -> Vec<u8> {
        (0..len).map(|i| if i < 64 { ((c >> i) & 1) as u8 } else { 0 }).collect()
    }
    EffectiveSystemSpec {
        name: "odometer".to_string(),
        alphabet: 2,
        membership: Box::new(|_w| true),
        graph: Box::new(|x, y| {
            let n = x.len().min(y.len());
            let mut carry = 1u8;
            for i in 0..n {
                let want = x[i] ^ carry;
                carry &= x[i];
                if y[i] != want {
                    return false;
                }
            }
            true
        }),
        orbit_prefix: Box::new(prefix),
    }
}

/// Smallest `t <= bound` such that the cylinder of `p` recurs along the
/// designated orbit at an `N`-multiple offset from its first visit.
pub fn recurrence_witness(
    sys: &EffectiveSystemSpec,
    p: &[u8],
    n_multiple: u64,
    bound: u64,
) -> Result<u64, SimError> {
    assert!(n_multiple >= 1);
    if p.is_empty() {
        return Ok(0);
    }
    let hits = |c: u64| (sys.orbit_prefix)(c, p.len()) == p;
    let u = (0..=bound).find(|c| hits(*c)).ok_or(SimError::BoundExceeded(bound))?;
    (1..=bound)
        .find(|t| hits(u + n_multiple * t))
        .ok_or(SimError::BoundExceeded(bound))
}

// ---------------------------------------------------------------------------
// the stack assembly

/// Counter phases and free-bit seed the assembler starts from.
#[derive(Debug, Clone, Default)]
pub struct Phases {
    pub seed: u64,
}

impl Phases {
    fn draw(&self, salt: u64, modulus: u64) -> u64 {
        // splitmix-style deterministic draw
        let mut z = self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        (z ^ (z >> 31)) % modulus.max(1)
    }
}

/// The random channel of an odd cell: the organite column and row its
/// counter bit travels through, depending on the modularity mark.
pub fn channel_organites(mark: u8) -> Option<(u8, u8)> {
    match mark {
        1 => Some((2, 4)),
        3 => Some((5, 1)),
        _ => None,
    }
}

/// Organite holding the system counter line, by modularity mark.
pub fn system_counter_organite(mark: u8) -> Option<(u8, u8)> {
    match mark {
        1 => Some((2, 5)),
        3 => Some((5, 2)),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct ChannelRecord {
    pub cell: usize,
    pub col_organite: u8,
    pub row_organite: u8,
    pub bit: u8,
}

#[derive(Debug, Clone)]
pub struct SectionData {
    /// System bit per cell order; `None` where the window has no line of the
    /// corresponding level.
    pub level_bits: Vec<Option<u8>>,
    /// System counter state per odd order >= 3.
    pub system_states: Vec<(u32, SystemCounterState)>,
    pub channels: Vec<ChannelRecord>,
}

#[derive(Debug, Clone)]
pub struct LinearLevel {
    pub order: u32,
    pub params: CounterParams,
    /// Value at each cell of this order (indices into `cells`).
    pub values: Vec<(usize, LinearCounterState)>,
}

pub struct MachineInstance {
    pub cell: usize,
    pub spec: MachineSpec,
    pub area: ComputationArea,
    pub diagram: SpaceTimeDiagram,
    pub report: SignalReport,
    /// Machine-grid coordinates (columns and rows of functional positions).
    pub grid_x: Vec<Coord>,
    pub grid_y: Vec<Coord>,
}

/// A finite stack of sections sharing one structure layer: the assembled
/// witness of the construction at desk scale.
pub struct StackAssembly {
    pub config: Config,
    pub order: u32,
    pub height: usize,
    pub window: Box2,
    pub structure: Pattern,
    pub petals: Vec<Petal>,
    pub cells: Vec<CellRecord>,
    pub linear_levels: Vec<LinearLevel>,
    pub system_params: Vec<(u32, SystemParams)>,
    pub sections: Vec<SectionData>,
    pub machines: Vec<MachineInstance>,
    pub system: EffectiveSystemSpec,
}

/// Bits of the simulated sequence read off the even levels of one section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationPrefix {
    pub bits: Vec<u8>,
    /// Index of the cell each bit was read from.
    pub provenance: Vec<usize>,
}

fn first_active_witness_machine() -> MachineSpec {
    // q0 = 0, qe = 1, qs = 2, worker = 3; writes one mark and idles: it
    // never reaches the error state on a well-initialized area.
    MachineSpec::new(4, 4, 0, 1, 2, 0, &[((0, 0), (1, 3, Move::Up)), ((1, 3), (1, 3, Move::Up))])
}

/// Assemble a stack of `height` sections whose window carries one complete
/// cell of the given order (and everything below it), with every layer
/// populated consistently with the local rules.
pub fn assemble_stack(
    sys: EffectiveSystemSpec,
    order: u32,
    height: usize,
    phases: &Phases,
    config: &Config,
) -> Result<StackAssembly, SimError> {
    assert!(order >= 3, "organites need order >= 3 cells");
    assert!(height >= 1);

    // window: the order-`order` cell box plus a margin
    let margin = 8;
    let center = (1i64 << (2 * order + 2)) - 1;
    let half = 1i64 << (2 * order + 1);
    let side = hierarchy::cell_side(order) + 2 * margin;
    let window = Box2::square(center - half - margin, center - half - margin, side);
    let structure = tile_plane(order, window, config.max_window_side)?;

    let petals = extract_petals(&structure)?;
    let cells_raw = detect_cells(&structure)?;
    let (cells, _) = modularity_marks(&cells_raw, None);
    if !cells.iter().any(|c| c.order == order) {
        return Err(SimError::NoCompleteCell(order));
    }

    // levels present as lines in the window
    let max_level = (window.x0..=window.x1())
        .chain(window.y0..=window.y1())
        .map(line_level)
        .max()
        .unwrap_or(0);
    let max_cell_order = if max_level >= 1 { (max_level - 1) / 2 } else { 0 };

    // orbit prefixes checked against the oracles
    let need = max_cell_order as usize / 2 + 1;
    let mut orbit: Vec<Vec<u8>> = Vec::with_capacity(height);
    for c in 0..height as u64 {
        let p = (sys.orbit_prefix)(c, need);
        if !(sys.membership)(&p) {
            return Err(SimError::OracleRejection(need));
        }
        if let Some(prev) = orbit.last() {
            if !(sys.graph)(prev, &p) {
                return Err(SimError::OracleRejection(need));
            }
        }
        orbit.push(p);
    }

    // system counters for odd orders >= 3
    let mut system_params = Vec::new();
    let mut base_states = Vec::new();
    for n in (3..=max_cell_order).filter(|n| n % 2 == 1) {
        let params = config.system_params(n);
        let mut st = SystemCounterState::zero(&params);
        let offset = phases.draw(n as u64, 1 << 12);
        for _ in 0..offset {
            st = system_step(&st, &params);
        }
        system_params.push((n, params));
        base_states.push((n, st));
    }

    // per-section bits and counter states
    let mut sections = Vec::with_capacity(height);
    let mut cursor = base_states.clone();
    for c in 0..height {
        let mut level_bits = vec![None; max_cell_order as usize + 1];
        for n in 0..=max_cell_order {
            let bit = if n % 2 == 0 {
                orbit[c][n as usize / 2]
            } else if let Some((_, st)) = cursor.iter().find(|(o, _)| *o == n) {
                st.designated_symbol() as u8
            } else {
                // odd level too small to carry a counter: a free full-shift bit
                phases.draw((n as u64) << 32 | c as u64, sys.alphabet.max(2) as u64) as u8
            };
            level_bits[n as usize] = Some(bit);
        }
        let mut channels = Vec::new();
        for (idx, cell) in cells.iter().enumerate() {
            if cell.order < 3 || cell.order % 2 == 0 {
                continue;
            }
            let mark = cell.modularity.expect("marks assigned");
            let (col, row) = channel_organites(mark).expect("odd cells have channels");
            channels.push(ChannelRecord {
                cell: idx,
                col_organite: col,
                row_organite: row,
                bit: level_bits[cell.order as usize].unwrap(),
            });
        }
        sections.push(SectionData {
            level_bits,
            system_states: cursor.clone(),
            channels,
        });
        for (n, st) in cursor.iter_mut() {
            let params = system_params.iter().find(|(o, _)| o == n).unwrap().1;
            *st = system_step(st, &params);
        }
    }

    // linear counters: advance one step per cell eastwards, equal northwards
    let mut linear_levels = Vec::new();
    for n in 3..=order {
        let params = config.linear_params(n);
        let mut base = LinearCounterState::zero(&params);
        for _ in 0..phases.draw(0x10 + n as u64, 1 << 12) {
            base = linear_step(&base, &params);
        }
        let of_order: Vec<usize> = (0..cells.len()).filter(|i| cells[*i].order == n).collect();
        let min_x = of_order.iter().map(|i| cells[*i].bounds.x0).min().unwrap();
        let mut values = Vec::new();
        for i in of_order {
            let col = ((cells[i].bounds.x0 - min_x) / cell_period(n)) as u64;
            let mut st = base.clone();
            for _ in 0..col {
                st = linear_step(&st, &params);
            }
            values.push((i, st));
        }
        linear_levels.push(LinearLevel { order: n, params, values });
    }

    // machines on every order >= 3 cell, gated by the cell's linear value
    let l = config.linear_component_exponent;
    let witness = first_active_witness_machine();
    let mut machines = Vec::new();
    for level in &linear_levels {
        for (idx, value) in &level.values {
            let cell = &cells[*idx];
            let (grid_x, grid_y) = machine_grid(cell, &cells);
            assert!(
                !grid_x.is_empty() && !grid_y.is_empty(),
                "machine organite of an order >= 3 cell cannot be empty"
            );
            let digits = &value.digits;
            let dig = |i: usize| digits[i % digits.len()];
            let active_cols: Vec<bool> =
                (0..grid_x.len()).map(|i| decode_linear_digit(dig(i), l).on_col).collect();
            let active_rows: Vec<bool> =
                (0..grid_y.len()).map(|i| decode_linear_digit(dig(i), l).on_row).collect();
            let arrows: Vec<ErrDir> = (0..grid_x.len())
                .map(|i| {
                    if decode_linear_digit(dig(i), l).arrow_left {
                        ErrDir::Left
                    } else {
                        ErrDir::Right
                    }
                })
                .collect();
            let n_active = active_cols.iter().filter(|b| **b).count();
            let mut bottom = vec![(witness.blank, witness.qs); n_active];
            if n_active > 0 {
                bottom[0] = (witness.blank, witness.q0);
            }
            let area = ComputationArea {
                width: grid_x.len(),
                height: grid_y.len(),
                active_cols,
                active_rows,
                bottom,
                west: vec![witness.qs; grid_y.len()],
                east: vec![witness.qs; grid_y.len()],
                arrows,
            };
            let diagram = run_area(&witness, &area)?;
            let report = compute_signals(&witness, &diagram, &area);
            debug_assert!(report.admissible, "witness machine must assemble admissibly");
            machines.push(MachineInstance {
                cell: *idx,
                spec: witness.clone(),
                area,
                diagram,
                report,
                grid_x,
                grid_y,
            });
        }
    }

    Ok(StackAssembly {
        config: config.clone(),
        order,
        height,
        window,
        structure,
        petals,
        cells,
        linear_levels,
        system_params,
        sections,
        machines,
        system: sys,
    })
}

/// The computation grid of the machine organite of a cell: the regular
/// corner subgrid of the (6, 5) sub-unit. Which of its columns and rows a
/// run actually uses is decided by the on/off gating from the cell's linear
/// counter, not by the cytoplasm geometry (the free-column machinery
/// localizes transports outside machine areas).
pub fn machine_grid(cell: &CellRecord, cells: &[CellRecord]) -> (Vec<Coord>, Vec<Coord>) {
    let _ = cells;
    let organite = cell.organite_box(6, 5);
    let grid_x: Vec<Coord> = (organite.x0..=organite.x1()).filter(|x| x % 2 == 0).collect();
    let grid_y: Vec<Coord> = (organite.y0..=organite.y1()).filter(|y| y % 2 == 0).collect();
    (grid_x, grid_y)
}

// ---------------------------------------------------------------------------
// the simulation map and the commuting square

impl StackAssembly {
    /// Index of the first complete cell of the given order.
    fn cell_of_order(&self, order: u32) -> Option<usize> {
        (0..self.cells.len()).find(|i| self.cells[*i].order == order)
    }

    pub fn linear_value(&self, cell_idx: usize) -> Option<&LinearCounterState> {
        self.linear_levels
            .iter()
            .flat_map(|l| l.values.iter())
            .find(|(i, _)| *i == cell_idx)
            .map(|(_, v)| v)
    }

    /// Flip the simulated bit of an even level in one section (test hook).
    pub fn mutate_even_bit(&mut self, order: u32, section: usize) {
        assert!(order % 2 == 0);
        let slot = &mut self.sections[section].level_bits[order as usize];
        *slot = Some(slot.unwrap() ^ 1);
    }

    /// Flip the modularity mark of a cell (test hook).
    pub fn mutate_modularity(&mut self, cell_idx: usize) {
        let m = self.cells[cell_idx].modularity.unwrap();
        self.cells[cell_idx].modularity = Some(m ^ 2);
    }
}

/// Read the simulated sequence off the complete even levels of a section.
pub fn phi(st: &StackAssembly, section: usize) -> Result<SimulationPrefix, SimError> {
    assert!(section < st.height);
    let mut bits = Vec::new();
    let mut provenance = Vec::new();
    let data = &st.sections[section];
    for n in (0..).map(|k| 2 * k) {
        let Some(idx) = st.cell_of_order(n) else { break };
        let Some(bit) = data.level_bits.get(n as usize).copied().flatten() else { break };
        bits.push(bit);
        provenance.push(idx);
    }
    Ok(SimulationPrefix { bits, provenance })
}

/// The commuting square: for every consecutive pair of sections, the bits of
/// the upper one extend the image of the lower one under the simulated map,
/// as certified by the graph oracle.
pub fn check_commuting(st: &StackAssembly) -> Result<bool, SimError> {
    for c in 0..st.height.saturating_sub(1) {
        let x = phi(st, c)?;
        let y = phi(st, c + 1)?;
        if !(st.system.graph)(&x.bits, &y.bits) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// whole-stack validation

/// Run every layer validator over the assembly and concatenate violations.
pub fn validate_stack(st: &StackAssembly) -> Vec<RuleViolation> {
    let mut out = Vec::new();

    // structure layer
    match check_robinson_rules(&st.structure) {
        Ok(mut v) => out.append(&mut v),
        Err(e) => out.push(RuleViolation {
            rule: "missing-layer",
            positions: vec![],
            detail: e.to_string(),
        }),
    }

    // hierarchy: extraction agrees with the recorded cells, size laws hold
    let extracted = detect_cells(&st.structure).unwrap_or_default();
    if extracted.len() != st.cells.len()
        || extracted
            .iter()
            .zip(&st.cells)
            .any(|(a, b)| a.bounds != b.bounds || a.order != b.order)
    {
        out.push(RuleViolation {
            rule: "cell-extraction",
            positions: vec![],
            detail: "recorded cells disagree with extraction".to_string(),
        });
    }
    for c in &st.cells {
        if c.side() != hierarchy::cell_side(c.order) {
            out.push(RuleViolation::at(
                "cell-size",
                Pos2::new(c.bounds.x0, c.bounds.y0),
                format!("order {} cell has side {}", c.order, c.side()),
            ));
        }
        let mark = c.modularity.unwrap_or(255);
        if mark != (c.order % 4) as u8 {
            out.push(RuleViolation::at(
                "modularity-value",
                Pos2::new(c.bounds.x0, c.bounds.y0),
                format!("order {} cell marked {mark}", c.order),
            ));
        }
    }

    // linear counters: advance east, synchronized north, freeze coherent
    for level in &st.linear_levels {
        let params = &level.params;
        for (idx, v) in &level.values {
            let c = &st.cells[*idx];
            if v.frozen && !v.is_max(params) {
                out.push(RuleViolation::at(
                    "linear-freeze",
                    Pos2::new(c.bounds.x0, c.bounds.y0),
                    "frozen counter below its maximal value".to_string(),
                ));
            }
            for (jdx, w) in &level.values {
                let d = &st.cells[*jdx];
                if d.bounds.x0 == c.bounds.x0 + cell_period(level.order) && d.bounds.y0 == c.bounds.y0
                {
                    let want = linear_step(v, params);
                    if *w != want {
                        out.push(RuleViolation::at(
                            "linear-advance",
                            Pos2::new(d.bounds.x0, d.bounds.y0),
                            "counter does not advance by one step eastwards".to_string(),
                        ));
                    }
                }
                if d.bounds.y0 == c.bounds.y0 + cell_period(level.order) && d.bounds.x0 == c.bounds.x0
                {
                    if w != v {
                        out.push(RuleViolation::at(
                            "linear-sync",
                            Pos2::new(d.bounds.x0, d.bounds.y0),
                            "counter not synchronized northwards".to_string(),
                        ));
                    }
                }
            }
        }
    }

    // system counters: stepping along the stack, freezing, bit emission
    for (n, params) in &st.system_params {
        for c in 0..st.height {
            let Some((_, state)) = st.sections[c].system_states.iter().find(|(o, _)| o == n)
            else {
                out.push(RuleViolation {
                    rule: "system-missing",
                    positions: vec![(0, 0, c as Coord)],
                    detail: format!("no system counter state for level {n}"),
                });
                continue;
            };
            if state.frozen && !(state.index_max(params) && state.torus_max(params)) {
                out.push(RuleViolation {
                    rule: "system-freeze",
                    positions: vec![(0, 0, c as Coord)],
                    detail: "frozen system counter below its maximal value".to_string(),
                });
            }
            let bit = st.sections[c].level_bits[*n as usize];
            if bit != Some(state.designated_symbol() as u8) {
                out.push(RuleViolation {
                    rule: "bit-synchronization",
                    positions: vec![(0, 0, c as Coord)],
                    detail: format!("level {n} bit disagrees with the counter"),
                });
            }
            if c + 1 < st.height {
                let next = st.sections[c + 1].system_states.iter().find(|(o, _)| o == n);
                if next.map(|(_, s)| s) != Some(&system_step(state, params)) {
                    out.push(RuleViolation {
                        rule: "system-advance",
                        positions: vec![(0, 0, (c + 1) as Coord)],
                        detail: format!("level {n} counter does not step along the stack"),
                    });
                }
            }
        }
    }

    // random channels: placement follows the mark, value equals the bit
    for (c, section) in st.sections.iter().enumerate() {
        for ch in &section.channels {
            let cell = &st.cells[ch.cell];
            let mark = cell.modularity.unwrap_or(255);
            match channel_organites(mark) {
                Some((col, row)) => {
                    if (ch.col_organite, ch.row_organite) != (col, row) {
                        out.push(RuleViolation {
                            rule: "channel-localization",
                            positions: vec![(cell.bounds.x0, cell.bounds.y0, c as Coord)],
                            detail: format!(
                                "channel through ({}, {}) but the mark {mark} demands ({col}, {row})",
                                ch.col_organite, ch.row_organite
                            ),
                        });
                    }
                }
                None => out.push(RuleViolation {
                    rule: "channel-localization",
                    positions: vec![(cell.bounds.x0, cell.bounds.y0, c as Coord)],
                    detail: format!("channel on a cell with even mark {mark}"),
                }),
            }
            let bit = section.level_bits.get(cell.order as usize).copied().flatten();
            if bit != Some(ch.bit) {
                out.push(RuleViolation {
                    rule: "channel-value",
                    positions: vec![(cell.bounds.x0, cell.bounds.y0, c as Coord)],
                    detail: "channel bit disagrees with the level bit".to_string(),
                });
            }
        }
        // every odd order >= 3 cell must carry its channel
        for (idx, cell) in st.cells.iter().enumerate() {
            if cell.order >= 3 && cell.order % 2 == 1 {
                if !section.channels.iter().any(|ch| ch.cell == idx) {
                    out.push(RuleViolation {
                        rule: "channel-localization",
                        positions: vec![(cell.bounds.x0, cell.bounds.y0, c as Coord)],
                        detail: "odd cell without its random channel".to_string(),
                    });
                }
            }
        }
    }

    // machines: one per order >= 3 cell, deterministic re-simulation,
    // signals and admissibility
    for (idx, cell) in st.cells.iter().enumerate() {
        if cell.order >= 3 && !st.machines.iter().any(|m| m.cell == idx) {
            out.push(RuleViolation::at(
                "machine-missing",
                Pos2::new(cell.bounds.x0, cell.bounds.y0),
                format!("order {} cell has no machine area", cell.order),
            ));
        }
    }
    let l = st.config.linear_component_exponent;
    for m in &st.machines {
        let cell = &st.cells[m.cell];
        let anchor = (cell.bounds.x0, cell.bounds.y0, 0);
        match run_area(&m.spec, &m.area) {
            Ok(d) => {
                if d != m.diagram {
                    out.push(RuleViolation {
                        rule: "machine-diagram",
                        positions: vec![anchor],
                        detail: "stored diagram disagrees with re-simulation".to_string(),
                    });
                }
                let r = compute_signals(&m.spec, &d, &m.area);
                if r != m.report {
                    out.push(RuleViolation {
                        rule: "machine-signals",
                        positions: vec![anchor],
                        detail: "stored signal report disagrees".to_string(),
                    });
                }
                if !r.admissible {
                    out.push(RuleViolation {
                        rule: "machine-admissibility",
                        positions: vec![anchor],
                        detail: "error signal meets four green verdicts".to_string(),
                    });
                }
            }
            Err(e) => out.push(RuleViolation {
                rule: "machine-diagram",
                positions: vec![anchor],
                detail: e.to_string(),
            }),
        }
        if let Some(v) = st.linear_value(m.cell) {
            let dig = |i: usize| v.digits[i % v.digits.len()];
            let col_digits: Vec<u64> = (0..m.area.width).map(dig).collect();
            let row_digits: Vec<u64> = (0..m.area.height).map(dig).collect();
            match crate::machine::active_gating_consistency(&m.area, &col_digits, &row_digits, l) {
                Ok(true) => {}
                _ => out.push(RuleViolation {
                    rule: "machine-gating",
                    positions: vec![anchor],
                    detail: "area gating disagrees with the linear counter flags".to_string(),
                }),
            }
        }
    }

    sort_violations(&mut out);
    out
}

// ---------------------------------------------------------------------------
// materialization

fn level_bit_of_line(st: &StackAssembly, section: usize, t: Coord) -> Option<u8> {
    let level = line_level(t);
    if level % 2 == 0 {
        return None;
    }
    let order = (level - 1) / 2;
    st.sections[section].level_bits.get(order as usize).copied().flatten()
}

/// Render one section of the assembly as a full multi-layer pattern.
pub fn materialize_section(st: &StackAssembly, section: usize) -> Pattern {
    let b = st.window;
    let mut p = Pattern::new_2d(b, &SECTION_LAYERS);

    let rob = p.layer_index(LAYER_ROBINSON).unwrap();
    p.layers[rob].codes.copy_from_slice(&st.structure.layers[0].codes);

    paint_subdivision_layer(&mut p, &st.cells);
    paint_modularity_layer(&mut p, &st.cells);

    // system bits: first coordinate per row, second per column
    let bits = p.layer_index(LAYER_SYSTEM_BITS).unwrap();
    let col_codes: Vec<u32> = (b.x0..=b.x1())
        .map(|x| level_bit_of_line(st, section, x).map_or(0, |v| v as u32 + 1))
        .collect();
    for y in b.y0..=b.y1() {
        let h = level_bit_of_line(st, section, y).map_or(0, |v| v as u32 + 1);
        for x in b.x0..=b.x1() {
            let v = col_codes[(x - b.x0) as usize];
            p.set(bits, Pos2::new(x, y), (h << 8) | v);
        }
    }

    // functional areas per cell cytoplasm
    let fun = p.layer_index(LAYER_FUNCTIONAL).unwrap();
    for c in &st.cells {
        if let Ok(map) = assign_functional_areas_geometric(c, &st.structure, &st.cells) {
            for ((x, y), f) in map {
                let code = match f {
                    Function::Computation => 1,
                    Function::TransferH => 2,
                    Function::TransferV => 3,
                    Function::NoFunction => 4,
                };
                p.set(fun, Pos2::new(x, y), code);
            }
        }
    }

    // random channels
    let chl = p.layer_index(LAYER_CHANNELS).unwrap();
    for ch in &st.sections[section].channels {
        let cell = &st.cells[ch.cell];
        for pos in channel_positions(cell, ch.col_organite, ch.row_organite, &st.cells) {
            p.set(chl, pos, ch.bit as u32 + 1);
        }
    }

    // linear counter values at the incrementation organite
    let lin = p.layer_index(LAYER_LINEAR_COUNTER).unwrap();
    for level in &st.linear_levels {
        for (idx, v) in &level.values {
            let cell = &st.cells[*idx];
            let col = counter_column(cell, &st.cells);
            debug_assert!(col.len() >= v.digits.len(), "counter word does not fit the organite");
            for (d, pos) in v.digits.iter().zip(&col) {
                p.set(lin, *pos, *d as u32 + 2);
            }
            if v.frozen {
                if let Some(pos) = col.first() {
                    p.set(lin, Pos2::new(pos.x - 2, pos.y), 1);
                }
            }
        }
    }

    // system counter line
    let sys = p.layer_index(LAYER_SYSTEM_COUNTER).unwrap();
    for (idx, cell) in st.cells.iter().enumerate() {
        if cell.order < 3 || cell.order % 2 == 0 {
            continue;
        }
        let Some((_, state)) = st.sections[section]
            .system_states
            .iter()
            .find(|(o, _)| *o == cell.order)
        else {
            continue;
        };
        let _ = idx;
        let mark = cell.modularity.unwrap();
        let Some((oi, oj)) = system_counter_organite(mark) else { continue };
        let row = counter_row(cell, oi, oj, &st.cells, state.index.len());
        let params = st.system_params.iter().find(|(o, _)| *o == cell.order).unwrap().1;
        let detection = state.detection(&params);
        for (k, pos) in row.iter().enumerate() {
            let green =
                |d: &[crate::counters::Detect]| (d[k] == crate::counters::Detect::Green) as u32;
            let code = 1
                + ((state.index[k] as u32) << 2)
                + ((state.bottom[k] as u32) << 8)
                + ((state.top[k] as u32) << 10)
                + ((state.frozen as u32) << 12)
                + (green(&detection[0]) << 13)
                + (green(&detection[1]) << 14)
                + (green(&detection[2]) << 15);
            p.set(sys, *pos, code);
        }
    }

    // machine diagrams
    let mac = p.layer_index(LAYER_MACHINE).unwrap();
    for m in &st.machines {
        for (yi, y) in m.grid_y.iter().enumerate() {
            for (xi, x) in m.grid_x.iter().enumerate() {
                let code = match m.diagram.get(xi, yi) {
                    Content::Letter(a) => 0x100 + a as u32,
                    Content::LetterHead(a, q) => 0x200 + ((a as u32) << 8) + q as u32,
                    Content::Pass(q1, q2) => 0x300 + ((q1 as u32) << 8) + q2 as u32,
                };
                p.set(mac, Pos2::new(*x, *y), code);
            }
        }
    }

    p
}

/// Positions of a cell's random channel: the west column of the organite
/// column band and the south row of the organite row band, skipping child
/// cells.
pub fn channel_positions(
    cell: &CellRecord,
    col_organite: u8,
    row_organite: u8,
    cells: &[CellRecord],
) -> Vec<Pos2> {
    let obstacles = hierarchy::Obstacles::inside(cell, cells);
    let col_x = cell.organite_box(col_organite, 0).x0;
    let row_y = cell.organite_box(0, row_organite).y0;
    let mut v = Vec::new();
    for y in cell.bounds.y0..=cell.bounds.y1() {
        let pos = Pos2::new(col_x, y);
        if !obstacles.occupied(pos) {
            v.push(pos);
        }
    }
    for x in cell.bounds.x0..=cell.bounds.x1() {
        let pos = Pos2::new(x, row_y);
        if pos.x != col_x && !obstacles.occupied(pos) {
            v.push(pos);
        }
    }
    v
}

/// The westmost corner-subgrid column of the linear-increment organite that
/// stays in the cell's cytoplasm, top down (the carry enters at the top).
fn counter_column(cell: &CellRecord, cells: &[CellRecord]) -> Vec<Pos2> {
    let organite = cell.organite_box(2, 3);
    let obstacles = hierarchy::Obstacles::inside(cell, cells);
    for x in (organite.x0..=organite.x1()).filter(|x| x % 2 == 0) {
        let col: Vec<Pos2> = (organite.y0..=organite.y1())
            .rev()
            .filter(|y| y % 2 == 0 && !obstacles.occupied(Pos2::new(x, *y)))
            .map(|y| Pos2::new(x, y))
            .collect();
        if !col.is_empty() {
            return col;
        }
    }
    Vec::new()
}

/// The bottom corner-subgrid row of the system-counter organite, west to
/// east.
fn counter_row(
    cell: &CellRecord,
    oi: u8,
    oj: u8,
    cells: &[CellRecord],
    len: usize,
) -> Vec<Pos2> {
    let _ = cells;
    let organite = cell.organite_box(oi, oj);
    let Some(y) = (organite.y0..=organite.y1()).find(|y| y % 2 == 0) else {
        return Vec::new();
    };
    (organite.x0..=organite.x1())
        .filter(|x| x % 2 == 0)
        .map(|x| Pos2::new(x, y))
        .take(len)
        .collect()
}

/// Stack every materialized section into one three-dimensional pattern.
pub fn materialize_stack(st: &StackAssembly) -> Pattern {
    let support = Support { base: st.window, z0: 0, depth: st.height as Coord };
    let mut p = Pattern::new_3d(support, &SECTION_LAYERS);
    for c in 0..st.height {
        let section = materialize_section(st, c);
        for (li, layer) in section.layers.iter().enumerate() {
            let per = st.window.area() as usize;
            let dst = &mut p.layers[li].codes[c * per..(c + 1) * per];
            dst.copy_from_slice(&layer.codes);
        }
    }
    p
}

// ---------------------------------------------------------------------------
// standalone pattern validation

/// Validate the layers present in a materialized pattern: the structure
/// rules plus the system-bit, modularity and subdivision layer rules. A
/// stacked pattern is validated section by section, with the structure
/// layers required to be identified along the stacking direction.
pub fn validate_pattern(p: &Pattern) -> Result<Vec<RuleViolation>, SimError> {
    if p.support.is_3d() {
        let mut out = Vec::new();
        let z0 = p.support.z0;
        let mut prev: Option<Pattern> = None;
        for z in z0..z0 + p.support.depth {
            let section = p.section(z);
            for mut v in validate_pattern(&section)? {
                for pos in v.positions.iter_mut() {
                    pos.2 = z;
                }
                out.push(v);
            }
            if let Some(prev) = &prev {
                for name in [LAYER_ROBINSON, LAYER_SUBDIVISION, LAYER_MODULARITY, LAYER_FUNCTIONAL]
                {
                    let (Some(a), Some(b)) = (prev.layer_index(name), section.layer_index(name))
                    else {
                        continue;
                    };
                    if prev.layers[a].codes != section.layers[b].codes {
                        out.push(RuleViolation {
                            rule: "structure-identification",
                            positions: vec![(0, 0, z)],
                            detail: format!("layer {name} changes along the stack"),
                        });
                    }
                }
            }
            prev = Some(section);
        }
        sort_violations(&mut out);
        return Ok(out);
    }
    let mut out = check_robinson_rules(p)?;
    let b = p.support.base;

    if let Some(bits) = p.layer_index(LAYER_SYSTEM_BITS) {
        let rob = p.layer_index(LAYER_ROBINSON).ok_or(RobinsonError::MissingLayer(LAYER_ROBINSON))?;
        for pos in b.iter() {
            let code = p.get(bits, pos);
            let (h, v) = (code >> 8, code & 0xff);
            let east = Pos2::new(pos.x + 1, pos.y);
            if b.contains(east) && p.get(bits, east) >> 8 != h {
                out.push(RuleViolation {
                    rule: "system-bit-transmission",
                    positions: vec![(pos.x, pos.y, 0), (east.x, east.y, 0)],
                    detail: "first coordinate changes along the row".to_string(),
                });
            }
            let north = Pos2::new(pos.x, pos.y + 1);
            if b.contains(north) && p.get(bits, north) & 0xff != v {
                out.push(RuleViolation {
                    rule: "system-bit-transmission",
                    positions: vec![(pos.x, pos.y, 0), (north.x, north.y, 0)],
                    detail: "second coordinate changes along the column".to_string(),
                });
            }
            if let Some(t) = decode_tile(p.get(rob, pos)) {
                if let TileKind::Corner { bit, .. } = t.kind {
                    if h != v {
                        out.push(RuleViolation::at(
                            "system-bit-sync",
                            pos,
                            "the two coordinates differ on a corner".to_string(),
                        ));
                    }
                    if (bit == 1) != (h != 0) {
                        out.push(RuleViolation::at(
                            "system-bit-localization",
                            pos,
                            format!("corner valued {bit} carries bit code {h}"),
                        ));
                    }
                }
            }
        }
    }

    let need_cells = [LAYER_MODULARITY, LAYER_SUBDIVISION, LAYER_FUNCTIONAL]
        .iter()
        .any(|n| p.layer_index(n).is_some());
    if need_cells {
        let cells = detect_cells(p)?;
        if p.layer_index(LAYER_MODULARITY).is_some() {
            let (_, mut v) = modularity_marks(&cells, Some(p));
            out.append(&mut v);
        }
        if p.layer_index(LAYER_SUBDIVISION).is_some() {
            for c in cells.iter().filter(|c| c.order >= 3) {
                hierarchy::validate_subdivision_for_cell(c, p, &cells, &mut out)?;
            }
        }
        if let Some(fun) = p.layer_index(LAYER_FUNCTIONAL) {
            for c in &cells {
                let map = assign_functional_areas_geometric(c, p, &cells)?;
                for ((x, y), f) in map {
                    let want = match f {
                        Function::Computation => 1,
                        Function::TransferH => 2,
                        Function::TransferV => 3,
                        Function::NoFunction => 4,
                    };
                    let code = p.get(fun, Pos2::new(x, y));
                    if code != want {
                        out.push(RuleViolation::at(
                            "functional-area",
                            Pos2::new(x, y),
                            format!("function code {code}, geometry demands {want}"),
                        ));
                    }
                }
            }
        }
    }

    sort_violations(&mut out);
    Ok(out)
}
