//! The two counter mechanisms: the linear counter (a freezing adding
//! machine whose digits encode machine behaviors) and the system counter
//! (an index word driving a rotating torus word), plus the Fermat-number
//! arithmetic and orbit checks used by the minimality machinery.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CounterError {
    #[error("state space {0} exceeds the desk-scale cap {1}")]
    Overflow(u128, u128),
    #[error("product of moduli {0} exceeds the cap {1}")]
    ProductTooLarge(u128, u64),
    #[error("fermat index {0} does not fit in 64 bits")]
    FermatTooLarge(u32),
}

/// Digit-alphabet parameters: the alphabet has `2^(2^k)` digits (a double
/// power of two), the successor is the cyclic increment and the maximal
/// digit is the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterParams {
    pub k: u32,
    pub w: usize,
}

impl CounterParams {
    pub fn new(k: u32, w: usize) -> Self {
        assert!(k <= 5, "digit alphabet beyond desk scale");
        assert!(w >= 1);
        CounterParams { k, w }
    }

    /// Number of digits, `D = 2^(2^k)`.
    pub fn digit_count(&self) -> u64 {
        1u64 << (1u32 << self.k)
    }

    pub fn max_digit(&self) -> u64 {
        self.digit_count() - 1
    }

    /// The cyclic successor permutation of the digit alphabet.
    pub fn successor(&self, d: u64) -> u64 {
        debug_assert!(d < self.digit_count());
        (d + 1) & self.max_digit()
    }

    /// Total number of digit words; saturates beyond desk scale.
    pub fn state_space(&self) -> u128 {
        (self.digit_count() as u128).saturating_pow(self.w as u32)
    }
}

/// Linear counter value: a least-significant-first digit word plus the
/// freezing flag. The frozen flag is set exactly on the all-maximal word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearCounterState {
    pub digits: Vec<u64>,
    pub frozen: bool,
}

impl LinearCounterState {
    pub fn zero(params: &CounterParams) -> Self {
        LinearCounterState { digits: vec![0; params.w], frozen: false }
    }

    pub fn is_max(&self, params: &CounterParams) -> bool {
        self.digits.iter().all(|d| *d == params.max_digit())
    }
}

/// One step of the linear counter: a frozen state thaws unchanged, any other
/// state is incremented by the adding machine from the least-significant
/// digit; reaching the all-maximal word freezes the counter for one step.
pub fn linear_step(st: &LinearCounterState, params: &CounterParams) -> LinearCounterState {
    if st.frozen {
        return LinearCounterState { digits: st.digits.clone(), frozen: false };
    }
    let mut digits = st.digits.clone();
    let mut carry = true;
    for d in digits.iter_mut() {
        if !carry {
            break;
        }
        carry = *d == params.max_digit();
        *d = params.successor(*d);
    }
    let frozen = digits.iter().all(|d| *d == params.max_digit());
    LinearCounterState { digits, frozen }
}

/// Cycle length of the linear counter: `D^w + 1`, cross-checked against a
/// brute-force iteration from the zero state.
pub fn linear_period(params: &CounterParams) -> Result<u64, CounterError> {
    let space = params.state_space();
    if space > 1u128 << 32 {
        return Err(CounterError::Overflow(space, 1u128 << 32));
    }
    let formula = space as u64 + 1;
    let start = LinearCounterState::zero(params);
    let mut st = start.clone();
    let mut steps = 0u64;
    loop {
        st = linear_step(&st, params);
        steps += 1;
        if st == start {
            break;
        }
        assert!(steps <= formula, "cycle longer than the closed form");
    }
    assert_eq!(steps, formula, "brute-forced cycle disagrees with D^w + 1");
    Ok(formula)
}

/// Decoded components of one linear-counter digit, for the alphabet
/// `A' x Q^3 x {->,<-} x D x {on,off}^2` with `|A'| = |Q| = 2^(2^l)`.
///
/// The digit index is a bijective bit packing, least significant first:
/// column flag, row flag, error-arrow direction, letter, three states,
/// padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedLinearDigit {
    pub letter: u64,
    pub states: [u64; 3],
    pub arrow_left: bool,
    pub padding: u64,
    pub on_col: bool,
    pub on_row: bool,
}

/// Digit-exponent k that a component exponent `l` induces: digits carry
/// `2^(l+3)` bits.
pub fn digit_exponent_for(l: u32) -> u32 {
    l + 3
}

pub fn decode_linear_digit(digit: u64, l: u32) -> DecodedLinearDigit {
    let r = 1u32 << l; // bits per letter / state
    let mut v = digit;
    let mut take = |bits: u32| {
        let f = v & ((1u64 << bits) - 1);
        v >>= bits;
        f
    };
    let on_col = take(1) == 1;
    let on_row = take(1) == 1;
    let arrow_left = take(1) == 1;
    let letter = take(r);
    let states = [take(r), take(r), take(r)];
    let padding = take(4 * r - 3);
    DecodedLinearDigit { letter, states, arrow_left, padding, on_col, on_row }
}

pub fn encode_linear_digit(d: &DecodedLinearDigit, l: u32) -> u64 {
    let r = 1u32 << l;
    let mut v = 0u64;
    let mut shift = 0u32;
    let put = |f: u64, bits: u32, v: &mut u64, shift: &mut u32| {
        debug_assert!(bits == 64 || f < (1u64 << bits));
        *v |= f << *shift;
        *shift += bits;
    };
    put(d.on_col as u64, 1, &mut v, &mut shift);
    put(d.on_row as u64, 1, &mut v, &mut shift);
    put(d.arrow_left as u64, 1, &mut v, &mut shift);
    put(d.letter, r, &mut v, &mut shift);
    for q in d.states {
        put(q, r, &mut v, &mut shift);
    }
    put(d.padding, 4 * r - 3, &mut v, &mut shift);
    v
}

// ---------------------------------------------------------------------------
// system counter

/// Parameters of the system counter: the rotating alphabet has `2^(2^m)`
/// symbols, the torus halves and the index word have `w` positions each
/// (index digits range over pairs of symbols).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemParams {
    pub m: u32,
    pub w: usize,
}

impl SystemParams {
    pub fn new(m: u32, w: usize) -> Self {
        assert!(m <= 3, "rotating alphabet beyond desk scale");
        assert!(w >= 1 && w.is_power_of_two(), "torus length must divide the index cycle");
        SystemParams { m, w }
    }

    /// Symbols of the rotating alphabet.
    pub fn symbol_count(&self) -> u64 {
        1u64 << (1u32 << self.m)
    }

    pub fn max_symbol(&self) -> u64 {
        self.symbol_count() - 1
    }

    /// Index digits range over ordered pairs of symbols.
    pub fn index_digit_count(&self) -> u64 {
        self.symbol_count() * self.symbol_count()
    }

    /// Closed-form period: `2^(4 * 2^m * w) + 1`.
    pub fn period(&self) -> u128 {
        let exponent = 4 * (1u32 << self.m) as usize * self.w;
        assert!(exponent < 128, "period beyond desk scale");
        (1u128 << exponent) + 1
    }
}

/// Detection coloring of one word position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detect {
    Green,
    Salmon,
}

/// System counter value: the incrementing index word, the rotating torus
/// (two halves read along the rotation cycle) and the freezing flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemCounterState {
    /// Least-significant-first digits over symbol pairs.
    pub index: Vec<u64>,
    /// Bottom half of the torus, west to east.
    pub bottom: Vec<u64>,
    /// Top half of the torus, west to east.
    pub top: Vec<u64>,
    pub frozen: bool,
}

impl SystemCounterState {
    pub fn zero(params: &SystemParams) -> Self {
        SystemCounterState {
            index: vec![0; params.w],
            bottom: vec![0; params.w],
            top: vec![0; params.w],
            frozen: false,
        }
    }

    pub fn index_max(&self, params: &SystemParams) -> bool {
        self.index.iter().all(|d| *d == params.index_digit_count() - 1)
    }

    pub fn torus_max(&self, params: &SystemParams) -> bool {
        self.bottom.iter().chain(self.top.iter()).all(|d| *d == params.max_symbol())
    }

    /// The simulating bit: the symbol at the designated torus position.
    pub fn designated_symbol(&self) -> u64 {
        self.bottom[0]
    }

    /// The torus read along the rotation cycle: bottom west-to-east, then
    /// top east-to-west.
    fn cycle(&self) -> Vec<u64> {
        let mut v = self.bottom.clone();
        v.extend(self.top.iter().rev());
        v
    }

    fn set_cycle(&mut self, v: &[u64]) {
        let w = self.bottom.len();
        self.bottom.copy_from_slice(&v[..w]);
        for (i, t) in self.top.iter_mut().enumerate() {
            *t = v[2 * w - 1 - i];
        }
    }

    /// Detection colorings of the three words, green on the suffix of
    /// maximal digits seen from each scan origin. The index word and the
    /// torus words are scanned as in the incrementation rules: from the
    /// carry-exit end backwards.
    pub fn detection(&self, params: &SystemParams) -> [Vec<Detect>; 3] {
        let color = |word: &[u64], max: u64| -> Vec<Detect> {
            let mut out = vec![Detect::Salmon; word.len()];
            for (i, d) in word.iter().enumerate().rev() {
                if *d == max {
                    out[i] = Detect::Green;
                } else {
                    break;
                }
            }
            out
        };
        [
            color(&self.index, params.index_digit_count() - 1),
            color(&self.bottom, params.max_symbol()),
            color(&self.top, params.max_symbol()),
        ]
    }
}

fn rotate(st: &mut SystemCounterState) {
    let mut c = st.cycle();
    c.rotate_right(1);
    st.set_cycle(&c);
}

fn advance(st: &mut SystemCounterState, params: &SystemParams) {
    rotate(st);
    // increment the index word
    let imax = params.index_digit_count() - 1;
    let mut carry = true;
    for d in st.index.iter_mut() {
        if !carry {
            break;
        }
        carry = *d == imax;
        *d = (*d + 1) % params.index_digit_count();
    }
    if carry {
        // the index wrapped: increment the torus as one concatenated word
        let mut c = st.cycle();
        let smax = params.max_symbol();
        let mut tc = true;
        for d in c.iter_mut() {
            if !tc {
                break;
            }
            tc = *d == smax;
            *d = (*d + 1) & smax;
        }
        st.set_cycle(&c);
    }
}

/// One step of the system counter along the stacking direction: rotate the
/// torus and increment the index; an index wrap increments the torus; when
/// both values are maximal the mechanisms suspend for one step (the frozen
/// state), and the deferred wrap happens on thawing.
pub fn system_step(st: &SystemCounterState, params: &SystemParams) -> SystemCounterState {
    let mut next = st.clone();
    if st.frozen {
        next.frozen = false;
        advance(&mut next, params);
        return next;
    }
    if st.index_max(params) && st.torus_max(params) {
        next.frozen = true;
        return next;
    }
    advance(&mut next, params);
    next
}

/// The per-step simulating bit emitted at the designated torus position.
pub fn system_bit_trace(st0: &SystemCounterState, steps: usize, params: &SystemParams) -> Vec<u64> {
    let mut out = Vec::with_capacity(steps);
    let mut st = st0.clone();
    for _ in 0..steps {
        out.push(st.designated_symbol());
        st = system_step(&st, params);
    }
    out
}

// ---------------------------------------------------------------------------
// Fermat numbers and orbit minimality

/// `F_i = 2^(2^i) + 1`; fits in 64 bits for `i <= 5`.
pub fn fermat(i: u32) -> Result<u64, CounterError> {
    if i > 5 {
        return Err(CounterError::FermatTooLarge(i));
    }
    Ok((1u64 << (1u32 << i)) + 1)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn fermat_pairwise_coprime(up_to: u32) -> Result<bool, CounterError> {
    for i in 0..=up_to {
        for j in 0..i {
            if gcd(fermat(i)?, fermat(j)?) != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Walk the orbit of the zero tuple under simultaneous addition of the
/// increments; the map is minimal exactly when the orbit covers the whole
/// product. Returns the verdict and the orbit length.
pub fn orbit_is_minimal(
    moduli: &[u64],
    increments: &[u64],
    product_cap: u64,
) -> Result<(bool, u64), CounterError> {
    assert_eq!(moduli.len(), increments.len());
    assert!(!moduli.is_empty());
    let product: u128 = moduli.iter().map(|m| *m as u128).product();
    if product > product_cap as u128 {
        return Err(CounterError::ProductTooLarge(product, product_cap));
    }
    let mut state: Vec<u64> = vec![0; moduli.len()];
    let mut len = 0u64;
    loop {
        for (i, s) in state.iter_mut().enumerate() {
            *s = (*s + increments[i]) % moduli[i];
        }
        len += 1;
        if state.iter().all(|s| *s == 0) {
            break;
        }
        assert!((len as u128) <= product, "orbit longer than the product");
    }
    Ok((len as u128 == product, len))
}
