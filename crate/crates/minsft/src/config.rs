//! Runtime caps and per-level counter parameters, with documented defaults.

use crate::counters::{CounterParams, SystemParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Largest supertile order the generators accept (an order-10 supertile
    /// has side 2047).
    pub max_supertile_order: u32,
    /// Largest window side for plane tilings.
    pub max_window_side: i64,
    /// Cap on the product of moduli for exhaustive orbit walks.
    pub orbit_product_cap: u64,
    /// Step budget granted to effective-system oracles.
    pub oracle_step_budget: u64,
    /// Component exponent of the linear-counter digit alphabet
    /// (`|A'| = |Q| = 2^(2^l)`, digits carry `2^(l+3)` bits).
    pub linear_component_exponent: u32,
    /// Rotating-alphabet exponent of the system counter.
    pub system_symbol_exponent: u32,
    /// Version tag of the renderer color table.
    pub color_table_version: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_supertile_order: 10,
            max_window_side: 8192,
            orbit_product_cap: 10_000_000,
            oracle_step_budget: 1 << 20,
            linear_component_exponent: 1,
            system_symbol_exponent: 0,
            color_table_version: 1,
        }
    }
}

impl Config {
    /// Linear-counter parameters attached to cells of the given order:
    /// 16-bit digits, one digit position per doubling of the cell order
    /// above three. Periods are the Fermat numbers 65537, 2^32+1, 2^64+1, ...
    pub fn linear_params(&self, cell_order: u32) -> CounterParams {
        assert!(cell_order >= 3);
        let k = self.linear_component_exponent + 3;
        CounterParams::new(k, 1usize << (cell_order - 3))
    }

    /// System-counter parameters attached to odd cells of the given order:
    /// periods are the Fermat numbers 17, 257, 65537, ...
    pub fn system_params(&self, cell_order: u32) -> SystemParams {
        assert!(cell_order >= 3 && cell_order % 2 == 1);
        SystemParams::new(self.system_symbol_exponent, 1usize << ((cell_order - 3) / 2))
    }

    /// Parse a minimal `key = value` configuration file.
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut c = Config::default();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", ln + 1))?;
            let key = key.trim();
            let value = value.trim();
            let parse = |v: &str| v.parse::<u64>().map_err(|e| format!("line {}: {e}", ln + 1));
            match key {
                "max_supertile_order" => c.max_supertile_order = parse(value)? as u32,
                "max_window_side" => c.max_window_side = parse(value)? as i64,
                "orbit_product_cap" => c.orbit_product_cap = parse(value)?,
                "oracle_step_budget" => c.oracle_step_budget = parse(value)?,
                "linear_component_exponent" => c.linear_component_exponent = parse(value)? as u32,
                "system_symbol_exponent" => c.system_symbol_exponent = parse(value)? as u32,
                "color_table_version" => c.color_table_version = parse(value)? as u32,
                _ => return Err(format!("line {}: unknown key {key:?}", ln + 1)),
            }
        }
        Ok(c)
    }
}
