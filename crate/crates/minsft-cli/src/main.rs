//! Single-binary front end: generators, validators and renderers behind
//! subcommands. Exit codes: 0 clean, 1 violations found, 2 usage or I/O
//! error.

use minsft::config::Config;
use minsft::counters::{
    linear_step, system_step, CounterParams, LinearCounterState, SystemCounterState, SystemParams,
};
use minsft::geom::Box2;
use minsft::hierarchy::{detect_cells, extract_petals, modularity_marks};
use minsft::machine::{compute_signals, parse_machine, run_area, ComputationArea, Content};
use minsft::pattern::{parse_pattern, write_pattern, Pattern};
use minsft::ppm::render_ppm;
use minsft::robinson::{generate_supertile, tile_plane, Orient};
use minsft::simulation::{
    assemble_stack, check_commuting, materialize_stack, odometer_system, phi, validate_pattern,
    validate_stack, Phases,
};
use std::collections::BTreeMap;
use std::process::ExitCode;

const USAGE: &str = "\
usage: minsft [--config <file>] <command> [options]

commands:
  generate-supertile --corner {sw|se|nw|ne} --order N [--out FILE]
  tile-plane --order N --x0 X --y0 Y --width W --height H [--out FILE]
  validate --in FILE
  petals --in FILE
  cells --in FILE
  counter-trace --kind {linear|system} --k K --w W --steps N
  machine-run --spec FILE --width W --height H [--tape WORD] [--sides FILE] [--out FILE]
  simulate --system odometer --order N --height H [--seed S] [--out FILE]
  render --in FILE --layer NAME --out FILE.ppm [--scale S]
  codes
";

struct Args {
    map: BTreeMap<String, String>,
}

impl Args {
    fn parse(rest: &[String]) -> Result<Args, String> {
        let mut map = BTreeMap::new();
        let mut it = rest.iter();
        while let Some(k) = it.next() {
            let key = k
                .strip_prefix("--")
                .ok_or_else(|| format!("expected an option, got {k:?}"))?;
            let v = it.next().ok_or_else(|| format!("option --{key} needs a value"))?;
            map.insert(key.to_string(), v.clone());
        }
        Ok(Args { map })
    }

    fn get(&self, key: &str) -> Result<&str, String> {
        self.map.get(key).map(|s| s.as_str()).ok_or_else(|| format!("missing --{key}"))
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        self.get(key)?.parse().map_err(|_| format!("--{key}: not a number"))
    }

    fn opt_num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.opt(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("--{key}: not a number")),
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            ExitCode::from(2)
        }
    }
}

fn run(argv: &[String]) -> Result<bool, String> {
    let mut argv = argv.to_vec();
    let mut config = Config::default();
    if let Some(env_path) = std::env::var_os("MINSFT_CONFIG") {
        let text = std::fs::read_to_string(&env_path).map_err(|e| e.to_string())?;
        config = Config::parse(&text)?;
    }
    if argv.first().map(|s| s.as_str()) == Some("--config") {
        if argv.len() < 2 {
            return Err("--config needs a file".to_string());
        }
        let text = std::fs::read_to_string(&argv[1]).map_err(|e| e.to_string())?;
        config = Config::parse(&text)?;
        argv.drain(0..2);
    }
    let Some(cmd) = argv.first().cloned() else {
        return Err("missing command".to_string());
    };
    let args = Args::parse(&argv[1..])?;
    let started = std::time::Instant::now();
    let clean = match cmd.as_str() {
        "generate-supertile" => cmd_generate(&args, &config)?,
        "tile-plane" => cmd_tile_plane(&args, &config)?,
        "validate" => cmd_validate(&args)?,
        "petals" => cmd_petals(&args)?,
        "cells" => cmd_cells(&args)?,
        "counter-trace" => cmd_counter_trace(&args)?,
        "machine-run" => cmd_machine_run(&args)?,
        "simulate" => cmd_simulate(&args, &config)?,
        "render" => cmd_render(&args)?,
        "codes" => cmd_codes(),
        other => return Err(format!("unknown command {other:?}")),
    };
    eprintln!("# {} finished in {:.3}s", cmd, started.elapsed().as_secs_f64());
    Ok(clean)
}

fn write_out(args: &Args, p: &Pattern) -> Result<(), String> {
    let bytes = write_pattern(p);
    match args.opt("out") {
        Some(path) => std::fs::write(path, bytes).map_err(|e| e.to_string()),
        None => {
            use std::io::Write as _;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    }
}

fn read_pattern_file(args: &Args) -> Result<Pattern, String> {
    let path = args.get("in")?;
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    parse_pattern(&bytes).map_err(|e| e.to_string())
}

fn cmd_generate(args: &Args, config: &Config) -> Result<bool, String> {
    let corner = Orient::parse(args.get("corner")?).ok_or("corner must be sw/se/nw/ne")?;
    let order: u32 = args.num("order")?;
    let p = generate_supertile(corner, order, config.max_supertile_order)
        .map_err(|e| e.to_string())?;
    write_out(args, &p)?;
    Ok(true)
}

fn cmd_tile_plane(args: &Args, config: &Config) -> Result<bool, String> {
    let order: u32 = args.num("order")?;
    let window = Box2::new(
        args.opt_num("x0", 0)?,
        args.opt_num("y0", 0)?,
        args.num("width")?,
        args.num("height")?,
    );
    let p = tile_plane(order, window, config.max_window_side).map_err(|e| e.to_string())?;
    write_out(args, &p)?;
    Ok(true)
}

fn cmd_validate(args: &Args) -> Result<bool, String> {
    let p = read_pattern_file(args)?;
    let violations = validate_pattern(&p).map_err(|e| e.to_string())?;
    for v in &violations {
        let (x, y, z) = v.positions.first().copied().unwrap_or((0, 0, 0));
        println!("violation {} at ({x},{y},{z}): {}", v.rule, v.detail);
    }
    println!("violations {}", violations.len());
    Ok(violations.is_empty())
}

fn cmd_petals(args: &Args) -> Result<bool, String> {
    let p = read_pattern_file(args)?;
    let petals = extract_petals(&p).map_err(|e| e.to_string())?;
    for petal in &petals {
        println!(
            "petal {} {} {} {} {}",
            petal.order,
            petal.bounds.x0,
            petal.bounds.y0,
            petal.side(),
            petal.role.name()
        );
    }
    Ok(true)
}

fn cmd_cells(args: &Args) -> Result<bool, String> {
    let p = read_pattern_file(args)?;
    let cells = detect_cells(&p).map_err(|e| e.to_string())?;
    let (marked, _) = modularity_marks(&cells, None);
    for c in &marked {
        println!(
            "cell {} {} {} {} {}",
            c.order,
            c.bounds.x0,
            c.bounds.y0,
            c.side(),
            c.modularity.unwrap()
        );
    }
    Ok(true)
}

fn hex_digits(digits: &[u64]) -> String {
    digits.iter().map(|d| format!("{d:x}")).collect::<Vec<_>>().join(".")
}

fn cmd_counter_trace(args: &Args) -> Result<bool, String> {
    let kind = args.get("kind")?;
    let k: u32 = args.num("k")?;
    let w: usize = args.num("w")?;
    let steps: usize = args.num("steps")?;
    match kind {
        "linear" => {
            let params = CounterParams::new(k, w);
            let mut st = LinearCounterState::zero(&params);
            for _ in 0..steps {
                println!("{} {}", hex_digits(&st.digits), if st.frozen { "F" } else { "." });
                st = linear_step(&st, &params);
            }
        }
        "system" => {
            let params = SystemParams::new(k, w);
            let mut st = SystemCounterState::zero(&params);
            for _ in 0..steps {
                println!(
                    "{} {} {} {}",
                    hex_digits(&st.index),
                    hex_digits(&st.bottom),
                    hex_digits(&st.top),
                    if st.frozen { "F" } else { "." }
                );
                st = system_step(&st, &params);
            }
        }
        _ => return Err("kind must be linear or system".to_string()),
    }
    Ok(true)
}

fn cmd_machine_run(args: &Args) -> Result<bool, String> {
    let spec_bytes = std::fs::read(args.get("spec")?).map_err(|e| e.to_string())?;
    let spec = parse_machine(&spec_bytes).map_err(|e| e.to_string())?;
    let width: usize = args.num("width")?;
    let height: usize = args.num("height")?;
    let mut area = ComputationArea::clean(&spec, width, height);
    if let Some(word) = args.opt("tape") {
        let letters: Vec<u16> = word
            .split('.')
            .map(|t| t.parse::<u16>().map_err(|_| "tape: dotted letter codes".to_string()))
            .collect::<Result<_, _>>()?;
        if letters.len() != width {
            return Err(format!("tape has {} letters, area width {width}", letters.len()));
        }
        for (i, a) in letters.iter().enumerate() {
            area.bottom[i].0 = *a;
        }
    }
    if let Some(path) = args.opt("sides") {
        // one line per row: `<west-state> <east-state>`
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        for (r, line) in text.lines().enumerate().take(height) {
            let mut toks = line.split_whitespace();
            if let Some(wst) = toks.next() {
                area.west[r] = wst.parse().map_err(|_| "sides: bad state")?;
            }
            if let Some(est) = toks.next() {
                area.east[r] = est.parse().map_err(|_| "sides: bad state")?;
            }
        }
    }
    let diagram = run_area(&spec, &area).map_err(|e| e.to_string())?;
    let report = compute_signals(&spec, &diagram, &area);
    let mut p = Pattern::new_2d(Box2::new(0, 0, width as i64, height as i64), &["machine"]);
    for y in 0..height {
        for x in 0..width {
            let code = match diagram.get(x, y) {
                Content::Letter(a) => 0x100 + a as u32,
                Content::LetterHead(a, q) => 0x200 + ((a as u32) << 8) + q as u32,
                Content::Pass(q1, q2) => 0x300 + ((q1 as u32) << 8) + q2 as u32,
            };
            p.set(0, minsft::geom::Pos2::new(x as i64, y as i64), code);
        }
    }
    if args.opt("out").is_some() {
        write_out(args, &p)?;
    }
    println!("first-error-col {}", report.first_error_col);
    println!("empty-tape-splits {} {}", report.empty_tape_lr, report.empty_tape_rl);
    println!(
        "sides-clean {} {}",
        report.left_side_clean as u8, report.right_side_clean as u8
    );
    println!("admissible {}", report.admissible as u8);
    Ok(report.admissible)
}

fn cmd_simulate(args: &Args, config: &Config) -> Result<bool, String> {
    let system = args.opt("system").unwrap_or("odometer");
    if system != "odometer" {
        return Err(format!("unknown system {system:?}"));
    }
    let order: u32 = args.num("order")?;
    let height: usize = args.num("height")?;
    let seed: u64 = args.opt_num("seed", 0)?;
    let st = assemble_stack(odometer_system(), order, height, &Phases { seed }, config)
        .map_err(|e| e.to_string())?;
    let violations = validate_stack(&st);
    for c in 0..height {
        let pre = phi(&st, c).map_err(|e| e.to_string())?;
        let bits: Vec<String> = pre.bits.iter().map(|b| b.to_string()).collect();
        println!("phi section {c}: {}", bits.join(""));
    }
    let commutes = check_commuting(&st).map_err(|e| e.to_string())?;
    println!("commuting {}", commutes as u8);
    println!("violations {}", violations.len());
    if args.opt("out").is_some() {
        let p = materialize_stack(&st);
        write_out(args, &p)?;
    }
    Ok(violations.is_empty() && commutes)
}

fn cmd_render(args: &Args) -> Result<bool, String> {
    let p = read_pattern_file(args)?;
    let layer = args.get("layer")?;
    let scale: u32 = args.opt_num("scale", 1)?;
    let img = render_ppm(&p, layer, scale).map_err(|e| e.to_string())?;
    std::fs::write(args.get("out")?, img).map_err(|e| e.to_string())?;
    Ok(true)
}

fn cmd_codes() -> bool {
    println!("# symbol code tables, generated");
    println!("## layer robinson");
    println!("0 blank");
    println!("bit 0: non-blank, bit 1: arm flag");
    println!("corners: bit 2 red, bit 3 valuation, bits 4-5 orientation (sw=0 se=1 nw=2 ne=3)");
    println!("arms: bit 2 horizontal, bit 3 direction (N/E=0 S/W=1), bit 4 doubled principal,");
    println!("      bit 5 principal pair side, bit 6 doubled lateral, bit 7 lateral pair side,");
    println!("      bit 8 i mark, bit 9 j mark, bits 10-12 alignment (none/sw/se/nw/ne)");
    println!("## layer subdivision");
    println!("0 blank, 1 gray; 2 + (len-1)*64 + base-4 address digits (most significant first)");
    println!("## layer system-bits");
    println!("(h << 8) | v with 0 blank and bit value b coded b+1 per coordinate");
    println!("## layer modularity");
    println!("0 blank, 1+v value v in Z/4Z, 16 + 4a + b transformation pair (a, b)");
    println!("## layer functional");
    println!("0 blank, 1 computation, 2 transfer-h, 3 transfer-v, 4 no function");
    println!("## layer channels");
    println!("0 blank, 1+bit channel value");
    println!("## layer linear-counter");
    println!("0 blank, 1 freeze marker, 2+digit counter digit");
    println!("## layer system-counter");
    println!("1 + (index << 2) + (bottom << 8) + (top << 10) + (frozen << 12)");
    println!("  + detection greens at bits 13..15 (index, bottom, top words)");
    println!("## layer machine");
    println!("0x100+a letter, 0x200+(a<<8)+q letter with head, 0x300+(q1<<8)+q2 transport");
    println!("## renderer color table v1");
    println!("robinson: blank white; blue corner (40,90,220); red corner bit 0 (230,90,90),");
    println!("bit 1 (170,20,20); arm gray 230-22*arrows; other layers: fixed hash palette");
    true
}
