//! `forensic`: command-line front end for the forensic codes.
//!
//! Exit codes: 0 success, 1 suite failure, 2 infeasible parameters, 3 decode
//! failure, 4 format or usage error, 5 no legal fragment.

mod doc;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use forensic_core::channel::{
    fragment, inject_flips, sample_legal_boxes, CropRect, FlipBudget, FlipStrategy, FragmentMode, FragmentationPlan,
};
use forensic_core::codec2d::{color, decode2d, encode2d, CodeParams2D};
use forensic_core::codec3d::{decode3d, encode3d, CodeParams3D};
use forensic_core::grid::{read_grid, write_grid2d, write_grid3d};
use forensic_core::rates::{emit_table, lll_existence_bound, sphere_packing_bound, LllExponent, TableId};
use forensic_core::robust::{decode_robust, encode_robust, RobustParams};
use forensic_core::verify::{run_suite, Suite};
use forensic_core::{AnyGrid, BitGrid2D, DecodeError, Error, Message};

use doc::{parse_profile, ParamsDoc, Resolved};

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn format(message: impl Into<String>) -> Self {
        Failure::new(4, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible { .. } => 2,
            Error::Decode(_) => 3,
            Error::NoLegalFragment(_) => 5,
            Error::OracleLimit(_) | Error::NoWitness(_) => 1,
            Error::OutOfRange { .. } | Error::InvalidArgument(_) | Error::Format(_) | Error::Io(_) => 4,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<DecodeError> for Failure {
    fn from(e: DecodeError) -> Self {
        Failure::new(3, format!("decode failed: {e}"))
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Single-fragment forensic codes for 2D and 3D bit arrays.
///
/// Only the long `--help` flag is recognized, since `-h` is the minimum
/// fragment side.
#[derive(Parser)]
#[command(name = "forensic", disable_help_flag = true, disable_help_subcommand = true)]
struct Cli {
    #[arg(long, action = ArgAction::Help, global = true, help = "Print help")]
    help: Option<bool>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive code parameters from (q, M, h) and print a parameter document.
    #[command(disable_help_flag = true)]
    Params(ParamsArgs),
    /// Encode a message into a 2D codeword grid file.
    #[command(disable_help_flag = true)]
    Encode2d(EncodeArgs),
    /// Decode a 2D fragment and print the message as `<len>:<hex>`.
    #[command(disable_help_flag = true)]
    Decode2d(DecodeArgs),
    /// Encode a message into a 3D codeword grid file.
    #[command(disable_help_flag = true)]
    Encode3d(EncodeArgs),
    /// Decode a 3D fragment and print the message as `<len>:<hex>`.
    #[command(disable_help_flag = true)]
    Decode3d(DecodeArgs),
    /// Encode with the flip-tolerant code.
    #[command(name = "encode-robust", disable_help_flag = true)]
    EncodeRobust(EncodeArgs),
    /// Decode a possibly corrupted fragment of a flip-tolerant codeword.
    #[command(name = "decode-robust", disable_help_flag = true)]
    DecodeRobust(DecodeArgs),
    /// Break a codeword and keep one legal fragment.
    #[command(disable_help_flag = true)]
    Fragment(FragmentArgs),
    /// Flip up to `delta` cells of a 2D grid and log the positions.
    #[command(disable_help_flag = true)]
    Flip(FlipArgs),
    /// Regenerate a rate table (1, 2 or 3).
    #[command(disable_help_flag = true)]
    Rates(RatesArgs),
    /// Sphere-packing and existence bounds on the rate.
    #[command(disable_help_flag = true)]
    Bounds(BoundsArgs),
    /// Run a self-check suite; exits 1 if any check fails.
    #[command(disable_help_flag = true)]
    Verify(VerifyArgs),
    /// Write a grid or a unit coloring as a binary PGM image.
    #[command(disable_help_flag = true)]
    Render(RenderArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// Alphabet size.
    #[arg(short = 'q', default_value_t = 2)]
    q: u8,
    /// Minimum fragment area (volume with --3d).
    #[arg(short = 'M')]
    min_area: usize,
    /// Minimum fragment side.
    #[arg(short = 'h')]
    min_side: usize,
    /// Codeword side; defaults to the smallest admissible one.
    #[arg(short = 'n')]
    n: Option<usize>,
    /// Codeword depth for --3d.
    #[arg(long)]
    n_prime: Option<usize>,
    /// Flip budget; selects the flip-tolerant code.
    #[arg(long, conflicts_with = "three_d")]
    delta: Option<usize>,
    /// Sliced-codec profile for the flip-tolerant code: reference or optimal.
    #[arg(long, default_value = "reference", requires = "delta")]
    profile: String,
    /// Derive the 3D code.
    #[arg(long = "3d")]
    three_d: bool,
    /// Write the document here instead of stdout.
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Parameter document from `params`.
    #[arg(short = 'p', long)]
    params: PathBuf,
    /// Message as `<len>:<hex>`.
    #[arg(short = 'm', long, conflicts_with = "seed", required_unless_present = "seed")]
    message: Option<String>,
    /// Encode a random message drawn from this seed instead.
    #[arg(long)]
    seed: Option<u64>,
    /// Output grid file.
    #[arg(short = 'o', long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(short = 'p', long)]
    params: PathBuf,
    /// Fragment grid file.
    #[arg(short = 'i', long)]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    Guillotine,
    Crop,
    WorstCase,
}

#[derive(Args)]
struct FragmentArgs {
    #[arg(short = 'p', long)]
    params: PathBuf,
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(short = 'o', long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "guillotine")]
    mode: ModeName,
    /// Crop for --mode crop: `top,left,height,width` (2D) or
    /// `x,y,z,dx,dy,dz` (3D).
    #[arg(long)]
    crop: Option<String>,
    #[arg(long, default_value_t = 4)]
    max_cuts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    Random,
    ZeroUnit,
    Borders,
}

#[derive(Args)]
struct FlipArgs {
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(short = 'o', long)]
    out: PathBuf,
    #[arg(long)]
    delta: usize,
    #[arg(long, value_enum, default_value = "random")]
    strategy: StrategyName,
    /// Unit side for the targeted strategies.
    #[arg(long)]
    unit: Option<usize>,
    /// Restrict flips to `top,left,height,width`.
    #[arg(long)]
    region: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write flip positions here instead of stdout.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    /// Table number: 1, 2 or 3.
    table: u8,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(short = 'q', default_value_t = 2)]
    q: u8,
    /// Codeword side.
    #[arg(short = 'n')]
    n: usize,
    /// Minimum fragment area.
    #[arg(short = 'M')]
    min_area: usize,
    #[arg(long, default_value_t = 0)]
    delta: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// discrepancy, lemmas, roundtrip, robust or all.
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RenderArgs {
    /// Grid file to render.
    #[arg(short = 'i', long, required_unless_present = "colors")]
    input: Option<PathBuf>,
    /// Render the unit coloring of these 2D parameters instead.
    #[arg(long, conflicts_with = "input")]
    colors: Option<PathBuf>,
    #[arg(short = 'o', long)]
    out: PathBuf,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::format(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| Failure::format(format!("{}: {e}", path.display())))
}

fn load_params(path: &Path) -> CliResult<Resolved> {
    Ok(ParamsDoc::from_toml(&read_text(path)?)?.resolve()?)
}

fn load_2d(path: &Path) -> CliResult<BitGrid2D> {
    match read_grid(path)? {
        AnyGrid::TwoD(g) => Ok(g),
        AnyGrid::ThreeD(_) => Err(Failure::format(format!("{}: expected a 2D grid", path.display()))),
    }
}

fn parse_numbers(text: &str, count: usize) -> CliResult<Vec<usize>> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::format(format!("bad number list {text:?}: {e}")))?;
    if values.len() != count {
        return Err(Failure::format(format!("expected {count} comma-separated numbers, got {text:?}")));
    }
    Ok(values)
}

fn parse_rect(text: &str) -> CliResult<CropRect> {
    let v = parse_numbers(text, 4)?;
    Ok(CropRect { top: v[0], left: v[1], height: v[2], width: v[3] })
}

fn cmd_params(args: &ParamsArgs) -> CliResult {
    let doc = if args.three_d {
        ParamsDoc::from_3d(&CodeParams3D::derive(args.q, args.min_area, args.min_side, args.n, args.n_prime)?)
    } else {
        let base = CodeParams2D::derive(args.q, args.n, args.min_area, args.min_side)?;
        match args.delta {
            Some(delta) => ParamsDoc::from_robust(&RobustParams::validate(base, delta, parse_profile(&args.profile)?)?),
            None => ParamsDoc::from_2d(&base),
        }
    };
    let text = doc.to_toml();
    match &args.out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input_message(args: &EncodeArgs, q: u8, len: usize) -> CliResult<Message> {
    let msg = match (&args.message, args.seed) {
        (Some(text), _) => Message::from_hex(q, text)?,
        (None, Some(seed)) => Message::random(q, len, &mut ChaCha8Rng::seed_from_u64(seed))?,
        (None, None) => return Err(Failure::format("either --message or --seed is required")),
    };
    if msg.len() != len {
        return Err(Failure::format(format!("message has {} symbols, code expects {len}", msg.len())));
    }
    Ok(msg)
}

fn cmd_encode(args: &EncodeArgs, want: doc::Kind) -> CliResult {
    let resolved = load_params(&args.params)?;
    let msg = match (&resolved, want) {
        (Resolved::TwoD(p), doc::Kind::TwoD) => {
            let msg = input_message(args, p.q, p.message_len)?;
            write_grid2d(&args.out, &encode2d(p, &msg)?)?;
            msg
        }
        (Resolved::ThreeD(p), doc::Kind::ThreeD) => {
            let msg = input_message(args, p.q, p.message_len)?;
            write_grid3d(&args.out, &encode3d(p, &msg)?)?;
            msg
        }
        (Resolved::Robust(p), doc::Kind::Robust) => {
            let msg = input_message(args, 2, p.message_len())?;
            write_grid2d(&args.out, &encode_robust(p, &msg)?)?;
            msg
        }
        _ => return Err(Failure::format("parameter document is for a different code")),
    };
    println!("{}", msg.to_hex());
    Ok(())
}

fn cmd_decode(args: &DecodeArgs, want: doc::Kind) -> CliResult {
    let resolved = load_params(&args.params)?;
    let grid = read_grid(&args.input)?;
    let msg = match (&resolved, want, grid) {
        (Resolved::TwoD(p), doc::Kind::TwoD, AnyGrid::TwoD(g)) => decode2d(p, &g)?,
        (Resolved::ThreeD(p), doc::Kind::ThreeD, AnyGrid::ThreeD(g)) => decode3d(p, &g)?,
        (Resolved::Robust(p), doc::Kind::Robust, AnyGrid::TwoD(g)) => decode_robust(p, &g)?,
        (_, _, _) => return Err(Failure::format("parameter document or grid dimension does not match the command")),
    };
    println!("{}", msg.to_hex());
    Ok(())
}

fn cmd_fragment(args: &FragmentArgs) -> CliResult {
    let (min_area, min_side) = match load_params(&args.params)? {
        Resolved::TwoD(p) => (p.min_area, p.min_side),
        Resolved::Robust(p) => (p.base.min_area, p.base.min_side),
        Resolved::ThreeD(p) => (p.min_volume, p.min_side),
    };
    match read_grid(&args.input)? {
        AnyGrid::TwoD(grid) => {
            let mode = match args.mode {
                ModeName::Guillotine => FragmentMode::Guillotine,
                ModeName::WorstCase => FragmentMode::WorstCaseEnumeration,
                ModeName::Crop => FragmentMode::FixedCrop(parse_rect(
                    args.crop.as_deref().ok_or_else(|| Failure::format("--mode crop needs --crop"))?,
                )?),
            };
            let plan = FragmentationPlan { seed: args.seed, mode, max_cuts: args.max_cuts };
            let result = fragment(&grid, &plan, min_area, min_side)?;
            write_grid2d(&args.out, &result.selected)?;
            let mut report = String::new();
            for piece in &result.pieces {
                writeln!(report, "piece {} {} {} {}", piece.top, piece.left, piece.height, piece.width).unwrap();
            }
            let s = result.selected_region;
            writeln!(report, "selected {} {} {} {}", s.top, s.left, s.height, s.width).unwrap();
            print!("{report}");
        }
        AnyGrid::ThreeD(grid) => {
            let (origin, extent) = match args.mode {
                ModeName::Crop => {
                    let v = parse_numbers(
                        args.crop.as_deref().ok_or_else(|| Failure::format("--mode crop needs --crop"))?,
                        6,
                    )?;
                    ([v[0], v[1], v[2]], [v[3], v[4], v[5]])
                }
                // 3D grids have no guillotine model; draw one seeded legal box instead
                ModeName::Guillotine | ModeName::WorstCase => {
                    sample_legal_boxes(grid.dims(), min_area, min_side, 1, args.seed)?[0]
                }
            };
            write_grid3d(&args.out, &grid.crop(origin, extent)?)?;
            println!(
                "selected {} {} {} {} {} {}",
                origin[0], origin[1], origin[2], extent[0], extent[1], extent[2]
            );
        }
    }
    Ok(())
}

fn cmd_flip(args: &FlipArgs) -> CliResult {
    let grid = load_2d(&args.input)?;
    let unit = || args.unit.ok_or_else(|| Failure::format("targeted strategies need --unit"));
    let strategy = match args.strategy {
        StrategyName::Random => FlipStrategy::Random,
        StrategyName::ZeroUnit => FlipStrategy::ConcentrateOnZeroUnit { unit: unit()? },
        StrategyName::Borders => FlipStrategy::ConcentrateOnBorders { unit: unit()? },
    };
    let region = args.region.as_deref().map(parse_rect).transpose()?;
    let budget = FlipBudget { delta: args.delta, strategy, seed: args.seed, region };
    let (flipped, positions) = inject_flips(&grid, &budget)?;
    write_grid2d(&args.out, &flipped)?;
    let log: String = positions.iter().map(|(r, c)| format!("{r} {c}\n")).collect();
    match &args.log {
        Some(path) => write_bytes(path, log.as_bytes()),
        None => {
            print!("{log}");
            Ok(())
        }
    }
}

fn cmd_rates(args: &RatesArgs) -> CliResult {
    let id = TableId::from_number(args.table)
        .ok_or_else(|| Failure::format(format!("no table {}; choose 1, 2 or 3", args.table)))?;
    let table = emit_table(id)?;
    print!("{}", if args.csv { table.to_csv() } else { table.to_text() });
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult {
    let sphere = sphere_packing_bound(args.q, args.min_area, args.delta);
    println!("sphere_packing {sphere:.9}");
    for (label, exponent) in [("1.5", LllExponent::OneAndHalf), ("1.25", LllExponent::OneAndQuarter)] {
        let lll = lll_existence_bound(args.q, args.n, args.min_area, args.delta, exponent);
        println!("lll_{label} {lll:.9}");
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let suites: Vec<Suite> = match args.suite.as_str() {
        "all" => Suite::ALL.to_vec(),
        name => vec![name.parse()?],
    };
    let mut failed = 0;
    for suite in suites {
        for result in run_suite(suite, args.seed) {
            println!("{result}");
            failed += usize::from(!result.passed);
        }
    }
    if failed > 0 {
        return Err(Failure::new(1, format!("{failed} checks failed")));
    }
    Ok(())
}

fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

fn gray(value: usize, levels: usize) -> u8 {
    (value * 255 / (levels - 1).max(1)) as u8
}

fn cmd_render(args: &RenderArgs) -> CliResult {
    let image = if let Some(path) = &args.colors {
        let p = match load_params(path)? {
            Resolved::TwoD(p) => p,
            Resolved::Robust(p) => p.base,
            Resolved::ThreeD(_) => return Err(Failure::format("color maps are drawn for 2D parameters only")),
        };
        let units = p.units_per_side();
        let mut pixels = Vec::with_capacity(units * units);
        for i in 0..units {
            for j in 0..units {
                pixels.push(gray(color(&p, i, j)?, p.colors));
            }
        }
        pgm(units, units, &pixels)
    } else {
        let path = args.input.as_ref().ok_or_else(|| Failure::format("--input or --colors is required"))?;
        match read_grid(path)? {
            AnyGrid::TwoD(g) => {
                let pixels: Vec<u8> = g.cells().iter().map(|&v| gray(v.into(), g.q().into())).collect();
                pgm(g.cols(), g.rows(), &pixels)
            }
            // x slices stacked top to bottom, each dims[1] rows of dims[2] pixels
            AnyGrid::ThreeD(g) => {
                let [dx, dy, dz] = g.dims();
                let pixels: Vec<u8> = g.cells().iter().map(|&v| gray(v.into(), g.q().into())).collect();
                pgm(dz, dx * dy, &pixels)
            }
        }
    };
    write_bytes(&args.out, &image)
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Params(a) => cmd_params(a),
        Command::Encode2d(a) => cmd_encode(a, doc::Kind::TwoD),
        Command::Decode2d(a) => cmd_decode(a, doc::Kind::TwoD),
        Command::Encode3d(a) => cmd_encode(a, doc::Kind::ThreeD),
        Command::Decode3d(a) => cmd_decode(a, doc::Kind::ThreeD),
        Command::EncodeRobust(a) => cmd_encode(a, doc::Kind::Robust),
        Command::DecodeRobust(a) => cmd_decode(a, doc::Kind::Robust),
        Command::Fragment(a) => cmd_fragment(a),
        Command::Flip(a) => cmd_flip(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("forensic: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
