//! Batch command-line surface over the library: generate hitting sets, test
//! circuits, run verification suites, expand circuits.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use pit_core::field::{smallest_prime_at_least, Field, Felt};
use pit_core::floor_lg;
use pit_core::generators::{
    commutative_generator, gen_to_hitting_set, hplusfs_generator, unknown_order_generator,
    unknown_order_params, GeneratorMap, GridReducer, HittingSet,
};
use pit_core::models::{smabp_to_roabp, DiagonalCircuit, MatrixRoabp, Roabp, Smabp};
use pit_core::pit::{
    hplusfs_field_bound, pit_blackbox, pit_grid, verify_theorem, PitVerdict, SuiteKind,
    SuiteParams, Verdict,
};
use pit_core::poly::{SparsePoly, UniPoly};
use pit_core::Error;

#[derive(Parser)]
#[command(name = "pit", about = "Hitting-set generators and identity testing over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a theorem generator's hitting set as CSV
    Gen(GenArgs),
    /// Test a circuit file for identity with zero
    Test(TestArgs),
    /// Run a theorem verification suite
    Verify(VerifyArgs),
    /// Expand a circuit file into its sparse polynomial
    Expand(ExpandArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    /// ROABP in an unknown variable order
    UnknownOrder,
    /// Commutative ROABP
    Commutative,
    /// Diagonal circuit; r is the partial-derivative dimension bound
    Diagonal,
    /// Hashing pipeline; r is the small-support bound itself
    Hplusfs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: GenModel,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    r: usize,
    /// Field modulus; omit to pick the smallest prime satisfying the bound
    #[arg(long)]
    p: Option<u64>,
    /// CSV destination; stdout when omitted (sidecar then goes to stderr)
    #[arg(long)]
    out: Option<String>,
    /// Half-open sub-range A..B of point indices
    #[arg(long, value_name = "A..B")]
    index_range: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestMode {
    Hitting,
    Grid,
    Random,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    circuit: String,
    #[arg(long, value_enum)]
    mode: TestMode,
    /// Required for random mode; all randomness flows through it
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    #[arg(long, default_value_t = 3)]
    max_d: u32,
    #[arg(long, default_value_t = 2)]
    max_r: usize,
    #[arg(long, default_value_t = 101)]
    p: u64,
    /// Replace the tested generator with a uselessly weak one (harness control)
    #[arg(long)]
    corrupt: bool,
    /// Lift the desk-scale parameter caps
    #[arg(long)]
    override_caps: bool,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long)]
    circuit: String,
}

/// Exit codes: 0 success, 1 usage, 2 validation, 3 suite failure.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Test(args) => cmd_test(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Expand(args) => cmd_expand(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn field_error(e: Error) -> String {
    e.to_string()
}

/// The smallest field modulus the model's generator and its interpolation
/// cube accept.
fn model_bound(model: GenModel, n: usize, d: u32, r: usize) -> u64 {
    match model {
        GenModel::Commutative => {
            // the generator needs n*d + 1 field elements; the hitting set
            // needs dsum + 1 interpolation values per y-variable
            let dsum = n as u64 * d_minus_one(d);
            (n as u64 * d as u64 + 1).max(dsum + 1).max(n as u64 + 1)
        }
        GenModel::UnknownOrder => unknown_order_params(n, d, r).field_bound,
        GenModel::Diagonal => {
            let l = (floor_lg(r.max(1) as u64) as usize).max(1);
            hplusfs_field_bound(n, d, l)
        }
        GenModel::Hplusfs => hplusfs_field_bound(n, d, r.max(1)),
    }
}

fn build_generator(
    model: GenModel,
    field: Field,
    n: usize,
    d: u32,
    r: usize,
) -> Result<GeneratorMap, Error> {
    match model {
        GenModel::Commutative => commutative_generator(field, n, d, r),
        GenModel::UnknownOrder => unknown_order_generator(field, n, d, r),
        GenModel::Diagonal => {
            let l = (floor_lg(r.max(1) as u64) as usize).max(1);
            hplusfs_generator(field, n, d, r, l, &GridReducer)
        }
        GenModel::Hplusfs => hplusfs_generator(field, n, d, r, r.max(1), &GridReducer),
    }
}

#[derive(Serialize)]
struct GenSidecar {
    p: u64,
    bound: u64,
    total_size: String,
    seed_arity: usize,
    /// Per seed variable: (first value, value count).
    ranges: Vec<(u64, u64)>,
    blocks: Vec<(String, usize)>,
}

fn parse_range(s: &str, size: u128) -> Result<(u128, u128), String> {
    let (a, b) = s.split_once("..").ok_or("index range must look like A..B")?;
    let a: u128 = a.parse().map_err(|_| "bad range start")?;
    let b: u128 = b.parse().map_err(|_| "bad range end")?;
    if a > b || b > size {
        return Err(format!("range {}..{} outside the set of size {}", a, b, size));
    }
    Ok((a, b))
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode, String> {
    if args.n == 0 || args.d == 0 || args.r == 0 {
        return Err("n, d, r must be positive".into());
    }
    let bound = model_bound(args.model, args.n, args.d, args.r);
    let p = match args.p {
        Some(p) => {
            if p < bound {
                return Err(format!("p = {} is below the enforced bound {}", p, bound));
            }
            p
        }
        None => smallest_prime_at_least(bound),
    };
    let field = Field::new(p).map_err(field_error)?;
    let g = build_generator(args.model, field, args.n, args.d, args.r).map_err(field_error)?;
    let dbounds = vec![d_minus_one(args.d); g.out_arity()];
    let hs = gen_to_hitting_set(&g, &dbounds).map_err(field_error)?;
    let size = hs.size();
    let (lo, hi) = match &args.index_range {
        Some(s) => parse_range(s, size)?,
        None => (0, size),
    };
    let sidecar = GenSidecar {
        p,
        bound,
        total_size: size.to_string(),
        seed_arity: g.seed_arity(),
        ranges: hs.ranges().to_vec(),
        blocks: g.blocks().iter().map(|b| (b.name.clone(), b.len)).collect(),
    };
    let mut csv = String::new();
    let header: Vec<String> = (1..=g.out_arity()).map(|i| format!("x{}", i)).collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for idx in lo..hi {
        let x = g.eval(&hs.point(idx)).map_err(field_error)?;
        let row: Vec<String> = x.iter().map(|v| v.value().to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let meta = serde_json::to_string_pretty(&sidecar).expect("serializable");
    match &args.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| e.to_string())?;
            fs::write(format!("{}.json", path), meta).map_err(|e| e.to_string())?;
        }
        None => {
            let mut stdout = std::io::stdout();
            stdout.write_all(csv.as_bytes()).map_err(|e| e.to_string())?;
            eprintln!("{}", meta);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn d_minus_one(d: u32) -> u64 {
    (d as u64).saturating_sub(1)
}

#[derive(Deserialize)]
struct CircuitFile {
    kind: String,
    p: u64,
    #[serde(default)]
    n: usize,
    #[serde(default)]
    d: u32,
    #[serde(default)]
    r: usize,
    #[serde(default)]
    order: Option<Vec<usize>>,
    #[serde(default)]
    layers: Option<serde_json::Value>,
    #[serde(default)]
    left: Option<Vec<u64>>,
    #[serde(default)]
    right: Option<Vec<u64>>,
    #[serde(default)]
    terms: Option<Vec<DiagonalTerm>>,
    #[serde(default)]
    partition: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
struct DiagonalTerm {
    coeffs: Vec<u64>,
    power: u32,
}

enum Circuit {
    Roabp(Roabp),
    Smabp(Smabp),
    Diagonal(DiagonalCircuit),
}

impl Circuit {
    fn field(&self) -> Field {
        match self {
            Circuit::Roabp(c) => c.field,
            Circuit::Smabp(c) => c.field,
            Circuit::Diagonal(c) => c.field,
        }
    }

    fn arity(&self) -> usize {
        match self {
            Circuit::Roabp(c) => c.n,
            Circuit::Smabp(c) => c.arity(),
            Circuit::Diagonal(c) => c.n,
        }
    }

    fn individual_degree_bound(&self) -> u32 {
        match self {
            Circuit::Roabp(c) => c.d.saturating_sub(1),
            Circuit::Smabp(_) => 1,
            Circuit::Diagonal(c) => {
                c.terms.iter().map(|&(_, power)| power).max().unwrap_or(0)
            }
        }
    }

    fn eval(&self, x: &[Felt]) -> Result<Felt, Error> {
        match self {
            Circuit::Roabp(c) => c.eval(x),
            Circuit::Smabp(c) => {
                // evaluate through the exact width-2r conversion
                smabp_to_roabp(c)?.eval(x)
            }
            Circuit::Diagonal(c) => c.eval(x),
        }
    }

    fn expand(&self) -> Result<SparsePoly, Error> {
        match self {
            Circuit::Roabp(c) => c.expand(),
            Circuit::Smabp(c) => c.expand(),
            Circuit::Diagonal(c) => c.expand(),
        }
    }
}

fn parse_unipoly_layers(
    field: Field,
    v: &serde_json::Value,
    r: usize,
) -> Result<Vec<Vec<UniPoly>>, String> {
    let layers: Vec<Vec<Vec<u64>>> =
        serde_json::from_value(v.clone()).map_err(|e| format!("layers: {}", e))?;
    layers
        .into_iter()
        .enumerate()
        .map(|(i, layer)| {
            if layer.len() != r * r {
                return Err(format!("layer {} has {} entries, expected {}", i, layer.len(), r * r));
            }
            Ok(layer
                .into_iter()
                .map(|coeffs| UniPoly::from_coeffs(field, coeffs))
                .collect())
        })
        .collect()
}

fn load_circuit(path: &str) -> Result<Circuit, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?;
    let file: CircuitFile = serde_json::from_str(&text).map_err(|e| format!("{}: {}", path, e))?;
    let field = Field::new(file.p).map_err(field_error)?;
    match file.kind.as_str() {
        "roabp" | "matrix-roabp" => {
            let layers_json = file.layers.ok_or("missing field: layers")?;
            let layers = parse_unipoly_layers(field, &layers_json, file.r)?;
            let n = layers.len();
            let order = file.order.unwrap_or_else(|| (0..n).collect());
            if file.kind == "roabp" {
                let left = file.left.ok_or("missing field: left")?;
                let right = file.right.ok_or("missing field: right")?;
                let felts = |v: Vec<u64>| -> Vec<Felt> {
                    v.into_iter().map(|c| field.elt(c as i128)).collect()
                };
                Roabp::new(field, file.d, file.r, order, layers, felts(left), felts(right))
                    .map(Circuit::Roabp)
                    .map_err(field_error)
            } else {
                let m = MatrixRoabp { field, n, d: file.d, r: file.r, order, layers };
                // matrix programs are tested through the (0,0) boundary
                let mut left = vec![field.zero(); file.r];
                let mut right = vec![field.zero(); file.r];
                if file.r > 0 {
                    left[0] = field.one();
                    right[0] = field.one();
                }
                m.with_boundary(left, right).map(Circuit::Roabp).map_err(field_error)
            }
        }
        "smabp" => {
            let layers_json = file.layers.ok_or("missing field: layers")?;
            let layers: Vec<Vec<Vec<u64>>> =
                serde_json::from_value(layers_json).map_err(|e| format!("layers: {}", e))?;
            let smabp = Smabp::new(field, file.n, file.r, layers).map_err(field_error)?;
            if let Some(partition) = &file.partition {
                let canonical: Vec<Vec<usize>> = (0..smabp.d)
                    .map(|i| (i * smabp.n..(i + 1) * smabp.n).collect())
                    .collect();
                if partition != &canonical {
                    return Err(
                        "partition must list contiguous blocks [i*n .. (i+1)*n) in order".into()
                    );
                }
            }
            Ok(Circuit::Smabp(smabp))
        }
        "diagonal" => {
            let terms = file.terms.ok_or("missing field: terms")?;
            let terms: Vec<(Vec<u64>, u32)> =
                terms.into_iter().map(|t| (t.coeffs, t.power)).collect();
            DiagonalCircuit::new(field, file.n, terms)
                .map(Circuit::Diagonal)
                .map_err(field_error)
        }
        other => Err(format!("unknown circuit kind: {}", other)),
    }
}

fn cmd_test(args: &TestArgs) -> Result<ExitCode, String> {
    let circuit = load_circuit(&args.circuit)?;
    let field = circuit.field();
    let n = circuit.arity();
    let deg = circuit.individual_degree_bound();
    let oracle = |x: &[Felt]| circuit.eval(x);
    let verdict: PitVerdict = match args.mode {
        TestMode::Grid => pit_grid(&oracle, field, n, deg).map_err(field_error)?,
        TestMode::Hitting => {
            let (g, dbounds): (GeneratorMap, Vec<u64>) = match &circuit {
                Circuit::Diagonal(c) => {
                    let fx = c.expand().map_err(field_error)?;
                    let dim = pit_core::models::partial_derivative_dim(&fx)
                        .map_err(field_error)?;
                    let l = (floor_lg(dim.max(1) as u64) as usize).max(1);
                    let d = fx.individual_degree() + 1;
                    let g = hplusfs_generator(field, n, d, dim.max(1), l, &GridReducer)
                        .map_err(field_error)?;
                    (g, vec![deg as u64; n])
                }
                _ => {
                    let g = unknown_order_generator(field, n, deg + 1, circuit_width(&circuit))
                        .map_err(field_error)?;
                    (g, vec![deg as u64; n])
                }
            };
            let hs = gen_to_hitting_set(&g, &dbounds).map_err(field_error)?;
            let in_x = |s: &[Felt]| -> Result<Vec<Felt>, Error> { g.eval(s) };
            run_through_generator(&oracle, &in_x, &hs).map_err(field_error)?
        }
        TestMode::Random => {
            let seed = args.seed.ok_or("random mode requires --seed")?;
            random_verdict(&oracle, field, n, seed).map_err(field_error)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&verdict).expect("serializable"));
    Ok(ExitCode::SUCCESS)
}

fn circuit_width(c: &Circuit) -> usize {
    match c {
        Circuit::Roabp(r) => r.r,
        Circuit::Smabp(s) => 2 * s.r,
        Circuit::Diagonal(_) => 1,
    }
}

/// Exhausts the seed cube of a generator, reporting witnesses in x-space.
fn run_through_generator<F, G>(
    oracle: &F,
    through: &G,
    hs: &HittingSet,
) -> Result<PitVerdict, Error>
where
    F: Fn(&[Felt]) -> Result<Felt, Error>,
    G: Fn(&[Felt]) -> Result<Vec<Felt>, Error>,
{
    let composed = |s: &[Felt]| -> Result<Felt, Error> { oracle(&through(s)?) };
    let mut v = pit_blackbox(&composed, hs)?;
    if let Some(w) = &v.witness {
        let field = hs.field();
        let seed: Vec<Felt> = w.iter().map(|&c| field.elt(c as i128)).collect();
        v.witness = Some(through(&seed)?.iter().map(|x| x.value()).collect());
    }
    Ok(v)
}

fn random_verdict<F>(oracle: &F, field: Field, n: usize, seed: u64) -> Result<PitVerdict, Error>
where
    F: Fn(&[Felt]) -> Result<Felt, Error>,
{
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let trials = 64u128;
    for i in 0..trials {
        let point: Vec<Felt> =
            (0..n).map(|_| field.elt(rng.gen_range(0..field.modulus()) as i128)).collect();
        if !oracle(&point)?.is_zero() {
            return Ok(PitVerdict {
                verdict: Verdict::Nonzero,
                witness: Some(point.iter().map(|v| v.value()).collect()),
                points_tried: i + 1,
                mode: "randomized".into(),
            });
        }
    }
    Ok(PitVerdict {
        verdict: Verdict::Zero,
        witness: None,
        points_tried: trials,
        mode: "randomized".into(),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, String> {
    let kind = SuiteKind::from_name(&args.suite).ok_or_else(|| {
        format!("unknown suite: {} (expected one of {})", args.suite, SuiteKind::all().join(", "))
    })?;
    let params = SuiteParams {
        max_n: args.max_n,
        max_d: args.max_d,
        max_r: args.max_r,
        p: args.p,
        corrupt: args.corrupt,
        override_caps: args.override_caps,
    };
    let report = verify_theorem(kind, &params, args.trials, args.seed).map_err(field_error)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

#[derive(Serialize)]
struct TermOut {
    exponents: Vec<u32>,
    coeff: u64,
}

#[derive(Serialize)]
struct PolyOut {
    p: u64,
    n: usize,
    terms: Vec<TermOut>,
}

fn cmd_expand(args: &ExpandArgs) -> Result<ExitCode, String> {
    let circuit = load_circuit(&args.circuit)?;
    let fx = circuit.expand().map_err(field_error)?;
    let out = PolyOut {
        p: circuit.field().modulus(),
        n: fx.arity(),
        terms: fx
            .terms()
            .map(|(e, c)| TermOut { exponents: e.clone(), coeff: c.value() })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(ExitCode::SUCCESS)
}
