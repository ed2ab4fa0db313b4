use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pisotile::algebra::{
    is_perron_root, is_pisot_family, is_pisot_number, isolate_roots, AlgebraError, IntPolynomial, SpectrumSelection,
    Verdict,
};
use pisotile::output::{decay_csv, to_canonical_json};
use pisotile::pipeline::{run_meyer, run_spectrum, seed_patch, SpectrumConfig};
use pisotile::spectrum::{GridSpec, Provenance};
use pisotile::tiling::{direct_product, patch_to_json, render_svg, SubstitutionRule, TilingError, DEFAULT_TILE_CAP};

#[derive(Parser)]
#[command(name = "pisotile", version, about = "Self-affine tilings, Pisot families and eigenvalue checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Root isolation precision.
    #[arg(long, global = true, default_value_t = 1e-12)]
    precision: f64,
    /// Largest number of tiles a patch may reach.
    #[arg(long, global = true, default_value_t = DEFAULT_TILE_CAP)]
    tile_cap: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Start from this prototile (1-based label) at the origin instead of a fixed-point seed.
    #[arg(long, global = true)]
    seed_tile: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Pisot-number, Perron and Pisot-family verdicts for a polynomial.
    Classify {
        poly_file: PathBuf,
        /// Root indices (1-based, by decreasing modulus), e.g. `1,2`; repeatable.
        #[arg(long)]
        select: Vec<String>,
    },
    /// Apply the substitution `k` times to the seed.
    Expand {
        spec_file: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Also write an SVG render (dimension at most 2).
        #[arg(long)]
        render: Option<PathBuf>,
    },
    /// Eigenvalue report: family construction, decay profiles and a grid scan.
    Spectrum {
        spec_file: PathBuf,
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        /// `lo:hi:spacing`, or `none`.
        #[arg(long, default_value = "-2:2:0.25")]
        grid: String,
        #[arg(long = "K-max", default_value_t = 10)]
        k_max: usize,
        /// Extra wave vector, comma-separated; repeatable.
        #[arg(long)]
        gamma: Vec<String>,
    },
    /// Minimum gap of Y − Y over growing windows.
    Meyer {
        spec_file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        windows: Vec<f64>,
    },
    /// Check a rule and print the report.
    Validate { spec_file: PathBuf },
    /// Write the direct product of two rules.
    Product {
        first: PathBuf,
        second: PathBuf,
        /// File name inside the output directory.
        #[arg(long, default_value = "product.json")]
        name: String,
    },
}

enum Failure {
    Internal(String),
    Parse(String),
    Undecidable(String),
    InvalidRule(String),
    Render(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Undecidable(_) => 3,
            Failure::InvalidRule(_) => 4,
            Failure::Render(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m)
            | Failure::Parse(m)
            | Failure::Undecidable(m)
            | Failure::InvalidRule(m)
            | Failure::Render(m) => m,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Internal(format!("{}: {e}", path.display()))
}

fn tiling_failure(e: TilingError) -> Failure {
    match e {
        TilingError::Parse(m) => Failure::Parse(m),
        TilingError::RenderUnsupported { .. } => Failure::Render(e.to_string()),
        TilingError::InvalidRule(_) | TilingError::Expansion(_) | TilingError::IndexOutOfRange { .. } => {
            Failure::InvalidRule(e.to_string())
        }
        other => Failure::Internal(other.to_string()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Creates the output directory and checks it accepts files.
fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let probe = dir.join(".pisotile-write-check");
    fs::write(&probe, b"").map_err(|e| io_err(dir, e))?;
    fs::remove_file(&probe).map_err(|e| io_err(dir, e))
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn canonical(v: &impl serde::Serialize) -> Result<String, Failure> {
    to_canonical_json(v).map_err(|e| Failure::Internal(e.to_string()))
}

/// Parses and validates a rule; invalid rules print the report to stderr.
fn load_rule(path: &Path) -> Result<SubstitutionRule, Failure> {
    let rule = SubstitutionRule::from_json(&read(path)?).map_err(tiling_failure)?;
    let report = rule.validate();
    if !report.valid {
        eprintln!("{}", canonical(&report)?);
        return Err(Failure::InvalidRule(format!("{} failed validation", path.display())));
    }
    Ok(rule)
}

fn seed_label(global: &Global, rule: &SubstitutionRule) -> Result<Option<usize>, Failure> {
    match global.seed_tile {
        None => Ok(None),
        Some(l) if l >= 1 && l <= rule.kappa() => Ok(Some(l - 1)),
        Some(l) => Err(Failure::InvalidRule(format!("seed tile {l} is not a label in 1..={}", rule.kappa()))),
    }
}

fn parse_vector(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Failure::Parse(format!("bad number {x:?}: {e}"))))
        .collect()
}

fn parse_grid(s: &str) -> Result<Option<GridSpec>, Failure> {
    if s == "none" {
        return Ok(None);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, spacing] = parts[..] else {
        return Err(Failure::Parse(format!("grid must be lo:hi:spacing, got {s:?}")));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|e| Failure::Parse(format!("bad grid value {x:?}: {e}")));
    Ok(Some(GridSpec { lo: num(lo)?, hi: num(hi)?, spacing: num(spacing)? }))
}

fn cmd_classify(global: &Global, poly_file: &Path, select: &[String]) -> Result<(), Failure> {
    let text = read(poly_file)?;
    let poly = IntPolynomial::parse_json(&text).map_err(|e| Failure::Parse(e.to_string()))?;
    let alg = |e: AlgebraError| match e {
        AlgebraError::Undecidable | AlgebraError::PrecisionUnattainable { .. } => Failure::Undecidable(e.to_string()),
        AlgebraError::Parse(m) => Failure::Parse(m),
        other => Failure::Internal(other.to_string()),
    };
    let roots = isolate_roots(&poly, global.precision).map_err(alg)?;
    // 1-based indices by decreasing modulus, then decreasing imaginary part.
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (roots.roots[a].value, roots.roots[b].value);
        zb.norm().total_cmp(&za.norm()).then(zb.im.total_cmp(&za.im))
    });
    let table: Vec<Value> = order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let r = &roots.roots[i];
            json!({"index": k + 1, "re": r.value.re, "im": r.value.im, "modulus": r.value.norm(), "radius": r.radius})
        })
        .collect();
    let pisot_number = is_pisot_number(&poly, global.precision).map_err(alg)?;
    let perron = is_perron_root(&poly, global.precision).map_err(alg)?;

    let mut selections: Vec<Vec<usize>> = Vec::new();
    for s in select {
        let idx = s
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| Failure::Parse(format!("bad index {x:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if idx.iter().any(|&k| k == 0 || k > roots.len()) {
            return Err(Failure::Parse(format!("selection {s:?} is out of range 1..={}", roots.len())));
        }
        selections.push(idx);
    }
    if selections.is_empty() {
        // Default: every root outside the unit disc.
        let outside: Vec<usize> =
            (1..=order.len()).filter(|&k| roots.roots[order[k - 1]].value.norm() > 1.0).collect();
        if !outside.is_empty() {
            selections.push(outside);
        }
    }
    let mut undecidable = false;
    let mut rows = Vec::new();
    for idx in selections {
        let sel = SpectrumSelection::new(poly.clone(), roots.clone(), idx.iter().map(|&k| order[k - 1]), 1)
            .map_err(|e| Failure::Parse(e.to_string()))?;
        let v = is_pisot_family(&sel, global.precision);
        undecidable |= v == Verdict::Undecidable;
        rows.push(json!({"select": idx, "pisot_family": v}));
    }
    let out = json!({
        "poly": poly.to_decimal_strs(),
        "roots": table,
        "pisot_number": pisot_number,
        "perron": perron,
        "selections": rows,
    });
    let text = canonical(&out)?;
    prepare_out(&global.out)?;
    write_out(&global.out, "classify.json", &text)?;
    print!("{text}");
    if undecidable {
        return Err(Failure::Undecidable("a Pisot-family verdict is undecidable at this precision".into()));
    }
    Ok(())
}

fn cmd_expand(global: &Global, spec: &Path, k: usize, render: Option<&Path>) -> Result<(), Failure> {
    let rule = load_rule(spec)?;
    if render.is_some() && rule.dim() > 2 {
        return Err(Failure::Render(TilingError::RenderUnsupported { dim: rule.dim() }.to_string()));
    }
    prepare_out(&global.out)?;
    let (seed, power) = seed_patch(&rule, seed_label(global, &rule)?).map_err(tiling_failure)?;
    let patch = rule.expand(&seed, k, global.tile_cap).map_err(tiling_failure)?;
    write_out(&global.out, "patch.json", &canonical(&patch_to_json(&patch))?)?;
    if let Some(path) = render {
        let svg = render_svg(&rule, &patch).map_err(tiling_failure)?;
        fs::write(path, svg).map_err(|e| io_err(path, e))?;
    }
    let summary = json!({
        "tiles": patch.len(),
        "census": patch.census(rule.kappa()),
        "k": k,
        "seed_power": power,
    });
    print!("{}", canonical(&summary)?);
    Ok(())
}

fn cmd_spectrum(
    global: &Global,
    spec: &Path,
    n: usize,
    grid: &str,
    k_max: usize,
    gammas: &[String],
) -> Result<(), Failure> {
    let rule = load_rule(spec)?;
    let mut cfg = SpectrumConfig {
        k_max,
        grid: parse_grid(grid)?,
        tile_cap: global.tile_cap,
        seed_tile: seed_label(global, &rule)?,
        ..SpectrumConfig::default()
    };
    cfg.profile.n_max = n;
    for g in gammas {
        let v = parse_vector(g)?;
        if v.len() != rule.dim() {
            return Err(Failure::Parse(format!("wave vector {g:?} needs {} coordinates", rule.dim())));
        }
        cfg.extra.push(v.into());
    }
    prepare_out(&global.out)?;
    let run = run_spectrum(&rule, &cfg).map_err(|e| Failure::Internal(e.to_string()))?;
    let text = canonical(&run.to_report_json())?;
    write_out(&global.out, "report.json", &text)?;
    for (i, c) in run.report.candidates.iter().enumerate() {
        let keep = !matches!(c.candidate.provenance, Provenance::Grid) || c.accepted();
        if keep {
            let csv = decay_csv(&c.profile.eps, run.bounds[i].as_deref());
            write_out(&global.out, &format!("decay_{i:04}.csv"), &csv)?;
        }
    }
    print!("{text}");
    Ok(())
}

fn cmd_meyer(global: &Global, spec: &Path, windows: &[f64]) -> Result<(), Failure> {
    let rule = load_rule(spec)?;
    if windows.is_empty() || windows.iter().any(|w| !(*w > 0.0)) {
        return Err(Failure::Parse("windows must be positive".into()));
    }
    prepare_out(&global.out)?;
    let run = run_meyer(&rule, windows, global.tile_cap, seed_label(global, &rule)?).map_err(tiling_failure)?;
    let text = canonical(&run)?;
    write_out(&global.out, "meyer.json", &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_validate(spec: &Path) -> Result<(), Failure> {
    let rule = SubstitutionRule::from_json(&read(spec)?).map_err(tiling_failure)?;
    let report = rule.validate();
    let out = json!({
        "valid": report.valid,
        "violations": report.violations,
        "primitive": rule.is_primitive(),
        "substitution_matrix": rule.substitution_matrix(),
    });
    print!("{}", canonical(&out)?);
    if report.valid {
        Ok(())
    } else {
        Err(Failure::InvalidRule(format!("{} failed validation", spec.display())))
    }
}

fn cmd_product(global: &Global, first: &Path, second: &Path, name: &str) -> Result<(), Failure> {
    let a = load_rule(first)?;
    let b = load_rule(second)?;
    prepare_out(&global.out)?;
    let p = direct_product(&a, &b).map_err(tiling_failure)?;
    let text = serde_json::to_string_pretty(&p.to_spec()).map_err(|e| Failure::Internal(e.to_string()))?;
    write_out(&global.out, name, &(text + "\n"))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let res = match &cli.command {
        Command::Classify { poly_file, select } => cmd_classify(g, poly_file, select),
        Command::Expand { spec_file, k, render } => cmd_expand(g, spec_file, *k, render.as_deref()),
        Command::Spectrum { spec_file, n, grid, k_max, gamma } => cmd_spectrum(g, spec_file, *n, grid, *k_max, gamma),
        Command::Meyer { spec_file, windows } => cmd_meyer(g, spec_file, windows),
        Command::Validate { spec_file } => cmd_validate(spec_file),
        Command::Product { first, second, name } => cmd_product(g, first, second, name),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
