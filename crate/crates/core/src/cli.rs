//! The `heightlab` command line. Every subcommand builds a [`Report`];
//! [`run`] renders it and maps errors to exit codes (2 parse, 3 no relative
//! monodromy filtration, 4 negative pairing, 5 precision failure, 1 other).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::arith::LogLinear;
use crate::document::{gaussian_text, Document};
use crate::error::HeightError;
use crate::experiments::{ga1_experiment, ga2_experiment, ExperimentConfig, Sweep};
use crate::geoheight::global_geometric_height;
use crate::hodge::{max_abs, HodgeContext, SplittingData, ZetaTable};
use crate::monodromy::{find_graded_splitting, hom_filtration_check, nbar, relative_monodromy_filtration, verify_rmf_axioms, NilpotentMap};
use crate::motives::{archimedean_place_height, global_height_wd, kummer_motive, total_height, ArchHodge, HeightValue, MotiveData, TotalOptions};
use crate::numeric::{with_precision, DEFAULT_BITS};
use crate::poly::RatFn;
use crate::qlinalg::{format_rational, parse_rational, Filtration, Q};
use crate::report::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "heightlab", version, about = "Height computations for mixed motives given by realization data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Working precision in bits for floating Hodge computations.
    #[arg(long, global = true, env = "HEIGHTLAB_PRECISION")]
    pub precision: Option<usize>,
    /// Coefficient table for the universal correction; a missing file falls
    /// back to the zero table with a warning.
    #[arg(long, global = true)]
    pub zeta_table: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Decimal places printed for real values.
    #[arg(long, global = true, default_value_t = 20)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Motive description document (TOML).
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeightPair {
    #[arg(long, allow_hyphen_values = true)]
    pub w: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
}

#[derive(Debug, Args)]
pub struct Samples {
    /// Family `a(T)`, e.g. `"T*(T-1)^2"` or `"(3T+1)/(T^2-2)"`.
    #[arg(long, allow_hyphen_values = true)]
    pub family: String,
    /// `farey:N`, `large:COUNT:LO:HI[:SEED]` or `converge:K`; repeatable.
    #[arg(long)]
    pub sweep: Vec<String>,
    /// Comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Drop samples with `max(|n|, |m|)` above this bound.
    #[arg(long)]
    pub height_cap: Option<BigUint>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub w: i64,
    #[arg(long, default_value_t = 2)]
    pub d: i64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative monodromy filtration of `N` at a finite place or degeneration point.
    Rmf {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        place: Option<String>,
    },
    /// Deligne splitting at a finite place, or the δ-splitting at an archimedean place.
    Split {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        place: Option<String>,
    },
    /// Geometric height `Σ_x deg(x) h_{w,d,x}` over the document's points.
    GeoHeight {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        wd: WeightPair,
    },
    /// Archimedean local heights.
    ArchHeight {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        wd: WeightPair,
        #[arg(long)]
        place: Option<String>,
    },
    /// Local and global heights of the Kummer motive of `a`.
    Kummer {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        w: i64,
        #[arg(long, default_value_t = 2)]
        d: i64,
    },
    /// Total height `Σ_{w, d >= 0} h_{w,d}` of a document or a Kummer motive.
    Total {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "input")]
        a: Option<String>,
        /// Skip `d = 1` instead of reducing it.
        #[arg(long)]
        skip_d1: bool,
    },
    /// Slope of `h_{w,d}(M(t))` against `h(t)` along a Kummer family.
    Ga1 {
        #[command(flatten)]
        samples: Samples,
    },
    /// Local height at `v` against `h_{w,d,x}(M) h_{x,v}(t)` as `t → x`.
    Ga2 {
        #[command(flatten)]
        samples: Samples,
        /// A prime, or `real`.
        #[arg(long)]
        place: String,
        /// A rational or `inf`.
        #[arg(long, allow_hyphen_values = true)]
        base: String,
    },
}

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn parse_q(s: &str, what: &str) -> Result<Q, HeightError> {
    parse_rational(s).ok_or_else(|| HeightError::Parse(format!("{what}: '{s}' is not a rational")))
}

fn value_cells(v: &HeightValue, digits: usize) -> [String; 2] {
    let exact = match &v.exact {
        Some(e) => e.to_string(),
        None => String::new(),
    };
    [v.value.to_decimal(digits), exact]
}

fn exact_text(e: &Option<LogLinear>) -> String {
    e.as_ref().map(|e| e.to_string()).unwrap_or_default()
}

fn monodromy_at(doc: &Document, place: Option<&str>) -> Result<(String, NilpotentMap), HeightError> {
    let label = match place {
        Some(p) => p.to_string(),
        None => doc
            .finite
            .first()
            .map(|e| e.label.clone())
            .or_else(|| doc.point.first().map(|e| e.label.clone()))
            .ok_or_else(|| HeightError::Parse("document has no finite place or degeneration point".into()))?,
    };
    let n = doc.monodromy(&label)?;
    Ok((label, n))
}

fn filtration_rows(r: &mut Report, f: &Filtration<Q>) {
    for k in f.weights() {
        let gens: Vec<String> = f
            .graded_piece(k)
            .lifts()
            .iter()
            .map(|v| format!("({})", v.iter().map(format_rational).collect::<Vec<_>>().join(", ")))
            .collect();
        r.row(vec![k.to_string(), f.step(k).dim().to_string(), gens.join(" ")]);
    }
}

fn rmf(doc: &Document, place: Option<&str>) -> Result<Report, HeightError> {
    let w = doc.weight_filtration()?;
    let (label, n) = monodromy_at(doc, place)?;
    let n = n.compatible_with(&w)?;
    let wp = relative_monodromy_filtration(&n, &w)?;
    let mut r = Report::new(format!("relative monodromy filtration at {label}"), &["j", "dim W'_j", "lifts of gr_j"]);
    filtration_rows(&mut r, &wp);
    r.sum("axioms", if verify_rmf_axioms(&n, &w, &wp).is_ok() { "hold" } else { "FAIL" });
    r.sum("Hom filtration check", hom_filtration_check(&n, &w, &wp)?.to_string());
    Ok(r)
}

fn gaussian_matrix_text(m: &crate::qlinalg::Matrix<crate::numeric::Gq>) -> String {
    let row = |r: &Vec<crate::numeric::Gq>| format!("[{}]", r.iter().map(gaussian_text).collect::<Vec<_>>().join(", "));
    m.row_vecs().iter().map(row).collect::<Vec<_>>().join(" ")
}

fn split(doc: &Document, place: Option<&str>, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let arch_label = match place {
        Some(p) if doc.arch.iter().any(|a| a.label == p) => Some(p.to_string()),
        None if doc.finite.is_empty() && doc.point.is_empty() => doc.arch.first().map(|a| a.label.clone()),
        _ => None,
    };
    if let Some(label) = arch_label {
        let m = doc.motive()?;
        let v = m.arch_places().iter().find(|v| v.label == label).expect("label from the document");
        let mut r = Report::new(format!("delta splitting at {label}"), &["p", "q", "max |delta_pq|"]);
        let (split, residual) = match &v.hodge {
            ArchHodge::Exact(h) => {
                let sd = SplittingData::compute(h, ctx)?;
                for ((p, q), c) in &sd.delta_components {
                    r.row(vec![p.to_string(), q.to_string(), max_abs(c).to_decimal(digits)]);
                }
                if sd.delta.rows() <= 4 {
                    r.sum("delta", gaussian_matrix_text(&sd.delta));
                }
                (sd.is_split(), sd.residual)
            }
            ArchHodge::Float(h) => {
                let sd = SplittingData::compute(h, ctx)?;
                for ((p, q), c) in &sd.delta_components {
                    r.row(vec![p.to_string(), q.to_string(), max_abs(c).to_decimal(digits)]);
                }
                (sd.is_split(), sd.residual)
            }
        };
        r.sum("R-split", split.to_string());
        r.sum("residual", residual.to_sci());
        return Ok(r);
    }
    let w = doc.weight_filtration()?;
    let (label, n) = monodromy_at(doc, place)?;
    let n = n.compatible_with(&w)?;
    let wp = relative_monodromy_filtration(&n, &w)?;
    let u = find_graded_splitting(&n, &w, &wp)?;
    let mut r = Report::new(format!("Deligne splitting at {label}"), &["w", "class of N_w"]);
    let lowest = w.weights().first().copied().unwrap_or(0) - w.weights().last().copied().unwrap_or(0);
    for k in (lowest..=-2).rev() {
        let c = nbar(&n, &w, &wp, k, Some(&u))?;
        r.row(vec![k.to_string(), format!("({})", c.iter().map(format_rational).collect::<Vec<_>>().join(", "))]);
    }
    r.sum("U' weights", format!("{:?}", u.weights()));
    Ok(r)
}

fn geo_height(doc: &Document, w: i64, d: i64, digits: usize) -> Result<Report, HeightError> {
    let gv = doc.variation()?;
    let gh = global_geometric_height(&gv, w, d)?;
    let mut r = Report::new(format!("geometric height h_{{{w},{d}}}"), &["point", "degree", "radicand", "local height"]);
    for (label, deg, h) in &gh.terms {
        let local = match h.exact() {
            Some(x) => format_rational(x),
            None => h.value().to_decimal(digits),
        };
        r.row(vec![label.clone(), deg.to_string(), format_rational(h.radicand()), local]);
    }
    r.sum("total", gh.value.to_decimal(digits));
    if let Some(x) = &gh.exact {
        r.sum("exact", format_rational(x));
    }
    Ok(r)
}

fn arch_height(m: &MotiveData, place: Option<&str>, w: i64, d: i64, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let mut r = Report::new(format!("archimedean heights h_{{{w},{d},v}}"), &["place", "kind", "value"]);
    let mut total = HeightValue::zero();
    let places: Vec<_> = m.arch_places().iter().filter(|v| place.is_none_or(|p| p == v.label)).collect();
    if places.is_empty() && place.is_some() {
        return Err(HeightError::Parse(format!("no archimedean place labelled '{}'", place.unwrap_or_default())));
    }
    for v in places {
        let h = archimedean_place_height(m, v, w, d, ctx)?;
        r.row(vec![v.label.clone(), format!("{:?}", v.kind).to_lowercase(), h.value.to_decimal(digits)]);
        total = total.add(&h);
    }
    r.sum("total", total.value.to_decimal(digits));
    Ok(r)
}

fn global(m: &MotiveData, title: String, w: i64, d: i64, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let (total, rows) = global_height_wd(m, w, d, ctx)?;
    let mut r = Report::new(title, &["place", "value", "exact"]);
    for row in rows {
        let [v, e] = value_cells(&row.value, digits);
        r.row(vec![row.place, v, e]);
    }
    r.sum("total", total.value.to_decimal(digits));
    if let Some(e) = &total.exact {
        r.sum("exact", e.to_string());
    }
    Ok(r)
}

fn total(m: &MotiveData, skip_d1: bool, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let rep = total_height(m, &TotalOptions { pure: None, skip_d1 }, ctx)?;
    let mut r = Report::new("total height", &["w", "d", "place", "value", "exact"]);
    for wd in &rep.per_wd {
        let [v, e] = value_cells(&wd.value, digits);
        r.row(vec![wd.w.to_string(), wd.d.to_string(), "all".into(), v, e]);
        for p in rep.per_place.iter().filter(|p| p.w == wd.w && p.d == wd.d) {
            let [v, e] = value_cells(&p.value, digits);
            r.row(vec![p.w.to_string(), p.d.to_string(), p.place.clone(), v, e]);
        }
        if let Some(n) = &wd.note {
            r.note(format!("(w, d) = ({}, {}): {n}", wd.w, wd.d));
        }
    }
    r.sum("total", rep.total.value.to_decimal(digits));
    if let Some(e) = &rep.total.exact {
        r.sum("exact", e.to_string());
    }
    Ok(r)
}

fn config(s: &Samples) -> Result<ExperimentConfig, HeightError> {
    let mut cfg = ExperimentConfig::new(RatFn::parse(&s.family)?);
    cfg.height_cap = s.height_cap.clone();
    Ok(cfg)
}

fn add_samples(mut cfg: ExperimentConfig, s: &Samples) -> Result<ExperimentConfig, HeightError> {
    for sw in &s.sweep {
        cfg = cfg.sweep(&sw.parse::<Sweep>()?)?;
    }
    if let Some(p) = &s.points {
        let pts = p.split(',').map(|x| parse_q(x, "--points")).collect::<Result<Vec<_>, _>>()?;
        cfg = cfg.points(&pts);
    }
    Ok(cfg)
}

fn ga1(s: &Samples, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let cfg = add_samples(config(s)?, s)?;
    let fit = ga1_experiment(&cfg, s.w, s.d, ctx)?;
    let mut r = Report::new(
        format!("GA1 for a(T) = {}, (w, d) = ({}, {})", cfg.family, s.w, s.d),
        &["t", "h(t)", "h(M(t))", "residual", "geometric residual"],
    );
    for row in &fit.rows {
        r.row(vec![
            format_rational(&row.t),
            row.h_t.eval().to_decimal(digits),
            row.h_m.value.to_decimal(digits),
            format!("{:.12e}", row.residual),
            row.geometric_residual.to_sci(),
        ]);
    }
    r.sum("samples", fit.sample_count.to_string());
    r.sum("geometric height", format_rational(&fit.geometric));
    r.sum("fitted slope", format!("{:.12}", fit.slope));
    r.sum("residual band", format!("[{:.12}, {:.12}]", fit.min_residual, fit.max_residual));
    r.sum("band width", format!("{:.12}", fit.band_width()));
    r.sum("geometric band", format!("[{}, {}]", fit.geometric_band.0.to_sci(), fit.geometric_band.1.to_sci()));
    Ok(r)
}

fn ga2(s: &Samples, place: &str, base: &str, ctx: &HodgeContext, digits: usize) -> Result<Report, HeightError> {
    let mut cfg = config(s)?;
    cfg.place = Some(place.parse()?);
    cfg.base = Some(base.parse()?);
    let cfg = add_samples(cfg, s)?;
    let res = ga2_experiment(&cfg, s.w, s.d, ctx)?;
    let mut r = Report::new(
        format!("GA2 for a(T) = {} at v = {}, x = {}", cfg.family, res.place, base),
        &["t", "h_v(M(t))", "h_x,v(t)", "residual", "exact residual"],
    );
    for row in &res.rows {
        r.row(vec![
            format_rational(&row.t),
            row.local.value.to_decimal(digits),
            row.h_xv.eval().to_decimal(digits),
            row.residual.value.to_decimal(digits),
            exact_text(&row.residual.exact),
        ]);
    }
    r.sum("geometric local height", format_rational(&res.geometric_local));
    r.sum("residuals vanish", res.residuals_vanish().to_string());
    Ok(r)
}

fn context(cli: &Cli, bits: usize, warnings: &mut Vec<String>) -> Result<HodgeContext, HeightError> {
    let mut ctx = HodgeContext { bits, ..HodgeContext::default() };
    if let Some(path) = &cli.zeta_table {
        let (table, warning) = ZetaTable::load(path)?;
        warnings.extend(warning);
        ctx = ctx.with_zeta(table);
    }
    Ok(ctx)
}

fn load(path: &PathBuf) -> Result<Document, HeightError> {
    Document::load(path)
}

fn dispatch(cli: &Cli, warnings: &mut Vec<String>) -> Result<Report, HeightError> {
    let digits = cli.digits;
    let doc = match &cli.command {
        Command::Rmf { input, .. } | Command::Split { input, .. } | Command::GeoHeight { input, .. } | Command::ArchHeight { input, .. } => {
            Some(load(&input.input)?)
        }
        Command::Total { input: Some(p), .. } => Some(load(p)?),
        _ => None,
    };
    let bits = cli.precision.or(doc.as_ref().and_then(|d| d.precision)).unwrap_or(DEFAULT_BITS);
    if bits < 64 {
        return Err(HeightError::Parse("--precision must be at least 64 bits".into()));
    }
    with_precision(bits, || {
        let ctx = context(cli, bits, warnings)?;
        match &cli.command {
            Command::Rmf { place, .. } => rmf(doc.as_ref().expect("loaded"), place.as_deref()),
            Command::Split { place, .. } => split(doc.as_ref().expect("loaded"), place.as_deref(), &ctx, digits),
            Command::GeoHeight { wd, .. } => geo_height(doc.as_ref().expect("loaded"), wd.w, wd.d, digits),
            Command::ArchHeight { wd, place, .. } => {
                arch_height(&doc.as_ref().expect("loaded").motive()?, place.as_deref(), wd.w, wd.d, &ctx, digits)
            }
            Command::Kummer { a, w, d } => {
                let a = parse_q(a, "--a")?;
                let m = kummer_motive(&a)?;
                global(&m, format!("Kummer motive of {}: h_{{{w},{d}}}", format_rational(&a)), *w, *d, &ctx, digits)
            }
            Command::Total { a, skip_d1, .. } => {
                let m = match (&doc, a) {
                    (Some(doc), _) => doc.motive()?,
                    (None, Some(a)) => kummer_motive(&parse_q(a, "--a")?)?,
                    (None, None) => MotiveData::zero(),
                };
                total(&m, *skip_d1, &ctx, digits)
            }
            Command::Ga1 { samples } => ga1(samples, &ctx, digits),
            Command::Ga2 { samples, place, base } => ga2(samples, place, base, &ctx, digits),
        }
    })
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut warnings = Vec::new();
    let result = dispatch(&cli, &mut warnings);
    let mut stderr: String = warnings.iter().map(|w| format!("{w}\n")).collect();
    match result {
        Ok(report) => Outcome { code: 0, stdout: report.render(cli.format), stderr },
        Err(e) => {
            stderr.push_str(&format!("error: {e}\n"));
            Outcome { code: e.exit_code(), stdout: String::new(), stderr }
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code)
}
