//! Command-line front end: builtin models or complex documents in, invariants
//! and verification reports out, every number stamped with its conventions.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use torsionlab::document::{format_float, ComplexDocument, ConventionRecord, ResultDocument};
use torsionlab::models::{
    circle_model, equivariant_circle, interval_model, moore_model, point_model, product_model,
    ActionKind, CellModel,
};
use torsionlab::verify::run_suite;
use torsionlab::zchain::{
    cellular_structure, harmonic_structure_of, integral_homology, integral_structure,
    structured_torsion,
};
use torsionlab::zeta::{
    circle_analytic, dodziuk_patodi_table, interval_analytic, rho_an, IntervalSpectrum,
};
use torsionlab::{Result, TorsionError};

#[derive(Parser)]
#[command(name = "torsionlab", version, about = "Torsion invariants of cellular models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute an invariant of a builtin model or a complex document
    Compute {
        /// builtin model (interval, circle, torus, moore, point, s1-conj,
        /// s1-antipodal) or path to a complex document
        model: String,
        #[arg(value_enum)]
        invariant: Invariant,
        /// volume of the model (or of the first torus factor)
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// volume of the second torus factor (defaults to --mu)
        #[arg(long)]
        mu2: Option<f64>,
        /// number of cells per circle / subdivisions of the interval
        #[arg(long, default_value_t = 8)]
        subdiv: usize,
        /// order of the cyclic group realized by the moore model
        #[arg(long, default_value_t = 2)]
        m: u64,
        /// restrict the report to one degree
        #[arg(long)]
        degree: Option<i64>,
        /// homology structure for the structured torsion
        #[arg(long, value_enum)]
        structure: Option<StructureChoice>,
        /// 1-form eigenvalue multiplicity of the interval spectrum
        #[arg(long, value_enum, default_value_t = Multiplicity::Paper)]
        multiplicity: Multiplicity,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// override the rank-detection tolerance
        #[arg(long)]
        eps: Option<f64>,
        /// key=value file with tolerance overrides (flags win)
        #[arg(long)]
        config: Option<PathBuf>,
        /// write to a file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a named verification suite
    Verify {
        /// linalg, chain, zchain, manifold, cheeger-mueller, equivariant, all
        suite: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalue-convergence experiment for circle subdivisions
    Converge {
        #[arg(long, default_value = "circle")]
        model: String,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        mu: f64,
        /// comma-separated subdivision levels
        #[arg(long, default_value = "8,16,32,64")]
        levels: String,
        /// highest mode to track
        #[arg(long, default_value_t = 4)]
        modes: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a builtin model as a complex document
    Export {
        model: String,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        mu2: Option<f64>,
        #[arg(long, default_value_t = 8)]
        subdiv: usize,
        #[arg(long, default_value_t = 2)]
        m: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Invariant {
    Betti,
    Torsion,
    #[value(name = "rho-top")]
    RhoTop,
    #[value(name = "rho-an")]
    RhoAn,
    #[value(name = "rho-an-G", alias = "rho-an-g")]
    RhoAnG,
    #[value(name = "rho-top-G", alias = "rho-top-g")]
    RhoTopG,
    #[value(name = "rho-pd-G", alias = "rho-pd-g")]
    RhoPdG,
    Homology,
}

impl Invariant {
    fn name(self) -> &'static str {
        match self {
            Invariant::Betti => "betti",
            Invariant::Torsion => "torsion",
            Invariant::RhoTop => "rho-top",
            Invariant::RhoAn => "rho-an",
            Invariant::RhoAnG => "rho-an-G",
            Invariant::RhoTopG => "rho-top-G",
            Invariant::RhoPdG => "rho-pd-G",
            Invariant::Homology => "homology",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StructureChoice {
    Cellular,
    Integral,
    Harmonic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Multiplicity {
    /// two copies per eigenvalue (reproduces the quoted value ln 2μ)
    Paper,
    /// one copy per eigenvalue
    Displayed,
}

impl Multiplicity {
    fn convention(self) -> IntervalSpectrum {
        match self {
            Multiplicity::Paper => IntervalSpectrum::PaperValue,
            Multiplicity::Displayed => IntervalSpectrum::Displayed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            let code = match e {
                TorsionError::Unsupported(_)
                | TorsionError::UnsupportedHomology(_)
                | TorsionError::MissingFundamentalCycle => 3,
                _ => 2,
            };
            eprintln!("{}", json!({ "error": e.to_string(), "exit": code }));
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Cmd::Compute {
            model,
            invariant,
            mu,
            mu2,
            subdiv,
            m,
            degree,
            structure,
            multiplicity,
            format,
            eps,
            config,
            output,
        } => {
            apply_tolerances(config.as_deref(), eps)?;
            let params = ModelParams { mu, mu2, subdiv, m };
            let loaded = load_model(&model, &params)?;
            let doc = compute(&loaded, invariant, &params, degree, structure, multiplicity)?;
            emit(&render_result(&doc, format), output.as_deref())?;
            Ok(0)
        }
        Cmd::Verify { suite, format, eps, config, output } => {
            apply_tolerances(config.as_deref(), eps)?;
            let results = run_suite(&suite)?;
            let failed = results.iter().any(|r| !r.passed);
            emit(&render_verify(&suite, &results, format), output.as_deref())?;
            Ok(if failed { 1 } else { 0 })
        }
        Cmd::Converge { model, mu, levels, modes, format, eps, config, output } => {
            apply_tolerances(config.as_deref(), eps)?;
            if model != "circle" {
                return Err(TorsionError::Unsupported(format!(
                    "convergence experiments cover the circle, not `{model}`"
                )));
            }
            let levels = parse_levels(&levels)?;
            let table = dodziuk_patodi_table(mu, &levels, modes)?;
            emit(&render_converge(&table, format), output.as_deref())?;
            Ok(0)
        }
        Cmd::Export { model, mu, mu2, subdiv, m, output } => {
            let params = ModelParams { mu, mu2, subdiv, m };
            let doc = match load_model(&model, &params)? {
                Loaded::Cell(cell) => ComplexDocument::from_model(&cell),
                Loaded::Document(doc, _) => doc,
            };
            emit(&doc.to_json(), output.as_deref())?;
            Ok(0)
        }
    }
}

struct ModelParams {
    mu: f64,
    mu2: Option<f64>,
    subdiv: usize,
    m: u64,
}

enum Loaded {
    Cell(CellModel),
    /// parsed document together with its source path (for diagnostics)
    Document(ComplexDocument, String),
}

impl Loaded {
    fn name(&self) -> String {
        match self {
            Loaded::Cell(m) => m.name.clone(),
            Loaded::Document(_, path) => path.clone(),
        }
    }
}

fn load_model(name: &str, p: &ModelParams) -> Result<Loaded> {
    let cell = match name {
        "interval" => Some(interval_model(p.subdiv, p.mu)?),
        "circle" => Some(circle_model(p.subdiv, p.mu)?),
        "point" => Some(point_model()),
        "torus" => Some(product_model(
            &circle_model(p.subdiv, p.mu)?,
            &circle_model(p.subdiv, p.mu2.unwrap_or(p.mu))?,
        )?),
        "moore" => Some(moore_model(p.m)?),
        "s1-conj" => Some(equivariant_circle(ActionKind::Conjugation, p.subdiv, p.mu)?),
        "s1-antipodal" => Some(equivariant_circle(ActionKind::Antipodal, p.subdiv, p.mu)?),
        _ => None,
    };
    if let Some(cell) = cell {
        return Ok(Loaded::Cell(cell));
    }
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| {
            TorsionError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        return Ok(Loaded::Document(ComplexDocument::from_json(&text)?, name.to_string()));
    }
    Err(TorsionError::InvalidParameter(format!(
        "unknown model `{name}` (builtins: interval, circle, torus, moore, point, s1-conj, s1-antipodal; otherwise a document path)"
    )))
}

fn compute(
    loaded: &Loaded,
    invariant: Invariant,
    params: &ModelParams,
    degree: Option<i64>,
    structure: Option<StructureChoice>,
    multiplicity: Multiplicity,
) -> Result<ResultDocument> {
    let mut doc = ResultDocument::new(invariant.name(), &loaded.name());
    doc = doc
        .with_parameter("mu", json!(params.mu))
        .with_parameter("subdiv", json!(params.subdiv));
    if let Some(mu2) = params.mu2 {
        doc = doc.with_parameter("mu2", json!(mu2));
    }
    if let Some(d) = degree {
        doc = doc.with_parameter("degree", json!(d));
    }

    match invariant {
        Invariant::Betti => {
            let cx = match loaded {
                Loaded::Cell(m) => m.complex.realify(),
                Loaded::Document(d, _) => d.to_hilbert()?,
            };
            for n in degree_range(cx.min_degree(), cx.max_degree(), degree)? {
                doc = doc.with_value(&format!("betti_{n}"), json!(cx.betti(n)));
            }
        }
        Invariant::Homology => {
            let c = match loaded {
                Loaded::Cell(m) => m.complex.clone(),
                Loaded::Document(d, _) => d.to_zcomplex()?,
            };
            let homology = integral_homology(&c);
            for h in homology {
                if degree.is_some() && degree != Some(h.degree) {
                    continue;
                }
                let torsion: Vec<String> = h.torsion.iter().map(|t| t.to_string()).collect();
                doc = doc.with_value(
                    &format!("h_{}", h.degree),
                    json!({ "free_rank": h.free_rank, "torsion": torsion }),
                );
            }
        }
        Invariant::Torsion => {
            let value = match loaded {
                Loaded::Cell(m) => match structure {
                    None => m.complex.realify().torsion(),
                    Some(StructureChoice::Cellular) => {
                        structured_torsion(&m.complex, &cellular_structure(&m.complex))?
                    }
                    Some(StructureChoice::Integral) => {
                        structured_torsion(&m.complex, &integral_structure(&m.complex))?
                    }
                    Some(StructureChoice::Harmonic) => torsionlab::zchain::hilbert_structured_torsion(
                        &m.complex.realify(),
                        &torsionlab::manifold::harmonic_structure(m)?,
                        torsionlab::zchain::TorsionConvention::SELECTED,
                    )?,
                },
                Loaded::Document(d, _) => {
                    let c = d.to_zcomplex()?;
                    let cx = d.to_hilbert()?;
                    match structure {
                        None => match d.structure(&c)? {
                            Some(kappa) => torsionlab::zchain::hilbert_structured_torsion(
                                &cx,
                                &kappa,
                                torsionlab::zchain::TorsionConvention::SELECTED,
                            )?,
                            None => cx.torsion(),
                        },
                        Some(StructureChoice::Cellular) => {
                            structured_torsion(&c, &cellular_structure(&c))?
                        }
                        Some(StructureChoice::Integral) => {
                            structured_torsion(&c, &integral_structure(&c))?
                        }
                        Some(StructureChoice::Harmonic) => {
                            torsionlab::zchain::hilbert_structured_torsion(
                                &cx,
                                &harmonic_structure_of(&cx),
                                torsionlab::zchain::TorsionConvention::SELECTED,
                            )?
                        }
                    }
                }
            };
            if let Some(choice) = structure {
                let tag = match choice {
                    StructureChoice::Cellular => "cellular",
                    StructureChoice::Integral => "integral",
                    StructureChoice::Harmonic => "harmonic",
                };
                doc = doc.with_parameter("structure", json!(tag));
            }
            doc = doc.with_value("value", json!(value));
        }
        Invariant::RhoTop => {
            let m = require_cell(loaded, "rho-top")?;
            doc = doc.with_value("value", json!(torsionlab::manifold::rho_top(m)?));
        }
        Invariant::RhoAn => {
            let m = require_cell(loaded, "rho-an")?;
            // product names such as "circle[4] x circle[4]" share the prefix,
            // so exclude anything with factors before matching on the name
            let analytic = if m.factors.is_empty() && m.name.starts_with("circle") {
                circle_analytic(params.mu, params.subdiv)?
            } else if m.factors.is_empty() && m.name.starts_with("interval") {
                doc = doc.with_parameter(
                    "multiplicity",
                    json!(multiplicity.convention().multiplicity()),
                );
                interval_analytic(params.mu, params.subdiv, multiplicity.convention())?
            } else {
                return Err(TorsionError::Unsupported(format!(
                    "{}: analytic spectra are provided for the circle and the interval",
                    m.name
                )));
            };
            doc = doc.with_value("value", json!(rho_an(&analytic)));
        }
        Invariant::RhoAnG => {
            let m = require_equivariant(loaded, "rho-an-G")?;
            let v = torsionlab::equivariant::rho_an_g(m)?;
            doc = doc
                .with_value("[R]", json!(v.trivial))
                .with_value("[R-]", json!(v.sign));
        }
        Invariant::RhoTopG => {
            let m = require_equivariant(loaded, "rho-top-G")?;
            let v = torsionlab::equivariant::rho_top_g(m)?;
            doc = doc
                .with_value("[R]", json!(v.trivial))
                .with_value("[R-]", json!(v.sign));
        }
        Invariant::RhoPdG => {
            let m = require_equivariant(loaded, "rho-pd-G")?;
            let v = torsionlab::equivariant::rho_pd_g(m)?;
            doc = doc
                .with_value("[R]", json!(v.trivial))
                .with_value("[R-]", json!(v.sign));
        }
    }
    Ok(doc)
}

fn require_cell<'a>(loaded: &'a Loaded, invariant: &str) -> Result<&'a CellModel> {
    match loaded {
        Loaded::Cell(m) => Ok(m),
        Loaded::Document(_, path) => Err(TorsionError::Unsupported(format!(
            "{invariant} needs a builtin model with volume metadata; {path} is a bare complex"
        ))),
    }
}

fn require_equivariant<'a>(loaded: &'a Loaded, invariant: &str) -> Result<&'a CellModel> {
    let m = require_cell(loaded, invariant)?;
    if m.metadata.closed && m.metadata.dimension == 1 && m.factors.is_empty() {
        Ok(m)
    } else {
        Err(TorsionError::Unsupported(format!(
            "{invariant} is defined for the circle builtins (circle, s1-conj, s1-antipodal)"
        )))
    }
}

fn degree_range(lo: i64, hi: i64, filter: Option<i64>) -> Result<Vec<i64>> {
    match filter {
        None => Ok((lo..=hi).collect()),
        Some(d) if d >= lo && d <= hi => Ok(vec![d]),
        Some(d) => Err(TorsionError::InvalidParameter(format!(
            "degree {d} outside the model's range [{lo}, {hi}]"
        ))),
    }
}

fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse::<usize>().map_err(|_| {
            TorsionError::InvalidParameter(format!("level `{part}` is not a positive integer"))
        })?);
    }
    if out.is_empty() {
        return Err(TorsionError::InvalidParameter("no subdivision levels given".into()));
    }
    Ok(out)
}

fn apply_tolerances(config: Option<&Path>, eps: Option<f64>) -> Result<()> {
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            TorsionError::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(TorsionError::InvalidParameter(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                )));
            };
            match key.trim() {
                "rank_eps" => {
                    let v: f64 = value.trim().parse().map_err(|_| {
                        TorsionError::InvalidParameter(format!(
                            "{}:{}: rank_eps is not a number",
                            path.display(),
                            lineno + 1
                        ))
                    })?;
                    torsionlab::tolerance::set_rank_eps(v);
                }
                other => {
                    return Err(TorsionError::InvalidParameter(format!(
                        "{}:{}: unknown tolerance key `{other}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
    }
    // flags win over the config file
    if let Some(v) = eps {
        torsionlab::tolerance::set_rank_eps(v);
    }
    Ok(())
}

fn float_cell(v: &serde_json::Value) -> String {
    if v.is_i64() || v.is_u64() {
        return v.to_string();
    }
    match v.as_f64() {
        Some(x) => format_float(x),
        None => v.to_string(),
    }
}

fn render_result(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Json => doc.to_json(),
        Format::Csv => {
            let mut out = String::from("key,value\n");
            out.push_str(&format!("invariant,{}\n", doc.invariant));
            out.push_str(&format!("model,{}\n", doc.model));
            for (k, v) in &doc.parameters {
                out.push_str(&format!("param.{k},{}\n", float_cell(v)));
            }
            for (k, v) in &doc.values {
                out.push_str(&format!("{k},{}\n", float_cell(v)));
            }
            out.push_str(&convention_csv(&doc.convention));
            out
        }
        Format::Text => {
            let mut out = format!("{} of {}\n", doc.invariant, doc.model);
            if !doc.parameters.is_empty() {
                let params: Vec<String> =
                    doc.parameters.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                out.push_str(&format!("  parameters: {}\n", params.join(", ")));
            }
            for (k, v) in &doc.values {
                out.push_str(&format!("  {k} = {}\n", float_cell(v)));
            }
            out.push_str(&convention_text(&doc.convention));
            out
        }
    }
}

fn render_verify(
    suite: &str,
    results: &[torsionlab::verify::CheckResult],
    format: Format,
) -> String {
    let convention = ConventionRecord::current();
    match format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = results
                .iter()
                .map(|r| {
                    json!({
                        "suite": r.suite,
                        "check": r.name,
                        "residual": r.residual,
                        "tolerance": r.tolerance,
                        "passed": r.passed,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({
                "suite": suite,
                "results": rows,
                "convention": convention,
                "version": env!("CARGO_PKG_VERSION"),
            }))
            .expect("report serializes")
        }
        Format::Csv => {
            let mut out = String::from("suite,check,residual,tolerance,passed\n");
            for r in results {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.suite,
                    r.name,
                    format_float(r.residual),
                    format_float(r.tolerance),
                    r.passed
                ));
            }
            out.push_str(&convention_csv(&convention));
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in results {
                out.push_str(&format!(
                    "{} {:<14} {:<62} residual {:>12.3e} (tolerance {:.0e})\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.suite,
                    r.name,
                    r.residual,
                    r.tolerance
                ));
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            out.push_str(&format!(
                "{} checks, {} failed\n",
                results.len(),
                failed
            ));
            out.push_str(&convention_text(&convention));
            out
        }
    }
}

fn render_converge(table: &torsionlab::zeta::DpTable, format: Format) -> String {
    let convention = ConventionRecord::current();
    match format {
        Format::Json => {
            let mut rows: Vec<serde_json::Value> = Vec::new();
            for &level in &table.levels {
                rows.push(json!({
                    "level": level, "mode": 0,
                    "combinatorial": 0.0, "scaled": 0.0,
                    "analytic": 0.0, "relative_error": 0.0,
                }));
            }
            for r in &table.rows {
                rows.push(json!({
                    "level": r.level, "mode": r.mode,
                    "combinatorial": r.combinatorial, "scaled": r.scaled,
                    "analytic": r.analytic, "relative_error": r.relative_error,
                }));
            }
            let orders: Vec<serde_json::Value> = table
                .orders
                .iter()
                .map(|(mode, order)| json!({ "mode": mode, "order": order }))
                .collect();
            serde_json::to_string_pretty(&json!({
                "mu": table.mu,
                "levels": table.levels,
                "rows": rows,
                "fitted_orders": orders,
                "convention": convention,
                "version": env!("CARGO_PKG_VERSION"),
            }))
            .expect("table serializes")
        }
        Format::Csv => {
            let mut out = String::from("level,mode,combinatorial,scaled,analytic,relative_error\n");
            for &level in &table.levels {
                // the constant mode is exact at every level
                out.push_str(&format!(
                    "{level},0,{},{},{},{}\n",
                    format_float(0.0),
                    format_float(0.0),
                    format_float(0.0),
                    format_float(0.0)
                ));
            }
            for r in &table.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.level,
                    r.mode,
                    format_float(r.combinatorial),
                    format_float(r.scaled),
                    format_float(r.analytic),
                    format_float(r.relative_error)
                ));
            }
            out.push('\n');
            out.push_str("mode,fitted_order\n");
            for (mode, order) in &table.orders {
                out.push_str(&format!("{mode},{}\n", format_float(*order)));
            }
            out.push('\n');
            out.push_str(&convention_csv(&convention));
            out
        }
        Format::Text => {
            let mut out = format!("eigenvalue convergence, μ = {}\n", table.mu);
            out.push_str(&format!(
                "{:>6} {:>5} {:>24} {:>24} {:>24}\n",
                "level", "mode", "scaled", "analytic", "rel. error"
            ));
            for r in &table.rows {
                out.push_str(&format!(
                    "{:>6} {:>5} {:>24} {:>24} {:>24}\n",
                    r.level,
                    r.mode,
                    format_float(r.scaled),
                    format_float(r.analytic),
                    format_float(r.relative_error)
                ));
            }
            for (mode, order) in &table.orders {
                out.push_str(&format!("mode {mode}: fitted order {order:.4}\n"));
            }
            out.push_str(&convention_text(&convention));
            out
        }
    }
}

fn convention_fields(c: &ConventionRecord) -> Vec<(&'static str, String)> {
    vec![
        ("rank_eps", format_float(c.rank_eps)),
        ("torsion_sign", c.torsion_sign.to_string()),
        ("torsion_direction", c.torsion_direction.clone()),
        ("harmonic_exponent_degree_zero", format_float(c.harmonic_exponent_degree_zero)),
        ("harmonic_exponent_top_degree", format_float(c.harmonic_exponent_top_degree)),
        ("interval_anchor_exponent", format_float(c.interval_anchor_exponent)),
        ("les_offset_additivity", c.les_offset_additivity.to_string()),
        ("les_offset_glueing", c.les_offset_glueing.to_string()),
        ("duality_sign", format_float(c.duality_sign)),
        ("interval_one_form_multiplicity", c.interval_one_form_multiplicity.to_string()),
    ]
}

fn convention_csv(c: &ConventionRecord) -> String {
    let mut out = String::new();
    for (k, v) in convention_fields(c) {
        out.push_str(&format!("convention.{k},{v}\n"));
    }
    out
}

fn convention_text(c: &ConventionRecord) -> String {
    let fields: Vec<String> =
        convention_fields(c).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# conventions: {}\n", fields.join(" "))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            TorsionError::InvalidParameter(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            let _ = handle.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = handle.write_all(b"\n");
            }
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            Ok(())
        }
    }
}
