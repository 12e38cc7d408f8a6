use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cuntz_core::adjudicator::{diagonal_discrepancies, fit_correction, paper_suite, structural_suite, CorrectionFit, Report, Status, Verdict};
use cuntz_core::exact;
use cuntz_core::operators::{BlockSource, Direct};
use cuntz_core::spectral::{
    commutator_svd, diagonal_spectrum, heat_trace_with, projection_compare, variant_spectrum_with, CommutatorWith, DecayLaw,
    HeatTraceRow, SummabilityProfile, RESIDUAL_TOL,
};
use cuntz_core::states::{state_report, FrohlichEngine};
use cuntz_core::{GradeIndex, Variant, Word};
use serde::Serialize;

use crate::cache::BlockCache;
use crate::config::{Format, RunConfig, Suite};
use crate::error::CliError;

type Res<T> = Result<T, CliError>;

/// 17 significant digits.
fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(cfg: &RunConfig, text: &str) -> Res<()> {
    match &cfg.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn csv_text<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Res<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(anyhow::Error::from)?;
    for r in rows {
        w.serialize(r).map_err(anyhow::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

/// Blocks from the on-disk cache when one is configured.
pub struct Source {
    cache: Option<BlockCache>,
}

impl Source {
    pub fn new(cfg: &RunConfig) -> Res<Self> {
        let cache = cfg.cache_dir.as_deref().map(BlockCache::open).transpose()?;
        Ok(Source { cache })
    }

    pub fn get(&self) -> &dyn BlockSource {
        match &self.cache {
            Some(c) => c,
            None => &Direct,
        }
    }

    pub fn log_totals(&self) {
        if let Some(c) = &self.cache {
            log::info!("cache totals hits={} misses={}", c.hits(), c.misses());
        }
    }
}

fn failures(vs: &[Verdict]) -> Vec<String> {
    vs.iter().filter(|v| !v.verified()).map(|v| v.id.clone()).collect()
}

pub fn verify(cfg: &RunConfig) -> Res<()> {
    let vs = structural_suite(cfg.alphabet, cfg.max_grade, cfg.exact_cap)?;
    let text = match cfg.format {
        Some(Format::Json) => Report::new(cfg.alphabet, cfg.max_grade, vs.clone()).to_json(),
        Some(Format::Csv) => verdict_csv(&vs)?,
        None => vs.iter().map(|v| format!("{:<9} {}\n", status_str(v.status), v.id)).collect(),
    };
    emit(cfg, &text)?;
    let bad = failures(&vs);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("structural suite failed: {}", bad.join(", "))))
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Refuted => "refuted",
        Status::Mixed => "mixed",
    }
}

fn verdict_csv(vs: &[Verdict]) -> Res<String> {
    let rows = vs.iter().flat_map(|v| {
        v.witnesses.iter().map(move |w| (&v.id, status_str(v.status), &w.input, &w.paper, &w.oracle, &w.residual))
    });
    csv_text(&["id", "status", "input", "paper", "oracle", "residual"], rows)
}

#[derive(Serialize)]
struct SpectrumRow {
    n: i64,
    k: usize,
    eigenvalue: f64,
    multiplicity: usize,
    /// Exact value for the diagonal variants.
    exact: Option<String>,
}

pub fn spectrum(cfg: &RunConfig, src: &Source) -> Res<()> {
    let (al, var) = (cfg.alphabet, cfg.variant);
    let mut rows = Vec::new();
    for g in GradeIndex::all_up_to(cfg.max_grade) {
        if var.is_diagonal() {
            for (l, m) in diagonal_spectrum(al, var, g)? {
                let multiplicity = m.to_integer().to_string().parse().expect("integer multiplicity");
                rows.push(SpectrumRow { n: g.n, k: g.k, eigenvalue: exact::to_f64(&l), multiplicity, exact: Some(exact::to_string(&l)) });
            }
        } else {
            let s = variant_spectrum_with(src.get(), al, var, g, cfg.max_dim)?;
            if s.residual > RESIDUAL_TOL {
                return Err(CliError::Failed(format!("eigen-residual {} on block {g} exceeds {RESIDUAL_TOL}", s.residual)));
            }
            for (l, m) in s.multiplicities(1e-9) {
                rows.push(SpectrumRow { n: g.n, k: g.k, eigenvalue: l, multiplicity: m, exact: None });
            }
        }
    }
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&serde_json::json!({ "N": al.size(), "variant": var, "blocks": rows })),
        Format::Csv => csv_text(
            &["n", "k", "eigenvalue", "multiplicity"],
            rows.iter().map(|r| (r.n, r.k, f17(r.eigenvalue), r.multiplicity)),
        )?,
    };
    emit(cfg, &text)
}

pub fn heat_trace(cfg: &RunConfig, src: &Source) -> Res<()> {
    let rows: Vec<HeatTraceRow> = heat_trace_with(src.get(), cfg.alphabet, cfg.variant, &cfg.t_grid, cfg.max_grade, cfg.max_dim)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows),
        Format::Csv => csv_text(
            &["t", "partial_trace", "tail_bound", "monotone"],
            rows.iter().map(|r| (f17(r.t), f17(r.partial_trace), f17(r.tail_bound), r.monotone)),
        )?,
    };
    emit(cfg, &text)?;
    match rows.iter().find(|r| !r.monotone) {
        Some(r) => Err(CliError::Failed(format!("heat trace at t = {} is not monotone in grade", r.t))),
        None => Ok(()),
    }
}

pub fn frohlich(cfg: &RunConfig, src: &Source) -> Res<()> {
    let eng = FrohlichEngine::new_with(src.get(), cfg.alphabet, cfg.variant, cfg.max_grade, cfg.max_dim)?;
    let report = state_report(&eng, &cfg.t_grid, 1, 2)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&report),
        Format::Csv => {
            let rows = report.values.iter().flat_map(|(rho, sigma, vals)| {
                cfg.t_grid.iter().zip(vals).map(move |(t, v)| (cfg.variant.as_str(), f17(*t), rho, sigma, f17(v.value), f17(v.error_bound)))
            });
            csv_text(&["variant", "t", "rho", "sigma", "value", "error_bound"], rows)?
        }
    };
    emit(cfg, &text)?;
    if cfg.variant.is_diagonal() && !report.factors_through_expectation {
        return Err(CliError::Failed("off-diagonal state values are not exactly zero".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct CommutatorEntry {
    with: String,
    rho: String,
    sigma: String,
    profile: SummabilityProfile,
}

pub fn commutators(cfg: &RunConfig) -> Res<()> {
    let (rho, sigma) = (Word::new(vec![1]), Word::empty());
    let entries = [("P_F", CommutatorWith::Phase), (cfg.variant.as_str(), CommutatorWith::Dirac(cfg.variant))]
        .into_iter()
        .map(|(name, with)| {
            let profile = commutator_svd(cfg.alphabet, with, &rho, &sigma, cfg.max_grade, &[0.5, 1.0])?;
            Ok(CommutatorEntry { with: name.to_string(), rho: rho.to_string(), sigma: sigma.to_string(), profile })
        })
        .collect::<Res<Vec<_>>>()?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&entries),
        Format::Csv => csv_text(
            &["with", "rho", "sigma", "index", "singular_value"],
            entries.iter().flat_map(|e| {
                e.profile.singular_values.iter().enumerate().map(move |(i, s)| (&e.with, &e.rho, &e.sigma, i, f17(*s)))
            }),
        )?,
    };
    emit(cfg, &text)
}

fn fit_for(cfg: &RunConfig) -> Res<CorrectionFit> {
    Ok(fit_correction(&diagonal_discrepancies(cfg.alphabet, cfg.max_grade, cfg.max_dim)?))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn adjudicate(cfg: &RunConfig) -> Res<()> {
    let mut verdicts = Vec::new();
    let mut structural_bad = Vec::new();
    if cfg.suites.contains(&Suite::Structural) {
        let vs = structural_suite(cfg.alphabet, cfg.max_grade, cfg.exact_cap)?;
        structural_bad = failures(&vs);
        verdicts.extend(vs);
    }
    if cfg.suites.contains(&Suite::Paper) {
        verdicts.extend(paper_suite(cfg.alphabet, cfg.max_grade, cfg.exact_cap, cfg.max_dim)?);
    }
    let fit = if cfg.suites.contains(&Suite::Fit) { Some(fit_for(cfg)?) } else { None };
    if verdicts.is_empty() {
        // fit only
        emit(cfg, &json(fit.as_ref().expect("a suite was selected")))?;
        return Ok(());
    }
    let report = Report::new(cfg.alphabet, cfg.max_grade, verdicts);
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json(),
        Format::Csv => verdict_csv(&report.verdicts)?,
    };
    emit(cfg, &text)?;
    if let Some(fit) = fit {
        match &cfg.out {
            Some(out) => fs::write(sibling(out, "fit.json"), json(&fit))?,
            None => log::warn!("the fit suite needs --out when combined with other suites; skipped"),
        }
    }
    if structural_bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("structural suite failed: {}", structural_bad.join(", "))))
    }
}

fn law_str(l: &DecayLaw) -> String {
    match l {
        DecayLaw::FiniteRank { rank } => format!("finite rank {rank}"),
        DecayLaw::Geometric { rate, constant } => format!("geometric, rate {rate:.6}, constant {constant:.6}"),
        DecayLaw::None => "none (zero)".into(),
    }
}

pub fn report(cfg: &RunConfig, src: &Source) -> Res<()> {
    let (al, g) = (cfg.alphabet, cfg.max_grade);
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "# cuntz report: N = {}, max grade {g}\n", al.size()).unwrap();

    let structural = structural_suite(al, g, cfg.exact_cap)?;
    let paper = paper_suite(al, g, cfg.exact_cap, cfg.max_dim)?;
    for (title, vs) in [("Structural suite", &structural), ("Printed claims", &paper)] {
        writeln!(w, "## {title}\n").unwrap();
        for v in vs.iter() {
            writeln!(w, "- {:<9} {}", status_str(v.status), v.id).unwrap();
            if let Some(x) = v.witnesses.first().filter(|_| !v.verified()) {
                writeln!(w, "    first witness: {}: printed {}, oracle {}, residual {}", x.input, x.paper, x.oracle, x.residual).unwrap();
            }
        }
        writeln!(w).unwrap();
    }

    let fit = fit_for(cfg)?;
    writeln!(w, "## Diagonal correction to the printed T (oracle minus printed)\n").unwrap();
    for c in &fit.classes {
        let terms = if c.terms.is_empty() {
            "0".to_string()
        } else {
            c.terms.iter().map(|t| format!("({})·{}", t.coefficient, t.name)).collect::<Vec<_>>().join(" + ")
        };
        writeln!(w, "- {}: {terms} (residual {})", c.class, c.residual).unwrap();
    }
    writeln!(w).unwrap();

    writeln!(w, "## Positive projection against the Fock projection\n").unwrap();
    for var in Variant::ALL {
        let rows = projection_compare(al, var, g, cfg.exact_cap, cfg.max_dim)?;
        let off: Vec<String> = rows.iter().filter(|r| r.difference != 0).map(|r| format!("{}: {:+}", r.grade, r.difference)).collect();
        let verdict = if off.is_empty() { "matches in every block".to_string() } else { off.join(", ") };
        writeln!(w, "- {var}: {verdict}").unwrap();
    }
    writeln!(w).unwrap();

    writeln!(w, "## Heat traces\n").unwrap();
    for var in [Variant::DKappa, Variant::DTilde] {
        for r in heat_trace_with(src.get(), al, var, &cfg.t_grid, g, cfg.max_dim)? {
            writeln!(
                w,
                "- {var}, t = {}: partial trace {}, tail bound {}, monotone {}",
                f17(r.t),
                f17(r.partial_trace),
                f17(r.tail_bound),
                r.monotone
            )
            .unwrap();
        }
    }
    writeln!(w).unwrap();

    writeln!(w, "## Commutators with S_1\n").unwrap();
    for (name, with) in [("P_F", CommutatorWith::Phase), (cfg.variant.as_str(), CommutatorWith::Dirac(cfg.variant))] {
        let p = commutator_svd(al, with, &Word::new(vec![1]), &Word::empty(), g, &[0.5, 1.0])?;
        writeln!(w, "- [{name}, S_1]: {} singular values, decay {}", p.singular_values.len(), law_str(&p.law)).unwrap();
    }

    emit(cfg, &s)?;
    let bad = failures(&structural);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("structural suite failed: {}", bad.join(", "))))
    }
}
