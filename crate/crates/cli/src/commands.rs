use std::fmt::Write as _;
use std::path::Path;

use dmn_core::bounds::{region_membership, BoundGrid, BoundMode, Cut, CutConstraint, RateTuple};
use dmn_core::gaussian::{
    codebook_experiment, neutralization_rate, separation_report, simulate_relay, source_block,
    CodebookConfig, CodebookMode, GaussianRelayConfig, Source,
};
use dmn_core::model::{
    enumerate_feasible_profiles, is_feasible, validate_spec, DelayProfile, NetworkSpec,
};
use dmn_core::networks::{self, BUNDLED_CODE};
use dmn_core::simulate::{
    bscfb_scheme, check_memoryless_markov, check_positive_delay_markov, equivalence_check,
    estimate_error, run_trial, BscfbConfig, ErrorReport, JointOptions, TableCode,
};
use dmn_core::{Error, Result};
use serde::Serialize;

use crate::{Command, Format, Outcome};

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn load_spec(path: &Path) -> Result<NetworkSpec> {
    NetworkSpec::from_json(&read(path)?)?.validated()
}

fn load_code(path: &Path, spec: &NetworkSpec) -> Result<dmn_core::simulate::Code> {
    TableCode::from_json(&read(path)?)?.to_code(spec)
}

pub fn run(command: Command, format: Format) -> Result<Outcome> {
    match command {
        Command::Validate(a) => validate(&a.spec, format),
        Command::Feasible { spec, profile, all } => {
            feasible(&load_spec(&spec.spec)?, profile.as_deref(), all, format)
        }
        Command::Bound {
            spec,
            mode,
            grid,
            cut,
            cap,
            points,
        } => bound(&load_spec(&spec.spec)?, mode, grid, cut, cap, points, format),
        Command::Region {
            spec,
            rates,
            mode,
            grid,
            cap,
        } => region(&load_spec(&spec.spec)?, &rates, mode, grid, cap, format),
        Command::Simulate {
            spec,
            code,
            trials,
            seed,
            trace,
        } => {
            let spec = load_spec(&spec.spec)?;
            let code = load_code(&code, &spec)?;
            if let Some(t) = trace {
                return Ok(Outcome::ok(run_trial(&spec, &code, seed, t)?.to_csv()));
            }
            let report = estimate_error(&spec, &code, trials, seed)?;
            Ok(Outcome::ok(error_report(&report, format)))
        }
        Command::Check { spec, code, cap } => {
            let spec = load_spec(&spec.spec)?;
            let code = load_code(&code, &spec)?;
            check(&spec, &code, cap, format)
        }
        Command::Bscfb {
            eps,
            n,
            rate,
            trials,
            seed,
            forward_code,
        } => bscfb(
            &BscfbConfig {
                eps,
                n,
                forward_rate: rate,
                trials,
                seed,
                forward_code,
            },
            format,
        ),
        Command::Gaussian {
            power,
            delta,
            rate,
            n,
            blocks,
            codebook_n,
            trials,
            explicit,
            codebook_cap,
            seed,
            report_only,
            trace,
        } => {
            let g = GaussianArgs {
                power,
                delta,
                rate,
                n,
                blocks,
                codebook_n,
                trials,
                mode: if explicit {
                    CodebookMode::Explicit { cap: codebook_cap }
                } else {
                    CodebookMode::Ensemble
                },
                seed,
            };
            match trace {
                Some(block) => gaussian_trace(&g, block),
                None => gaussian(&g, report_only, format),
            }
        }
        Command::Generate { name, eps } => generate(&name, eps),
    }
}

fn validate(path: &Path, format: Format) -> Result<Outcome> {
    let text = read(path)?;
    let report = match NetworkSpec::from_json(&text) {
        Ok(spec) => validate_spec(&spec),
        Err(Error::InvalidSpec(problems)) => {
            return Ok(Outcome {
                text: validation_text(problems.iter().map(String::as_str), format),
                code: 1,
            });
        }
        Err(e) => return Err(e),
    };
    let code = u8::from(!report.is_ok());
    let text = match format {
        Format::Json => json(&serde_json::json!({
            "ok": report.is_ok(),
            "violations": report.violations,
        })),
        _ => validation_text(report.violations.iter().map(|v| v.message.as_str()), format),
    };
    Ok(Outcome { text, code })
}

fn validation_text<'a>(problems: impl Iterator<Item = &'a str>, format: Format) -> String {
    let problems: Vec<&str> = problems.collect();
    match format {
        Format::Json => json(&serde_json::json!({ "ok": problems.is_empty(), "violations": problems })),
        Format::Csv => {
            let mut s = String::from("violation\n");
            for p in problems {
                let _ = writeln!(s, "\"{}\"", p.replace('"', "\"\""));
            }
            s
        }
        Format::Text if problems.is_empty() => "ok\n".into(),
        Format::Text => {
            let mut s = format!("{} violation(s)\n", problems.len());
            for p in problems {
                let _ = writeln!(s, "  - {p}");
            }
            s
        }
    }
}

fn feasible(spec: &NetworkSpec, profile: Option<&str>, all: bool, format: Format) -> Result<Outcome> {
    let rows: Vec<(String, bool)> = if all {
        enumerate_feasible_profiles(spec)
            .iter()
            .map(|p| (p.to_string(), true))
            .collect()
    } else {
        let p = DelayProfile::parse(profile.unwrap_or_default())?;
        if p.len() != spec.n_nodes() {
            return Err(Error::InvalidProfile(format!(
                "{p} has {} entries, network has {} nodes",
                p.len(),
                spec.n_nodes()
            )));
        }
        vec![(p.to_string(), is_feasible(spec, &p))]
    };
    let text = match format {
        Format::Json => json(
            &rows
                .iter()
                .map(|(p, f)| serde_json::json!({ "profile": p, "feasible": f }))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut s = String::from("profile,feasible\n");
            for (p, f) in &rows {
                let _ = writeln!(s, "\"{p}\",{f}");
            }
            s
        }
        Format::Text if all => {
            let mut s = format!("{} feasible profile(s)\n", rows.len());
            for (p, _) in &rows {
                let _ = writeln!(s, "  {p}");
            }
            s
        }
        Format::Text => {
            let (p, f) = &rows[0];
            format!("{p}: {}\n", if *f { "feasible" } else { "infeasible" })
        }
    };
    Ok(Outcome::ok(text))
}

fn terms_csv(c: &CutConstraint) -> String {
    let terms: Vec<String> = c.terms.iter().map(|&t| f6(t)).collect();
    format!("{},{},{}", c.cut.mask(), terms.join(","), f6(c.cap))
}

fn csv_header(n_terms: usize) -> String {
    let terms: Vec<String> = (1..=n_terms).map(|t| format!("term_{t}")).collect();
    format!("cut,{},cap", terms.join(","))
}

fn constraint_text(c: &CutConstraint) -> String {
    let terms: Vec<String> = c.terms.iter().map(|&t| f6(t)).collect();
    format!(
        "T={} (mask {}): cap {}  terms [{}]",
        c.cut,
        c.cut.mask(),
        f6(c.cap),
        terms.join(", ")
    )
}

fn bound(
    spec: &NetworkSpec,
    mode: BoundMode,
    k: u32,
    cut: Option<u64>,
    cap: u128,
    points: bool,
    format: Format,
) -> Result<Outcome> {
    let only = cut.map(|m| Cut::from_mask(m, spec.n_nodes())).transpose()?;
    let grid = BoundGrid::new(spec, mode, k, cap, only)?;
    let hull = grid.hull();
    let reports = if points { grid.all_reports() } else { Vec::new() };
    let n_terms = hull.rows.first().map_or(1, |r| r.constraint.terms.len());
    let text = match format {
        Format::Json => json(&serde_json::json!({ "hull": hull, "points": reports })),
        Format::Csv if points => {
            let mut s = format!("point,{}\n", csv_header(n_terms));
            for r in &reports {
                for c in &r.constraints {
                    let _ = writeln!(s, "{},{}", r.point.index, terms_csv(c));
                }
            }
            s
        }
        Format::Csv => {
            let mut s = format!("{}\n", csv_header(n_terms));
            for row in &hull.rows {
                let _ = writeln!(s, "{}", terms_csv(&row.constraint));
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "mode {mode}, grid 1/{k}, {} distributions\n",
                hull.points
            );
            if points {
                for r in &reports {
                    let _ = writeln!(s, "point {}", r.point);
                    for c in &r.constraints {
                        let _ = writeln!(s, "  {}", constraint_text(c));
                    }
                }
            }
            s.push_str("per-cut maxima (loose hull: each cut maximized separately)\n");
            for row in &hull.rows {
                let _ = writeln!(s, "  {}  at {}", constraint_text(&row.constraint), row.argmax);
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn region(
    spec: &NetworkSpec,
    rates: &str,
    mode: BoundMode,
    k: u32,
    cap: u128,
    format: Format,
) -> Result<Outcome> {
    let rates = RateTuple::parse(rates, spec.n_nodes())?;
    let m = region_membership(spec, &rates, mode, k, cap)?;
    let text = match format {
        Format::Json => json(&m),
        Format::Csv => {
            let mut s = String::from("verdict,point,");
            let n_terms = m.witness.as_ref().map_or(1, |w| w.constraints[0].terms.len());
            let _ = writeln!(s, "{}", csv_header(n_terms));
            match &m.witness {
                Some(w) => {
                    for c in &w.constraints {
                        let _ = writeln!(s, "{},{},{}", m.verdict, w.point.index, terms_csv(c));
                    }
                }
                None => {
                    let _ = writeln!(s, "{},,,,", m.verdict);
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "mode {}, grid 1/{}, {} distributions: {}\n",
                m.mode, m.resolution, m.points, m.verdict
            );
            if let Some(w) = &m.witness {
                let _ = writeln!(s, "witness {}", w.point);
                for c in &w.constraints {
                    let _ = writeln!(
                        s,
                        "  {}  rate sum {}",
                        constraint_text(c),
                        f6(rates.cut_sum(&c.cut))
                    );
                }
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn error_rows(report: &ErrorReport) -> Vec<String> {
    report
        .pairs
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{}",
                p.from,
                p.to,
                p.trials,
                p.errors,
                f6(p.estimate),
                f6(p.half_width)
            )
        })
        .collect()
}

fn error_report(report: &ErrorReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut s = String::from("from,to,trials,errors,estimate,half_width\n");
            for row in error_rows(report) {
                let _ = writeln!(s, "{row}");
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for p in &report.pairs {
                let _ = writeln!(
                    s,
                    "W{},{}: {} errors in {} trials, estimate {} (95% half-width {})",
                    p.from,
                    p.to,
                    p.errors,
                    p.trials,
                    f6(p.estimate),
                    f6(p.half_width)
                );
            }
            if report.pairs.is_empty() {
                s.push_str("no messages\n");
            }
            s
        }
    }
}

fn check(spec: &NetworkSpec, code: &dmn_core::simulate::Code, cap: u128, format: Format) -> Result<Outcome> {
    let opts = JointOptions {
        cap,
        parallel: true,
    };
    let memoryless = check_memoryless_markov(spec, code, opts)?;
    let (positive, equivalence) = if code.profile.is_positive() {
        (
            Some(check_positive_delay_markov(spec, code, opts)?),
            Some(equivalence_check(spec, code, opts)?),
        )
    } else {
        (None, None)
    };
    let text = match format {
        Format::Json => json(&serde_json::json!({
            "memoryless": memoryless,
            "positive_delay": positive,
            "equivalence_l1": equivalence,
        })),
        Format::Csv => {
            let mut s = String::from("check,slot,channel,value\n");
            for v in &memoryless {
                let _ = writeln!(s, "memoryless,{},{},{:.3e}", v.slot, v.channel, v.mi);
            }
            for v in positive.iter().flatten() {
                let _ = writeln!(s, "positive-delay,{},{},{:.3e}", v.slot, v.channel, v.mi);
            }
            if let Some(d) = equivalence {
                let _ = writeln!(s, "equivalence,,,{d:.3e}");
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let max = |v: &[dmn_core::simulate::MarkovValue]| {
                v.iter().map(|m| m.mi).fold(0.0, f64::max)
            };
            let _ = writeln!(s, "memoryless chain: max I = {:.3e} over {} checks", max(&memoryless), memoryless.len());
            match (&positive, equivalence) {
                (Some(p), Some(d)) => {
                    let _ = writeln!(s, "positive-delay chain: max I = {:.3e} over {} checks", max(p), p.len());
                    let _ = writeln!(s, "stepwise vs composed joint: L1 = {d:.3e}");
                }
                _ => {
                    let _ = writeln!(s, "profile {} has zero-delay nodes; positive-delay checks skipped", code.profile);
                }
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn bscfb(config: &BscfbConfig, format: Format) -> Result<Outcome> {
    let r = bscfb_scheme(config)?;
    let text = match format {
        Format::Json => json(&r),
        Format::Csv => {
            let mut s = String::from("eps,n,forward_capacity,forward_bits,r12,r21\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                f6(r.eps),
                r.n,
                f6(r.forward_capacity),
                r.forward_bits,
                f6(r.achieved.0),
                f6(r.achieved.1)
            );
            s.push_str(&error_report(&r.errors, Format::Csv));
            s
        }
        Format::Text => {
            let mut s = format!(
                "eps {}, n {}, forward capacity 1-H(eps) = {}\n",
                f6(r.eps),
                r.n,
                f6(r.forward_capacity)
            );
            let _ = writeln!(
                s,
                "forward bits {}, rate pair (R12, R21) = ({}, {})",
                r.forward_bits,
                f6(r.achieved.0),
                f6(r.achieved.1)
            );
            s.push_str(&error_report(&r.errors, Format::Text));
            s
        }
    };
    Ok(Outcome::ok(text))
}

struct GaussianArgs {
    power: f64,
    delta: f64,
    rate: f64,
    n: usize,
    blocks: u64,
    codebook_n: Vec<usize>,
    trials: u64,
    mode: CodebookMode,
    seed: u64,
}

fn gaussian_trace(g: &GaussianArgs, block: u64) -> Result<Outcome> {
    let config = GaussianRelayConfig::new(g.power, g.n, g.seed)?;
    let source = source_block(&config, Source::Gaussian { delta: g.delta }, block)?;
    Ok(Outcome::ok(simulate_relay(&config, &source, block)?.to_csv()))
}

fn gaussian(g: &GaussianArgs, report_only: bool, format: Format) -> Result<Outcome> {
    let sep = separation_report(g.power, g.rate)?;
    let (gate, sweep) = if report_only {
        (None, Vec::new())
    } else {
        let config = GaussianRelayConfig::new(g.power, g.n, g.seed)?;
        let gate = neutralization_rate(&config, Source::Gaussian { delta: g.delta }, g.blocks)?;
        let sweep = g
            .codebook_n
            .iter()
            .map(|&n| {
                codebook_experiment(&CodebookConfig {
                    power: g.power,
                    delta: g.delta,
                    rate: g.rate,
                    n,
                    trials: g.trials,
                    seed: g.seed,
                    mode: g.mode,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (Some(gate), sweep)
    };
    let b = sep.bounds;
    let text = match format {
        Format::Json => json(&serde_json::json!({
            "separation": sep,
            "gate": gate,
            "codebook": sweep,
        })),
        Format::Csv => {
            let mut s = String::from("power,positive_delay_cap,achievable_rate,separated,target_rate,demonstrated\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                f6(b.power),
                f6(b.positive_delay_cap),
                f6(b.achievable_rate),
                b.separated,
                f6(sep.target_rate),
                sep.demonstrated
            );
            if let Some(gate) = &gate {
                s.push_str("n,blocks,open_fraction,source_compliance,max_relay_load\n");
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    g.n,
                    gate.blocks,
                    f6(gate.open_fraction),
                    f6(gate.source_compliance),
                    f6(gate.max_relay_load)
                );
            }
            if !sweep.is_empty() {
                s.push_str("n,rate,log2_codewords,trials,errors,block_error_rate,half_width\n");
                for r in &sweep {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        r.n,
                        f6(r.rate),
                        r.log2_codewords,
                        r.trials,
                        r.errors,
                        f6(r.block_error_rate),
                        f6(r.half_width)
                    );
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!("P = {}\n", f6(b.power));
            let _ = writeln!(s, "positive-delay cap 1/2 log2(3+2P/5) = {}", f6(b.positive_delay_cap));
            let _ = writeln!(s, "zero-delay achievable 1/2 log2(1+2P) = {}", f6(b.achievable_rate));
            let _ = writeln!(s, "separated={}", b.separated);
            let _ = writeln!(
                s,
                "target rate {}: above cap {}, below achievable {}, demonstrated={}",
                f6(sep.target_rate),
                sep.above_cap,
                sep.below_achievable,
                sep.demonstrated
            );
            if let Some(gate) = &gate {
                let _ = writeln!(
                    s,
                    "relay gate (n {}, delta {}, {} blocks): open {}, source within nP {}, max relay load {}",
                    g.n,
                    f6(g.delta),
                    gate.blocks,
                    f6(gate.open_fraction),
                    f6(gate.source_compliance),
                    f6(gate.max_relay_load)
                );
            }
            for r in &sweep {
                let _ = writeln!(
                    s,
                    "codebook n {} (2^{} words, {} trials): block error {} (95% half-width {})",
                    r.n,
                    r.log2_codewords,
                    r.trials,
                    f6(r.block_error_rate),
                    f6(r.half_width)
                );
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn generate(name: &str, eps: Option<f64>) -> Result<Outcome> {
    if name == "sample-code" {
        return Ok(Outcome::ok(BUNDLED_CODE.to_string()));
    }
    let spec = match eps {
        Some(e) => networks::generate(name, e)?,
        None => networks::bundled(name)?,
    };
    Ok(Outcome::ok(spec.to_json()))
}
