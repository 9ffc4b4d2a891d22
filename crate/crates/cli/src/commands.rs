use std::fmt::Write as _;

use serde_json::{json, Value};

use arank_core::format::serialize;
use arank_core::{
    analytic_rank, c_constant, c_lower_bounds, max_independent_set,
    rank_bounds, rank_exact, run_law, survey_gap, BiasValue, Budget, Engine, Error, FVector, Law,
    LowerBoundSource, PrimeField, RankKind, RankReport, RankValue, Tensor,
};

use crate::output::{fixed, json_num, Format, Report};
use crate::{Cli, Command, Kind, Method};

pub enum Failure {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let budget = Budget(cli.budget);
    let mut report = Report::new(cli.format);
    let code = match &cli.command {
        Command::Bias { input, method } => bias_cmd(&mut report, &input.load()?, *method, budget)?,
        Command::Arank { input } => arank_cmd(&mut report, &input.load()?, budget)?,
        Command::Constant { d, q } => constant_cmd(&mut report, *d, *q)?,
        Command::Rank { input, kind, bounds, .. } => {
            rank_cmd(&mut report, &input.load()?, *kind, *bounds, budget)?
        }
        Command::Maxindep { input } => maxindep_cmd(&mut report, &input.load()?)?,
        Command::Check { law, universe } => {
            let laws: Vec<Law> = if law == "all" {
                Law::ALL.to_vec()
            } else {
                vec![law.parse()?]
            };
            let mut jobs = Vec::new();
            for law in laws {
                for u in universe.for_law(law)? {
                    jobs.push((law, u));
                }
            }
            check_cmd(&mut report, &jobs, budget)?
        }
        Command::Gen { p, n, d, seed, identity, diagonal } => {
            gen_cmd(&mut report, *p, *n, *d, *seed, *identity, diagonal.as_deref())?
        }
        Command::Survey { universe, out } => {
            let table = survey_cmd(cli.format, &universe.required()?, budget)?;
            match out {
                Some(path) => {
                    std::fs::write(path, &table)?;
                    let rows = table.lines().count();
                    report.record(
                        format!("wrote {} to {}", rows, path.display()),
                        json!({"command": "survey", "lines": rows, "out": path.display().to_string()}),
                    );
                }
                None => {
                    print!("{table}");
                }
            }
            0
        }
    };
    report.print()?;
    Ok(code)
}

fn bias_json(b: &BiasValue) -> Value {
    json!({
        "bias": b.to_string(),
        "numerator": b.numerator().to_string(),
        "base": b.base(),
        "exponent": b.exponent(),
        "approx": json_num(b.to_f64()),
    })
}

fn bias_cmd(report: &mut Report, t: &Tensor, method: Method, budget: Budget) -> Outcome {
    let engine = match method {
        Method::Fiber => Some(Engine::Fiber),
        Method::Recursive => Some(Engine::Recursive),
        Method::Histogram => Some(Engine::Histogram),
        Method::All => None,
    };
    if let Some(engine) = engine {
        let b = engine.run(t, budget)?;
        let mut j = bias_json(&b);
        j["command"] = json!("bias");
        j["method"] = json!(engine.name());
        report.record(format!("bias: {b}\napprox: {}", fixed(b.to_f64())), j);
        return Ok(0);
    }
    let mut results = Vec::new();
    for engine in Engine::ALL {
        if engine == Engine::Recursive && t.order() < 2 {
            continue;
        }
        results.push((engine, engine.run(t, budget)?));
    }
    let agree = results.windows(2).all(|w| w[0].1 == w[1].1);
    let mut text = String::new();
    let mut engines = Vec::new();
    for (engine, b) in &results {
        writeln!(text, "{}: {b}", engine.name()).unwrap();
        let mut j = bias_json(b);
        j["engine"] = json!(engine.name());
        engines.push(j);
    }
    if let Some((_, b)) = results.first() {
        writeln!(text, "approx: {}", fixed(b.to_f64())).unwrap();
    }
    writeln!(text, "engines agree: {}", if agree { "yes" } else { "NO" }).unwrap();
    report.record(
        text,
        json!({"command": "bias", "method": "all", "engines": engines, "agree": agree}),
    );
    Ok(if agree { 0 } else { 1 })
}

fn arank_cmd(report: &mut Report, t: &Tensor, budget: Budget) -> Outcome {
    let b = arank_core::bias(t, budget)?;
    let a = analytic_rank(&b);
    let mut j = bias_json(&b);
    j["command"] = json!("arank");
    j["arank"] = json_num(a.approx);
    report.record(format!("arank: {}\nbias: {b}", fixed(a.approx)), j);
    Ok(0)
}

fn constant_cmd(report: &mut Report, d: u32, q: u64) -> Outcome {
    let c = c_constant(d, q)?;
    let (always, large) = c_lower_bounds(d, q);
    let large_text = large.map_or("(trivial)".to_string(), fixed);
    report.record(
        format!(
            "c({d},{q}) = {}\nlower bound 2^-d: {}\nlower bound 1 - log(d-1)/log(q): {large_text}",
            fixed(c),
            fixed(always)
        ),
        json!({
            "command": "constant",
            "d": d,
            "q": q,
            "c": json_num(c),
            "bound_2_pow_minus_d": json_num(always),
            "bound_large_field": large.map(json_num),
        }),
    );
    Ok(0)
}

fn source_name(s: LowerBoundSource) -> &'static str {
    match s {
        LowerBoundSource::AnalyticRank => "arank-certified",
        LowerBoundSource::IndependentSet => "independent set, informational",
        LowerBoundSource::Search => "exhaustive search",
        LowerBoundSource::MatrixRank => "matrix rank",
    }
}

fn rank_text(r: &RankReport) -> String {
    let mut text = format!("{}: {}\n", r.kind, r.value);
    for lb in &r.lower_bounds {
        let extra = match (lb.source, &r.analytic_rank) {
            (LowerBoundSource::AnalyticRank, Some(a)) => format!(", arank = {}", fixed(a.approx)),
            _ => String::new(),
        };
        writeln!(text, "lower bound {} ({}{extra})", lb.value, source_name(lb.source)).unwrap();
    }
    writeln!(text, "upper bound {} (verified decomposition)", r.value.upper()).unwrap();
    writeln!(text, "certificate ({} terms):", r.certificate.len()).unwrap();
    for term in &r.certificate {
        writeln!(text, "  {}", term.describe()).unwrap();
    }
    text
}

fn rank_cmd(report: &mut Report, t: &Tensor, kind: Kind, bounds: bool, budget: Budget) -> Outcome {
    let kind = match kind {
        Kind::Rank => RankKind::Rank,
        Kind::Srank => RankKind::Srank,
        Kind::Prank => RankKind::Prank,
    };
    let r = if bounds {
        rank_bounds(t, kind, budget)?
    } else {
        rank_exact(t, kind, budget)?
    };
    let j = json!({
        "command": "rank",
        "kind": kind.name(),
        "exact": r.value.exact().is_some(),
        "lower": r.value.lower(),
        "upper": r.value.upper(),
        "lower_bounds": r.lower_bounds.iter().map(|b| json!({
            "source": source_name(b.source),
            "value": b.value,
        })).collect::<Vec<_>>(),
        "arank": r.analytic_rank.as_ref().map(|a| json_num(a.approx)),
        "certificate": r.certificate.iter().map(|c| c.describe()).collect::<Vec<_>>(),
    });
    report.record(rank_text(&r), j);
    // an interval under --exact means the search did not fit the budget
    Ok(if !bounds && matches!(r.value, RankValue::Bounds { .. }) { 3 } else { 0 })
}

fn maxindep_cmd(report: &mut Report, t: &Tensor) -> Outcome {
    let set = max_independent_set(t);
    let shown: Vec<String> = set.indices.iter().map(|i| i.to_string()).collect();
    let mut text = format!("independent set: {{{}}}\nsize: {}\n", shown.join(", "), set.len());
    let mut j = json!({"command": "maxindep", "set": set.indices, "size": set.len()});
    if t.order() >= 2 {
        let c = c_constant(t.order() as u32, t.field().order())?;
        let bound = c * set.len() as f64;
        writeln!(text, "arank lower bound c(d,q)|A|: {}", fixed(bound)).unwrap();
        j["c"] = json_num(c);
        j["arank_lower_bound"] = json_num(bound);
    }
    report.record(text, j);
    Ok(0)
}

fn check_cmd(report: &mut Report, jobs: &[(Law, arank_core::Universe)], budget: Budget) -> Outcome {
    let mut failed = 0;
    for (law, u) in jobs {
        let r = run_law(*law, u, budget)?;
        let mut text = format!(
            "{}: {} [{}] instances={} equalities={} violations={} min_slack={}\n",
            r.law,
            r.verdict,
            r.universe,
            r.instances,
            r.equalities,
            r.violations,
            r.min_slack.map_or("-".into(), fixed)
        );
        for note in &r.notes {
            let tag = if r.instances == 0 { "warning" } else { "note" };
            writeln!(text, "  {tag}: {note}").unwrap();
        }
        if let Some(w) = &r.witness {
            writeln!(text, "  witness:").unwrap();
            for line in w.lines() {
                writeln!(text, "    {line}").unwrap();
            }
        }
        let mut j = serde_json::to_value(&r).expect("serializable");
        j["command"] = json!("check");
        j["universe_text"] = json!(r.universe.to_string());
        if let Some(s) = r.min_slack {
            j["min_slack"] = json_num(s);
        }
        report.record(text, j);
        failed += !r.holds() as usize;
    }
    let summary = if failed == 0 {
        format!("all {} checks hold", jobs.len())
    } else {
        format!("{failed} of {} checks FAILED", jobs.len())
    };
    report.record(
        summary,
        json!({"command": "check", "summary": true, "checks": jobs.len(), "failed": failed}),
    );
    Ok(if failed == 0 { 0 } else { 1 })
}

fn gen_cmd(
    report: &mut Report,
    p: u64,
    n: Option<usize>,
    d: usize,
    seed: u64,
    identity: bool,
    diagonal: Option<&[u64]>,
) -> Outcome {
    let field = PrimeField::new(p)?;
    let need_n = || n.ok_or_else(|| Error::InvalidArgument("--n is required".into()));
    let t = if let Some(c) = diagonal {
        if let Some(n) = n {
            if n != c.len() {
                return Err(Error::InvalidArgument(format!(
                    "--n {n} but {} diagonal coefficients",
                    c.len()
                ))
                .into());
            }
        }
        Tensor::diagonal(field, c.len(), d, &FVector::from_u64s(field, c))?
    } else if identity {
        Tensor::identity(field, need_n()?, d)?
    } else {
        Tensor::random(field, need_n()?, d, seed)?
    };
    let text = serialize(&t);
    match report.format() {
        Format::Text => report.record(text, Value::Null),
        Format::Json => report.record(
            "",
            json!({
                "command": "gen",
                "p": p,
                "n": t.dim(),
                "d": d,
                "entries": t.nonzero_entries().map(|(i, v)| json!([i, v])).collect::<Vec<_>>(),
                "file": text,
            }),
        ),
    }
    Ok(0)
}

fn survey_cmd(format: Format, u: &arank_core::Universe, budget: Budget) -> Result<String, Failure> {
    let s = survey_gap(u, budget)?;
    let prank = |v: RankValue| match v {
        RankValue::Exact(r) => r.to_string(),
        RankValue::Bounds { lower, upper } => format!("{lower}..{upper}"),
    };
    let ratio = |lo: Option<f64>, hi: Option<f64>| match (lo, hi) {
        (Some(a), Some(b)) if a == b => fixed(a),
        (Some(a), Some(b)) => format!("{}..{}", fixed(a), fixed(b)),
        _ => String::new(),
    };
    let mut report = Report::new(format);
    if format == Format::Text {
        report.record("label,arank,prank,ratio", Value::Null);
    }
    for row in &s.rows {
        report.record(
            format!(
                "{},{},{},{}",
                row.label,
                fixed(row.arank),
                prank(row.prank),
                ratio(row.ratio_low, row.ratio_high)
            ),
            json!({
                "label": row.label,
                "arank": json_num(row.arank),
                "prank_lower": row.prank.lower(),
                "prank_upper": row.prank.upper(),
                "ratio_low": row.ratio_low.map(json_num),
                "ratio_high": row.ratio_high.map(json_num),
            }),
        );
    }
    if let Some(m) = s.max_ratio {
        report.record(
            format!("max_ratio,,,{}", fixed(m)),
            json!({"summary": true, "rows": s.rows.len(), "max_ratio": json_num(m)}),
        );
    }
    Ok(report.into_string())
}
