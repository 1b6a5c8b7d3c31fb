use std::path::{Path, PathBuf};

use bpc_core::comparison::{compare, information_criterion, pointwise_loglik, Criterion, IcEstimate};
use bpc_core::diagnostics::{convergence_report_with, Thresholds};
use bpc_core::io::{load_dataset, FitArchive, IngestSpec, PlayerCovariateSource, ResultSource, TieStrategy};
use bpc_core::posterior::{
    predict, probability_table, rank_distribution, summarize, summary_text, CovariateValue, IntervalKind, IntervalSpec,
    PredictQuery, SubjectMode,
};
use bpc_core::table::{fixed, sig12, Align, Table};
use bpc_core::{build_model, sample, CompiledModel, Error, ModelSpec, Result, SamplerConfig};
use serde::Serialize;

use crate::args::{
    ArchiveArgs, Cli, Command, CompareArgs, CriterionArgs, DataArgs, DiagnoseArgs, FitArgs, Format, PlotdataArgs,
    PredictArgs, SummaryArgs,
};

pub fn run(cli: &Cli) -> Result<String> {
    let f = cli.format;
    match &cli.command {
        Command::Fit(a) => fit(a, f),
        Command::Summary(a) => summary(a, f),
        Command::Ranks(a) => ranks(a, f),
        Command::Probabilities(a) => probabilities(a, f),
        Command::Predict(a) => predict_cmd(a, f),
        Command::Diagnose(a) => diagnose(a, f),
        Command::Waic(a) => criterion(a, Criterion::Waic, f),
        Command::Loo(a) => criterion(a, Criterion::Loo, f),
        Command::Compare(a) => compare_cmd(a, f),
        Command::Plotdata(a) => plotdata(a, f),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Text renders the aligned table, csv the delimited one, json the records.
fn emit<T: Serialize>(format: Format, table: &Table, records: &T) -> Result<String> {
    match format {
        Format::Text => Ok(table.to_text()),
        Format::Csv => Ok(table.to_delimited(b',')),
        Format::Json => json(records),
    }
}

fn ingest_spec(a: &DataArgs) -> Result<IngestSpec> {
    let delimiter = u8::try_from(a.delimiter)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Error::InvalidSpec(format!("delimiter '{}' must be a single ASCII character", a.delimiter)))?;
    // absolute paths keep the archive usable from another working directory
    let absolute = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    Ok(IngestSpec {
        path: absolute(&a.data),
        player0: a.player0.clone(),
        player1: a.player1.clone(),
        result: match (&a.score0, &a.score1) {
            (Some(s0), Some(s1)) => ResultSource::Scores { score0: s0.clone(), score1: s1.clone() },
            _ => ResultSource::Column(a.result.clone()),
        },
        subject: a.subject.clone(),
        order_indicator: a.order_column.clone(),
        covariates: a.covariates.clone(),
        player_covariates: a.player_covariates.as_ref().map(|p| PlayerCovariateSource {
            path: absolute(p),
            player_column: a.player_column.clone(),
            columns: Vec::new(),
        }),
        solve_ties: a.solve_ties.parse::<TieStrategy>()?,
        seed: a.tie_seed,
        delimiter,
    })
}

fn model_spec(a: &FitArgs) -> Result<ModelSpec> {
    let spec: ModelSpec = a.model.parse()?;
    let mut priors = spec.priors;
    let overrides = [
        (a.prior_lambda_sd, &mut priors.lambda, "lambda"),
        (a.prior_nu_sd, &mut priors.nu, "nu"),
        (a.prior_gamma_sd, &mut priors.gamma, "gamma"),
        (a.prior_beta_sd, &mut priors.beta, "beta"),
        (a.prior_s_sd, &mut priors.s, "S"),
        (a.prior_u_sd, &mut priors.u_std, "U"),
    ];
    for (sd, slot, name) in overrides {
        if let Some(sd) = sd {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::InvalidSpec(format!("prior sd for {name} must be positive, got {sd}")));
            }
            *slot = sd * sd;
        }
    }
    Ok(spec.with_priors(priors))
}

#[derive(Serialize)]
struct FitOutput<'a> {
    archive: &'a Path,
    model: String,
    contests: usize,
    players: usize,
    chains: usize,
    draws: usize,
    diagnostics: &'a bpc_core::diagnostics::ConvergenceReport,
}

fn fit(a: &FitArgs, format: Format) -> Result<String> {
    let spec = model_spec(a)?;
    let config = SamplerConfig {
        chains: a.chains,
        warmup: a.warmup,
        draws: a.draws,
        target_accept: a.target_accept,
        max_treedepth: a.max_treedepth,
        seed: a.seed,
        ..SamplerConfig::default()
    };
    config.validate()?;
    let ingest = ingest_spec(&a.data)?;
    let dataset = load_dataset(&ingest)?;
    let model = build_model(&dataset, &spec)?;
    let fit = sample(&model, &config)?;
    let report = convergence_report_with(&fit, Thresholds::default());
    let archive = FitArchive { fit, ingest: Some(ingest) };
    archive.save(&a.out)?;

    let out = FitOutput {
        archive: &a.out,
        model: spec.to_string(),
        contests: model.n_observations(),
        players: model.n_players(),
        chains: config.chains,
        draws: config.draws,
        diagnostics: &report,
    };
    match format {
        Format::Json => json(&out),
        _ => Ok(format!(
            "Fitted '{}' to {} contests between {} players ({} chains x {} draws).\nSaved fit to {}\n\n{}",
            out.model,
            out.contests,
            out.players,
            out.chains,
            out.draws,
            a.out.display(),
            report
        )),
    }
}

fn load(path: &Path) -> Result<FitArchive> {
    FitArchive::load(path)
}

fn summary(a: &SummaryArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive.archive)?;
    let kind = if a.interval == "hpd" { IntervalKind::Hpd } else { IntervalKind::EqualTailed };
    if !(a.mass > 0.0 && a.mass < 1.0) {
        return Err(Error::InvalidSpec(format!("--mass must lie in (0, 1), got {}", a.mass)));
    }
    let interval = IntervalSpec { kind, mass: a.mass };
    let fit = &archive.fit;
    match format {
        Format::Text if a.archive.decimals == 2 => Ok(summary_text(fit, interval)),
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                parameters: bpc_core::posterior::ParameterTable,
                probabilities: bpc_core::posterior::ProbabilityTable,
                ranks: bpc_core::posterior::RankSummary,
            }
            json(&Out {
                parameters: summarize(fit, interval),
                probabilities: probability_table(fit, SubjectMode::Average),
                ranks: rank_distribution(fit),
            })
        }
        _ => {
            let params = summarize(fit, interval);
            emit(format, &params.to_table(a.archive.decimals), &params)
        }
    }
}

fn ranks(a: &ArchiveArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive)?;
    let r = rank_distribution(&archive.fit);
    emit(format, &r.to_table(a.decimals), &r)
}

fn probabilities(a: &ArchiveArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive)?;
    let p = probability_table(&archive.fit, SubjectMode::Average);
    emit(format, &p.to_table(a.decimals), &p)
}

fn name_value(s: &str) -> Result<(String, f64)> {
    let (name, value) =
        s.split_once('=').ok_or_else(|| Error::InvalidSpec(format!("expected NAME=VALUE, got '{s}'")))?;
    let v: f64 = value.trim().parse().map_err(|_| Error::InvalidSpec(format!("'{value}' in '{s}' is not a number")))?;
    Ok((name.trim().to_string(), v))
}

fn predict_cmd(a: &PredictArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive)?;
    let mut query = PredictQuery::new(&a.player0, &a.player1).with_order_indicator(a.order_indicator);
    for c in &a.covariates {
        let (n, v) = name_value(c)?;
        query = query.with_covariate(n, CovariateValue::Raw(v));
    }
    for c in &a.std_covariates {
        let (n, v) = name_value(c)?;
        query = query.with_covariate(n, CovariateValue::Standardized(v));
    }
    let records = predict(&archive.fit, &[query], a.draws_per_row, a.seed)?;
    let davidson = archive.fit.info.spec.is_davidson();
    let d = a.decimals;

    let mut headers = vec!["player0", "player1"];
    if a.per_draw {
        headers.push("draw");
    }
    headers.extend(["p_player1_wins", "p_player0_wins"]);
    if davidson {
        headers.push("p_tie");
    }
    if a.per_draw {
        headers.push("outcome");
    }
    let mut align = vec![Align::Left, Align::Left];
    align.resize(headers.len(), Align::Right);
    let mut t = Table::new(&headers, &align).with_caption("Predicted outcome probabilities");
    for r in &records {
        let q = &r.query;
        if a.per_draw {
            for dr in &r.draws {
                let mut row = vec![q.player0.clone(), q.player1.clone(), dr.draw.to_string()];
                row.extend([fixed(dr.player1_wins, d), fixed(dr.player0_wins, d)]);
                if davidson {
                    row.push(fixed(dr.tie, d));
                }
                row.push(dr.outcome.code().to_string());
                t.push(row);
            }
        } else {
            let mut row =
                vec![q.player0.clone(), q.player1.clone(), fixed(r.player1_wins, d), fixed(r.player0_wins, d)];
            if davidson {
                row.push(fixed(r.tie, d));
            }
            t.push(row);
        }
    }
    emit(format, &t, &records)
}

fn diagnose(a: &DiagnoseArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive)?;
    let th = Thresholds { max_rhat: a.max_rhat, min_ess: a.min_ess, min_ebfmi: a.min_ebfmi };
    let report = convergence_report_with(&archive.fit, th);
    match format {
        Format::Text => Ok(report.to_string()),
        Format::Json => json(&report),
        Format::Csv => {
            let mut t = Table::new(&["parameter", "rhat", "ess"], &[Align::Left, Align::Right, Align::Right]);
            for p in &report.parameters {
                t.push(vec![p.name.clone(), p.rhat.map_or("NA".into(), sig12), p.ess.map_or("NA".into(), sig12)]);
            }
            Ok(t.to_delimited(b','))
        }
    }
}

/// Rebuilds the fitted model from the recorded (or overridden) data file.
fn model_for(archive: &FitArchive, data: Option<&PathBuf>) -> Result<CompiledModel> {
    let ingest = match (&archive.ingest, data) {
        (Some(spec), Some(path)) => IngestSpec { path: path.clone(), ..spec.clone() },
        (Some(spec), None) => spec.clone(),
        (None, Some(path)) => IngestSpec::new(path),
        (None, None) => {
            return Err(Error::InvalidSpec("the archive records no data file; pass --data".into()));
        }
    };
    let dataset = load_dataset(&ingest)?;
    build_model(&dataset, &archive.fit.info.spec)
}

fn estimate(path: &Path, data: Option<&PathBuf>, c: Criterion) -> Result<IcEstimate> {
    let archive = load(path)?;
    let model = model_for(&archive, data)?;
    let ll = pointwise_loglik(&model, &archive.fit)?;
    information_criterion(&ll, c)
}

fn estimate_table(e: &IcEstimate) -> Table {
    let mut t = Table::new(&["quantity", "estimate", "se"], &[Align::Left, Align::Right, Align::Right]);
    let labels = match e.criterion {
        Criterion::Waic => ["elpd_waic", "p_waic", "waic"],
        Criterion::Loo => ["elpd_loo", "p_loo", "looic"],
    };
    for (l, (v, se)) in labels.iter().zip([(e.elpd, e.elpd_se), (e.p_eff, e.p_eff_se), (e.ic, e.ic_se)]) {
        t.push(vec![l.to_string(), sig12(v), sig12(se)]);
    }
    t
}

fn criterion(a: &CriterionArgs, c: Criterion, format: Format) -> Result<String> {
    let e = estimate(&a.archive, a.data.as_ref(), c)?;
    match format {
        Format::Text => Ok(e.to_string()),
        Format::Csv => Ok(estimate_table(&e).to_delimited(b',')),
        Format::Json => json(&e),
    }
}

fn compare_cmd(a: &CompareArgs, format: Format) -> Result<String> {
    let c: Criterion = a.criterion.parse()?;
    let mut estimates = Vec::with_capacity(a.archives.len());
    for path in &a.archives {
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        estimates.push((name, estimate(path, a.data.as_ref(), c)?));
    }
    let cmp = compare(&estimates)?;
    match format {
        Format::Text => Ok(cmp.to_string()),
        Format::Json => json(&cmp),
        Format::Csv => {
            let mut t = Table::new(&["model", "elpd_diff", "se_diff", "elpd", "ic"], &[Align::Left; 5]);
            for r in &cmp.rows {
                t.push(vec![r.model.clone(), sig12(r.elpd_diff), sig12(r.se_diff), sig12(r.elpd), sig12(r.ic)]);
            }
            Ok(t.to_delimited(b','))
        }
    }
}

fn plotdata(a: &PlotdataArgs, format: Format) -> Result<String> {
    let archive = load(&a.archive)?;
    let fit = &archive.fit;
    let names = fit.info.layout.names();
    let selected: Vec<usize> = if a.parameters.is_empty() {
        (0..names.len()).collect()
    } else {
        a.parameters
            .iter()
            .map(|p| {
                fit.info
                    .layout
                    .index_of(p)
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown parameter '{p}'; see `bpc summary` for names")))
            })
            .collect::<Result<_>>()?
    };
    let by_param = fit.constrained_by_param();

    #[derive(Serialize)]
    struct Point<'a> {
        parameter: &'a str,
        chain: usize,
        draw: usize,
        value: f64,
    }
    let mut points = Vec::new();
    for &p in &selected {
        for (c, chain) in by_param[p].iter().enumerate() {
            for (d, &value) in chain.iter().enumerate() {
                points.push(Point { parameter: &names[p], chain: c + 1, draw: d + 1, value });
            }
        }
    }
    if format == Format::Json {
        return json(&points);
    }
    let mut t = Table::new(&["parameter", "chain", "draw", "value"], &[Align::Left; 4]);
    for pt in &points {
        t.push(vec![pt.parameter.to_string(), pt.chain.to_string(), pt.draw.to_string(), sig12(pt.value)]);
    }
    Ok(t.to_delimited(b','))
}
