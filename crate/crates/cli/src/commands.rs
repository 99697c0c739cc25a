use std::io::Write;

use cfskew_core::expectation::{
    click_probability, default_union_size, expected_item_neighbors, expected_item_similarity,
    expected_overlap_union, expected_similarity_user_pair, expected_user_neighbors,
    neighborhood_ratio, overlap_distribution, user_neighbors_literal_user_index,
};
use cfskew_core::export::{
    heatmap_svg, profile_svg, write_estimates_csv, write_heatmap_csv, write_profile_csv,
    write_similarity_csv, Envelope,
};
use cfskew_core::interactions::{build_interaction_matrix, generate_synthetic_log, ingest_lastfm_tsv};
use cfskew_core::montecarlo::{simulate_item_pair, simulate_neighborhoods, simulate_user_pair};
use cfskew_core::similarity::{neighborhood_sizes, pairwise_similarity, rank_binned_grid};
use cfskew_core::stats::log_log_slope;
use cfskew_core::{
    Axis, ClicksPerUser, EstimateReport, ExpectationConfig, GeneratorConfig, HeatmapGrid,
    ItemPairModel, Metric, Mode, NeighborVariant, NeighborhoodProfile, Norm,
    SimConfig, SimilarityMatrix,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{check_output, open_input, resolve_format, write_atomic, write_string};
use crate::{CliError, Result};

pub fn dispatch(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, stdout),
        Command::Generate(a) => generate(a, stdout),
        Command::Similarity(a) => similarity(a, stdout),
        Command::Heatmap(a) => heatmap(a, stdout),
        Command::Profile(a) => profile(a, stdout),
        Command::Expect(a) => expect(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Figures(a) => figures(a, stdout),
    }
}

fn say(stdout: &mut dyn Write, line: std::fmt::Arguments) -> Result<()> {
    writeln!(stdout, "{line}").map_err(|e| CliError::io("<stdout>", e))
}

fn cap(top_r: usize) -> Option<usize> {
    (top_r > 0).then_some(top_r)
}

fn json_text(envelope: &Envelope<Value>) -> Result<String> {
    envelope
        .to_json()
        .map_err(|e| CliError::Precondition(format!("JSON encoding failed: {e}")))
}

fn ingest(a: &IngestArgs, stdout: &mut dyn Write) -> Result<()> {
    let source = open_input(&a.input)?;
    check_output(&a.out)?;
    let outcome = ingest_lastfm_tsv(source)?;
    let log = &outcome.log;
    write_atomic(&a.out, |w| log.write_tsv(w))?;
    say(
        stdout,
        format_args!(
            "users={} items={} records={} skipped={} -> {}",
            log.distinct_users(),
            log.distinct_items(),
            log.len(),
            outcome.lines_skipped,
            a.out.display()
        ),
    )
}

fn generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<()> {
    check_output(&a.out)?;
    let config = GeneratorConfig {
        clicks: match a.user_exponent {
            Some(exponent) => ClicksPerUser::Zipf {
                max: a.clicks,
                exponent,
            },
            None => ClicksPerUser::Fixed { clicks: a.clicks },
        },
        inclusion: a.inclusion,
        ..GeneratorConfig::new(a.users, a.items, a.clicks, a.exponent, a.seed)
    };
    let log = generate_synthetic_log(&config)?;
    write_atomic(&a.out, |w| log.write_tsv(w))?;
    say(
        stdout,
        format_args!(
            "users={} items={} records={} seed={} -> {}",
            log.distinct_users(),
            log.distinct_items(),
            log.len(),
            a.seed,
            a.out.display()
        ),
    )
}

fn similarity_json(sim: &SimilarityMatrix, inputs: Value) -> Result<String> {
    let entries: Vec<(u32, u32, f64)> = sim.entries().to_vec();
    json_text(&Envelope::new(
        None,
        inputs,
        json!({
            "axis": sim.axis().as_str(),
            "metric": sim.metric().as_str(),
            "population": sim.population(),
            "entries": entries,
        }),
    ))
}

fn similarity(a: &SimilarityArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = resolve_format(a.format, &a.out, &[Format::Csv, Format::Json])?;
    let source = open_input(&a.input)?;
    check_output(&a.out)?;
    let log = ingest_lastfm_tsv(source)?.log;
    let matrix = build_interaction_matrix(&log)?;
    let sim = pairwise_similarity(&matrix, a.axis, a.metric, cap(a.top_r));
    match format {
        Format::Json => {
            let inputs = json!({
                "in": a.input.display().to_string(),
                "axis": a.axis.as_str(),
                "metric": a.metric.as_str(),
                "top_r": a.top_r,
            });
            write_string(&a.out, &similarity_json(&sim, inputs)?)?;
        }
        _ => write_atomic(&a.out, |w| write_similarity_csv(&sim, w))?,
    }
    say(
        stdout,
        format_args!(
            "{} {} similarity: population={} nonzero_pairs={} -> {}",
            a.axis,
            a.metric,
            sim.population(),
            sim.len(),
            a.out.display()
        ),
    )
}

fn heatmap_json(grid: &HeatmapGrid, inputs: Value) -> Result<String> {
    let b = grid.bins();
    let cells: Vec<Value> = (0..b)
        .flat_map(|r| (0..b).map(move |c| (r, c)))
        .map(|(r, c)| {
            let cell = grid.cell(r, c);
            json!({"row": r, "col": c, "mean_score": cell.mean_score, "pair_count": cell.pair_count})
        })
        .collect();
    json_text(&Envelope::new(
        None,
        inputs,
        json!({
            "bins": b,
            "population": grid.population(),
            "total_pairs": grid.total_pairs(),
            "cells": cells,
        }),
    ))
}

fn skew_summary(grid: &HeatmapGrid) -> (usize, Option<f64>, Option<f64>) {
    let k = grid.bins().min(10);
    (k, grid.top_left_mean(k), grid.bottom_right_mean(k))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"))
}

fn heatmap(a: &HeatmapArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = resolve_format(a.format, &a.out, &[Format::Csv, Format::Json, Format::Svg])?;
    let source = open_input(&a.input)?;
    check_output(&a.out)?;
    let matrix = build_interaction_matrix(&ingest_lastfm_tsv(source)?.log)?;
    let sim = pairwise_similarity(&matrix, a.axis, a.metric, cap(a.top_r));
    let grid = rank_binned_grid(&sim, a.bins)?;
    match format {
        Format::Csv => write_atomic(&a.out, |w| write_heatmap_csv(&grid, w))?,
        Format::Json => {
            let inputs = json!({
                "in": a.input.display().to_string(),
                "axis": a.axis.as_str(),
                "metric": a.metric.as_str(),
                "bins": a.bins,
                "top_r": a.top_r,
            });
            write_string(&a.out, &heatmap_json(&grid, inputs)?)?;
        }
        Format::Svg => {
            let title = format!("{} {} similarity by popularity rank", a.axis, a.metric);
            write_string(&a.out, &heatmap_svg(&grid, &title))?;
        }
    }
    let (k, tl, br) = skew_summary(&grid);
    say(
        stdout,
        format_args!(
            "{} {} heatmap: bins={} top_left_{k}x{k}={} bottom_right_{k}x{k}={} -> {}",
            a.axis,
            a.metric,
            a.bins,
            fmt_opt(tl),
            fmt_opt(br),
            a.out.display()
        ),
    )
}

fn profile_json(profile: &NeighborhoodProfile, inputs: Value) -> Result<String> {
    json_text(&Envelope::new(
        None,
        inputs,
        json!({
            "axis": profile.axis.as_str(),
            "counts": profile.counts,
            "log_log_slope": log_log_slope(&profile.counts_f64()),
        }),
    ))
}

fn profile(a: &ProfileArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = resolve_format(a.format, &a.out, &[Format::Csv, Format::Json, Format::Svg])?;
    let source = open_input(&a.input)?;
    check_output(&a.out)?;
    let matrix = build_interaction_matrix(&ingest_lastfm_tsv(source)?.log)?;
    let prof = neighborhood_sizes(&matrix, a.axis);
    match format {
        Format::Csv => write_atomic(&a.out, |w| write_profile_csv(&prof, w))?,
        Format::Json => {
            let inputs = json!({"in": a.input.display().to_string(), "axis": a.axis.as_str()});
            write_string(&a.out, &profile_json(&prof, inputs)?)?;
        }
        Format::Svg => {
            let title = format!("{} neighbourhood size by popularity rank", a.axis);
            write_string(&a.out, &profile_svg(&prof, &title))?;
        }
    }
    say(
        stdout,
        format_args!(
            "{} profile: entities={} log_log_slope={} -> {}",
            a.axis,
            prof.counts.len(),
            fmt_opt(log_log_slope(&prof.counts_f64())),
            a.out.display()
        ),
    )
}

fn need<T: Copy>(v: Option<T>, flag: &str, formula: Formula) -> Result<T> {
    v.ok_or_else(|| CliError::Precondition(format!("--formula {formula:?} needs {flag}")))
}

fn expect(a: &ExpectArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(out) = &a.out {
        check_output(out)?;
    }
    let config = ExpectationConfig::new(
        a.items,
        a.clicks_a,
        a.clicks_b.unwrap_or(a.clicks_a),
        a.users,
        a.exponent,
        a.mode,
    );
    let base = json!({
        "mode": a.mode.as_str(),
        "items": config.items,
        "clicks_a": config.clicks_a,
        "clicks_b": config.clicks_b,
        "users": config.users,
        "exponent": config.exponent,
    });
    let with = |extra: Value| {
        let mut p = base.clone();
        if let (Some(p), Some(e)) = (p.as_object_mut(), extra.as_object()) {
            p.extend(e.clone());
        }
        p
    };

    // (printed line, parameters, value)
    let (line, params, value): (String, Value, Value) = match a.formula {
        Formula::ItemRatio => {
            let i = need(a.i, "--i", a.formula)?;
            let j = need(a.j, "--j", a.formula)?;
            let r = neighborhood_ratio(i, j)?;
            (format!("{r:?}"), json!({"i": i, "j": j}), json!(r))
        }
        Formula::ClickProbability => {
            let i = need(a.i, "--i", a.formula)?;
            let p = click_probability(i, &config)?;
            (format!("{p:?}"), with(json!({"i": i})), json!(p))
        }
        Formula::UserPairSimilarity => {
            let union = match a.union {
                Some(u) => u,
                None => default_union_size(&config)?,
            };
            let v = expected_similarity_user_pair(&config, union)?;
            (format!("{v:?}"), with(json!({"union": union})), json!(v))
        }
        Formula::OverlapDistribution => {
            let d = overlap_distribution(&config)?;
            let line = format!("degree={} e={:?} pmf={:?}", d.degree, d.elementary, d.pmf);
            let value = serde_json::to_value(&d)
                .map_err(|e| CliError::Precondition(format!("JSON encoding failed: {e}")))?;
            (line, base.clone(), value)
        }
        Formula::OverlapUnion => {
            let (inter, union) = expected_overlap_union(&config)?;
            (
                format!("intersection={inter:?} union={union:?}"),
                base.clone(),
                json!({"intersection": inter, "union": union}),
            )
        }
        Formula::ItemSimilarity => {
            let m = need(a.m, "--m", a.formula)?;
            let n = need(a.n, "--n", a.formula)?;
            let model = ItemPairModel::new(m, n, a.users)?;
            let l1 = expected_item_similarity(&model, Norm::L1);
            let l2 = expected_item_similarity(&model, Norm::L2);
            (
                format!("l1={l1:?} l2={l2:?}"),
                json!({"m": m, "n": n, "users": a.users}),
                json!({"l1": l1, "l2": l2}),
            )
        }
        Formula::UserNeighbors => {
            let set = (!a.item_set.is_empty()).then_some(a.item_set.as_slice());
            let v = expected_user_neighbors(&config, a.variant, set)?;
            let params = with(json!({"variant": variant_str(a.variant), "item_set": a.item_set}));
            let value = if a.variant == NeighborVariant::Paper {
                // The upper summation index is read as the item count; the
                // reading over users is reported next to it.
                let alt = user_neighbors_literal_user_index(&config)?;
                json!({
                    "value": v,
                    "summation_index": "items (chosen)",
                    "alternative_summation_over_users": alt,
                })
            } else {
                json!(v)
            };
            (format!("{v:?}"), params, value)
        }
        Formula::ItemNeighbors => {
            let i = need(a.i, "--i", a.formula)?;
            let v = expected_item_neighbors(i, &config, a.variant)?;
            (
                format!("{v:?}"),
                with(json!({"i": i, "variant": variant_str(a.variant)})),
                json!(v),
            )
        }
    };

    say(stdout, format_args!("{line}"))?;
    if let Some(out) = &a.out {
        let name = formula_name(a.formula);
        let mode = match a.formula {
            Formula::ItemRatio | Formula::ItemSimilarity => Value::Null,
            _ => json!(a.mode.as_str()),
        };
        let results = json!({ name: {"mode": mode, "parameters": params, "value": value} });
        let envelope = Envelope::new(None, json!({"formula": name}), results);
        write_string(out, &json_text(&envelope)?)?;
        say(stdout, format_args!("report -> {}", out.display()))?;
    }
    Ok(())
}

fn variant_str(v: NeighborVariant) -> &'static str {
    match v {
        NeighborVariant::Paper => "paper",
        NeighborVariant::Exact => "exact",
    }
}

fn formula_name(f: Formula) -> &'static str {
    match f {
        Formula::ItemRatio => "item-ratio",
        Formula::ClickProbability => "click-probability",
        Formula::UserPairSimilarity => "user-pair-similarity",
        Formula::OverlapDistribution => "overlap-distribution",
        Formula::OverlapUnion => "overlap-union",
        Formula::ItemSimilarity => "item-similarity",
        Formula::UserNeighbors => "user-neighbors",
        Formula::ItemNeighbors => "item-neighbors",
    }
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = resolve_format(a.format, &a.out, &[Format::Csv, Format::Json])?;
    check_output(&a.out)?;
    let sim = SimConfig::new(a.trials, a.seed)?;
    let clicks_b = a.clicks_b.unwrap_or(a.clicks_a);
    let mut inputs = json!({
        "target": target_name(a.target),
        "trials": a.trials,
        "inclusion": a.inclusion.as_str(),
    });
    let (reports, extra): (Vec<EstimateReport>, Value) = match a.target {
        Target::UserPair => {
            let cfg =
                ExpectationConfig::new(a.items, a.clicks_a, clicks_b, 1, a.exponent, Mode::Normalized);
            inputs["items"] = json!(a.items);
            inputs["clicks_a"] = json!(a.clicks_a);
            inputs["clicks_b"] = json!(clicks_b);
            inputs["exponent"] = json!(a.exponent);
            let est = simulate_user_pair(&cfg, a.inclusion, &sim)?;
            let extra = json!({"overlap_histogram": est.overlap_histogram});
            (est.reports(), extra)
        }
        Target::ItemPair => {
            let model = ItemPairModel::new(a.m, a.n, a.users)?;
            inputs["m"] = json!(a.m);
            inputs["n"] = json!(a.n);
            inputs["users"] = json!(a.users);
            let est = simulate_item_pair(&model, &sim)?;
            (vec![est.l1, est.l2], json!({"skipped_trials": est.skipped}))
        }
        Target::Neighborhoods => {
            let gen = GeneratorConfig {
                inclusion: a.inclusion,
                ..GeneratorConfig::new(a.users, a.items, a.clicks_a, a.exponent, a.seed)
            };
            inputs["users"] = json!(a.users);
            inputs["items"] = json!(a.items);
            inputs["clicks"] = json!(a.clicks_a);
            inputs["exponent"] = json!(a.exponent);
            let est = simulate_neighborhoods(&gen, &sim)?;
            let extra = json!({
                "item_log_log_slope": log_log_slope(&est.item_means()),
                "user_log_log_slope": log_log_slope(&est.user_means()),
            });
            (est.user.into_iter().chain(est.item).collect(), extra)
        }
    };
    match format {
        Format::Json => {
            let envelope = Envelope::new(
                Some(a.seed),
                inputs,
                json!({"estimates": reports, "diagnostics": extra}),
            );
            write_string(&a.out, &json_text(&envelope)?)?;
        }
        _ => write_atomic(&a.out, |w| write_estimates_csv(&reports, w))?,
    }
    say(
        stdout,
        format_args!(
            "simulate {}: estimates={} trials={} seed={} -> {}",
            target_name(a.target),
            reports.len(),
            a.trials,
            a.seed,
            a.out.display()
        ),
    )
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::UserPair => "user-pair",
        Target::ItemPair => "item-pair",
        Target::Neighborhoods => "neighborhoods",
    }
}

struct GridFigure {
    name: &'static str,
    axis: Axis,
    top_r: Option<usize>,
}

struct ProfileFigure {
    name: &'static str,
    axis: Axis,
}

fn figures(a: &FiguresArgs, stdout: &mut dyn Write) -> Result<()> {
    let source = open_input(&a.input)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let outcome = ingest_lastfm_tsv(source)?;
    let matrix = build_interaction_matrix(&outcome.log)?;
    let metric: Metric = a.metric;

    let grids = [
        GridFigure {
            name: "fig1_user_similarity",
            axis: Axis::User,
            top_r: None,
        },
        GridFigure {
            name: "fig2_item_similarity",
            axis: Axis::Item,
            top_r: cap(a.top_r),
        },
    ];
    let profiles = [
        ProfileFigure {
            name: "fig3_user_neighbors",
            axis: Axis::User,
        },
        ProfileFigure {
            name: "fig4_item_neighbors",
            axis: Axis::Item,
        },
    ];

    let mut report = serde_json::Map::new();
    for fig in &grids {
        let sim = pairwise_similarity(&matrix, fig.axis, metric, fig.top_r);
        let bins = a.bins.min(sim.population());
        let grid = rank_binned_grid(&sim, bins)?;
        let csv = a.out.join(format!("{}.csv", fig.name));
        let svg = a.out.join(format!("{}.svg", fig.name));
        write_atomic(&csv, |w| write_heatmap_csv(&grid, w))?;
        let title = format!("{} {} similarity by popularity rank", fig.axis, metric);
        write_string(&svg, &heatmap_svg(&grid, &title))?;
        let (k, tl, br) = skew_summary(&grid);
        report.insert(
            fig.name.to_string(),
            json!({
                "axis": fig.axis.as_str(),
                "metric": metric.as_str(),
                "population": sim.population(),
                "top_r": fig.top_r,
                "bins": bins,
                "nonzero_pairs": sim.len(),
                "block": k,
                "top_left_mean": tl,
                "bottom_right_mean": br,
                "top_left_exceeds_bottom_right": matches!((tl, br), (Some(t), Some(b)) if t > b),
            }),
        );
        for path in [&csv, &svg] {
            say(
                stdout,
                format_args!(
                    "{}: bins={bins} top_left={} bottom_right={} -> {}",
                    fig.name,
                    fmt_opt(tl),
                    fmt_opt(br),
                    path.display()
                ),
            )?;
        }
    }
    for fig in &profiles {
        let prof = neighborhood_sizes(&matrix, fig.axis);
        let csv = a.out.join(format!("{}.csv", fig.name));
        let svg = a.out.join(format!("{}.svg", fig.name));
        write_atomic(&csv, |w| write_profile_csv(&prof, w))?;
        let title = format!("{} neighbourhood size by popularity rank", fig.axis);
        write_string(&svg, &profile_svg(&prof, &title))?;
        let slope = log_log_slope(&prof.counts_f64());
        report.insert(
            fig.name.to_string(),
            json!({
                "axis": fig.axis.as_str(),
                "entities": prof.counts.len(),
                "log_log_slope": slope,
                "negative_slope": slope.is_some_and(|s| s < 0.0),
            }),
        );
        for path in [&csv, &svg] {
            say(
                stdout,
                format_args!("{}: log_log_slope={} -> {}", fig.name, fmt_opt(slope), path.display()),
            )?;
        }
    }

    let inputs = json!({
        "in": a.input.display().to_string(),
        "users": matrix.n_users(),
        "items": matrix.n_items(),
        "records": outcome.log.len(),
        "bins": a.bins,
        "metric": metric.as_str(),
        "top_r": a.top_r,
    });
    let path = a.out.join("report.json");
    write_string(&path, &json_text(&Envelope::new(None, inputs, Value::Object(report)))?)?;
    say(stdout, format_args!("report -> {}", path.display()))
}
