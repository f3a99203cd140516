//! CSV writers and value-list parsing.

use std::io::Write;

use anyhow::{bail, Context, Result};
use qosrec::{EvalReport, TraceRow};

pub const RESULTS_HEADER: [&str; 10] = [
    "method",
    "userNum",
    "serviceNum",
    "density",
    "repetition",
    "k",
    "ndcg",
    "mae",
    "rmse",
    "seed",
];
pub const SUMMARY_HEADER: [&str; 6] =
    ["method", "userNum", "density", "k", "ndcg_mean", "ndcg_std"];
pub const TRACE_HEADER: [&str; 4] = ["epoch", "loss", "alpha", "ndcg_k"];

pub fn results_csv<W: Write>(out: W, reports: &[EvalReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in reports {
        let c = &r.config;
        for run in &r.runs {
            for (k, ndcg) in &run.ndcg {
                w.write_record([
                    r.method.clone(),
                    c.user_num.to_string(),
                    c.service_num.to_string(),
                    c.density.to_string(),
                    run.repetition.to_string(),
                    k.to_string(),
                    ndcg.to_string(),
                    run.mae.to_string(),
                    run.rmse.to_string(),
                    run.seed.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn summary_csv<W: Write>(out: W, reports: &[EvalReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in reports {
        for (k, mean) in &r.ndcg_mean {
            w.write_record([
                r.method.clone(),
                r.config.user_num.to_string(),
                r.config.density.to_string(),
                k.to_string(),
                mean.to_string(),
                r.ndcg_std[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per (density, method) with NDCG at every evaluated list length,
/// MAE and RMSE. `best_in` names the columns where the row is best within
/// its density (highest NDCG, lowest error).
pub fn comparison_csv<W: Write>(out: W, reports: &[EvalReport]) -> Result<()> {
    let ks: Vec<usize> = reports
        .first()
        .map(|r| r.ndcg_mean.keys().copied().collect())
        .unwrap_or_default();
    let mut header: Vec<String> = ["method", "userNum", "serviceNum", "density"]
        .map(String::from)
        .to_vec();
    header.extend(ks.iter().map(|k| format!("ndcg_{k}")));
    header.extend(["mae", "rmse", "best_in"].map(String::from));

    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in reports {
        let peers: Vec<&EvalReport> = reports
            .iter()
            .filter(|o| o.config.density == r.config.density)
            .collect();
        let mut best = Vec::new();
        for &k in &ks {
            if peers.iter().all(|o| o.ndcg_mean[&k] <= r.ndcg_mean[&k]) {
                best.push(format!("ndcg_{k}"));
            }
        }
        if peers.iter().all(|o| o.mae >= r.mae) {
            best.push("mae".into());
        }
        if peers.iter().all(|o| o.rmse >= r.rmse) {
            best.push("rmse".into());
        }
        let mut row = vec![
            r.method.clone(),
            r.config.user_num.to_string(),
            r.config.service_num.to_string(),
            r.config.density.to_string(),
        ];
        row.extend(ks.iter().map(|k| r.ndcg_mean[k].to_string()));
        row.extend([r.mae.to_string(), r.rmse.to_string(), best.join(";")]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv<W: Write>(out: W, param: &str, points: &[(f64, EvalReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "param",
        "value",
        "method",
        "userNum",
        "density",
        "k",
        "ndcg_mean",
        "ndcg_std",
        "mae",
        "rmse",
    ])?;
    for (value, r) in points {
        for (k, mean) in &r.ndcg_mean {
            w.write_record([
                param.to_string(),
                value.to_string(),
                r.method.clone(),
                r.config.user_num.to_string(),
                r.config.density.to_string(),
                k.to_string(),
                mean.to_string(),
                r.ndcg_std[k].to_string(),
                r.mae.to_string(),
                r.rmse.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Trace rows, optionally prefixed with a density column.
pub fn trace_csv<W: Write>(out: W, rows: &[(Option<f64>, TraceRow)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_density = rows.iter().any(|(d, _)| d.is_some());
    let mut header: Vec<&str> = Vec::new();
    if with_density {
        header.push("density");
    }
    header.extend(TRACE_HEADER);
    w.write_record(&header)?;
    for (density, r) in rows {
        let mut rec = Vec::new();
        if let Some(d) = density {
            rec.push(d.to_string());
        }
        rec.extend([
            r.epoch.to_string(),
            r.loss.to_string(),
            r.alpha.to_string(),
            r.ndcg.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `a,b,c` or an inclusive `start:end:step` range.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty value list");
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            bail!("range must look like start:end:step, got `{spec}`");
        };
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{s}` in range `{spec}`"))
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if !(step > 0.0 && step.is_finite() && start.is_finite() && end.is_finite()) || end < start
        {
            bail!("range `{spec}` needs finite start <= end and step > 0");
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        // round away the drift of repeated float steps
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
            .collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{s}` in list `{spec}`"))
        })
        .collect()
}
