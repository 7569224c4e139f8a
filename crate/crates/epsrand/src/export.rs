//! CSV export: one row per trial, with the run parameters repeated on each
//! row so a file can be filtered or concatenated without losing context.

use std::io::Write;

use serde::Serialize;

use epsrand_core::cert::CertificationReport;
use epsrand_core::experiments::{ConcentrationRecord, CouponRecord, ExperimentRecord, ScalingRecord};
use epsrand_core::KrausChannel;

#[derive(Serialize)]
struct ScalingRow<'a> {
    ensemble: &'a str,
    d: usize,
    n: usize,
    trials: usize,
    master_seed: u64,
    restarts: usize,
    max_iters: usize,
    conv_tol: f64,
    trial: usize,
    estimate: f64,
    converged: bool,
}

#[derive(Serialize)]
struct CouponRow {
    d: usize,
    trials: usize,
    master_seed: u64,
    trial: usize,
    draws: u64,
}

#[derive(Serialize)]
struct ConcentrationRow {
    d: usize,
    delta: f64,
    trials: usize,
    master_seed: u64,
    n: usize,
    trial: usize,
    statistic: f64,
    failed: bool,
}

#[derive(Serialize)]
struct CertificationRow<'a> {
    d: usize,
    n: usize,
    epsilon: f64,
    threshold: f64,
    method: &'a str,
    delta: f64,
    restarts: usize,
    max_iters: usize,
    conv_tol: f64,
    probes: usize,
    seed: Option<u64>,
    estimator_value: Option<f64>,
    net_value: Option<f64>,
    net_upper: Option<f64>,
    net_certificate: Option<&'a str>,
    superoperator_bound: Option<f64>,
    certified_upper_bound: Option<f64>,
    verdict: &'a str,
}

#[derive(Serialize)]
struct EntryRow {
    unitary: usize,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> csv::Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_scaling<W: Write>(record: &ScalingRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p = &record.params;
    for t in &record.trials {
        w.serialize(ScalingRow {
            ensemble: &p.ensemble,
            d: t.d,
            n: t.n,
            trials: p.trials,
            master_seed: p.master_seed,
            restarts: p.estimator.restarts,
            max_iters: p.estimator.max_iters,
            conv_tol: p.estimator.conv_tol,
            trial: t.trial,
            estimate: t.estimate,
            converged: t.converged,
        })?;
    }
    finish(w)
}

pub fn write_coupon<W: Write>(record: &CouponRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p = &record.params;
    for (trial, &draws) in record.draws.iter().enumerate() {
        w.serialize(CouponRow {
            d: p.d,
            trials: p.trials,
            master_seed: p.master_seed,
            trial,
            draws,
        })?;
    }
    finish(w)
}

pub fn write_concentration<W: Write>(record: &ConcentrationRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p = &record.params;
    for t in &record.trials {
        w.serialize(ConcentrationRow {
            d: p.d,
            delta: p.delta,
            trials: p.trials,
            master_seed: p.master_seed,
            n: t.n,
            trial: t.trial,
            statistic: t.statistic,
            failed: t.failed,
        })?;
    }
    finish(w)
}

pub fn write_experiment<W: Write>(record: &ExperimentRecord, out: W) -> csv::Result<()> {
    match record {
        ExperimentRecord::Scaling(r) => write_scaling(r, out),
        ExperimentRecord::Coupon(r) => write_coupon(r, out),
        ExperimentRecord::Concentration(r) => write_concentration(r, out),
    }
}

pub fn write_certification<W: Write>(report: &CertificationReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let method = serde_json::to_value(report.method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let certificate = report.net.as_ref().map(|n| match n.certificate {
        epsrand_core::cert::NetCertificate::Exact => "exact",
        epsrand_core::cert::NetCertificate::Heuristic => "heuristic",
    });
    w.serialize(CertificationRow {
        d: report.dim,
        n: report.n,
        epsilon: report.epsilon,
        threshold: report.threshold,
        method: &method,
        delta: report.params.delta,
        restarts: report.params.estimator.restarts,
        max_iters: report.params.estimator.max_iters,
        conv_tol: report.params.estimator.conv_tol,
        probes: report.params.probes,
        seed: report.seed,
        estimator_value: report.estimator_value,
        net_value: report.net.as_ref().map(|n| n.value),
        net_upper: report.net.as_ref().map(|n| n.upper),
        net_certificate: certificate,
        superoperator_bound: report.superoperator_bound,
        certified_upper_bound: report.certified_upper_bound,
        verdict: report.verdict.as_str(),
    })?;
    finish(w)
}

/// Matrix entries of every Kraus unitary, one row per entry.
pub fn write_channel<W: Write>(channel: &KrausChannel, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = channel.dim();
    for (unitary, u) in channel.unitaries().iter().enumerate() {
        for row in 0..d {
            for col in 0..d {
                let z = u[(row, col)];
                w.serialize(EntryRow {
                    unitary,
                    row,
                    col,
                    re: z.re,
                    im: z.im,
                })?;
            }
        }
    }
    finish(w)
}
