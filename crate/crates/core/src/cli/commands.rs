//! One function per subcommand, each returning a status, a JSON result and output files.

use serde::Serialize;
use serde_json::json;

use super::config::*;
use super::output::{encode_pgm16, opt, Csv, ImageSidecar, Status};
use crate::error::{Error, Result};
use crate::hsdiag::{geometric_radii, hs_growth, hs_verdict_theory, weighted_hs_growth, Verdict};
use crate::microlocal::{build_cutoff, planar_directions, probe_trajectory, uniformity_scan_multi};
use crate::noise::{effective_varsigma, sample_coefficients, threshold_of};
use crate::probab::{
    cauchy_in_probability_check, energy_identity_check, final_statistic_quantiles, kahane_khintchine_ratio,
    levy_maximal_check, paley_zygmund_check, symmetrization_check,
};
use crate::sobolev::{expected_energy, norm_trajectory, threshold_report};
use crate::spectra::{
    counting_function, enumerate_modes, synthesize, weyl_prediction, Grid, ManifoldSpec, ModeLabel, Parity,
};

/// Everything a command produces besides the report envelope.
pub struct Outcome {
    pub status: Status,
    pub result: serde_json::Value,
    pub files: Vec<(String, Vec<u8>)>,
}

fn value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}

fn csv_file(name: &str, csv: &Csv) -> (String, Vec<u8>) {
    (name.to_string(), csv.render().into_bytes())
}

pub fn dispatch(params: &CommandConfig) -> Result<Outcome> {
    match params {
        CommandConfig::Weyl(c) => weyl(c),
        CommandConfig::Modes(c) => modes(c),
        CommandConfig::Sample(c) => sample(c),
        CommandConfig::Render(c) => render(c),
        CommandConfig::Norms(c) => norms(c),
        CommandConfig::Threshold(c) => threshold(c),
        CommandConfig::Hs(c) => hs(c),
        CommandConfig::Probe(c) => probe(c),
        CommandConfig::Scan(c) => scan(c),
        CommandConfig::Mc(c) => mc(c),
    }
}

fn weyl(c: &WeylConfig) -> Result<Outcome> {
    let mut csv = Csv::new(&["lambda", "count", "prediction", "ratio"]);
    let mut rows = Vec::new();
    let mut pass = true;
    for &lambda in &c.lambdas {
        let count = counting_function(c.manifold, lambda)?;
        let prediction = weyl_prediction(c.manifold, lambda);
        let ratio = count as f64 / prediction;
        if let Some([lo, hi]) = c.band {
            pass &= ratio >= lo && ratio <= hi;
        }
        csv.push(vec![
            lambda.to_string(),
            count.to_string(),
            prediction.to_string(),
            ratio.to_string(),
        ]);
        rows.push(json!({"lambda": lambda, "count": count, "prediction": prediction, "ratio": ratio}));
    }
    Ok(Outcome {
        status: Status::from_checks(pass, false),
        result: json!({"rows": rows, "band": c.band}),
        files: vec![csv_file("weyl.csv", &csv)],
    })
}

fn label_text(label: &ModeLabel) -> String {
    let parity = |p: &Parity| match p {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    };
    match label {
        ModeLabel::Lattice { k, parity: p } => {
            let parts: Vec<String> = k.iter().map(|c| c.to_string()).collect();
            format!("k=({}) {}", parts.join(" "), parity(p))
        }
        ModeLabel::Spherical { l, m, parity: p } => format!("l={l} m={m} {}", parity(p)),
    }
}

fn modes(c: &ModesConfig) -> Result<Outcome> {
    let modes = enumerate_modes(c.manifold, c.count)?;
    let mut csv = Csv::new(&["ordinal", "eigenvalue", "label"]);
    for m in &modes {
        csv.push(vec![
            m.ordinal.to_string(),
            m.eigenvalue.to_string(),
            label_text(&m.label),
        ]);
    }
    Ok(Outcome {
        status: Status::Pass,
        result: json!({"modes": value(&modes)}),
        files: vec![csv_file("modes.csv", &csv)],
    })
}

fn sample(c: &SampleConfig) -> Result<Outcome> {
    let coeffs = sample_coefficients(&c.schedule, c.manifold, c.n, c.seed)?;
    let sigmas = c.schedule.sigmas(c.manifold, c.n + 1);
    let lambdas = crate::spectra::eigenvalues(c.manifold, c.n + 1);
    let mut csv = Csv::new(&["ordinal", "eigenvalue", "sigma", "mean", "value"]);
    for (n, a) in coeffs.values.iter().enumerate() {
        csv.push(vec![
            n.to_string(),
            lambdas[n].to_string(),
            sigmas[n].to_string(),
            c.schedule.mu_of(n).to_string(),
            a.to_string(),
        ]);
    }
    let mut files = vec![csv_file("coefficients.csv", &csv)];
    let l2_sq: f64 = coeffs.values.iter().map(|a| a * a).sum();
    let mut result = json!({"truncation": c.n, "l2_norm_sq": l2_sq});
    if let Some(grid) = &c.grid {
        let field = synthesize(c.manifold, &coeffs, grid)?;
        let mut fcsv = Csv::new(&["index", "coordinates", "value"]);
        for (i, (x, v)) in grid.coordinates().iter().zip(&field.values).enumerate() {
            let xs: Vec<String> = x.iter().map(|t| t.to_string()).collect();
            fcsv.push(vec![i.to_string(), xs.join(" "), v.to_string()]);
        }
        let (lo, hi) = field.min_max();
        result["field"] = json!({"min": lo, "max": hi, "quadrature_l2_sq": field.l2_norm_sq()});
        files.push(csv_file("field.csv", &fcsv));
    }
    Ok(Outcome {
        status: Status::Pass,
        result,
        files,
    })
}

/// One rendered field: the PGM bytes and their sidecar.
pub struct RenderedImage {
    pub name: String,
    pub pgm: Vec<u8>,
    pub sidecar: ImageSidecar,
}

/// Renders every configured schedule from the same seed on the configured grid.
pub fn render_images(c: &RenderConfig) -> Result<Vec<RenderedImage>> {
    let (height, width) = match (&c.manifold, &c.grid) {
        (ManifoldSpec::Sphere2, Grid::SphereEquirect { n_lat, n_lon }) => (*n_lat, *n_lon),
        (ManifoldSpec::Torus { dim: 2 }, Grid::TorusUniform { sizes }) if sizes.len() == 2 => (sizes[0], sizes[1]),
        _ => {
            return Err(Error::Unsupported(
                "rendering needs the sphere or the 2-torus with a matching grid".into(),
            ))
        }
    };
    c.schedules
        .iter()
        .map(|named| {
            let coeffs = sample_coefficients(&named.schedule, c.manifold, c.n, c.seed)?;
            let field = synthesize(c.manifold, &coeffs, &c.grid)?;
            let (pgm, min, max) = encode_pgm16(width, height, &field.values);
            let coefficient_l2 = coeffs.values.iter().map(|a| a * a).sum::<f64>().sqrt();
            Ok(RenderedImage {
                name: named.name.clone(),
                pgm,
                sidecar: ImageSidecar {
                    image: format!("render_{}.pgm", named.name),
                    width,
                    height,
                    maxval: 65535,
                    min,
                    max,
                    mapping: "linear".into(),
                    seed: c.seed,
                    schedule: named.schedule.clone(),
                    truncation: c.n,
                    grid: c.grid.clone(),
                    quadrature_l2: field.l2_norm_sq().sqrt(),
                    coefficient_l2,
                },
            })
        })
        .collect()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn render(c: &RenderConfig) -> Result<Outcome> {
    let images = render_images(c)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut pass = true;
    for img in images {
        let gap = relative_gap(img.sidecar.quadrature_l2, img.sidecar.coefficient_l2);
        pass &= gap <= c.parseval_tolerance;
        rows.push(json!({"name": img.name, "relative_gap": gap, "sidecar": value(&img.sidecar)}));
        let mut side = serde_json::to_string_pretty(&img.sidecar).expect("sidecars serialize");
        side.push('\n');
        files.push((format!("render_{}.json", img.name), side.into_bytes()));
        files.push((img.sidecar.image.clone(), img.pgm));
    }
    Ok(Outcome {
        status: Status::from_checks(pass, false),
        result: json!({"images": rows}),
        files,
    })
}

fn norms(c: &NormsConfig) -> Result<Outcome> {
    let mut csv = Csv::new(&["s", "n", "norm", "expected_rms"]);
    let mut series = Vec::new();
    for &s in &c.s_values {
        let traj = norm_trajectory(&c.schedule, c.manifold, s, c.seed, &c.checkpoints)?;
        for &(n, v) in &traj {
            let e = expected_energy(&c.schedule, c.manifold, s, n).sqrt();
            csv.push(vec![s.to_string(), n.to_string(), v.to_string(), e.to_string()]);
        }
        series.push(json!({"s": s, "trajectory": traj}));
    }
    Ok(Outcome {
        status: Status::Pass,
        result: json!({"series": series}),
        files: vec![csv_file("norms.csv", &csv)],
    })
}

fn verdict_cells(v: &Verdict) -> (String, String) {
    match v {
        Verdict::DivergesPower { exponent } => (v.name().into(), exponent.to_string()),
        _ => (v.name().into(), String::new()),
    }
}

fn threshold(c: &ThresholdConfig) -> Result<Outcome> {
    let report = threshold_report(&c.schedule, c.manifold, &c.s_grid, c.n_max, c.trials, c.seed)?;
    let est = &report.estimate;
    let expected = c.expected.unwrap_or_else(|| threshold_of(&c.schedule, c.manifold));
    let within = (est.s_star_hat - expected).abs() <= c.tolerance;
    let mut csv = Csv::new(&[
        "s",
        "verdict",
        "exponent",
        "sample_verdict",
        "sample_exponent",
        "inconclusive",
    ]);
    for (i, s) in est.s_grid.iter().enumerate() {
        let (v, _) = verdict_cells(&est.verdicts[i]);
        csv.push(vec![
            s.to_string(),
            v,
            opt(est.exponents[i]),
            report.sample_fits[i].verdict.name().into(),
            opt(report.sample_fits[i].fitted_exponent),
            est.inconclusive[i].to_string(),
        ]);
    }
    Ok(Outcome {
        status: Status::from_checks(within, est.any_inconclusive()),
        result: json!({"expected": expected, "within_tolerance": within, "report": value(&report)}),
        files: vec![csv_file("threshold.csv", &csv)],
    })
}

fn hs(c: &HsConfig) -> Result<Outcome> {
    let radii = geometric_radii(c.radii.base, c.radii.ratio, c.radii.count);
    let d = c.manifold.dim() as f64;
    let (growth, theory_divergent) = match &c.schedule {
        None => (
            hs_growth(c.manifold, &c.operator, &radii)?,
            hs_verdict_theory(c.manifold, &c.operator).is_divergent(),
        ),
        Some(s) => {
            let order = c.operator.order(c.manifold.dim()) - d * effective_varsigma(s, c.manifold);
            (
                weighted_hs_growth(s, c.manifold, &c.operator, &radii)?,
                order >= -d / 2.0 - 1e-12,
            )
        }
    };
    let expect_divergent = match c.expect {
        Some(ExpectedVerdict::Converges) => false,
        Some(ExpectedVerdict::Diverges) => true,
        None => theory_divergent,
    };
    let mut csv = Csv::new(&["radius", "partial_sum"]);
    for (r, s) in growth.radii.iter().zip(&growth.partial_sums) {
        csv.push(vec![r.to_string(), s.to_string()]);
    }
    Ok(Outcome {
        status: Status::from_checks(growth.verdict.is_divergent() == expect_divergent, growth.inconclusive),
        result: json!({"growth": value(&growth), "expected_divergent": expect_divergent}),
        files: vec![csv_file("hs.csv", &csv)],
    })
}

fn probe(c: &ProbeConfig) -> Result<Outcome> {
    let k = &c.cutoff;
    let cutoff = build_cutoff(k.x0.clone(), k.halfwidth, k.direction.clone(), k.aperture, k.r0, k.r1)?;
    let report = probe_trajectory(&c.schedule, c.manifold, &cutoff, c.s, c.seed, &c.checkpoints)?;
    let expect_divergent = c.s >= threshold_of(&c.schedule, c.manifold);
    let mut csv = Csv::new(&["n", "probe_norm", "block_energy"]);
    for ((n, p), e) in report
        .checkpoints
        .iter()
        .zip(&report.probe_norms)
        .zip(&report.block_energies)
    {
        csv.push(vec![n.to_string(), p.to_string(), e.to_string()]);
    }
    Ok(Outcome {
        status: Status::from_checks(
            report.growth.verdict.is_divergent() == expect_divergent,
            report.growth.inconclusive,
        ),
        result: json!({"report": value(&report), "expected_divergent": expect_divergent}),
        files: vec![csv_file("probe.csv", &csv)],
    })
}

fn scan(c: &ScanConfig) -> Result<Outcome> {
    let directions = if c.directions.is_empty() {
        planar_directions(c.direction_count)
    } else {
        c.directions.clone()
    };
    let reports = uniformity_scan_multi(
        &c.schedule,
        c.manifold,
        &c.positions,
        &directions,
        &c.s_values,
        c.seed,
        &c.checkpoints,
        c.trials,
        &c.template,
    )?;
    let s_star = threshold_of(&c.schedule, c.manifold);
    let mut status = Status::Pass;
    let mut csv = Csv::new(&["s", "position", "direction", "exponent", "verdict", "inconclusive"]);
    let mut summaries = Vec::new();
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for r in &reports {
        let expect_divergent = r.s >= s_star;
        let pass = if expect_divergent {
            r.all_divergent && r.spread <= c.max_spread
        } else {
            r.all_bounded
        };
        status = status.combine(Status::from_checks(pass, r.any_inconclusive));
        for cell in &r.cells {
            csv.push(vec![
                r.s.to_string(),
                join(&cell.position),
                join(&cell.direction),
                opt(cell.exponent),
                cell.verdict.name().into(),
                cell.inconclusive.to_string(),
            ]);
        }
        summaries.push(json!({"s": r.s, "expected_divergent": expect_divergent, "pass": pass}));
    }
    Ok(Outcome {
        status,
        result: json!({"threshold": s_star, "summaries": summaries, "reports": value(&reports)}),
        files: vec![csv_file("scan.csv", &csv)],
    })
}

fn mc(c: &McConfig) -> Result<Outcome> {
    c.plan.validate()?;
    let mut reports = Vec::new();
    for check in &c.checks {
        let r = match check {
            McCheck::EnergyIdentity { s } => energy_identity_check(&c.plan, *s)?,
            McCheck::KahaneKhintchine { p } => kahane_khintchine_ratio(&c.plan, *p)?,
            McCheck::PaleyZygmund { thetas } => paley_zygmund_check(&c.plan, thetas)?,
            McCheck::LevyMaximal { radii, quantiles } => {
                let mut all = radii.clone();
                all.extend(final_statistic_quantiles(&c.plan, quantiles)?);
                levy_maximal_check(&c.plan, &all)?
            }
            McCheck::CauchyInProbability { s, delta } => cauchy_in_probability_check(&c.plan, *s, *delta)?,
            McCheck::Symmetrization => symmetrization_check(&c.plan)?,
        };
        reports.push(r);
    }
    let mut csv = Csv::new(&["check", "row", "statistic", "bound", "slack", "count", "total", "pass"]);
    for r in &reports {
        for row in &r.rows {
            csv.push(vec![
                r.check.clone(),
                row.label.clone(),
                row.statistic.to_string(),
                row.bound.to_string(),
                row.slack.to_string(),
                row.count.map_or(String::new(), |v| v.to_string()),
                row.total.map_or(String::new(), |v| v.to_string()),
                row.pass.to_string(),
            ]);
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(Outcome {
        status: Status::from_checks(pass, false),
        result: json!({"reports": value(&reports)}),
        files: vec![csv_file("mc.csv", &csv)],
    })
}
