use std::path::PathBuf;

use momentflow::diagnostics::error_recursion;
use momentflow::ensembles::{build_network, input_gaussian};
use momentflow::oracle::{pooled_pseudo_true, qmc_sample_network, Histogram, SampleSet, Truth};
use momentflow::propagation::{
    propagate_analytic, propagate_linear, propagate_mean_field, propagate_unscented, SigmaPointScheme,
};
use momentflow::{Error, Gaussian, Network, Result};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::args::{parse_matrix, parse_vector, Args, Format};
use crate::report::{self, format_f64, Row, METHODS};

const HISTOGRAM_BINS: usize = 50;

/// The input Gaussian from `--input-mean`/`--input-cov`, falling back to
/// `--variance`, then to a standard normal.
fn input_for(args: &Args, dim: usize) -> Result<Gaussian> {
    let mean = match &args.input_mean {
        Some(text) => DVector::from_vec(parse_vector(text)?),
        None => DVector::zeros(dim),
    };
    let cov = match (&args.input_cov, args.variance_level()) {
        (Some(text), _) => {
            let (n, entries) = parse_matrix(text)?;
            DMatrix::from_row_slice(n, n, &entries)
        }
        (None, Some(level)) => DMatrix::identity(dim, dim) * level.scale(),
        (None, None) => DMatrix::identity(dim, dim),
    };
    if mean.len() != dim || cov.nrows() != dim {
        return Err(Error::Layer {
            layer: 0,
            message: format!("expected input dim {dim}, found {}", if mean.len() != dim { mean.len() } else { cov.nrows() }),
        });
    }
    Gaussian::new(mean, cov)
}

fn network_path(args: &Args) -> Result<&PathBuf> {
    args.network
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("propagate needs --network".into()))
}

pub fn propagate(args: &Args) -> Result<()> {
    let net = Network::load(network_path(args)?)?;
    let input = input_for(args, net.input_dim())?;
    let outputs = propagate_analytic(&net, &input)?;
    match args.format() {
        Format::Json => {
            let layers: Vec<Value> = outputs.iter().enumerate().map(|(i, g)| report::gaussian_json(i, g)).collect();
            report::write_json(&args.out, &json!({ "layers": layers }))
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (l, g) in outputs.iter().enumerate() {
                for i in 0..g.dim() {
                    rows.push(vec![
                        l.to_string(),
                        i.to_string(),
                        format_f64(g.mean()[i]),
                        format_f64(g.cov()[(i, i)]),
                    ]);
                }
            }
            report::write_csv(&args.out, &["layer", "unit", "mean", "variance"], &rows)
        }
    }
}

fn method_moments(net: &Network, input: &Gaussian) -> Vec<Result<Gaussian>> {
    vec![
        propagate_analytic(net, input).map(|mut v| v.pop().expect("non-empty network")),
        propagate_mean_field(net, input),
        propagate_linear(net, input),
        propagate_unscented(net, input, &SigmaPointScheme::u95()),
        propagate_unscented(net, input, &SigmaPointScheme::u02()),
    ]
}

pub fn benchmark(args: &Args) -> Result<()> {
    if args.replicates == 0 {
        return Err(Error::InvalidArgument("--replicates must be positive".into()));
    }
    let (net, input, meta) = match &args.network {
        Some(path) => {
            let net = Network::load(path)?;
            let input = input_for(args, net.input_dim())?;
            (net, input, json!({ "network": path.display().to_string() }))
        }
        None => {
            let spec = args.ensemble()?;
            let meta = json!({
                "architecture": spec.architecture.to_string(),
                "activation": spec.activation.name(),
                "residual": spec.residual,
                "variance": spec.variance.to_string(),
            });
            (build_network(&spec), input_gaussian(&spec), meta)
        }
    };
    if net.output_dim() != 1 {
        return Err(Error::Dimension("benchmark needs a scalar-output network".into()));
    }
    let seed = args.sampling_seed();
    let sets: Vec<SampleSet> = (0..args.replicates as u64)
        .map(|r| qmc_sample_network(&net, &input, args.samples, seed, r))
        .collect::<Result<_>>()?;
    let truth = Truth::new(&sets)?;
    let pooled = pooled_pseudo_true(&sets)?;

    let mut candidates = vec![Ok(pooled)];
    candidates.extend(method_moments(&net, &input));
    let mut rows = Vec::with_capacity(METHODS.len());
    let mut fitted = Vec::with_capacity(METHODS.len());
    for (name, g) in METHODS.iter().zip(candidates) {
        match g.and_then(|g| truth.evaluate(&g).map(|r| (g, r))) {
            Ok((g, r)) => {
                rows.push(Row::from_report(name, &r));
                fitted.push(Some(g));
            }
            Err(e) if !e.is_validation() => {
                rows.push(Row::failed(name));
                fitted.push(None);
            }
            Err(e) => return Err(e),
        }
    }

    let meta = json!({
        "config": meta,
        "samples": args.samples,
        "replicates": args.replicates,
        "seed": args.seed,
    });
    report::write_rows(&args.out, &rows, meta, args.format() == Format::Csv)?;

    if let Some(path) = &args.bounds {
        report::write_bounds(path, &error_recursion(&net, &input)?)?;
    }
    if let Some(path) = &args.histogram {
        let values: Vec<f64> = sets.iter().flat_map(|s| s.samples.iter().copied()).collect();
        let hist = Histogram::new(&values, HISTOGRAM_BINS)?;
        let masses: Vec<Option<Vec<f64>>> = fitted.iter().map(|g| g.as_ref().map(|g| hist.gaussian_mass(g))).collect();
        let total = values.len() as f64;
        let mut header = vec!["bin_lo", "bin_hi", "count", "frequency"];
        header.extend(&METHODS[1..]);
        let table: Vec<Vec<String>> = (0..hist.counts.len())
            .map(|b| {
                let mut row = vec![
                    format_f64(hist.edges[b]),
                    format_f64(hist.edges[b + 1]),
                    hist.counts[b].to_string(),
                    format_f64(hist.counts[b] as f64 / total),
                ];
                row.extend(masses[1..].iter().map(|m| m.as_ref().map_or("nan".into(), |m| format_f64(m[b]))));
                row
            })
            .collect();
        report::write_csv(path, &header, &table)?;
    }
    Ok(())
}

pub fn compare(args: &Args) -> Result<()> {
    let dir = args
        .reports
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("compare needs --reports".into()))?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut kl: Vec<Vec<f64>> = vec![Vec::new(); METHODS.len()];
    let mut used = 0;
    for p in &paths {
        let Ok(rows) = report::read_rows(p) else { continue };
        used += 1;
        for row in rows {
            if let Some(i) = METHODS.iter().position(|m| *m == row.method) {
                kl[i].push(row.kl_y1_to_m);
            }
        }
    }
    if used == 0 {
        return Err(Error::InvalidArgument(format!("no benchmark reports in {}", dir.display())));
    }
    let qs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut summary = Vec::new();
    for (method, values) in METHODS.iter().zip(kl.iter_mut()) {
        if values.is_empty() {
            continue;
        }
        values.sort_by(f64::total_cmp);
        let five: Vec<f64> = qs.iter().map(|&q| report::quantile(values, q)).collect();
        summary.push((method.to_string(), values.len(), five));
    }
    match args.format() {
        Format::Csv => {
            let rows: Vec<Vec<String>> = summary
                .iter()
                .map(|(m, n, five)| {
                    let mut r = vec![m.clone(), n.to_string()];
                    r.extend(five.iter().map(|&v| format_f64(v)));
                    r
                })
                .collect();
            report::write_csv(&args.out, &["method", "reports", "min", "q25", "median", "q75", "max"], &rows)
        }
        Format::Json => {
            let methods: Vec<Value> = summary
                .iter()
                .map(|(m, n, five)| {
                    json!({
                        "method": m,
                        "reports": n,
                        "min": report::number(five[0]),
                        "q25": report::number(five[1]),
                        "median": report::number(five[2]),
                        "q75": report::number(five[3]),
                        "max": report::number(five[4]),
                    })
                })
                .collect();
            report::write_json(&args.out, &json!({ "metric": "kl_y1_to_m", "methods": methods }))
        }
    }
}
