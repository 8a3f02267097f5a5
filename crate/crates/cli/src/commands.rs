use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use interpband::bands::{bands_from_draws, BandMetadata};
use interpband::bootstrap::bootstrap_fields;
use interpband::interp::{
    holder_bound, holder_min_nodes, integrated_abs_error, smooth_bound, smooth_min_nodes, sup_abs_error,
};
use interpband::mc::{emit_table, run_design, McStudy, TableFormat};
use interpband::numerics::empirical_quantile;
use interpband::{grid_rule, BootstrapConfig, DidSample, Error, GridField, ProbeGrid, TensorGrid};

use crate::{BandArgs, BoundArgs, Format, InterpErrorArgs, McArgs};

/// Studies above this many bootstrap estimates need `--long`.
const DESK_WORKLOAD: usize = 250_000;

fn usage(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cos_sqrt(x: f64) -> f64 {
    (5.0 * x).cos() + x.sqrt()
}

pub fn interp_error(args: &InterpErrorArgs) -> Result<(), Error> {
    if args.function != "cos5x-sqrt" {
        return Err(usage("function", format!("unknown function `{}` (available: cos5x-sqrt)", args.function)));
    }
    if let Some(l) = args.nodes.iter().find(|l| **l < 2) {
        return Err(usage("L", format!("every L must be at least 2, got {l}")));
    }
    let f = |x: &[f64]| cos_sqrt(x[0]);
    let probe = ProbeGrid::uniform(args.probe, vec![0.0], vec![5.0])?;
    let mut report = String::from("L,a.x,m.x\n");
    let mut fields = Vec::new();
    for &l in &args.nodes {
        let grid = Arc::new(TensorGrid::cube(1, 0.0, 5.0, l)?);
        let field = GridField::from_fn(grid, f)?;
        let ax = integrated_abs_error(&field, f, &probe)?;
        let mx = sup_abs_error(&field, f, &probe)?;
        report.push_str(&format!("{l},{ax:.6},{mx:.6}\n"));
        fields.push((l, field));
    }
    write_text(args.out.as_deref(), &report)?;
    if let Some(path) = &args.curve {
        let mut w = create(path)?;
        writeln!(w, "L,x,f,f_L,error")?;
        let points = ProbeGrid::uniform(args.curve_points, vec![0.0], vec![5.0])?;
        for (l, field) in &fields {
            for x in points.points() {
                let (exact, interp) = (cos_sqrt(x[0]), field.eval(&x)?);
                writeln!(w, "{l},{:?},{exact:?},{interp:?},{:?}", x[0], interp - exact)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

pub fn band(args: &BandArgs) -> Result<(), Error> {
    if !(args.tau_lb > 0.0 && args.tau_lb < args.tau_ub && args.tau_ub < 1.0) {
        return Err(usage("tau_lb", "need 0 < tau-lb < tau-ub < 1"));
    }
    if let Some(a) = args.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(usage("alpha", format!("levels must lie in (0, 1), got {a}")));
    }
    if args.draws < 4 {
        return Err(usage("draws", "need at least 4 bootstrap draws"));
    }
    if args.r_n.is_some_and(|r| r.is_nan() || r <= 0.0) {
        return Err(usage("r_n", "must be positive"));
    }
    let sample = DidSample::read_csv(File::open(&args.data)?)?;
    let dim = sample.dim();
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for k in 0..dim {
        let column: Vec<f64> = (0..sample.len()).map(|i| sample.outcome(i)[k]).collect();
        lo.push(empirical_quantile(&column, args.tau_lb)?);
        hi.push(empirical_quantile(&column, args.tau_ub)?);
    }
    let nodes = match args.nodes {
        Some(l) if l < 2 => return Err(usage("L", format!("must be at least 2, got {l}"))),
        Some(l) => l,
        None => grid_rule(args.a, args.b, hi[0] - lo[0], sample.len()),
    };
    let grid = Arc::new(TensorGrid::new(lo, hi, nodes)?);
    let config = BootstrapConfig::multinomial(args.draws, args.seed);
    let r_n = args.r_n.unwrap_or(sample.len() as f64);
    let draws = bootstrap_fields(&sample, args.target, &grid, &config, r_n)?;
    let bands = bands_from_draws(&draws, &args.alphas)?;

    fs::create_dir_all(&args.out_dir)?;
    for band in &bands {
        let path = args.out_dir.join(format!("band_alpha{}.csv", band.alpha));
        let mut w = create(&path)?;
        band.write_csv(args.points, &mut w)?;
        w.flush()?;
    }
    if args.dump_draws {
        let mut w = create(&args.out_dir.join("draws.csv"))?;
        draws.write_csv(&mut w)?;
        w.flush()?;
    }
    let meta = BandMetadata {
        target: args.target,
        grid: grid.spec(),
        nodes_per_axis: nodes,
        r_n,
        seed: args.seed,
        draws: args.draws,
        n: sample.len(),
        bands: bands.iter().map(|b| b.summary()).collect(),
    };
    let json = serde_json::to_string_pretty(&meta)?;
    fs::write(args.out_dir.join("metadata.json"), json + "\n")?;
    for b in &bands {
        println!(
            "{} alpha={} L={} t={:.4} floored={}",
            args.target, b.alpha, nodes, b.critical_value, b.floored_nodes
        );
    }
    Ok(())
}

fn load_study(args: &McArgs) -> Result<McStudy, Error> {
    let mut study = match (&args.preset, &args.config) {
        (Some(name), _) => McStudy::preset(name).ok_or_else(|| {
            usage("preset", format!("unknown preset `{name}` (uni-desk, biv-desk, uni-full, biv-full)"))
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            if path.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(|e| usage("config", e.to_string()))?
            } else {
                toml::from_str(&text).map_err(|e| usage("config", e.to_string().trim_end().to_string()))?
            }
        }
        (None, None) => return Err(usage("config", "pass --config or --preset")),
    };
    if let Some(r) = args.replications {
        study.replications = r;
    }
    if let Some(b) = args.draws {
        study.draws = b;
    }
    if let Some(s) = args.seed {
        study.seed = s;
    }
    Ok(study)
}

pub fn mc(args: &McArgs) -> Result<(), Error> {
    let study = load_study(args)?;
    let designs = study.designs()?;
    let full_preset = args.preset.as_deref().is_some_and(|p| p.ends_with("-full"));
    if !args.long && (full_preset || study.workload() > DESK_WORKLOAD) {
        return Err(usage(
            "long",
            format!(
                "study needs {} bootstrap estimates; rerun with --long to allow it",
                study.workload()
            ),
        ));
    }
    if let Some(dir) = &args.audit_dir {
        fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::with_capacity(designs.len());
    for (i, design) in designs.iter().enumerate() {
        eprintln!("design {}/{}: n={} a={} b={}", i + 1, designs.len(), design.n, design.a, design.b);
        let report = run_design(design)?;
        if let Some(dir) = &args.audit_dir {
            let mut w = create(&dir.join(format!("design{i}.csv")))?;
            report.write_audit_csv(&mut w)?;
            w.flush()?;
        }
        rows.push(report.row);
    }
    let format = match args.format {
        Format::Csv => TableFormat::Csv,
        Format::Markdown => TableFormat::Markdown,
    };
    write_text(args.out.as_deref(), &emit_table(&rows, format)?)
}

pub fn bound(args: &BoundArgs) -> Result<(), Error> {
    if args.nodes.is_none() && args.tol.is_none() {
        return Err(usage("L", "pass --L, --tol or both"));
    }
    let mut out = String::new();
    match args.alpha {
        None => {
            out.push_str(&format!("bound: smooth (r_n={}, d={}, C={})\n", args.r_n, args.d, args.c));
            if let Some(l) = args.nodes {
                let b = smooth_bound(args.r_n, args.d, args.c, l)?;
                out.push_str(&format!("L: {l}\nbound: {b:.6}\n"));
                out.push_str(&format!("rate ratio L/r_n^(1/4): {:.6}\n", l as f64 / args.r_n.powf(0.25)));
            }
            if let Some(tol) = args.tol {
                let l = smooth_min_nodes(args.r_n, args.d, args.c, tol)?;
                out.push_str(&format!("minimal L for bound <= {tol}: {l}\n"));
            }
            out.push_str("rate condition: L_n = omega(r_n^(1/4))\n");
        }
        Some(alpha) => {
            out.push_str(&format!(
                "bound: Hölder (r_n={}, C_tilde={}, C={}, alpha={alpha})\n",
                args.r_n, args.c_tilde, args.c
            ));
            let exponent = 1.0 / (2.0 * alpha);
            if let Some(l) = args.nodes {
                let b = holder_bound(args.r_n, args.c_tilde, args.c, alpha, l)?;
                out.push_str(&format!("L: {l}\nbound: {b:.6}\n"));
                out.push_str(&format!(
                    "rate ratio L/r_n^({exponent}): {:.6}\n",
                    l as f64 / args.r_n.powf(exponent)
                ));
            }
            if let Some(tol) = args.tol {
                let l = holder_min_nodes(args.r_n, args.c_tilde, args.c, alpha, tol)?;
                out.push_str(&format!("minimal L for bound <= {tol}: {l}\n"));
            }
            out.push_str(&format!("rate condition: L_n = omega(r_n^(1/(2*{alpha}))) = omega(r_n^{exponent})\n"));
        }
    }
    write_text(None, &out)
}
