//! One function per subcommand. Each returns the files it wants written and its
//! verdict; nothing touches the file system here.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde_json::{json, Value};

use levy_fock::exponent::{convert as convert_triplet, validate_triplet, Convention, LevyTriplet, TripletSpec};
use levy_fock::fock::{self, DEFAULT_DIMENSION_BUDGET};
use levy_fock::gns::{self, GnsError, KernelMatrix};
use levy_fock::grid;
use levy_fock::io::fmt17;
use levy_fock::posdef::{self, GridFunction, PosdefError, TripletCharFn, TripletExponent};
use levy_fock::sampler::{self, PathSpec};

use crate::output::{sha256_hex, FileDigest, Outputs};
use crate::{Common, EmbedArgs, Format, GnsArgs, SampleArgs};

/// Gram reproduction of a realization, relative to the largest eigenvalue.
const REALIZATION_TOL: f64 = 1e-8;
/// Shift covariance, relative to `1 + max|K|`.
const SHIFT_TOL: f64 = 1e-8;
/// Vacuum expectation against `F`, relative to `1 + |F|`.
const VACUUM_TOL: f64 = 1e-9;
/// Weyl unitarity and representation residuals, relative to their scale.
const WEYL_TOL: f64 = 1e-7;
/// Drift round trip of a conversion.
const ROUND_TRIP_TOL: f64 = 1e-10;
/// Pointwise exponent agreement across conventions, relative.
const CONVERSION_TOL: f64 = 1e-9;
/// Most path files one `sample` run may write.
const MAX_PATH_FILES: usize = 1000;

const DEFAULT_GRID: &str = "-4:4:0.5";
const DEFAULT_ECF_GRID: &str = "-3:3:0.3";

pub struct Run {
    pub outputs: Outputs,
    pub inputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub settings: BTreeMap<String, Value>,
    pub passed: bool,
    pub summary: Vec<String>,
}

impl Run {
    fn new(common: &Common, input: FileDigest) -> Self {
        let mut settings = BTreeMap::new();
        settings.insert("tol".into(), json!(common.tol));
        settings.insert(
            "format".into(),
            json!(match common.format {
                Format::Csv => "csv",
                Format::Json => "json",
            }),
        );
        Self {
            outputs: Outputs::default(),
            inputs: vec![input],
            seed: None,
            settings,
            passed: true,
            summary: vec![],
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.settings.insert(key.into(), value);
    }

    fn verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.summary
            .push(format!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" }));
    }
}

enum Input {
    Triplet(LevyTriplet),
    /// Well-formed triplet that fails an integrability condition of its convention.
    Inadmissible(TripletSpec),
    Table(GridFunction),
}

fn read_input(path: &Path) -> anyhow::Result<(Input, FileDigest)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let table = GridFunction::read_csv(bytes.as_slice()).with_context(|| format!("reading table {}", path.display()))?;
        let table = GridFunction::char_fn(table.points().to_vec(), table.values().to_vec())?;
        return Ok((Input::Table(table), digest));
    }
    let text = String::from_utf8(bytes).context("triplet document is not UTF-8")?;
    let spec = TripletSpec::from_json(&text)?;
    let diag = validate_triplet(&spec);
    if let Some(bad) = diag
        .checks
        .iter()
        .find(|c| !c.passed && matches!(c.name.as_str(), "drift" | "diffusion" | "measure"))
    {
        bail!("invalid triplet: {}: {}", bad.name, bad.detail);
    }
    let input = if diag.passed {
        Input::Triplet(spec.build()?)
    } else {
        Input::Inadmissible(spec)
    };
    Ok((input, digest))
}

fn grid_points(common: &Common, default: &str, run: &mut Run) -> anyhow::Result<Vec<f64>> {
    let spec = common.grid.as_deref().unwrap_or(default);
    run.set("grid", json!(spec));
    Ok(grid::parse_spec(spec)?)
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Aborts with a diagnostics report when the triplet is not admissible.
fn require_triplet(input: Input, run: &mut Run, command: &str) -> anyhow::Result<Option<LevyTriplet>> {
    match input {
        Input::Triplet(t) => Ok(Some(t)),
        Input::Table(_) => bail!("{command} needs a triplet document (.json), not a table"),
        Input::Inadmissible(spec) => {
            let diag = validate_triplet(&spec);
            run.outputs.add_json("report.json", &json!({ "diagnostics": diag }));
            let detail = diag
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            run.verdict("triplet", false, detail);
            Ok(None)
        }
    }
}

pub fn eval(common: &Common) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    let Some(trip) = require_triplet(input, &mut run, "eval")? else {
        return Ok(run);
    };
    let f = trip.exponent_grid(&points)?;
    match common.format {
        Format::Csv => run.outputs.add_csv("exponent.csv", |w| {
            use std::io::Write;
            writeln!(w, "t,f_re,f_im,F_re,F_im")?;
            for (t, v) in f.points.iter().zip(&f.values) {
                let big = v.exp();
                writeln!(w, "{},{},{},{},{}", fmt17(*t), fmt17(v.re), fmt17(v.im), fmt17(big.re), fmt17(big.im))?;
            }
            Ok(())
        }),
        Format::Json => run.outputs.add_json(
            "exponent.json",
            &json!({
                "t": f.points,
                "f": f.values.iter().map(|v| pair(*v)).collect::<Vec<_>>(),
                "F": f.values.iter().map(|v| pair(v.exp())).collect::<Vec<_>>(),
            }),
        ),
    }
    let diag = trip.diagnostics();
    run.verdict("triplet", diag.passed, format!("{} convention, {} points", trip.convention(), points.len()));
    run.outputs.add_json("report.json", &json!({ "diagnostics": diag, "points": points.len() }));
    Ok(run)
}

pub fn convert(common: &Common, target: Convention) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    run.set("target", json!(target.to_string()));
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    let Some(trip) = require_triplet(input, &mut run, "convert")? else {
        return Ok(run);
    };
    let converted = match convert_triplet(&trip, target) {
        Ok(c) => c,
        Err(e @ levy_fock::exponent::ExponentError::Inadmissible { .. }) => {
            run.outputs.add_json("report.json", &json!({ "from": trip.convention().to_string(), "to": target.to_string(), "error": e.to_string() }));
            run.verdict("conversion", false, e.to_string());
            return Ok(run);
        }
        Err(e) => return Err(e.into()),
    };
    let back = convert_triplet(&converted, trip.convention())?;
    let round_trip = (back.drift() - trip.drift()).abs();
    let before = trip.exponent_grid(&points)?;
    let after = converted.exponent_grid(&points)?;
    let agreement = before
        .values
        .iter()
        .zip(&after.values)
        .map(|(a, b)| (a - b).norm() / a.norm().max(1.0))
        .fold(0.0, f64::max);
    run.verdict("round_trip", round_trip <= ROUND_TRIP_TOL, format!("|b − b'| = {round_trip:e}"));
    run.verdict("exponent", agreement <= CONVERSION_TOL, format!("max relative deviation {agreement:e}"));
    run.outputs.add_json("triplet.json", &converted.to_spec());
    run.outputs.add_json(
        "report.json",
        &json!({
            "from": trip.convention().to_string(),
            "to": target.to_string(),
            "b_from": trip.drift(),
            "b_to": converted.drift(),
            "round_trip_error": round_trip,
            "max_relative_exponent_deviation": agreement,
            "passed": run.passed,
        }),
    );
    Ok(run)
}

fn verdict_json(v: &posdef::PsdVerdict) -> Value {
    json!({
        "pass": v.is_psd,
        "min_eigenvalue": v.min_eigenvalue,
        "scale": v.scale,
        "tol": v.tol,
        "eigenvalues": v.eigenvalues,
    })
}

fn check_pd_report(input: Input, common: &Common, points: &[f64], run: &mut Run) -> anyhow::Result<Option<Value>> {
    let report = match input {
        Input::Table(table) => {
            let gram = posdef::psd_check(&posdef::gram(&table, None)?, common.tol)?;
            run.verdict("gram", gram.is_psd, format!("min eigenvalue {:e}", gram.min_eigenvalue));
            json!({ "nodes": table.nonnegative_points(), "gram": verdict_json(&gram) })
        }
        other => {
            let Some(trip) = require_triplet(other, run, "check-pd")? else {
                return Ok(None);
            };
            let gram = posdef::psd_check(&posdef::gram_with(points, &TripletCharFn(&trip), None)?, common.tol)?;
            let cond = posdef::psd_check(&posdef::conditional_matrix(points, &TripletExponent(&trip))?, common.tol)?;
            run.verdict("gram", gram.is_psd, format!("min eigenvalue {:e}", gram.min_eigenvalue));
            run.verdict("conditional", cond.is_psd, format!("min eigenvalue {:e}", cond.min_eigenvalue));
            json!({ "nodes": points, "gram": verdict_json(&gram), "conditional": verdict_json(&cond) })
        }
    };
    Ok(Some(report))
}

pub fn check_pd(common: &Common) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    if let Some(report) = check_pd_report(input, common, &points, &mut run)? {
        run.outputs.add_json("report.json", &report);
    }
    Ok(run)
}

fn roots_csv(report: &posdef::DivisibilityReport) -> impl FnOnce(&mut Vec<u8>) -> std::io::Result<()> + '_ {
    move |w| {
        use std::io::Write;
        writeln!(w, "n,min_eigenvalue,scale,pass")?;
        for r in &report.roots {
            writeln!(w, "{},{},{},{}", r.n, fmt17(r.verdict.min_eigenvalue), fmt17(r.verdict.scale), r.verdict.is_psd)?;
        }
        Ok(())
    }
}

fn check_id_report(input: Input, common: &Common, nmax: usize, points: &[f64], run: &mut Run) -> anyhow::Result<Option<Value>> {
    let (report, conditional) = match input {
        Input::Table(table) => (posdef::infinite_divisibility_check(&table, nmax, common.tol)?, None),
        other => {
            let Some(trip) = require_triplet(other, run, "check-id")? else {
                return Ok(None);
            };
            let diffs = grid::difference_grid(points, 1);
            let table = GridFunction::from_triplet_exponent(&trip, diffs)?;
            let report = posdef::roots_check(&table, points, nmax, common.tol)?;
            let cond = posdef::psd_check(&posdef::conditional_matrix(points, &TripletExponent(&trip))?, common.tol)?;
            (report, Some(cond))
        }
    };
    match &report.branch_failure {
        Some(why) => run.verdict("divisibility", false, format!("no continuous logarithm: {why}")),
        None => {
            let failed: Vec<usize> = report.roots.iter().filter(|r| !r.verdict.is_psd).map(|r| r.n).collect();
            let detail = if failed.is_empty() {
                format!("all n ≤ {nmax} pass")
            } else {
                format!("roots failing PSD: {failed:?}")
            };
            run.verdict("divisibility", report.passed, detail);
        }
    }
    if let Some(c) = &conditional {
        run.verdict("conditional", c.is_psd, format!("min eigenvalue {:e}", c.min_eigenvalue));
    }
    run.outputs.add_csv("roots.csv", roots_csv(&report));
    Ok(Some(json!({
        "divisibility": report,
        "conditional": conditional.as_ref().map(verdict_json),
    })))
}

pub fn check_id(common: &Common, nmax: usize) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    run.set("nmax", json!(nmax));
    run.set("branch_floor", json!(posdef::DEFAULT_BRANCH_FLOOR));
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    if let Some(report) = check_id_report(input, common, nmax, &points, &mut run)? {
        run.outputs.add_json("report.json", &report);
    }
    Ok(run)
}

/// `Ok(None)` when a table is too short for the shifted points.
fn optional<T>(r: Result<T, GnsError>) -> anyhow::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(GnsError::UnevaluableShift(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn gns_report(input: Input, args: &GnsArgs, points: &[f64], run: &mut Run) -> anyhow::Result<Option<Value>> {
    let (k, shift, fit) = match input {
        Input::Table(table) => {
            let branch = match posdef::log_branch(&table) {
                Ok(b) => b,
                Err(e @ (PosdefError::ZeroCrossing { .. } | PosdefError::SignChange { .. })) => {
                    run.verdict("logarithm", false, e.to_string());
                    return Ok(Some(json!({ "error": e.to_string() })));
                }
                Err(e) => return Err(e.into()),
            };
            let k = gns::kernel_matrix(&branch)?;
            let shift = optional(gns::shift_covariance_residual(&branch, &k.grid, args.shift))?;
            let real = realize(&k, args.eigen_floor, run)?;
            let fit = match &real {
                Some(r) => optional(gns::coboundary_residual(r, &branch))?,
                None => None,
            };
            (k, shift, fit.zip(real))
        }
        other => {
            let Some(trip) = require_triplet(other, run, "gns")? else {
                return Ok(None);
            };
            let k = gns::kernel_matrix_from_triplet(&trip, points)?;
            let shift = Some(gns::shift_covariance_residual(&trip, points, args.shift)?);
            let real = realize(&k, args.eigen_floor, run)?;
            let fit = match &real {
                Some(r) => Some(gns::coboundary_residual(r, &trip)?),
                None => None,
            };
            (k, shift, fit.zip(real))
        }
    };
    let scale = 1.0 + k.max_abs();
    match shift {
        Some(s) => run.verdict("shift_covariance", s <= SHIFT_TOL * scale, format!("residual {s:e} at h = {}", args.shift)),
        None => run.summary.push(format!("SKIP shift_covariance: h = {} leaves the table", args.shift)),
    }
    let mut report = json!({
        "points": k.grid,
        "shift": args.shift,
        "shift_covariance_residual": shift,
        "shift_covariance_limit": SHIFT_TOL * scale,
    });
    run.outputs.add_json("kernel.json", &k);
    if let Some((fit, real)) = &fit {
        let coboundary = fit.normalized <= args.coboundary_threshold;
        run.summary.push(format!(
            "INFO cocycle: rank {}, normalized coboundary residual {:e} ({})",
            real.rank,
            fit.normalized,
            if coboundary { "coboundary" } else { "not a coboundary" }
        ));
        report["rank"] = json!(real.rank);
        report["gram_error"] = json!(real.gram_error(&k));
        report["coboundary"] = json!({
            "residual": fit.residual,
            "normalized": fit.normalized,
            "max_norm": fit.max_norm,
            "threshold": args.coboundary_threshold,
            "is_coboundary": coboundary,
            "psi0": fit.psi0.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
        });
        run.outputs.add_json("realization.json", real);
    }
    report["passed"] = json!(run.passed);
    Ok(Some(report))
}

/// Realization with its Gram check, or `None` (and a failed verdict) for an
/// indefinite kernel.
fn realize(k: &KernelMatrix, floor: f64, run: &mut Run) -> anyhow::Result<Option<gns::CocycleRealization>> {
    match gns::realize_cocycle(k, floor) {
        Ok(real) => {
            let err = real.gram_error(k);
            let lmax = real.eigenvalues.first().copied().unwrap_or(0.0);
            run.verdict(
                "realization",
                err <= REALIZATION_TOL * lmax.max(f64::MIN_POSITIVE),
                format!("rank {}, Gram error {err:e}", real.rank),
            );
            Ok(Some(real))
        }
        Err(e @ GnsError::NotPsd { .. }) => {
            run.verdict("realization", false, e.to_string());
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn gns(common: &Common, args: &GnsArgs) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    run.set("shift", json!(args.shift));
    run.set("coboundary_threshold", json!(args.coboundary_threshold));
    run.set("eigen_floor", json!(args.eigen_floor));
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    if let Some(report) = gns_report(input, args, &points, &mut run)? {
        run.outputs.add_json("report.json", &report);
    }
    Ok(run)
}

fn embed_report(trip: &LevyTriplet, args: &EmbedArgs, eigen_floor: f64, points: &[f64], run: &mut Run) -> anyhow::Result<Value> {
    let vacuum_dev = points
        .iter()
        .map(|&t| {
            let v = fock::vacuum_expectation(trip, t)?;
            let f = trip.char_fn(t)?;
            Ok((v - f).norm() / (1.0 + f.norm()))
        })
        .collect::<anyhow::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    run.verdict("vacuum", vacuum_dev <= VACUUM_TOL, format!("max relative deviation from F {vacuum_dev:e}"));

    let unitarity = fock::weyl_unitarity_residual(trip, points, args.shift)?;
    run.verdict(
        "unitarity",
        unitarity.relative() <= WEYL_TOL,
        format!("residual {:e} at scale {:e}", unitarity.residual, unitarity.scale),
    );
    let rep = fock::representation_residual(trip, points, args.shift, args.shift2)?;
    run.verdict(
        "representation",
        rep.relative() <= WEYL_TOL,
        format!("residual {:e} at scale {:e}", rep.residual, rep.scale),
    );

    let k = gns::kernel_matrix_from_triplet(trip, points)?;
    let real = gns::realize_cocycle(&k, eigen_floor)?;
    let coherent = fock::coherent_gram_check(&real, args.degree, DEFAULT_DIMENSION_BUDGET)?;
    run.verdict(
        "coherent",
        coherent.passed,
        format!("degree {}, max error {:e} within bound {:e}", coherent.degree, coherent.max_error, coherent.max_bound),
    );
    run.outputs.add_json("weyl.json", &fock::weyl_gram(trip, points, args.shift)?);
    Ok(json!({
        "points": points,
        "vacuum_max_relative_deviation": vacuum_dev,
        "unitarity": unitarity,
        "representation": rep,
        "shift": args.shift,
        "shift2": args.shift2,
        "rank": real.rank,
        "coherent": coherent,
        "passed": run.passed,
    }))
}

pub fn embed_verify(common: &Common, args: &EmbedArgs, eigen_floor: f64) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    run.set("shift", json!(args.shift));
    run.set("shift2", json!(args.shift2));
    run.set("degree", json!(args.degree));
    run.set("eigen_floor", json!(eigen_floor));
    run.set("dimension_budget", json!(DEFAULT_DIMENSION_BUDGET));
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    let Some(trip) = require_triplet(input, &mut run, "embed-verify")? else {
        return Ok(run);
    };
    let report = embed_report(&trip, args, eigen_floor, &points, &mut run)?;
    run.outputs.add_json("report.json", &report);
    Ok(run)
}

fn sample_settings(run: &mut Run, args: &SampleArgs, paths: usize, steps: usize) {
    run.seed = Some(args.seed);
    run.set("seed", json!(args.seed));
    run.set("delta", json!(args.delta));
    run.set("horizon", json!(args.horizon));
    run.set("paths", json!(paths));
    run.set("steps", json!(steps));
    run.set("rng", json!("ChaCha20, seed_from_u64(seed), stream = path index"));
}

fn law_json(trip: &LevyTriplet, delta: f64) -> anyhow::Result<Value> {
    let law = sampler::IncrementLaw::new(trip, delta)?;
    Ok(json!({
        "effective_drift": law.drift,
        "diffusion": law.diffusion,
        "small_jump_variance": law.small_jump_variance,
        "big_jump_rate": law.big_jump_rate(),
        "delta": law.delta,
    }))
}

pub fn sample(common: &Common, args: &SampleArgs, paths: usize, steps: usize) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    sample_settings(&mut run, args, paths, steps);
    if paths > MAX_PATH_FILES {
        bail!("at most {MAX_PATH_FILES} paths can be written, got {paths}");
    }
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    let Some(trip) = require_triplet(input, &mut run, "sample")? else {
        return Ok(run);
    };
    let spec = PathSpec {
        horizon: args.horizon,
        steps,
        paths,
        seed: args.seed,
        delta: args.delta,
    };
    let all = sampler::sample_paths(&trip, &spec)?;
    match common.format {
        Format::Csv => {
            for p in &all {
                run.outputs.add_csv(format!("paths/path_{:05}.csv", p.stream), |w| p.write_csv(w));
            }
        }
        Format::Json => run.outputs.add_json("paths.json", &all),
    }
    run.outputs.add_json("report.json", &json!({ "law": law_json(&trip, args.delta)?, "spec": spec }));
    run.verdict("sample", true, format!("{paths} paths of {steps} steps"));
    Ok(run)
}

pub fn ecf_compare(
    common: &Common,
    args: &SampleArgs,
    paths: usize,
    steps: usize,
    radius_mult: f64,
    divisibility_mult: f64,
) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    sample_settings(&mut run, args, paths, steps);
    run.set("radius_mult", json!(radius_mult));
    run.set("divisibility_mult", json!(divisibility_mult));
    let points = grid_points(common, DEFAULT_ECF_GRID, &mut run)?;
    if paths == 0 || steps == 0 {
        bail!("--paths and --steps must be at least 1");
    }
    let Some(trip) = require_triplet(input, &mut run, "ecf-compare")? else {
        return Ok(run);
    };
    let spec = PathSpec {
        horizon: args.horizon,
        steps,
        paths,
        seed: args.seed,
        delta: args.delta,
    };
    let cmp = sampler::ecf_compare(&trip, &spec, &points, radius_mult)?;
    let div = sampler::divisibility_in_law(&trip, args.horizon, paths, args.seed, args.delta, &points, divisibility_mult)?;
    run.verdict(
        "ecf",
        cmp.passed,
        format!("max |ECF − exp(T f)| = {:e}, limit {:e}", cmp.max_deviation, cmp.threshold),
    );
    run.verdict(
        "divisibility_in_law",
        div.passed,
        format!("max deviation {:e}, limit {:e}", div.max_deviation, div.threshold),
    );
    match common.format {
        Format::Csv => run.outputs.add_csv("ecf.csv", |w| cmp.write_csv(w)),
        Format::Json => run.outputs.add_json("ecf.json", &cmp),
    }
    run.outputs.add_json(
        "report.json",
        &json!({
            "law": law_json(&trip, args.delta)?,
            "spec": spec,
            "max_deviation": cmp.max_deviation,
            "threshold": cmp.threshold,
            "divisibility_in_law": {
                "max_deviation": div.max_deviation,
                "threshold": div.threshold,
                "passed": div.passed,
            },
            "passed": run.passed,
        }),
    );
    Ok(run)
}

pub fn report(common: &Common, nmax: usize, gns_args: &GnsArgs, degree: usize) -> anyhow::Result<Run> {
    let (input, digest) = read_input(&common.input)?;
    let mut run = Run::new(common, digest);
    run.set("nmax", json!(nmax));
    run.set("shift", json!(gns_args.shift));
    run.set("coboundary_threshold", json!(gns_args.coboundary_threshold));
    run.set("eigen_floor", json!(gns_args.eigen_floor));
    run.set("degree", json!(degree));
    let points = grid_points(common, DEFAULT_GRID, &mut run)?;
    let Some(trip) = require_triplet(input, &mut run, "report")? else {
        return Ok(run);
    };
    let diag = trip.diagnostics();
    let pd = check_pd_report(Input::Triplet(trip.clone()), common, &points, &mut run)?;
    let id = check_id_report(Input::Triplet(trip.clone()), common, nmax, &points, &mut run)?;
    let cocycle = gns_report(Input::Triplet(trip.clone()), gns_args, &points, &mut run)?;
    let embed_args = EmbedArgs {
        shift: gns_args.shift,
        shift2: 2.0 * gns_args.shift,
        degree,
    };
    let embed = embed_report(&trip, &embed_args, gns_args.eigen_floor, &points, &mut run)?;
    run.outputs.add_json(
        "report.json",
        &json!({
            "diagnostics": diag,
            "spec": trip.to_spec(),
            "check_pd": pd,
            "check_id": id,
            "gns": cocycle,
            "embed": embed,
            "passed": run.passed,
        }),
    );
    Ok(run)
}
