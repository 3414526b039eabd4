//! Experiment driver: convergence and α-sweep studies against the
//! continuous oracle, exactness checks, variant comparison, sparsity audit
//! and operator dumps, with CSV/SVG artifacts and a JSON-lines manifest.

pub mod config;
pub mod output;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::complex::{Box3, Grid3};
use crate::error::{FdecError, Result};
use crate::forms::{continuous_d_alpha, de_rham, fields, rms_error_cochain, Cochain, FormSpec};
use crate::operators::{assemble_b, assemble_m, sparsity_formula, AssemblyRecord, OperatorSet, Variant};
use crate::sparsekit::to_triplet_csv;

pub use config::{Experiment, ExperimentConfig};
use output::{fmt_f64, write_atomic, Series};

/// Exactness residuals above this are reported as failures.
pub const EXACTNESS_TOL: f64 = 1e-12;

/// One line of a result table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub field: String,
    pub p: usize,
    pub alpha: f64,
    pub n: usize,
    pub rms_error: f64,
    pub eoc: Option<f64>,
    pub wall_ms: f64,
}

/// Measured versus closed-form sizes for one `(n, β, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityRow {
    pub n: usize,
    pub beta: f64,
    pub p: usize,
    pub n_p: usize,
    pub n0: usize,
    pub nnz_b: usize,
    pub expected_nnz_b: usize,
    pub m_rows: usize,
    pub m_cols: usize,
    pub nnz_m: usize,
    pub expected_nnz_m: usize,
    pub density_m: f64,
    pub matches: bool,
}

/// Per-case timing and assembly metadata (manifest only).
#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    pub experiment: String,
    pub p: usize,
    pub alpha: f64,
    pub n: usize,
    pub wall_ms: f64,
    pub assembly: Vec<AssemblyRecord>,
}

/// Cochains behind one sampled row, kept for the round-trip audit.
#[derive(Debug, Clone)]
pub struct AuditSample {
    pub row: usize,
    pub computed: Cochain,
    pub reference: Cochain,
    pub measures: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub rows: Vec<ResultRow>,
    pub cases: Vec<CaseRecord>,
    pub audit: Option<AuditSample>,
}

/// Empirical order `ln(e_prev/e_cur) / ln(n_cur/n_prev)`; `log2` of the
/// error ratio for doublings.
pub fn eoc(n_prev: usize, e_prev: f64, n_cur: usize, e_cur: f64) -> Option<f64> {
    if e_prev > 0.0 && e_cur > 0.0 && n_cur > n_prev {
        Some((e_prev / e_cur).ln() / (n_cur as f64 / n_prev as f64).ln())
    } else {
        None
    }
}

/// Sorts rows by `(experiment, field, p, α, n)` and fills EOC between
/// successive `n` of each group.
pub fn finalize_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (a.experiment.as_str(), a.p, a.field.as_str())
            .cmp(&(b.experiment.as_str(), b.p, b.field.as_str()))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.n.cmp(&b.n))
    });
    for i in 0..rows.len() {
        rows[i].eoc = None;
        if i > 0 {
            let (prev, cur) = (&rows[i - 1], &rows[i]);
            if prev.experiment == cur.experiment && prev.field == cur.field && prev.p == cur.p && prev.alpha == cur.alpha {
                rows[i].eoc = eoc(prev.n, prev.rms_error, cur.n, cur.rms_error);
            }
        }
    }
}

struct CaseResult {
    computed: Cochain,
    reference: Cochain,
    measures: Vec<f64>,
}

type CaseFn<'a> = dyn Fn(&OperatorSet, usize, &FormSpec) -> Result<CaseResult> + Sync + 'a;

fn unit_grid(n: usize) -> Result<Grid3> {
    Grid3::uniform(&Box3::unit(), [n, n, n])
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| FdecError::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `case` for every `(p, α, n)` of the experiment. Jobs are keyed by
/// `(α, n)` so that one operator set serves all degrees.
fn run_cases(cfg: &ExperimentConfig, exp: Experiment, label: &str, case: &CaseFn<'_>) -> Result<Table> {
    cfg.validate(exp)?;
    let ps = cfg.p_list(exp);
    let alphas = cfg.alpha_list(exp);
    let forms = ps
        .iter()
        .map(|&p| Ok((p, cfg.field_for(p), fields::field(&cfg.field_for(p), p)?)))
        .collect::<Result<Vec<_>>>()?;
    let all_n: BTreeSet<usize> = ps.iter().flat_map(|&p| cfg.n_list(exp, p)).collect();
    let jobs: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| all_n.iter().map(move |&n| (a, n)))
        .collect();
    let mut keys: Vec<(usize, usize, usize)> = Vec::new();
    for &(a_idx, n) in &alphas
        .iter()
        .enumerate()
        .flat_map(|(i, _)| all_n.iter().map(move |&n| (i, n)))
        .collect::<Vec<_>>()
    {
        for &p in &ps {
            if cfg.n_list(exp, p).contains(&n) {
                keys.push((p, a_idx, n));
            }
        }
    }
    keys.sort();
    let sampled = if keys.is_empty() {
        None
    } else {
        let k = ChaCha8Rng::seed_from_u64(cfg.seed).gen_range(0..keys.len());
        Some(keys[k])
    };

    type JobOut = Vec<(ResultRow, CaseRecord, Option<CaseResult>)>;
    let results: Vec<Result<JobOut>> = with_pool(cfg.jobs, || {
        jobs.par_iter()
            .enumerate()
            .map(|(job, &(alpha, n))| {
                let a_idx = job / all_n.len();
                let ops = OperatorSet::for_alpha(unit_grid(n)?, alpha)?;
                let mut out = Vec::new();
                for (p, field, form) in &forms {
                    if !cfg.n_list(exp, *p).contains(&n) {
                        continue;
                    }
                    let before = ops.records().len();
                    let start = Instant::now();
                    let res = case(&ops, *p, form)?;
                    let err = rms_error_cochain(&res.computed, &res.reference, &res.measures)?;
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    log::info!("{label} p={p} alpha={alpha} n={n}: {err:.3e} ({wall_ms:.0} ms)");
                    let row = ResultRow {
                        experiment: label.to_string(),
                        field: field.clone(),
                        p: *p,
                        alpha,
                        n,
                        rms_error: err,
                        eoc: None,
                        wall_ms,
                    };
                    let record = CaseRecord {
                        experiment: label.to_string(),
                        p: *p,
                        alpha,
                        n,
                        wall_ms,
                        assembly: ops.records()[before..].to_vec(),
                    };
                    let keep = sampled == Some((*p, a_idx, n));
                    out.push((row, record, keep.then_some(res)));
                }
                Ok(out)
            })
            .collect()
    })?;

    let mut table = Table::default();
    let mut kept = None;
    for job in results {
        for (row, record, res) in job? {
            if let Some(res) = res {
                kept = Some((row.clone(), res));
            }
            table.rows.push(row);
            table.cases.push(record);
        }
    }
    finalize_rows(&mut table.rows);
    if let Some((row, res)) = kept {
        let idx = table.rows.iter().position(|r| *r == ResultRow { eoc: r.eoc, ..row.clone() });
        table.audit = idx.map(|row| AuditSample {
            row,
            computed: res.computed,
            reference: res.reference,
            measures: res.measures,
        });
    }
    Ok(table)
}

fn convergence_case(cfg: &ExperimentConfig) -> impl Fn(&OperatorSet, usize, &FormSpec) -> Result<CaseResult> + Sync + '_ {
    move |ops, p, form| {
        let grid = ops.grid();
        let r = de_rham(form, grid, cfg.quad)?;
        let computed = ops.apply_variant(cfg.variant, p, &r)?;
        let oracle = continuous_d_alpha(form, ops.alpha(), cfg.quad)?;
        let reference = de_rham(&oracle, grid, cfg.quad)?;
        Ok(CaseResult {
            computed,
            reference,
            measures: ops.measures(p + 1)?.to_vec(),
        })
    }
}

fn exactness_case(quad: crate::fraccalc::QuadratureSpec, variant: Variant) -> impl Fn(&OperatorSet, usize, &FormSpec) -> Result<CaseResult> + Sync {
    move |ops, p, form| {
        let r = de_rham(form, ops.grid(), quad)?;
        let once = ops.apply_variant(variant, p, &r)?;
        let twice = ops.apply_variant(variant, p + 1, &once)?;
        let reference = Cochain::new(p + 2, vec![0.0; twice.len()]);
        Ok(CaseResult {
            computed: twice,
            reference,
            measures: ops.measures(p + 2)?.to_vec(),
        })
    }
}

/// Error of `D_p^α R_p ω` against `R_{p+1} d_p^α ω` over `(p, α, n)`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Table> {
    run_cases(cfg, Experiment::Convergence, "convergence", &convergence_case(cfg))
}

/// Same error over an α grid at a fixed `n` per degree.
pub fn run_alpha_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    run_cases(cfg, Experiment::AlphaSweep, "alpha-sweep", &convergence_case(cfg))
}

/// `RMS(V_{p+2}^{-1} D_{p+1}^α D_p^α R_p ω)` over `(p, α, n)`.
pub fn run_exactness(cfg: &ExperimentConfig) -> Result<Table> {
    run_cases(cfg, Experiment::Exactness, "exactness", &exactness_case(cfg.quad, cfg.variant))
}

/// Exactness residuals for every variant; experiment labels are
/// `variants:<name>`.
pub fn run_variants(cfg: &ExperimentConfig) -> Result<Table> {
    let mut all = Table::default();
    for v in Variant::ALL {
        let label = format!("variants:{v}");
        let t = run_cases(cfg, Experiment::Variants, &label, &exactness_case(cfg.quad, v))?;
        let offset = all.rows.len();
        all.rows.extend(t.rows);
        all.cases.extend(t.cases);
        if all.audit.is_none() {
            all.audit = t.audit.map(|a| AuditSample { row: a.row + offset, ..a });
        }
    }
    Ok(all)
}

/// Measured `B_p`, `M_p^{1+β}` sizes against the closed forms.
pub fn run_sparsity_audit(ns: &[usize], betas: &[f64]) -> Result<Vec<SparsityRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let grid = unit_grid(n)?;
        for &beta in betas {
            for p in 1..=3 {
                let f = sparsity_formula(n, p)?;
                let b = assemble_b(&grid, p)?;
                let m = assemble_m(&grid, p, beta)?;
                let density_m = m.nnz() as f64 / (m.nrows() as f64 * m.ncols() as f64);
                let matches = b.shape() == (f.n_p, f.m_rows)
                    && b.nnz() == f.nnz_b
                    && m.shape() == (f.m_rows, f.n_p)
                    && m.nnz() == f.nnz_m
                    && (p != 3 || density_m == 0.125);
                rows.push(SparsityRow {
                    n,
                    beta,
                    p,
                    n_p: b.nrows(),
                    n0: grid.num_cells(0)?,
                    nnz_b: b.nnz(),
                    expected_nnz_b: f.nnz_b,
                    m_rows: m.nrows(),
                    m_cols: m.ncols(),
                    nnz_m: m.nnz(),
                    expected_nnz_m: f.nnz_m,
                    density_m,
                    matches,
                });
            }
        }
    }
    Ok(rows)
}

/// Artifacts and check failures of one executed experiment.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub artifacts: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub rows: Vec<ResultRow>,
    pub sparsity: Vec<SparsityRow>,
    pub manifest: PathBuf,
}

struct Writer<'a> {
    out: &'a Path,
    artifacts: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.artifacts.push(path);
        Ok(())
    }
}

fn plots(w: &mut Writer<'_>, stem: &str, rows: &[ResultRow], by_alpha: bool) -> Result<()> {
    let ps: BTreeSet<usize> = rows.iter().map(|r| r.p).collect();
    for p in ps {
        let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.p == p).collect();
        let series: Vec<Series> = if by_alpha {
            let mut labels: Vec<(String, f64)> = Vec::new();
            for r in &sel {
                if !labels.iter().any(|(e, a)| *e == r.experiment && *a == r.alpha) {
                    labels.push((r.experiment.clone(), r.alpha));
                }
            }
            labels
                .into_iter()
                .map(|(e, a)| Series {
                    label: if e.contains(':') {
                        format!("{} a={a}", e.split(':').nth(1).unwrap_or(&e))
                    } else {
                        format!("alpha={a}")
                    },
                    points: sel
                        .iter()
                        .filter(|r| r.experiment == e && r.alpha == a)
                        .map(|r| (r.n as f64, r.rms_error))
                        .collect(),
                })
                .collect()
        } else {
            vec![Series {
                label: format!("n={}", sel.first().map(|r| r.n).unwrap_or(0)),
                points: sel.iter().map(|r| (1.0 - r.alpha, r.rms_error)).collect(),
            }]
        };
        let (xlabel, title) = if by_alpha {
            ("subdivisions n", format!("{stem}, p={p}"))
        } else {
            ("1 - alpha", format!("{stem}, p={p}"))
        };
        let svg = output::svg_loglog(&title, xlabel, "RMS error", &series);
        w.write(&format!("{stem}_p{p}.svg"), &svg)?;
    }
    Ok(())
}

fn audit(w: &mut Writer<'_>, stem: &str, table: &Table) -> Result<serde_json::Value> {
    let Some(a) = &table.audit else {
        return Ok(json!({"kind": "audit", "skipped": true}));
    };
    let row = &table.rows[a.row];
    let mut csv = String::from("index,computed,reference,measure\n");
    for i in 0..a.computed.len() {
        csv.push_str(&format!(
            "{i},{},{},{}\n",
            fmt_f64(a.computed.values[i]),
            fmt_f64(a.reference.values[i]),
            fmt_f64(a.measures[i])
        ));
    }
    let name = format!("audit/{stem}_p{}_n{}.csv", row.p, row.n);
    w.write(&name, &csv)?;
    let path = w.out.join(&name);
    let text = std::fs::read_to_string(&path).map_err(|e| FdecError::io(&path, e))?;
    let mut cols: [Vec<f64>; 3] = Default::default();
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(FdecError::Parse(format!("audit line '{line}'")));
        }
        for k in 0..3 {
            cols[k].push(parts[k + 1].parse().map_err(|_| FdecError::Parse(format!("audit value '{}'", parts[k + 1])))?);
        }
    }
    let [c, r, m] = cols;
    let recomputed = rms_error_cochain(&Cochain::new(a.computed.degree, c), &Cochain::new(a.reference.degree, r), &m)?;
    Ok(json!({
        "kind": "audit",
        "path": path.display().to_string(),
        "experiment": row.experiment,
        "p": row.p,
        "alpha": row.alpha,
        "n": row.n,
        "reported": row.rms_error,
        "recomputed": recomputed,
        "ok": recomputed == row.rms_error,
    }))
}

fn dump_operators(w: &mut Writer<'_>, cfg: &ExperimentConfig) -> Result<Vec<AssemblyRecord>> {
    let n = cfg.n_list(Experiment::DumpOperators, 0)[0];
    let alpha = cfg.alpha_list(Experiment::DumpOperators)[0];
    let ops = OperatorSet::for_alpha(unit_grid(n)?, alpha)?;
    for p in 0..=2 {
        w.write(&format!("operators/D{p}.csv"), &to_triplet_csv(ops.d(p)?))?;
    }
    for p in 1..=3 {
        w.write(&format!("operators/B{p}.csv"), &to_triplet_csv(ops.b(p)?))?;
        w.write(&format!("operators/M{p}.csv"), &to_triplet_csv(ops.m(p)?))?;
        w.write(&format!("operators/dI{p}.csv"), &to_triplet_csv(ops.di(p)?))?;
    }
    let records = ops.records();
    let mut jl = String::new();
    for r in &records {
        jl.push_str(&serde_json::to_string(&json!({
            "matrix": r.matrix, "p": r.p, "beta": r.beta, "rows": r.rows, "cols": r.cols, "nnz": r.nnz,
        }))
        .expect("serializable"));
        jl.push('\n');
    }
    w.write("operators/operators.jsonl", &jl)?;
    Ok(records)
}

/// Runs an experiment, writes its artifacts and manifest under `cfg.out`
/// and collects failed checks.
pub fn execute(exp: Experiment, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(exp)?;
    let mut w = Writer {
        out: &cfg.out,
        artifacts: Vec::new(),
    };
    let mut report = Report::default();
    let mut manifest_lines = vec![json!({
        "kind": "run",
        "command": exp.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_pairs(),
    })];
    let stem = exp.name().replace('-', "_");
    let table = match exp {
        Experiment::Convergence => Some(run_convergence(cfg)?),
        Experiment::AlphaSweep => Some(run_alpha_sweep(cfg)?),
        Experiment::Exactness => Some(run_exactness(cfg)?),
        Experiment::Variants => Some(run_variants(cfg)?),
        Experiment::Sparsity => {
            let ns = cfg.n_list(exp, 0);
            let rows = run_sparsity_audit(&ns, &cfg.beta_list())?;
            w.write("sparsity.csv", &output::sparsity_csv(&rows))?;
            for r in rows.iter().filter(|r| !r.matches) {
                report.failures.push(format!(
                    "sparsity mismatch at n={} beta={} p={}: nnz(B)={} (expected {}), nnz(M)={} (expected {})",
                    r.n, r.beta, r.p, r.nnz_b, r.expected_nnz_b, r.nnz_m, r.expected_nnz_m
                ));
            }
            report.sparsity = rows;
            None
        }
        Experiment::DumpOperators => {
            for r in dump_operators(&mut w, cfg)? {
                manifest_lines.push(json!({"kind": "assembly", "record": r}));
            }
            None
        }
    };
    if let Some(table) = table {
        w.write(&format!("{stem}.csv"), &output::results_csv(&table.rows, cfg.timings))?;
        match exp {
            Experiment::AlphaSweep => {
                w.write("alpha_sweep_loglog.csv", &output::loglog_csv(&table.rows))?;
                plots(&mut w, &stem, &table.rows, false)?;
            }
            _ => plots(&mut w, &stem, &table.rows, true)?,
        }
        for r in &table.rows {
            let strict = match exp {
                Experiment::Exactness => true,
                Experiment::Variants => r.experiment != format!("variants:{}", Variant::DrlDRight),
                _ => false,
            };
            if strict && !(r.rms_error <= EXACTNESS_TOL) {
                report.failures.push(format!(
                    "{} residual {:.3e} exceeds {EXACTNESS_TOL:e} at p={} alpha={} n={}",
                    r.experiment, r.rms_error, r.p, r.alpha, r.n
                ));
            }
        }
        for c in &table.cases {
            manifest_lines.push(json!({"kind": "case", "record": c}));
        }
        let a = audit(&mut w, &stem, &table)?;
        if a.get("ok") == Some(&serde_json::Value::Bool(false)) {
            report.failures.push(format!("round-trip audit mismatch: {a}"));
        }
        manifest_lines.push(a);
        report.rows = table.rows;
    }
    for p in &w.artifacts {
        manifest_lines.push(json!({"kind": "artifact", "path": p.display().to_string()}));
    }
    let mut manifest = String::new();
    for l in &manifest_lines {
        manifest.push_str(&serde_json::to_string(l).expect("serializable"));
        manifest.push('\n');
    }
    let mpath = cfg.out.join("manifest.jsonl");
    write_atomic(&mpath, manifest.as_bytes())?;
    report.manifest = mpath;
    report.artifacts = w.artifacts;
    Ok(report)
}
