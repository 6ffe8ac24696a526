//! `qgrass`: batch front end for exact Grassmann-graph computations.
//!
//! Subcommands either emit tables (q-binomials, subspace counts, enumerated
//! spaces, Laplacian matrices, spectra, kernel values, Radon matrices) or run
//! identity-verification suites that report machine-readable pass/fail JSON.
//!
//! All rationals are printed as `num/den` strings; nothing is ever rounded.
//!
//! Exit codes: 0 success (all checks pass), 1 verification failure, 2 usage
//! or validation error, 3 enumeration budget exceeded.

use clap::{Parser, Subcommand, ValueEnum};
use qgrass_core::algebra::{radon_complement, radon_subset, AlgebraError};
use qgrass_core::geometry::{self, GeometryError, GrassmannSpace};
use qgrass_core::kernels::{
    extremal_closed_form, qhahn_kernel, rodrigues_eval, ExtremalKind, IntertwinerKernel,
    QHahnForm,
};
use qgrass_core::laplacian::{graph_laplacian, group_laplacian, spectrum};
use qgrass_core::linalg::Mat;
use qgrass_core::verify::{self, VerifyError};
use qgrass_core::QContext;
use serde_json::json;
use std::process::ExitCode;

const USAGE_ERROR: u8 = 2;
const BUDGET_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qgrass",
    version,
    about = "Exact computations on Grassmann graphs over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for tables and matrices
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Enumeration budget (max points per space); overrides QGRASS_BUDGET
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Worker thread count (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian binomial coefficient [m k]_q
    Qbinom {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        m: i64,
        #[arg(long)]
        k: i64,
    },
    /// Counting formulas at (q, n): group order, level sizes, and (with
    /// --r1/--r2) pair counts per distance
    Counts {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        r1: Option<i64>,
        #[arg(long)]
        r2: Option<i64>,
    },
    /// Enumerate X_r(F_p^n) as canonical reduced-row-echelon matrices
    Enumerate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Graph Laplacian matrix on X_r (group Laplacian with --group)
    Laplacian {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        group: bool,
    },
    /// Laplacian spectrum on X_r as exact (eigenvalue, multiplicity) pairs
    Spectrum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Kernel values lambda_s^{r1,r2} on the distance index set
    Kernel {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        r1: i64,
        #[arg(long)]
        r2: i64,
        #[arg(long)]
        s: i64,
        /// 1|2|3|4|rodrigues|extremal
        #[arg(long, default_value = "1")]
        form: String,
    },
    /// Radon transform matrix: inclusion X_{r1} -> X_{r2}, or complement
    /// X_{r1} -> X_{n-r1} with --complement (r2 ignored)
    Radon {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        r1: usize,
        #[arg(long, default_value_t = 0)]
        r2: usize,
        #[arg(long)]
        complement: bool,
    },
    /// Run an identity-verification suite and emit a JSON report
    Verify {
        /// spectrum|group-laplacian|pentagon|difference|product|radon|norms|
        /// rodrigues|spherical|adjoint|fixed-s|all
        suite: String,
        #[arg(long, default_value_t = 2)]
        q: i64,
        #[arg(long, default_value_t = 4)]
        n: i64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let budget = cli
        .budget
        .or_else(|| {
            std::env::var("QGRASS_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(geometry::DEFAULT_BUDGET);
    match run(cli.command, cli.format, budget) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Usage(String),
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => USAGE_ERROR,
            CliError::Budget(_) => BUDGET_ERROR,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Budget(m) => write!(f, "{m}"),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            GeometryError::NotPrime(_) => {
                CliError::Usage("q must be prime for geometric commands".into())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Geometry(g) => g.into(),
            AlgebraError::NonPrimeBase(_) => {
                CliError::Usage("q must be prime for geometric commands".into())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Algebra(a) => a.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn context(q: i64, n: i64) -> Result<QContext, CliError> {
    QContext::new(q, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn geometric_space(p: u64, n: usize, r: usize, budget: usize) -> Result<GrassmannSpace, CliError> {
    if !geometry::is_prime(p) {
        return Err(CliError::Usage(
            "q must be prime for geometric commands".into(),
        ));
    }
    Ok(geometry::enumerate_subspaces(p, n, r, budget)?)
}

fn run(command: Command, format: Format, budget: usize) -> Result<ExitCode, CliError> {
    match command {
        Command::Qbinom { q, m, k } => {
            let ctx = context(q, 0)?;
            println!("{}", ctx.q_binomial(m, k));
            Ok(ExitCode::SUCCESS)
        }
        Command::Counts { q, n, r1, r2 } => {
            let ctx = context(q, n)?;
            let mut rows: Vec<(String, String)> =
                vec![("gl_order".into(), ctx.gl_order().to_string())];
            for r in 0..=n {
                rows.push((format!("points r={r}"), ctx.dim_vr(r).to_string()));
            }
            if let (Some(r1), Some(r2)) = (r1, r2) {
                for t in qgrass_core::kernels::index_set(n, r1, r2) {
                    rows.push((
                        format!("pairs r1={r1} r2={r2} t={t}"),
                        ctx.count_pairs_at_distance(r1, r2, t).to_string(),
                    ));
                }
            }
            emit_rows(format, &["count", "value"], rows.iter().map(|(a, b)| vec![a.clone(), b.clone()]));
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { p, n, r } => {
            let space = geometric_space(p, n, r, budget)?;
            match format {
                Format::Json => {
                    let points: Vec<_> = space
                        .points()
                        .iter()
                        .enumerate()
                        .map(|(i, x)| {
                            json!({
                                "index": i,
                                "rows": x.basis_rows().iter().map(row_string).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "p": p, "n": n, "r": r, "points": points
                        }))
                        .expect("serializable")
                    );
                }
                _ => {
                    emit_rows(
                        format,
                        &["index", "rows"],
                        space.points().iter().enumerate().map(|(i, x)| {
                            let rows: Vec<String> =
                                x.basis_rows().iter().map(row_string).collect();
                            vec![i.to_string(), rows.join("|")]
                        }),
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Laplacian { p, n, r, group } => {
            let space = geometric_space(p, n, r, budget)?;
            let mat = if group {
                let t = geometry::transvection_set(p, n)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                group_laplacian(&space, &t).map_err(|e| CliError::Usage(e.to_string()))?
            } else {
                graph_laplacian(&space)
            };
            emit_matrix(format, &mat);
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { p, n, r } => {
            let space = geometric_space(p, n, r, budget)?;
            let pairs = spectrum(&space);
            match format {
                Format::Json => {
                    let items: Vec<_> = pairs
                        .iter()
                        .map(|(eig, mult)| {
                            json!({"eigenvalue": eig.to_string(), "multiplicity": mult})
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "p": p, "n": n, "r": r, "spectrum": items
                        }))
                        .expect("serializable")
                    );
                }
                _ => emit_rows(
                    format,
                    &["eigenvalue", "multiplicity"],
                    pairs
                        .iter()
                        .map(|(e, m)| vec![e.to_string(), m.to_string()]),
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernel { q, n, r1, r2, s, form } => {
            let ctx = context(q, n)?;
            let kernel = kernel_by_form(ctx, r1, r2, s, &form)?;
            match format {
                Format::Json => {
                    let rows: Vec<_> = kernel
                        .iter()
                        .map(|(t, v)| json!({"t": t, "value": v.to_string()}))
                        .collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "q": q, "n": n, "r1": r1, "r2": r2, "s": s,
                            "form": form, "values": rows
                        }))
                        .expect("serializable")
                    );
                }
                _ => emit_rows(
                    format,
                    &["t", "value"],
                    kernel.iter().map(|(t, v)| vec![t.to_string(), v.to_string()]),
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Radon { p, n, r1, r2, complement } => {
            let src = geometric_space(p, n, r1, budget)?;
            let op = if complement {
                let dst = geometric_space(p, n, n - r1, budget)?;
                radon_complement(&src, &dst)?
            } else {
                let dst = geometric_space(p, n, r2, budget)?;
                radon_subset(&src, &dst)?
            };
            emit_matrix(format, &op.matrix);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, q, n } => {
            let report = verify::run_suite(&suite, q, n, budget)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable")
            );
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn kernel_by_form(
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
    form: &str,
) -> Result<IntertwinerKernel, CliError> {
    let map_err = |e: qgrass_core::kernels::KernelError| CliError::Usage(e.to_string());
    match form {
        "1" => qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1).map_err(map_err),
        "2" => qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form2).map_err(map_err),
        "3" => qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form3).map_err(map_err),
        "4" => qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form4).map_err(map_err),
        "rodrigues" => rodrigues_eval(ctx, r1, r2, s).map_err(map_err),
        "extremal" => {
            if r2 == s {
                extremal_closed_form(ctx, r1, s, ExtremalKind::ToMinimal).map_err(map_err)
            } else if r1 == ctx.n() - s {
                extremal_closed_form(ctx, r2, s, ExtremalKind::FromMaximal).map_err(map_err)
            } else {
                Err(CliError::Usage(
                    "extremal form needs r2 = s or r1 = n - s".into(),
                ))
            }
        }
        other => Err(CliError::Usage(format!(
            "unknown kernel form '{other}' (expected 1|2|3|4|rodrigues|extremal)"
        ))),
    }
}

fn row_string(row: &Vec<u64>) -> String {
    row.iter().map(u64::to_string).collect::<Vec<_>>().join("")
}

fn emit_rows<I>(format: Format, header: &[&str], rows: I)
where
    I: Iterator<Item = Vec<String>>,
{
    match format {
        Format::Csv => {
            println!("{}", header.join(","));
            for row in rows {
                println!("{}", row.join(","));
            }
        }
        _ => {
            for row in rows {
                println!("{}", row.join("\t"));
            }
        }
    }
}

fn emit_matrix(format: Format, mat: &Mat) {
    match format {
        Format::Json => {
            let rows: Vec<Vec<String>> = (0..mat.rows())
                .map(|i| mat.row(i).iter().map(|v| v.to_string()).collect())
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "rows": mat.rows(), "cols": mat.cols(), "entries": rows
                }))
                .expect("serializable")
            );
        }
        Format::Csv => {
            for i in 0..mat.rows() {
                let row: Vec<String> = mat.row(i).iter().map(|v| v.to_string()).collect();
                println!("{}", row.join(","));
            }
        }
        Format::Table => {
            for i in 0..mat.rows() {
                let row: Vec<String> = mat.row(i).iter().map(|v| v.to_string()).collect();
                println!("{}", row.join("\t"));
            }
        }
    }
}
