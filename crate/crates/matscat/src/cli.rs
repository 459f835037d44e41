//! Command-line front end: potential configs in, CSV sweeps and verification
//! reports out.
//!
//! All numeric output goes through a fixed 17-significant-digit formatter so
//! identical configs produce byte-identical files.

use crate::analysis::{verify_identities, DEFAULT_IDENTITY_TOL};
use crate::factorization::{
    compose, left_transition, right_transition, FactorizationError, TransitionMatrix,
};
use crate::jost::{scattering_data, JostError};
use crate::linalg::ComplexMatrix;
use crate::potential::{Fragment, PiecewisePotential, PotentialError};
use crate::spectral::{
    bound_states, boundary_residual, genericity_degree, halfline_map, levinson_check,
    BoundStateOptions, LevinsonOptions, SpectralError,
};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid potential: {0}")]
    Validation(#[from] PotentialError),
    #[error("invalid sweep: {0}")]
    BadSweep(String),
    #[error(transparent)]
    Jost(#[from] JostError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Factorization(#[from] FactorizationError),
}

/// On-disk potential description.
#[derive(Debug, Serialize, Deserialize)]
pub struct PotentialFile {
    pub n: usize,
    pub fragments: Vec<FragmentFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FragmentFile {
    pub x_min: f64,
    pub x_max: f64,
    pub matrix_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

fn matrix_from_parts(
    index: usize,
    n: usize,
    re: &[Vec<f64>],
    im: Option<&Vec<Vec<f64>>>,
) -> Result<ComplexMatrix, CliError> {
    let check = |name: &str, rows: &[Vec<f64>]| -> Result<(), CliError> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Parse(format!(
                "fragment {index}: {name} must be {n}x{n}"
            )));
        }
        Ok(())
    };
    check("matrix_re", re)?;
    if let Some(im) = im {
        check("matrix_im", im)?;
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let imag = im.map_or(0.0, |rows| rows[i][j]);
            m[(i, j)] = Complex64::new(re[i][j], imag);
        }
    }
    Ok(m)
}

/// Parses the JSON potential description.
pub fn parse_potential_str(text: &str) -> Result<PiecewisePotential, CliError> {
    let file: PotentialFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let fragments = file
        .fragments
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let matrix = matrix_from_parts(index, file.n, &f.matrix_re, f.matrix_im.as_ref())?;
            Ok(Fragment::new(f.x_min, f.x_max, matrix))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(PiecewisePotential::new(file.n, fragments)?)
}

pub fn parse_potential_file(path: &Path) -> Result<PiecewisePotential, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_potential_str(&text)
}

/// Canonical JSON for a potential; `parse(serialize(p)) == p` exactly.
pub fn serialize_potential(p: &PiecewisePotential) -> String {
    let fragments = p
        .fragments()
        .iter()
        .map(|f| {
            let n = p.n();
            let mut re = vec![vec![0.0; n]; n];
            let mut im = vec![vec![0.0; n]; n];
            let mut any_imag = false;
            for i in 0..n {
                for j in 0..n {
                    re[i][j] = f.matrix[(i, j)].re;
                    im[i][j] = f.matrix[(i, j)].im;
                    any_imag |= f.matrix[(i, j)].im != 0.0;
                }
            }
            FragmentFile {
                x_min: f.x_min,
                x_max: f.x_max,
                matrix_re: re,
                matrix_im: any_imag.then_some(im),
            }
        })
        .collect();
    let file = PotentialFile {
        n: p.n(),
        fragments,
    };
    serde_json::to_string_pretty(&file).expect("serializable structure")
}

/// 17 significant digits, deterministic.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The k-grid for sweep commands.
pub fn k_grid(k_min: f64, k_max: f64, steps: usize, log: bool) -> Result<Vec<f64>, CliError> {
    let min_ok = k_min.is_finite() && k_min > 0.0;
    if !min_ok {
        return Err(CliError::BadSweep(format!(
            "kmin must be positive, got {k_min}"
        )));
    }
    let max_ok = k_max.is_finite() && k_max > k_min;
    if !max_ok {
        return Err(CliError::BadSweep(format!(
            "kmax must exceed kmin, got {k_max}"
        )));
    }
    if steps < 2 {
        return Err(CliError::BadSweep(format!(
            "ksteps must be at least 2, got {steps}"
        )));
    }
    let grid = (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            if log {
                (k_min.ln() + (k_max.ln() - k_min.ln()) * t).exp()
            } else {
                k_min + (k_max - k_min) * t
            }
        })
        .collect();
    Ok(grid)
}

fn block_columns(header: &mut String, name: &str, n: usize) {
    for i in 1..=n {
        for j in 1..=n {
            write!(header, ",{name}_re_{i}{j},{name}_im_{i}{j}").unwrap();
        }
    }
}

fn push_block(line: &mut String, m: &ComplexMatrix) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            write!(line, ",{},{}", fmt_f64(z.re), fmt_f64(z.im)).unwrap();
        }
    }
}

/// CSV sweep of the four scattering blocks; optional trailing column with
/// the spectral norm of `T_l - T_r`.
pub fn scatter_csv(
    p: &PiecewisePotential,
    grid: &[f64],
    norm_diff: bool,
) -> Result<String, CliError> {
    let n = p.n();
    let mut out = String::from("k");
    for name in ["Tl", "Tr", "L", "R"] {
        block_columns(&mut out, name, n);
    }
    if norm_diff {
        out.push_str(",T_diff_norm");
    }
    out.push('\n');
    for &k in grid {
        let d = scattering_data(p, k)?;
        let mut line = fmt_f64(k);
        for block in [&d.trans_left, &d.trans_right, &d.refl_left, &d.refl_right] {
            push_block(&mut line, block);
        }
        if norm_diff {
            let diff = (&d.trans_left - &d.trans_right).spectral_norm();
            write!(line, ",{}", fmt_f64(diff)).unwrap();
        }
        line.push('\n');
        out.push_str(&line);
    }
    Ok(out)
}

fn fragment_transitions(
    pieces: &[PiecewisePotential],
    k: f64,
    left_kind: bool,
) -> Result<Vec<TransitionMatrix>, CliError> {
    pieces
        .iter()
        .map(|piece| {
            let dp = scattering_data(piece, k)?;
            let dm = scattering_data(piece, -k)?;
            let t = if left_kind {
                left_transition(&dp, &dm)?
            } else {
                right_transition(&dp, &dm)?
            };
            Ok(t)
        })
        .collect()
}

/// Whole-potential transitions against the ordered fragment product, one
/// report line per wavenumber.
pub fn factorize_report(
    p: &PiecewisePotential,
    grid: &[f64],
    cuts: &[f64],
    tol: f64,
) -> Result<(String, bool), CliError> {
    // default cuts: interior fragment boundaries
    let cuts: Vec<f64> = if cuts.is_empty() {
        let mut edges: Vec<f64> = p
            .fragments()
            .iter()
            .flat_map(|f| [f.x_min, f.x_max])
            .collect();
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        if edges.len() > 2 {
            edges[1..edges.len() - 1].to_vec()
        } else {
            Vec::new()
        }
    } else {
        cuts.to_vec()
    };
    let pieces = p.split_at(&cuts);
    let mut out = String::from("k,left_product_residual,right_product_residual,pass\n");
    let mut all_pass = true;
    for &k in grid {
        let dp = scattering_data(p, k)?;
        let dm = scattering_data(p, -k)?;
        let whole_left = left_transition(&dp, &dm)?;
        let whole_right = right_transition(&dp, &dm)?;
        let left_res = if pieces.len() > 1 {
            let product = compose(&fragment_transitions(&pieces, k, true)?)?;
            (&product.matrix - &whole_left.matrix).frobenius_norm()
        } else {
            0.0
        };
        let right_res = if pieces.len() > 1 {
            let product = compose(&fragment_transitions(&pieces, k, false)?)?;
            (&product.matrix - &whole_right.matrix).frobenius_norm()
        } else {
            0.0
        };
        let pass = left_res <= tol && right_res <= tol;
        all_pass &= pass;
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(k),
            fmt_f64(left_res),
            fmt_f64(right_res),
            if pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    Ok((out, all_pass))
}

/// Bound states plus genericity, as a plain-text report.
pub fn bound_state_report(
    p: &PiecewisePotential,
    opts: &BoundStateOptions,
) -> Result<String, CliError> {
    let scan = bound_states(p, opts)?;
    let nu = genericity_degree(p)?;
    let mut out = String::new();
    for (kappa, m) in scan.kappas.iter().zip(&scan.multiplicities) {
        writeln!(
            out,
            "bound_state kappa={} multiplicity={m}",
            fmt_f64(*kappa)
        )
        .unwrap();
    }
    writeln!(
        out,
        "distinct={} total={} nu={nu}",
        scan.distinct(),
        scan.total()
    )
    .unwrap();
    Ok(out)
}

/// Levinson phase-balance report; passes when the balance holds to `tol`.
pub fn levinson_report(
    p: &PiecewisePotential,
    opts: &LevinsonOptions,
    tol: f64,
) -> Result<(String, bool), CliError> {
    let report = levinson_check(p, opts)?;
    let mut out = String::new();
    for (kappa, m) in report.kappas.iter().zip(&report.multiplicities) {
        writeln!(
            out,
            "bound_state kappa={} multiplicity={m}",
            fmt_f64(*kappa)
        )
        .unwrap();
    }
    let pass = report.levinson_residual <= tol;
    writeln!(
        out,
        "total={} nu={} lhs={} rhs={} residual={} {}",
        report.total_count,
        report.genericity_nu,
        fmt_f64(report.levinson_lhs),
        fmt_f64(report.levinson_rhs),
        fmt_f64(report.levinson_residual),
        if pass { "PASS" } else { "FAIL" }
    )
    .unwrap();
    Ok((out, pass))
}

/// Half-line sweep: consistency residuals of the folded problem per k.
pub fn halfline_csv(
    p: &PiecewisePotential,
    grid: &[f64],
    tol: f64,
) -> Result<(String, bool), CliError> {
    let mut out =
        String::from("k,det_J_re,det_J_im,s_residual,det_residual,boundary_residual,pass\n");
    let mut all_pass = true;
    for &k in grid {
        let data = halfline_map(p, k)?;
        let det_j = crate::linalg::lu_det(&data.jost_matrix);
        let boundary = boundary_residual(p, k)?;
        let pass = data.s_residual <= tol && data.det_residual <= tol.max(1e-8) && boundary <= tol;
        all_pass &= pass;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(k),
            fmt_f64(det_j.re),
            fmt_f64(det_j.im),
            fmt_f64(data.s_residual),
            fmt_f64(data.det_residual),
            fmt_f64(boundary),
            if pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    Ok((out, all_pass))
}

/// Full identity battery, one line per identity per wavenumber.
pub fn verify_report(
    p: &PiecewisePotential,
    grid: &[f64],
    tol: f64,
) -> Result<(String, bool), CliError> {
    let reports = verify_identities(p, grid, tol)?;
    let mut out = String::new();
    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass;
        writeln!(
            out,
            "{} {} {} {} {}",
            r.name,
            fmt_f64(r.k),
            fmt_f64(r.residual),
            fmt_f64(r.tolerance),
            if r.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    Ok((out, all_pass))
}

#[derive(Debug, Parser)]
#[command(
    name = "matscat",
    version,
    about = "Matrix Schrödinger scattering on the line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Potential description (JSON)
    #[arg(long)]
    pub potential: PathBuf,
    /// Sweep start (must be positive)
    #[arg(long, default_value_t = 0.1)]
    pub kmin: f64,
    /// Sweep end
    #[arg(long, default_value_t = 10.0)]
    pub kmax: f64,
    /// Number of sweep points
    #[arg(long, default_value_t = 50)]
    pub ksteps: usize,
    /// Logarithmic instead of linear spacing
    #[arg(long)]
    pub log: bool,
    /// Fragmentation points, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cuts: Vec<f64>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance override for pass/fail checks
    #[arg(long)]
    pub tol: Option<f64>,
    /// Upper edge of the bound-state scan
    #[arg(long = "kappa-max")]
    pub kappa_max: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Sweep the four scattering coefficient blocks to CSV
    Scatter {
        #[command(flatten)]
        common: CommonArgs,
        /// Append the spectral norm of T_l - T_r per row
        #[arg(long = "norm-diff")]
        norm_diff: bool,
    },
    /// Compare whole-potential transitions against the fragment product
    Factorize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Locate bound states and the genericity degree
    Boundstates {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the Levinson phase balance
    Levinson {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the half-line correspondence residuals
    Halfline {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full identity battery
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Executes a parsed command; `Ok(true)` means every invoked invariant
/// passed.
pub fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        CliCommand::Scatter { common, norm_diff } => {
            let p = parse_potential_file(&common.potential)?;
            let grid = k_grid(common.kmin, common.kmax, common.ksteps, common.log)?;
            let csv = scatter_csv(&p, &grid, norm_diff)?;
            write_output(&common.out, &csv)?;
            Ok(true)
        }
        CliCommand::Factorize { common } => {
            let p = parse_potential_file(&common.potential)?;
            let grid = k_grid(common.kmin, common.kmax, common.ksteps, common.log)?;
            let tol = common.tol.unwrap_or(1e-8);
            let (report, pass) = factorize_report(&p, &grid, &common.cuts, tol)?;
            write_output(&common.out, &report)?;
            Ok(pass)
        }
        CliCommand::Boundstates { common } => {
            let p = parse_potential_file(&common.potential)?;
            let opts = BoundStateOptions {
                kappa_max: common.kappa_max,
                ..Default::default()
            };
            let report = bound_state_report(&p, &opts)?;
            write_output(&common.out, &report)?;
            Ok(true)
        }
        CliCommand::Levinson { common } => {
            let p = parse_potential_file(&common.potential)?;
            let opts = LevinsonOptions {
                k_min: common.kmin.min(1e-3),
                k_max: common.kmax.max(1e3),
                bound: BoundStateOptions {
                    kappa_max: common.kappa_max,
                    ..Default::default()
                },
                ..Default::default()
            };
            let tol = common.tol.unwrap_or(1e-3);
            let (report, pass) = levinson_report(&p, &opts, tol)?;
            write_output(&common.out, &report)?;
            Ok(pass)
        }
        CliCommand::Halfline { common } => {
            let p = parse_potential_file(&common.potential)?;
            let grid = k_grid(common.kmin, common.kmax, common.ksteps, common.log)?;
            let tol = common.tol.unwrap_or(1e-9);
            let (report, pass) = halfline_csv(&p, &grid, tol)?;
            write_output(&common.out, &report)?;
            Ok(pass)
        }
        CliCommand::Verify { common } => {
            let p = parse_potential_file(&common.potential)?;
            let grid = k_grid(common.kmin, common.kmax, common.ksteps, common.log)?;
            let tol = common.tol.unwrap_or(DEFAULT_IDENTITY_TOL);
            let (report, pass) = verify_report(&p, &grid, tol)?;
            write_output(&common.out, &report)?;
            Ok(pass)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "n": 2,
        "fragments": [
            {
                "x_min": -2.0, "x_max": 0.0,
                "matrix_re": [[3.0, -2.0], [-2.0, -5.0]],
                "matrix_im": [[0.0, 1.0], [-1.0, 0.0]]
            },
            {
                "x_min": 0.0, "x_max": 1.0,
                "matrix_re": [[2.0, 1.0], [1.0, -2.0]],
                "matrix_im": [[0.0, 1.0], [-1.0, 0.0]]
            }
        ]
    }"#;

    #[test]
    fn parses_complex_pair() {
        let p = parse_potential_str(EXAMPLE).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.fragment_count(), 2);
        assert_eq!(p.support(), Some((-2.0, 1.0)));
    }

    #[test]
    fn parses_free_potential() {
        let p = parse_potential_str(r#"{"n": 3, "fragments": []}"#).unwrap();
        assert!(p.is_free());
    }

    #[test]
    fn rejects_row_length_mismatch() {
        let bad = r#"{"n": 2, "fragments": [
            {"x_min": 0.0, "x_max": 1.0, "matrix_re": [[1.0, 0.0], [0.0]]}
        ]}"#;
        assert!(matches!(parse_potential_str(bad), Err(CliError::Parse(_))));
    }

    #[test]
    fn rejects_non_hermitian_config() {
        let bad = r#"{"n": 2, "fragments": [
            {"x_min": 0.0, "x_max": 1.0, "matrix_re": [[3.0, 2.0], [1.0, 0.0]]}
        ]}"#;
        assert!(matches!(
            parse_potential_str(bad),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn round_trips_exactly() {
        let p = parse_potential_str(EXAMPLE).unwrap();
        let text = serialize_potential(&p);
        let q = parse_potential_str(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn grid_spacing() {
        let lin = k_grid(1.0, 3.0, 3, false).unwrap();
        assert_eq!(lin, vec![1.0, 2.0, 3.0]);
        let log = k_grid(0.1, 10.0, 3, true).unwrap();
        assert!((log[1] - 1.0).abs() < 1e-12);
        assert!(matches!(
            k_grid(0.0, 1.0, 5, false),
            Err(CliError::BadSweep(_))
        ));
        assert!(matches!(
            k_grid(0.1, 1.0, 1, false),
            Err(CliError::BadSweep(_))
        ));
    }

    #[test]
    fn scatter_csv_free_potential() {
        let p = PiecewisePotential::free(1);
        let grid = [0.5, 1.0];
        let csv = scatter_csv(&p, &grid, true).unwrap();
        let again = scatter_csv(&p, &grid, true).unwrap();
        assert_eq!(csv, again, "determinism");
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,Tl_re_11,Tl_im_11,Tr_re_11,Tr_im_11,L_re_11,L_im_11,R_re_11,R_im_11,T_diff_norm"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "1.0000000000000000e0"); // Tl re
        assert_eq!(row[5], "0.0000000000000000e0"); // L re
    }

    #[test]
    fn factorize_report_passes_on_pair() {
        let p = parse_potential_str(EXAMPLE).unwrap();
        let (report, pass) = factorize_report(&p, &[0.5, 1.0], &[], 1e-8).unwrap();
        assert!(pass, "{report}");
        for line in report.lines().skip(1) {
            assert!(line.ends_with("PASS"), "{line}");
        }
    }

    #[test]
    fn verify_report_shape() {
        let p = parse_potential_str(EXAMPLE).unwrap();
        let (report, pass) = verify_report(&p, &[1.0], DEFAULT_IDENTITY_TOL).unwrap();
        assert!(pass, "{report}");
        let first = report.lines().next().unwrap();
        let fields: Vec<&str> = first.split(' ').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[4], "PASS");
    }
}
