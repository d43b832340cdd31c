use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::mesh::{Mesh, Point};

use super::study::ConvergenceReport;
use super::HarnessError;

pub const CSV_HEADER: &str = "alpha,Ms,N,err_u,rate_u,err_v,rate_v";
/// Written in the error cells of a row whose run failed.
pub const FAILURE_MARKER: &str = "failed";

/// Scientific notation with six significant digits and a signed two-digit
/// exponent, e.g. `7.16543E-04`.
pub fn format_error(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.5E}");
    let (mantissa, exponent) = s.split_once('E').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exponent.abs())
}

pub fn format_rate(x: f64) -> String {
    format!("{x:.9}")
}

/// Writes the rows of all reports under a single header.
pub fn write_csv<W: Write>(reports: &[&ConvergenceReport], mut w: W) -> std::io::Result<()> {
    w.write_all(CSV_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
    for report in reports {
        for row in &report.rows {
            let (eu, ev) = if row.failure.is_some() {
                (FAILURE_MARKER.to_string(), FAILURE_MARKER.to_string())
            } else {
                (opt(row.err_u, format_error), opt(row.err_v, format_error))
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                report.alpha,
                row.ms,
                row.n,
                eu,
                opt(row.rate_u, format_rate),
                ev,
                opt(row.rate_v, format_rate),
            )?;
        }
    }
    w.flush()
}

pub fn emit_csv(reports: &[&ConvergenceReport], path: &Path) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_csv(reports, BufWriter::new(file)).map_err(io)
}

/// Writes `x[,y],u_num,u_exact` for every mesh node, sorted by coordinates.
pub fn write_field<W, E>(mesh: &Mesh, uc: &[f64], exact: E, mut w: W) -> Result<(), HarnessError>
where
    W: Write,
    E: Fn(Point) -> f64,
{
    if uc.len() != mesh.dof_count() {
        return Err(HarnessError::DimensionMismatch {
            expected: mesh.dof_count(),
            found: uc.len(),
        });
    }
    let values = mesh.expand(uc);
    let mut order: Vec<usize> = (0..mesh.node_count()).collect();
    let nodes = mesh.nodes();
    order.sort_by(|&a, &b| {
        nodes[a][0]
            .total_cmp(&nodes[b][0])
            .then(nodes[a][1].total_cmp(&nodes[b][1]))
    });
    let two_d = mesh.dimension() == 2;
    let mut body = || -> std::io::Result<()> {
        if two_d {
            w.write_all(b"x,y,u_num,u_exact\n")?;
        } else {
            w.write_all(b"x,u_num,u_exact\n")?;
        }
        for &node in &order {
            let p = nodes[node];
            let ex = if mesh.is_boundary(node) {
                0.0
            } else {
                exact(p)
            };
            if two_d {
                writeln!(
                    w,
                    "{:.12e},{:.12e},{:.12e},{:.12e}",
                    p[0], p[1], values[node], ex
                )?;
            } else {
                writeln!(w, "{:.12e},{:.12e},{:.12e}", p[0], values[node], ex)?;
            }
        }
        w.flush()
    };
    body().map_err(|source| HarnessError::Io {
        path: Default::default(),
        source,
    })
}

pub fn emit_field<E>(mesh: &Mesh, uc: &[f64], exact: E, path: &Path) -> Result<(), HarnessError>
where
    E: Fn(Point) -> f64,
{
    let file = File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_field(mesh, uc, exact, BufWriter::new(file)).map_err(|e| match e {
        HarnessError::Io { source, .. } => HarnessError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::study::{Direction, NormKind, ReportRow};

    fn report(rows: Vec<ReportRow>) -> ConvergenceReport {
        ConvergenceReport {
            problem: "ex1".into(),
            alpha: 0.4,
            norm: NormKind::L2,
            direction: Direction::Spatial,
            rows,
        }
    }

    fn csv(reports: &[&ConvergenceReport]) -> String {
        let mut buf = Vec::new();
        write_csv(reports, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn error_format() {
        assert_eq!(format_error(7.165432e-4), "7.16543E-04");
        assert_eq!(format_error(1.28), "1.28000E+00");
        assert_eq!(format_error(12345.678), "1.23457E+04");
        assert_eq!(format_error(0.0), "0.00000E+00");
        assert_eq!(format_error(2.5e-123), "2.50000E-123");
        assert_eq!(format_rate(1.999438471234), "1.999438471");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(csv(&[]), "alpha,Ms,N,err_u,rate_u,err_v,rate_v\n");
        assert_eq!(
            csv(&[&report(vec![])]),
            "alpha,Ms,N,err_u,rate_u,err_v,rate_v\n"
        );
    }

    #[test]
    fn rows_and_blank_rates() {
        let r = report(vec![
            ReportRow {
                ms: 64,
                n: 64,
                err_u: Some(7.17e-4),
                rate_u: Some(2.0),
                err_v: Some(1.6e-4),
                rate_v: Some(1.5),
                failure: None,
            },
            ReportRow {
                ms: 128,
                n: 128,
                err_u: Some(1.79e-4),
                rate_u: None,
                err_v: Some(4e-5),
                rate_v: None,
                failure: None,
            },
            ReportRow {
                ms: 256,
                n: 256,
                err_u: None,
                rate_u: None,
                err_v: None,
                rate_v: None,
                failure: Some("diverged".into()),
            },
        ]);
        let text = csv(&[&r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[1],
            "0.4,64,64,7.17000E-04,2.000000000,1.60000E-04,1.500000000"
        );
        assert_eq!(lines[2], "0.4,128,128,1.79000E-04,,4.00000E-05,");
        assert_eq!(lines[3], "0.4,256,256,failed,,failed,");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn field_dump_1d() {
        let mesh = Mesh::uniform(1, 4).unwrap();
        let mut buf = Vec::new();
        write_field(&mesh, &[0.0; 3], |x| x[0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "x,u_num,u_exact");
        for l in &lines[1..] {
            assert_eq!(l.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.0);
        }
        // boundary nodes report zero
        assert_eq!(
            lines[5].split(',').nth(2).unwrap().parse::<f64>().unwrap(),
            0.0
        );
        assert_eq!(
            lines[3].split(',').nth(2).unwrap().parse::<f64>().unwrap(),
            0.5
        );
    }

    #[test]
    fn field_dump_2d_is_sorted() {
        let mesh = Mesh::uniform(2, 3).unwrap();
        let uc: Vec<f64> = (0..mesh.dof_count()).map(|i| i as f64 + 1.0).collect();
        let mut buf = Vec::new();
        write_field(&mesh, &uc, |_| 1.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 16);
        for w in rows.windows(2) {
            assert!((w[0][0], w[0][1]) < (w[1][0], w[1][1]));
        }
        let sum: f64 = rows.iter().map(|r| r[2]).sum();
        assert_eq!(sum, uc.iter().sum::<f64>());
    }
}
