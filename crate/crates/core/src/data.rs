//! Seeded synthetic dataset generators, evaluation grids, and dataset file
//! formats (CSV and the USPS digits text format).
//!
//! All generators draw from a single ChaCha8 stream per call, with Gaussian
//! values produced by Box-Muller on that stream, so a `(spec, seed)` pair is
//! bit-reproducible across platforms.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Dataset;

/// Largest grid the evaluation-grid generator will materialize.
pub const GRID_POINT_CAP: usize = 10_000_000;

/// One standard-normal pair via Box-Muller.
fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1], keeps ln finite
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    (r * (TAU * u2).cos(), r * (TAU * u2).sin())
}

/// Points drawn uniformly from a circle of `radius` around the origin, each
/// perturbed by an independent 2-D Gaussian with standard deviation
/// `noise_sd`.
pub fn gen_noisy_circle(n: usize, radius: f64, noise_sd: f64, seed: u64) -> Dataset {
    assert!(n >= 1 && radius > 0.0 && noise_sd >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Array2::zeros((n, 2));
    for i in 0..n {
        let phi = rng.gen::<f64>() * TAU;
        let (g1, g2) = box_muller(&mut rng);
        pts[[i, 0]] = radius * phi.cos() + noise_sd * g1;
        pts[[i, 1]] = radius * phi.sin() + noise_sd * g2;
    }
    Dataset::new(pts).expect("generated points are finite")
}

/// Two circles cut out of a sphere by the planes `z = +-0.4 * sphere_radius`
/// (for the default radius 5 these are the planes z = 2 and z = -2), with
/// per-coordinate Gaussian noise of variance `noise_var`. Labels are 0 for
/// the upper circle and 1 for the lower one.
pub fn gen_two_circles_on_sphere(
    n_per_circle: usize,
    sphere_radius: f64,
    noise_var: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_circle < 1 {
        return Err(Error::Config("need at least one point per circle".into()));
    }
    if !(sphere_radius > 0.0 && noise_var >= 0.0) {
        return Err(Error::Config("invalid sphere radius or noise variance".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = noise_var.sqrt();
    let plane_z = 0.4 * sphere_radius;
    let circle_r = (sphere_radius * sphere_radius - plane_z * plane_z).sqrt();
    let mut pts = Array2::zeros((2 * n_per_circle, 3));
    let mut labels = Vec::with_capacity(2 * n_per_circle);
    for (c, z_sign) in [(0i64, 1.0f64), (1, -1.0)] {
        for i in 0..n_per_circle {
            let row = c as usize * n_per_circle + i;
            let phi = rng.gen::<f64>() * TAU;
            let (g1, g2) = box_muller(&mut rng);
            let (g3, _) = box_muller(&mut rng); // fourth value discarded
            pts[[row, 0]] = circle_r * phi.cos() + sd * g1;
            pts[[row, 1]] = circle_r * phi.sin() + sd * g2;
            pts[[row, 2]] = z_sign * plane_z + sd * g3;
            labels.push(c);
        }
    }
    Dataset::with_labels(pts, labels)
}

/// Standard-normal cloud, the usual choice for generic feature-spanning
/// points.
pub fn gen_gaussian_cloud(n: usize, dim: usize, seed: u64) -> Dataset {
    assert!(n >= 1 && dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Array2::zeros((n, dim));
    for i in 0..n {
        let mut j = 0;
        while j < dim {
            let (g1, g2) = box_muller(&mut rng);
            pts[[i, j]] = g1;
            if j + 1 < dim {
                pts[[i, j + 1]] = g2;
            }
            j += 2;
        }
    }
    Dataset::new(pts).expect("generated points are finite")
}

/// Regular Cartesian grid over per-dimension bounds, row-major (last
/// coordinate fastest).
pub fn gen_grid(bounds: &[(f64, f64)], resolution: usize) -> Result<Dataset> {
    if bounds.is_empty() {
        return Err(Error::Config("grid needs at least one dimension".into()));
    }
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be >= 2".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("invalid grid bounds ({lo}, {hi})")));
        }
    }
    let n = bounds.len();
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(resolution)
            .filter(|&t| t <= GRID_POINT_CAP)
            .ok_or_else(|| {
                Error::Config(format!(
                    "grid would exceed {GRID_POINT_CAP} points ({resolution}^{n})"
                ))
            })?;
    }
    let mut pts = Array2::zeros((total, n));
    for row in 0..total {
        let mut rest = row;
        for d in (0..n).rev() {
            let i = rest % resolution;
            rest /= resolution;
            let (lo, hi) = bounds[d];
            pts[[row, d]] = lo + i as f64 * (hi - lo) / (resolution - 1) as f64;
        }
    }
    Dataset::new(pts)
}

/// What a seeded generator should produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    NoisyCircle {
        n: usize,
        radius: f64,
        noise_sd: f64,
    },
    TwoCirclesOnSphere {
        n_per_circle: usize,
        sphere_radius: f64,
        noise_var: f64,
    },
    GaussianCloud {
        n: usize,
        dim: usize,
    },
    Grid {
        bounds: Vec<(f64, f64)>,
        resolution: usize,
    },
}

/// A generator plus the seed that fully determines its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Dataset> {
        match &self.kind {
            GeneratorKind::NoisyCircle {
                n,
                radius,
                noise_sd,
            } => Ok(gen_noisy_circle(*n, *radius, *noise_sd, self.seed)),
            GeneratorKind::TwoCirclesOnSphere {
                n_per_circle,
                sphere_radius,
                noise_var,
            } => gen_two_circles_on_sphere(*n_per_circle, *sphere_radius, *noise_var, self.seed),
            GeneratorKind::GaussianCloud { n, dim } => {
                Ok(gen_gaussian_cloud(*n, *dim, self.seed))
            }
            GeneratorKind::Grid { bounds, resolution } => gen_grid(bounds, *resolution),
        }
    }

    /// The same generator resized to `total` points; used by the runtime
    /// benchmark to sweep over dataset sizes.
    pub fn with_total_points(&self, total: usize) -> Result<GeneratorSpec> {
        let kind = match &self.kind {
            GeneratorKind::NoisyCircle { radius, noise_sd, .. } => GeneratorKind::NoisyCircle {
                n: total,
                radius: *radius,
                noise_sd: *noise_sd,
            },
            GeneratorKind::TwoCirclesOnSphere {
                sphere_radius,
                noise_var,
                ..
            } => GeneratorKind::TwoCirclesOnSphere {
                n_per_circle: total.div_ceil(2),
                sphere_radius: *sphere_radius,
                noise_var: *noise_var,
            },
            GeneratorKind::GaussianCloud { dim, .. } => GeneratorKind::GaussianCloud {
                n: total,
                dim: *dim,
            },
            GeneratorKind::Grid { .. } => {
                return Err(Error::Config(
                    "grid generator cannot be resized to a point count".into(),
                ))
            }
        };
        Ok(GeneratorSpec {
            kind,
            seed: self.seed,
        })
    }
}

/// Supported dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Usps,
}

/// Writes a dataset as CSV with a `x1,...,xn[,label]` header and floats at 17
/// significant digits.
pub fn write_csv<W: Write>(mut w: W, ds: &Dataset) -> Result<()> {
    let n = ds.dim();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    if ds.labels().is_some() {
        header.push("label".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.len() {
        let mut fields: Vec<String> = ds.point(i).iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(labels) = ds.labels() {
            fields.push(labels[i].to_string());
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_csv_file<P: AsRef<Path>>(path: P, ds: &Dataset) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, ds)?;
    w.flush()?;
    Ok(())
}

/// Reads a dataset from CSV. A header line is optional; when present and its
/// last column is named `label`, that column is parsed as integer labels.
pub fn read_csv<R: BufRead>(r: R) -> Result<Dataset> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        });
    }
    let first_fields: Vec<&str> = lines[0].trim_end_matches('\r').split(',').collect();
    let has_header = first_fields.iter().any(|f| f.trim().parse::<f64>().is_err());
    let has_labels = has_header
        && first_fields
            .last()
            .map(|f| f.trim().eq_ignore_ascii_case("label"))
            .unwrap_or(false);
    let ncols = first_fields.len();
    let nfeat = ncols - usize::from(has_labels);
    if nfeat == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "no feature columns".into(),
        });
    }

    let data_lines = &lines[usize::from(has_header)..];
    let mut values = Vec::with_capacity(data_lines.len() * nfeat);
    let mut labels = Vec::new();
    for (offset, raw) in data_lines.iter().enumerate() {
        let line_no = offset + 1 + usize::from(has_header);
        let line = raw.trim_end_matches('\r');
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {ncols} fields, found {}", fields.len()),
            });
        }
        for f in &fields[..nfeat] {
            let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("not a number: {f:?}"),
            })?;
            values.push(v);
        }
        if has_labels {
            let f = fields[ncols - 1].trim();
            let l: i64 = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("not an integer label: {f:?}"),
            })?;
            labels.push(l);
        }
    }
    let rows = data_lines.len();
    let pts = Array2::from_shape_vec((rows, nfeat), values)
        .expect("row-major values match the shape");
    if has_labels {
        Dataset::with_labels(pts, labels)
    } else {
        Dataset::new(pts)
    }
}

const USPS_FEATURES: usize = 256;

/// Reads the USPS digits text format: one `label f1 ... f256` record per
/// line, whitespace separated.
pub fn read_usps<R: BufRead>(r: R) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (offset, raw) in r.lines().enumerate() {
        let line_no = offset + 1;
        let line = raw?;
        if line.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "blank line".into(),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != USPS_FEATURES + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected 1 label + {USPS_FEATURES} features, found {} fields",
                    tokens.len()
                ),
            });
        }
        let label: f64 = tokens[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("not a numeric label: {:?}", tokens[0]),
        })?;
        labels.push(label as i64);
        for t in &tokens[1..] {
            let v: f64 = t.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("not a number: {t:?}"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        });
    }
    let pts = Array2::from_shape_vec((rows, USPS_FEATURES), values)
        .expect("row-major values match the shape");
    Dataset::with_labels(pts, labels)
}

pub fn load_dataset<P: AsRef<Path>>(path: P, format: DataFormat) -> Result<Dataset> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    match format {
        DataFormat::Csv => read_csv(reader),
        DataFormat::Usps => read_usps(reader),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;
    use crate::linalg::Tolerance;
    use crate::poly::{membership_certificate, vanishing_basis};
    use std::io::Cursor;

    #[test]
    fn noiseless_circle_is_exact() {
        let ds = gen_noisy_circle(100, 10.0, 0.0, 7);
        for i in 0..ds.len() {
            let p = ds.point(i);
            let r2 = p[0] * p[0] + p[1] * p[1];
            assert!((r2 - 100.0).abs() <= 1e-9 * 100.0);
        }
    }

    #[test]
    fn noisy_circle_mean_is_near_origin() {
        let ds = gen_noisy_circle(400, 10.0, 1.0, 8);
        let mean = ds.points().mean_axis(ndarray::Axis(0)).unwrap();
        // the coordinate spread is around sqrt(50 + 1)
        let bound = 3.0 * (51.0f64).sqrt() / (400.0f64).sqrt();
        assert!(mean[0].abs() <= bound && mean[1].abs() <= bound);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_noisy_circle(50, 10.0, 1.0, 9),
            gen_noisy_circle(50, 10.0, 1.0, 9)
        );
        assert_eq!(
            gen_two_circles_on_sphere(30, 5.0, 0.1, 10).unwrap(),
            gen_two_circles_on_sphere(30, 5.0, 0.1, 10).unwrap()
        );
        assert_ne!(
            gen_noisy_circle(50, 10.0, 1.0, 9),
            gen_noisy_circle(50, 10.0, 1.0, 10)
        );
    }

    #[test]
    fn noiseless_sphere_circles_lie_on_sphere() {
        let ds = gen_two_circles_on_sphere(50, 5.0, 0.0, 11).unwrap();
        for i in 0..ds.len() {
            let p = ds.point(i);
            let norm2 = p.dot(&p);
            assert!((norm2 - 25.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn two_circles_labels_are_balanced() {
        let ds = gen_two_circles_on_sphere(25, 5.0, 0.1, 12).unwrap();
        let labels = ds.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 25);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 25);
    }

    #[test]
    fn noiseless_circles_have_nontrivial_ideal() {
        let params = KernelParams::new(2, 1.0, 3).unwrap();
        let x = gen_two_circles_on_sphere(40, 5.0, 0.0, 13).unwrap();
        let z = gen_gaussian_cloud(12, 3, 14);
        let kxz = crate::kernel::cross_kernel_matrix(&x, &z, &params).unwrap();
        let frk = crate::linalg::numerical_rank(&kxz, &Tolerance::default());
        assert!(frk <= 10);
        let ideal = vanishing_basis(&x, &z, &params, &Tolerance::default()).unwrap();
        assert!(!ideal.is_empty());
    }

    #[test]
    fn grid_one_dimensional() {
        let g = gen_grid(&[(0.0, 1.0)], 3).unwrap();
        assert_eq!(g.points().column(0).to_vec(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_is_row_major_with_uniform_spacing() {
        let g = gen_grid(&[(0.0, 1.0), (0.0, 2.0)], 5).unwrap();
        assert_eq!(g.len(), 25);
        // last coordinate varies fastest
        assert_eq!(g.point(0)[0], 0.0);
        assert_eq!(g.point(1)[0], 0.0);
        assert!(g.point(1)[1] > g.point(0)[1]);
        for d in 0..2 {
            let col = g.points().column(d);
            let mut steps: Vec<f64> = Vec::new();
            for i in 1..g.len() {
                let diff = col[i] - col[i - 1];
                if diff > 0.0 {
                    steps.push(diff);
                }
            }
            let expected = steps[0];
            assert!(steps.iter().all(|&s| (s - expected).abs() <= 1e-12));
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        assert!(matches!(
            gen_grid(&[(0.0, 1.0); 5], 100),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn csv_without_header_has_no_labels() {
        let ds = read_csv(Cursor::new("1.0,2.0\n3.0,4.0\n")).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert!(ds.labels().is_none());
        assert_eq!(ds.point(1)[0], 3.0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = gen_noisy_circle(25, 10.0, 1.0, 15);
        let mut buf = Vec::new();
        write_csv(&mut buf, &ds).unwrap();
        let back = read_csv(Cursor::new(buf)).unwrap();
        assert_eq!(ds.points(), back.points());
    }

    #[test]
    fn csv_round_trip_keeps_labels() {
        let ds = gen_two_circles_on_sphere(10, 5.0, 0.1, 16).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &ds).unwrap();
        let back = read_csv(Cursor::new(buf)).unwrap();
        assert_eq!(ds.points(), back.points());
        assert_eq!(ds.labels(), back.labels());
    }

    #[test]
    fn csv_malformed_line_reports_line_number() {
        let err = read_csv(Cursor::new("1.0,2.0\n3.0\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_empty_file_is_an_error() {
        assert!(matches!(
            read_csv(Cursor::new("")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn csv_header_only_gives_empty_dataset() {
        let ds = read_csv(Cursor::new("x1,x2\n")).unwrap();
        assert_eq!(ds.len(), 0);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn usps_line_parses() {
        let mut line = String::from("6.0000");
        for i in 0..256 {
            line.push_str(&format!(" {:.4}", -1.0 + (i as f64) / 128.0));
        }
        line.push('\n');
        let ds = read_usps(Cursor::new(line)).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 256);
        assert_eq!(ds.labels(), Some(&[6][..]));
    }

    #[test]
    fn usps_arity_error_names_the_line() {
        let mut good = String::from("1");
        for _ in 0..256 {
            good.push_str(" 0.5");
        }
        let mut bad = String::from("2");
        for _ in 0..255 {
            bad.push_str(" 0.5");
        }
        let input = format!("{good}\n{bad}\n");
        match read_usps(Cursor::new(input)).unwrap_err() {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("256"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn noiseless_samples_certify_against_disjoint_fit() {
        let params = KernelParams::new(2, 1.0, 2).unwrap();
        let tol = Tolerance::default();
        let train = gen_noisy_circle(60, 10.0, 0.0, 17);
        let fresh = gen_noisy_circle(20, 10.0, 0.0, 18);
        let z = gen_gaussian_cloud(8, 2, 19);
        for i in 0..fresh.len() {
            let check =
                membership_certificate(fresh.point(i), &train, &z, &params, &tol).unwrap();
            assert!(check.contained);
        }
    }
}
