//! Plain CSV readers and writers. Floats are written with `{:.16e}`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::Rescale;
use crate::moments::{MassConvention, MomentSequence};
use crate::oracles::TwoDiskSeries;
use crate::prony::{AtomicMeasure, Disk, DiskSet};

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// `m,re,im` with `#` metadata lines for the frame and the data origin.
pub fn moments_csv(seq: &MomentSequence, convention: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes_per_curve={}", seq.nodes_per_curve);
    let (level, seed) = seq.noise.map_or((0.0, 0), |n| (n.level, n.seed));
    let _ = writeln!(out, "# noise_level={} noise_seed={}", f(level), seed);
    let _ = writeln!(out, "# mass_convention={convention}");
    let _ = writeln!(
        out,
        "# rescale_scale={} rescale_shift_re={} rescale_shift_im={}",
        f(seq.rescale.scale),
        f(seq.rescale.shift.re),
        f(seq.rescale.shift.im)
    );
    out.push_str("m,re,im\n");
    for (m, t) in seq.values.iter().enumerate() {
        let _ = writeln!(out, "{m},{},{}", f(t.re), f(t.im));
    }
    out
}

/// Reads a moment file written by [`moments_csv`] (metadata is optional).
pub fn parse_moments_csv(text: &str) -> Result<MomentSequence> {
    let mut seq = MomentSequence::from_values(Vec::new());
    let mut scale = 1.0;
    let mut shift = C64::new(0.0, 0.0);
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                let Some((k, v)) = kv.split_once('=') else {
                    continue;
                };
                let num = || v.parse::<f64>().map_err(|e| bad(lineno, e));
                match k {
                    "rescale_scale" => scale = num()?,
                    "rescale_shift_re" => shift.re = num()?,
                    "rescale_shift_im" => shift.im = num()?,
                    "nodes_per_curve" => {
                        seq.nodes_per_curve = v.parse().map_err(|e| bad(lineno, e))?
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.replace(' ', "") != "m,re,im" {
                return Err(Error::Config(format!(
                    "line {}: expected header m,re,im",
                    lineno + 1
                )));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "line {}: expected 3 columns",
                lineno + 1
            )));
        }
        let m: usize = cols[0].parse().map_err(|e| bad(lineno, e))?;
        if m != seq.values.len() {
            return Err(Error::Config(format!(
                "line {}: moment index {m} out of order",
                lineno + 1
            )));
        }
        let re: f64 = cols[1].parse().map_err(|e| bad(lineno, e))?;
        let im: f64 = cols[2].parse().map_err(|e| bad(lineno, e))?;
        seq.values.push(C64::new(re, im));
    }
    if scale <= 0.0 {
        return Err(Error::Config("rescale_scale must be positive".into()));
    }
    seq.rescale = Rescale { scale, shift };
    Ok(seq)
}

fn bad(lineno: usize, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {}: {e}", lineno + 1))
}

/// `re_z,im_z,re_c,im_c,radius` in the frame of `disks`.
pub fn atoms_csv(disks: &DiskSet) -> String {
    let mut out = format!("# mass_convention={}\n", disks.convention.label());
    out.push_str("re_z,im_z,re_c,im_c,radius\n");
    for d in &disks.disks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            f(d.center.re),
            f(d.center.im),
            f(d.weight.re),
            f(d.weight.im),
            f(d.radius)
        );
    }
    out
}

/// Reads a disk file written by [`atoms_csv`].
pub fn parse_atoms_csv(text: &str, convention: MassConvention) -> Result<DiskSet> {
    let mut disks = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let cols = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| bad(lineno, e)))
            .collect::<Result<Vec<f64>>>()?;
        if cols.len() != 5 {
            return Err(Error::Config(format!(
                "line {}: expected 5 columns",
                lineno + 1
            )));
        }
        disks.push(Disk {
            center: C64::new(cols[0], cols[1]),
            weight: C64::new(cols[2], cols[3]),
            radius: cols[4],
        });
    }
    Ok(DiskSet { disks, convention })
}

/// Dense operator matrix, one row per line.
pub fn matrix_csv(name: &str, a: &DMatrix<f64>, meta: &[(&str, String)]) -> String {
    let mut out = format!("# operator={name} rows={} cols={}\n", a.nrows(), a.ncols());
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    for i in 0..a.nrows() {
        let row: Vec<String> = a.row(i).iter().map(|&x| f(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Per-term table of the two-disk sequences.
pub fn two_disk_csv(series: &TwoDiskSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# delta={} decay_constant={} tail_estimate={}",
        f(series.delta),
        f(series.decay_constant),
        f(series.tail_estimate)
    );
    out.push_str(
        "n,lambda1,lambda2,re_z1n,im_z1n,re_z2n,im_z2n,re_kappa1,im_kappa1,re_kappa2,im_kappa2\n",
    );
    for n in 0..series.lambda1.len() {
        let (k1, k2) = if n == 0 || n > series.terms() {
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (series.kappa1_at(n), series.kappa2_at(n))
        };
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{},{},{},{},{},{}",
            f(series.lambda1[n]),
            f(series.lambda2[n]),
            f(series.points1[n].re),
            f(series.points1[n].im),
            f(series.points2[n].re),
            f(series.points2[n].im),
            f(k1.re),
            f(k1.im),
            f(k2.re),
            f(k2.im)
        );
    }
    out
}

/// `m,re,im` for a measure's forward moments.
pub fn measure_moments_csv(measure: &AtomicMeasure, count: usize) -> String {
    moments_csv(&MomentSequence::from_values(measure.moments(count)), "none")
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtn::Noise;

    #[test]
    fn moments_round_trip_bitwise() {
        let mut seq = MomentSequence::from_values(vec![
            C64::new(0.1234567890123456, 0.0),
            C64::new(-1.0e-17, 3.0e5),
            C64::new(std::f64::consts::PI, -std::f64::consts::E),
        ]);
        seq.nodes_per_curve = 128;
        seq.noise = Some(Noise {
            level: 1e-3,
            seed: 7,
        });
        seq.rescale = Rescale {
            scale: 0.75,
            shift: C64::new(0.1, -0.2),
        };
        let text = moments_csv(&seq, "4pi");
        let back = parse_moments_csv(&text).unwrap();
        assert_eq!(back.values, seq.values);
        assert_eq!(back.rescale, seq.rescale);
        assert_eq!(back.nodes_per_curve, 128);
        assert_eq!(
            moments_csv(&back, "4pi").lines().nth(3),
            text.lines().nth(3)
        );
    }

    #[test]
    fn atoms_round_trip() {
        let set = DiskSet {
            disks: vec![Disk {
                center: C64::new(0.1, -0.3),
                radius: 0.05,
                weight: C64::new(0.0314, 1e-9),
            }],
            convention: MassConvention::TwoPi,
        };
        let back = parse_atoms_csv(&atoms_csv(&set), MassConvention::TwoPi).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(parse_moments_csv("m,re,im\n0,1.0\n").is_err());
        assert!(parse_moments_csv("m,re,im\n1,1.0,0.0\n").is_err());
        assert!(parse_moments_csv("a,b,c\n").is_err());
        assert!(parse_moments_csv("m,re,im\n0,x,0\n").is_err());
    }

    #[test]
    fn matrix_layout() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let text = matrix_csv("R", &a, &[("nodes", "2".into())]);
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].split(',').count(), 3);
        assert!(rows[1].starts_with("4.0000000000000000e0"));
    }
}
