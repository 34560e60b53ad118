//! On-disk formats: plane snapshots (PGM and ASCII), full-lattice dumps,
//! series and cluster CSVs.

use std::fmt::Write as _;
use std::path::Path;

use corruption_lattice::{ClusterReport, Configuration, LatticeGeometry, Measurement};

use crate::error::{CliError, Result};

/// Longest line emitted in a PGM body.
const PGM_LINE: usize = 70;

pub const SERIES_HEADER: &str = "step,W,U,m";

/// A 2D slice of the configuration, `rows × cols`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plane {
    pub rows: usize,
    pub cols: usize,
    pub states: Vec<i8>,
}

impl Plane {
    /// Cuts the plane where `axis` equals `index`. Lattices with fewer than
    /// three axes are returned whole, a ring as a single row.
    pub fn cut(
        geometry: &LatticeGeometry,
        config: &Configuration,
        axis: usize,
        index: usize,
    ) -> Plane {
        let lengths = geometry.lengths();
        match lengths.len() {
            1 => Plane {
                rows: 1,
                cols: lengths[0],
                states: config.states().to_vec(),
            },
            2 => Plane {
                rows: lengths[0],
                cols: lengths[1],
                states: config.states().to_vec(),
            },
            _ => {
                let free: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
                let (rows, cols) = (lengths[free[0]], lengths[free[1]]);
                let mut states = Vec::with_capacity(rows * cols);
                let mut coords = [0usize; 3];
                coords[axis] = index;
                for r in 0..rows {
                    for c in 0..cols {
                        coords[free[0]] = r;
                        coords[free[1]] = c;
                        let site = geometry
                            .site_at(&coords)
                            .expect("plane coordinates in range");
                        states.push(config.get(site.index()));
                    }
                }
                Plane { rows, cols, states }
            }
        }
    }

    /// P2 graymap with maxval 1: corrupt agents black, honest agents white.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.cols, self.rows);
        let per_line = PGM_LINE.div_ceil(2);
        for row in self.states.chunks(self.cols) {
            for chunk in row.chunks(per_line) {
                let line: Vec<&str> = chunk
                    .iter()
                    .map(|&s| if s > 0 { "0" } else { "1" })
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// One line per row, `+` corrupt and `-` honest.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for row in self.states.chunks(self.cols) {
            out.extend(row.iter().map(|&s| state_char(s)));
            out.push('\n');
        }
        out
    }
}

fn state_char(s: i8) -> char {
    if s > 0 {
        '+'
    } else {
        '-'
    }
}

fn parse_state(c: char) -> Option<i8> {
    match c {
        '+' => Some(Configuration::CORRUPT),
        '-' => Some(Configuration::HONEST),
        _ => None,
    }
}

/// Full dump: header `d L1 .. Ld step`, then every site in row-major order.
pub fn lattice_dump(geometry: &LatticeGeometry, config: &Configuration, step: u64) -> String {
    let mut out = geometry.dimension().to_string();
    for l in geometry.lengths() {
        write!(out, " {l}").unwrap();
    }
    writeln!(out, " {step}").unwrap();
    out.extend(config.states().iter().map(|&s| state_char(s)));
    out.push('\n');
    out
}

/// A configuration read back from a snapshot file.
#[derive(Clone, Debug)]
pub struct LoadedSnapshot {
    pub geometry: LatticeGeometry,
    pub config: Configuration,
    pub step: Option<u64>,
}

/// Reads either a full dump or an ASCII grid. A grid of several rows is taken
/// as a periodic 2D lattice, a single row as a ring.
pub fn parse_snapshot(path: &Path, text: &str) -> Result<LoadedSnapshot> {
    let bad = |msg: String| CliError::format(path, msg);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| bad("empty snapshot".into()))?
        .trim();

    let (lengths, step, states) = if first.starts_with(|c: char| c.is_ascii_digit()) {
        let fields = first
            .split_whitespace()
            .map(str::parse::<u64>)
            .collect::<std::result::Result<Vec<u64>, _>>()
            .map_err(|_| bad(format!("bad dump header `{first}`")))?;
        let d = *fields.first().unwrap_or(&0) as usize;
        if !(1..=3).contains(&d) || fields.len() != d + 2 {
            return Err(bad(format!(
                "dump header `{first}` needs `d L1 .. Ld step` with d in 1..=3"
            )));
        }
        let lengths: Vec<usize> = fields[1..=d].iter().map(|&l| l as usize).collect();
        let body: String = lines.map(str::trim).collect();
        (lengths, Some(fields[d + 1]), body)
    } else {
        let rows: Vec<&str> = std::iter::once(first).chain(lines.map(str::trim)).collect();
        let cols = rows[0].chars().count();
        if let Some((n, row)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.chars().count() != cols)
        {
            return Err(bad(format!(
                "row {} has {} cells, expected {cols}",
                n + 1,
                row.chars().count()
            )));
        }
        let lengths = if rows.len() == 1 {
            vec![cols]
        } else {
            vec![rows.len(), cols]
        };
        (lengths, None, rows.concat())
    };

    let geometry = LatticeGeometry::new(&lengths).map_err(|e| bad(e.to_string()))?;
    let parsed = states
        .chars()
        .map(|c| parse_state(c).ok_or_else(|| bad(format!("unexpected character `{c}`"))))
        .collect::<Result<Vec<i8>>>()?;
    if parsed.len() != geometry.site_count() {
        return Err(bad(format!(
            "{} sites listed for a lattice of {}",
            parsed.len(),
            geometry.site_count()
        )));
    }
    let config = Configuration::from_states(&geometry, parsed).map_err(|e| bad(e.to_string()))?;
    Ok(LoadedSnapshot {
        geometry,
        config,
        step,
    })
}

/// `step,W,U,m` row. Rust's float formatting is shortest round-trip, so rows
/// parse back to the same values.
pub fn series_row(m: &Measurement) -> String {
    format!("{},{},{},{}", m.step, m.w, m.u, m.m)
}

pub fn parse_series_row(line: &str) -> Option<Measurement> {
    let mut f = line.split(',');
    let out = Measurement {
        step: f.next()?.parse().ok()?,
        w: f.next()?.parse().ok()?,
        u: f.next()?.parse().ok()?,
        m: f.next()?.parse().ok()?,
    };
    f.next().is_none().then_some(out)
}

pub fn cluster_sizes_csv(report: &ClusterReport) -> String {
    let mut out = String::from("cluster_id,size\n");
    for (id, size) in report.sizes.iter().enumerate() {
        writeln!(out, "{id},{size}").unwrap();
    }
    out
}

pub const CLUSTER_SUMMARY_HEADER: &str =
    "n_clusters,total_size,largest,mean_size,weighted_mean_size";

pub fn cluster_summary_csv(report: &ClusterReport) -> String {
    format!(
        "{CLUSTER_SUMMARY_HEADER}\n{},{},{},{},{}\n",
        report.n_clusters,
        report.total_size(),
        report.largest,
        report.mean_size,
        report.weighted_mean_size
    )
}
