//! CSV and summary files.
//!
//! Every file starts with the resolved run configuration as `# key=value`
//! comment lines, followed by a mandatory header row.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::market::PriceSeries;
use crate::metaloop::MetaRecord;
use crate::orderbook::Price;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{path}: embedded config: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_config_header<W: Write>(w: &mut W, cfg: &RunConfig) -> std::io::Result<()> {
    for (k, v) in cfg.to_pairs() {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Decimal places needed to print a tick size exactly (for powers of ten).
fn decimals(delta_p: f64) -> usize {
    (-delta_p.log10()).ceil().max(0.0) as usize
}

/// Series file: `tick,mid` with mid in monetary units, plus `trade_count`
/// when counts are given.
pub fn write_series(
    path: &Path,
    series: &PriceSeries,
    trade_counts: Option<&[u32]>,
    cfg: &RunConfig,
) -> Result<(), IoError> {
    let mut out = create(path)?;
    write_config_header(&mut out, cfg).map_err(io_err(path))?;
    let dp = cfg.sim.delta_p;
    let prec = decimals(dp);
    let mut w = csv::Writer::from_writer(out);
    let write = |w: &mut csv::Writer<BufWriter<File>>| -> Result<(), csv::Error> {
        match trade_counts {
            Some(_) => w.write_record(["tick", "mid", "trade_count"])?,
            None => w.write_record(["tick", "mid"])?,
        }
        for (i, p) in series.as_slice().iter().enumerate() {
            let tick = (i + 1).to_string();
            let mid = format!("{:.*}", prec, p.to_money(dp));
            match trade_counts {
                Some(tc) => w.write_record([tick, mid, tc[i].to_string()])?,
                None => w.write_record([tick, mid])?,
            }
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_err(path))
}

/// A series file as read from disk, before tick conversion.
#[derive(Clone, Debug)]
pub struct SeriesFile {
    /// The embedded `key=value` lines.
    pub header: String,
    /// Mid prices in monetary units, tick 1 first.
    pub mids: Vec<f64>,
}

impl SeriesFile {
    /// The embedded configuration applied on top of `base`.
    pub fn config(&self, base: RunConfig, path: &Path) -> Result<RunConfig, IoError> {
        let mut cfg = base;
        cfg.merge_str(&self.header).map_err(|source| IoError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }

    pub fn to_series(&self, delta_p: f64) -> PriceSeries {
        PriceSeries::new(self.mids.iter().map(|m| Price((m / delta_p).round() as i64)).collect())
    }
}

pub fn read_series(path: &Path) -> Result<SeriesFile, IoError> {
    let mut header = String::new();
    {
        let f = BufReader::new(File::open(path).map_err(io_err(path))?);
        for line in f.lines() {
            let line = line.map_err(io_err(path))?;
            match line.strip_prefix('#') {
                Some(rest) => {
                    header.push_str(rest.trim());
                    header.push('\n');
                }
                None => break,
            }
        }
    }
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(BufReader::new(file));
    let cols = rdr.headers().map_err(csv_err(path))?.clone();
    if cols.get(0) != Some("tick") || cols.get(1) != Some("mid") {
        return Err(IoError::Format {
            path: path.to_path_buf(),
            reason: format!(
                "expected header `tick,mid[,trade_count]`, got `{}`",
                cols.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut mids = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |reason: String| IoError::Format {
            path: path.to_path_buf(),
            reason: format!("row {}: {reason}", i + 1),
        };
        let tick: u64 = rec[0].parse().map_err(|e| bad(format!("tick: {e}")))?;
        if tick != i as u64 + 1 {
            return Err(bad(format!("expected tick {}, found {tick}", i + 1)));
        }
        let mid: f64 = rec[1].parse().map_err(|e| bad(format!("mid: {e}")))?;
        if !(mid.is_finite() && mid > 0.0) {
            return Err(bad(format!("mid must be positive, got {mid}")));
        }
        mids.push(mid);
    }
    Ok(SeriesFile { header, mids })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const METALOOP_HEADER: [&str; 9] = [
    "iter",
    "tm",
    "tr",
    "profit_m",
    "profit_r",
    "next_tm",
    "next_tr",
    "bt_profit_m",
    "bt_profit_r",
];

pub fn write_metaloop(path: &Path, records: &[MetaRecord], cfg: &RunConfig) -> Result<(), IoError> {
    let mut out = create(path)?;
    write_config_header(&mut out, cfg).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(out);
    let write = |w: &mut csv::Writer<BufWriter<File>>| -> Result<(), csv::Error> {
        w.write_record(METALOOP_HEADER)?;
        for r in records {
            w.write_record([
                r.iter.to_string(),
                opt(r.tm),
                opt(r.tr),
                opt(r.profit_m),
                opt(r.profit_r),
                opt(r.next_tm),
                opt(r.next_tr),
                opt(r.bt_profit_m),
                opt(r.bt_profit_r),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_err(path))
}

/// One row of the per-iteration series summary.
#[derive(Clone, Debug, PartialEq)]
pub struct IterSummary {
    pub iter: usize,
    pub trade_count: u64,
    pub final_mid: f64,
    pub return_stdev: Option<f64>,
    pub kurtosis: Option<f64>,
}

pub fn write_iter_summaries(path: &Path, rows: &[IterSummary], cfg: &RunConfig) -> Result<(), IoError> {
    let mut out = create(path)?;
    write_config_header(&mut out, cfg).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(out);
    let write = |w: &mut csv::Writer<BufWriter<File>>| -> Result<(), csv::Error> {
        w.write_record(["iter", "trade_count", "final_mid", "return_stdev", "kurtosis"])?;
        for r in rows {
            w.write_record([
                r.iter.to_string(),
                r.trade_count.to_string(),
                r.final_mid.to_string(),
                opt(r.return_stdev),
                opt(r.kurtosis),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_err(path))
}

/// Plain `key=value` summary: the config followed by result fields.
pub fn write_summary(path: &Path, cfg: &RunConfig, fields: &[(&str, String)]) -> Result<(), IoError> {
    let mut out = create(path)?;
    let mut body = || -> std::io::Result<()> {
        write_config_header(&mut out, cfg)?;
        for (k, v) in fields {
            writeln!(out, "{k}={v}")?;
        }
        out.flush()
    };
    body().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut cfg = RunConfig::default();
        cfg.sim.t_e = 3;
        cfg.seed = 77;
        let s = PriceSeries::new(vec![Price(1_000_045), Price(999_999), Price(1)]);
        write_series(&path, &s, Some(&[0, 2, 1]), &cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# seed=77\n"));
        assert!(text.contains("tick,mid,trade_count\n1,10000.45,0\n2,9999.99,2\n3,0.01,1\n"));
        let f = read_series(&path).unwrap();
        let back = f.config(RunConfig::default(), &path).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(f.to_series(0.01), s);
    }

    #[test]
    fn rejects_gaps_and_bad_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gap.csv");
        std::fs::write(&p, "tick,mid\n1,10.0\n3,10.0\n").unwrap();
        assert!(matches!(read_series(&p), Err(IoError::Format { .. })));
        let p = dir.path().join("hdr.csv");
        std::fs::write(&p, "t,price\n1,10.0\n").unwrap();
        assert!(matches!(read_series(&p), Err(IoError::Format { .. })));
        let missing = dir.path().join("nope.csv");
        let err = read_series(&missing).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }
}
