//! Wall-clock scaling runs, reported as CSV.

use std::io::Write;
use std::time::Instant;

use crate::driver::{quantile, QuantileRequest};
use crate::error::{Error, Result};
use crate::gen::{generate_instance, InstanceSpec, Shape};
use crate::oracle::oracle_quantile;
use crate::par::ExecMode;
use crate::rank::{Aggregate, Ranking};
use crate::ratio::{to_f64, Fraction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Exact,
    Approx,
    Oracle,
}

impl std::fmt::Display for BenchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BenchMode::Exact => "exact",
            BenchMode::Approx => "approx",
            BenchMode::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BenchMode::Exact),
            "approx" => Ok(BenchMode::Approx),
            "oracle" => Ok(BenchMode::Oracle),
            _ => Err(Error::QuerySpec(format!("unknown bench mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub shape: Shape,
    pub sizes: Vec<usize>,
    pub mode: BenchMode,
    pub agg: Aggregate,
    pub weighted: Option<Vec<String>>,
    pub phi: Fraction,
    pub epsilon: Fraction,
    pub exec: ExecMode,
    pub seed: u64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct BenchRow {
    pub shape: String,
    pub n: usize,
    pub mode: String,
    pub phi: f64,
    pub epsilon: f64,
    pub millis: f64,
    pub answers: String,
}

pub fn bench_scaling(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let mut spec = InstanceSpec::new(cfg.shape, n, cfg.seed).agg(cfg.agg);
        spec.weighted = cfg.weighted.clone();
        let (q, d, rs) = generate_instance(&spec);
        let start = Instant::now();
        let answers = match cfg.mode {
            BenchMode::Oracle => {
                let r = Ranking::bind(&rs, &q, &d)?;
                oracle_quantile(&q, &d, &r, &cfg.phi)?;
                String::new()
            }
            BenchMode::Exact | BenchMode::Approx => {
                let mut req = QuantileRequest::new(cfg.phi).exec(cfg.exec);
                if cfg.mode == BenchMode::Approx {
                    req = req.epsilon(cfg.epsilon);
                }
                quantile(&q, &d, &rs, &req)?.total.to_string()
            }
        };
        rows.push(BenchRow {
            shape: cfg.shape.to_string(),
            n,
            mode: cfg.mode.to_string(),
            phi: to_f64(&cfg.phi),
            epsilon: if cfg.mode == BenchMode::Approx { to_f64(&cfg.epsilon) } else { 0.0 },
            millis: start.elapsed().as_secs_f64() * 1e3,
            answers,
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Csv {
        path: "<bench>".into(),
        message: e.to_string(),
    };
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<bench>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_size() {
        let cfg = BenchConfig {
            shape: Shape::Path(2),
            sizes: vec![16, 32],
            mode: BenchMode::Exact,
            agg: Aggregate::Min,
            weighted: None,
            phi: Fraction::new(1, 2),
            epsilon: Fraction::new(0, 1),
            exec: ExecMode::Sequential,
            seed: 1,
        };
        let rows = bench_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("shape,n,mode,phi,epsilon,millis,answers\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
