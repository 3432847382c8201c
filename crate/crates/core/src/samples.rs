//! Plain-text samples file: one record per retained draw.
//!
//! Format (whitespace-separated, one record per line):
//!
//! ```text
//! <iter> <loglik> <p> <beta_1..beta_p> <J> <s_1..s_J> <K> <h_1..h_K>
//! ```
//!
//! with K = J + 1. The variable-length vectors are length-prefixed so a
//! record is self-describing. Floats are written in Rust's shortest
//! round-trip form, so rereading reproduces every bit and rewriting
//! reproduces every byte. Header comments carry the format version, RNG
//! provenance, s_max, and acceptance tallies.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::likelihood::{HazardIncrements, ModelState, TimePartition};
use crate::rjmcmc::{Counts, MoveTallies, SampleChain};

pub const SAMPLES_FORMAT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::io(path.display().to_string(), source)
}

/// Write a chain to `path`.
pub fn write_samples(path: &Path, chain: &SampleChain) -> Result<()> {
    if chain.samples.is_empty() {
        return Err(Error::invariant("refusing to write an empty sample file"));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let s_max = chain.samples[0].partition.s_max();
    let t = &chain.acceptance;
    (|| -> std::io::Result<()> {
        writeln!(w, "# gprj-samples {SAMPLES_FORMAT_VERSION}")?;
        writeln!(w, "# seed {} stream {}", chain.seed, chain.stream)?;
        writeln!(w, "# s_max {s_max}")?;
        writeln!(
            w,
            "# acceptance rp {} {} bh {} {} bi {} {} di {} {}",
            t.rp.proposed,
            t.rp.accepted,
            t.bh.proposed,
            t.bh.accepted,
            t.bi.proposed,
            t.bi.accepted,
            t.di.proposed,
            t.di.accepted
        )?;
        writeln!(w, "# fields: iter loglik p beta[p] J s[J] K h[K]")?;
        for ((state, &iter), &ll) in chain
            .samples
            .iter()
            .zip(&chain.iterations)
            .zip(&chain.log_lik_trace)
        {
            write!(w, "{iter} {ll} {}", state.beta.len())?;
            for b in &state.beta {
                write!(w, " {b}")?;
            }
            let splits = state.partition.splits();
            write!(w, " {}", splits.len())?;
            for s in splits {
                write!(w, " {s}")?;
            }
            let h = state.increments.as_slice();
            write!(w, " {}", h.len())?;
            for v in h {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

struct Cursor<'a> {
    tokens: std::str::SplitWhitespace<'a>,
    record: usize,
    path: String,
}

impl<'a> Cursor<'a> {
    fn fail(&self, what: &str) -> Error {
        Error::data(format!(
            "sample file {}: record {}: {what}",
            self.path, self.record
        ))
    }

    fn next_f64(&mut self, what: &str) -> Result<f64> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| self.fail(&format!("missing {what}")))?;
        tok.parse::<f64>()
            .map_err(|_| self.fail(&format!("bad {what} {tok:?}")))
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| self.fail(&format!("missing {what}")))?;
        tok.parse::<usize>()
            .map_err(|_| self.fail(&format!("bad {what} {tok:?}")))
    }

    fn next_u64(&mut self, what: &str) -> Result<u64> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| self.fail(&format!("missing {what}")))?;
        tok.parse::<u64>()
            .map_err(|_| self.fail(&format!("bad {what} {tok:?}")))
    }

    fn next_vec(&mut self, len: usize, what: &str) -> Result<Vec<f64>> {
        (0..len).map(|_| self.next_f64(what)).collect()
    }
}

/// Read a chain back. Errors carry the 1-based record index.
pub fn read_samples(path: &Path) -> Result<SampleChain> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let shown = path.display().to_string();

    let mut chain = SampleChain {
        samples: Vec::new(),
        iterations: Vec::new(),
        log_lik_trace: Vec::new(),
        acceptance: MoveTallies::default(),
        seed: 0,
        stream: 0,
    };
    let mut s_max = None;
    let mut version_seen = false;
    let mut record = 0usize;

    for line in reader.lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("gprj-samples") {
                let v: u32 = v.trim().parse().map_err(|_| {
                    Error::data(format!("sample file {shown}: bad format version {v:?}"))
                })?;
                if v != SAMPLES_FORMAT_VERSION {
                    return Err(Error::data(format!(
                        "sample file {shown}: unsupported format version {v}"
                    )));
                }
                version_seen = true;
            } else if rest.starts_with("seed") {
                let mut it = rest.split_whitespace();
                it.next();
                chain.seed = it.next().and_then(|t| t.parse().ok()).unwrap_or(0);
                it.next();
                chain.stream = it.next().and_then(|t| t.parse().ok()).unwrap_or(0);
            } else if rest.starts_with("s_max") {
                s_max = rest
                    .split_whitespace()
                    .nth(1)
                    .and_then(|t| t.parse::<f64>().ok());
            } else if rest.starts_with("acceptance") {
                let nums: Vec<u64> = rest
                    .split_whitespace()
                    .filter_map(|t| t.parse().ok())
                    .collect();
                if nums.len() == 8 {
                    chain.acceptance = MoveTallies {
                        rp: Counts {
                            proposed: nums[0],
                            accepted: nums[1],
                        },
                        bh: Counts {
                            proposed: nums[2],
                            accepted: nums[3],
                        },
                        bi: Counts {
                            proposed: nums[4],
                            accepted: nums[5],
                        },
                        di: Counts {
                            proposed: nums[6],
                            accepted: nums[7],
                        },
                    };
                }
            }
            continue;
        }
        if !version_seen {
            return Err(Error::data(format!(
                "sample file {shown}: missing '# gprj-samples' header"
            )));
        }
        let s_max = s_max
            .ok_or_else(|| Error::data(format!("sample file {shown}: missing '# s_max' header")))?;
        record += 1;
        let mut cur = Cursor {
            tokens: trimmed.split_whitespace(),
            record,
            path: shown.clone(),
        };
        let iter = cur.next_u64("iteration index")?;
        let ll = cur.next_f64("log-likelihood")?;
        let p = cur.next_usize("coefficient count")?;
        let beta = cur.next_vec(p, "coefficient")?;
        let j = cur.next_usize("split count")?;
        let splits = cur.next_vec(j, "split position")?;
        let k = cur.next_usize("increment count")?;
        if k != j + 1 {
            return Err(cur.fail(&format!("increment count {k} != J + 1 = {}", j + 1)));
        }
        let h = cur.next_vec(k, "increment")?;
        if cur.tokens.next().is_some() {
            return Err(cur.fail("trailing tokens"));
        }
        let partition = TimePartition::new(splits, s_max)
            .map_err(|e| cur.fail(&format!("invalid partition: {e}")))?;
        let increments =
            HazardIncrements::new(h).map_err(|e| cur.fail(&format!("invalid increments: {e}")))?;
        chain.samples.push(ModelState {
            beta,
            partition,
            increments,
        });
        chain.iterations.push(iter);
        chain.log_lik_trace.push(ll);
    }
    if chain.samples.is_empty() {
        return Err(Error::data(format!(
            "sample file {shown}: no records found"
        )));
    }
    Ok(chain)
}
