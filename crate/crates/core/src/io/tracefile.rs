//! `trace.bin`: little-endian columnar storage of posterior draws.
//!
//! Layout after the 8-byte magic and a u32 version:
//! u32 config length + JSON config, u32 n_items, u64 n_draws, then columns
//! chain (u32 × T), iteration (u64 × T), K (u32 × T), labels (u32 × T·n),
//! strengths (f64 × ΣK).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BlockStrengths, Partition};
use crate::sampler::{Draw, SamplerConfig, Trace};

pub const MAGIC: &[u8; 8] = b"BTSBMTRC";
pub const VERSION: u32 = 1;

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let n = trace.n_items();
    let cfg = serde_json::to_vec(&trace.config)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&u32_of(cfg.len())?.to_le_bytes())?;
    w.write_all(&cfg)?;
    w.write_all(&u32_of(n)?.to_le_bytes())?;
    w.write_all(&(trace.len() as u64).to_le_bytes())?;
    for d in &trace.draws {
        w.write_all(&u32_of(d.chain)?.to_le_bytes())?;
    }
    for d in &trace.draws {
        w.write_all(&(d.iteration as u64).to_le_bytes())?;
    }
    for d in &trace.draws {
        w.write_all(&u32_of(d.k())?.to_le_bytes())?;
    }
    for d in &trace.draws {
        if d.partition.n_items() != n {
            return Err(Error::SizeMismatch(d.partition.n_items(), n));
        }
        for &l in d.partition.labels() {
            w.write_all(&u32_of(l)?.to_le_bytes())?;
        }
    }
    for d in &trace.draws {
        for &v in d.strengths.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn u32_of(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::TraceFormat(format!("{v} does not fit in 32 bits")))
}

struct Src<R> {
    r: R,
}

impl<R: Read> Src<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.r.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::TraceFormat("truncated file".into()),
            _ => Error::Io(e),
        })?;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_trace<R: Read>(input: R) -> Result<Trace> {
    let mut s = Src {
        r: BufReader::new(input),
    };
    if &s.bytes::<8>()? != MAGIC {
        return Err(Error::TraceFormat("bad magic".into()));
    }
    let version = s.u32()?;
    if version != VERSION {
        return Err(Error::TraceFormat(format!("unsupported version {version}")));
    }
    let cfg_len = s.u32()? as usize;
    let mut cfg = vec![0u8; cfg_len];
    s.r.read_exact(&mut cfg)
        .map_err(|_| Error::TraceFormat("truncated config".into()))?;
    let config: SamplerConfig = serde_json::from_slice(&cfg)?;
    let n = s.u32()? as usize;
    let t = usize::try_from(s.u64()?).map_err(|_| Error::TraceFormat("draw count".into()))?;

    let chains = (0..t).map(|_| s.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let iters = (0..t).map(|_| s.u64().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let ks = (0..t).map(|_| s.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let mut parts = Vec::with_capacity(t);
    for &k in &ks {
        let labels = (0..n).map(|_| s.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let p = Partition::from_labels(labels).map_err(|e| Error::TraceFormat(e.to_string()))?;
        if p.k() != k {
            return Err(Error::TraceFormat(format!("K column says {k}, labels give {}", p.k())));
        }
        parts.push(p);
    }
    let mut draws = Vec::with_capacity(t);
    for (((chain, iteration), k), partition) in chains.into_iter().zip(iters).zip(ks).zip(parts) {
        let vals = (0..k).map(|_| s.f64()).collect::<Result<Vec<_>>>()?;
        let strengths = BlockStrengths::new(vals).map_err(|e| Error::TraceFormat(e.to_string()))?;
        draws.push(Draw {
            chain,
            iteration,
            partition,
            strengths,
        });
    }
    let mut rest = [0u8; 1];
    if s.r.read(&mut rest)? != 0 {
        return Err(Error::TraceFormat("trailing bytes".into()));
    }
    Ok(Trace {
        draws,
        config,
        timings: Default::default(),
    })
}

pub fn save_trace(trace: &Trace, path: &Path) -> Result<()> {
    write_trace(trace, File::create(path)?)
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_trace(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComparisonData;
    use crate::sampler::run_chains;

    fn sample_trace() -> Trace {
        let data = ComparisonData::from_results(5, [(0, 1, 2), (1, 2, 3), (3, 4, 1), (4, 0, 2)]).unwrap();
        let cfg = SamplerConfig {
            total_iters: 60,
            burn_in: 10,
            thin: 2,
            n_chains: 2,
            ..SamplerConfig::default()
        };
        run_chains(&data, &cfg).unwrap()
    }

    #[test]
    fn round_trip() {
        let t = sample_trace();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.draws, t.draws);
        assert_eq!(back.config, t.config);
        let mut again = Vec::new();
        write_trace(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_corruption() {
        let t = sample_trace();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_trace(bad.as_slice()), Err(Error::TraceFormat(_))));
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(matches!(read_trace(bad.as_slice()), Err(Error::TraceFormat(_))));
        assert!(matches!(
            read_trace(&buf[..buf.len() - 3]),
            Err(Error::TraceFormat(_))
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_trace(long.as_slice()), Err(Error::TraceFormat(_))));
    }
}
