use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ComparisonData;

/// Read `winner,loser[,count]` rows. Identifiers get dense indices in order
/// of first appearance; a zero count only registers the two players.
pub fn load_matches(path: &Path) -> Result<ComparisonData> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_matches(file, path)
}

pub fn read_matches<R: Read>(mut reader: R, path: &Path) -> Result<ComparisonData> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let newlines: Vec<usize> = buf
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == b'\n')
        .map(|(i, _)| i)
        .collect();
    // record positions can point at the tail of the previous terminator
    let line_at = |pos: Option<&csv::Position>| -> u64 {
        pos.map_or(0, |p| {
            let mut b = p.byte() as usize;
            while b < buf.len() && matches!(buf[b], b'\r' | b'\n') {
                b += 1;
            }
            newlines.partition_point(|&nl| nl < b) as u64 + 1
        })
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(buf.as_slice());
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let mut id = |s: &str| -> usize {
        *index.entry(s.to_string()).or_insert_with(|| {
            names.push(s.to_string());
            names.len() - 1
        })
    };
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = line_at(e.position());
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = line_at(rec.position());
        let perr = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if first {
            first = false;
            if rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("winner")) {
                continue;
            }
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if !(2..=3).contains(&rec.len()) {
            return Err(perr(format!("expected 2 or 3 fields, found {}", rec.len())));
        }
        let (w, l) = (&rec[0], &rec[1]);
        if w.is_empty() || l.is_empty() {
            return Err(perr("empty player identifier".into()));
        }
        if w == l {
            return Err(perr(format!("player {w:?} cannot play itself")));
        }
        let count: u32 = match rec.get(2) {
            None | Some("") => 1,
            Some(c) => c
                .parse()
                .map_err(|_| perr(format!("count {c:?} is not a non-negative integer")))?,
        };
        rows.push((id(w), id(l), count));
    }
    let n = names.len();
    if n == 0 {
        log::warn!("{} contains no matches", path.display());
    }
    ComparisonData::from_results(n, rows)?.with_names(names)
}

/// Write data in the format read by [`load_matches`]. Zero-count rows come
/// first so that identifiers reload with the same indices, isolated players
/// included.
pub fn write_matches<W: Write>(data: &ComparisonData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["winner", "loser", "count"])?;
    let n = data.n_items();
    let mut i = 0;
    while i < n {
        let j = if i + 1 < n { i + 1 } else { i.saturating_sub(1) };
        if j == i {
            // a lone player cannot be registered without an opponent
            break;
        }
        w.write_record([data.name(i), data.name(j), "0".into()])?;
        i += 2;
    }
    for e in data.edges() {
        for (a, b, c) in [(e.i, e.j, e.wins_i), (e.j, e.i, e.wins_j)] {
            if c > 0 {
                w.write_record([data.name(a), data.name(b), c.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
