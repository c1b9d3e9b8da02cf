//! CSV and plain-text file formats.
//!
//! * features: header `item_id,f_1,..,f_d`, one row per item; ids must be
//!   exactly `0..n` in any order.
//! * comparisons: header `i,j,wins_i,trials`, one row per compared pair.
//! * orders: no header, one row per user, item ids best first.
//! * matrices: no header, one row per matrix row.
//! * rankings: one item id per line, best first.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a
//! written file reproduces every value bit for bit.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use crate::dataset::PairCount;
use crate::{ComparisonDataset, Error, FeatureSet, Ranking, Result};

fn parse<T: std::str::FromStr>(field: &str, what: &str, line: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse(format!("line {line}: bad {what} `{field}`")))
}

pub fn write_features<W: Write>(features: &FeatureSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["item_id".to_string()];
    header.extend((1..=features.d()).map(|k| format!("f_{k}")));
    w.write_record(&header)?;
    let raw = features.raw();
    for i in 0..features.n() {
        let mut row = vec![i.to_string()];
        row.extend(raw.column(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(input: R) -> Result<FeatureSet> {
    let mut rdr = csv::Reader::from_reader(input);
    let d = rdr.headers()?.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
        Error::Parse("features header needs item_id plus at least one feature column".into())
    })?;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let id: usize = parse(&rec[0], "item id", line)?;
        let values = (1..=d).map(|c| parse(&rec[c], "feature value", line)).collect::<Result<Vec<f64>>>()?;
        rows.push((id, values));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(k, r)| r.0 != k) {
        return Err(Error::Parse("feature item ids must be exactly 0..n".into()));
    }
    let n = rows.len();
    FeatureSet::new(DMatrix::from_fn(d, n, |r, c| rows[c].1[r]))
}

pub fn write_comparisons<W: Write>(data: &ComparisonDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "wins_i", "trials"])?;
    for c in data.pairs() {
        w.write_record([c.i.to_string(), c.j.to_string(), c.wins.to_string(), c.trials.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_comparisons<R: Read>(input: R, features: FeatureSet) -> Result<ComparisonDataset> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut pairs = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != 4 {
            return Err(Error::Parse(format!("line {line}: expected i,j,wins_i,trials")));
        }
        pairs.push(PairCount::new(
            parse(&rec[0], "item", line)?,
            parse(&rec[1], "item", line)?,
            parse(&rec[2], "win count", line)?,
            parse(&rec[3], "trial count", line)?,
        ));
    }
    ComparisonDataset::new(features, pairs)
}

pub fn write_orders<W: Write>(orders: &[Vec<usize>], mut out: W) -> Result<()> {
    for order in orders {
        let line: Vec<String> = order.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_orders<R: Read>(input: R) -> Result<Vec<Vec<usize>>> {
    let mut orders = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        orders.push(line.split(',').map(|f| parse(f, "item id", k + 1)).collect::<Result<Vec<usize>>>()?);
    }
    Ok(orders)
}

pub fn write_matrix<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(line.split(',').map(|f| parse(f, "matrix entry", k + 1)).collect::<Result<Vec<f64>>>()?);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

pub fn write_ranking<W: Write>(ranking: &Ranking, mut out: W) -> Result<()> {
    for item in ranking.order() {
        writeln!(out, "{item}")?;
    }
    Ok(())
}

pub fn read_ranking<R: Read>(input: R) -> Result<Ranking> {
    let mut order = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            order.push(parse(&line, "item id", k + 1)?);
        }
    }
    Ranking::from_order(&order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_roundtrip_exactly() {
        let raw = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2.5e-17, 7.0, 0.2, 1e300]);
        let f = FeatureSet::new(raw).unwrap();
        let mut buf = Vec::new();
        write_features(&f, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("item_id,f_1,f_2\n0,0.1,7\n"));
        let back = read_features(buf.as_slice()).unwrap();
        assert_eq!(back.raw(), f.raw());
    }

    #[test]
    fn features_accept_shuffled_ids_and_reject_gaps() {
        let text = "item_id,f_1\n1,2.0\n0,1.0\n2,0.5\n";
        let f = read_features(text.as_bytes()).unwrap();
        assert_eq!(f.raw()[(0, 0)], 1.0);
        assert!(read_features("item_id,f_1\n0,1\n2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn comparisons_parse_either_orientation() {
        let f = FeatureSet::identity(3);
        let data = read_comparisons("i,j,wins_i,trials\n2,0,1,4\n0,1,3,3\n".as_bytes(), f).unwrap();
        assert_eq!(data.pairs()[0], PairCount { i: 0, j: 1, wins: 3, trials: 3 });
        assert_eq!(data.pairs()[1], PairCount { i: 0, j: 2, wins: 3, trials: 4 });
    }

    #[test]
    fn orders_and_rankings() {
        let orders = vec![vec![2, 0, 1], vec![1, 2]];
        let mut buf = Vec::new();
        write_orders(&orders, &mut buf).unwrap();
        assert_eq!(read_orders(buf.as_slice()).unwrap(), orders);

        let r = Ranking::from_order(&[3, 1, 0, 2]).unwrap();
        let mut buf = Vec::new();
        write_ranking(&r, &mut buf).unwrap();
        assert_eq!(buf, b"3\n1\n0\n2\n");
        assert_eq!(read_ranking(buf.as_slice()).unwrap(), r);
        assert!(read_ranking("0\n0\n".as_bytes()).is_err());
    }

    #[test]
    fn matrix_roundtrip_and_ragged_rows() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.123456789012345678, 0.876543210987654321, 0.5]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
        assert!(read_matrix("1,2\n3\n".as_bytes()).is_err());
    }
}
