use crate::error::{Error, Result};
use crate::numkit::Tensor3;

/// Sparse coordinate form of a third-order tensor.
///
/// Text format: `#` comment lines, then a `n f m` dims line, then one
/// `i j k value` line per entry (0-based, whitespace separated). Values
/// must be finite and non-negative; duplicate coordinates are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct CooTensor {
    pub dims: (usize, usize, usize),
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl CooTensor {
    pub fn from_dense(t: &Tensor3) -> Self {
        let dims = t.dims();
        let mut entries = Vec::new();
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    let v = t.get(i, j, k);
                    if v != 0.0 {
                        entries.push((i, j, k, v));
                    }
                }
            }
        }
        Self { dims, entries }
    }

    pub fn to_dense(&self) -> Tensor3 {
        let mut t = Tensor3::zeros(self.dims);
        for &(i, j, k, v) in &self.entries {
            t.add(i, j, k, v);
        }
        t
    }

    pub fn read(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (dl, dims_line) = lines.next().ok_or_else(|| Error::Format("tensor file has no dims line".into()))?;
        let d: Vec<usize> = dims_line
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(dl, "dims line must be three non-negative integers"))?;
        if d.len() != 3 {
            return Err(Error::parse(dl, format!("dims line has {} values, expected 3", d.len())));
        }
        let dims = (d[0], d[1], d[2]);
        let mut acc: std::collections::BTreeMap<(usize, usize, usize), f64> = Default::default();
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::parse(line, format!("expected `i j k value`, got {} fields", f.len())));
            }
            let idx: Vec<usize> = f[..3]
                .iter()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(line, "indices must be non-negative integers"))?;
            let v: f64 = f[3].parse().map_err(|_| Error::parse(line, format!("value {:?} is not a number", f[3])))?;
            if !v.is_finite() {
                return Err(Error::parse(line, "value is not finite"));
            }
            if v < 0.0 {
                return Err(Error::parse(line, format!("negative value {v}")));
            }
            if idx[0] >= dims.0 || idx[1] >= dims.1 || idx[2] >= dims.2 {
                return Err(Error::parse(
                    line,
                    format!("index ({}, {}, {}) outside dims {:?}", idx[0], idx[1], idx[2], dims),
                ));
            }
            *acc.entry((idx[2], idx[1], idx[0])).or_insert(0.0) += v;
        }
        let entries = acc.into_iter().map(|((k, j, i), v)| (i, j, k, v)).collect();
        Ok(Self { dims, entries })
    }

    pub fn write(&self) -> String {
        let mut out = format!("{} {} {}\n", self.dims.0, self.dims.1, self.dims.2);
        for &(i, j, k, v) in &self.entries {
            out.push_str(&format!("{i} {j} {k} {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let t = CooTensor::read("# test\n2 2 1\n0 1 0 1.5\n0 1 0 2.5\n").unwrap();
        assert_eq!(t.entries, vec![(0, 1, 0, 4.0)]);
        assert_eq!(t.to_dense().get(0, 1, 0), 4.0);
    }

    #[test]
    fn out_of_range_is_error() {
        assert!(matches!(CooTensor::read("1 1 1\n0 0 1 1.0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(CooTensor::read("1 1\n").is_err());
        assert!(CooTensor::read("1 1 1\n0 0 0 nan\n").is_err());
    }

    #[test]
    fn dense_round_trip() {
        let t = Tensor3::from_fn(
            (2, 3, 2),
            |i, j, k| if (i + j + k) % 2 == 0 { (i * 7 + j + k) as f64 * 0.1 } else { 0.0 },
        );
        let coo = CooTensor::from_dense(&t);
        assert_eq!(CooTensor::read(&coo.write()).unwrap().to_dense(), t);
    }
}
