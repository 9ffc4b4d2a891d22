//! Plain-text tensor files.
//!
//! ```text
//! # comment
//! p n d
//! i_1 i_2 ... i_d v
//! ```
//!
//! Indices are 0-based, `v` is a residue in `[0, p)`, and `#` starts a comment
//! anywhere on a line. Repeated indices are summed. [`serialize`] writes the
//! header and the nonzero entries in lexicographic index order, and
//! `serialize(parse(s)) == s` for every canonical `s`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::PrimeField;
use crate::tensor::{coeff_count, Tensor};

pub fn serialize(t: &Tensor) -> String {
    let mut out = format!("{} {} {}\n", t.field().p(), t.dim(), t.order());
    for (idx, v) in t.nonzero_entries() {
        for i in idx {
            write!(out, "{i} ").unwrap();
        }
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn parse(text: &str) -> Result<Tensor> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing `p n d` header".into(),
    })?;
    let fields = numbers(line, header)?;
    let [p, n, d] = fields[..] else {
        return Err(Error::Parse {
            line,
            message: format!("header needs 3 integers, found {}", fields.len()),
        });
    };
    let field = PrimeField::new(p).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let (n, d) = (n as usize, d as usize);
    coeff_count(n, d).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let mut t = Tensor::zeros(field, n, d).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let mut coeffs = t.coeffs().to_vec();

    for (line, body) in lines {
        let fields = numbers(line, body)?;
        if fields.len() != d + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {d} indices and a value, found {} fields", fields.len()),
            });
        }
        let idx: Vec<usize> = fields[..d].iter().map(|&i| i as usize).collect();
        let v = fields[d];
        if v >= p {
            return Err(Error::Parse {
                line,
                message: format!("value {v} not in [0, {p})"),
            });
        }
        let flat = t.flat_index(&idx).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        coeffs[flat] = field.add(coeffs[flat], v as u32);
    }
    t = Tensor::new(field, d, n, coeffs)?;
    Ok(t)
}

fn numbers(line: usize, body: &str) -> Result<Vec<u64>> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{tok}` is not a nonnegative integer"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_file() {
        let t = Tensor::identity(PrimeField::new(2).unwrap(), 2, 3).unwrap();
        assert_eq!(serialize(&t), "2 2 3\n0 0 0 1\n1 1 1 1\n");
    }

    #[test]
    fn comments_blank_lines_and_duplicates() {
        let text = "# header follows\n3 2 2  # p n d\n\n0 1 2\n0 1 2 # again\n1 0 1\n";
        let t = parse(text).unwrap();
        assert_eq!(t.get(&[0, 1]).unwrap(), 1);
        assert_eq!(t.get(&[1, 0]).unwrap(), 1);
        assert_eq!(serialize(&t), "3 2 2\n0 1 1\n1 0 1\n");
    }

    #[test]
    fn zero_and_empty_tensors() {
        let z = parse("5 3 2\n").unwrap();
        assert!(z.is_zero());
        assert_eq!(serialize(&z), "5 3 2\n");
        let e = parse("2 0 3\n").unwrap();
        assert!(e.coeffs().is_empty());
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("").unwrap_err()), 0);
        assert_eq!(line_of(parse("2 2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("4 2 2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("# c\n2 2 2\n0 0 1\n0 2 1\n").unwrap_err()), 4);
        assert_eq!(line_of(parse("2 2 2\n0 0 2\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("2 2 2\n0 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("2 2 2\n0 x 1\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("2 2 2\n0 -1 1\n").unwrap_err()), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(p in prop::sample::select(vec![2u64, 3, 5, 7, 65537]), n in 0usize..4, d in 1usize..4, seed in any::<u64>()) {
                let t = Tensor::random(PrimeField::new(p).unwrap(), n, d, seed).unwrap();
                let text = serialize(&t);
                let back = parse(&text).unwrap();
                prop_assert_eq!(&back, &t);
                prop_assert_eq!(serialize(&back), text);
            }
        }
    }
}
