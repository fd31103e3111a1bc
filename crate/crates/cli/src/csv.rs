//! Numeric CSV in and out: comma separated, one header row, LF endings.

use std::io::{self, BufRead, Write};

use crate::CliError;

pub fn write_header<W: Write>(out: &mut W, header: &[&str]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))
}

/// `{:?}` is the shortest representation that parses back to the same f64.
pub fn write_row<W: Write>(out: &mut W, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            out.write_all(b",")?;
        }
        write!(out, "{v:?}")?;
        first = false;
    }
    out.write_all(b"\n")
}

fn parse_line(line: &str) -> Option<Vec<f64>> {
    line.split(',').map(|f| f.trim().parse::<f64>().ok()).collect()
}

/// Reads rows of exactly `width` numbers. A first line that does not parse
/// as numbers is taken as the header; blank lines are skipped.
pub fn read_rows<R: BufRead>(input: R, width: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Some(row) if row.len() == width => rows.push(row),
            Some(row) => {
                return Err(CliError::Usage(format!(
                    "line {}: expected {width} fields, found {}",
                    k + 1,
                    row.len()
                )))
            }
            None if k == 0 => {}
            None => return Err(CliError::Usage(format!("line {}: not a numeric row: '{line}'", k + 1))),
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let mut buf = Vec::new();
        write_header(&mut buf, &["a", "b", "c"]).unwrap();
        let row = [0.1, 1e-300, -2.5];
        write_row(&mut buf, &row).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "a,b,c\n0.1,1e-300,-2.5\n");
        let rows = read_rows(text.as_bytes(), 3).unwrap();
        assert_eq!(rows, vec![row.to_vec()]);
    }

    #[test]
    fn header_is_optional_but_only_first() {
        assert_eq!(read_rows("1,2\n\n3,4\n".as_bytes(), 2).unwrap().len(), 2);
        assert!(read_rows("1,2\nx,y\n".as_bytes(), 2).is_err());
        assert!(read_rows("x,y\n1,2,3\n".as_bytes(), 2).is_err());
    }
}
