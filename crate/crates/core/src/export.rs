//! Plain CSV output with 17 significant digits.

use std::io::{self, Write};

/// Scientific notation with 17 significant digits; round-trips every f64.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn write_csv_header<S: AsRef<str>>(w: &mut dyn Write, columns: &[S]) -> io::Result<()> {
    let line: Vec<&str> = columns.iter().map(|c| c.as_ref()).collect();
    writeln!(w, "{}", line.join(","))
}

pub fn write_csv_row(w: &mut dyn Write, values: &[f64]) -> io::Result<()> {
    let line: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
    writeln!(w, "{}", line.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    #[test]
    fn rows() {
        let mut buf = Vec::new();
        write_csv_header(&mut buf, &["a", "b"]).unwrap();
        write_csv_row(&mut buf, &[1.0, 2.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.0000000000000000e0,2.5000000000000000e0\n");
    }
}
