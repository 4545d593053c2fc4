//! Number formatting and output routing.

use std::io::Write;
use std::path::PathBuf;

use crate::error::{CliError, CliResult};

/// Shortest round-trip formatting truncated to `sig` significant digits:
/// values whose shortest representation already fits are passed through
/// unchanged; longer ones are rounded to `sig` digits and rendered as plain
/// decimals.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let shortest = format!("{x}");
    if significant_digits(&shortest) <= sig {
        return shortest;
    }
    rounded_plain(x, sig)
}

fn significant_digits(text: &str) -> usize {
    let mantissa = text.split(['e', 'E']).next().unwrap_or(text);
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_start_matches('0');
    trimmed.len()
}

fn rounded_plain(x: f64, sig: usize) -> String {
    let formatted = format!("{:.*e}", sig - 1, x);
    let (mantissa, exponent) = formatted
        .split_once('e')
        .expect("scientific format always has an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    let body = if exponent >= digits.len() as i32 - 1 {
        let zeros = exponent - (digits.len() as i32 - 1);
        format!("{digits}{}", "0".repeat(zeros as usize))
    } else if exponent >= 0 {
        let split = exponent as usize + 1;
        let (int_part, frac_part) = digits.split_at(split);
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    } else {
        let zeros = (-exponent - 1) as usize;
        let frac = digits.trim_end_matches('0');
        format!("0.{}{frac}", "0".repeat(zeros))
    };
    format!("{sign}{body}")
}

/// Where data goes: a file when `--out` was given, standard output
/// otherwise.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_flag(out: Option<PathBuf>) -> Self {
        match out {
            Some(path) => Sink::File(path),
            None => Sink::Stdout,
        }
    }

    pub fn is_file(&self) -> bool {
        matches!(self, Sink::File(_))
    }

    pub fn write_all(&self, content: &str) -> CliResult<()> {
        match self {
            Sink::Stdout => {
                std::io::stdout()
                    .write_all(content.as_bytes())
                    .map_err(|e| CliError::io(e.to_string()))?;
                Ok(())
            }
            Sink::File(path) => std::fs::write(path, content)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        }
    }
}

/// Summary lines accompany the data: on standard output when the data went
/// to a file, otherwise on the error stream to keep the data stream clean.
pub fn emit_summary(sink: &Sink, summary: &str) {
    if sink.is_file() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_values_pass_through() {
        assert_eq!(fmt_sig(0.5, 10), "0.5");
        assert_eq!(fmt_sig(0.05, 10), "0.05");
        assert_eq!(fmt_sig(2.0, 10), "2");
        assert_eq!(fmt_sig(0.0, 10), "0");
        assert_eq!(fmt_sig(-0.25, 10), "-0.25");
    }

    #[test]
    fn long_values_round_to_ten_digits() {
        assert_eq!(fmt_sig(2.0 / 3.0, 10), "0.6666666667");
        assert_eq!(fmt_sig(0.8397803044678211, 10), "0.8397803045");
        assert_eq!(fmt_sig(-0.8397803044678211, 10), "-0.8397803045");
        assert_eq!(fmt_sig(1234.567890123456, 10), "1234.56789");
    }

    #[test]
    fn rounding_trims_trailing_zeros() {
        assert_eq!(fmt_sig(0.30000000001234, 10), "0.3");
        assert_eq!(fmt_sig(0.10000000000000002, 10), "0.1");
    }

    #[test]
    fn twelve_digit_reports() {
        assert_eq!(fmt_sig(0.8397803044678211, 12), "0.839780304468");
    }

    #[test]
    fn integers_and_tiny_values() {
        assert_eq!(fmt_sig(142.2354, 10), "142.2354");
        assert_eq!(fmt_sig(1e-12, 10), "0.000000000001");
        assert_eq!(fmt_sig(0.000123456789012345, 10), "0.000123456789");
    }
}
