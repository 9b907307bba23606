//! Kernel text formats and CSV output.

use std::io::Write;

use crate::finite_chain::{ChainError, FiniteKernel};
use crate::real::Real;

fn parse_num<T: Real>(s: &str, line: usize) -> Result<T, ChainError> {
    s.trim()
        .parse::<f64>()
        .map(T::lit)
        .map_err(|e| ChainError::Parse {
            line,
            msg: format!("'{}': {e}", s.trim()),
        })
}

/// Parses either the sparse format (`states n` header, then `i j p` lines)
/// or a dense CSV with one row per line. Blank lines and `#` comments are
/// ignored.
pub fn parse_kernel<T: Real>(text: &str) -> Result<FiniteKernel<T>, ChainError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(ChainError::Parse {
            line: 0,
            msg: "empty kernel file".into(),
        });
    };
    let mut head = first.split_whitespace();
    if head.next() == Some("states") {
        let n: usize = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ChainError::Parse {
                line: first_no,
                msg: "expected 'states <n>'".into(),
            })?;
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for &(no, l) in &lines[1..] {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(ChainError::Parse {
                    line: no,
                    msg: "expected 'i j p'".into(),
                });
            }
            let idx = |s: &str| {
                s.parse::<usize>().map_err(|e| ChainError::Parse {
                    line: no,
                    msg: format!("'{s}': {e}"),
                })
            };
            let (i, j) = (idx(parts[0])?, idx(parts[1])?);
            if i >= n || j >= n {
                return Err(ChainError::Parse {
                    line: no,
                    msg: format!("index out of range for {n} states"),
                });
            }
            rows[i].push((j, parse_num(parts[2], no)?));
        }
        FiniteKernel::from_rows(rows)
    } else {
        let dense = lines
            .iter()
            .map(|&(no, l)| l.split(',').map(|s| parse_num(s, no)).collect::<Result<Vec<T>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        FiniteKernel::from_dense(&dense)
    }
}

/// Sparse text form accepted by [`parse_kernel`].
pub fn write_kernel<T: Real, W: Write>(p: &FiniteKernel<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "states {}", p.n())?;
    for i in 0..p.n() {
        for (j, v) in p.row(i) {
            writeln!(out, "{i} {j} {:.16e}", v.to_f64_lossy())?;
        }
    }
    Ok(())
}

/// `state,mass` rows.
pub fn write_distribution<T: Real, W: Write>(pi: &[T], mut out: W) -> std::io::Result<()> {
    writeln!(out, "state,mass")?;
    for (i, v) in pi.iter().enumerate() {
        writeln!(out, "{i},{:.16e}", v.to_f64_lossy())?;
    }
    Ok(())
}

/// `n,d_n` rows.
pub fn write_curve<T: Real, W: Write>(d: &[T], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,d_n")?;
    for (i, v) in d.iter().enumerate() {
        writeln!(out, "{i},{:.16e}", v.to_f64_lossy())?;
    }
    Ok(())
}
