//! MatrixMarket coordinate I/O. Values are written in shortest round-trip
//! decimal form, so export followed by import reproduces every stored double.

use std::io::{BufRead, Write};

use super::{LinalgError, SparseMatrix};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write_matrix_market<W: Write>(matrix: &SparseMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", matrix.dim(), matrix.dim(), matrix.nnz())?;
    for (r, c, v) in matrix.triplets() {
        writeln!(out, "{} {} {:?}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseMatrix, LinalgError> {
    let parse_err = |line: usize, msg: &str| LinalgError::Parse {
        line,
        message: msg.to_string(),
    };
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header.map_err(|e| parse_err(1, &e.to_string()))?;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real general") {
        return Err(parse_err(1, "expected a real general coordinate matrix"));
    }
    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        let line = line.map_err(|e| parse_err(lineno, &e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected `rows cols nnz`"));
                }
                let nums: Result<Vec<usize>, _> = fields.iter().map(|f| f.parse()).collect();
                let nums = nums.map_err(|_| parse_err(lineno, "bad size line"))?;
                if nums[0] != nums[1] {
                    return Err(parse_err(lineno, "matrix is not square"));
                }
                size = Some((nums[0], nums[2]));
                triplets.reserve(nums[2]);
            }
            Some((dim, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "expected `row col value`"));
                }
                let r: usize = fields[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let c: usize = fields[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                if r == 0 || c == 0 || r > dim || c > dim {
                    return Err(parse_err(lineno, "index out of range"));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let (dim, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(0, "entry count does not match header"));
    }
    SparseMatrix::from_triplets(dim, &triplets)
}
