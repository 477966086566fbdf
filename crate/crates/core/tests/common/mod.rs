//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use penalfd::{DomainSpec, Grid, PenalConfig, Scheme, Shape};

/// Dense `(A, B)` written directly from the difference formulas: 5-point
/// Laplacian, upwind advection with the side chosen per the scheme's table
/// (index test for the disk under the first-order scheme, coordinate regions
/// for the square under the second-order scheme), reaction `αχ/ε`.
pub fn dense_assembly(cells: usize, cfg: &PenalConfig) -> (Vec<Vec<f64>>, Vec<f64>) {
    let grid = Grid::new(cells).unwrap();
    let fields = cfg.extension_fields(&grid);
    let s = cells + 1;
    let dim = s * s;
    let h = 1.0 / cells as f64;
    let h2 = h * h;
    let (eps, alpha) = (cfg.eps, cfg.alpha);
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for i in 0..=cells {
        for j in 0..=cells {
            let n = s * i + j;
            if i == 0 || j == 0 || i == cells || j == cells {
                a[n][n] = 1.0;
                continue;
            }
            let (x, y) = (i as f64 / cells as f64, j as f64 / cells as f64);
            let nf = fields.sample(x, y).unwrap();
            let chi = nf.chi;
            let [nx, ny] = nf.normal;
            b[n] = (1.0 - chi) * cfg.source.f(x, y) + chi * nf.g / eps;
            match cfg.scheme {
                Scheme::Upwind1 => {
                    let (fx, fy) = match cfg.domain.shape {
                        Shape::DiskInSquare => (2 * i <= cells, 2 * j <= cells),
                        Shape::SquareInSquare => (nx < 0.0, ny < 0.0),
                    };
                    a[n][n] = 4.0 / h2 + 1.0 + chi * (nx.abs() + ny.abs()) / (eps * h) + alpha * chi / eps;
                    if fx {
                        a[n][n + s] = -1.0 / h2 + chi * nx / (eps * h);
                        a[n][n - s] = -1.0 / h2;
                    } else {
                        a[n][n - s] = -1.0 / h2 - chi * nx / (eps * h);
                        a[n][n + s] = -1.0 / h2;
                    }
                    if fy {
                        a[n][n + 1] = -1.0 / h2 + chi * ny / (eps * h);
                        a[n][n - 1] = -1.0 / h2;
                    } else {
                        a[n][n - 1] = -1.0 / h2 - chi * ny / (eps * h);
                        a[n][n + 1] = -1.0 / h2;
                    }
                }
                Scheme::Upwind2 => {
                    assert_eq!(cfg.domain.shape, Shape::SquareInSquare);
                    let r = cfg.domain.radius;
                    let t = 1e-12;
                    // sign pattern of (n_x, n_y) per coordinate region
                    let (px, py) = if x >= 0.5 + r - t && y > 0.5 - r + t {
                        (true, true)
                    } else if x <= 0.5 - r + t && y < 0.5 + r - t {
                        (false, false)
                    } else if x > 0.5 - r + t && y <= 0.5 - r + t {
                        (true, false)
                    } else {
                        (false, true)
                    };
                    // a zero component takes the non-negative branch
                    let px = px || nx == 0.0;
                    let py = py || ny == 0.0;
                    // near the box a missing second neighbour drops that axis to first order
                    let idx = [i, j];
                    let mut k = [1.0; 2];
                    for (ax, (pos, comp, stride)) in [(px, nx, s), (py, ny, 1)].into_iter().enumerate() {
                        let far = if pos { idx[ax] >= 2 } else { idx[ax] + 2 <= cells };
                        let second = chi != 0.0 && comp != 0.0 && far;
                        if second {
                            k[ax] = 1.5;
                        }
                        match (pos, second) {
                            (true, true) => {
                                a[n][n - stride] = -1.0 / h2 - 2.0 * chi * comp / (eps * h);
                                a[n][n - 2 * stride] += 0.5 * chi * comp / (eps * h);
                                a[n][n + stride] = -1.0 / h2;
                            }
                            (false, true) => {
                                a[n][n + stride] = -1.0 / h2 + 2.0 * chi * comp / (eps * h);
                                a[n][n + 2 * stride] += -0.5 * chi * comp / (eps * h);
                                a[n][n - stride] = -1.0 / h2;
                            }
                            (true, false) => {
                                a[n][n - stride] = -1.0 / h2 - chi * comp / (eps * h);
                                a[n][n + stride] = -1.0 / h2;
                            }
                            (false, false) => {
                                a[n][n + stride] = -1.0 / h2 + chi * comp / (eps * h);
                                a[n][n - stride] = -1.0 / h2;
                            }
                        }
                    }
                    a[n][n] = 4.0 / h2
                        + 1.0
                        + chi * (k[0] * nx.abs() + k[1] * ny.abs()) / (eps * h)
                        + alpha * chi / eps;
                }
            }
        }
    }
    (a, b)
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    // equilibrate rows by the diagonal, then eliminate with partial pivoting
    let mut m: Vec<Vec<f64>> = a.iter().enumerate().map(|(r, row)| row.iter().map(|v| v / a[r][r]).collect()).collect();
    let mut rhs: Vec<f64> = b.iter().enumerate().map(|(r, v)| v / a[r][r]).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            let (top, rest) = m.split_at_mut(i);
            for (v, p) in rest[0][k..].iter_mut().zip(&top[k][k..]) {
                *v -= f * p;
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k][k];
    }
    x
}

pub fn disk() -> DomainSpec {
    DomainSpec::disk(0.3).unwrap()
}

pub fn square() -> DomainSpec {
    DomainSpec::square(0.3).unwrap()
}
