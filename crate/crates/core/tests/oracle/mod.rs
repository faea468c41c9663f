//! Reference computations built from first principles, sharing no code with
//! the library's geometry.
#![allow(dead_code, clippy::needless_range_loop)]

/// Von Neumann entropy from the eigenvalues `(1 ± |r|)/2`.
pub fn entropy(r: [f64; 3]) -> f64 {
    let x = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    [(1.0 + x) / 2.0, (1.0 - x) / 2.0]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

fn shifted(r: [f64; 3], moves: &[(usize, f64)]) -> [f64; 3] {
    let mut out = r;
    for &(i, d) in moves {
        out[i] += d;
    }
    out
}

/// Central-difference Hessian of `f`.
pub fn hessian(f: &dyn Fn([f64; 3]) -> f64, r: [f64; 3], h: f64) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            out[j][k] = if j == k {
                (f(shifted(r, &[(j, h)])) - 2.0 * f(r) + f(shifted(r, &[(j, -h)]))) / (h * h)
            } else {
                (f(shifted(r, &[(j, h), (k, h)]))
                    - f(shifted(r, &[(j, h), (k, -h)]))
                    - f(shifted(r, &[(j, -h), (k, h)]))
                    + f(shifted(r, &[(j, -h), (k, -h)])))
                    / (4.0 * h * h)
            };
        }
    }
    out
}

fn third_at(f: &dyn Fn([f64; 3]) -> f64, r: [f64; 3], h: f64) -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        let hp = hessian(f, shifted(r, &[(l, h)]), h);
        let hm = hessian(f, shifted(r, &[(l, -h)]), h);
        for j in 0..3 {
            for k in 0..3 {
                out[j][k][l] = (hp[j][k] - hm[j][k]) / (2.0 * h);
            }
        }
    }
    out
}

/// Third derivatives by nested central differences, Richardson-extrapolated
/// from steps `h` and `h/2`.
pub fn third_derivatives(f: &dyn Fn([f64; 3]) -> f64, r: [f64; 3], h: f64) -> [[[f64; 3]; 3]; 3] {
    let coarse = third_at(f, r, h);
    let fine = third_at(f, r, h / 2.0);
    let mut out = [[[0.0; 3]; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                out[j][k][l] = (4.0 * fine[j][k][l] - coarse[j][k][l]) / 3.0;
            }
        }
    }
    out
}

/// Legendre potential as a function of the dual coordinates, using
/// `|r| = tanh|χ|` along the direction of `χ`.
pub fn legendre_in_dual(chi: [f64; 3]) -> f64 {
    let c = (chi[0] * chi[0] + chi[1] * chi[1] + chi[2] * chi[2]).sqrt();
    let scale = if c == 0.0 { 1.0 } else { c.tanh() / c };
    let r = [chi[0] * scale, chi[1] * scale, chi[2] * scale];
    entropy(r) + r[0] * chi[0] + r[1] * chi[1] + r[2] * chi[2]
}

/// Inverse of a symmetric 3×3 matrix by cofactors.
pub fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |i: usize, j: usize| {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let (p, q) = ((j + 1) % 3, (j + 2) % 3);
        m[a][p] * m[b][q] - m[a][q] * m[b][p]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[j][i] = c(i, j) / det;
        }
    }
    out
}

/// Uniform point in the spherical shell `lo ≤ |r| ≤ hi`.
pub fn point_in_shell<R: rand::Rng>(rng: &mut R, lo: f64, hi: f64) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            let radius = rng.random_range(lo..=hi);
            return v.map(|c| c / n * radius);
        }
    }
}
