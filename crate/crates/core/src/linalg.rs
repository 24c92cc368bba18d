//! Dense complex LU solves with a 1-norm condition estimate.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::specfun::Complex;

pub(crate) struct DenseSolution {
    pub x: Vec<Complex>,
    pub condition: f64,
}

fn column(v: &[Complex]) -> Mat<Complex> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn norm1_operator(a: &Mat<Complex>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `a x = b` by LU with partial pivoting and estimates `κ_1(a)` with
/// Hager's method.
pub(crate) fn solve_dense(a: &Mat<Complex>, b: &[Complex]) -> DenseSolution {
    let n = a.nrows();
    let lu = a.partial_piv_lu();
    let sol = lu.solve(&column(b));
    let x: Vec<Complex> = (0..n).map(|i| sol[(i, 0)]).collect();

    let mut v = vec![Complex::from(1.0 / n as f64); n];
    let mut estimate = 0.0;
    let mut last_index = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&column(&v));
        estimate = (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>();
        let xi: Vec<Complex> = (0..n)
            .map(|i| {
                let yi = y[(i, 0)];
                let m = yi.norm();
                if m == 0.0 {
                    Complex::from(1.0)
                } else {
                    yi / m
                }
            })
            .collect();
        let z = lu.solve_adjoint(&column(&xi));
        let (jmax, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, -1.0), |acc, p| if p.1 > acc.1 { p } else { acc });
        let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * v[i]).re).sum();
        if zmax <= ztx || jmax == last_index {
            break;
        }
        last_index = jmax;
        v = vec![Complex::from(0.0); n];
        v[jmax] = Complex::from(1.0);
    }
    let condition = if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        norm1_operator(a) * estimate
    } else {
        f64::INFINITY
    };
    DenseSolution { x, condition }
}
