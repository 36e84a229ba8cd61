//! Adaptive Gauss-Kronrod quadrature for small complex vectors, and 1-D
//! search helpers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome<const N: usize> {
    pub value: [C64; N],
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    /// largest integrand norm seen at any node
    pub peak: f64,
}

pub(crate) fn vnorm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [C64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64, peak: &mut f64) -> Result<Piece<N>>
where
    F: FnMut(f64) -> Result<[C64; N]>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = [C64::new(0.0, 0.0); N];
    let mut kron = zero;
    let mut gauss = zero;
    let add = |acc: &mut [C64; N], v: &[C64; N], w: f64| {
        for (s, x) in acc.iter_mut().zip(v) {
            *s += x * w;
        }
    };
    let fc = f(c)?;
    *peak = peak.max(vnorm(&fc));
    add(&mut kron, &fc, WGK[7]);
    add(&mut gauss, &fc, WG[3]);
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        *peak = peak.max(vnorm(&f1)).max(vnorm(&f2));
        add(&mut kron, &f1, WGK[i]);
        add(&mut kron, &f2, WGK[i]);
        if i % 2 == 1 {
            add(&mut gauss, &f1, WG[i / 2]);
            add(&mut gauss, &f2, WG[i / 2]);
        }
    }
    let mut diff = zero;
    for n in 0..N {
        kron[n] *= h;
        diff[n] = kron[n] - gauss[n] * h;
    }
    let value = kron;
    Ok(Piece { a, b, value, error: vnorm(&diff) })
}

/// Globally adaptive integration over the union of `breaks` intervals.
///
/// Accepts when the summed error is below `max(abs_tol, rel_tol |I|)`; at the
/// interval cap a result within ten times that target is still accepted.
pub fn integrate<const N: usize, F>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadOutcome<N>>
where
    F: FnMut(f64) -> Result<[C64; N]>,
{
    if breaks.len() < 2 {
        return Err(Error::InvalidInput("integration needs at least two break points".into()));
    }
    let mut peak: f64 = 0.0;
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1], &mut peak)?);
        }
    }
    let total = |heap: &BinaryHeap<Piece<N>>| {
        let mut v = [C64::new(0.0, 0.0); N];
        let mut e = 0.0;
        for p in heap.iter() {
            for n in 0..N {
                v[n] += p.value[n];
            }
            e += p.error;
        }
        (v, e)
    };
    let mut evaluations = 15 * heap.len();
    loop {
        let (value, error) = total(&heap);
        let target = abs_tol.max(rel_tol * vnorm(&value));
        let done = |intervals| QuadOutcome { value, error, evaluations, intervals, peak };
        if error <= target {
            return Ok(done(heap.len()));
        }
        if heap.len() >= max_intervals {
            if error <= 10.0 * target {
                return Ok(done(heap.len()));
            }
            return Err(Error::NonConvergence(format!(
                "quadrature error {error:.3e} exceeds target {target:.3e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::NonConvergence("quadrature interval collapsed".into()));
        }
        heap.push(gk15(&mut f, worst.a, mid, &mut peak)?);
        heap.push(gk15(&mut f, mid, worst.b, &mut peak)?);
        evaluations += 30;
    }
}

/// Break points 0, the given interior points, then a geometric ladder to `end`.
pub fn break_points(scale: f64, end: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for f in [0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0] {
        let p = f * scale;
        if p < end {
            out.push(p);
        }
    }
    let mut p = out.last().copied().unwrap_or(0.0).max(scale) * 1.6;
    while p < end {
        out.push(p);
        p *= 1.6;
    }
    out.push(end);
    out.dedup();
    out
}

/// Golden-section search for a maximum of `f` on [a, b].
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Root of `f` bracketed by [a, b].
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!("root not bracketed in [{a}, {b}]")));
    }
    while (b - a).abs() > x_tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
