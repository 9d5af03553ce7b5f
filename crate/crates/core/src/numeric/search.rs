use crate::Scalar;

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Stops when the bracket is narrower than `rel_tol * (|a| + |b|)` or after
/// `max_iter` steps. Returns `(argmin, f(argmin), iterations)`.
pub fn golden_section_min<T, F>(f: F, mut a: T, mut b: T, rel_tol: T, max_iter: usize) -> (T, T, usize)
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut it = 0;
    while it < max_iter && (b - a).abs() > rel_tol * (a.abs() + b.abs()).max(T::min_positive_value()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    if fc <= fd {
        (c, fc, it)
    } else {
        (d, fd, it)
    }
}
