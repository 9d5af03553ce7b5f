use crate::Scalar;

/// Square banded matrix with LU factorization (partial pivoting).
///
/// Entry `(i, j)` is stored when `i - lower <= j <= i + upper`. Pivoting
/// widens the upper band of `U` by `lower`, so storage reserves
/// `2 * lower + upper + 1` slots per row.
#[derive(Clone, Debug)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    // Row i holds columns [i - lower, i - lower + width).
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        Self { n, lower, upper, width, data: vec![T::zero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.lower < i {
            return None;
        }
        let off = j + self.lower - i;
        (off < self.width).then_some(i * self.width + off)
    }

    /// Adds `v` to entry `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.lower >= i && j <= i + self.upper, "entry ({i},{j}) outside band");
        let s = self.slot(i, j).expect("in band");
        self.data[s] = self.data[s] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.lower);
            let j1 = (i + self.upper).min(self.n - 1);
            let mut acc = T::zero();
            for j in j0..=j1 {
                acc = acc + self.get(i, j) * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// Factorizes in place; returns `None` for a numerically singular matrix.
    pub fn lu(mut self) -> Option<BandedLu<T>> {
        let n = self.n;
        let kl = self.lower;
        let ku_fill = self.upper + self.lower;
        let mut perm = vec![0usize; n];
        let column_scale: Vec<T> = (0..n)
            .map(|k| {
                let rows = k.saturating_sub(self.upper)..=(k + kl).min(n - 1);
                rows.fold(T::zero(), |m, i| m.max(self.get(i, k).abs()))
            })
            .collect();
        for k in 0..n {
            let tiny = column_scale[k] * T::epsilon() * T::lit(1e-3);
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) || !best.is_finite() {
                return None;
            }
            perm[k] = p;
            let last_col = (k + ku_fill).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let m = self.get(i, k) / pivot;
                if m == T::zero() {
                    self.set(i, k, T::zero());
                    continue;
                }
                self.set(i, k, m);
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - m * self.get(k, j);
                    self.set(i, j, v);
                }
            }
        }
        Some(BandedLu { m: self, perm })
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        if let Some(s) = self.slot(i, j) {
            self.data[s] = v;
        } else {
            debug_assert!(v == T::zero(), "fill outside storage");
        }
    }
}

/// LU factors produced by [`BandedMatrix::lu`].
#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    m: BandedMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.m.n;
        let kl = self.m.lower;
        let ku_fill = self.m.upper + self.m.lower;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.perm[k]);
            let last_row = (k + kl).min(n - 1);
            for i in k + 1..=last_row {
                let m = self.m.get(i, k);
                x[i] = x[i] - m * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + ku_fill).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=last_col {
                acc = acc - self.m.get(k, j) * x[j];
            }
            x[k] = acc / self.m.get(k, k);
        }
        x
    }
}
