use std::f64::consts::PI;
use std::sync::Arc;

use orlicz_core::{Grid64, GridFunction64};
use rand::Rng;

/// Independent node values in `[-s, s]` with `s` log-uniform in `[0.1, 10]`.
pub fn field(grid: &Arc<Grid64>, rng: &mut impl Rng) -> GridFunction64 {
    let s = 10f64.powf(rng.gen_range(-1.0..1.0));
    let values = (0..grid.len()).map(|_| s * rng.gen_range(-1.0..1.0)).collect();
    GridFunction64::new(grid.clone(), values).expect("sizes match")
}

/// A few random sine modes, so the function vanishes on the boundary.
pub fn dirichlet(grid: &Arc<Grid64>, rng: &mut impl Rng) -> GridFunction64 {
    let [(x0, x1), (y0, y1)] = match grid.bounds() {
        [x] => [*x, (0.0, 1.0)],
        [x, y, ..] => [*x, *y],
        [] => unreachable!("grids have at least one axis"),
    };
    let modes: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(1..5) as f64, rng.gen_range(1..5) as f64))
        .collect();
    let one_d = grid.dim() == 1;
    GridFunction64::from_fn(grid.clone(), |x, y| {
        let sx = (x - x0) / (x1 - x0);
        let sy = (y - y0) / (y1 - y0);
        modes
            .iter()
            .map(|&(a, k, l)| a * (k * PI * sx).sin() * if one_d { 1.0 } else { (l * PI * sy).sin() })
            .sum()
    })
    .expect("finite values")
    .with_zero_boundary()
}
