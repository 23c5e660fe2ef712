use super::distribution::Distribution;

/// Trilinear interpolation of `f` at `v`, with `f = 0` outside the box.
pub fn interpolate(f: &Distribution, v: [f64; 3]) -> f64 {
    let g = &f.grid;
    let n = g.n_per_axis;
    let h = g.h();
    let mut base = [0usize; 3];
    let mut t = [0.0; 3];
    for a in 0..3 {
        let x = (v[a] + g.v_max) / h;
        if !(x >= 0.0 && x <= (n - 1) as f64) {
            return 0.0;
        }
        let i = (x.floor() as usize).min(n - 2);
        base[a] = i;
        t[a] = x - i as f64;
    }
    let mut acc = 0.0;
    for c in 0..8 {
        let (di, dj, dk) = (c >> 2 & 1, c >> 1 & 1, c & 1);
        let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
            * (if dj == 1 { t[1] } else { 1.0 - t[1] })
            * (if dk == 1 { t[2] } else { 1.0 - t[2] });
        if w != 0.0 {
            acc += w * f.values[g.index(base[0] + di, base[1] + dj, base[2] + dk)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::VelocityGrid;

    #[test]
    fn nodes_multilinear_and_outside() {
        let g = VelocityGrid::new(7, 3.0).unwrap();
        let f = Distribution::from_fn(g, |v| 1.0 + v[0] - 2.0 * v[1] + 0.5 * v[0] * v[1] * v[2]);
        for i in [0, 17, 100, 342] {
            assert_eq!(interpolate(&f, g.velocity(i)), f.values[i]);
        }
        let p = [0.3, -1.7, 2.2];
        let ex = 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1] * p[2];
        assert!((interpolate(&f, p) - ex).abs() < 1e-13);
        assert_eq!(interpolate(&f, [3.01, 0.0, 0.0]), 0.0);
        assert_eq!(interpolate(&f, [0.0, -7.0, 0.0]), 0.0);
    }
}
