//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher lower
//! envelope of parabolas, applied separably along columns then rows).

use super::{BinaryMask, RealGrid};

const INF: f64 = 1e20;

/// Squared distance transform of a 1-D sampled function, in place.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    // the new parabola dominates everything so far
                    v[0] = q;
                    z[0] = -INF;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Euclidean distance from every set pixel to the nearest clear pixel.
/// Pixels beyond the image border count as clear.
pub fn distance_transform(mask: &BinaryMask) -> RealGrid {
    let (w, h) = (mask.width(), mask.height());
    let (pw, ph) = (w + 2, h + 2);
    let mut grid = vec![0.0f64; pw * ph];
    for (x, y) in mask.points() {
        grid[(y + 1) * pw + x + 1] = INF;
    }

    let n = pw.max(ph);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for x in 0..pw {
        for y in 0..ph {
            f[y] = grid[y * pw + x];
        }
        edt_1d(&f[..ph], &mut d[..ph], &mut v, &mut z);
        for y in 0..ph {
            grid[y * pw + x] = d[y];
        }
    }
    for y in 0..ph {
        let row = &mut grid[y * pw..(y + 1) * pw];
        f[..pw].copy_from_slice(row);
        edt_1d(&f[..pw], &mut d[..pw], &mut v, &mut z);
        row.copy_from_slice(&d[..pw]);
    }

    let mut out = RealGrid::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, grid[(y + 1) * pw + x + 1].sqrt());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_and_single_pixel() {
        let m = BinaryMask::new(7, 5);
        assert!(distance_transform(&m).as_slice().iter().all(|&d| d == 0.0));

        let mut m = BinaryMask::new(7, 7);
        m.set(3, 3, true);
        let d = distance_transform(&m);
        assert_eq!(d.get(3, 3), 1.0);
        assert_eq!(d.get(2, 3), 0.0);
    }

    #[test]
    fn full_mask_uses_border() {
        let m = BinaryMask::filled(5, 9, true);
        let d = distance_transform(&m);
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(2, 4), 3.0);
        assert_eq!(d.get(2, 1), 2.0);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let m = BinaryMask::from_fn(20, 20, |_, _| rng.random_bool(0.7));
            let d = distance_transform(&m);
            for y in 0..20i64 {
                for x in 0..20i64 {
                    let mut best = f64::INFINITY;
                    if m.get(x as usize, y as usize) {
                        for by in -1..=20i64 {
                            for bx in -1..=20i64 {
                                let inside = (0..20).contains(&bx) && (0..20).contains(&by);
                                if !inside || !m.get(bx as usize, by as usize) {
                                    let dd = (((bx - x).pow(2) + (by - y).pow(2)) as f64).sqrt();
                                    best = best.min(dd);
                                }
                            }
                        }
                    } else {
                        best = 0.0;
                    }
                    assert!((d.get(x as usize, y as usize) - best).abs() < 1e-9);
                }
            }
        }
    }
}
