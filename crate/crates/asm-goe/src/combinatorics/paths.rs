use serde::{Deserialize, Serialize};

use super::matrices::PcsmMatrix;

/// The `h`-coordinates of the top directed path, indexed by `t = -n..=n`.
/// The endpoints are `0` when the path leaves the corner vertices and `-1`
/// when it runs along the left or bottom boundary, where `h` drops below 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopPath {
    n: usize,
    values: Vec<i64>,
}

impl TopPath {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `T_n(-n), ..., T_n(n)`.
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `T_n(t)` for `-n <= t <= n`.
    pub fn at(&self, t: i64) -> i64 {
        self.values[(t + self.n as i64) as usize]
    }

    pub fn max(&self) -> i64 {
        *self.values.iter().max().unwrap()
    }
}

/// Height of the face of `G_n^g` containing the square centred at the
/// even lattice point `(a, b)`; each hexagonal face is the union of such a
/// square and the square centred at `(a+1, b-1)`.
fn face_height(c: &PcsmMatrix, a: i64, b: i64) -> i64 {
    let n = c.size() as i64;
    if (0..=2 * n - 2).contains(&a) && (2..=2 * n).contains(&b) {
        let j = (a / 2 + 1) as usize;
        let i = (n + 1 - b / 2) as usize;
        c.get(i, j) as i64
    } else if b == 0 && (0..=2 * n).contains(&a) {
        a / 2
    } else if a == -2 && (2..=2 * n + 2).contains(&b) {
        b / 2 - 1
    } else {
        n
    }
}

fn square_height(c: &PcsmMatrix, x: i64, y: i64) -> i64 {
    if x.rem_euclid(2) == 0 {
        face_height(c, x, y)
    } else {
        face_height(c, x - 1, y + 1)
    }
}

/// Top directed path of the PCSM: the level line separating faces of height
/// `n` from lower faces. Where the path visits both `(x,y)` and
/// `(x-1,y-1)`, the higher vertex is kept.
pub fn top_path(c: &PcsmMatrix) -> TopPath {
    let n = c.size() as i64;
    let mut values = vec![i64::MIN; (2 * n + 1) as usize];
    let mut visit = |x: i64, y: i64| {
        let t = (x - y + 1) / 2;
        let h = (y - 2 * n + x + 1) / 2 - 1;
        let slot = &mut values[(t + n) as usize];
        *slot = (*slot).max(h);
    };
    for x in (-1..=2 * n - 1).step_by(2) {
        for y in (0..=2 * n).step_by(2) {
            if (x, y) == (-1, 0) {
                continue;
            }
            let mut dirs = Vec::with_capacity(3);
            if (x, y) != (2 * n - 1, 2 * n) {
                dirs.push((1, 1));
            }
            if !(x == -1 && y >= 2) {
                dirs.push((-1, 1));
            }
            if !(y == 0 && x >= 1) {
                dirs.push((1, -1));
            }
            for (dx, dy) in dirs {
                let left = square_height(c, x + (dx - dy) / 2, y + (dy + dx) / 2);
                let right = square_height(c, x + (dx + dy) / 2, y + (dy - dx) / 2);
                if (left == n) != (right == n) {
                    visit(x, y);
                    visit(x + dx, y + dy);
                }
            }
        }
    }
    TopPath { n: n as usize, values }
}

/// Smallest `m >= 1` such that some `c_{k, n-m+k}` with `1 <= k <= m`
/// differs from `n`; equals `n+1` for the PCSM with all entries `n`.
pub fn x_gog(c: &PcsmMatrix) -> usize {
    let n = c.size();
    (1..=n)
        .find(|&m| (1..=m).any(|k| c.get(k, n - m + k) as usize != n))
        .unwrap_or(n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_one() {
        let lo = PcsmMatrix::from_rows(&[&[0]]).unwrap();
        let hi = PcsmMatrix::from_rows(&[&[1]]).unwrap();
        assert_eq!(x_gog(&lo), 1);
        assert_eq!(x_gog(&hi), 2);
        assert_eq!(top_path(&lo).values(), &[0, 0, 0]);
        assert_eq!(top_path(&hi).values(), &[-1, -1, -1]);
    }

    #[test]
    fn identity_pcsm() {
        // c_{1,2} = 1 already differs from n = 2
        let c = PcsmMatrix::from_rows(&[&[1, 1], &[0, 1]]).unwrap();
        assert_eq!(x_gog(&c), 1);
        assert_eq!(top_path(&c).values(), &[0, 1, 1, 1, 0]);
    }

    #[test]
    fn frozen_pcsm_path_hugs_the_boundary() {
        for n in 1..=5u32 {
            let c = PcsmMatrix::new(n as usize, vec![n; (n * n) as usize]).unwrap();
            assert_eq!(x_gog(&c), n as usize + 1);
            let t = top_path(&c);
            assert_eq!(t.max(), -1);
            let n = n as i64;
            for s in -n..=n {
                assert_eq!(t.at(s), (-1).min(s.abs() - n));
            }
        }
    }
}
