use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::arrays::MagogTrapezoid;
use super::graph::{dimer_graph, DimerGraph, Vertex};
use crate::error::{Error, Result};

/// Perfect matching of `G_n^m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMatching", into = "RawMatching")]
pub struct DimerMatching {
    n: usize,
    partner: Vec<usize>,
    #[serde(skip)]
    graph: Option<Arc<DimerGraph>>,
}

impl PartialEq for DimerMatching {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.partner == o.partner
    }
}
impl Eq for DimerMatching {}

#[derive(Serialize, Deserialize)]
struct RawMatching {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl TryFrom<RawMatching> for DimerMatching {
    type Error = Error;
    fn try_from(r: RawMatching) -> Result<Self> {
        DimerMatching::new(r.n, &r.edges)
    }
}

impl From<DimerMatching> for RawMatching {
    fn from(m: DimerMatching) -> Self {
        RawMatching { n: m.n, edges: m.edges() }
    }
}

impl DimerMatching {
    pub fn new(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatching("n must be positive".into()));
        }
        let g = dimer_graph(n);
        let nv = g.vertices().len();
        let mut partner = vec![usize::MAX; nv];
        for &(a, b) in edges {
            let (i, j) = match (g.vertex_index(a), g.vertex_index(b)) {
                (Some(i), Some(j)) => (i, j),
                _ => return Err(Error::InvalidMatching(format!("{a:?}-{b:?} uses a non-vertex"))),
            };
            if g.edge_between(i, j).is_none() {
                return Err(Error::InvalidMatching(format!("{a:?}-{b:?} is not an edge")));
            }
            if partner[i] != usize::MAX || partner[j] != usize::MAX {
                return Err(Error::InvalidMatching(format!("{a:?}-{b:?} reuses a vertex")));
            }
            partner[i] = j;
            partner[j] = i;
        }
        if let Some(v) = partner.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidMatching(format!("vertex {:?} uncovered", g.vertices()[v])));
        }
        Ok(DimerMatching { n, partner, graph: Some(g) })
    }

    fn graph(&self) -> Arc<DimerGraph> {
        self.graph.clone().unwrap_or_else(|| dimer_graph(self.n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Matched edges with the lexicographically smaller endpoint first.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let g = self.graph();
        let v = g.vertices();
        (0..self.partner.len())
            .filter(|&i| i < self.partner[i])
            .map(|i| (v[i], v[self.partner[i]]))
            .collect()
    }

    pub fn contains(&self, a: Vertex, b: Vertex) -> bool {
        let g = self.graph();
        match (g.vertex_index(a), g.vertex_index(b)) {
            (Some(i), Some(j)) => self.partner[i] == j,
            _ => false,
        }
    }

    /// Whether the diagonal-adjacent vertical edge `((k,k+1),(k,k+2))` is
    /// free, i.e. whether a particle sits at `k`.
    pub fn particle_at(&self, k: usize) -> bool {
        let k = k as i64;
        !self.contains((k, k + 1), (k, k + 2))
    }
}

/// All perfect matchings of `G_n^m` in a deterministic order.
pub fn enumerate_matchings(n: usize, cap: usize) -> Result<Vec<DimerMatching>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let g = dimer_graph(n);
    let nv = g.vertices().len();
    let mut partner = vec![usize::MAX; nv];
    let mut out = Vec::new();
    fn rec(g: &Arc<DimerGraph>, partner: &mut Vec<usize>, start: usize, out: &mut Vec<DimerMatching>) {
        let Some(v) = (start..partner.len()).find(|&v| partner[v] == usize::MAX) else {
            out.push(DimerMatching { n: g.n(), partner: partner.clone(), graph: Some(g.clone()) });
            return;
        };
        for &(u, _) in g.neighbours(v) {
            if partner[u] == usize::MAX && u != v {
                partner[u] = v;
                partner[v] = u;
                rec(g, partner, v + 1, out);
                partner[u] = usize::MAX;
                partner[v] = usize::MAX;
            }
        }
    }
    rec(&g, &mut partner, 0, &mut out);
    Ok(out)
}

/// Smallest `m >= 1` such that `((m-1,m),(m-1,m+1))` is not covered.
pub fn x_magog(m: &DimerMatching) -> usize {
    (1..=m.n()).find(|&k| m.particle_at(k - 1)).unwrap_or(m.n() + 1)
}

/// Membership in `Y^m_n(k)`: the edges `((j,j+1),(j,j+2))` are covered for
/// every `0 <= j <= n-1-k`.
pub fn in_magog_slice(m: &DimerMatching, k: usize) -> bool {
    (0..m.n().saturating_sub(k)).all(|j| !m.particle_at(j))
}

/// Row `k` lists the `x1`-coordinates of covered vertical edges
/// `((i, i+2(n-k)+1), (i, i+2(n-k)+2))`, `0 <= i <= 2k-1`, minus the
/// staircase `(-1, 0, ..., k-2)`.
pub fn matching_to_magog(m: &DimerMatching) -> Result<MagogTrapezoid> {
    let n = m.n();
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let off = 2 * (n - k) as i64;
        let xs: Vec<i64> = (0..2 * k as i64)
            .filter(|&i| m.contains((i, i + off + 1), (i, i + off + 2)))
            .collect();
        if xs.len() != k {
            return Err(Error::InvalidMatching(format!(
                "level {k} has {} vertical dimers, expected {k}",
                xs.len()
            )));
        }
        let row = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| u32::try_from(x - (j as i64 - 1)))
            .collect::<std::result::Result<Vec<u32>, _>>()
            .map_err(|_| Error::InvalidMatching("negative magog entry".into()))?;
        rows.push(row);
    }
    MagogTrapezoid::new(n, n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_asm_numbers() {
        let counts: Vec<usize> = (1..=4).map(|n| enumerate_matchings(n, 6).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 7, 42, 429]);
    }

    #[test]
    fn cap_guard() {
        assert!(matches!(enumerate_matchings(7, 6), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn invalid_matchings() {
        assert!(DimerMatching::new(1, &[((0, 0), (0, 1))]).is_err());
        assert!(DimerMatching::new(1, &[((0, 0), (0, 2))]).is_err());
    }

    #[test]
    fn n2_histogram_and_magogs() {
        let ms = enumerate_matchings(2, 6).unwrap();
        let mut hist = [0usize; 4];
        for m in &ms {
            hist[x_magog(m)] += 1;
        }
        assert_eq!(&hist[1..], &[2, 4, 1]);
        let mut mags: Vec<Vec<Vec<u32>>> =
            ms.iter().map(|m| matching_to_magog(m).unwrap().rows().to_vec()).collect();
        mags.sort();
        let mut expected = vec![
            vec![vec![2], vec![2, 3]],
            vec![vec![2], vec![2, 2]],
            vec![vec![1], vec![1, 2]],
            vec![vec![2], vec![1, 2]],
            vec![vec![1], vec![1, 1]],
            vec![vec![1], vec![1, 3]],
            vec![vec![2], vec![1, 3]],
        ];
        expected.sort();
        assert_eq!(mags, expected);
    }

    #[test]
    fn frozen_matching_is_all_ones() {
        let ms = enumerate_matchings(3, 6).unwrap();
        let frozen: Vec<_> = ms.iter().filter(|m| x_magog(m) == 4).collect();
        assert_eq!(frozen.len(), 1);
        let mg = matching_to_magog(frozen[0]).unwrap();
        assert!(mg.rows().iter().flatten().all(|&v| v == 1));
    }

    #[test]
    fn json_round_trip() {
        let m = enumerate_matchings(2, 6).unwrap().remove(3);
        let s = serde_json::to_string(&m).unwrap();
        let back: DimerMatching = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
