use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Vertex `(x1, x2)` of the TSSCPP dimer graph.
pub type Vertex = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
    Diagonal,
}

/// The graph `G_n^m` whose perfect matchings encode TSSCPPs, with its
/// planar faces. Vertices are sorted lexicographically by `(x1, x2)`.
#[derive(Debug)]
pub struct DimerGraph {
    n: usize,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    edges: Vec<(usize, usize, EdgeKind)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    faces: Vec<Vec<usize>>,
}

fn odd(n: usize) -> i64 {
    (n % 2) as i64
}

impl DimerGraph {
    fn build(n: usize) -> Self {
        let m = 2 * n as i64;
        let mut vertices = Vec::new();
        for x1 in 0..=m {
            for x2 in x1..=m + 1 {
                if n % 2 == 1 && (x1, x2) == (m, m + 1) {
                    continue;
                }
                vertices.push((x1, x2));
            }
        }
        let index: HashMap<Vertex, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        let mut push = |a: Vertex, b: Vertex, kind| {
            if let (Some(&i), Some(&j)) = (index.get(&a), index.get(&b)) {
                edges.push((i.min(j), i.max(j), kind));
            }
        };
        for x1 in 0..m {
            for x2 in x1..=m + 1 {
                if (x1 + x2) % 2 == 1 {
                    push((x1, x2), (x1 + 1, x2), EdgeKind::Horizontal);
                }
            }
        }
        for x1 in 0..=m - odd(n) {
            for x2 in x1..=m {
                push((x1, x2), (x1, x2 + 1), EdgeKind::Vertical);
            }
        }
        for x1 in 0..m {
            push((x1, x1), (x1 + 1, x1 + 1), EdgeKind::Diagonal);
        }
        edges.sort();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (e, &(a, b, _)) in edges.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        let mut g = DimerGraph { n, vertices, index, edges, adjacency, faces: Vec::new() };
        g.faces = g.trace_faces();
        g
    }

    /// Bounded faces as counter-clockwise vertex cycles.
    fn trace_faces(&self) -> Vec<Vec<usize>> {
        let angle = |from: usize, to: usize| {
            let (a, b) = (self.vertices[from], self.vertices[to]);
            ((b.1 - a.1) as f64).atan2((b.0 - a.0) as f64)
        };
        // neighbours sorted counter-clockwise by angle
        let rot: Vec<Vec<usize>> = (0..self.vertices.len())
            .map(|v| {
                let mut nb: Vec<usize> = self.adjacency[v].iter().map(|&(u, _)| u).collect();
                nb.sort_by(|&p, &q| angle(v, p).partial_cmp(&angle(v, q)).unwrap());
                nb
            })
            .collect();
        let mut seen = std::collections::HashSet::new();
        let mut cycles: Vec<(f64, Vec<usize>)> = Vec::new();
        for &(a, b, _) in &self.edges {
            for (u0, v0) in [(a, b), (b, a)] {
                if seen.contains(&(u0, v0)) {
                    continue;
                }
                let mut cyc = Vec::new();
                let (mut u, mut v) = (u0, v0);
                loop {
                    seen.insert((u, v));
                    cyc.push(u);
                    // turn: the neighbour of v just clockwise of u
                    let r = &rot[v];
                    let pos = r.iter().position(|&w| w == u).unwrap();
                    let w = r[(pos + r.len() - 1) % r.len()];
                    u = v;
                    v = w;
                    if (u, v) == (u0, v0) {
                        break;
                    }
                }
                let area: f64 = (0..cyc.len())
                    .map(|i| {
                        let p = self.vertices[cyc[i]];
                        let q = self.vertices[cyc[(i + 1) % cyc.len()]];
                        (p.0 * q.1 - q.0 * p.1) as f64
                    })
                    .sum::<f64>()
                    / 2.0;
                cycles.push((area, cyc));
            }
        }
        let outer = cycles
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.abs().partial_cmp(&y.1 .0.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        cycles
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != outer)
            .map(|(_, (area, mut c))| {
                if area < 0.0 {
                    c.reverse();
                }
                c
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Edges as `(i, j, kind)` with `i < j` vertex indices.
    pub fn edges(&self) -> &[(usize, usize, EdgeKind)] {
        &self.edges
    }

    /// `(neighbour, edge id)` pairs of a vertex.
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(u, _)| u == b).map(|&(_, e)| e)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        match (self.vertex_index(a), self.vertex_index(b)) {
            (Some(i), Some(j)) => self.edge_between(i, j).is_some(),
            _ => false,
        }
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// The special vertex `b = (2n, 2n+1-[n]_2)`.
    pub fn special_vertex(&self) -> Vertex {
        let m = 2 * self.n as i64;
        (m, m + 1 - odd(self.n))
    }
}

/// Shared immutable copy of `G_n^m`, built on first use.
pub fn dimer_graph(n: usize) -> Arc<DimerGraph> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DimerGraph>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&n) {
        return g.clone();
    }
    let g = Arc::new(DimerGraph::build(n));
    cache.lock().unwrap().entry(n).or_insert(g).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        for n in 1..=6 {
            let g = dimer_graph(n);
            let expected = (2 * n + 1) * (n + 2) - n % 2;
            assert_eq!(g.vertices().len(), expected);
            // Euler's formula for a connected plane graph
            let f = g.faces().len() as i64 + 1;
            assert_eq!(g.vertices().len() as i64 - g.edges().len() as i64 + f, 2);
        }
    }

    #[test]
    fn faces_are_triangles_and_hexagons() {
        let g = dimer_graph(3);
        for f in g.faces() {
            assert!(f.len() == 3 || f.len() == 6, "face of length {}", f.len());
        }
        let tri = g.faces().iter().filter(|f| f.len() == 3).count();
        assert_eq!(tri, 6);
    }

    #[test]
    fn special_vertex() {
        assert_eq!(dimer_graph(2).special_vertex(), (4, 5));
        assert_eq!(dimer_graph(3).special_vertex(), (6, 6));
    }
}
