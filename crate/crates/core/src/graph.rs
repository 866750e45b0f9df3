//! Explicit graphs for the event-driven race: configuration-model
//! multigraphs and `(Z/nZ)^dim` tori.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("degree must be at least 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("d*N = {0} is odd")]
    OddHalfEdges(usize),
    #[error(
        "no simple graph after {attempts} attempts (asymptotic acceptance rate exp((1-d^2)/4) = {rate:.3e})"
    )]
    SimplicityCapExceeded { attempts: u32, rate: f64 },
    #[error("vertex {vertex} has {found} edge endpoints, expected {expected}")]
    NotRegular { vertex: usize, found: usize, expected: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("torus needs side >= 3 and dim >= 1, got side {side}, dim {dim}")]
    InvalidTorus { side: usize, dim: usize },
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Adjacency as seen by the race: distinct neighbors with edge multiplicity.
///
/// Self-loops never appear here since they cannot capture a new vertex.
pub trait SpreadGraph: Sync {
    fn num_vertices(&self) -> usize;

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize, u32));

    fn neighbors(&self, v: usize) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        self.for_each_neighbor(v, &mut |w, m| out.push((w, m)));
        out
    }
}

/// Uniform perfect matching of `labels` half-edge labels (must be even).
pub fn sample_perfect_matching<R: Rng + ?Sized>(labels: usize, rng: &mut R) -> Vec<(usize, usize)> {
    debug_assert!(labels % 2 == 0);
    let mut half_edges: Vec<usize> = (0..labels).collect();
    half_edges.shuffle(rng);
    half_edges.chunks_exact(2).map(|p| (p[0], p[1])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Keep self-loops and parallel edges.
    Multigraph,
    /// Resample until simple, giving up after `max_attempts`.
    RejectToSimple { max_attempts: u32 },
}

impl SamplingMode {
    pub const DEFAULT_ATTEMPTS: u32 = 10_000;

    pub fn simple() -> Self {
        SamplingMode::RejectToSimple { max_attempts: Self::DEFAULT_ATTEMPTS }
    }
}

/// A `d`-regular multigraph. A self-loop contributes 2 to the degree of its
/// vertex but nothing to its spreading adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Multigraph {
    n: usize,
    degree: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    adjacency: Vec<(u32, u32)>,
}

impl Multigraph {
    pub fn from_edges(n: usize, degree: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut endpoints = vec![0usize; n];
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
                endpoints[w] += 1;
            }
        }
        if let Some((vertex, &found)) = endpoints.iter().enumerate().find(|(_, &c)| c != degree) {
            return Err(GraphError::NotRegular { vertex, found, expected: degree });
        }

        let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(degree); n];
        for &(u, v) in &edges {
            if u != v {
                lists[u].push(v as u32);
                lists[v].push(u as u32);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency: Vec<(u32, u32)> = Vec::with_capacity(n * degree);
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            let start = adjacency.len();
            for &w in list.iter() {
                if adjacency.len() > start && adjacency[adjacency.len() - 1].0 == w {
                    adjacency.last_mut().unwrap().1 += 1;
                } else {
                    adjacency.push((w, 1));
                }
            }
            offsets.push(adjacency.len());
        }
        Ok(Self { n, degree, edges, offsets, adjacency })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_simple(&self) -> bool {
        let loops = self.edges.iter().any(|&(u, v)| u == v);
        !loops && self.adjacency.iter().all(|&(_, m)| m == 1)
    }

    /// Edge list: header `N d`, then one `u v` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.degree)?;
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.degree);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let parse_pair = |line: usize, text: &str| -> Result<(usize, usize), GraphError> {
            let mut it = text.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(GraphError::Parse { line, msg: format!("expected two integers, got {text:?}") }),
            }
        };
        let (idx, header) = lines
            .next()
            .ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let (n, degree) = parse_pair(idx + 1, &header?)?;
        let mut edges = Vec::with_capacity(n * degree / 2);
        for (idx, line) in lines {
            edges.push(parse_pair(idx + 1, &line?)?);
        }
        Self::from_edges(n, degree, edges)
    }
}

impl SpreadGraph for Multigraph {
    fn num_vertices(&self) -> usize {
        self.n
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize, u32)) {
        for &(w, m) in &self.adjacency[self.offsets[v]..self.offsets[v + 1]] {
            f(w as usize, m);
        }
    }
}

/// Configuration-model sample: uniform matching of `dN` half-edges with
/// half-edge `h` belonging to vertex `h / d`.
pub fn sample_configuration_multigraph<R: Rng + ?Sized>(
    n: usize,
    degree: usize,
    rng: &mut R,
    mode: SamplingMode,
) -> Result<Multigraph, GraphError> {
    if degree < 3 {
        return Err(GraphError::DegreeTooSmall(degree));
    }
    if (n * degree) % 2 == 1 {
        return Err(GraphError::OddHalfEdges(n * degree));
    }
    let attempts = match mode {
        SamplingMode::Multigraph => 1,
        SamplingMode::RejectToSimple { max_attempts } => max_attempts.max(1),
    };
    for _ in 0..attempts {
        let edges = sample_perfect_matching(n * degree, rng)
            .into_iter()
            .map(|(a, b)| (a / degree, b / degree))
            .collect();
        let graph = Multigraph::from_edges(n, degree, edges)?;
        if mode == SamplingMode::Multigraph || graph.is_simple() {
            return Ok(graph);
        }
    }
    let d = degree as f64;
    Err(GraphError::SimplicityCapExceeded { attempts, rate: ((1.0 - d * d) / 4.0).exp() })
}

/// The torus `(Z/nZ)^dim`. Vertex `v` has coordinates given by its base-`n`
/// digits, least significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGraph {
    side: usize,
    dim: usize,
    n_vertices: usize,
}

pub fn make_torus(side: usize, dim: usize) -> Result<TorusGraph, GraphError> {
    if side < 3 || dim == 0 {
        return Err(GraphError::InvalidTorus { side, dim });
    }
    let n_vertices = side
        .checked_pow(dim as u32)
        .ok_or(GraphError::InvalidTorus { side, dim })?;
    Ok(TorusGraph { side, dim, n_vertices })
}

impl TorusGraph {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|_| {
                let c = v % self.side;
                v /= self.side;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.side + c % self.side)
    }
}

impl SpreadGraph for TorusGraph {
    fn num_vertices(&self) -> usize {
        self.n_vertices
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize, u32)) {
        let n = self.side;
        let mut place = 1;
        for _ in 0..self.dim {
            let c = (v / place) % n;
            let up = if c + 1 == n { v - c * place } else { v + place };
            let down = if c == 0 { v + (n - 1) * place } else { v - place };
            f(up, 1);
            f(down, 1);
            place *= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trials::trial_rng;
    use std::collections::{BTreeSet, HashMap};

    #[test]
    fn torus_small_cases() {
        let t = make_torus(3, 2).unwrap();
        assert_eq!(t.num_vertices(), 9);
        for v in 0..9 {
            let nb: BTreeSet<_> = t.neighbors(v).into_iter().map(|(w, m)| {
                assert_eq!(m, 1);
                w
            }).collect();
            assert_eq!(nb.len(), 4);
            assert!(!nb.contains(&v));
        }
        let cycle = make_torus(4, 1).unwrap();
        let nb: BTreeSet<_> = cycle.neighbors(0).into_iter().map(|p| p.0).collect();
        assert_eq!(nb, BTreeSet::from([1, 3]));
        assert!(make_torus(2, 2).is_err());
    }

    #[test]
    fn torus_origin_neighbors_are_unit_offsets() {
        let t = make_torus(5, 3).unwrap();
        let got: BTreeSet<Vec<usize>> = t.neighbors(0).into_iter().map(|(w, _)| t.coords(w)).collect();
        let want: BTreeSet<Vec<usize>> = [
            vec![1, 0, 0],
            vec![4, 0, 0],
            vec![0, 1, 0],
            vec![0, 4, 0],
            vec![0, 0, 1],
            vec![0, 0, 4],
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
        let v = t.index(&[2, 3, 4]);
        assert_eq!(t.coords(v), vec![2, 3, 4]);
    }

    #[test]
    fn multiplicities_and_loops() {
        // Double edges 0-1 and 2-3.
        let g = Multigraph::from_edges(4, 3, vec![(0, 1), (0, 1), (0, 2), (1, 3), (2, 3), (2, 3)]).unwrap();
        assert!(g.neighbors(0).contains(&(1, 2)));
        assert!(!g.is_simple());
        // N = 2, d = 3: a loop at each vertex plus one edge between them.
        let h = Multigraph::from_edges(2, 3, vec![(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(h.neighbors(0), vec![(1, 1)]);
        assert_eq!(h.neighbors(1), vec![(0, 1)]);
    }

    #[test]
    fn rejects_irregular_edge_lists() {
        let err = Multigraph::from_edges(4, 3, vec![(0, 1), (2, 3)]).unwrap_err();
        assert!(matches!(err, GraphError::NotRegular { .. }));
    }

    #[test]
    fn sampled_graphs_are_regular() {
        let mut rng = trial_rng(1, 2);
        for n in [2usize, 10, 101 * 2, 1000] {
            let g = sample_configuration_multigraph(n, 3, &mut rng, SamplingMode::Multigraph).unwrap();
            assert_eq!(g.edges().len(), 3 * n / 2);
        }
        let s = sample_configuration_multigraph(200, 3, &mut rng, SamplingMode::simple()).unwrap();
        assert!(s.is_simple());
        for v in 0..200 {
            assert_eq!(s.neighbors(v).len(), 3);
        }
    }

    #[test]
    fn two_vertex_cubic_has_no_simple_version() {
        let mut rng = trial_rng(3, 0);
        let err =
            sample_configuration_multigraph(2, 3, &mut rng, SamplingMode::RejectToSimple { max_attempts: 50 })
                .unwrap_err();
        match err {
            GraphError::SimplicityCapExceeded { attempts, rate } => {
                assert_eq!(attempts, 50);
                assert!((rate - (-2.0f64).exp()).abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(sample_configuration_multigraph(5, 3, &mut rng, SamplingMode::Multigraph).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let mut rng = trial_rng(4, 0);
        let g = sample_configuration_multigraph(50, 4, &mut rng, SamplingMode::Multigraph).unwrap();
        let text = g.to_edge_list_string();
        assert!(text.starts_with("50 4\n"));
        let back = Multigraph::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert!(Multigraph::read_edge_list("3 3\n0 1 x\n".as_bytes()).is_err());
    }

    #[test]
    fn matching_is_perfect() {
        let mut rng = trial_rng(5, 0);
        let m = sample_perfect_matching(10, &mut rng);
        let mut seen: Vec<usize> = m.iter().flat_map(|&(a, b)| [a, b]).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &(a, _) in &m {
            *counts.entry(a).or_default() += 1;
        }
        assert_eq!(counts.values().sum::<u32>(), 5);
    }
}
