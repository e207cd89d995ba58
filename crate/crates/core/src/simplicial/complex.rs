use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Vertex indices in ascending order.
pub type Simplex = Vec<usize>;

/// Finite abstract simplicial complex, closed under faces.
///
/// Simplices of each dimension are kept in lexicographic order; that order
/// is the coordinate order of every cochain on the complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    n_vertices: usize,
    by_dim: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
}

impl SimplicialComplex {
    /// Face closure of `maximal` on the vertex set `0..n_vertices`. Vertices
    /// not covered by any listed simplex become isolated points.
    pub fn new(n_vertices: usize, maximal: &[Vec<usize>]) -> Result<Self> {
        let mut sets: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new()];
        for v in 0..n_vertices {
            sets[0].insert(vec![v]);
        }
        for raw in maximal {
            let mut s = raw.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            if let Some(&v) = s.iter().find(|&&v| v >= n_vertices) {
                return Err(Error::Format(format!(
                    "vertex {v} out of range for a complex with {n_vertices} vertices"
                )));
            }
            for mask in 1u64..(1u64 << s.len()) {
                let face: Simplex = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                let d = face.len() - 1;
                if sets.len() <= d {
                    sets.resize_with(d + 1, BTreeSet::new);
                }
                sets[d].insert(face);
            }
        }
        if n_vertices == 0 {
            sets.clear();
        }
        let by_dim: Vec<Vec<Simplex>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = by_dim
            .iter()
            .map(|list| {
                list.iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i))
                    .collect()
            })
            .collect();
        Ok(Self {
            n_vertices,
            by_dim,
            index,
        })
    }

    /// Closure of the given simplices; the vertex count is one past the largest index.
    pub fn build(maximal: &[Vec<usize>]) -> Self {
        let n = maximal.iter().flatten().max().map_or(0, |&m| m + 1);
        Self::new(n, maximal).expect("vertex range derived from input")
    }

    /// Boundary of the standard `n`-simplex, a triangulated `(n-1)`-sphere.
    pub fn simplex_boundary(n: usize) -> Self {
        let maximal: Vec<Vec<usize>> = (0..=n)
            .map(|skip| (0..=n).filter(|&v| v != skip).collect())
            .collect();
        Self::build(&maximal)
    }

    /// Cycle on `n >= 3` vertices.
    pub fn circle(n: usize) -> Self {
        let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        Self::build(&edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.by_dim.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        let k = s.len().checked_sub(1)?;
        self.index.get(k)?.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index_of(s).is_some()
    }

    /// Simplices that are not a face of anything larger, ordered by dimension.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        self.by_dim
            .iter()
            .flatten()
            .filter(|s| !self.has_proper_coface(s))
            .cloned()
            .collect()
    }

    fn has_proper_coface(&self, s: &[usize]) -> bool {
        self.simplices(s.len())
            .iter()
            .any(|t| s.iter().all(|v| t.binary_search(v).is_ok()))
    }

    /// Connected component label (0-based, in order of first vertex) per vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in self.simplices(1) {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut labels = vec![usize::MAX; self.n_vertices];
        let mut roots: HashMap<usize, usize> = HashMap::new();
        for v in 0..self.n_vertices {
            let r = find(&mut parent, v);
            let next = roots.len();
            labels[v] = *roots.entry(r).or_insert(next);
        }
        labels
    }

    pub fn n_components(&self) -> usize {
        self.component_labels()
            .into_iter()
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.by_dim.len())
            .map(|k| if k % 2 == 0 { 1 } else { -1 } * self.count(k) as i64)
            .sum()
    }
}

/// Index of a sample point: the position of its simplex in `StarCover::samples`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SampleId(pub usize);

/// Cover of a complex by open vertex stars, with one sample point (the
/// barycenter) per simplex.
///
/// The sample of a simplex lies in exactly the patches of its vertices, so
/// the overlap `U_a ∩ ... ∩ U_w` is nonempty iff `{a, ..., w}` is a simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarCover {
    complex: SimplicialComplex,
    samples: Vec<Simplex>,
    sample_index: HashMap<Simplex, SampleId>,
    stars: Vec<Vec<SampleId>>,
}

impl StarCover {
    pub fn new(complex: SimplicialComplex) -> Self {
        let samples: Vec<Simplex> = (0..=complex.dim().map_or(0, |d| d))
            .flat_map(|k| complex.simplices(k).iter().cloned())
            .collect();
        let sample_index = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), SampleId(i)))
            .collect();
        let mut stars = vec![Vec::new(); complex.n_vertices()];
        for (i, s) in samples.iter().enumerate() {
            for &v in s {
                stars[v].push(SampleId(i));
            }
        }
        Self {
            complex,
            samples,
            sample_index,
            stars,
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn n_patches(&self) -> usize {
        self.complex.n_vertices()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> impl Iterator<Item = SampleId> + '_ {
        (0..self.samples.len()).map(SampleId)
    }

    /// The simplex whose barycenter is the sample.
    pub fn simplex(&self, x: SampleId) -> &[usize] {
        &self.samples[x.0]
    }

    pub fn sample_of(&self, s: &[usize]) -> Option<SampleId> {
        self.sample_index.get(s).copied()
    }

    /// Samples in the vertex star `U_a`, ascending.
    pub fn patch_samples(&self, a: usize) -> &[SampleId] {
        &self.stars[a]
    }

    /// Patches containing the sample: the vertices of its simplex.
    pub fn patches_at(&self, x: SampleId) -> &[usize] {
        self.simplex(x)
    }

    /// Samples in the common overlap of the given patches, ascending.
    pub fn overlap_samples(&self, patches: &[usize]) -> Vec<SampleId> {
        let Some(&first) = patches.first() else {
            return Vec::new();
        };
        self.stars[first]
            .iter()
            .copied()
            .filter(|&x| {
                let s = self.simplex(x);
                patches.iter().all(|p| s.binary_search(p).is_ok())
            })
            .collect()
    }

    /// Barycentric weight of vertex `a` at the sample; this is a partition of
    /// unity subordinate to the star cover.
    pub fn barycentric_weight(&self, a: usize, x: SampleId) -> f64 {
        let s = self.simplex(x);
        if s.binary_search(&a).is_ok() {
            1.0 / s.len() as f64
        } else {
            0.0
        }
    }
}

/// Comma-separated key used for simplices in every file format.
pub fn simplex_key(s: &[usize]) -> String {
    s.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_simplex_key(key: &str) -> Result<Simplex> {
    let mut s = key
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad simplex key `{key}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let len = s.len();
    s.sort_unstable();
    s.dedup();
    if s.len() != len {
        return Err(Error::Format(format!(
            "repeated vertex in simplex key `{key}`"
        )));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_of_simplex(n: usize) -> SimplicialComplex {
        SimplicialComplex::simplex_boundary(n)
    }

    #[test]
    fn boundary_of_tetrahedron_counts() {
        let k = boundary_of_simplex(3);
        assert_eq!(
            (k.count(0), k.count(1), k.count(2), k.count(3)),
            (4, 6, 4, 0)
        );
        assert_eq!(k.dim(), Some(2));
    }

    #[test]
    fn boundary_of_four_simplex_counts() {
        let k = boundary_of_simplex(4);
        assert_eq!(
            (0..4).map(|d| k.count(d)).collect::<Vec<_>>(),
            vec![5, 10, 10, 5]
        );
    }

    #[test]
    fn point_complex() {
        let k = SimplicialComplex::build(&[vec![0]]);
        assert_eq!(k.dim(), Some(0));
        assert_eq!(k.count(0), 1);
        let cover = StarCover::new(k);
        assert_eq!(cover.n_patches(), 1);
        assert_eq!(cover.n_samples(), 1);
    }

    #[test]
    fn duplicate_input_is_merged() {
        let k = SimplicialComplex::build(&[vec![0, 1], vec![1, 0], vec![1]]);
        assert_eq!(k.count(1), 1);
        assert_eq!(k.maximal_simplices(), vec![vec![0, 1]]);
    }

    #[test]
    fn maximal_simplices_round_trip() {
        let k = SimplicialComplex::new(5, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
        let m = k.maximal_simplices();
        assert_eq!(m, vec![vec![4], vec![2, 3], vec![0, 1, 2]]);
        assert_eq!(SimplicialComplex::new(5, &m).unwrap(), k);
        assert_eq!(k.n_components(), 2);
    }

    #[test]
    fn star_cover_of_tetrahedron_boundary() {
        let cover = StarCover::new(boundary_of_simplex(3));
        assert_eq!(cover.n_patches(), 4);
        for e in cover.complex().simplices(1) {
            assert!(!cover.overlap_samples(e).is_empty());
        }
        for t in cover.complex().simplices(2) {
            assert_eq!(cover.overlap_samples(t).len(), 1);
        }
        assert!(cover.overlap_samples(&[0, 1, 2, 3]).is_empty());
        for x in cover.samples() {
            let s = cover.simplex(x).to_vec();
            for a in 0..4 {
                let inside = cover.patch_samples(a).contains(&x);
                assert_eq!(inside, s.contains(&a));
            }
        }
    }

    #[test]
    fn star_cover_of_circle() {
        let n = 7;
        let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let cover = StarCover::new(SimplicialComplex::build(&edges));
        assert_eq!(cover.n_patches(), n);
        let pairwise = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !cover.overlap_samples(&[a, b]).is_empty())
            .count();
        assert_eq!(pairwise, n);
        assert_eq!(cover.complex().count(2), 0);
    }

    #[test]
    fn simplex_keys() {
        assert_eq!(simplex_key(&[0, 3, 7]), "0,3,7");
        assert_eq!(parse_simplex_key("7, 0,3").unwrap(), vec![0, 3, 7]);
        assert!(parse_simplex_key("1,1").is_err());
        assert!(parse_simplex_key("a").is_err());
    }
}
