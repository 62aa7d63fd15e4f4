use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A 1- or 2-dimensional simplicial mesh in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    vertices: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    triangles: Vec<[usize; 3]>,
    boundary_cycle: Vec<usize>,
    slack_radius: f64,
}

/// Mesh file document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDoc {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub triangles: Vec<[usize; 3]>,
    /// Explicit segments, only used by 1-dimensional meshes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<[usize; 2]>,
    #[serde(default)]
    pub boundary_cycle: Vec<usize>,
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl SimplicialMesh {
    /// Uniform mesh of `[0, 1]` with `resolution` segments.
    pub fn interval(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Invalid("interval resolution must be positive".into()));
        }
        let vertices = (0..=resolution)
            .map(|i| [i as f64 / resolution as f64, 0.0])
            .collect();
        let segments = (0..resolution).map(|i| [i, i + 1]).collect();
        Self::from_doc(&MeshDoc {
            vertices,
            triangles: Vec::new(),
            segments,
            boundary_cycle: Vec::new(),
        })
    }

    /// Triangulated closed unit disk built from concentric rings.
    ///
    /// Ring spacing is `2/resolution`; ring `j` carries about `2πj` vertices,
    /// so edge lengths stay near the ring spacing. The outermost ring is the
    /// boundary cycle, traversed counter-clockwise.
    pub fn disk(resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::Invalid("disk resolution must be at least 4".into()));
        }
        let rings = resolution / 2;
        let mut vertices = vec![[0.0, 0.0]];
        let mut ring_index: Vec<Vec<usize>> = vec![vec![0]];
        for j in 1..=rings {
            let r = j as f64 / rings as f64;
            let m = ((2.0 * PI * j as f64).round() as usize).max(6);
            let idx: Vec<usize> = (0..m)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / m as f64;
                    vertices.push([r * th.cos(), r * th.sin()]);
                    vertices.len() - 1
                })
                .collect();
            ring_index.push(idx);
        }
        let mut triangles = Vec::new();
        let first = &ring_index[1];
        for o in 0..first.len() {
            triangles.push([0, first[o], first[(o + 1) % first.len()]]);
        }
        for j in 2..=rings {
            let inner = &ring_index[j - 1];
            let outer = &ring_index[j];
            let (mi, mo) = (inner.len(), outer.len());
            let (mut i, mut o) = (0usize, 0usize);
            while i < mi || o < mo {
                let next_in = if i < mi { (i + 1) as f64 / mi as f64 } else { f64::INFINITY };
                let next_out = if o < mo { (o + 1) as f64 / mo as f64 } else { f64::INFINITY };
                if next_out <= next_in {
                    triangles.push([inner[i % mi], outer[o % mo], outer[(o + 1) % mo]]);
                    o += 1;
                } else {
                    triangles.push([inner[i % mi], outer[o % mo], inner[(i + 1) % mi]]);
                    i += 1;
                }
            }
        }
        let boundary_cycle = ring_index[rings].clone();
        Self::from_doc(&MeshDoc {
            vertices,
            triangles,
            segments: Vec::new(),
            boundary_cycle,
        })
    }

    pub fn from_doc(doc: &MeshDoc) -> Result<Self> {
        let nv = doc.vertices.len();
        if nv == 0 {
            return Err(Error::Invalid("mesh has no vertices".into()));
        }
        if doc.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite vertex coordinate".into()));
        }
        let in_range = |i: usize| {
            if i < nv {
                Ok(i)
            } else {
                Err(Error::Invalid(format!("vertex index {i} out of range")))
            }
        };
        // edge -> number of incident triangles
        let mut incidence: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        for t in &doc.triangles {
            for &i in t {
                in_range(i)?;
            }
            let [a, b, c] = *t;
            let area2 = (doc.vertices[b][0] - doc.vertices[a][0])
                * (doc.vertices[c][1] - doc.vertices[a][1])
                - (doc.vertices[c][0] - doc.vertices[a][0])
                    * (doc.vertices[b][1] - doc.vertices[a][1]);
            if area2.abs() <= 1e-14 {
                return Err(Error::Invalid(format!("degenerate triangle {t:?}")));
            }
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *incidence.entry(key(p, q)).or_insert(0) += 1;
            }
        }
        for s in &doc.segments {
            in_range(s[0])?;
            in_range(s[1])?;
            if s[0] == s[1] {
                return Err(Error::Invalid("degenerate segment".into()));
            }
            incidence.entry(key(s[0], s[1])).or_insert(0);
        }
        let edges: Vec<Edge> = incidence
            .keys()
            .map(|&(a, b)| Edge {
                a,
                b,
                length: dist(doc.vertices[a], doc.vertices[b]),
            })
            .collect();

        if !doc.triangles.is_empty() {
            let cyc = &doc.boundary_cycle;
            if cyc.len() < 3 {
                return Err(Error::Invalid(
                    "2-dimensional mesh needs a boundary cycle".into(),
                ));
            }
            let mut seen = vec![false; nv];
            for &v in cyc {
                in_range(v)?;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Invalid("boundary cycle is not simple".into()));
                }
            }
            for w in 0..cyc.len() {
                let e = key(cyc[w], cyc[(w + 1) % cyc.len()]);
                if incidence.get(&e) != Some(&1) {
                    return Err(Error::Invalid(format!(
                        "boundary cycle step {e:?} is not a boundary edge"
                    )));
                }
            }
        } else if !doc.boundary_cycle.is_empty() {
            return Err(Error::Invalid(
                "boundary cycle given for a 1-dimensional mesh".into(),
            ));
        }

        // connectivity
        let mut adj = vec![Vec::new(); nv];
        for e in &edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !std::mem::replace(&mut seen[w], true) {
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invalid("mesh is not connected".into()));
        }

        let slack_radius = if doc.triangles.is_empty() {
            edges.iter().map(|e| e.length).fold(0.0, f64::max) / 2.0
        } else {
            doc.triangles
                .iter()
                .map(|t| {
                    let p = t.map(|i| doc.vertices[i]);
                    let (a, b, c) = (dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0]));
                    let area = 0.5
                        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
                            .abs();
                    let circum = a * b * c / (4.0 * area);
                    circum.min(a.max(b).max(c))
                })
                .fold(0.0, f64::max)
        };

        Ok(Self {
            vertices: doc.vertices.clone(),
            edges,
            triangles: doc.triangles.clone(),
            boundary_cycle: doc.boundary_cycle.clone(),
            slack_radius,
        })
    }

    pub fn to_doc(&self) -> MeshDoc {
        let segments = if self.triangles.is_empty() {
            self.edges.iter().map(|e| [e.a, e.b]).collect()
        } else {
            Vec::new()
        };
        MeshDoc {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            segments,
            boundary_cycle: self.boundary_cycle.clone(),
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_cycle(&self) -> &[usize] {
        &self.boundary_cycle
    }

    pub fn dimension(&self) -> usize {
        if self.triangles.is_empty() {
            1
        } else {
            2
        }
    }

    /// Every point of the underlying space lies within this distance of
    /// some vertex (half the longest segment in 1D; the largest triangle
    /// circumradius, capped by its longest edge, in 2D).
    pub fn slack_radius(&self) -> f64 {
        self.slack_radius
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Longest edge along the boundary cycle.
    pub fn max_boundary_step(&self) -> f64 {
        let c = &self.boundary_cycle;
        (0..c.len())
            .map(|i| dist(self.vertices[c[i]], self.vertices[c[(i + 1) % c.len()]]))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_is_valid_and_fine() {
        for res in [16, 32, 64] {
            let m = SimplicialMesh::disk(res).unwrap();
            assert_eq!(m.dimension(), 2);
            assert!(m.slack_radius() < 2.5 / res as f64 * 1.5, "res {res}: {}", m.slack_radius());
            let on_circle = m
                .boundary_cycle()
                .iter()
                .all(|&v| (dist(m.vertices()[v], [0.0, 0.0]) - 1.0).abs() < 1e-12);
            assert!(on_circle);
            // Euler characteristic of a disk.
            let chi = m.vertices().len() as i64 - m.edges().len() as i64 + m.triangles().len() as i64;
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn interval_mesh() {
        let m = SimplicialMesh::interval(16).unwrap();
        assert_eq!(m.vertices().len(), 17);
        assert!((m.slack_radius() - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn doc_roundtrip_is_exact() {
        let m = SimplicialMesh::disk(8).unwrap();
        let json = serde_json::to_string(&m.to_doc()).unwrap();
        let doc: MeshDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, m.to_doc());
        assert_eq!(SimplicialMesh::from_doc(&doc).unwrap(), m);
    }

    #[test]
    fn rejects_bad_boundary() {
        let mut doc = SimplicialMesh::disk(8).unwrap().to_doc();
        doc.boundary_cycle.swap(0, 2);
        assert!(SimplicialMesh::from_doc(&doc).is_err());
        doc.boundary_cycle.clear();
        assert!(SimplicialMesh::from_doc(&doc).is_err());
    }
}
