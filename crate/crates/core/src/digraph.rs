//! Finite digraphs: strong connectivity, automorphism groups, finite groups given by tables, and
//! realization of a finite group as the automorphism group of a strongly connected digraph.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::tensor::is_identifier;

pub const DEFAULT_AUTOMORPHISM_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DigraphError {
    #[error("vertex name {0:?} is not an identifier")]
    BadIdentifier(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("edge endpoint {0} is not a vertex")]
    UnknownVertex(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("digraph has no vertices")]
    Empty,
    #[error("cannot parse digraph: {0}")]
    Parse(String),
    #[error("{vertices} vertices exceed the exhaustive search bound {bound}")]
    SizeBound { vertices: usize, bound: usize },
    #[error("permutations act on different vertex sets ({0} vs {1})")]
    VertexSetMismatch(usize, usize),
    #[error("not a permutation")]
    NotAPermutation,
    #[error("invalid group table: {0}")]
    InvalidGroupTable(String),
    #[error("the given elements do not generate the group")]
    NotGenerating,
    #[error("realization check failed: automorphism group has order {found}, expected {expected}")]
    RealizationMismatch { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DigraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Serialize for Digraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DigraphJson { vertices: self.vertices.clone(), edges: self.named_edges().map(|(a, b)| (a.to_string(), b.to_string())).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = DigraphJson::deserialize(d)?;
        Digraph::new(j.vertices, j.edges).map_err(serde::de::Error::custom)
    }
}

impl Digraph {
    pub fn new(
        vertices: impl IntoIterator<Item = impl Into<String>>,
        edges: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Result<Self, DigraphError> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if !is_identifier(v) {
                return Err(DigraphError::BadIdentifier(v.clone()));
            }
            if index.insert(v.clone(), i).is_some() {
                return Err(DigraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            let ia = *index.get(&a).ok_or_else(|| DigraphError::UnknownVertex(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| DigraphError::UnknownVertex(b.clone()))?;
            if !set.insert((ia, ib)) {
                return Err(DigraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Self::assemble(vertices, index, set))
    }

    /// Builds from integer-indexed edges; vertices are named by `name`.
    pub fn from_indices(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, name: impl Fn(usize) -> String) -> Self {
        let vertices: Vec<String> = (0..n).map(name).collect();
        let index = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let set = edges.into_iter().collect();
        Self::assemble(vertices, index, set)
    }

    fn assemble(vertices: Vec<String>, index: HashMap<String, usize>, edges: BTreeSet<(usize, usize)>) -> Self {
        let n = vertices.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            out_adj[a].push(b);
            in_adj[b].push(a);
        }
        Self { vertices, index, edges, out_adj, in_adj }
    }

    pub fn two_cycle() -> Self {
        Self::new(["v", "u"], [("v", "u"), ("u", "v")]).expect("valid")
    }

    pub fn directed_cycle(k: usize) -> Self {
        Self::from_indices(k, (0..k).map(|i| (i, (i + 1) % k)), |i| format!("c{i}"))
    }

    /// All ordered pairs of distinct vertices.
    pub fn complete(k: usize) -> Self {
        Self::from_indices(k, (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j))), |i| format!("k{i}"))
    }

    /// JSON object `{"vertices": [...], "edges": [[v,u],...]}`, or one `v u` pair per line.
    pub fn parse(text: &str) -> Result<Self, DigraphError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| DigraphError::Parse(e.to_string()))
        } else {
            Self::from_edge_list(text)
        }
    }

    pub fn from_edge_list(text: &str) -> Result<Self, DigraphError> {
        let mut vertices = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [v] => {
                    if seen.insert(v.to_string()) {
                        vertices.push(v.to_string());
                    }
                }
                [a, b] => {
                    for v in [a, b] {
                        if seen.insert(v.to_string()) {
                            vertices.push(v.to_string());
                        }
                    }
                    edges.push((a.to_string(), b.to_string()));
                }
                _ => return Err(DigraphError::Parse(format!("line {}: expected `v u`", no + 1))),
            }
        }
        if vertices.is_empty() {
            return Err(DigraphError::Empty);
        }
        Self::new(vertices, edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn named_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.vertices[a].as_str(), self.vertices[b].as_str()))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|(a, b)| a == b)
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    /// Stable content hash of the vertex list and edge set.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        hex::encode(h.finalize())
    }

    /// Strongly connected components by Tarjan's algorithm, each sorted, in discovery order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut next)) = call.last_mut() {
                if let Some(&w) = self.out_adj[v].get(*next) {
                    *next += 1;
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("nonempty");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    pub fn is_strongly_connected(&self) -> bool {
        !self.is_empty() && self.strongly_connected_components().len() == 1
    }

    /// The vertex images under `p`, applied to this digraph's edges, equal its edge set.
    pub fn is_automorphism(&self, p: &VertexPermutation) -> bool {
        p.len() == self.len() && self.edges.iter().all(|&(a, b)| self.has_edge(p.apply(a), p.apply(b)))
    }

    /// All automorphisms, in lexicographic order of their image vectors.
    pub fn automorphism_group(&self) -> Result<Vec<VertexPermutation>, DigraphError> {
        self.automorphism_group_bounded(DEFAULT_AUTOMORPHISM_BOUND)
    }

    pub fn automorphism_group_bounded(&self, bound: usize) -> Result<Vec<VertexPermutation>, DigraphError> {
        let n = self.len();
        if n > bound {
            return Err(DigraphError::SizeBound { vertices: n, bound });
        }
        if n == 0 {
            return Ok(vec![VertexPermutation::identity(0)]);
        }
        let colors = self.refined_colors();
        let order = self.search_order();
        let mut image = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let mut out = Vec::new();
        self.extend(&order, 0, &colors, &mut image, &mut used, &mut out);
        out.sort();
        Ok(out)
    }

    /// Iterated refinement of the (in-degree, out-degree) partition.
    fn refined_colors(&self) -> Vec<usize> {
        let n = self.len();
        let mut colors: Vec<usize> = {
            let keys: Vec<(usize, usize)> = (0..n).map(|v| (self.in_adj[v].len(), self.out_adj[v].len())).collect();
            canonical_classes(&keys)
        };
        loop {
            let keys: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
                .map(|v| {
                    let mut o: Vec<usize> = self.out_adj[v].iter().map(|&w| colors[w]).collect();
                    let mut i: Vec<usize> = self.in_adj[v].iter().map(|&w| colors[w]).collect();
                    o.sort_unstable();
                    i.sort_unstable();
                    (colors[v], o, i)
                })
                .collect();
            let next = canonical_classes(&keys);
            let before = colors.iter().collect::<BTreeSet<_>>().len();
            let after = next.iter().collect::<BTreeSet<_>>().len();
            colors = next;
            if after == before {
                return colors;
            }
        }
    }

    /// Vertices ordered so that each vertex after the first in its weak component has an earlier neighbor.
    fn search_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in self.out_adj[v].iter().chain(&self.in_adj[v]) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        order
    }

    fn extend(
        &self,
        order: &[usize],
        k: usize,
        colors: &[usize],
        image: &mut [usize],
        used: &mut [bool],
        out: &mut Vec<VertexPermutation>,
    ) {
        if k == order.len() {
            out.push(VertexPermutation { images: image.to_vec() });
            return;
        }
        let v = order[k];
        let anchor = self.out_adj[v]
            .iter()
            .map(|&w| (w, true))
            .chain(self.in_adj[v].iter().map(|&w| (w, false)))
            .find(|&(w, _)| image[w] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            // v -> w, so the image of v is an in-neighbor of image(w).
            Some((w, true)) => self.in_adj[image[w]].clone(),
            Some((w, false)) => self.out_adj[image[w]].clone(),
            None => (0..self.len()).collect(),
        };
        for c in candidates {
            if used[c] || colors[c] != colors[v] || !self.consistent(v, c, image, used) {
                continue;
            }
            image[v] = c;
            used[c] = true;
            self.extend(order, k + 1, colors, image, used, out);
            image[v] = usize::MAX;
            used[c] = false;
        }
    }

    fn consistent(&self, v: usize, c: usize, image: &[usize], used: &[bool]) -> bool {
        if self.has_edge(v, v) != self.has_edge(c, c) {
            return false;
        }
        let mapped = |w: usize| image[w] != usize::MAX;
        let out_ok = self.out_adj[v].iter().filter(|&&w| mapped(w)).all(|&w| self.has_edge(c, image[w]));
        let in_ok = self.in_adj[v].iter().filter(|&&w| mapped(w)).all(|&w| self.has_edge(image[w], c));
        let out_count = self.out_adj[v].iter().filter(|&&w| mapped(w)).count();
        let in_count = self.in_adj[v].iter().filter(|&&w| mapped(w)).count();
        let used_out = self.out_adj[c].iter().filter(|&&w| used[w]).count();
        let used_in = self.in_adj[c].iter().filter(|&&w| used[w]).count();
        out_ok && in_ok && out_count == used_out && in_count == used_in
    }
}

fn canonical_classes<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let distinct: BTreeSet<K> = keys.iter().cloned().collect();
    let sorted: Vec<K> = distinct.into_iter().collect();
    keys.iter().map(|k| sorted.binary_search(k).expect("present")).collect()
}

/// A bijection of `{0..n}`; `apply(i)` is the image of vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPermutation {
    images: Vec<usize>,
}

impl VertexPermutation {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    pub fn new(images: Vec<usize>) -> Result<Self, DigraphError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(DigraphError::NotAPermutation);
            }
        }
        Ok(Self { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self, DigraphError> {
        if self.len() != other.len() {
            return Err(DigraphError::VertexSetMismatch(self.len(), other.len()));
        }
        Ok(Self { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn invert(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = self.compose(&p).expect("same size");
            k += 1;
        }
        k
    }

    pub fn display(&self, g: &Digraph) -> String {
        let parts: Vec<String> = self.images.iter().enumerate().map(|(i, &j)| format!("{}->{}", g.vertex(i), g.vertex(j))).collect();
        parts.join(",")
    }
}

impl fmt::Display for VertexPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images)
    }
}

/// A finite group by its multiplication table; `product[a][b]` is the index of `a·b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupTable {
    elements: Vec<String>,
    product: Vec<Vec<usize>>,
    identity: usize,
}

#[derive(Deserialize)]
struct GroupTableJson {
    elements: Vec<String>,
    product: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for GroupTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GroupTableJson::deserialize(d)?;
        GroupTable::new(j.elements, j.product).map_err(serde::de::Error::custom)
    }
}

impl GroupTable {
    pub fn new(elements: Vec<String>, product: Vec<Vec<usize>>) -> Result<Self, DigraphError> {
        let n = elements.len();
        let bad = |m: &str| Err(DigraphError::InvalidGroupTable(m.to_string()));
        if n == 0 {
            return bad("no elements");
        }
        if product.len() != n || product.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad("table is not a square table over the elements");
        }
        let Some(identity) = (0..n).find(|&e| (0..n).all(|a| product[e][a] == a && product[a][e] == a)) else {
            return bad("no identity element");
        };
        for a in 0..n {
            if !(0..n).any(|b| product[a][b] == identity && product[b][a] == identity) {
                return bad(&format!("element {} has no inverse", elements[a]));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if product[product[a][b]][c] != product[a][product[b][c]] {
                        return bad(&format!("not associative at ({}, {}, {})", elements[a], elements[b], elements[c]));
                    }
                }
            }
        }
        Ok(Self { elements, product, identity })
    }

    pub fn parse_json(text: &str) -> Result<Self, DigraphError> {
        let j: GroupTableJson = serde_json::from_str(text).map_err(|e| DigraphError::InvalidGroupTable(e.to_string()))?;
        GroupTable::new(j.elements, j.product)
    }

    pub fn cyclic(k: usize) -> Self {
        assert!(k >= 1);
        let elements = (0..k).map(|i| i.to_string()).collect();
        let product = (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect();
        Self::new(elements, product).expect("cyclic table is valid")
    }

    /// The group generated by a closed set of permutations, composed as `a ∘ b`.
    pub fn from_permutations(perms: &[VertexPermutation]) -> Result<Self, DigraphError> {
        let index: HashMap<&VertexPermutation, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut product = Vec::with_capacity(perms.len());
        for a in perms {
            let mut row = Vec::with_capacity(perms.len());
            for b in perms {
                let c = a.compose(b)?;
                row.push(*index.get(&c).ok_or_else(|| DigraphError::InvalidGroupTable("not closed".into()))?);
            }
            product.push(row);
        }
        Self::new(perms.iter().map(|p| p.to_string()).collect(), product)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.product[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.product[a][b] == self.identity).expect("validated")
    }

    pub fn element_order(&self, a: usize) -> usize {
        let (mut x, mut k) = (a, 1);
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// The subgroup generated by `gens`, as sorted element indices.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(a) = queue.pop_front() {
            for &g in gens {
                let b = self.mul(a, g);
                if !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    /// A small generating set, chosen greedily by largest element order.
    pub fn greedy_generators(&self) -> Vec<usize> {
        let mut by_order: Vec<usize> = (0..self.order()).filter(|&a| a != self.identity).collect();
        by_order.sort_by_key(|&a| (std::cmp::Reverse(self.element_order(a)), a));
        let mut gens = Vec::new();
        let mut span = self.generated(&gens);
        for a in by_order {
            if span.len() == self.order() {
                break;
            }
            if span.binary_search(&a).is_err() {
                gens.push(a);
                span = self.generated(&gens);
            }
        }
        gens
    }

    /// An isomorphism onto `other` as an index map, found by extending generator images.
    pub fn isomorphism_to(&self, other: &GroupTable) -> Option<Vec<usize>> {
        if self.order() != other.order() {
            return None;
        }
        let gens = self.greedy_generators();
        let mut choice = vec![0usize; gens.len()];
        self.try_images(other, &gens, 0, &mut choice)
    }

    fn try_images(&self, other: &GroupTable, gens: &[usize], k: usize, choice: &mut [usize]) -> Option<Vec<usize>> {
        if k == gens.len() {
            return self.extend_homomorphism(other, gens, choice);
        }
        let ord = self.element_order(gens[k]);
        for c in 0..other.order() {
            if other.element_order(c) != ord {
                continue;
            }
            choice[k] = c;
            if let Some(m) = self.try_images(other, gens, k + 1, choice) {
                return Some(m);
            }
        }
        None
    }

    fn extend_homomorphism(&self, other: &GroupTable, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order()];
        map[self.identity] = other.identity;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(a) = queue.pop_front() {
            for (&g, &h) in gens.iter().zip(images) {
                let b = self.mul(a, g);
                let hb = other.mul(map[a], h);
                if map[b] == usize::MAX {
                    map[b] = hb;
                    queue.push_back(b);
                } else if map[b] != hb {
                    return None;
                }
            }
        }
        let bijective = map.iter().collect::<BTreeSet<_>>().len() == self.order() && !map.contains(&usize::MAX);
        let hom = (0..self.order()).all(|a| (0..self.order()).all(|b| map[self.mul(a, b)] == other.mul(map[a], map[b])));
        (bijective && hom).then_some(map)
    }
}

/// A digraph whose automorphism group realizes a given finite group, with its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub digraph: Digraph,
    pub generators: Vec<usize>,
    pub automorphism_order: usize,
    pub isomorphism_checked: bool,
}

/// Rigid, loop-free, strongly connected digraph on three vertices.
pub fn rigid_digraph() -> Digraph {
    Digraph::from_indices(3, [(0, 1), (1, 2), (2, 0), (0, 2)], |i| format!("r{i}"))
}

const GADGET_PRIMES: [usize; 12] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Cayley digraph on `generators` (a greedy small generating set by default). One generator
/// gives the plain directed cycle; otherwise each color-i edge becomes a directed path whose
/// length is the i-th prime from 3 on. The result is checked by automorphism search.
pub fn realize_group(group: &GroupTable, generators: Option<&[usize]>) -> Result<Realization, DigraphError> {
    let n = group.order();
    let gens: Vec<usize> = match generators {
        Some(g) => {
            let mut g: Vec<usize> = g.iter().copied().filter(|&a| a != group.identity()).collect();
            g.sort_unstable();
            g.dedup();
            g
        }
        None => group.greedy_generators(),
    };
    if gens.iter().any(|&g| g >= n) || group.generated(&gens).len() != n {
        return Err(DigraphError::NotGenerating);
    }
    if gens.len() > GADGET_PRIMES.len() {
        return Err(DigraphError::InvalidGroupTable("too many generators".into()));
    }
    let digraph = if n == 1 {
        rigid_digraph()
    } else if gens.len() == 1 {
        let g = gens[0];
        Digraph::from_indices(n, (0..n).map(|a| (a, group.mul(a, g))), |i| format!("g{i}"))
    } else {
        let mut names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for (ci, &g) in gens.iter().enumerate() {
                let len = GADGET_PRIMES[ci];
                let mut prev = a;
                for step in 1..len {
                    let id = names.len();
                    names.push(format!("p{a}_{ci}_{step}"));
                    edges.push((prev, id));
                    prev = id;
                }
                edges.push((prev, group.mul(a, g)));
            }
        }
        let count = names.len();
        Digraph::from_indices(count, edges, |i| names[i].clone())
    };
    let auts = digraph.automorphism_group_bounded(usize::MAX)?;
    if auts.len() != n || !digraph.is_strongly_connected() || digraph.has_loops() {
        return Err(DigraphError::RealizationMismatch { found: auts.len(), expected: n });
    }
    let isomorphism_checked = if n <= 8 {
        let table = GroupTable::from_permutations(&auts)?;
        if table.isomorphism_to(group).is_none() {
            return Err(DigraphError::RealizationMismatch { found: auts.len(), expected: n });
        }
        true
    } else {
        false
    };
    Ok(Realization { digraph, generators: gens, automorphism_order: auts.len(), isomorphism_checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Automorphisms by trying every permutation.
    fn brute_force(g: &Digraph) -> Vec<VertexPermutation> {
        let n = g.len();
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let p = VertexPermutation::new(p.to_vec()).unwrap();
            if g.is_automorphism(&p) {
                out.push(p);
            }
        });
        out.sort();
        out
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn strong_connectivity() {
        assert!(Digraph::two_cycle().is_strongly_connected());
        assert!(!Digraph::new(["v", "u"], [("v", "u")]).unwrap().is_strongly_connected());
        assert!(Digraph::directed_cycle(3).is_strongly_connected());
        let g = Digraph::from_indices(4, [(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)], |i| format!("a{i}"));
        assert_eq!(g.strongly_connected_components().len(), 2);
    }

    #[test]
    fn automorphism_orders_match_brute_force() {
        let cases = [
            (Digraph::directed_cycle(3), 3),
            (Digraph::two_cycle(), 2),
            (Digraph::complete(3), 6),
            (rigid_digraph(), 1),
            (Digraph::from_indices(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)], |i| format!("b{i}")), 2),
        ];
        for (g, order) in cases {
            let auts = g.automorphism_group().unwrap();
            assert_eq!(auts.len(), order);
            assert_eq!(auts, brute_force(&g));
        }
    }

    #[test]
    fn permutation_algebra() {
        let r = VertexPermutation::new(vec![1, 2, 0]).unwrap();
        let id = VertexPermutation::identity(3);
        assert!(r.compose(&r.invert()).unwrap().is_identity());
        assert_eq!(id.compose(&r).unwrap(), r);
        assert_eq!(r.compose(&r).unwrap(), VertexPermutation::new(vec![2, 0, 1]).unwrap());
        assert_eq!(r.order(), 3);
        assert_eq!(r.compose(&VertexPermutation::identity(2)), Err(DigraphError::VertexSetMismatch(3, 2)));
        assert!(VertexPermutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn parsing() {
        let g = Digraph::parse(r#"{"vertices":["v","u"],"edges":[["v","u"],["u","v"]]}"#).unwrap();
        assert_eq!(g, Digraph::two_cycle());
        let h = Digraph::parse("v u\nu v\n").unwrap();
        assert_eq!(h, g);
        assert_eq!(Digraph::parse(&g.to_json()).unwrap(), g);
        assert!(matches!(Digraph::parse("v u\nv u"), Err(DigraphError::DuplicateEdge(..))));
        assert!(matches!(Digraph::parse(r#"{"vertices":["v"],"edges":[["v","w"]]}"#), Err(DigraphError::Parse(_))));
        assert!(Digraph::new(["v", "u"], [("v", "v")]).unwrap().has_loops());
    }

    #[test]
    fn group_tables() {
        let z3 = GroupTable::cyclic(3);
        assert_eq!(z3.order(), 3);
        assert_eq!(z3.inverse(1), 2);
        let bad = GroupTable::new(vec!["a".into(), "b".into()], vec![vec![0, 1], vec![1, 1]]);
        assert!(bad.is_err());
        let klein = GroupTable::new(
            (0..4).map(|i| i.to_string()).collect(),
            (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect(),
        )
        .unwrap();
        assert!(klein.isomorphism_to(&GroupTable::cyclic(4)).is_none());
        assert!(klein.isomorphism_to(&klein).is_some());
        assert_eq!(klein.greedy_generators().len(), 2);
    }

    #[test]
    fn realizations() {
        for k in 1..=4 {
            let r = realize_group(&GroupTable::cyclic(k), None).unwrap();
            assert_eq!(r.automorphism_order, k);
            assert_eq!(brute_force(&r.digraph).len().max(1), k);
        }
        let klein = GroupTable::new(
            (0..4).map(|i| i.to_string()).collect(),
            (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect(),
        )
        .unwrap();
        let r = realize_group(&klein, None).unwrap();
        assert_eq!(r.automorphism_order, 4);
        assert!(r.isomorphism_checked);
        let z3 = GroupTable::cyclic(3);
        let r = realize_group(&z3, Some(&[1, 2])).unwrap();
        assert_eq!(r.automorphism_order, 3);
        assert!(realize_group(&GroupTable::cyclic(4), Some(&[2])).is_err());
    }
}
