//! Finitely generated subgroups of PSL(n+1, C): generator sets, reduced
//! words and deduplicated enumeration of group elements.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::{ProjMap, ProjPoint};

/// Projective equality tolerance used when deduplicating group elements.
pub const ELEMENT_TOL: f64 = 1e-7;
pub const DEFAULT_ELEMENT_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub dim: usize,
    pub generators: Vec<ProjMap>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl GeneratorSet {
    pub fn new(dim: usize, generators: Vec<ProjMap>, labels: Vec<String>) -> Result<Self> {
        let mut g = GeneratorSet { dim, generators, labels };
        g.validate()?;
        Ok(g)
    }

    /// Checks dimensions and fills in default labels `g1, g2, ...`.
    pub fn validate(&mut self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if let Some(g) = self.generators.iter().find(|g| g.dim() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: g.dim() });
        }
        if self.labels.is_empty() {
            self.labels = (1..=self.generators.len()).map(|i| format!("g{i}")).collect();
        }
        if self.labels.len() != self.generators.len() {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} generators",
                self.labels.len(),
                self.generators.len()
            )));
        }
        Ok(())
    }

    /// Generators and their inverses; an involution contributes one letter.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            let inv = g.inverse();
            let first = out.len();
            if g.proj_eq(&inv, 1e-9) {
                out.push(Letter { map: g.clone(), generator: i, inverted: false, inverse: first });
            } else {
                out.push(Letter { map: g.clone(), generator: i, inverted: false, inverse: first + 1 });
                out.push(Letter { map: inv, generator: i, inverted: true, inverse: first });
            }
        }
        out
    }

    /// Conjugates every generator: `h g h^{-1}`.
    pub fn conjugate_by(&self, h: &ProjMap) -> GeneratorSet {
        GeneratorSet {
            dim: self.dim,
            generators: self.generators.iter().map(|g| g.conjugate_by(h)).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// A generator or inverse generator.
#[derive(Clone, Debug)]
pub struct Letter {
    pub map: ProjMap,
    pub generator: usize,
    pub inverted: bool,
    /// Index of the inverse letter (itself for involutions).
    pub inverse: usize,
}

/// A reduced word with its cached product.
#[derive(Clone, Debug)]
pub struct Word {
    pub letters: Vec<usize>,
    pub map: ProjMap,
}

impl Word {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Number of reduced words of length `n` in a free group on `g` generators
/// without torsion: `2g (2g - 1)^(n - 1)`.
pub fn reduced_word_count(g: usize, n: usize) -> usize {
    if n == 0 {
        1
    } else {
        2 * g * (2 * g - 1).pow(n as u32 - 1)
    }
}

/// All reduced words of length at most `max_len` in breadth-first order,
/// starting with the empty word. Products are formed left to right.
pub fn reduced_words(letters: &[Letter], max_len: usize, limit: usize) -> Result<Vec<Word>> {
    let dim = letters.first().map_or(1, |l| l.map.dim());
    let mut out = vec![Word { letters: Vec::new(), map: ProjMap::identity(dim) }];
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for w in start..end {
            for (li, l) in letters.iter().enumerate() {
                if let Some(&last) = out[w].letters.last() {
                    if letters[last].inverse == li {
                        continue;
                    }
                }
                if out.len() >= limit {
                    return Err(Error::ResourceLimit { what: "reduced words".into(), limit });
                }
                let mut word = out[w].letters.clone();
                word.push(li);
                let map = out[w].map.compose(&l.map);
                out.push(Word { letters: word, map });
            }
        }
        start = end;
    }
    Ok(out)
}

/// Index of projective maps keyed by two scale-free features, each
/// quantized on a logarithmic grid.
struct ElementIndex {
    cells: HashMap<[i64; 2], Vec<usize>>,
}

const LOG_CELL: f64 = 1e-5;

fn features(g: &ProjMap) -> [f64; 2] {
    let m = g.matrix();
    let norm = m.norm();
    let diag: f64 = (0..m.nrows()).map(|i| m[(i, i)].norm()).sum();
    let col: f64 = (0..m.nrows()).map(|i| m[(i, 0)].norm()).sum();
    [(diag / norm + 1.0).ln() + norm.ln(), (col / norm + 1.0).ln()]
}

impl ElementIndex {
    fn key(f: [f64; 2]) -> [i64; 2] {
        f.map(|x| (x / LOG_CELL).floor() as i64)
    }

    fn find(&self, g: &ProjMap, all: &[GroupElement], tol: f64) -> Option<usize> {
        let k = Self::key(features(g));
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&[k[0] + dx, k[1] + dy]) {
                    if let Some(&i) = ids.iter().find(|&&i| all[i].map.proj_eq(g, tol)) {
                        return Some(i);
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, g: &ProjMap, id: usize) {
        self.cells.entry(Self::key(features(g))).or_default().push(id);
    }
}

/// A group element with a shortest word found by breadth-first search.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub map: ProjMap,
    pub word: Vec<usize>,
}

/// Distinct elements expressible by words of length at most `max_len`, in
/// breadth-first order (identity first, then by word length and letter order).
pub fn enumerate_group(gens: &GeneratorSet, max_len: usize) -> Result<Vec<GroupElement>> {
    enumerate_group_limited(gens, max_len, DEFAULT_ELEMENT_LIMIT)
}

pub fn enumerate_group_limited(gens: &GeneratorSet, max_len: usize, limit: usize) -> Result<Vec<GroupElement>> {
    let letters = gens.letters();
    let mut all = vec![GroupElement { map: ProjMap::identity(gens.dim), word: Vec::new() }];
    let mut index = ElementIndex { cells: HashMap::new() };
    index.insert(&all[0].map, 0);
    let mut start = 0;
    for _ in 0..max_len {
        let end = all.len();
        if start == end {
            break;
        }
        for w in start..end {
            for (li, l) in letters.iter().enumerate() {
                if let Some(&last) = all[w].word.last() {
                    if letters[last].inverse == li {
                        continue;
                    }
                }
                let g = all[w].map.compose(&l.map);
                if index.find(&g, &all, ELEMENT_TOL).is_some() {
                    continue;
                }
                if all.len() >= limit {
                    return Err(Error::ResourceLimit { what: "group elements".into(), limit });
                }
                let mut word = all[w].word.clone();
                word.push(li);
                index.insert(&g, all.len());
                all.push(GroupElement { map: g, word });
            }
        }
        start = end;
    }
    Ok(all)
}

/// Orbit points `w x` for every reduced word `w` of length at most
/// `max_len`, computed by extending words on the left. Returns each point
/// with the length of its word.
pub fn reduced_orbit(letters: &[Letter], x: &ProjPoint, max_len: usize, limit: usize) -> Result<Vec<(ProjPoint, usize)>> {
    // Frontier entries: (unnormalized vector, first letter of the word).
    let mut out = vec![(x.clone(), 0usize)];
    let mut frontier: Vec<(Vec<C64>, Option<usize>)> = vec![(x.coords().to_vec(), None)];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for (v, first) in &frontier {
            for (li, l) in letters.iter().enumerate() {
                if first.is_some_and(|f| letters[f].inverse == li) {
                    continue;
                }
                if out.len() >= limit {
                    return Err(Error::ResourceLimit { what: "orbit points".into(), limit });
                }
                let w = l.map.apply_vec(v);
                let p = ProjPoint::new(w.clone())?;
                out.push((p.clone(), len));
                // Renormalize to keep the magnitudes bounded.
                next.push((p.coords().to_vec(), Some(li)));
            }
        }
        frontier = next;
    }
    Ok(out)
}
