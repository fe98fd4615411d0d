//! Connected-component labeling and area filtering of segmentation masks.

use serde::{Deserialize, Serialize};

use crate::image::BinaryMask;

/// 8-connected component labeling. Label 0 is background; components are
/// numbered `1..=num_components` in order of their first pixel in a
/// row-major scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub num_components: usize,
    /// `areas[k - 1]` is the pixel count of label `k`.
    pub areas: Vec<usize>,
}

impl ComponentLabels {
    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn area(&self, label: u32) -> usize {
        self.areas[label as usize - 1]
    }

    /// Label of the largest component; ties go to the lower label.
    pub fn largest(&self) -> Option<u32> {
        let mut best: Option<(u32, usize)> = None;
        for (i, &a) in self.areas.iter().enumerate() {
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((i as u32 + 1, a));
            }
        }
        best.map(|(l, _)| l)
    }

    /// Per-component geometry, indexed like `areas`.
    pub fn stats(&self) -> Vec<ComponentStats> {
        let mut stats: Vec<ComponentStats> = (0..self.num_components)
            .map(|i| ComponentStats {
                label: i as u32 + 1,
                area: 0,
                min_x: usize::MAX,
                min_y: usize::MAX,
                max_x: 0,
                max_y: 0,
                centroid_x: 0.0,
                centroid_y: 0.0,
            })
            .collect();
        for y in 0..self.height {
            for x in 0..self.width {
                let l = self.labels[y * self.width + x];
                if l == 0 {
                    continue;
                }
                let s = &mut stats[l as usize - 1];
                s.area += 1;
                s.min_x = s.min_x.min(x);
                s.min_y = s.min_y.min(y);
                s.max_x = s.max_x.max(x);
                s.max_y = s.max_y.max(y);
                s.centroid_x += x as f64;
                s.centroid_y += y as f64;
            }
        }
        for s in &mut stats {
            s.centroid_x /= s.area as f64;
            s.centroid_y /= s.area as f64;
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub label: u32,
    pub area: usize,
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
    pub centroid_x: f64,
    pub centroid_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    /// Components with fewer pixels than this are removed.
    pub min_area: usize,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self { min_area: 50 }
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background label
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Union keeping the smaller id as root, so each root is the
    /// provisional label seen first in scan order.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling with 8-connectivity.
pub fn label_components(mask: &BinaryMask) -> ComponentLabels {
    let (w, h) = mask.dims();
    let data = mask.data();
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !data[i] {
                continue;
            }
            // already-visited neighbours: W, NW, N, NE
            let mut neighbours = [0u32; 4];
            if x > 0 {
                neighbours[0] = provisional[i - 1];
            }
            if y > 0 {
                let up = i - w;
                if x > 0 {
                    neighbours[1] = provisional[up - 1];
                }
                neighbours[2] = provisional[up];
                if x + 1 < w {
                    neighbours[3] = provisional[up + 1];
                }
            }
            let mut current = 0;
            for &n in neighbours.iter().filter(|&&n| n != 0) {
                if current == 0 {
                    current = n;
                } else {
                    sets.union(current, n);
                }
            }
            provisional[i] = if current == 0 { sets.make() } else { current };
        }
    }

    // Provisional ids are allocated in scan order and roots are minimal ids,
    // so numbering roots by first appearance gives first-encounter order.
    let mut remap = vec![0u32; sets.parent.len()];
    let mut areas = Vec::new();
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = sets.find(p) as usize;
        if remap[root] == 0 {
            areas.push(0);
            remap[root] = areas.len() as u32;
        }
        let l = remap[root];
        labels[i] = l;
        areas[l as usize - 1] += 1;
    }

    ComponentLabels { width: w, height: h, labels, num_components: areas.len(), areas }
}

/// Keep exactly the pixels of components whose area is at least `min_area`.
pub fn filter_by_area(mask: &BinaryMask, cfg: &PostprocessConfig) -> BinaryMask {
    if cfg.min_area == 0 {
        return mask.clone();
    }
    let labels = label_components(mask);
    let keep: Vec<bool> = labels.areas.iter().map(|&a| a >= cfg.min_area).collect();
    let data = labels.labels.iter().map(|&l| l != 0 && keep[l as usize - 1]).collect();
    BinaryMask::new(mask.width(), mask.height(), data).expect("dimensions preserved")
}
