//! Dataset manifests and deterministic train/val/test splitting.
//!
//! Manifest text: first line `#classes:` plus comma-separated names, then one
//! tab-separated record per line: path, comma-separated 0/1 labels, optional
//! subject id. All records of a subject are kept in one split.

use std::fs;
use std::path::Path;

use crate::error::{Result, VoxError};
use crate::rng::{derive_rng, permutation, streams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub path: String,
    pub labels: Vec<u8>,
    pub subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub classes: Vec<String>,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn new(classes: Vec<String>, records: Vec<ManifestRecord>) -> Result<Self> {
        let m = DatasetManifest { classes, records };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(VoxError::format("manifest declares no classes"));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.labels.len() != self.classes.len() {
                return Err(VoxError::format(format!(
                    "record {i}: {} labels for {} classes",
                    r.labels.len(),
                    self.classes.len()
                )));
            }
            if r.labels.iter().any(|&l| l > 1) {
                return Err(VoxError::format(format!("record {i}: labels must be 0/1")));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| VoxError::format("empty manifest text"))?;
        let Some(names) = header.strip_prefix("#classes:") else {
            return Err(VoxError::format(format!(
                "first line must start with '#classes:', got {header:?}"
            )));
        };
        let classes: Vec<String> = names
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(VoxError::format(format!(
                    "line {}: expected 2-3 tab-separated fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let labels = fields[1]
                .split(',')
                .map(|t| match t.trim() {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(VoxError::format(format!(
                        "line {}: label {other:?} is not 0/1",
                        lineno + 2
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            records.push(ManifestRecord {
                path: fields[0].to_string(),
                labels,
                subject: fields.get(2).map(|s| s.to_string()),
            });
        }
        DatasetManifest::new(classes, records)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#classes:{}\n", self.classes.join(","));
        for r in &self.records {
            let labels: Vec<String> = r.labels.iter().map(|l| l.to_string()).collect();
            out.push_str(&r.path);
            out.push('\t');
            out.push_str(&labels.join(","));
            if let Some(s) = &r.subject {
                out.push('\t');
                out.push_str(s);
            }
            out.push('\n');
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn positives(&self, class: usize) -> usize {
        self.records.iter().map(|r| r.labels[class] as usize).sum()
    }

    /// New manifest holding the given record indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> DatasetManifest {
        DatasetManifest {
            classes: self.classes.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    /// train/val/test fractions, summing to 1.
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratify: bool,
    /// One entry per record once filled by `split_dataset`.
    pub assignment: Vec<Split>,
}

impl SplitSpec {
    pub fn new(ratios: [f64; 3], seed: u64, stratify: bool) -> Self {
        SplitSpec {
            ratios,
            seed,
            stratify,
            assignment: Vec::new(),
        }
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == split)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Largest-remainder integer targets for `ratios` over `n` items.
fn remainder_targets(ratios: &[f64; 3], n: usize) -> [usize; 3] {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut targets = [0usize; 3];
    let mut assigned = 0;
    for i in 0..3 {
        targets[i] = quotas[i].floor() as usize;
        assigned += targets[i];
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n - assigned) {
        targets[i] += 1;
    }
    targets
}

/// Deterministic subject-grouped, optionally stratified partition.
///
/// Returns a copy of `s` with `assignment` filled (one `Split` per record).
/// Subjects never straddle splits; with `stratify`, per-stratum record
/// counts follow the ratios with largest-remainder accuracy, so per-class
/// positives land within ±1 of `ratio * total` when classes partition the
/// records.
pub fn split_dataset(m: &DatasetManifest, s: &SplitSpec) -> Result<SplitSpec> {
    m.validate()?;
    if m.is_empty() {
        return Err(VoxError::invalid("cannot split an empty manifest"));
    }
    if s.ratios.iter().any(|&r| r < 0.0) {
        return Err(VoxError::invalid("split ratios must be nonnegative"));
    }
    let sum: f64 = s.ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(VoxError::invalid(format!("split ratios sum to {sum}, want 1")));
    }

    // Subject groups in first-appearance order; unlabeled records are their
    // own group.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut by_subject: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (i, r) in m.records.iter().enumerate() {
        match r.subject.as_deref() {
            Some(subj) => {
                if let Some(&g) = by_subject.get(subj) {
                    groups[g].push(i);
                } else {
                    by_subject.insert(subj, groups.len());
                    groups.push(vec![i]);
                }
            }
            None => groups.push(vec![i]),
        }
    }

    // Strata of group indices, keyed by the group's any-positive label vector.
    let stratum_key = |g: &[usize]| -> Vec<u8> {
        if !s.stratify {
            return Vec::new();
        }
        let mut key = vec![0u8; m.n_classes()];
        for &i in g {
            for (k, &l) in m.records[i].labels.iter().enumerate() {
                key[k] |= l;
            }
        }
        key
    };
    let mut strata: Vec<(Vec<u8>, Vec<usize>)> = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let key = stratum_key(g);
        match strata.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(gi),
            None => strata.push((key, vec![gi])),
        }
    }
    strata.sort_by(|a, b| a.0.cmp(&b.0));

    let mut assignment = vec![Split::Train; m.len()];
    for (si, (_, stratum_groups)) in strata.iter().enumerate() {
        let n_records: usize = stratum_groups.iter().map(|&g| groups[g].len()).sum();
        let targets = remainder_targets(&s.ratios, n_records);
        let mut deficit: [isize; 3] = [
            targets[0] as isize,
            targets[1] as isize,
            targets[2] as isize,
        ];
        let mut rng = derive_rng(s.seed, &[streams::SPLIT, si as u64]);
        let order = permutation(stratum_groups.len(), &mut rng);
        for &oi in &order {
            let g = stratum_groups[oi];
            let best = (0..3).max_by_key(|&i| (deficit[i], std::cmp::Reverse(i))).unwrap();
            for &rec in &groups[g] {
                assignment[rec] = Split::ALL[best];
            }
            deficit[best] -= groups[g].len() as isize;
        }
    }

    Ok(SplitSpec {
        ratios: s.ratios,
        seed: s.seed,
        stratify: s.stratify,
        assignment,
    })
}

/// Pick `round(fraction * len)` record indices, proportionally per
/// label-vector stratum (largest remainder), seed-deterministic, sorted.
pub fn stratified_subset(m: &DatasetManifest, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    m.validate()?;
    if m.is_empty() {
        return Err(VoxError::invalid("cannot subset an empty manifest"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(VoxError::invalid(format!("fraction {fraction} not in (0, 1]")));
    }
    let n_keep = ((fraction * m.len() as f64).round() as usize).max(1);

    let mut strata: Vec<(Vec<u8>, Vec<usize>)> = Vec::new();
    for (i, r) in m.records.iter().enumerate() {
        match strata.iter_mut().find(|(k, _)| *k == r.labels) {
            Some((_, v)) => v.push(i),
            None => strata.push((r.labels.clone(), vec![i])),
        }
    }
    strata.sort_by(|a, b| a.0.cmp(&b.0));

    // largest-remainder allocation of n_keep across strata
    let total = m.len() as f64;
    let quotas: Vec<f64> = strata
        .iter()
        .map(|(_, v)| n_keep as f64 * v.len() as f64 / total)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut left = n_keep - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..strata.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if left == 0 {
            break;
        }
        if counts[i] < strata[i].1.len() {
            counts[i] += 1;
            left -= 1;
        }
    }

    let mut keep = Vec::with_capacity(n_keep);
    for (si, ((_, members), &count)) in strata.iter().zip(counts.iter()).enumerate() {
        let mut rng = derive_rng(seed, &[streams::SUBSET, si as u64]);
        let order = permutation(members.len(), &mut rng);
        for &oi in order.iter().take(count) {
            keep.push(members[oi]);
        }
    }
    keep.sort_unstable();
    Ok(keep)
}
