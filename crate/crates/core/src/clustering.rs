//! Markov clustering over a dependency structure matrix.
//!
//! The pipeline is: binary entity-vs-component sharing matrix `P` (DMM),
//! its square `P·Pᵀ` (DSM), column normalization into a stochastic matrix,
//! then alternating expansion (matrix power `alpha`) and inflation
//! (entrywise power `beta` with column re-normalization) until the iterate
//! settles. Entities end up in one cluster when they are linked by nonzero
//! entries of the converged matrix.

use nalgebra::DMatrix;

use crate::automata::Alphabet;
use crate::error::{Error, Result};

/// Tolerance on column sums of a stochastic matrix.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Binary matrix: `entries[i][k] = 1` iff entity `i` and component `k` share
/// at least one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dmm {
    entries: DMatrix<u32>,
}

impl Dmm {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, i: usize, k: usize) -> u32 {
        self.entries[(i, k)]
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Matrix("ragged DMM rows".into()));
        }
        if rows.iter().flatten().any(|&v| v > 1) {
            return Err(Error::Matrix("DMM entries must be 0 or 1".into()));
        }
        Ok(Self {
            entries: DMatrix::from_fn(n, m, |i, k| rows[i][k]),
        })
    }
}

/// Symmetric count matrix `P·Pᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dsm {
    entries: DMatrix<u32>,
}

impl Dsm {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, h: usize) -> u32 {
        self.entries[(i, h)]
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Matrix("DSM must be square".into()));
        }
        Ok(Self {
            entries: DMatrix::from_fn(n, n, |i, h| rows[i][h]),
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }
}

/// Square matrix whose columns each sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
}

impl StochasticMatrix {
    /// Validates column sums against [`STOCHASTIC_TOLERANCE`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Matrix("stochastic matrix must be square".into()));
        }
        if entries.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Matrix("entries must be finite and non-negative".into()));
        }
        let m = Self { entries };
        if let Some((h, sum)) = m.worst_column() {
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::Matrix(format!("column {h} sums to {sum}, not 1")));
            }
        }
        Ok(m)
    }

    /// Normalizes the columns of an arbitrary non-negative square matrix.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Matrix("matrix must be square".into()));
        }
        if weights.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Matrix("entries must be finite and non-negative".into()));
        }
        let mut entries = weights;
        normalize_columns(&mut entries)?;
        Ok(Self { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.entries[(i, h)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn worst_column(&self) -> Option<(usize, f64)> {
        self.entries
            .column_iter()
            .map(|c| c.sum())
            .enumerate()
            .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
    }
}

fn normalize_columns(m: &mut DMatrix<f64>) -> Result<()> {
    for (h, mut col) in m.column_iter_mut().enumerate() {
        let sum = col.sum();
        if sum <= 0.0 {
            return Err(Error::Matrix(format!("column {h} sums to zero")));
        }
        col /= sum;
    }
    Ok(())
}

/// Expansion power, inflation exponent and iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MclParams {
    /// Expansion power. Kept at 2 for stability; exposed for experiments only.
    pub alpha: u32,
    /// Inflation exponent; larger values give more, smaller clusters.
    pub beta: f64,
    pub epsilon: f64,
    /// Entries below this are zeroed after inflation. Also the "nonzero"
    /// threshold used when reading clusters off the converged matrix.
    pub prune: f64,
    pub max_iters: usize,
}

impl MclParams {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            ..Self::default()
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks.
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 2 {
            return Err(Error::Validation(format!(
                "alpha must be an integer >= 2, got {}",
                self.alpha
            )));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::Validation(format!(
                "beta must be a real number > 1, got {}",
                self.beta
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Validation("epsilon must be positive".into()));
        }
        if !(self.prune >= 0.0) {
            return Err(Error::Validation("prune threshold must be non-negative".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Validation("max_iters must be positive".into()));
        }
        Ok(())
    }
}

impl Default for MclParams {
    fn default() -> Self {
        Self {
            alpha: 2,
            beta: 2.0,
            epsilon: 1e-6,
            prune: 1e-9,
            max_iters: 200,
        }
    }
}

/// Disjoint, covering blocks of entity indices. Blocks are sorted by their
/// smallest member and members ascend within each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalizes and checks disjointness and coverage of `0..n`.
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Invariant("empty partition block".into()));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Invariant(format!("index {i} is out of range or repeated")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::Invariant(format!("index {i} is not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    pub fn single(n: usize) -> Self {
        Self {
            blocks: if n == 0 { vec![] } else { vec![(0..n).collect()] },
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn num_items(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block index of each item.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.num_items()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                labels[i] = b;
            }
        }
        labels
    }
}

pub fn build_dmm(entity_alphabets: &[&Alphabet], component_alphabets: &[&Alphabet]) -> Result<Dmm> {
    if entity_alphabets.is_empty() || component_alphabets.is_empty() {
        return Err(Error::Precondition(
            "DMM needs at least one entity and one component".into(),
        ));
    }
    let entries = DMatrix::from_fn(entity_alphabets.len(), component_alphabets.len(), |i, k| {
        u32::from(!entity_alphabets[i].is_disjoint(component_alphabets[k]))
    });
    if let Some(i) = entries.row_iter().position(|row| row.iter().all(|&v| v == 0)) {
        return Err(Error::UnrelatedEntity {
            entity: format!("#{i}"),
        });
    }
    Ok(Dmm { entries })
}

pub fn dsm_from_dmm(p: &Dmm) -> Dsm {
    let n = p.rows();
    let entries = DMatrix::from_fn(n, n, |i, h| (0..p.cols()).map(|k| p.get(i, k) * p.get(h, k)).sum());
    Dsm { entries }
}

pub fn column_normalize(d: &Dsm) -> Result<StochasticMatrix> {
    StochasticMatrix::from_weights(d.entries.map(f64::from))
}

/// Iterates expansion, inflation and pruning until the largest entry change
/// between rounds drops below `params.epsilon`.
pub fn mcl_iterate(m: &StochasticMatrix, params: &MclParams) -> Result<StochasticMatrix> {
    mcl_iterate_counted(m, params).map(|(m, _)| m)
}

/// [`mcl_iterate`] plus the number of rounds performed.
pub fn mcl_iterate_counted(m: &StochasticMatrix, params: &MclParams) -> Result<(StochasticMatrix, usize)> {
    params.validate()?;
    let mut current = m.entries.clone();
    let mut last_change = f64::INFINITY;
    for round in 1..=params.max_iters {
        let mut next = current.clone();
        for _ in 1..params.alpha {
            next = &next * &current;
        }
        next.apply(|v| *v = v.powf(params.beta));
        normalize_columns(&mut next)?;
        next.apply(|v| {
            if *v < params.prune {
                *v = 0.0
            }
        });
        normalize_columns(&mut next)?;
        if let Some(h) = (0..next.ncols()).find(|&h| (next.column(h).sum() - 1.0).abs() > STOCHASTIC_TOLERANCE) {
            return Err(Error::Invariant(format!(
                "column {h} is not stochastic after round {round}"
            )));
        }

        last_change = (&next - &current).amax();
        current = next;
        if last_change < params.epsilon {
            return Ok((StochasticMatrix { entries: current }, round));
        }
    }
    Err(Error::NotConverged {
        iterations: params.max_iters,
        last_change,
        last: Box::new(StochasticMatrix { entries: current }),
    })
}

/// Connected components of the graph with an edge `{i, h}` whenever
/// `M(i, h)` or `M(h, i)` exceeds `threshold`.
pub fn extract_clusters(converged: &StochasticMatrix, threshold: f64) -> Partition {
    let n = converged.size();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for h in 0..n {
            if converged.get(i, h) > threshold {
                let (ri, rh) = (find(&mut parent, i), find(&mut parent, h));
                if ri != rh {
                    parent[ri.max(rh)] = ri.min(rh);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if block_of_root[r] == usize::MAX {
            block_of_root[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[block_of_root[r]].push(i);
    }
    Partition::new(blocks, n).expect("components form a partition")
}

/// Runs MCL on an already stochastic matrix and reads off the clusters.
pub fn cluster_matrix(m: &StochasticMatrix, params: &MclParams) -> Result<Partition> {
    let converged = mcl_iterate(m, params)?;
    Ok(extract_clusters(&converged, params.prune))
}

/// DMM → DSM → stochastic matrix → MCL → clusters.
pub fn markov_clustering(
    entity_alphabets: &[&Alphabet],
    component_alphabets: &[&Alphabet],
    params: &MclParams,
) -> Result<Partition> {
    let dmm = build_dmm(entity_alphabets, component_alphabets)?;
    let m = column_normalize(&dsm_from_dmm(&dmm))?;
    cluster_matrix(&m, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, AGV_STOCHASTIC_MATRIX};
    use crate::EventRegistry;

    fn agv() -> StochasticMatrix {
        StochasticMatrix::from_weights(DMatrix::from_fn(9, 9, |i, h| AGV_STOCHASTIC_MATRIX[i][h])).unwrap()
    }

    fn names(p: &Partition) -> Vec<Vec<&'static str>> {
        p.blocks()
            .iter()
            .map(|b| b.iter().map(|&i| fixtures::AGV_ENTITY_NAMES[i]).collect())
            .collect()
    }

    #[test]
    fn dmm_rows_follow_event_sharing() {
        let p = fixtures::small_factory();
        let comps: Vec<&Alphabet> = p.components.iter().map(|c| c.alphabet()).collect();
        let dmm = build_dmm(&[p.specs[0].alphabet()], &comps).unwrap();
        assert_eq!((dmm.get(0, 0), dmm.get(0, 1)), (1, 1));
        assert_eq!(dsm_from_dmm(&dmm).get(0, 0), 2);
    }

    #[test]
    fn zero_row_is_rejected() {
        let mut reg = EventRegistry::new();
        let (a, b) = (reg.controllable("a"), reg.controllable("b"));
        let s: Alphabet = [a].iter().collect();
        let c: Alphabet = [b].iter().collect();
        assert!(matches!(build_dmm(&[&s], &[&c]), Err(Error::UnrelatedEntity { .. })));
    }

    #[test]
    fn all_sharing_row_is_all_ones() {
        let mut reg = EventRegistry::new();
        let e: Vec<_> = (0..3).map(|i| reg.controllable(&format!("e{i}"))).collect();
        let spec: Alphabet = e.iter().collect();
        let comps: Vec<Alphabet> = e.iter().map(|&x| [x].iter().collect()).collect();
        let refs: Vec<&Alphabet> = comps.iter().collect();
        let dmm = build_dmm(&[&spec], &refs).unwrap();
        assert!((0..3).all(|k| dmm.get(0, k) == 1));
    }

    #[test]
    fn dsm_identity_and_shared_component() {
        let id = Dmm::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(dsm_from_dmm(&id), Dsm::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap());
        // two specs, one shared component and one private each
        let p = Dmm::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let d = dsm_from_dmm(&p);
        assert_eq!(d, Dsm::from_rows(&[vec![2, 1], vec![1, 2]]).unwrap());
        assert!(d.is_symmetric());
    }

    #[test]
    fn column_normalize_identity() {
        let d = Dsm::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let m = column_normalize(&d).unwrap();
        assert_eq!(m.as_matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn zero_column_is_rejected() {
        let d = Dsm::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert!(column_normalize(&d).is_err());
    }

    #[test]
    fn detailed_balance_of_normalized_symmetric_matrix() {
        let d = Dsm::from_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 2]]).unwrap();
        let m = column_normalize(&d).unwrap();
        let colsum = |h: usize| (0..3).map(|i| f64::from(d.get(i, h))).sum::<f64>();
        for i in 0..3 {
            for h in 0..3 {
                let lhs = m.get(i, h) * colsum(h);
                let rhs = m.get(h, i) * colsum(i);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trivial_fixpoints() {
        let one = StochasticMatrix::new(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let out = mcl_iterate(&one, &MclParams::new(2.0)).unwrap();
        assert_eq!(out.get(0, 0), 1.0);
        let id = StochasticMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let p = cluster_matrix(&id, &MclParams::new(2.0)).unwrap();
        assert_eq!(p, Partition::singletons(4));
    }

    #[test]
    fn block_diagonal_stays_block_diagonal() {
        let w = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 1.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 1.0, 2.0,
            ],
        );
        let m = StochasticMatrix::from_weights(w).unwrap();
        let out = mcl_iterate(&m, &MclParams::new(2.0)).unwrap();
        for (i, h) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (3, 1)] {
            assert_eq!(out.get(i, h), 0.0);
        }
        assert_eq!(extract_clusters(&out, 1e-9).len(), 2);
    }

    #[test]
    fn three_disjoint_entities_give_singletons() {
        let mut reg = EventRegistry::new();
        let e: Vec<Alphabet> = (0..3)
            .map(|i| [reg.controllable(&format!("e{i}"))].iter().collect())
            .collect();
        let refs: Vec<&Alphabet> = e.iter().collect();
        let p = markov_clustering(&refs, &refs, &MclParams::new(6.0)).unwrap();
        assert_eq!(p, Partition::singletons(3));
    }

    #[test]
    fn agv_beta_four_matches_published_partition() {
        let p = cluster_matrix(&agv(), &MclParams::new(4.0)).unwrap();
        assert_eq!(
            names(&p),
            vec![
                vec!["Z1", "Z2", "WS2", "IPS"],
                vec!["Z3", "WS3"],
                vec!["Z4", "WS14"],
                vec!["WS13"],
            ]
        );
    }

    #[test]
    fn agv_extreme_betas() {
        assert_eq!(cluster_matrix(&agv(), &MclParams::new(2.5)).unwrap().len(), 2);
        assert_eq!(cluster_matrix(&agv(), &MclParams::new(10.0)).unwrap().len(), 6);
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let params = MclParams {
            max_iters: 1,
            ..MclParams::new(2.5)
        };
        match mcl_iterate(&agv(), &params) {
            Err(Error::NotConverged { iterations, last, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last.size(), 9);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn beta_must_exceed_one() {
        assert!(MclParams::new(1.0).validate().is_err());
        assert!(MclParams {
            alpha: 1,
            ..MclParams::new(2.0)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn partition_rejects_overlap_and_gaps() {
        assert!(Partition::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(Partition::new(vec![vec![0]], 2).is_err());
        let p = Partition::new(vec![vec![2], vec![1, 0]], 3).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(p.labels(), vec![0, 0, 1]);
    }
}
