//! Exact chain/cycle dynamic programming over discrete displacement labels.

use crate::energy::{ChainMembershipIndex, DeformationParams};
use crate::error::{Error, Result};

/// A labeling problem on a chain of `n` sites with `l` labels each.
///
/// `pairwise[i]` couples site `i-1` to site `i` (row-major `l x l`, indexed
/// `prev * l + cur`) and is `None` across segment boundaries.
#[derive(Clone, Debug)]
pub struct DpProblem {
    pub unary: Vec<Vec<f64>>,
    pub pairwise: Vec<Option<Vec<f64>>>,
    pub segment_starts: Vec<usize>,
    /// When set, the last site of each segment is also coupled to its first
    /// site with the given table (`last * l + first`).
    pub closing: Vec<Option<Vec<f64>>>,
}

impl DpProblem {
    pub fn n(&self) -> usize {
        self.unary.len()
    }

    pub fn l(&self) -> usize {
        self.unary.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let l = self.l();
        if n == 0 || l == 0 {
            return Err(Error::InvalidInput("empty labeling problem".into()));
        }
        if self.unary.iter().any(|u| u.len() != l) {
            return Err(Error::DimensionMismatch("ragged unary table".into()));
        }
        if self.pairwise.len() != n {
            return Err(Error::DimensionMismatch("pairwise table count != n".into()));
        }
        if self.segment_starts.first() != Some(&0) {
            return Err(Error::InvalidInput("segments must start at 0".into()));
        }
        for w in self.segment_starts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("segment starts not increasing".into()));
            }
        }
        for (i, t) in self.pairwise.iter().enumerate() {
            let boundary = i == 0 || self.segment_starts.contains(&i);
            match t {
                Some(_) if boundary => {
                    return Err(Error::InvalidInput(format!("pairwise table at boundary {i}")));
                }
                Some(tab) if tab.len() != l * l => {
                    return Err(Error::DimensionMismatch("pairwise table size != l*l".into()));
                }
                None if !boundary => {
                    return Err(Error::InvalidInput(format!("missing pairwise table at {i}")));
                }
                _ => {}
            }
        }
        if !self.closing.is_empty() && self.closing.len() != self.segment_starts.len() {
            return Err(Error::DimensionMismatch("closing table count != segments".into()));
        }
        Ok(())
    }

    /// Energy of a full labeling under this problem.
    pub fn labeling_energy(&self, labels: &[usize]) -> f64 {
        let l = self.l();
        let mut e = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            e += self.unary[i][li];
            if let Some(tab) = &self.pairwise[i] {
                e += tab[labels[i - 1] * l + li];
            }
        }
        if !self.closing.is_empty() {
            for (seg, range) in segment_ranges(&self.segment_starts, self.n()).iter().enumerate() {
                if let Some(tab) = &self.closing[seg] {
                    e += tab[labels[range.end - 1] * l + labels[range.start]];
                }
            }
        }
        e
    }
}

fn segment_ranges(starts: &[usize], n: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(starts.len());
    for (k, &s) in starts.iter().enumerate() {
        let e = starts.get(k + 1).copied().unwrap_or(n);
        out.push(s..e);
    }
    out
}

/// Build the labeling problem for one model hypothesis.
///
/// Unary terms hold the displacement penalty `alpha_i d^2` plus the per-site
/// share of the data reward; the data reward for a consecutive same-chain
/// pair is expressed as a pairwise term so the optimum matches the full
/// energy exactly.
pub fn from_energy(
    idx: &ChainMembershipIndex,
    deform: &DeformationParams,
    delta: f64,
    segment_starts: &[usize],
    closed: bool,
) -> DpProblem {
    let n = idx.n();
    let l = idx.num_labels();
    let mut unary = vec![vec![0.0; l]; n];
    for (i, u) in unary.iter_mut().enumerate() {
        for (lab, cell) in u.iter_mut().enumerate() {
            let d = deform.displacement(lab);
            *cell = deform.alpha[i] * d * d;
        }
    }
    // the smoothness part is shared by every site up to the gamma factor,
    // and the chain bonus only touches label pairs that snapped to a chain
    let mut smooth = vec![0.0; l * l];
    for prev in 0..l {
        let dp = deform.displacement(prev);
        for cur in 0..l {
            let dc = deform.displacement(cur);
            smooth[prev * l + cur] = (dc - dp) * (dc - dp);
        }
    }
    let snapped: Vec<Vec<(usize, u32)>> = (0..n)
        .map(|i| (0..l).filter_map(|lab| idx.cell(i, lab).map(|c| (lab, c))).collect())
        .collect();
    let mut pairwise: Vec<Option<Vec<f64>>> = vec![None; n];
    let ranges = segment_ranges(segment_starts, n);
    for range in &ranges {
        for i in range.start + 1..range.end {
            let g = deform.gamma[i];
            let mut tab: Vec<f64> = smooth.iter().map(|&s| g * s).collect();
            for &(prev, a) in &snapped[i - 1] {
                for &(cur, b) in &snapped[i] {
                    if a == b {
                        tab[prev * l + cur] -= delta;
                    }
                }
            }
            pairwise[i] = Some(tab);
        }
    }
    let closing = if closed {
        ranges
            .iter()
            .map(|range| {
                if range.len() < 3 {
                    return None;
                }
                let mut tab = vec![0.0; l * l];
                for last in 0..l {
                    for first in 0..l {
                        if let (Some(a), Some(b)) =
                            (idx.cell(range.end - 1, last), idx.cell(range.start, first))
                        {
                            if a == b {
                                tab[last * l + first] = -delta;
                            }
                        }
                    }
                }
                Some(tab)
            })
            .collect()
    } else {
        Vec::new()
    };
    DpProblem { unary, pairwise, segment_starts: segment_starts.to_vec(), closing }
}

/// Number of DP states and transitions for a problem of this shape.
pub fn dp_complexity(n: usize, l: usize, num_segments: usize, closed: bool) -> (usize, usize) {
    let states = n * l;
    let open_edges = n - num_segments;
    let transitions = if closed {
        // each segment re-runs conditioned on its first label
        (open_edges * l * l) * l
    } else {
        open_edges * l * l
    };
    (states, transitions)
}

fn viterbi_forward(
    problem: &DpProblem,
    range: std::ops::Range<usize>,
    fixed_first: Option<usize>,
) -> (Vec<f64>, Vec<Vec<usize>>) {
    let l = problem.l();
    let mut cost = vec![f64::INFINITY; l];
    for lab in 0..l {
        if fixed_first.map_or(true, |f| f == lab) {
            cost[lab] = problem.unary[range.start][lab];
        }
    }
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(range.len().saturating_sub(1));
    for i in range.start + 1..range.end {
        let tab = problem.pairwise[i].as_ref().expect("interior edge");
        let mut next = vec![f64::INFINITY; l];
        let mut arg = vec![0usize; l];
        for cur in 0..l {
            let u = problem.unary[i][cur];
            let mut best = f64::INFINITY;
            let mut bi = 0usize;
            for prev in 0..l {
                let c = cost[prev] + tab[prev * l + cur];
                if c < best {
                    best = c;
                    bi = prev;
                }
            }
            next[cur] = best + u;
            arg[cur] = bi;
        }
        cost = next;
        back.push(arg);
    }
    (cost, back)
}

fn backtrack(back: &[Vec<usize>], last: usize) -> Vec<usize> {
    let mut labels = vec![0usize; back.len() + 1];
    labels[back.len()] = last;
    for k in (0..back.len()).rev() {
        labels[k] = back[k][labels[k + 1]];
    }
    labels
}

fn viterbi_open(
    problem: &DpProblem,
    range: std::ops::Range<usize>,
    fixed_first: Option<usize>,
    closing_row: Option<(&[f64], usize)>,
) -> (f64, Vec<usize>) {
    let l = problem.l();
    let (cost, back) = viterbi_forward(problem, range, fixed_first);
    // the closing term couples the last label to the (fixed) first one, so
    // the last label must be chosen with it included
    let final_cost = |lab: usize| match closing_row {
        Some((tab, first)) => cost[lab] + tab[lab * l + first],
        None => cost[lab],
    };
    let mut best_lab = 0usize;
    for lab in 1..l {
        if final_cost(lab) < final_cost(best_lab) {
            best_lab = lab;
        }
    }
    (final_cost(best_lab), backtrack(&back, best_lab))
}

/// Globally minimize the labeling energy; segments are independent, closed
/// segments are handled by restarting the chain DP once per first label.
pub fn solve_dp(problem: &DpProblem) -> Result<(Vec<usize>, f64)> {
    problem.validate()?;
    let n = problem.n();
    let l = problem.l();
    let mut labels = vec![0usize; n];
    let mut total = 0.0;
    for (seg, range) in segment_ranges(&problem.segment_starts, n).iter().enumerate() {
        let closing = problem.closing.get(seg).and_then(|c| c.as_ref());
        let (e, seg_labels) = match closing {
            None => viterbi_open(problem, range.clone(), None, None),
            Some(tab) => {
                let mut best: Option<(f64, Vec<usize>)> = None;
                for first in 0..l {
                    let (e, lv) =
                        viterbi_open(problem, range.clone(), Some(first), Some((tab, first)));
                    if best.as_ref().map_or(true, |(be, _)| e < *be) {
                        best = Some((e, lv));
                    }
                }
                best.unwrap()
            }
        };
        if !e.is_finite() {
            return Err(Error::Numerical("non-finite DP optimum".into()));
        }
        labels[range.clone()].copy_from_slice(&seg_labels);
        total += e;
    }
    Ok((labels, total))
}
