//! LDPC degree distributions, progressive-edge-growth construction,
//! systematic encoding and sum-product decoding.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit::{j_function, j_inverse};

/// Designed code rate selector for the tabulated distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeRate {
    Half,
    ThreeQuarter,
}

impl CodeRate {
    pub fn value(self) -> f64 {
        match self {
            CodeRate::Half => 0.5,
            CodeRate::ThreeQuarter => 0.75,
        }
    }
}

/// Variable- and check-node degree distribution (node-perspective fractions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub vnd: Vec<(usize, f64)>,
    pub cnd: Vec<(usize, f64)>,
    pub rate: f64,
}

impl DegreeDistribution {
    pub fn new(vnd: Vec<(usize, f64)>, cnd: Vec<(usize, f64)>, rate: f64) -> Result<Self> {
        let d = Self { vnd, cnd, rate };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("VND", &self.vnd), ("CND", &self.cnd)] {
            let sum: f64 = list.iter().map(|(_, f)| f).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "{name} fractions sum to {sum}"
                )));
            }
            if list.iter().any(|&(d, f)| d == 0 || f < 0.0) {
                return Err(Error::InvalidParameter(format!("bad {name} entry")));
            }
        }
        if !(0.0 < self.rate && self.rate < 1.0) {
            return Err(Error::InvalidParameter(format!("rate {} outside (0,1)", self.rate)));
        }
        Ok(())
    }

    pub fn avg_var_degree(&self) -> f64 {
        self.vnd.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn avg_check_degree(&self) -> f64 {
        self.cnd.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    /// Integer node counts for block length `n`: largest-remainder rounding,
    /// then the count of the lowest variable degree absorbs the residual edge
    /// imbalance by trading nodes with the next-lowest degree.
    pub fn node_counts(&self, n: usize) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        let m = ((n as f64) * (1.0 - self.rate)).round() as usize;
        let mut vnd = largest_remainder(&self.vnd, n);
        let cnd = largest_remainder(&self.cnd, m);
        let target_edges: usize = cnd.iter().map(|&(d, c)| d * c).sum();
        vnd.sort_by_key(|&(d, _)| d);
        if vnd.len() >= 2 {
            let (d_lo, d_hi) = (vnd[0].0, vnd[1].0);
            let step = d_hi - d_lo;
            if step > 0 {
                loop {
                    let edges: usize = vnd.iter().map(|&(d, c)| d * c).sum();
                    if edges + step <= target_edges && vnd[0].1 > 0 {
                        vnd[0].1 -= 1;
                        vnd[1].1 += 1;
                    } else if edges >= target_edges + step && vnd[1].1 > 0 {
                        vnd[0].1 += 1;
                        vnd[1].1 -= 1;
                    } else {
                        break;
                    }
                }
            }
        }
        let edges: usize = vnd.iter().map(|&(d, c)| d * c).sum();
        let max_cd = self.cnd.iter().map(|&(d, _)| d).max().unwrap_or(1);
        if edges.abs_diff(target_edges) > max_cd {
            return Err(Error::Construction(format!(
                "edge imbalance {} vs {} exceeds one check's edges",
                edges, target_edges
            )));
        }
        Ok((vnd, cnd))
    }
}

fn largest_remainder(fracs: &[(usize, f64)], total: usize) -> Vec<(usize, usize)> {
    let mut counts: Vec<(usize, usize, f64)> = fracs
        .iter()
        .map(|&(d, f)| {
            let exact = f * total as f64;
            (d, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = counts.iter().map(|c| c.1).sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2));
    for k in 0..(total - assigned) {
        let idx = order[k % order.len()];
        counts[idx].1 += 1;
    }
    counts.into_iter().map(|(d, c, _)| (d, c)).collect()
}

/// Designed degree distributions for the multiuser scenarios, by strategy and
/// rate.
pub fn table2_distribution(strategy: u8, rate: CodeRate) -> Result<DegreeDistribution> {
    let (vnd, cnd, r) = match (strategy, rate) {
        (1, CodeRate::Half) => (
            vec![(2, 0.60), (3, 0.314), (10, 0.086)],
            vec![(6, 1.0)],
            0.5,
        ),
        (2, CodeRate::Half) => (
            vec![(2, 0.60), (3, 0.365), (20, 0.035)],
            vec![(6, 1.0)],
            0.5,
        ),
        (1, CodeRate::ThreeQuarter) => (
            vec![(2, 0.80), (3, 0.183), (50, 0.017)],
            vec![(12, 1.0)],
            0.75,
        ),
        (2, CodeRate::ThreeQuarter) => (
            vec![(2, 0.70), (3, 0.285), (50, 0.015)],
            vec![(12, 1.0)],
            0.75,
        ),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "no designed distribution for strategy {strategy}"
            )))
        }
    };
    DegreeDistribution::new(vnd, cnd, r)
}

/// Interference-free baseline profiles with the published node-degree
/// fractions of the standard satellite codes at rates 1/2 and 3/4; used as
/// PEG inputs since the exact standard matrices are out of scope.
pub fn dvb_like_distribution(rate: CodeRate) -> DegreeDistribution {
    match rate {
        CodeRate::Half => DegreeDistribution::new(
            vec![(2, 0.5), (3, 0.3), (8, 0.2)],
            vec![(7, 1.0)],
            0.5,
        )
        .expect("static profile"),
        CodeRate::ThreeQuarter => DegreeDistribution::new(
            vec![(2, 0.25), (3, 2.0 / 3.0), (12, 1.0 / 12.0)],
            vec![(14, 1.0)],
            0.75,
        )
        .expect("static profile"),
    }
}

/// Sparse bipartite parity-check structure with encoder preprocessing.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    pub n: usize,
    pub m: usize,
    pub check_to_var: Vec<Vec<u32>>,
    pub var_to_check: Vec<Vec<u32>>,
    encoder: Encoder,
}

#[derive(Debug, Clone)]
struct Encoder {
    /// Reduced parity rows over the systematic columns, one bitset row per
    /// pivot, in message coordinates.
    rows: Vec<Vec<u64>>,
    pivot_cols: Vec<usize>,
    systematic_cols: Vec<usize>,
}

impl LdpcCode {
    pub fn message_len(&self) -> usize {
        self.n - self.m
    }

    /// Codeword positions that carry the message, in message order.
    pub fn systematic_cols(&self) -> &[usize] {
        &self.encoder.systematic_cols
    }

    /// Recover the message bits from a (decoded) codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.encoder.systematic_cols.iter().map(|&c| codeword[c]).collect()
    }

    /// Progressive edge growth: variables in nondecreasing degree order, each
    /// edge attached to a check at maximal BFS depth (unreachable checks
    /// first), ties broken by lowest current check degree and then by a
    /// seeded priority order.
    pub fn peg_construct(n: usize, dist: &DegreeDistribution, seed: u64) -> Result<Self> {
        if n < 16 {
            return Err(Error::Construction(format!("block length {n} too small")));
        }
        let (vnd_counts, _cnd_counts) = dist.node_counts(n)?;
        let m = ((n as f64) * (1.0 - dist.rate)).round() as usize;

        let mut priorities: Vec<u32> = (0..m as u32).collect();
        priorities.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
        let mut rank = vec![0u32; m];
        for (pos, &c) in priorities.iter().enumerate() {
            rank[c as usize] = pos as u32;
        }

        let mut var_degrees: Vec<usize> = Vec::with_capacity(n);
        for &(d, c) in &vnd_counts {
            var_degrees.extend(std::iter::repeat(d).take(c));
        }
        debug_assert_eq!(var_degrees.len(), n);
        var_degrees.sort_unstable();

        let mut check_to_var: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut var_to_check: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut chk_deg = vec![0usize; m];

        // BFS scratch, stamped to avoid clearing
        let mut chk_stamp = vec![0u32; m];
        let mut var_stamp = vec![0u32; n];
        let mut stamp = 0u32;
        let mut frontier: Vec<u32> = Vec::new();
        let mut next: Vec<u32> = Vec::new();
        let mut last_level: Vec<u32> = Vec::new();

        let better = |a: u32, b: u32, chk_deg: &[usize], rank: &[u32]| -> bool {
            (chk_deg[a as usize], rank[a as usize]) < (chk_deg[b as usize], rank[b as usize])
        };

        for v in 0..n {
            for e in 0..var_degrees[v] {
                let chosen: u32 = if e == 0 {
                    (0..m as u32)
                        .min_by_key(|&c| (chk_deg[c as usize], rank[c as usize]))
                        .expect("m > 0")
                } else {
                    stamp += 1;
                    var_stamp[v] = stamp;
                    frontier.clear();
                    let mut covered = 0usize;
                    for &c in &var_to_check[v] {
                        if chk_stamp[c as usize] != stamp {
                            chk_stamp[c as usize] = stamp;
                            covered += 1;
                            frontier.push(c);
                        }
                    }
                    last_level.clear();
                    last_level.extend_from_slice(&frontier);
                    while covered < m && !frontier.is_empty() {
                        next.clear();
                        for &c in &frontier {
                            for &u in &check_to_var[c as usize] {
                                if var_stamp[u as usize] == stamp {
                                    continue;
                                }
                                var_stamp[u as usize] = stamp;
                                for &c2 in &var_to_check[u as usize] {
                                    if chk_stamp[c2 as usize] != stamp {
                                        chk_stamp[c2 as usize] = stamp;
                                        covered += 1;
                                        next.push(c2);
                                    }
                                }
                            }
                        }
                        if next.is_empty() {
                            break;
                        }
                        std::mem::swap(&mut frontier, &mut next);
                        last_level.clear();
                        last_level.extend_from_slice(&frontier);
                    }
                    if covered < m {
                        // connect to an uncovered check
                        let mut best: Option<u32> = None;
                        for c in 0..m as u32 {
                            if chk_stamp[c as usize] != stamp
                                && best.map_or(true, |b| better(c, b, &chk_deg, &rank))
                            {
                                best = Some(c);
                            }
                        }
                        best.expect("covered < m implies an uncovered check")
                    } else {
                        // all covered: deepest BFS level
                        let mut best: Option<u32> = None;
                        for &c in &last_level {
                            if best.map_or(true, |b| better(c, b, &chk_deg, &rank)) {
                                best = Some(c);
                            }
                        }
                        best.ok_or_else(|| {
                            Error::Construction(format!(
                                "variable {v} cannot take {e} distinct edges"
                            ))
                        })?
                    }
                };
                check_to_var[chosen as usize].push(v as u32);
                var_to_check[v].push(chosen);
                chk_deg[chosen as usize] += 1;
            }
        }

        let encoder = Encoder::build(n, m, &check_to_var)?;
        Ok(Self { n, m, check_to_var, var_to_check, encoder })
    }

    /// Systematic encoding; `H c = 0` over GF(2).
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.message_len() {
            return Err(Error::InvalidParameter(format!(
                "message length {} != {}",
                message.len(),
                self.message_len()
            )));
        }
        let words = message.len().div_ceil(64);
        let mut msg = vec![0u64; words];
        for (i, &b) in message.iter().enumerate() {
            if b != 0 {
                msg[i / 64] |= 1u64 << (i % 64);
            }
        }
        let mut codeword = vec![0u8; self.n];
        for (k, &col) in self.encoder.systematic_cols.iter().enumerate() {
            codeword[col] = message[k];
        }
        for (row, &pcol) in self.encoder.rows.iter().zip(&self.encoder.pivot_cols) {
            let mut acc = 0u64;
            for (a, b) in row.iter().zip(&msg) {
                acc ^= a & b;
            }
            codeword[pcol] = (acc.count_ones() & 1) as u8;
        }
        Ok(codeword)
    }

    pub fn syndrome_ok(&self, codeword: &[u8]) -> bool {
        self.check_to_var.iter().all(|vars| {
            vars.iter().fold(0u8, |acc, &v| acc ^ codeword[v as usize]) == 0
        })
    }

    /// Flooding sum-product decoding with tanh-rule check updates and early
    /// stop on a zero syndrome. Posterior LLRs feed the outer iterative loop.
    pub fn bp_decode(&self, channel_llrs: &[f64], max_iters: usize) -> DecodeOutput {
        debug_assert_eq!(channel_llrs.len(), self.n);
        let n_edges: usize = self.check_to_var.iter().map(|v| v.len()).sum();
        // CSR over checks
        let mut edge_var = Vec::with_capacity(n_edges);
        let mut offsets = Vec::with_capacity(self.m + 1);
        offsets.push(0usize);
        for vars in &self.check_to_var {
            edge_var.extend(vars.iter().copied());
            offsets.push(edge_var.len());
        }
        // map each (var, k-th incidence) to its edge id
        let mut var_edges: Vec<Vec<u32>> = vec![Vec::new(); self.n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[v as usize].push(e as u32);
        }

        let mut v2c = vec![0.0f64; n_edges];
        let mut c2v = vec![0.0f64; n_edges];
        for (e, &v) in edge_var.iter().enumerate() {
            v2c[e] = channel_llrs[v as usize];
        }

        let mut posteriors = channel_llrs.to_vec();
        let mut hard: Vec<u8> = channel_llrs.iter().map(|&l| (l < 0.0) as u8).collect();
        let mut scratch = Vec::new();
        for iter in 1..=max_iters {
            // check update with forward/backward partial products
            for c in 0..self.m {
                let (s, t) = (offsets[c], offsets[c + 1]);
                let deg = t - s;
                scratch.clear();
                scratch.resize(deg + 1, 1.0f64);
                let mut back = vec![1.0f64; deg + 1];
                for k in 0..deg {
                    scratch[k + 1] = scratch[k] * (0.5 * v2c[s + k]).tanh();
                }
                for k in (0..deg).rev() {
                    back[k] = back[k + 1] * (0.5 * v2c[s + k]).tanh();
                }
                for k in 0..deg {
                    let p = (scratch[k] * back[k + 1]).clamp(-0.999_999_999_999, 0.999_999_999_999);
                    c2v[s + k] = 2.0 * p.atanh();
                }
            }
            // variable update
            for v in 0..self.n {
                let mut total = channel_llrs[v];
                for &e in &var_edges[v] {
                    total += c2v[e as usize];
                }
                posteriors[v] = total;
                hard[v] = (total < 0.0) as u8;
                for &e in &var_edges[v] {
                    v2c[e as usize] = total - c2v[e as usize];
                }
            }
            if self.syndrome_ok(&hard) {
                return DecodeOutput { hard, posteriors, converged: true, iterations: iter };
            }
        }
        DecodeOutput { hard, posteriors, converged: false, iterations: max_iters }
    }

    /// Sparse text format: header `n m`, then one check's variable list per
    /// line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for vars in &self.check_to_var {
            let line: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Construction("empty code file".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Construction("bad header".into()))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Construction("bad header".into()))?;
        let mut check_to_var = Vec::with_capacity(m);
        for line in lines.take(m) {
            let vars: std::result::Result<Vec<u32>, _> =
                line.split_whitespace().map(str::parse).collect();
            check_to_var
                .push(vars.map_err(|e| Error::Construction(format!("bad var list: {e}")))?);
        }
        if check_to_var.len() != m {
            return Err(Error::Construction(format!(
                "{} check rows, expected {m}",
                check_to_var.len()
            )));
        }
        let mut var_to_check = vec![Vec::new(); n];
        for (c, vars) in check_to_var.iter().enumerate() {
            for &v in vars {
                var_to_check[v as usize].push(c as u32);
            }
        }
        let encoder = Encoder::build(n, m, &check_to_var)?;
        Ok(Self { n, m, check_to_var, var_to_check, encoder })
    }

    /// Achieved variable-degree histogram `(degree, node count)`.
    pub fn var_degree_histogram(&self) -> Vec<(usize, usize)> {
        let mut map = std::collections::BTreeMap::new();
        for adj in &self.var_to_check {
            *map.entry(adj.len()).or_insert(0usize) += 1;
        }
        map.into_iter().collect()
    }

    /// True if some pair of checks shares two variables (a 4-cycle).
    pub fn has_4cycle(&self) -> bool {
        for vars in &self.var_to_check {
            for (a, &c1) in vars.iter().enumerate() {
                for &c2 in &vars[a + 1..] {
                    let shared = self.check_to_var[c1 as usize]
                        .iter()
                        .filter(|v| self.check_to_var[c2 as usize].contains(v))
                        .count();
                    if shared >= 2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub hard: Vec<u8>,
    pub posteriors: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl Encoder {
    fn build(n: usize, m: usize, check_to_var: &[Vec<u32>]) -> Result<Self> {
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = check_to_var
            .iter()
            .map(|vars| {
                let mut row = vec![0u64; words];
                for &v in vars {
                    row[(v as usize) / 64] ^= 1u64 << (v as usize % 64);
                }
                row
            })
            .collect();

        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut pivot_cols = Vec::with_capacity(m);
        for r in 0..m {
            // reduce against existing pivots
            loop {
                let Some(col) = lowest_set_bit(&rows[r]) else { break };
                match pivot_of_col[col] {
                    Some(pr) => {
                        let (a, b) = split_rows(&mut rows, r, pr);
                        xor_into(a, b);
                    }
                    None => {
                        pivot_of_col[col] = Some(r);
                        pivot_cols.push(col);
                        break;
                    }
                }
            }
            if lowest_set_bit(&rows[r]).is_none() {
                return Err(Error::Construction(format!(
                    "parity-check matrix is rank deficient at row {r}"
                )));
            }
        }
        // backward elimination: clear pivot columns from all other rows
        for r in 0..m {
            let pcol = pivot_cols[r];
            for other in 0..m {
                if other != r && get_bit(&rows[other], pcol) {
                    let (a, b) = split_rows(&mut rows, other, r);
                    xor_into(a, b);
                }
            }
        }
        let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
        let systematic_cols: Vec<usize> = (0..n).filter(|c| !pivot_set.contains(c)).collect();
        // compress each row to message coordinates
        let msg_words = systematic_cols.len().div_ceil(64);
        let reduced: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| {
                let mut out = vec![0u64; msg_words];
                for (k, &col) in systematic_cols.iter().enumerate() {
                    if get_bit(row, col) {
                        out[k / 64] |= 1u64 << (k % 64);
                    }
                }
                out
            })
            .collect();
        Ok(Encoder { rows: reduced, pivot_cols, systematic_cols })
    }
}

fn lowest_set_bit(row: &[u64]) -> Option<usize> {
    for (w, &word) in row.iter().enumerate() {
        if word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
    }
    None
}

fn get_bit(row: &[u64], col: usize) -> bool {
    (row[col / 64] >> (col % 64)) & 1 == 1
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn split_rows(rows: &mut [Vec<u64>], dst: usize, src: usize) -> (&mut [u64], &[u64]) {
    debug_assert_ne!(dst, src);
    if dst < src {
        let (a, b) = rows.split_at_mut(src);
        (&mut a[dst], &b[0])
    } else {
        let (a, b) = rows.split_at_mut(dst);
        (&mut b[0], &a[src])
    }
}

/// Gaussian-approximation EXIT function of a degree-`d` variable node.
pub fn vnd_exit(degree: usize, i_a: f64, i_ch: f64) -> f64 {
    let s_a = j_inverse(i_a);
    let s_ch = j_inverse(i_ch);
    j_function(((degree as f64 - 1.0) * s_a * s_a + s_ch * s_ch).sqrt())
}

/// Gaussian-approximation EXIT function of a degree-`d` check node (duality
/// approximation).
pub fn cnd_exit(degree: usize, i_a: f64) -> f64 {
    1.0 - j_function((degree as f64 - 1.0).sqrt() * j_inverse(1.0 - i_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn table2_rows() {
        let d = table2_distribution(1, CodeRate::Half).unwrap();
        assert_eq!(d.vnd, vec![(2, 0.60), (3, 0.314), (10, 0.086)]);
        assert_eq!(d.cnd, vec![(6, 1.0)]);
        let d = table2_distribution(2, CodeRate::Half).unwrap();
        assert_eq!(d.vnd, vec![(2, 0.60), (3, 0.365), (20, 0.035)]);
        let d = table2_distribution(1, CodeRate::ThreeQuarter).unwrap();
        assert_eq!(d.vnd, vec![(2, 0.80), (3, 0.183), (50, 0.017)]);
        assert_eq!(d.cnd, vec![(12, 1.0)]);
        assert!(table2_distribution(3, CodeRate::Half).is_err());
    }

    #[test]
    fn small_regular_peg() {
        // all-degree-2 graphs are always rank deficient (every column has two
        // ones), so use a mixed 2/3 profile
        let dist =
            DegreeDistribution::new(vec![(2, 0.5), (3, 0.5)], vec![(5, 1.0)], 0.5).unwrap();
        let code = LdpcCode::peg_construct(16, &dist, 1).unwrap();
        assert_eq!(code.m, 8);
        for adj in &code.var_to_check {
            assert!(adj.len() == 2 || adj.len() == 3);
            let mut sorted = adj.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), adj.len(), "duplicate edge");
        }
    }

    #[test]
    fn peg_row1_structure() {
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(1000, &dist, 7).unwrap();
        assert_eq!(code.m, 500);
        let hist = code.var_degree_histogram();
        let (vnd_counts, _) = dist.node_counts(1000).unwrap();
        let mut expect = vnd_counts;
        expect.sort();
        assert_eq!(hist, expect);
        assert!(!code.has_4cycle(), "girth below 6");
        // check degrees concentrate around 6
        for row in &code.check_to_var {
            assert!((5..=7).contains(&row.len()), "check degree {}", row.len());
        }
    }

    #[test]
    fn peg_determinism_and_seed_sensitivity() {
        let dist = table2_distribution(2, CodeRate::Half).unwrap();
        let a = LdpcCode::peg_construct(500, &dist, 3).unwrap();
        let b = LdpcCode::peg_construct(500, &dist, 3).unwrap();
        assert_eq!(a.check_to_var, b.check_to_var);
        let c = LdpcCode::peg_construct(500, &dist, 4).unwrap();
        assert_ne!(a.check_to_var, c.check_to_var);
    }

    #[test]
    fn encode_satisfies_checks_and_linearity() {
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(1000, &dist, 2).unwrap();
        let k = code.message_len();
        let zero = code.encode(&vec![0u8; k]).unwrap();
        assert!(zero.iter().all(|&b| b == 0));
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let m1: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
        let m2: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
        let c1 = code.encode(&m1).unwrap();
        let c2 = code.encode(&m2).unwrap();
        assert!(code.syndrome_ok(&c1));
        assert!(code.syndrome_ok(&c2));
        let msum: Vec<u8> = m1.iter().zip(&m2).map(|(a, b)| a ^ b).collect();
        let csum: Vec<u8> = c1.iter().zip(&c2).map(|(a, b)| a ^ b).collect();
        assert_eq!(code.encode(&msum).unwrap(), csum);
    }

    #[test]
    fn bp_noiseless_converges_immediately() {
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(1000, &dist, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let msg: Vec<u8> = (0..code.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = code.encode(&msg).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect();
        let out = code.bp_decode(&llrs, 10);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.hard, cw);
    }

    #[test]
    fn bp_corrects_single_flip() {
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(1000, &dist, 9).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let msg: Vec<u8> = (0..code.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = code.encode(&msg).unwrap();
        let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 12.0 } else { -12.0 }).collect();
        llrs[137] = -llrs[137];
        let out = code.bp_decode(&llrs, 30);
        assert!(out.converged);
        assert_eq!(out.hard, cw);
    }

    #[test]
    fn serialization_round_trip() {
        let dist = table2_distribution(2, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(200, &dist, 11).unwrap();
        let text = code.to_text();
        let back = LdpcCode::from_text(&text).unwrap();
        assert_eq!(code.check_to_var, back.check_to_var);
        let msg = vec![1u8; code.message_len()];
        assert_eq!(code.encode(&msg).unwrap(), back.encode(&msg).unwrap());
    }

    #[test]
    fn exit_functions_limits() {
        assert_abs_diff_eq!(vnd_exit(3, 1.0 - 1e-12, 0.3), 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(cnd_exit(6, 0.0), 0.0, epsilon = 1e-6);
        // monotone in a-priori MI on a 101-point grid
        let mut prev = -1.0;
        for k in 0..=100 {
            let ia = k as f64 / 100.0 * 0.999;
            let v = vnd_exit(4, ia, 0.4);
            assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn bpsk_awgn_waterfall_with_exit_prediction() {
        // Predict the decoding threshold from the VND/CND EXIT curves before
        // simulating; the finite-length run at Eb/N0 = 3 dB must then show a
        // frame error rate below 10%.
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        let tunnel_open = |ebn0_db: f64| -> bool {
            let ebn0 = 10f64.powf(ebn0_db / 10.0);
            let sigma2 = 1.0 / (2.0 * dist.rate * ebn0); // BPSK noise variance
            let s_ch = 2.0 / sigma2.sqrt();
            let i_ch = j_function(s_ch);
            let mut i_av = 0.0;
            for _ in 0..500 {
                let edge_frac = |d: usize, f: f64| d as f64 * f / dist.avg_var_degree();
                let i_ev: f64 = dist
                    .vnd
                    .iter()
                    .map(|&(d, f)| edge_frac(d, f) * vnd_exit(d, i_av, i_ch))
                    .sum();
                let i_ec: f64 = dist.cnd.iter().map(|&(d, f)| f * cnd_exit(d, i_ev)).sum();
                if i_ec <= i_av + 1e-7 {
                    // the Gaussian-approximation map saturates slightly below
                    // 1; MI above 0.99 is operationally error-free
                    return i_av > 0.99;
                }
                i_av = i_ec;
            }
            i_av > 0.99
        };
        let mut lo = 0.0;
        let mut hi = 3.0;
        assert!(tunnel_open(hi), "EXIT predicts failure even at 3 dB");
        while hi - lo > 0.05 {
            let mid = 0.5 * (lo + hi);
            if tunnel_open(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let predicted_db = 0.5 * (lo + hi);
        assert!(predicted_db < 3.0, "predicted threshold {predicted_db} dB");

        let code = LdpcCode::peg_construct(1000, &dist, 21).unwrap();
        let ebn0 = 10f64.powf(0.3);
        let sigma2 = 1.0 / (2.0 * dist.rate * ebn0);
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let mut frame_errors = 0;
        let frames = 100;
        for _ in 0..frames {
            let msg: Vec<u8> =
                (0..code.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = code.encode(&msg).unwrap();
            let llrs: Vec<f64> = cw
                .iter()
                .map(|&b| {
                    let x = if b == 0 { 1.0 } else { -1.0 };
                    let y = x + sigma2.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
                    2.0 * y / sigma2
                })
                .collect();
            let out = code.bp_decode(&llrs, 50);
            if out.hard != cw {
                frame_errors += 1;
            }
        }
        assert!(
            (frame_errors as f64) / (frames as f64) < 0.10,
            "FER {}/{frames} at Eb/N0 = 3 dB (predicted threshold {predicted_db:.2} dB)",
            frame_errors
        );
    }
}
