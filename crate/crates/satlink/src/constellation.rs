//! Modulation alphabets, joint constellations and bit labelings.
//!
//! All constellations are normalized to unit average energy. Bit labels are
//! stored MSB first; in every concatenated label the bits of signal 1 precede
//! the bits of signal 2.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance used when clustering joint-constellation points into
/// circles of equal modulus. Sums of rotated PSK points are not exactly equal
/// in modulus in floating point.
pub const CIRCLE_TOL: f64 = 1e-9;

/// A labeled complex symbol set with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub points: Vec<Complex64>,
    /// One bit string per point, each of length `log2(points.len())`, 0/1 values.
    pub labels: Vec<Vec<u8>>,
    pub name: String,
}

impl Constellation {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.points.len().trailing_zeros() as usize
    }

    /// Index of the point carrying the given label.
    pub fn index_of_label(&self, label: &[u8]) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// CSV rows `index,re,im,bits` for plotting and cross-checking.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im,bits\n");
        for (i, (p, l)) in self.points.iter().zip(&self.labels).enumerate() {
            let bits: String = l.iter().map(|b| char::from(b'0' + b)).collect();
            out.push_str(&format!("{},{:.15},{:.15},{}\n", i, p.re, p.im, bits));
        }
        out
    }
}

/// The combined symbol set `x1 + gamma2*x2` seen by a two-signal detector.
#[derive(Debug, Clone)]
pub struct JointConstellation {
    /// Point `i1*M2 + i2` is `c1.points[i1] + gamma2*c2.points[i2]`.
    pub points: Vec<Complex64>,
    pub labels: Vec<Vec<u8>>,
    pub gamma2: Complex64,
    /// Ring identifier per point, 0 for the smallest modulus.
    pub circle_index: Vec<usize>,
    pub bits1: usize,
    pub bits2: usize,
}

impl JointConstellation {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits1 + self.bits2
    }

    pub fn n_circles(&self) -> usize {
        self.circle_index.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn index_of_label(&self, label: &[u8]) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The `(x1, x2)` pair that produced joint point `idx`.
    pub fn component_indices(&self, idx: usize, m2: usize) -> (usize, usize) {
        (idx / m2, idx % m2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im,bits,circle\n");
        for i in 0..self.points.len() {
            let bits: String = self.labels[i].iter().map(|b| char::from(b'0' + b)).collect();
            out.push_str(&format!(
                "{},{:.15},{:.15},{},{}\n",
                i, self.points[i].re, self.points[i].im, bits, self.circle_index[i]
            ));
        }
        out
    }
}

fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

fn bits_of(value: usize, width: usize) -> Vec<u8> {
    (0..width).rev().map(|b| ((value >> b) & 1) as u8).collect()
}

/// MPSK with points `e^{j(2*pi*k/M + phase_offset)}`, Gray-labeled in angular
/// order.
pub fn make_psk(m: usize, phase_offset: f64) -> Result<Constellation> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "PSK cardinality must be a power of two >= 2, got {m}"
        )));
    }
    if !phase_offset.is_finite() {
        return Err(Error::InvalidParameter("non-finite phase offset".into()));
    }
    let width = m.trailing_zeros() as usize;
    let points = (0..m)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64 + phase_offset))
        .collect();
    let labels = (0..m).map(|k| bits_of(gray(k), width)).collect();
    Ok(Constellation { points, labels, name: format!("{m}PSK") })
}

/// 4+12 APSK: 4 inner points at `pi/4 + k*pi/2`, 12 outer points equally
/// spaced starting at `pi/12`, radii scaled to unit average energy.
///
/// Label table (4 bits, MSB first): the first two bits Gray-encode the
/// quadrant of the point's angle; the inner point of a quadrant carries
/// suffix `10`, the three outer points carry `00`, `01`, `11` in angular
/// order within the quadrant.
pub fn make_16apsk(ring_ratio: f64) -> Result<Constellation> {
    if !(ring_ratio > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "16APSK ring ratio must exceed 1, got {ring_ratio}"
        )));
    }
    // (4 r1^2 + 12 (rho r1)^2) / 16 = 1
    let r1 = (16.0 / (4.0 + 12.0 * ring_ratio * ring_ratio)).sqrt();
    let r2 = ring_ratio * r1;
    let pi = std::f64::consts::PI;
    let mut points = Vec::with_capacity(16);
    let mut labels = Vec::with_capacity(16);
    for k in 0..4 {
        points.push(Complex64::from_polar(r1, pi / 4.0 + k as f64 * pi / 2.0));
        let mut l = bits_of(gray(k), 2);
        l.extend_from_slice(&[1, 0]);
        labels.push(l);
    }
    let suffix = [[0u8, 0], [0, 1], [1, 1]];
    for k in 0..12 {
        points.push(Complex64::from_polar(r2, pi / 12.0 + k as f64 * pi / 6.0));
        let quadrant = k / 3;
        let mut l = bits_of(gray(quadrant), 2);
        l.extend_from_slice(&suffix[k % 3]);
        labels.push(l);
    }
    Ok(Constellation { points, labels, name: "16APSK".into() })
}

/// Cluster moduli into rings; returns the ring index of each point, 0 for the
/// smallest modulus.
fn assign_circles(points: &[Complex64], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].norm().total_cmp(&points[b].norm()));
    let mut circle = vec![0usize; points.len()];
    let mut current = 0usize;
    for w in 1..order.len() {
        if points[order[w]].norm() - points[order[w - 1]].norm() > tol {
            current += 1;
        }
        circle[order[w]] = current;
    }
    circle
}

/// All `M1*M2` sums `x1 + gamma2*x2` with concatenated labels.
pub fn joint_constellation(
    c1: &Constellation,
    c2: &Constellation,
    gamma2: Complex64,
) -> JointConstellation {
    let m2 = c2.size();
    let mut points = Vec::with_capacity(c1.size() * m2);
    let mut labels = Vec::with_capacity(c1.size() * m2);
    for (p1, l1) in c1.points.iter().zip(&c1.labels) {
        for (p2, l2) in c2.points.iter().zip(&c2.labels) {
            points.push(p1 + gamma2 * p2);
            let mut l = l1.clone();
            l.extend_from_slice(l2);
            labels.push(l);
        }
    }
    let circle_index = assign_circles(&points, CIRCLE_TOL);
    JointConstellation {
        points,
        labels,
        gamma2,
        circle_index,
        bits1: c1.bits_per_symbol(),
        bits2: c2.bits_per_symbol(),
    }
}

/// Joint constellation of two MPSK signals with relative phase `pi/M` and the
/// circle-structured Gray labeling: the first `log2(M/2)` bits select the
/// circle (Gray across modulus-sorted circles), the remaining `log2(2M)` bits
/// Gray-label the angular positions on each circle.
pub fn joint_gray_mapping(m: usize) -> Result<JointConstellation> {
    if m < 4 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "joint Gray mapping needs a power-of-two M >= 4, got {m}"
        )));
    }
    let c1 = make_psk(m, 0.0)?;
    let c2 = make_psk(m, 0.0)?;
    let gamma2 = Complex64::from_polar(1.0, std::f64::consts::PI / m as f64);
    let mut joint = joint_constellation(&c1, &c2, gamma2);

    let n_circles = m / 2;
    let per_circle = 2 * m;
    if joint.n_circles() != n_circles {
        return Err(Error::InvalidParameter(format!(
            "expected {n_circles} circles, found {}",
            joint.n_circles()
        )));
    }
    let circle_bits = n_circles.trailing_zeros() as usize;
    let angle_bits = per_circle.trailing_zeros() as usize;

    for c in 0..n_circles {
        let mut members: Vec<usize> = (0..joint.size())
            .filter(|&i| joint.circle_index[i] == c)
            .collect();
        if members.len() != per_circle {
            return Err(Error::InvalidParameter(format!(
                "circle {c} holds {} points, expected {per_circle}",
                members.len()
            )));
        }
        members.sort_by(|&a, &b| {
            joint.points[a].arg().rem_euclid(std::f64::consts::TAU)
                .total_cmp(&joint.points[b].arg().rem_euclid(std::f64::consts::TAU))
        });
        for (slot, &idx) in members.iter().enumerate() {
            let mut label = bits_of(gray(c), circle_bits);
            label.extend(bits_of(gray(slot), angle_bits));
            joint.labels[idx] = label;
        }
    }
    Ok(joint)
}

/// Unordered pairs of mutually nearest joint-constellation points: `(i, j)` is
/// a neighbor pair when `|p_i - p_j|` is within tolerance of the smaller of the
/// two points' nearest-neighbor distances.
fn neighbor_pairs(points: &[Complex64]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut min_dist = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = (points[i] - points[j]).norm();
                if d < min_dist[i] {
                    min_dist[i] = d;
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (points[i] - points[j]).norm();
            if d <= min_dist[i].min(min_dist[j]) + CIRCLE_TOL {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Neighbor Hamming cost of a candidate user-1 labeling: sum over
/// nearest-neighbor pairs of the joint constellation of the Hamming distance
/// between the user-1 label bits of the two endpoints.
fn remap_cost(
    pairs: &[(usize, usize)],
    m2: usize,
    labels1: &[Vec<u8>],
) -> usize {
    pairs
        .iter()
        .map(|&(a, b)| hamming(&labels1[a / m2], &labels1[b / m2]))
        .sum()
}

/// Permute the labeling of `c1` to minimize the neighbor Hamming cost on the
/// joint constellation, with the user-2 labels held fixed. Exhaustive over all
/// label permutations for `M1 <= 8`, deterministic greedy swap descent
/// otherwise.
pub fn strategy1_remap(
    c1: &Constellation,
    c2: &Constellation,
    gamma2: Complex64,
) -> Result<Constellation> {
    let mag = gamma2.norm();
    if !(mag > 0.5 && mag < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "|gamma2| = {mag} outside (0.5, 2): circle structure is not meaningful"
        )));
    }
    let joint = joint_constellation(c1, c2, gamma2);
    let pairs = neighbor_pairs(&joint.points);
    let m1 = c1.size();
    let m2 = c2.size();

    let mut best_perm: Vec<usize> = (0..m1).collect();
    let apply = |perm: &[usize]| -> Vec<Vec<u8>> {
        perm.iter().map(|&k| c1.labels[k].clone()).collect()
    };
    let mut best_cost = remap_cost(&pairs, m2, &apply(&best_perm));

    if m1 <= 8 {
        let mut perm: Vec<usize> = (0..m1).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let cost = remap_cost(&pairs, m2, &apply(p));
            if cost < best_cost {
                best_cost = cost;
                best_perm = p.to_vec();
            }
        });
    } else {
        // Greedy pairwise-swap descent from the identity assignment.
        let mut perm: Vec<usize> = (0..m1).collect();
        let mut cost = best_cost;
        loop {
            let mut improved = false;
            for a in 0..m1 {
                for b in (a + 1)..m1 {
                    perm.swap(a, b);
                    let c = remap_cost(&pairs, m2, &apply(&perm));
                    if c < cost {
                        cost = c;
                        improved = true;
                    } else {
                        perm.swap(a, b);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        best_perm = perm;
        best_cost = cost;
    }
    let _ = best_cost;
    Ok(Constellation {
        points: c1.points.clone(),
        labels: apply(&best_perm),
        name: format!("{}-remap", c1.name),
    })
}

/// Neighbor Hamming cost of a labeling of `c1` on the joint constellation
/// with `c2` and `gamma2`. Exposed for comparisons against the classical
/// labeling.
pub fn neighbor_hamming_cost(
    c1: &Constellation,
    c2: &Constellation,
    gamma2: Complex64,
) -> usize {
    let joint = joint_constellation(c1, c2, gamma2);
    let pairs = neighbor_pairs(&joint.points);
    remap_cost(&pairs, c2.size(), &c1.labels)
}

fn permute_all<F: FnMut(&[usize])>(perm: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_all(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn qpsk_points_and_gray_labels() {
        let c = make_psk(4, 0.0).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (p, e) in c.points.iter().zip(expect) {
            assert_abs_diff_eq!(p.re, e.re, epsilon = 1e-15);
            assert_abs_diff_eq!(p.im, e.im, epsilon = 1e-15);
        }
        assert_eq!(c.labels, vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 0]]);
    }

    #[test]
    fn psk_rotation_preserves_energy() {
        let c = make_psk(4, std::f64::consts::FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
        for p in &c.points {
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn psk8_gray_adjacency() {
        let c = make_psk(8, 0.0).unwrap();
        for k in 0..8 {
            let d = hamming(&c.labels[k], &c.labels[(k + 1) % 8]);
            assert_eq!(d, 1, "angular neighbors {k} and {} differ in {d} bits", (k + 1) % 8);
        }
    }

    #[test]
    fn psk_rejects_non_power_of_two() {
        assert!(make_psk(6, 0.0).is_err());
        assert!(make_psk(0, 0.0).is_err());
    }

    #[test]
    fn apsk16_normalization_and_rings() {
        let rho = 3.15;
        let c = make_16apsk(rho).unwrap();
        assert_eq!(c.size(), 16);
        assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
        // inner radius solves 4 r1^2 + 12 (rho r1)^2 = 16
        let r1 = (16.0 / (4.0 + 12.0 * rho * rho)).sqrt();
        assert_abs_diff_eq!(c.points[0].norm(), r1, epsilon = 1e-12);
        assert_abs_diff_eq!(c.points[4].norm(), rho * r1, epsilon = 1e-12);
        let mut radii: Vec<f64> = c.points.iter().map(|p| p.norm()).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(radii.len(), 2);
        // labels distinct
        let mut labels = c.labels.clone();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 16);
    }

    #[test]
    fn apsk16_rejects_ratio_below_one() {
        assert!(make_16apsk(1.0).is_err());
        assert!(make_16apsk(0.5).is_err());
    }

    #[test]
    fn joint_two_qpsk_two_circles() {
        let c = make_psk(4, 0.0).unwrap();
        let g = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let j = joint_constellation(&c, &c, g);
        assert_eq!(j.size(), 16);
        assert_eq!(j.n_circles(), 2);
        for circle in 0..2 {
            let members: Vec<usize> =
                (0..16).filter(|&i| j.circle_index[i] == circle).collect();
            assert_eq!(members.len(), 8);
            let mut angles: Vec<f64> = members
                .iter()
                .map(|&i| j.points[i].arg().rem_euclid(std::f64::consts::TAU))
                .collect();
            angles.sort_by(f64::total_cmp);
            for w in 1..8 {
                assert_abs_diff_eq!(
                    angles[w] - angles[w - 1],
                    std::f64::consts::TAU / 8.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn joint_two_8psk_four_circles() {
        let c = make_psk(8, 0.0).unwrap();
        let g = Complex64::from_polar(1.0, std::f64::consts::PI / 8.0);
        let j = joint_constellation(&c, &c, g);
        assert_eq!(j.size(), 64);
        assert_eq!(j.n_circles(), 4);
        for circle in 0..4 {
            assert_eq!(j.circle_index.iter().filter(|&&ci| ci == circle).count(), 16);
        }
    }

    #[test]
    fn joint_degenerate_gain() {
        let c = make_psk(4, 0.0).unwrap();
        let j = joint_constellation(&c, &c, Complex64::new(0.0, 0.0));
        for i1 in 0..4 {
            for i2 in 0..4 {
                let p = j.points[i1 * 4 + i2];
                assert_abs_diff_eq!((p - c.points[i1]).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn joint_matches_brute_force_enumeration() {
        let c1 = make_psk(4, 0.1).unwrap();
        let c2 = make_psk(8, 0.0).unwrap();
        let g = Complex64::new(0.4, 0.3);
        let j = joint_constellation(&c1, &c2, g);
        let mut expected: Vec<Complex64> = Vec::new();
        for p1 in &c1.points {
            for p2 in &c2.points {
                expected.push(p1 + g * p2);
            }
        }
        assert_eq!(j.points.len(), expected.len());
        for (a, b) in j.points.iter().zip(&expected) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    fn circle_members_by_slot(j: &JointConstellation, c: usize) -> Vec<usize> {
        let mut members: Vec<usize> =
            (0..j.size()).filter(|&i| j.circle_index[i] == c).collect();
        members.sort_by(|&a, &b| {
            j.points[a].arg().rem_euclid(std::f64::consts::TAU)
                .total_cmp(&j.points[b].arg().rem_euclid(std::f64::consts::TAU))
        });
        members
    }

    #[test]
    fn joint_gray_mapping_m4_structure() {
        let j = joint_gray_mapping(4).unwrap();
        assert_eq!(j.n_circles(), 2);
        for l in &j.labels {
            assert_eq!(l.len(), 4);
        }
        // on-circle Gray adjacency
        for c in 0..2 {
            let members = circle_members_by_slot(&j, c);
            for s in 0..8 {
                let d = hamming(&j.labels[members[s]], &j.labels[members[(s + 1) % 8]]);
                assert_eq!(d, 1);
            }
        }
        // radial adjacency: same slot, different circle
        let inner = circle_members_by_slot(&j, 0);
        let outer = circle_members_by_slot(&j, 1);
        for s in 0..8 {
            assert_eq!(hamming(&j.labels[inner[s]], &j.labels[outer[s]]), 1);
        }
    }

    #[test]
    fn joint_gray_mapping_rejects_small_m() {
        assert!(joint_gray_mapping(2).is_err());
        assert!(joint_gray_mapping(6).is_err());
    }

    #[test]
    fn remap_beats_classical_gray() {
        let c = make_psk(4, 0.0).unwrap();
        let g = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let remapped = strategy1_remap(&c, &c, g).unwrap();
        let before = neighbor_hamming_cost(&c, &c, g);
        let after = neighbor_hamming_cost(&remapped, &c, g);
        assert!(
            after < before,
            "remap cost {after} not below classical cost {before}"
        );
    }

    #[test]
    fn remap_is_label_permutation() {
        let c = make_psk(4, 0.0).unwrap();
        let g = Complex64::from_polar(0.51, 1.3);
        let remapped = strategy1_remap(&c, &c, g).unwrap();
        let mut a = c.labels.clone();
        let mut b = remapped.labels.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn remap_exhaustive_matches_greedy_oracle_cost() {
        // 4!-permutation oracle over user-1 label assignments.
        let c1 = make_psk(4, 0.0).unwrap();
        let c2 = make_psk(4, 0.0).unwrap();
        let g = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let remapped = strategy1_remap(&c1, &c2, g).unwrap();
        let got = neighbor_hamming_cost(&remapped, &c2, g);
        let mut best = usize::MAX;
        let mut perm: Vec<usize> = (0..4).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let cand = Constellation {
                points: c1.points.clone(),
                labels: p.iter().map(|&k| c1.labels[k].clone()).collect(),
                name: "cand".into(),
            };
            best = best.min(neighbor_hamming_cost(&cand, &c2, g));
        });
        assert_eq!(got, best);
    }

    #[test]
    fn csv_export_shape() {
        let j = joint_gray_mapping(4).unwrap();
        let csv = j.to_csv();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("index,re,im,bits,circle"));
    }
}
