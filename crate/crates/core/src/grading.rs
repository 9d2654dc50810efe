//! The G-grading (arrows modulo face relations) and the ℤ-lift of the ℤ₂-grading.

use crate::surface::{CombinatorialMap, Dart};
use serde::Serialize;

pub type IntMatrix = Vec<Vec<i128>>;

/// Row-style Hermite reduction: returns (H, U) with U·A = H, U unimodular and H
/// in row echelon form with positive pivots.
pub fn hermite(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut h = a.clone();
    let mut u: IntMatrix = (0..rows).map(|i| (0..rows).map(|j| i128::from(i == j)).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // gcd-eliminate column c below row r
        loop {
            let nz: Vec<usize> = (r..rows).filter(|&i| h[i][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| h[i][c].abs()).unwrap();
            h.swap(r, p);
            u.swap(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if h[i][c] != 0 {
                    let q = h[i][c].div_euclid(h[r][c]);
                    for k in 0..cols {
                        h[i][k] = h[i][k].checked_sub(q.checked_mul(h[r][k]).expect("overflow")).expect("overflow");
                    }
                    for k in 0..rows {
                        u[i][k] = u[i][k].checked_sub(q.checked_mul(u[r][k]).expect("overflow")).expect("overflow");
                    }
                    if h[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[r][c] == 0 {
            continue;
        }
        if h[r][c] < 0 {
            h[r].iter_mut().for_each(|x| *x = -*x);
            u[r].iter_mut().for_each(|x| *x = -*x);
        }
        // reduce rows above
        for i in 0..r {
            let q = h[i][c].div_euclid(h[r][c]);
            if q != 0 {
                for k in 0..cols {
                    h[i][k] -= q * h[r][k];
                }
                for k in 0..rows {
                    u[i][k] -= q * u[r][k];
                }
            }
        }
        r += 1;
    }
    (h, u)
}

/// Rank over ℚ of an integer matrix.
pub fn int_rank(a: &IntMatrix) -> usize {
    let (h, _) = hermite(a);
    h.iter().filter(|row| row.iter().any(|&x| x != 0)).count()
}

/// Basis of the integer left kernel {y : y·A = 0}.
pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let (h, u) = hermite(a);
    h.iter()
        .zip(u)
        .filter(|(row, _)| row.iter().all(|&x| x == 0))
        .map(|(_, urow)| urow)
        .collect()
}

/// Whether `v` lies in the integer row span of the Hermite form `h`.
fn in_row_span(h: &IntMatrix, v: &[i128]) -> bool {
    let mut v = v.to_vec();
    for row in h {
        let Some(c) = row.iter().position(|&x| x != 0) else { continue };
        if v[c] % row[c] != 0 {
            return false;
        }
        let q = v[c] / row[c];
        for (x, y) in v.iter_mut().zip(row) {
            *x -= q * y;
        }
    }
    v.iter().all(|&x| x == 0)
}

#[derive(Debug, Clone)]
pub struct GradingData {
    /// Rows = faces, columns = arrows (indexed by corner dart).
    pub face_relations: IntMatrix,
    face_hermite: IntMatrix,
    pub z_lift: Vec<i64>,
    arcs: usize,
    points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradingReport {
    pub pi_iota_zero: bool,
    pub pi_image_rank: usize,
    pub arcs: usize,
    pub pi_corank_one: bool,
    pub iota_kernel_is_diagonal: bool,
    pub face_lift_sums_ok: bool,
    pub lift_parity_ok: bool,
    pub sum_deg_ell: i64,
    pub twice_abs_chi: i64,
    pub lemma_sign_value: i64,
    pub lemma_sign_discrepancy: bool,
}

impl GradingData {
    pub fn new(map: &CombinatorialMap) -> Self {
        let n = map.dart_count();
        let face_relations: IntMatrix = map
            .faces()
            .iter()
            .map(|f| {
                let mut row = vec![0; n];
                for &c in &f.corners {
                    row[c] += 1;
                }
                row
            })
            .collect();
        let (face_hermite, _) = hermite(&face_relations);
        let mut z_lift = vec![0i64; n];
        for f in map.faces() {
            let k = f.size() as i64;
            let mut sum = 0;
            for &c in &f.corners[..f.size() - 1] {
                z_lift[c] = i64::from(map.corner_degree(c));
                sum += z_lift[c];
            }
            z_lift[*f.corners.last().unwrap()] = k - 2 - sum;
        }
        GradingData { face_relations, face_hermite, z_lift, arcs: map.arc_count(), points: map.point_count() }
    }

    /// Arrow-count vector of a corner list.
    pub fn vector(&self, corners: impl IntoIterator<Item = Dart>) -> Vec<i128> {
        let mut v = vec![0; self.face_relations.first().map_or(0, Vec::len)];
        for c in corners {
            v[c] += 1;
        }
        v
    }

    /// Whether two arrow-count vectors have the same G-degree.
    pub fn same_degree(&self, a: &[i128], b: &[i128]) -> bool {
        let diff: Vec<i128> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        in_row_span(&self.face_hermite, &diff)
    }

    /// π: arrow α ↦ e_h(α) − e_t(α), rows = arrows, columns = arcs.
    fn pi_matrix(&self, map: &CombinatorialMap) -> IntMatrix {
        (0..map.dart_count())
            .map(|d| {
                let mut row = vec![0; self.arcs];
                row[CombinatorialMap::arc_of(map.succ(d))] += 1;
                row[CombinatorialMap::arc_of(d)] -= 1;
                row
            })
            .collect()
    }

    /// ι: marked point m ↦ Σ of arrows around m, rows = points, columns = arrows.
    fn iota_matrix(&self, map: &CombinatorialMap) -> IntMatrix {
        (0..self.points)
            .map(|p| {
                let mut row = vec![0; map.dart_count()];
                for &d in map.rotation(p) {
                    row[d] += 1;
                }
                row
            })
            .collect()
    }

    pub fn report(&self, map: &CombinatorialMap) -> GradingReport {
        let pi = self.pi_matrix(map);
        let iota = self.iota_matrix(map);
        let pi_iota_zero = iota.iter().all(|row| {
            (0..self.arcs).all(|a| row.iter().zip(&pi).map(|(x, prow)| x * prow[a]).sum::<i128>() == 0)
        });
        // image of π on G: faces map to zero, so the rank of π on ℤ^arrows is the rank on G
        let pi_image_rank = int_rank(&pi);
        // ker ι: integer relations c·ι + y·faces = 0, projected to c
        let mut stacked = iota.clone();
        stacked.extend(self.face_relations.iter().cloned());
        let kernel = left_kernel(&stacked);
        let projected: IntMatrix = kernel.iter().map(|k| k[..self.points].to_vec()).collect();
        let (ph, _) = hermite(&projected);
        let nonzero: Vec<&Vec<i128>> = ph.iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
        let iota_kernel_is_diagonal = nonzero.len() == 1 && nonzero[0].iter().all(|&x| x == 1);
        let face_lift_sums_ok = map
            .faces()
            .iter()
            .all(|f| f.corners.iter().map(|&c| self.z_lift[c]).sum::<i64>() == f.size() as i64 - 2);
        let lift_parity_ok = (0..map.dart_count())
            .all(|d| (self.z_lift[d] - i64::from(map.corner_degree(d))).rem_euclid(2) == 0);
        let sum_deg_ell: i64 = self.z_lift.iter().sum();
        let chi = map.euler_char_marked();
        let lemma_sign_value = 4 - 4 * map.genus() - 2 * map.point_count() as i64;
        GradingReport {
            pi_iota_zero,
            pi_image_rank,
            arcs: self.arcs,
            pi_corank_one: pi_image_rank + 1 == self.arcs,
            iota_kernel_is_diagonal,
            face_lift_sums_ok,
            lift_parity_ok,
            sum_deg_ell,
            twice_abs_chi: 2 * chi.abs(),
            lemma_sign_value,
            lemma_sign_discrepancy: lemma_sign_value != sum_deg_ell,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        a.iter()
            .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect())
            .collect()
    }

    #[test]
    fn hermite_transform_reproduces_the_form() {
        let a: IntMatrix = vec![vec![4, 6, 2], vec![2, 3, 1], vec![0, 5, 7], vec![6, 4, -2]];
        let (h, u) = hermite(&a);
        assert_eq!(mat_mul(&u, &a), h);
        assert_eq!(int_rank(&a), 3);
        let k = left_kernel(&a);
        assert_eq!(k.len(), 1);
        assert!(mat_mul(&k, &a)[0].iter().all(|&x| x == 0));
    }

    #[test]
    fn row_span_membership_is_integral() {
        let (h, _) = hermite(&vec![vec![2, 0], vec![0, 3]]);
        assert!(in_row_span(&h, &[4, -3]));
        assert!(!in_row_span(&h, &[1, 0]));
    }
}
