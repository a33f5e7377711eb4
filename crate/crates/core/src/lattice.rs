//! Full-rank lattices `TZ^d`: duals, membership, folding into the half-open
//! fundamental domain, and enumeration of coset points inside closed balls.

use num_traits::ToPrimitive;

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{vec_add, vec_regime, vec_sub, Regime, Scalar, Vector};

/// A full-rank lattice with its generator matrix `T` (basis vectors are the
/// columns), determinant and inverse.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    generator: Matrix,
    det: Scalar,
    inverse: Matrix,
}

impl LatticeBasis {
    pub fn new(generator: Matrix) -> Result<LatticeBasis> {
        let (det, inverse) = generator.det_and_inverse()?;
        Ok(LatticeBasis { generator, det, inverse })
    }

    /// Builds from the rows of `T`.
    pub fn from_rows(rows: Vec<Vector>) -> Result<LatticeBasis> {
        LatticeBasis::new(Matrix::from_rows(rows)?)
    }

    /// `Z^d`.
    pub fn integer(dim: usize, regime: Regime) -> LatticeBasis {
        LatticeBasis::new(Matrix::identity(dim, regime)).expect("identity is invertible")
    }

    pub fn diagonal(entries: Vector) -> Result<LatticeBasis> {
        LatticeBasis::new(Matrix::diagonal(entries))
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn det(&self) -> &Scalar {
        &self.det
    }

    pub fn regime(&self) -> Regime {
        self.generator.regime()
    }

    pub fn abs_det_f64(&self) -> f64 {
        self.det.to_f64().abs()
    }

    /// `i`-th basis vector `Te_i`.
    pub fn basis_vector(&self, i: usize) -> Vector {
        self.generator.column(i)
    }

    /// The conjugate lattice `{y : <x,y> in Z for all x in L}`, generated by
    /// `T^{-T}`. Its inverse is `T^T`, so no elimination is needed.
    pub fn dual(&self) -> LatticeBasis {
        let generator = self.inverse.transpose();
        let inverse = self.generator.transpose();
        let det = &Scalar::one(self.det.regime()) / &self.det;
        LatticeBasis { generator, det, inverse }
    }

    /// Coordinates `T^{-1}x`.
    pub fn coordinates(&self, x: &[Scalar]) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(self.inverse.mul_vec(x))
    }

    /// `Tν` for an integer vector.
    pub fn point(&self, nu: &[i64]) -> Vector {
        let regime = self.regime();
        let v: Vector = nu.iter().map(|&n| Scalar::from_int(n, regime)).collect();
        self.generator.mul_vec(&v)
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        Ok(self.coordinates(x)?.iter().all(Scalar::is_integer))
    }

    /// Reduces `omega` into the half-open domain `T[0,1)^d`.
    pub fn fold(&self, omega: &[Scalar]) -> Result<FoldResult> {
        let s = self.coordinates(omega)?;
        let witness: Vec<i64> = s
            .iter()
            .map(|c| c.floor().to_i64().expect("lattice coordinate exceeds i64"))
            .collect();
        let shift = self.point(&witness);
        let gamma = vec_sub(omega, &shift);
        Ok(FoldResult { gamma, witness })
    }

    /// True when both bases generate the same set: `T1^{-1} T2` is an integer
    /// matrix with determinant of modulus one.
    pub fn same_lattice(&self, other: &LatticeBasis) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let m = self.inverse.mul(&other.generator);
        let integral = m.rows().iter().all(|r| r.iter().all(Scalar::is_integer));
        integral && (self.det.abs().approx_eq(&other.det.abs()))
    }

    /// Sum of basis vector lengths; bounds the diameter of the fundamental
    /// parallelepiped.
    pub fn cell_diameter(&self) -> f64 {
        (0..self.dim())
            .map(|j| {
                self.basis_vector(j)
                    .iter()
                    .map(|x| x.to_f64().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Row 1-norms of `T^{-1}` in `f64`; used for coordinate boxes.
    fn inverse_row_norms(&self) -> Vec<f64> {
        self.inverse
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().abs()).sum())
            .collect()
    }

    pub fn approx_eq(&self, other: &LatticeBasis) -> bool {
        self.generator.approx_eq(&other.generator)
    }
}

/// Result of [`LatticeBasis::fold`]: `omega = gamma + T*witness` with
/// `T^{-1} gamma` in `[0,1)^d`.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub gamma: Vector,
    pub witness: Vec<i64>,
}

/// A translated lattice `translate + L`.
#[derive(Debug, Clone)]
pub struct LatticeCoset {
    lattice: LatticeBasis,
    translate: Vector,
}

impl LatticeCoset {
    pub fn new(lattice: LatticeBasis, translate: Vector) -> Result<LatticeCoset> {
        check_dim(lattice.dim(), translate.len())?;
        Ok(LatticeCoset { lattice, translate })
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    pub fn translate(&self) -> &[Scalar] {
        &self.translate
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn regime(&self) -> Regime {
        self.lattice.regime().join(vec_regime(&self.translate))
    }

    /// Same point set with the translate reduced into `T[0,1)^d`.
    pub fn normalized(&self) -> LatticeCoset {
        let folded = self.lattice.fold(&self.translate).expect("dimension checked");
        LatticeCoset { lattice: self.lattice.clone(), translate: folded.gamma }
    }

    /// Same point set, represented with another basis of the same lattice.
    pub fn with_basis(&self, lattice: LatticeBasis) -> LatticeCoset {
        LatticeCoset { lattice, translate: self.translate.clone() }.normalized()
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        self.lattice.contains(&vec_sub(x, &self.translate))
    }

    pub fn same_coset(&self, other: &LatticeCoset) -> bool {
        self.lattice.same_lattice(&other.lattice)
            && self
                .lattice
                .contains(&vec_sub(&self.translate, &other.translate))
                .unwrap_or(false)
    }

    /// Per-coordinate integer ranges that provably contain every `ν` with
    /// `|translate + Tν - center| <= radius`.
    fn coordinate_box(&self, center: &[Scalar], radius: f64) -> Vec<(i64, i64)> {
        let offset = vec_sub(center, &self.translate);
        let s = self.lattice.inverse.mul_vec(&offset);
        self.lattice
            .inverse_row_norms()
            .iter()
            .zip(&s)
            .map(|(w, si)| {
                let c = si.to_f64();
                let half = w * radius;
                let lo = (c - half).floor() as i64 - 1;
                let hi = (c + half).ceil() as i64 + 1;
                (lo, hi)
            })
            .collect()
    }

    /// All coset points in the closed ball `B(center, radius)`, ordered
    /// lexicographically by their integer coordinates.
    pub fn enumerate(&self, center: &[Scalar], radius: &Scalar) -> Result<Vec<Vector>> {
        check_dim(self.dim(), center.len())?;
        if radius.signum() < 0 {
            return Err(Error::InvalidArgument("negative radius".into()));
        }
        let boxes = self.coordinate_box(center, radius.to_f64());
        let r2 = radius * radius;
        let exact = self.regime() == Regime::Exact
            && vec_regime(center) == Regime::Exact
            && radius.regime() == Regime::Exact;
        let r2f = r2.to_f64();
        let mut out = Vec::new();
        for_each_in_box(&boxes, |nu| {
            let p = vec_add(&self.translate, &self.lattice.point(nu));
            let diff = vec_sub(&p, center);
            let inside = if exact {
                let d2 = diff.iter().fold(Scalar::zero(Regime::Exact), |acc, x| acc + x * x);
                d2.cmp_total(&r2) != std::cmp::Ordering::Greater
            } else {
                let d2: f64 = diff.iter().map(|x| x.to_f64().powi(2)).sum();
                d2 <= r2f * (1.0 + 2.0 * crate::scalar::TAU_EQ) + crate::scalar::TAU_DROP
            };
            if inside {
                out.push(p);
            }
        });
        Ok(out)
    }

    /// Number of coset points in the closed ball, without materializing
    /// them: all but the first coordinate are iterated, the first is solved
    /// from a quadratic and the interval endpoints are rechecked.
    pub fn count_in_ball(&self, center: &[Scalar], radius: f64) -> Result<u64> {
        check_dim(self.dim(), center.len())?;
        if radius < 0.0 {
            return Err(Error::InvalidArgument("negative radius".into()));
        }
        let d = self.dim();
        let g = self.lattice.generator.to_f64_rows();
        let t0: Vec<f64> = self.translate.iter().map(Scalar::to_f64).collect();
        let c: Vec<f64> = center.iter().map(Scalar::to_f64).collect();
        let col0: Vec<f64> = (0..d).map(|i| g[i][0]).collect();
        let a2: f64 = col0.iter().map(|x| x * x).sum();
        let r2 = radius * radius * (1.0 + 2.0 * crate::scalar::TAU_EQ) + crate::scalar::TAU_DROP;
        let boxes = self.coordinate_box(center, radius);
        let rest = &boxes[1..];
        let mut total = 0u64;
        let mut scan = |tail: &[i64]| {
            // b = translate + sum_{j>=1} T e_j nu_j - center
            let b: Vec<f64> = (0..d)
                .map(|i| {
                    t0[i] - c[i] + tail.iter().enumerate().map(|(j, n)| g[i][j + 1] * *n as f64).sum::<f64>()
                })
                .collect();
            let ab: f64 = col0.iter().zip(&b).map(|(x, y)| x * y).sum();
            let b2: f64 = b.iter().map(|x| x * x).sum();
            let disc = ab * ab - a2 * (b2 - r2);
            if disc < 0.0 {
                return;
            }
            let sq = disc.sqrt();
            let inside = |t: i64| {
                let t = t as f64;
                col0.iter().zip(&b).map(|(x, y)| (x * t + y).powi(2)).sum::<f64>() <= r2
            };
            let mut lo = ((-ab - sq) / a2).ceil() as i64;
            let mut hi = ((-ab + sq) / a2).floor() as i64;
            while inside(lo - 1) {
                lo -= 1;
            }
            while lo <= hi && !inside(lo) {
                lo += 1;
            }
            while inside(hi + 1) {
                hi += 1;
            }
            while hi >= lo && !inside(hi) {
                hi -= 1;
            }
            if hi >= lo {
                total += (hi - lo + 1) as u64;
            }
        };
        if rest.is_empty() {
            scan(&[]);
        } else {
            for_each_in_box(rest, |tail| scan(tail));
        }
        Ok(total)
    }
}

/// Visits every integer vector of a box in lexicographic order.
pub(crate) fn for_each_in_box(boxes: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if boxes.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut nu: Vec<i64> = boxes.iter().map(|b| b.0).collect();
    loop {
        f(&nu);
        let mut i = boxes.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if nu[i] < boxes[i].1 {
                nu[i] += 1;
                for (j, b) in boxes.iter().enumerate().skip(i + 1) {
                    nu[j] = b.0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d, Regime::Exact)
    }

    fn v(xs: &[(i64, i64)]) -> Vector {
        xs.iter().map(|&(n, d)| q(n, d)).collect()
    }

    fn skew() -> LatticeBasis {
        LatticeBasis::from_rows(vec![v(&[(2, 1), (1, 1)]), v(&[(0, 1), (3, 1)])]).unwrap()
    }

    #[test]
    fn dual_examples() {
        let l = LatticeBasis::from_rows(vec![v(&[(2, 1)])]).unwrap();
        assert_eq!(l.dual().generator().get(0, 0).to_doc_string(), "1/2");

        let z2 = LatticeBasis::integer(2, Regime::Exact);
        assert!(z2.dual().generator().is_identity());
        assert_eq!(z2.dual().det().to_doc_string(), "1");

        let d = skew().dual();
        let want = [["1/2", "0"], ["-1/6", "1/3"]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert_eq!(&d.generator().get(i, j).to_doc_string(), w);
            }
        }
        assert_eq!(d.det().to_doc_string(), "1/6");
        // <g_i, g*_j> = delta_ij
        let s = skew();
        for i in 0..2 {
            for j in 0..2 {
                let ip = crate::scalar::dot(&s.basis_vector(i), &d.basis_vector(j));
                assert_eq!(ip.to_doc_string(), if i == j { "1" } else { "0" });
            }
        }
    }

    #[test]
    fn membership() {
        let z2 = LatticeBasis::integer(2, Regime::Exact);
        assert!(z2.contains(&v(&[(3, 1), (-5, 1)])).unwrap());
        assert!(!z2.contains(&v(&[(1, 2), (0, 1)])).unwrap());
        assert!(skew().contains(&v(&[(3, 1), (3, 1)])).unwrap());
        assert!(matches!(z2.contains(&v(&[(1, 1)])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fold_examples() {
        let z = LatticeBasis::integer(1, Regime::Exact);
        let f = z.fold(&v(&[(11, 4)])).unwrap();
        assert_eq!(f.gamma[0].to_doc_string(), "3/4");
        assert_eq!(f.witness, vec![2]);

        let z2 = LatticeBasis::integer(2, Regime::Exact);
        let f = z2.fold(&v(&[(0, 1), (0, 1)])).unwrap();
        assert_eq!(f.witness, vec![0, 0]);

        let two = LatticeBasis::diagonal(v(&[(2, 1), (2, 1)])).unwrap();
        let f = two.fold(&v(&[(7, 2), (-1, 2)])).unwrap();
        assert_eq!(f.gamma[0].to_doc_string(), "3/2");
        assert_eq!(f.gamma[1].to_doc_string(), "3/2");
        assert_eq!(f.witness, vec![1, -1]);
    }

    #[test]
    fn enumerate_examples() {
        let z = LatticeCoset::new(LatticeBasis::integer(1, Regime::Exact), v(&[(0, 1)])).unwrap();
        let pts = z.enumerate(&v(&[(0, 1)]), &q(5, 2)).unwrap();
        let got: Vec<String> = pts.iter().map(|p| p[0].to_doc_string()).collect();
        assert_eq!(got, ["-2", "-1", "0", "1", "2"]);

        let half = LatticeCoset::new(LatticeBasis::integer(2, Regime::Exact), v(&[(1, 2), (1, 2)])).unwrap();
        assert_eq!(half.enumerate(&v(&[(0, 1), (0, 1)]), &q(1, 1)).unwrap().len(), 4);

        let rect = LatticeCoset::new(
            LatticeBasis::diagonal(v(&[(2, 1), (3, 1)])).unwrap(),
            v(&[(0, 1), (0, 1)]),
        )
        .unwrap();
        let pts = rect.enumerate(&v(&[(0, 1), (0, 1)]), &q(2, 1)).unwrap();
        let got: Vec<String> = pts
            .iter()
            .map(|p| format!("{},{}", p[0], p[1]))
            .collect();
        assert_eq!(got, ["-2,0", "0,0", "2,0"]);
    }

    #[test]
    fn zero_radius_returns_center_iff_on_coset() {
        let z2 = LatticeCoset::new(LatticeBasis::integer(2, Regime::Exact), v(&[(0, 1), (0, 1)])).unwrap();
        assert_eq!(z2.enumerate(&v(&[(1, 1), (2, 1)]), &q(0, 1)).unwrap().len(), 1);
        assert!(z2.enumerate(&v(&[(1, 2), (2, 1)]), &q(0, 1)).unwrap().is_empty());
    }

    #[test]
    fn count_matches_enumeration() {
        let c = LatticeCoset::new(skew(), v(&[(1, 3), (-1, 5)])).unwrap();
        for r in [0.0, 1.0, 2.5, 7.3, 12.0] {
            let center = v(&[(1, 7), (2, 3)]);
            let n = c.enumerate(&center, &Scalar::Float(r)).unwrap().len() as u64;
            assert_eq!(c.count_in_ball(&center, r).unwrap(), n, "r = {r}");
        }
    }

    #[test]
    fn same_lattice_detects_basis_change() {
        let a = LatticeBasis::integer(2, Regime::Exact);
        let b = LatticeBasis::from_rows(vec![v(&[(1, 1), (1, 1)]), v(&[(0, 1), (1, 1)])]).unwrap();
        assert!(a.same_lattice(&b));
        assert!(!a.same_lattice(&skew()));
    }
}
