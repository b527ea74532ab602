//! Small dense square matrices with exact rational or polynomial entries.

use std::fmt;

use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    n: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix { n, data: vec![Scalar::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::one();
        }
        m
    }

    /// Row-major construction; panics unless `rows` is square.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Matrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect()).collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.n, o.n);
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.n, o.n);
        Matrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &Matrix) -> Matrix {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..self.n {
            acc += self.get(i, i);
        }
        acc
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).recip();
            for j in 0..n {
                a.data[col * n + j] = a.get(col, j) * &p;
                inv.data[col * n + j] = inv.get(col, j) * &p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] = a.get(r, j) - &(&f * a.get(col, j));
                    inv.data[r * n + j] = inv.get(r, j) - &(&f * inv.get(col, j));
                }
            }
        }
        Some(inv)
    }

    pub fn to_poly(&self) -> PolyMatrix {
        PolyMatrix {
            n: self.n,
            data: self.data.iter().map(|c| Poly::constant(c.clone())).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", r.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Row-reduced echelon data for expressing vectors in a fixed basis.
#[derive(Clone, Debug)]
pub struct Coordinates {
    dim: usize,
    len: usize,
    /// `dual[a]` is a covector with `dual[a] · basis[b] = δ_ab`.
    dual: Vec<Vec<Scalar>>,
    basis: Vec<Vec<Scalar>>,
}

impl Coordinates {
    /// `None` if the vectors are linearly dependent.
    pub fn new(basis: &[Vec<Scalar>]) -> Option<Coordinates> {
        let dim = basis.len();
        let len = basis.first().map_or(0, Vec::len);
        // Solve for the dual covectors via Gram matrix G = B Bᵀ, dual = G⁻¹ B.
        let mut gram = Matrix::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = Scalar::zero();
                for k in 0..len {
                    acc += &(&basis[a][k] * &basis[b][k]);
                }
                gram.set(a, b, acc);
            }
        }
        let ginv = if dim == 0 { Matrix::zeros(0) } else { gram.inverse()? };
        let dual = (0..dim)
            .map(|a| {
                (0..len)
                    .map(|k| {
                        let mut acc = Scalar::zero();
                        for b in 0..dim {
                            acc += &(ginv.get(a, b) * &basis[b][k]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Some(Coordinates { dim, len, dual, basis: basis.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of a constant vector, or `None` if outside the span.
    pub fn solve(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(v.len(), self.len);
        let coords: Vec<Scalar> = self
            .dual
            .iter()
            .map(|d| {
                let mut acc = Scalar::zero();
                for (x, y) in d.iter().zip(v) {
                    if !y.is_zero() {
                        acc += &(x * y);
                    }
                }
                acc
            })
            .collect();
        for k in 0..self.len {
            let mut acc = Scalar::zero();
            for (a, c) in coords.iter().enumerate() {
                acc += &(c * &self.basis[a][k]);
            }
            if acc != v[k] {
                return None;
            }
        }
        Some(coords)
    }

    /// Coordinates of a vector with polynomial entries, or `None` if outside the span.
    pub fn solve_poly(&self, v: &[Poly]) -> Option<Vec<Poly>> {
        assert_eq!(v.len(), self.len);
        let coords: Vec<Poly> = self
            .dual
            .iter()
            .map(|d| {
                let mut acc = Poly::zero();
                for (x, y) in d.iter().zip(v) {
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc.add(&y.scale(x));
                    }
                }
                acc
            })
            .collect();
        for k in 0..self.len {
            let mut acc = Poly::zero();
            for (a, c) in coords.iter().enumerate() {
                if !self.basis[a][k].is_zero() {
                    acc = acc.add(&c.scale(&self.basis[a][k]));
                }
            }
            if acc != v[k] {
                return None;
            }
        }
        Some(coords)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(n: usize) -> PolyMatrix {
        PolyMatrix { n, data: vec![Poly::zero(); n * n] }
    }

    pub fn identity(n: usize) -> PolyMatrix {
        Matrix::identity(n).to_poly()
    }

    pub fn from_entries(n: usize, data: Vec<Poly>) -> PolyMatrix {
        assert_eq!(data.len(), n * n);
        PolyMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Poly] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }

    pub fn add(&self, o: &PolyMatrix) -> PolyMatrix {
        PolyMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &PolyMatrix) -> PolyMatrix {
        PolyMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> PolyMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn mul(&self, o: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut data = vec![Poly::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        data[i * n + j] = data[i * n + j].add(&a.mul(b));
                    }
                }
            }
        }
        PolyMatrix { n, data }
    }

    /// Strictly upper or strictly lower triangular.
    pub fn is_strictly_triangular(&self) -> bool {
        let n = self.n;
        let upper = (0..n).all(|i| (0..=i).all(|j| self.get(i, j).is_zero()));
        let lower = (0..n).all(|i| (i..n).all(|j| self.get(i, j).is_zero()));
        upper || lower
    }

    /// `exp(N)` for nilpotent `N`, as a finite series; `None` if `N^size ≠ 0`.
    pub fn exp_nilpotent(&self) -> Option<PolyMatrix> {
        let n = self.n;
        let mut acc = PolyMatrix::identity(n);
        let mut power = PolyMatrix::identity(n);
        for k in 1..=n {
            power = power.mul(self).scale(&Scalar::new(1, k as i64));
            if power.is_zero() {
                return Some(acc);
            }
            acc = acc.add(&power);
        }
        if power.mul(self).is_zero() {
            Some(acc)
        } else {
            None
        }
    }

    /// `log(U)` for unipotent `U` (so `U − I` nilpotent); `None` otherwise.
    pub fn log_unipotent(&self) -> Option<PolyMatrix> {
        let n = self.n;
        let m = self.sub(&PolyMatrix::identity(n));
        let mut acc = PolyMatrix::zeros(n);
        let mut power = PolyMatrix::identity(n);
        for k in 1..=n {
            power = power.mul(&m);
            if power.is_zero() {
                return Some(acc);
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale(&Scalar::new(sign, k as i64)));
        }
        if power.mul(&m).is_zero() {
            Some(acc)
        } else {
            None
        }
    }

    pub fn shift_coords(&self, point: &[Scalar], order: i16) -> PolyMatrix {
        self.map(|p| p.shift_coords(point, order))
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", r.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_ints(&[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert!(Matrix::from_ints(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn coordinates_in_span() {
        let basis = vec![
            vec![Scalar::from_int(1), Scalar::from_int(1), Scalar::zero()],
            vec![Scalar::zero(), Scalar::from_int(1), Scalar::from_int(1)],
        ];
        let c = Coordinates::new(&basis).unwrap();
        let v = vec![Scalar::from_int(2), Scalar::from_int(5), Scalar::from_int(3)];
        assert_eq!(c.solve(&v).unwrap(), vec![Scalar::from_int(2), Scalar::from_int(3)]);
        assert!(c.solve(&[Scalar::one(), Scalar::zero(), Scalar::zero()]).is_none());
        assert!(Coordinates::new(&[basis[0].clone(), basis[0].clone()]).is_none());
    }

    #[test]
    fn unipotent_exp_log() {
        let x: Poly = "x1".parse().unwrap();
        let n = PolyMatrix::from_entries(
            3,
            vec![
                Poly::zero(), x.clone(), Poly::int(1),
                Poly::zero(), Poly::zero(), x.clone(),
                Poly::zero(), Poly::zero(), Poly::zero(),
            ],
        );
        assert!(n.is_strictly_triangular());
        let g = n.exp_nilpotent().unwrap();
        let ginv = n.scale(&Scalar::from_int(-1)).exp_nilpotent().unwrap();
        assert_eq!(g.mul(&ginv), PolyMatrix::identity(3));
        assert_eq!(g.log_unipotent().unwrap(), n);
        // (0,2) entry of exp(N) is 1 + x1²/2
        assert_eq!(g.get(0, 2), &"1 + x1^2/2".parse::<Poly>().unwrap());
    }
}
