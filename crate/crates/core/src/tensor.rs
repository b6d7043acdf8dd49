//! Fixed-size linear algebra for the planar setting `n = N = 2`.
//!
//! Index convention used everywhere in the crate: a gradient-like matrix
//! `z` is stored as `z[i][k]` with row `i` the component of the target and
//! column `k` the differentiation direction, i.e. `z[i][k] = z_i^k =
//! d_k w_i`. The rank-4 coefficient array of a bilinear form on matrices is
//! stored as `c[k][l][i][j]` and pairs `z_i^k` with `zb_j^l`.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_traits::{Float, FromPrimitive};

use crate::error::{Error, Result};

/// Floating point scalar the math kernels are generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<T>(pub [T; 2]);

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Vec2([x, y])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec2([T::zero(); 2])
    }

    #[inline]
    pub fn x(&self) -> T {
        self.0[0]
    }

    #[inline]
    pub fn y(&self) -> T {
        self.0[1]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.0[0].hypot(self.0[1])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Vec2<U> {
        Vec2([U::lit(self.0[0].as_f64()), U::lit(self.0[1].as_f64())])
    }
}

impl<T> Index<usize> for Vec2<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec2<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2([-self.0[0], -self.0[1]])
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec2([self.0[0] * s, self.0[1] * s])
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Real 2x2 matrix, `m[i][k]` (row = component, column = direction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Mat2<T> {
    #[inline]
    pub fn new(m00: T, m01: T, m10: T, m11: T) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    #[inline]
    pub fn zero() -> Self {
        Mat2([[T::zero(); 2]; 2])
    }

    #[inline]
    pub fn identity() -> Self {
        Mat2([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    /// Frobenius inner product `z . zb = sum_{i,k} z_i^k zb_i^k`.
    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.0[0][0] * o.0[0][0]
            + self.0[0][1] * o.0[0][1]
            + self.0[1][0] * o.0[1][0]
            + self.0[1][1] * o.0[1][1]
    }

    #[inline]
    pub fn frobenius_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn frobenius(&self) -> T {
        self.frobenius_sq().sqrt()
    }

    pub fn transpose(&self) -> Self {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// `(M v)_i = sum_k M[i][k] v_k`.
    pub fn mul_vec(&self, v: &Vec2<T>) -> Vec2<T> {
        Vec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        out
    }

    /// Row-major flattening, `flat[2 i + k] = m[i][k]`.
    #[inline]
    pub fn to_flat(&self) -> [T; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    #[inline]
    pub fn from_flat(v: [T; 4]) -> Self {
        Mat2([[v[0], v[1]], [v[2], v[3]]])
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Mat2<U> {
        let f = self.to_flat();
        Mat2::from_flat([
            U::lit(f[0].as_f64()),
            U::lit(f[1].as_f64()),
            U::lit(f[2].as_f64()),
            U::lit(f[3].as_f64()),
        ])
    }
}

impl<T> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    fn index(&self, (i, k): (usize, usize)) -> &T {
        &self.0[i][k]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat2<T> {
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut T {
        &mut self.0[i][k]
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_flat(), o.to_flat());
        Mat2::from_flat([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_flat(), o.to_flat());
        Mat2::from_flat([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl<T: Scalar> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self * (-T::one())
    }
}

impl<T: Scalar> Mul<T> for Mat2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        let a = self.to_flat();
        Mat2::from_flat([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl<T: Scalar> AddAssign for Mat2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Mat2<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

/// `outer(u, v)[i][k] = u_i v_k`.
#[inline]
pub fn outer<T: Scalar>(u: &Vec2<T>, v: &Vec2<T>) -> Mat2<T> {
    Mat2([[u.0[0] * v.0[0], u.0[0] * v.0[1]], [u.0[1] * v.0[0], u.0[1] * v.0[1]]])
}

/// Coefficients `c[k][l][i][j]` of a bilinear form on 2x2 matrices,
/// `F(z, zb) = sum c[k][l][i][j] z_i^k zb_j^l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form4<T>(pub [[[[T; 2]; 2]; 2]; 2]);

impl<T: Scalar> Form4<T> {
    pub fn zero() -> Self {
        Form4([[[[T::zero(); 2]; 2]; 2]; 2])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut out = Self::zero();
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        out.0[k][l][i][j] = f(k, l, i, j);
                    }
                }
            }
        }
        out
    }

    /// `delta_kl delta_ij`, which acts as the identity under [`Form4::apply`].
    pub fn identity() -> Self {
        Self::from_fn(|k, l, i, j| if k == l && i == j { T::one() } else { T::zero() })
    }

    /// Contraction over the first slot: `(F z)_j^l = sum_{k,i} c[k][l][i][j] z_i^k`.
    pub fn apply(&self, z: &Mat2<T>) -> Mat2<T> {
        let mut out = Mat2::zero();
        for j in 0..2 {
            for l in 0..2 {
                let mut acc = T::zero();
                for k in 0..2 {
                    for i in 0..2 {
                        acc = acc + self.0[k][l][i][j] * z.0[i][k];
                    }
                }
                out.0[j][l] = acc;
            }
        }
        out
    }

    #[inline]
    pub fn pair(&self, z: &Mat2<T>, zb: &Mat2<T>) -> T {
        self.apply(z).dot(zb)
    }

    /// The 4x4 matrix `M[(j,l)][(i,k)]` in row-major flat indices, so that
    /// `flat(F z) = M flat(z)`.
    pub fn to_matrix(&self) -> [[T; 4]; 4] {
        let mut m = [[T::zero(); 4]; 4];
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        m[2 * j + l][2 * i + k] = self.0[k][l][i][j];
                    }
                }
            }
        }
        m
    }

    pub fn from_matrix(m: &[[T; 4]; 4]) -> Self {
        Self::from_fn(|k, l, i, j| m[2 * j + l][2 * i + k])
    }

    /// Checks `c[k][l][i][j] = c[l][k][j][i]` up to `tol` (absolute).
    pub fn is_symmetric(&self, tol: T) -> bool {
        let mut ok = true;
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        ok &= (self.0[k][l][i][j] - self.0[l][k][j][i]).abs() <= tol;
                    }
                }
            }
        }
        ok
    }

    /// `(F + F^T) / 2` with respect to the slot swap.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|k, l, i, j| half * (self.0[k][l][i][j] + self.0[l][k][j][i]))
    }

    /// Frobenius norm of the coefficient array (bounds the operator norm).
    pub fn frobenius(&self) -> T {
        let mut acc = T::zero();
        for row in self.to_matrix() {
            for v in row {
                acc = acc + v * v;
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_matrix().iter().flatten().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Add for Form4<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_fn(|k, l, i, j| self.0[k][l][i][j] + o.0[k][l][i][j])
    }
}

impl<T: Scalar> Mul<T> for Form4<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::from_fn(|k, l, i, j| self.0[k][l][i][j] * s)
    }
}

/// `V(xi) = (1 + |xi|^2)^{(p-2)/4} xi` on any flat vector.
pub fn v_map<T: Scalar, const K: usize>(xi: [T; K], p: T) -> Result<[T; K]> {
    if !p.is_finite() || p < T::one() {
        return Err(Error::domain(format!("V-function exponent must be at least 1, got {p}")));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("V-function argument is not finite"));
    }
    let norm_sq = xi.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let scale = (T::one() + norm_sq).powf((p - T::lit(2.0)) / T::lit(4.0));
    Ok(xi.map(|v| v * scale))
}

pub fn v_map_vec<T: Scalar>(xi: &Vec2<T>, p: T) -> Result<Vec2<T>> {
    v_map(xi.0, p).map(Vec2)
}

pub fn v_map_mat<T: Scalar>(xi: &Mat2<T>, p: T) -> Result<Mat2<T>> {
    v_map(xi.to_flat(), p).map(Mat2::from_flat)
}
