//! Small fixed-size vector and 3×3 complex tensor helpers.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const CZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm3(a: &Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cnorm3(a: &CVec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_to_cvec(a: &Vec3) -> CVec3 {
    [a[0].into(), a[1].into(), a[2].into()]
}

/// `conj(a) · b`
pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// Row-major 3×3 complex tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDyadic(pub [[Complex64; 3]; 3]);

impl Default for ComplexDyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl ComplexDyadic {
    pub fn zero() -> Self {
        Self([[CZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::scaled_identity(Complex64::new(1.0, 0.0))
    }

    pub fn scaled_identity(s: Complex64) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = s;
        }
        m
    }

    /// `a ⊗ b` for real vectors.
    pub fn outer(a: &Vec3, b: &Vec3) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (a[i] * b[j]).into();
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z = f(*z);
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn mul_vec(&self, v: &CVec3) -> CVec3 {
        let mut out = [CZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2];
        }
        out
    }

    pub fn column(&self, j: usize) -> CVec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn from_columns(cols: [CVec3; 3]) -> Self {
        let mut m = Self::zero();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = col[i];
            }
        }
        m
    }

    /// `conj(u) · self · v`
    pub fn sandwich(&self, u: &CVec3, v: &CVec3) -> Complex64 {
        cdot(u, &self.mul_vec(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn imag_part(&self) -> Self {
        self.map(|z| Complex64::new(z.im, 0.0))
    }
}

impl Add for ComplexDyadic {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self;
        m += rhs;
        m
    }
}

impl AddAssign for ComplexDyadic {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for ComplexDyadic {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl Mul for ComplexDyadic {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}
