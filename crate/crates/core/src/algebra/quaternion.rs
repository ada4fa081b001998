use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A quaternion `w + xi + yj + zk` with the Hamilton product (`ij = k`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product of the four components.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// The imaginary part, dropping the real component.
    pub fn imaginary(self) -> ImaginaryQuaternion {
        ImaginaryQuaternion { x: self.x, y: self.y, z: self.z }
    }

    pub fn is_zero(self) -> bool {
        self.w == 0.0 && self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    /// Multiplicative inverse; `None` for the zero quaternion.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            None
        } else {
            Some(self.conj().scale(1.0 / n))
        }
    }

    /// Component by index in the fixed basis order `(1, i, j, k)`.
    pub fn component(self, a: usize) -> f64 {
        match a {
            0 => self.w,
            1 => self.x,
            2 => self.y,
            3 => self.z,
            _ => panic!("quaternion component index {a} out of range"),
        }
    }

    /// Basis element by index in the order `(1, i, j, k)`.
    pub fn basis(a: usize) -> Self {
        match a {
            0 => Quaternion::ONE,
            1 => Quaternion::I,
            2 => Quaternion::J,
            3 => Quaternion::K,
            _ => panic!("quaternion basis index {a} out of range"),
        }
    }
}

/// Hamilton product.
pub(crate) fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Quaternion) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// A purely imaginary quaternion `xi + yj + zk`.
///
/// Closed under the commutator; embeds into [`Quaternion`] with `w = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryQuaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ImaginaryQuaternion {
    pub const ZERO: ImaginaryQuaternion = ImaginaryQuaternion { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        ImaginaryQuaternion { x, y, z }
    }

    pub fn embed(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Commutator `[a, b] = ab - ba`; purely imaginary for imaginary inputs.
    pub fn commutator(self, other: Self) -> Self {
        let p = self.embed() * other.embed();
        let q = other.embed() * self.embed();
        (p - q).imaginary()
    }

    pub fn scale(self, s: f64) -> Self {
        ImaginaryQuaternion::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn components(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for ImaginaryQuaternion {
    type Output = ImaginaryQuaternion;
    fn add(self, rhs: Self) -> Self {
        ImaginaryQuaternion::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for ImaginaryQuaternion {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for ImaginaryQuaternion {
    type Output = ImaginaryQuaternion;
    fn sub(self, rhs: Self) -> Self {
        ImaginaryQuaternion::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for ImaginaryQuaternion {
    type Output = ImaginaryQuaternion;
    fn neg(self) -> Self {
        ImaginaryQuaternion::new(-self.x, -self.y, -self.z)
    }
}
