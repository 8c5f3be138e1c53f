//! Hyperboloid chart of the curvature −1 plane.
//!
//! Points are vectors `(x0, x1, x2)` with `⟨X, X⟩ = −1`, `x0 > 0`, under the
//! bilinear form `⟨X, Y⟩ = −x0·y0 + x1·y1 + x2·y2`. Isometries are 3×3 matrices
//! preserving the form; reflections in lines are exact linear involutions.

#[allow(unused_imports)]
use num_traits::Float;
use core::ops::{Add, Mul, Neg, Sub};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ORIGIN: Vec3 = Vec3([1.0, 0.0, 0.0]);

    /// Point on the upper sheet with the given spatial coordinates.
    pub fn on_hyperboloid(x1: f64, x2: f64) -> Self {
        Vec3([(1.0 + x1 * x1 + x2 * x2).sqrt(), x1, x2])
    }

    /// Re-projects onto the upper sheet by recomputing the time coordinate.
    pub fn renormalized(self) -> Self {
        Self::on_hyperboloid(self.0[1], self.0[2])
    }

    pub fn minkowski(self, other: Vec3) -> f64 {
        -self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    /// Spacelike unit normal of the line through two points, oriented so that
    /// `witness` lies on the negative side.
    pub fn line_normal(a: Vec3, b: Vec3, witness: Vec3) -> Vec3 {
        // J (a × b) is form-orthogonal to both a and b.
        let c = [
            a.0[1] * b.0[2] - a.0[2] * b.0[1],
            a.0[2] * b.0[0] - a.0[0] * b.0[2],
            a.0[0] * b.0[1] - a.0[1] * b.0[0],
        ];
        let n = Vec3([-c[0], c[1], c[2]]);
        let n = n.scale(1.0 / n.minkowski(n).sqrt());
        if n.minkowski(witness) > 0.0 {
            -n
        } else {
            n
        }
    }

    /// Unit tangent at `self` pointing to `towards`.
    pub fn tangent_towards(self, towards: Vec3) -> Vec3 {
        let c = -self.minkowski(towards);
        let t = towards - self.scale(c);
        t.scale(1.0 / t.minkowski(t).sqrt())
    }

    /// Point at curvature −1 arclength `len` along the geodesic with unit tangent `tangent`.
    pub fn march(self, tangent: Vec3, len: f64) -> Vec3 {
        self.scale(len.cosh()) + tangent.scale(len.sinh())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        [self.0[1], self.0[2]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let [x1, x2] = <[f64; 2]>::deserialize(d)?;
        Ok(Vec3::on_hyperboloid(x1, x2))
    }
}

/// Curvature −1 distance. Uses the chord form `2·asinh(|X−Y|/2)`, which keeps
/// short distances accurate far from the chart origin.
pub fn unit_distance(a: Vec3, b: Vec3) -> f64 {
    let d = a - b;
    let q = d.minkowski(d).max(0.0);
    2.0 * (q.sqrt() / 2.0).asinh()
}

/// Derivative of [`unit_distance`] with respect to a motion `da` of `a`.
/// Returns 0 at coincident points, where the distance is not differentiable.
pub fn unit_distance_derivative(a: Vec3, b: Vec3, da: Vec3) -> f64 {
    let d = a - b;
    let q = d.minkowski(d).max(0.0);
    let r = q.sqrt();
    if r < 1e-300 {
        return 0.0;
    }
    d.minkowski(da) / (r * (1.0 + q / 4.0).sqrt())
}

/// Linear map preserving the Minkowski form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry(pub [[f64; 3]; 3]);

impl Isometry {
    pub const IDENTITY: Isometry = Isometry([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Reflection in the line with spacelike unit normal `n`: `X ↦ X − 2⟨X,n⟩n`.
    pub fn reflection(n: Vec3) -> Self {
        let jn = [-n.0[0], n.0[1], n.0[2]];
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                *cell = id - 2.0 * n.0[i] * jn[j];
            }
        }
        Isometry(m)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    /// Largest entrywise deviation from another map.
    pub fn max_deviation(&self, other: &Isometry) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, o: Isometry) -> Isometry {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Isometry(m)
    }
}

/// Point at fraction `lambda` of the way from `a` to `b` along their geodesic.
pub fn interpolate(a: Vec3, b: Vec3, lambda: f64) -> Vec3 {
    let d = unit_distance(a, b);
    if d < 1e-14 {
        return a;
    }
    a.march(a.tangent_towards(b), lambda * d).renormalized()
}
