//! Small fixed-size vector helpers over `[f64; 3]`.

pub type Point3 = [f64; 3];

#[inline]
pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm2(a: Point3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Point3) -> f64 {
    norm2(a).sqrt()
}

#[inline]
pub fn dist(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn dist2(a: Point3, b: Point3) -> f64 {
    norm2(sub(a, b))
}

pub fn centroid(points: &[Point3]) -> Point3 {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for a in 0..3 {
            c[a] += p[a];
        }
    }
    scale(c, 1.0 / n)
}

/// Row-major 3x3 rotation applied as `R * p`.
pub type Mat3 = [[f64; 3]; 3];

pub fn rotate(m: &Mat3, p: Point3) -> Point3 {
    [dot(m[0], p), dot(m[1], p), dot(m[2], p)]
}

/// Rotation matrix from a unit quaternion `(w, x, y, z)`.
pub fn quat_to_mat(q: [f64; 4]) -> Mat3 {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Uniformly random rotation (Shoemake's method) driven by three uniforms in `[0, 1)`.
pub fn random_rotation(u: [f64; 3]) -> Mat3 {
    use std::f64::consts::TAU;
    let (s1, s2) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
    let q = [
        s2 * (TAU * u[2]).cos(),
        s1 * (TAU * u[1]).sin(),
        s1 * (TAU * u[1]).cos(),
        s2 * (TAU * u[2]).sin(),
    ];
    quat_to_mat(q)
}
