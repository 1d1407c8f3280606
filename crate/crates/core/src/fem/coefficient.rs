use std::fmt;
use std::sync::Arc;

use super::quadrature::QuadratureRule;
use crate::mesh::{Mesh, Point};

type MatrixFn = dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync;

/// Symmetric diffusion tensor `a_ij(x)` with its claimed ellipticity constant:
/// `|xi|^2 / lambda <= a(x) xi . xi <= lambda |xi|^2`.
#[derive(Clone)]
pub struct CoefficientField {
    descriptor: String,
    lambda: f64,
    eval: Arc<MatrixFn>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("descriptor", &self.descriptor)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl CoefficientField {
    pub fn new(
        descriptor: impl Into<String>,
        lambda: f64,
        eval: impl Fn(Point) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        CoefficientField {
            descriptor: descriptor.into(),
            lambda,
            eval: Arc::new(eval),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", 1.0, |_| [[1.0, 0.0], [0.0, 1.0]])
    }

    /// Smooth, anisotropic, with a nonzero off-diagonal part.
    pub fn anisotropic() -> Self {
        use std::f64::consts::PI;
        Self::new("anisotropic", 4.0, |p: Point| {
            let (x, y) = (p[0], p[1]);
            let off = 0.25 * x * y;
            [
                [1.0 + 0.5 * (PI * x).sin() * (PI * y).sin(), off],
                [off, 1.0 + 0.5 * (PI * x).cos()],
            ]
        })
    }

    /// Hölder-continuous, only `W^{1,2+beta}` for small `beta` near `x = 1/2`.
    pub fn rough() -> Self {
        Self::new("rough", 1.5, |p: Point| {
            let s = 1.0 + 0.5 * (p[0] - 0.5).abs().powf(0.6);
            [[s, 0.0], [0.0, s]]
        })
    }

    pub fn from_descriptor(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "anisotropic" => Some(Self::anisotropic()),
            "rough" => Some(Self::rough()),
            _ => None,
        }
    }

    pub const BUILTIN: [&'static str; 3] = ["identity", "anisotropic", "rough"];

    /// `c a(x)`; the claimed constant widens to cover the scaled field.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        let lambda = self.lambda * c.max(1.0 / c);
        Self::new(format!("{}*{c}", self.descriptor), lambda, move |p| {
            let a = inner(p);
            [[c * a[0][0], c * a[0][1]], [c * a[1][0], c * a[1][1]]]
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        CoefficientField {
            lambda,
            ..self.clone()
        }
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn eval(&self, p: Point) -> [[f64; 2]; 2] {
        (self.eval)(p)
    }
}

/// Eigenvalues `(min, max)` of a symmetric 2x2 matrix.
pub fn sym_eigenvalues(a: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let rad = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[1][0]).sqrt();
    (mean - rad, mean + rad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub ok: bool,
    /// Smallest constant that would be valid on the sampled points,
    /// `max over x of max(mu_max(x), 1 / mu_min(x))`.
    pub worst_ratio: f64,
    pub worst_point: Point,
    pub symmetric: bool,
}

/// Evaluate `a` at every quadrature point of `mesh` and compare against the
/// claimed ellipticity constant.
pub fn check_ellipticity(coeff: &CoefficientField, mesh: &Mesh, quadrature: &QuadratureRule) -> EllipticityReport {
    let mut worst_ratio = 0.0f64;
    let mut worst_point = [0.0, 0.0];
    let mut symmetric = true;
    for t in 0..mesh.num_triangles() {
        let [p0, p1, p2] = mesh.triangle_points(t);
        for xi in quadrature.points() {
            let x = [
                p0[0] + (p1[0] - p0[0]) * xi[0] + (p2[0] - p0[0]) * xi[1],
                p0[1] + (p1[1] - p0[1]) * xi[0] + (p2[1] - p0[1]) * xi[1],
            ];
            let a = coeff.eval(x);
            if a[0][1] != a[1][0] {
                symmetric = false;
            }
            let (lo, hi) = sym_eigenvalues(a);
            let ratio = if lo > 0.0 { hi.max(1.0 / lo) } else { f64::INFINITY };
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_point = x;
            }
        }
    }
    EllipticityReport {
        ok: symmetric && worst_ratio <= coeff.lambda(),
        worst_ratio,
        worst_point,
        symmetric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square_mesh;

    fn rule() -> QuadratureRule {
        QuadratureRule::with_degree(4).unwrap()
    }

    #[test]
    fn identity_is_tight() {
        let m = generate_square_mesh(3).unwrap();
        let r = check_ellipticity(&CoefficientField::identity(), &m, &rule());
        assert!(r.ok);
        assert_eq!(r.worst_ratio, 1.0);
    }

    #[test]
    fn diagonal_two_half() {
        let m = generate_square_mesh(2).unwrap();
        let a = CoefficientField::new("diag", 2.0, |_| [[2.0, 0.0], [0.0, 0.5]]);
        assert!(check_ellipticity(&a, &m, &rule()).ok);
        let r = check_ellipticity(&a.with_lambda(1.5), &m, &rule());
        assert!(!r.ok);
        assert_eq!(r.worst_ratio, 2.0);
    }

    #[test]
    fn builtins_within_claims() {
        let m = generate_square_mesh(8).unwrap();
        for name in CoefficientField::BUILTIN {
            let c = CoefficientField::from_descriptor(name).unwrap();
            let r = check_ellipticity(&c, &m, &rule());
            assert!(r.ok && r.symmetric, "{name}: {r:?}");
        }
    }

    #[test]
    fn asymmetric_field_flagged() {
        let m = generate_square_mesh(1).unwrap();
        let a = CoefficientField::new("skew", 2.0, |_| [[1.0, 0.1], [0.0, 1.0]]);
        let r = check_ellipticity(&a, &m, &rule());
        assert!(!r.symmetric && !r.ok);
    }
}
