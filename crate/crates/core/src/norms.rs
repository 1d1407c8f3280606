//! Spatial norms of finite element functions and discrete-in-time norms.
//!
//! Exponents are `f64` with `f64::INFINITY` standing for the sup norm.
//! Integrals use the quadrature rule of the function's space; sup norms take
//! the maximum over quadrature points and Lagrange nodes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fem::{AssembledPair, FeFunction, FeSpace};
use crate::{Error, Result, Scalar};

/// Spatial component of a space-time norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialKind {
    Lq,
    W1q,
    Wm1q,
}

impl fmt::Display for SpatialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpatialKind::Lq => "lq",
            SpatialKind::W1q => "w1q",
            SpatialKind::Wm1q => "wm1q",
        })
    }
}

impl FromStr for SpatialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lq" => Ok(SpatialKind::Lq),
            "w1q" => Ok(SpatialKind::W1q),
            "wm1q" => Ok(SpatialKind::Wm1q),
            other => Err(Error::invalid(format!("unknown spatial norm '{other}'"))),
        }
    }
}

/// `l^p(X)` with `X` one of `L^q`, `W^{1,q}` or the lifted `W^{-1,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    pub kind: SpatialKind,
}

impl NormSpec {
    pub fn new(p: f64, q: f64, kind: SpatialKind) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::invalid(format!("temporal exponent must lie in (1, inf], got {p}")));
        }
        if !(q >= 1.0) {
            return Err(Error::invalid(format!("spatial exponent must lie in [1, inf], got {q}")));
        }
        if kind == SpatialKind::Wm1q && !(q > 1.0 && q.is_finite()) {
            return Err(Error::invalid(format!("negative norm needs 1 < q < inf, got {q}")));
        }
        Ok(NormSpec { p, q, kind })
    }

    /// Spatial norm of one state.
    pub fn spatial(&self, pair: &AssembledPair, u: &FeFunction) -> Result<f64> {
        match self.kind {
            SpatialKind::Lq => Ok(lq_norm(u, self.q)),
            SpatialKind::W1q => Ok(w1q_norm(u, self.q)),
            SpatialKind::Wm1q => neg_norm(pair, u, self.q),
        }
    }

    /// `l^p(X)` norm of a sequence of states.
    pub fn sequence(&self, pair: &AssembledPair, seq: &[FeFunction], tau: f64) -> Result<f64> {
        let values = seq.iter().map(|u| self.spatial(pair, u)).collect::<Result<Vec<_>>>()?;
        Ok(lp_time_norm(&values, self.p, tau))
    }
}

/// Parse `2`, `4.5`, `inf`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|x| *x >= 1.0)
            .ok_or_else(|| Error::invalid(format!("bad exponent '{t}'"))),
    }
}

pub fn format_exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// `(sum_g w_g |v_g|^q)^{1/q}` for values at weighted points; `q = inf` is
/// the max and ignores `weights`.
pub fn weighted_lq(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    debug_assert_eq!(values.len(), weights.len());
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * (v.abs() / scale).powf(q)).sum();
    scale * s.powf(1.0 / q)
}

/// `L^q` norm of a nodal vector over all nodes of `space` (boundary values
/// included, so constants are representable).
pub fn lq_norm_full<T: Scalar>(space: &FeSpace, full: &[T], q: f64) -> f64 {
    let vals: Vec<f64> = space.values_at_quad(full).into_iter().map(Scalar::modulus).collect();
    if q.is_infinite() {
        let nodal = full.iter().fold(0.0, |m: f64, v| m.max(v.modulus()));
        return nodal.max(weighted_lq(&vals, &[], q));
    }
    weighted_lq(&vals, &space.quad_weights(), q)
}

/// `||grad u||_{L^q}` (Euclidean length of the gradient) of a nodal vector over all nodes.
pub fn grad_lq_norm_full<T: Scalar>(space: &FeSpace, full: &[T], q: f64) -> f64 {
    let vals: Vec<f64> = space
        .grads_at_quad(full)
        .into_iter()
        .map(|g| (g[0].modulus_sqr() + g[1].modulus_sqr()).sqrt())
        .collect();
    if q.is_infinite() {
        return weighted_lq(&vals, &[], q);
    }
    weighted_lq(&vals, &space.quad_weights(), q)
}

/// `(||u||_q^q + ||grad u||_q^q)^{1/q}`, the max of the two for `q = inf`.
pub fn w1q_norm_full<T: Scalar>(space: &FeSpace, full: &[T], q: f64) -> f64 {
    let a = lq_norm_full(space, full, q);
    let b = grad_lq_norm_full(space, full, q);
    if q.is_infinite() {
        a.max(b)
    } else {
        let s = a.max(b);
        if s == 0.0 {
            0.0
        } else {
            s * ((a / s).powf(q) + (b / s).powf(q)).powf(1.0 / q)
        }
    }
}

pub fn lq_norm<T: Scalar>(u: &FeFunction<T>, q: f64) -> f64 {
    lq_norm_full(u.space(), &u.full_nodal(), q)
}

pub fn grad_lq_norm<T: Scalar>(u: &FeFunction<T>, q: f64) -> f64 {
    grad_lq_norm_full(u.space(), &u.full_nodal(), q)
}

pub fn w1q_norm<T: Scalar>(u: &FeFunction<T>, q: f64) -> f64 {
    w1q_norm_full(u.space(), &u.full_nodal(), q)
}

/// Discrete elliptic lift `K Z = M F`.
pub fn elliptic_lift(pair: &AssembledPair, f: &FeFunction) -> Result<FeFunction> {
    pair.check_space(f)?;
    let rhs = pair.mass().mul_vec(f.coeffs());
    FeFunction::new(pair.space().clone(), pair.stiffness_solve(&rhs)?)
}

/// Computable negative norm: `||grad z||_q + ||z||_q` with `z` the discrete
/// elliptic lift of `f`.
pub fn neg_norm(pair: &AssembledPair, f: &FeFunction, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("negative norm needs 1 < q < inf, got {q}")));
    }
    if f.is_zero() {
        pair.check_space(f)?;
        return Ok(0.0);
    }
    let z = elliptic_lift(pair, f)?;
    let full = z.full_nodal();
    Ok(grad_lq_norm_full(pair.space(), &full, q) + lq_norm_full(pair.space(), &full, q))
}

/// `(tau sum_n v_n^p)^{1/p}`, or `max_n v_n` for `p = inf`.
pub fn lp_time_norm(values: &[f64], p: f64, tau: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * (tau * s).powf(1.0 / p)
}

/// `L^q` norm of the pointwise square function `(sum_j |w_j|^2)^{1/2}`, each
/// `w_j` given by its values at the quadrature points of `space`.
pub fn square_function_lq<T: Scalar>(space: &FeSpace, family: &[Vec<T>], q: f64) -> f64 {
    let n = space.num_quad_points();
    let mut s = vec![0.0; n];
    for w in family {
        assert_eq!(w.len(), n);
        for (a, v) in s.iter_mut().zip(w) {
            *a += v.modulus_sqr();
        }
    }
    s.iter_mut().for_each(|x| *x = x.sqrt());
    if q.is_infinite() {
        return weighted_lq(&s, &[], q);
    }
    weighted_lq(&s, &space.quad_weights(), q)
}

/// `||u - u_h||_{L^2}` against a pointwise exact function.
pub fn l2_error(u: &FeFunction, exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let space = u.space();
    let vals = space.values_at_quad(&u.full_nodal());
    let diff: Vec<f64> = space.quad_coords().into_iter().zip(vals).map(|(x, v)| exact(x) - v).collect();
    weighted_lq(&diff, &space.quad_weights(), 2.0)
}

/// `||grad(u - u_h)||_{L^2}` against an exact gradient.
pub fn h1_seminorm_error(u: &FeFunction, grad: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let space = u.space();
    let grads = space.grads_at_quad(&u.full_nodal());
    let diff: Vec<f64> = space
        .quad_coords()
        .into_iter()
        .zip(grads)
        .map(|(x, g)| {
            let e = grad(x);
            ((e[0] - g[0]).powi(2) + (e[1] - g[1]).powi(2)).sqrt()
        })
        .collect();
    weighted_lq(&diff, &space.quad_weights(), 2.0)
}

/// Serde adapters writing `f64::INFINITY` as the string `"inf"`, since JSON
/// numbers cannot carry it.
pub mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else {
            Repr::Text(super::format_exponent(x))
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => super::parse_exponent(&t).map_err(E::custom),
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            x.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(|v| to_repr(*v)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }
}
