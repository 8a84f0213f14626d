//! Tensor fields over a single coordinate chart.
//!
//! Every field evaluates to jets, so one level of coordinate derivatives is
//! always available to the differential operators downstream. Composite
//! fields (an endomorphism applied to a vector field, a lowered index, a
//! linear combination) are closures over their ingredients and therefore stay
//! jet-evaluable; no symbolic differentiation ever happens.

use crate::error::{Error, Result};
use crate::exprlang::{self, Expr};
use crate::jets::Jet;
use crate::linalg::{self, MatJ};
use crate::sample::{Residuals, Sampler, Tol, DET_FLOOR};
use std::sync::Arc;

/// One coordinate chart: names plus the sampling box.
#[derive(Debug, Clone)]
pub struct Chart {
    pub names: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Chart {
    pub fn new(names: Vec<String>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Chart> {
        if names.is_empty() {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        if names.len() != lo.len() || names.len() != hi.len() {
            return Err(Error::InvalidChart("coordinate/bounds lengths differ".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        for (i, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidChart(format!("coordinate {i}: bad box [{a}, {b}]")));
            }
        }
        Ok(Chart { names, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn sampler(&self, count: usize, seed: u64) -> Result<Sampler> {
        Sampler::uniform(&self.lo, &self.hi, count, seed)
    }

    /// Evaluate a parsed expression at a point, with coordinates seeded.
    pub fn eval_expr(&self, e: &Expr, x: &[f64]) -> Result<Jet> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                x.len(),
                self.dim()
            )));
        }
        let jets = Jet::seed(x)?;
        let env: Vec<(&str, &Jet)> =
            self.names.iter().map(String::as_str).zip(jets.iter()).collect();
        exprlang::eval(e, &env)
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        exprlang::parse(src, &self.names)
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> Result<Jet> + Send + Sync>;
type TupleFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Jet>> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&[f64]) -> Result<MatJ> + Send + Sync>;

fn check_dim(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() == dim {
        Ok(())
    } else {
        Err(Error::Dimension(format!("point has {} coordinates, field has {}", x.len(), dim)))
    }
}

/// Scalar function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: ScalarFn,
}

impl ScalarField {
    pub fn from_expr(chart: &Chart, e: Expr) -> ScalarField {
        let chart = chart.clone();
        ScalarField {
            dim: chart.dim(),
            f: Arc::new(move |x| chart.eval_expr(&e, x)),
        }
    }

    pub fn from_fn(
        dim: usize,
        f: impl Fn(&[f64]) -> Result<Jet> + Send + Sync + 'static,
    ) -> ScalarField {
        ScalarField { dim, f: Arc::new(f) }
    }

    pub fn constant(dim: usize, v: f64) -> ScalarField {
        ScalarField { dim, f: Arc::new(move |_| Ok(Jet::constant(v, dim))) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<Jet> {
        check_dim(self.dim, x)?;
        (self.f)(x)
    }
}

macro_rules! tuple_field {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone)]
        pub struct $name {
            dim: usize,
            f: TupleFn,
        }

        impl $name {
            pub fn from_exprs(chart: &Chart, comps: Vec<Expr>) -> Result<$name> {
                if comps.len() != chart.dim() {
                    return Err(Error::Dimension(format!(
                        "{} components for a {}-dimensional chart",
                        comps.len(),
                        chart.dim()
                    )));
                }
                let chart = chart.clone();
                Ok($name {
                    dim: chart.dim(),
                    f: Arc::new(move |x| {
                        comps.iter().map(|e| chart.eval_expr(e, x)).collect()
                    }),
                })
            }

            pub fn from_fn(
                dim: usize,
                f: impl Fn(&[f64]) -> Result<Vec<Jet>> + Send + Sync + 'static,
            ) -> $name {
                $name { dim, f: Arc::new(f) }
            }

            pub fn constant(dim: usize, comps: Vec<f64>) -> $name {
                $name {
                    dim,
                    f: Arc::new(move |_| {
                        Ok(comps.iter().map(|&v| Jet::constant(v, dim)).collect())
                    }),
                }
            }

            /// The `i`-th coordinate frame element.
            pub fn frame(dim: usize, i: usize) -> $name {
                let mut comps = vec![0.0; dim];
                comps[i] = 1.0;
                Self::constant(dim, comps)
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn eval(&self, x: &[f64]) -> Result<Vec<Jet>> {
                check_dim(self.dim, x)?;
                (self.f)(x)
            }

            pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(self.eval(x)?.into_iter().map(|j| j.value).collect())
            }

            pub fn add(&self, other: &$name) -> $name {
                let (a, b) = (self.clone(), other.clone());
                $name {
                    dim: self.dim,
                    f: Arc::new(move |x| {
                        let u = a.eval(x)?;
                        let v = b.eval(x)?;
                        Ok(u.iter().zip(&v).map(|(p, q)| p.add(q)).collect())
                    }),
                }
            }

            pub fn scale(&self, c: f64) -> $name {
                let a = self.clone();
                $name {
                    dim: self.dim,
                    f: Arc::new(move |x| Ok(a.eval(x)?.iter().map(|j| j.scale(c)).collect())),
                }
            }

            /// Multiply by a scalar field (jets multiply, so derivatives of
            /// the product stay exact).
            pub fn scale_field(&self, s: &ScalarField) -> $name {
                let (a, s) = (self.clone(), s.clone());
                $name {
                    dim: self.dim,
                    f: Arc::new(move |x| {
                        let f = s.eval(x)?;
                        Ok(a.eval(x)?.iter().map(|j| j.mul(&f)).collect())
                    }),
                }
            }
        }
    };
}

tuple_field!(VectorField, "Vector field: components X^i against the coordinate frame.");
tuple_field!(CovectorField, "Covector field: components η_i against the coordinate coframe.");

macro_rules! matrix_field_core {
    ($name:ident) => {
        impl $name {
            pub fn from_fn(
                dim: usize,
                f: impl Fn(&[f64]) -> Result<MatJ> + Send + Sync + 'static,
            ) -> $name {
                $name { dim, f: Arc::new(f) }
            }

            pub fn constant(dim: usize, rows: Vec<Vec<f64>>) -> $name {
                $name {
                    dim,
                    f: Arc::new(move |_| {
                        Ok(rows
                            .iter()
                            .map(|r| r.iter().map(|&v| Jet::constant(v, dim)).collect())
                            .collect())
                    }),
                }
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn eval(&self, x: &[f64]) -> Result<MatJ> {
                check_dim(self.dim, x)?;
                (self.f)(x)
            }

            pub fn values(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
                Ok(linalg::values_of(&self.eval(x)?))
            }

            fn exprs_to_fn(chart: &Chart, rows: Vec<Vec<Expr>>) -> Result<(usize, MatrixFn)> {
                let n = chart.dim();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Dimension(format!(
                        "matrix entries must form an {n}x{n} array"
                    )));
                }
                let chart = chart.clone();
                Ok((
                    n,
                    Arc::new(move |x| {
                        rows.iter()
                            .map(|r| r.iter().map(|e| chart.eval_expr(e, x)).collect())
                            .collect()
                    }),
                ))
            }
        }
    };
}

/// Endomorphism field J of TM; row-times-column action (JX)^i = J^i_j X^j.
#[derive(Clone)]
pub struct EndoField {
    dim: usize,
    f: MatrixFn,
}

matrix_field_core!(EndoField);

impl EndoField {
    pub fn from_exprs(chart: &Chart, rows: Vec<Vec<Expr>>) -> Result<EndoField> {
        let (dim, f) = Self::exprs_to_fn(chart, rows)?;
        Ok(EndoField { dim, f })
    }

    pub fn identity(dim: usize) -> EndoField {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::constant(dim, rows)
    }

    pub fn apply(&self, x_f: &VectorField) -> VectorField {
        let (j, x_f) = (self.clone(), x_f.clone());
        VectorField::from_fn(self.dim, move |x| {
            Ok(linalg::matj_vec(&j.eval(x)?, &x_f.eval(x)?))
        })
    }

    pub fn apply_values(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::mat_vec(&self.values(x)?, v))
    }

    /// Pointwise composition self ∘ other.
    pub fn compose(&self, other: &EndoField) -> EndoField {
        let (a, b) = (self.clone(), other.clone());
        EndoField::from_fn(self.dim, move |x| Ok(linalg::matj_mul(&a.eval(x)?, &b.eval(x)?)))
    }

    pub fn lincomb(ca: f64, a: &EndoField, cb: f64, b: &EndoField) -> EndoField {
        let (a, b) = (a.clone(), b.clone());
        EndoField::from_fn(a.dim, move |x| {
            Ok(linalg::matj_add(&linalg::matj_scale(&a.eval(x)?, ca), &linalg::matj_scale(&b.eval(x)?, cb)))
        })
    }

    pub fn scale(&self, c: f64) -> EndoField {
        let a = self.clone();
        EndoField::from_fn(self.dim, move |x| Ok(linalg::matj_scale(&a.eval(x)?, c)))
    }

    /// The dual endomorphism J* of T*M applied to a covector:
    /// (J*η)(X) = η(JX), i.e. (J*η)_j = η_i J^i_j.
    pub fn adjoint_apply(&self, eta: &CovectorField) -> CovectorField {
        let (j, eta) = (self.clone(), eta.clone());
        CovectorField::from_fn(self.dim, move |x| {
            let m = j.eval(x)?;
            let e = eta.eval(x)?;
            Ok(linalg::matj_vec(&linalg::matj_transpose(&m), &e))
        })
    }
}

/// Declared symmetry class of a bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Skew,
    General,
}

/// Bilinear form field h_{ij} = h(∂_i, ∂_j).
#[derive(Clone)]
pub struct BilinearField {
    dim: usize,
    f: MatrixFn,
    pub symmetry: Symmetry,
}

impl BilinearField {
    pub fn from_exprs(chart: &Chart, rows: Vec<Vec<Expr>>, symmetry: Symmetry) -> Result<BilinearField> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("matrix entries must form an {n}x{n} array")));
        }
        let chart = chart.clone();
        Ok(BilinearField {
            dim: n,
            f: Arc::new(move |x| {
                rows.iter().map(|r| r.iter().map(|e| chart.eval_expr(e, x)).collect()).collect()
            }),
            symmetry,
        })
    }

    pub fn from_fn(
        dim: usize,
        symmetry: Symmetry,
        f: impl Fn(&[f64]) -> Result<MatJ> + Send + Sync + 'static,
    ) -> BilinearField {
        BilinearField { dim, f: Arc::new(f), symmetry }
    }

    pub fn constant(dim: usize, rows: Vec<Vec<f64>>, symmetry: Symmetry) -> BilinearField {
        BilinearField {
            dim,
            f: Arc::new(move |_| {
                Ok(rows
                    .iter()
                    .map(|r| r.iter().map(|&v| Jet::constant(v, dim)).collect())
                    .collect())
            }),
            symmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<MatJ> {
        check_dim(self.dim, x)?;
        (self.f)(x)
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(linalg::values_of(&self.eval(x)?))
    }

    /// h(X, Y) at a point, from component values.
    pub fn pair_values(&self, x: &[f64], xv: &[f64], yv: &[f64]) -> Result<f64> {
        let h = self.values(x)?;
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += h[i][j] * xv[i] * yv[j];
            }
        }
        Ok(acc)
    }

    /// Lower an index: X ↦ h(X, ·), so (hX)_j = h_{ij} X^i.
    pub fn flat(&self, x_f: &VectorField) -> CovectorField {
        let (h, x_f) = (self.clone(), x_f.clone());
        CovectorField::from_fn(self.dim, move |x| {
            let m = h.eval(x)?;
            let v = x_f.eval(x)?;
            Ok(linalg::matj_vec(&linalg::matj_transpose(&m), &v))
        })
    }

    pub fn flat_values(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let h = self.values(x)?;
        let n = self.dim;
        Ok((0..n).map(|j| (0..n).map(|i| h[i][j] * v[i]).sum()).collect())
    }

    /// Determinant of the component matrix at a point.
    pub fn det_at(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::det(&self.values(x)?))
    }

    /// Check that the declared symmetry class actually holds at `x`.
    pub fn validate_symmetry_at(&self, x: &[f64], tol: &Tol) -> Result<()> {
        let h = self.values(x)?;
        let n = self.dim;
        let scale = h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let sign = match self.symmetry {
            Symmetry::Symmetric => -1.0,
            Symmetry::Skew => 1.0,
            Symmetry::General => {
                return Err(Error::NotSignedSymmetric { point: x.to_vec() });
            }
        };
        for i in 0..n {
            for j in 0..n {
                let r = (h[i][j] + sign * h[j][i]).abs();
                if !tol.ok(r, scale) {
                    return Err(Error::NotSignedSymmetric { point: x.to_vec() });
                }
            }
        }
        Ok(())
    }
}

/// Field of linear maps T*M → TM; (Bη)^i = B^{ij} η_j. The metric inverse and
/// the upper-right blocks of double-bundle operators live here.
#[derive(Clone)]
pub struct CoVecMapField {
    dim: usize,
    f: MatrixFn,
}

matrix_field_core!(CoVecMapField);

impl CoVecMapField {
    pub fn from_exprs(chart: &Chart, rows: Vec<Vec<Expr>>) -> Result<CoVecMapField> {
        let (dim, f) = Self::exprs_to_fn(chart, rows)?;
        Ok(CoVecMapField { dim, f })
    }

    pub fn apply(&self, eta: &CovectorField) -> VectorField {
        let (b, eta) = (self.clone(), eta.clone());
        VectorField::from_fn(self.dim, move |x| Ok(linalg::matj_vec(&b.eval(x)?, &eta.eval(x)?)))
    }

    pub fn apply_values(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::mat_vec(&self.values(x)?, v))
    }
}

/// Inverse of the lowering map of `h`: returns the map η ↦ X with h(X, ·) = η.
/// Evaluation fails with `SingularMetric` wherever |det h| ≤ 1e-10.
pub fn metric_inverse(h: &BilinearField) -> CoVecMapField {
    let h = h.clone();
    CoVecMapField::from_fn(h.dim(), move |x| {
        let m = h.eval(x)?;
        linalg::matj_inverse(&linalg::matj_transpose(&m), x, DET_FLOOR)
    })
}

/// Raise an index with the inverse produced by [`metric_inverse`].
pub fn sharp(h_inv: &CoVecMapField, eta: &CovectorField) -> VectorField {
    h_inv.apply(eta)
}

/// Is J symmetric with respect to h, i.e. h(JX, Y) = h(X, JY) at all sampled
/// points? Equivalent to Jᵀh = hJ on components.
pub fn is_h_symmetric(
    h: &BilinearField,
    j: &EndoField,
    sampler: &Sampler,
    tol: &Tol,
) -> Result<bool> {
    Ok(h_symmetry_residual(h, j, sampler, tol)?.0)
}

/// Same check, returning the residual tracker for reporting.
pub fn h_symmetry_residual(
    h: &BilinearField,
    j: &EndoField,
    sampler: &Sampler,
    tol: &Tol,
) -> Result<(bool, Residuals)> {
    let n = h.dim();
    let mut res = Residuals::new();
    let mut ok = true;
    for x in &sampler.points {
        let hm = h.values(x)?;
        let jm = j.values(x)?;
        let scale = hm.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
            * jm.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for a in 0..n {
            for b in 0..n {
                // h(J∂a, ∂b) - h(∂a, J∂b) = (Jᵀh - hJ)_{ab}
                let lhs: f64 = (0..n).map(|k| jm[k][a] * hm[k][b]).sum();
                let rhs: f64 = (0..n).map(|k| hm[a][k] * jm[k][b]).sum();
                let r = (lhs - rhs).abs();
                res.record(x, || format!("frame pair ({a}, {b})"), r);
                if !tol.ok(r, scale) {
                    ok = false;
                }
            }
        }
    }
    Ok((ok, res))
}

/// Lie bracket of two vector fields, evaluated at a point:
/// [X, Y]^k = X^j ∂_j Y^k − Y^j ∂_j X^k.
pub fn lie_bracket(x_f: &VectorField, y_f: &VectorField, at: &[f64]) -> Result<Vec<f64>> {
    let xs = x_f.eval(at)?;
    let ys = y_f.eval(at)?;
    let n = xs.len();
    Ok((0..n)
        .map(|k| {
            let mut acc = 0.0;
            for j in 0..n {
                acc += xs[j].value * ys[k].partials[j] - ys[j].value * xs[k].partials[j];
            }
            acc
        })
        .collect())
}

/// Nijenhuis tensor of an endomorphism field, evaluated at a point:
/// N_J(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] + J²[X, Y].
/// J is applied twice rather than squared, and JX, JY enter as fields so the
/// brackets see their derivatives.
pub fn nijenhuis_endo(
    j: &EndoField,
    x_f: &VectorField,
    y_f: &VectorField,
    at: &[f64],
) -> Result<Vec<f64>> {
    let jx = j.apply(x_f);
    let jy = j.apply(y_f);
    let t1 = lie_bracket(&jx, &jy, at)?;
    let t2 = j.apply_values(at, &lie_bracket(&jx, y_f, at)?)?;
    let t3 = j.apply_values(at, &lie_bracket(x_f, &jy, at)?)?;
    let t4 = j.apply_values(at, &j.apply_values(at, &lie_bracket(x_f, y_f, at)?)?)?;
    Ok((0..t1.len()).map(|k| t1[k] - t2[k] - t3[k] + t4[k]).collect())
}

/// What squaring to ±Id together with h-compatibility makes of a base
/// endomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    /// h-symmetric and J² = −Id.
    Norden,
    /// h-symmetric and J² = +Id.
    ParaNorden,
    Neither,
}

#[derive(Debug, Clone)]
pub struct BaseClassification {
    pub kind: BaseKind,
    /// Does the Nijenhuis tensor vanish on all sampled frame pairs?
    pub integrable: bool,
    pub square_residual: f64,
    pub symmetry_residual: f64,
    pub nijenhuis_residual: f64,
}

/// Classify a pair (h, J) by sampled squares, h-compatibility and Nijenhuis
/// vanishing.
pub fn classify_base(
    h: &BilinearField,
    j: &EndoField,
    sampler: &Sampler,
    tol: &Tol,
) -> Result<BaseClassification> {
    let n = j.dim();
    let (symmetric, sym_res) = h_symmetry_residual(h, j, sampler, tol)?;
    let mut minus = Residuals::new();
    let mut plus = Residuals::new();
    let mut nij = Residuals::new();
    for x in &sampler.points {
        let jm = j.values(x)?;
        let sq = linalg::mat_mul(&jm, &jm);
        for a in 0..n {
            for b in 0..n {
                let id = if a == b { 1.0 } else { 0.0 };
                minus.record(x, || format!("entry ({a}, {b})"), (sq[a][b] + id).abs());
                plus.record(x, || format!("entry ({a}, {b})"), (sq[a][b] - id).abs());
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let nv = nijenhuis_endo(
                    j,
                    &VectorField::frame(n, a),
                    &VectorField::frame(n, b),
                    x,
                )?;
                for (k, v) in nv.iter().enumerate() {
                    nij.record(x, || format!("N(frame {a}, frame {b}) component {k}"), v.abs());
                }
            }
        }
    }
    let is_minus = tol.ok(minus.max, 1.0);
    let is_plus = tol.ok(plus.max, 1.0);
    let kind = if symmetric && is_minus {
        BaseKind::Norden
    } else if symmetric && is_plus {
        BaseKind::ParaNorden
    } else {
        BaseKind::Neither
    };
    Ok(BaseClassification {
        kind,
        integrable: tol.ok(nij.max, 1.0),
        square_residual: minus.max.min(plus.max),
        symmetry_residual: sym_res.max,
        nijenhuis_residual: nij.max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart2() -> Chart {
        Chart::new(
            vec!["x".into(), "y".into()],
            vec![0.5, 0.5],
            vec![2.0, 2.0],
        )
        .unwrap()
    }

    fn bilinear(chart: &Chart, rows: [[&str; 2]; 2], sym: Symmetry) -> BilinearField {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| chart.parse(s).unwrap()).collect())
            .collect();
        BilinearField::from_exprs(chart, parsed, sym).unwrap()
    }

    fn endo(chart: &Chart, rows: [[&str; 2]; 2]) -> EndoField {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| chart.parse(s).unwrap()).collect())
            .collect();
        EndoField::from_exprs(chart, parsed).unwrap()
    }

    #[test]
    fn chart_rejects_duplicates_and_bad_boxes() {
        assert!(Chart::new(vec!["x".into(), "x".into()], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Chart::new(vec!["x".into()], vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn metric_inverse_of_diagonal_metric() {
        let c = chart2();
        let h = bilinear(&c, [["1", "0"], ["0", "x"]], Symmetry::Symmetric);
        let hinv = metric_inverse(&h);
        let m = hinv.values(&[2.0, 1.0]).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-14);
        assert!((m[1][1] - 0.5).abs() < 1e-14);
        assert!(m[0][1].abs() < 1e-14 && m[1][0].abs() < 1e-14);
    }

    #[test]
    fn singular_metric_is_reported_with_point_and_det() {
        let c = chart2();
        // Degenerate at x = 1: det = x - 1.
        let h = bilinear(&c, [["1", "1"], ["1", "x"]], Symmetry::Symmetric);
        let hinv = metric_inverse(&h);
        match hinv.values(&[1.0, 0.7]) {
            Err(Error::SingularMetric { point, det }) => {
                assert_eq!(point, vec![1.0, 0.7]);
                assert!(det.abs() <= 1e-10);
            }
            other => panic!("expected SingularMetric, got {other:?}"),
        }
    }

    #[test]
    fn sharp_then_flat_round_trips() {
        let c = chart2();
        let h = bilinear(&c, [["1+x^2", "x*y/4"], ["x*y/4", "2+y^2"]], Symmetry::Symmetric);
        let hinv = metric_inverse(&h);
        let eta = CovectorField::constant(2, vec![0.7, -1.3]);
        let x = [1.2, 0.9];
        let up = sharp(&hinv, &eta);
        let down = h.flat(&up);
        let back = down.values(&x).unwrap();
        assert!((back[0] - 0.7).abs() < 1e-12);
        assert!((back[1] + 1.3).abs() < 1e-12);
    }

    #[test]
    fn adjoint_action_on_coframe() {
        // J∂x = -∂y, J∂y = ∂x, so J*dx = dx∘J = dy.
        let j = EndoField::constant(2, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let eta = CovectorField::constant(2, vec![1.0, 0.0]);
        let out = j.adjoint_apply(&eta).values(&[1.0, 1.0]).unwrap();
        assert_eq!(out, vec![0.0, 1.0]);
    }

    #[test]
    fn adjoint_is_dual_under_pairing() {
        // η(JX) = (J*η)(X) for random-ish jets.
        let c = chart2();
        let j = endo(&c, [["x", "y"], ["1", "x*y"]]);
        let eta = CovectorField::constant(2, vec![0.3, -0.8]);
        let xf = VectorField::constant(2, vec![1.1, 0.4]);
        let x = [1.3, 0.8];
        let jx = j.apply(&xf).values(&x).unwrap();
        let ev = eta.values(&x).unwrap();
        let lhs: f64 = ev.iter().zip(&jx).map(|(a, b)| a * b).sum();
        let jstar = j.adjoint_apply(&eta).values(&x).unwrap();
        let xv = xf.values(&x).unwrap();
        let rhs: f64 = jstar.iter().zip(&xv).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn h_symmetry_examples() {
        let c = chart2();
        let sampler = c.sampler(8, 42).unwrap();
        let tol = Tol::default();
        let h = BilinearField::constant(
            2,
            vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            Symmetry::Symmetric,
        );
        let rot = EndoField::constant(2, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert!(is_h_symmetric(&h, &rot, &sampler, &tol).unwrap());
        // Against the Euclidean metric the rotation is skew, not symmetric.
        let euclid =
            BilinearField::constant(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], Symmetry::Symmetric);
        assert!(!is_h_symmetric(&euclid, &rot, &sampler, &tol).unwrap());
    }

    #[test]
    fn lie_bracket_hand_value_and_fd_oracle() {
        let c = chart2();
        // X = y ∂x, Y = ∂y: [X, Y] = -∂x.
        let xf = VectorField::from_exprs(&c, vec![c.parse("y").unwrap(), c.parse("0").unwrap()])
            .unwrap();
        let yf = VectorField::constant(2, vec![0.0, 1.0]);
        let b = lie_bracket(&xf, &yf, &[1.0, 1.0]).unwrap();
        assert!((b[0] + 1.0).abs() < 1e-14);
        assert!(b[1].abs() < 1e-14);

        // FD oracle on a messier pair.
        let xf = VectorField::from_exprs(
            &c,
            vec![c.parse("x*y").unwrap(), c.parse("sin(x)").unwrap()],
        )
        .unwrap();
        let yf = VectorField::from_exprs(
            &c,
            vec![c.parse("y^2").unwrap(), c.parse("x+y").unwrap()],
        )
        .unwrap();
        let at = [1.1, 0.8];
        let b = lie_bracket(&xf, &yf, &at).unwrap();
        let step = crate::jets::FD_STEP;
        let mut oracle = vec![0.0, 0.0];
        for k in 0..2 {
            let mut acc = 0.0;
            for j in 0..2 {
                let mut hi = at;
                let mut lo = at;
                hi[j] += step;
                lo[j] -= step;
                let dy = (yf.values(&hi).unwrap()[k] - yf.values(&lo).unwrap()[k]) / (2.0 * step);
                let dx = (xf.values(&hi).unwrap()[k] - xf.values(&lo).unwrap()[k]) / (2.0 * step);
                acc += xf.values(&at).unwrap()[j] * dy - yf.values(&at).unwrap()[j] * dx;
            }
            oracle[k] = acc;
        }
        for k in 0..2 {
            assert!((b[k] - oracle[k]).abs() < 1e-8, "component {k}");
        }
    }

    #[test]
    fn bracket_is_alternating() {
        let c = chart2();
        let xf = VectorField::from_exprs(
            &c,
            vec![c.parse("x*y").unwrap(), c.parse("x^2").unwrap()],
        )
        .unwrap();
        let b = lie_bracket(&xf, &xf, &[1.4, 0.6]).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn nijenhuis_vanishes_for_constant_endomorphism() {
        let c = chart2();
        let j = EndoField::constant(2, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let xf = VectorField::from_exprs(
            &c,
            vec![c.parse("x*y").unwrap(), c.parse("sin(x)").unwrap()],
        )
        .unwrap();
        let yf = VectorField::from_exprs(
            &c,
            vec![c.parse("y^2").unwrap(), c.parse("x").unwrap()],
        )
        .unwrap();
        let n = nijenhuis_endo(&j, &xf, &yf, &[1.2, 0.9]).unwrap();
        assert!(n.iter().all(|v| v.abs() < 1e-12), "{n:?}");
    }

    #[test]
    fn nijenhuis_matches_termwise_fd_expansion() {
        let c = chart2();
        let j = endo(&c, [["y", "0"], ["0", "1"]]);
        let xf = VectorField::frame(2, 0);
        let yf = VectorField::frame(2, 1);
        let at = [1.3, 0.7];
        let got = nijenhuis_endo(&j, &xf, &yf, &at).unwrap();
        // Independent evaluation: every bracket via finite differences of
        // component functions.
        let step = 1e-6;
        let comp = |f: &VectorField, x: &[f64]| f.values(x).unwrap();
        let fd_bracket = |xf: &VectorField, yf: &VectorField, at: &[f64]| -> Vec<f64> {
            let xv = comp(xf, at);
            let yv = comp(yf, at);
            (0..2)
                .map(|k| {
                    let mut acc = 0.0;
                    for jj in 0..2 {
                        let mut hi = at.to_vec();
                        let mut lo = at.to_vec();
                        hi[jj] += step;
                        lo[jj] -= step;
                        acc += xv[jj] * (comp(yf, &hi)[k] - comp(yf, &lo)[k]) / (2.0 * step);
                        acc -= yv[jj] * (comp(xf, &hi)[k] - comp(xf, &lo)[k]) / (2.0 * step);
                    }
                    acc
                })
                .collect()
        };
        let jx = j.apply(&xf);
        let jy = j.apply(&yf);
        let t1 = fd_bracket(&jx, &jy, &at);
        let t2 = j.apply_values(&at, &fd_bracket(&jx, &yf, &at)).unwrap();
        let t3 = j.apply_values(&at, &fd_bracket(&xf, &jy, &at)).unwrap();
        let t4 = j
            .apply_values(&at, &j.apply_values(&at, &fd_bracket(&xf, &yf, &at)).unwrap())
            .unwrap();
        for k in 0..2 {
            let oracle = t1[k] - t2[k] - t3[k] + t4[k];
            assert!((got[k] - oracle).abs() < 1e-7, "component {k}: {got:?}");
        }
    }

    #[test]
    fn base_classification_examples() {
        let c = chart2();
        let sampler = c.sampler(8, 42).unwrap();
        let tol = Tol::default();
        let neutral = BilinearField::constant(
            2,
            vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            Symmetry::Symmetric,
        );
        let rot = EndoField::constant(2, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let got = classify_base(&neutral, &rot, &sampler, &tol).unwrap();
        assert_eq!(got.kind, BaseKind::Norden);
        assert!(got.integrable);

        let euclid =
            BilinearField::constant(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], Symmetry::Symmetric);
        let swap = EndoField::constant(2, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let got = classify_base(&euclid, &swap, &sampler, &tol).unwrap();
        assert_eq!(got.kind, BaseKind::ParaNorden);
        assert!(got.integrable);

        // Same swap against an incompatible metric.
        let bad = BilinearField::constant(
            2,
            vec![vec![1.0, 0.5], vec![0.5, -1.0]],
            Symmetry::Symmetric,
        );
        let got = classify_base(&bad, &swap, &sampler, &tol).unwrap();
        assert_eq!(got.kind, BaseKind::Neither);
    }

    #[test]
    fn symmetry_validation_honours_declared_class() {
        let c = chart2();
        let tol = Tol::default();
        let sym = bilinear(&c, [["1", "x"], ["x", "2"]], Symmetry::Symmetric);
        assert!(sym.validate_symmetry_at(&[1.0, 1.0], &tol).is_ok());
        let skew = bilinear(&c, [["0", "x"], ["-x", "0"]], Symmetry::Skew);
        assert!(skew.validate_symmetry_at(&[1.0, 1.0], &tol).is_ok());
        let lying = bilinear(&c, [["1", "x"], ["0", "2"]], Symmetry::Symmetric);
        assert!(matches!(
            lying.validate_symmetry_at(&[1.0, 1.0], &tol),
            Err(Error::NotSignedSymmetric { .. })
        ));
    }
}
