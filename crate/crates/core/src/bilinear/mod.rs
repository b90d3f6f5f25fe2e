//! Rank-`T` bilinear schemes for matrix multiplication.
//!
//! A scheme for an `a x b` by `b x c` product is a list of triplets
//! `(u_r, v_r, w_r)` of integer vectors with
//!
//! ```text
//! vec(C) = sum_r <u_r, vec(A)> <v_r, vec(B)> w_r
//! ```
//!
//! where `vec` is column-major. Coefficients are integers and are reduced
//! into whichever prime field the scheme is applied in, so a scheme has to be
//! re-verified per field before use. [`VerifiedScheme`] is the only form the
//! apply and lift routines accept.

mod file;
mod lift;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::FieldSpec;
use crate::linalg::{FieldMatrix, LinalgError, MultCounter};

pub use file::{load_scheme, parse_scheme, save_scheme, scheme_to_text, VecOrder};
pub use lift::lift_apply;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BilinearError {
    #[error("malformed scheme: {0}")]
    Shape(String),
    #[error("scheme parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scheme is only valid in characteristic {required}, field has p = {p}")]
    Characteristic { required: u64, p: u64 },
    #[error("scheme does not realize matrix multiplication: {0}")]
    SchemeInvalid(BasisPair),
    #[error("scheme was verified over F_{verified}, operands live in F_{actual}")]
    FieldMismatch { verified: u64, actual: u64 },
    #[error("operands {left:?} x {right:?} do not match scheme dims {dims:?}")]
    DimensionMismatch {
        dims: (usize, usize, usize),
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("cannot lift {dims:?} scheme {depth} levels onto {left:?} x {right:?}")]
    Lift {
        dims: (usize, usize, usize),
        depth: usize,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Standard-basis input pair `(E_pq, E_rs)` on which a scheme disagrees with
/// the true product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisPair {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
}

impl fmt::Display for BasisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A = E[{},{}], B = E[{},{}]", self.p, self.q, self.r, self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearScheme {
    dims: (usize, usize, usize),
    u: Vec<Vec<i64>>,
    v: Vec<Vec<i64>>,
    w: Vec<Vec<i64>>,
    characteristic: u64,
}

impl BilinearScheme {
    /// `u`, `v`, `w` are column-major coefficient vectors of lengths `a*b`,
    /// `b*c` and `a*c`. `characteristic = 0` means valid in any field.
    pub fn new(
        dims: (usize, usize, usize),
        u: Vec<Vec<i64>>,
        v: Vec<Vec<i64>>,
        w: Vec<Vec<i64>>,
        characteristic: u64,
    ) -> Result<Self, BilinearError> {
        let (a, b, c) = dims;
        if a == 0 || b == 0 || c == 0 {
            return Err(BilinearError::Shape(format!("zero dimension in {dims:?}")));
        }
        if u.len() != v.len() || u.len() != w.len() {
            return Err(BilinearError::Shape(format!(
                "factor counts differ: |U| = {}, |V| = {}, |W| = {}",
                u.len(),
                v.len(),
                w.len()
            )));
        }
        for (name, rows, len) in [("U", &u, a * b), ("V", &v, b * c), ("W", &w, a * c)] {
            if let Some(r) = rows.iter().position(|row| row.len() != len) {
                return Err(BilinearError::Shape(format!(
                    "{name}[{r}] has {} entries, expected {len}",
                    rows[r].len()
                )));
            }
        }
        Ok(Self {
            dims,
            u,
            v,
            w,
            characteristic,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn rank(&self) -> usize {
        self.u.len()
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn u(&self) -> &[Vec<i64>] {
        &self.u
    }

    pub fn v(&self) -> &[Vec<i64>] {
        &self.v
    }

    pub fn w(&self) -> &[Vec<i64>] {
        &self.w
    }

    pub fn max_abs_coefficient(&self) -> u64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .flatten()
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Returns a copy with one coefficient replaced. Used for mutation tests.
    pub fn with_coefficient(&self, factor: Factor, rank_idx: usize, pos: usize, value: i64) -> Self {
        let mut out = self.clone();
        let rows = match factor {
            Factor::U => &mut out.u,
            Factor::V => &mut out.v,
            Factor::W => &mut out.w,
        };
        rows[rank_idx][pos] = value;
        out
    }

    /// Verifies over `field` and wraps the scheme for use.
    pub fn verified(self, field: FieldSpec) -> Result<VerifiedScheme, BilinearError> {
        match verify_scheme(&self, field)? {
            Verification::Pass => Ok(VerifiedScheme::new_unchecked(self, field)),
            Verification::Fail(pair) => Err(BilinearError::SchemeInvalid(pair)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    U,
    V,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail(BasisPair),
}

/// Checks the scheme on every standard-basis input pair. By bilinearity this
/// is a complete test over `field`.
pub fn verify_scheme(scheme: &BilinearScheme, field: FieldSpec) -> Result<Verification, BilinearError> {
    let p = field.modulus();
    if scheme.characteristic != 0 && scheme.characteristic != p {
        return Err(BilinearError::Characteristic {
            required: scheme.characteristic,
            p,
        });
    }
    if scheme.max_abs_coefficient() >= p {
        tracing::warn!(
            max = scheme.max_abs_coefficient(),
            p,
            "scheme coefficients exceed the modulus; distinct integer schemes may coincide mod p"
        );
    }
    let (a, b, c) = scheme.dims;
    let red = |rows: &[Vec<i64>]| -> Vec<Vec<u64>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| field.reduce_i64(x)).collect())
            .collect()
    };
    let (u, v, w) = (red(&scheme.u), red(&scheme.v), red(&scheme.w));
    for q in 0..b {
        for pp in 0..a {
            let ia = pp + q * a;
            for s in 0..c {
                for r in 0..b {
                    let ib = r + s * b;
                    for l in 0..c {
                        for i in 0..a {
                            let ic = i + l * a;
                            let mut acc = 0u64;
                            for t in 0..scheme.rank() {
                                let coef = field.mul_raw(field.mul_raw(u[t][ia], v[t][ib]), w[t][ic]);
                                acc = field.add_raw(acc, coef);
                            }
                            let expect = u64::from(q == r && i == pp && l == s);
                            if acc != expect {
                                return Ok(Verification::Fail(BasisPair { p: pp, q, r, s }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Verification::Pass)
}

/// A scheme known to realize matrix multiplication over one specific field,
/// with its coefficients pre-reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedScheme {
    scheme: BilinearScheme,
    field: FieldSpec,
    u: Vec<Vec<u64>>,
    v: Vec<Vec<u64>>,
    w: Vec<Vec<u64>>,
}

impl VerifiedScheme {
    fn new_unchecked(scheme: BilinearScheme, field: FieldSpec) -> Self {
        let red = |rows: &[Vec<i64>]| -> Vec<Vec<u64>> {
            rows.iter()
                .map(|r| r.iter().map(|&x| field.reduce_i64(x)).collect())
                .collect()
        };
        let (u, v, w) = (red(&scheme.u), red(&scheme.v), red(&scheme.w));
        Self { scheme, field, u, v, w }
    }

    pub fn scheme(&self) -> &BilinearScheme {
        &self.scheme
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.scheme.dims
    }

    pub fn rank(&self) -> usize {
        self.scheme.rank()
    }

    fn check_field(&self, m: &FieldMatrix) -> Result<(), BilinearError> {
        if m.field() != self.field {
            return Err(BilinearError::FieldMismatch {
                verified: self.field.modulus(),
                actual: m.field().modulus(),
            });
        }
        Ok(())
    }
}

/// Evaluates `C = A B` through the scheme's `T` rank-one terms.
///
/// The counter is charged one multiplication per rank term plus one for each
/// coefficient of magnitude above one that touches an operand or a product;
/// `±1` coefficients are additions.
pub fn apply_scheme(
    scheme: &VerifiedScheme,
    a: &FieldMatrix,
    b: &FieldMatrix,
    counter: &mut MultCounter,
) -> Result<FieldMatrix, BilinearError> {
    scheme.check_field(a)?;
    scheme.check_field(b)?;
    let (da, db, dc) = scheme.dims();
    if a.shape() != (da, db) || b.shape() != (db, dc) {
        return Err(BilinearError::DimensionMismatch {
            dims: scheme.dims(),
            left: a.shape(),
            right: b.shape(),
        });
    }
    let f = scheme.field;
    let va = a.vec();
    let vb = b.vec();
    let mut vc = vec![0u64; da * dc];
    let big = |x: i64| u64::from(x.unsigned_abs() > 1);
    for r in 0..scheme.rank() {
        let ar = inner(f, &scheme.u[r], &va);
        let br = inner(f, &scheme.v[r], &vb);
        let prod = f.mul_raw(ar, br);
        let mut mults = 1;
        mults += scheme.scheme.u[r].iter().map(|&x| big(x)).sum::<u64>();
        mults += scheme.scheme.v[r].iter().map(|&x| big(x)).sum::<u64>();
        for (idx, (&wc, &wi)) in scheme.w[r].iter().zip(&scheme.scheme.w[r]).enumerate() {
            if wc != 0 {
                vc[idx] = f.add_raw(vc[idx], f.mul_raw(wc, prod));
                mults += big(wi);
            }
        }
        counter.add_scalar(mults);
    }
    let elems: Vec<_> = vc.into_iter().map(|x| f.element(x)).collect();
    Ok(FieldMatrix::mat(&elems, da, dc)?)
}

fn inner(f: FieldSpec, coeffs: &[u64], x: &[crate::field::FieldElement]) -> u64 {
    coeffs
        .iter()
        .zip(x)
        .filter(|(&c, _)| c != 0)
        .fold(0, |acc, (&c, e)| f.add_raw(acc, f.mul_raw(c, e.value())))
}

/// Strassen's rank-7 scheme for 2x2 by 2x2.
///
/// With column-major `vec`, `vec(A) = [a11, a21, a12, a22]`. Rows follow the
/// usual products `F1..F7` and the recombination
/// `c11 = F1 + F4 - F5 + F7`, `c12 = F3 + F5`, `c21 = F2 + F4`,
/// `c22 = F1 - F2 + F3 + F6`.
pub fn strassen_scheme() -> BilinearScheme {
    let u = vec![
        vec![1, 0, 0, 1],  // a11 + a22
        vec![0, 1, 0, 1],  // a21 + a22
        vec![1, 0, 0, 0],  // a11
        vec![0, 0, 0, 1],  // a22
        vec![1, 0, 1, 0],  // a11 + a12
        vec![-1, 1, 0, 0], // a21 - a11
        vec![0, 0, 1, -1], // a12 - a22
    ];
    let v = vec![
        vec![1, 0, 0, 1],  // b11 + b22
        vec![1, 0, 0, 0],  // b11
        vec![0, 0, 1, -1], // b12 - b22
        vec![-1, 1, 0, 0], // b21 - b11
        vec![0, 0, 0, 1],  // b22
        vec![1, 0, 1, 0],  // b11 + b12
        vec![0, 1, 0, 1],  // b21 + b22
    ];
    // vec(C) = [c11, c21, c12, c22]
    let w = vec![
        vec![1, 0, 0, 1],
        vec![0, 1, 0, -1],
        vec![0, 0, 1, 1],
        vec![1, 1, 0, 0],
        vec![-1, 0, 1, 0],
        vec![0, 0, 0, 1],
        vec![1, 0, 0, 0],
    ];
    BilinearScheme::new((2, 2, 2), u, v, w, 0).expect("static scheme is well formed")
}

/// The schoolbook decomposition of rank `a*b*c`.
pub fn naive_scheme(a: usize, b: usize, c: usize) -> BilinearScheme {
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut w = Vec::new();
    for i in 0..a {
        for j in 0..b {
            for l in 0..c {
                let mut ur = vec![0; a * b];
                ur[i + j * a] = 1;
                let mut vr = vec![0; b * c];
                vr[j + l * b] = 1;
                let mut wr = vec![0; a * c];
                wr[i + l * a] = 1;
                u.push(ur);
                v.push(vr);
                w.push(wr);
            }
        }
    }
    BilinearScheme::new((a, b, c), u, v, w, 0).expect("naive scheme is well formed")
}

/// How an agent multiplies its two shares.
#[derive(Debug, Clone)]
pub enum OperatorChoice {
    Dense,
    /// A verified scheme lifted `depth` levels over block matrices, dense at
    /// the leaves.
    Scheme {
        name: String,
        scheme: Arc<VerifiedScheme>,
        depth: usize,
    },
}

impl OperatorChoice {
    pub fn scheme(name: impl Into<String>, scheme: VerifiedScheme, depth: usize) -> Self {
        OperatorChoice::Scheme {
            name: name.into(),
            scheme: Arc::new(scheme),
            depth,
        }
    }

    /// Strassen verified over `field` and lifted `depth` levels.
    pub fn strassen(field: FieldSpec, depth: usize) -> Result<Self, BilinearError> {
        Ok(Self::scheme("strassen", strassen_scheme().verified(field)?, depth))
    }

    pub fn label(&self) -> String {
        match self {
            OperatorChoice::Dense => "dense".to_string(),
            OperatorChoice::Scheme { name, depth, .. } => format!("{name}-d{depth}"),
        }
    }
}
