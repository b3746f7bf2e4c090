//! Cost functions on matrices and tensors, and sample-based checks of the
//! sparsifying conditions (evenness, subadditivity, strict concavity, f(0) ≥ 0).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GooError, Result};
use crate::linalg::{Matrix, Scalar, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MaskSpec {
    /// Entries with row > column.
    StrictLower,
    /// Entries with row < column.
    StrictUpper,
    /// Column-major boolean mask.
    Custom { rows: usize, cols: usize, mask: Vec<bool> },
}

impl MaskSpec {
    fn includes(&self, r: usize, c: usize) -> bool {
        match self {
            MaskSpec::StrictLower => r > c,
            MaskSpec::StrictUpper => r < c,
            MaskSpec::Custom { rows, mask, .. } => mask[c * rows + r],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CostSpec {
    /// `Σ|x|^p`, 0 < p < 2. The 1/p root is not taken.
    EntrywisePow(f64),
    /// `-Σ|x|^p`, p > 2.
    EntrywisePowNeg(f64),
    /// `Σ min(|x|^p, cap)`.
    CappedPow { p: f64, cap: f64 },
    /// `Σ log(1 + |x|)`.
    Log1p,
    /// `Σ -|x| log|x|` with `f(0) = 0`.
    Entropy,
    /// `Σ|x|^p` over the masked entries of a matrix.
    MaskedPow { p: f64, mask: MaskSpec },
    /// `max|x|`.
    InfNorm,
    /// Number of entries with `|x| > threshold`.
    Nnz(f64),
    /// Nonnegative weighted sum of costs.
    Conical(Vec<(f64, CostSpec)>),
}

impl CostSpec {
    pub fn l1() -> Self {
        CostSpec::EntrywisePow(1.0)
    }

    pub fn masked_l1_lower() -> Self {
        CostSpec::MaskedPow {
            p: 1.0,
            mask: MaskSpec::StrictLower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GooError::InvalidArgument(msg));
        match self {
            CostSpec::EntrywisePow(p) if !(*p > 0.0 && *p < 2.0) => {
                bad(format!("lp exponent {p} outside (0, 2)"))
            }
            CostSpec::EntrywisePowNeg(p) if !(*p > 2.0) => bad(format!("lpneg exponent {p} must exceed 2")),
            CostSpec::CappedPow { p, cap } if !(*p > 0.0 && *cap > 0.0) => {
                bad(format!("capped power needs p > 0 and cap > 0, got {p}, {cap}"))
            }
            CostSpec::MaskedPow { p, .. } if !(*p > 0.0) => bad(format!("masked exponent {p} must be positive")),
            CostSpec::Nnz(t) if !(*t >= 0.0) => bad(format!("nnz threshold {t} must be nonnegative")),
            CostSpec::Conical(terms) => {
                if terms.iter().any(|(w, _)| !(*w >= 0.0)) {
                    return bad("conical combination with a negative weight".into());
                }
                if !terms.iter().any(|(w, _)| *w > 0.0) {
                    return bad("conical combination needs a positive weight".into());
                }
                terms.iter().try_for_each(|(_, c)| c.validate())
            }
            _ => Ok(()),
        }
    }

    /// The scalar function applied to `|x|`, for entrywise kinds.
    pub fn scalar_fn(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        Some(match *self {
            CostSpec::EntrywisePow(p) => Box::new(move |x: f64| x.abs().powf(p)),
            CostSpec::EntrywisePowNeg(p) => Box::new(move |x: f64| -x.abs().powf(p)),
            CostSpec::CappedPow { p, cap } => Box::new(move |x: f64| x.abs().powf(p).min(cap)),
            CostSpec::Log1p => Box::new(|x: f64| x.abs().ln_1p()),
            CostSpec::Entropy => Box::new(entropy),
            CostSpec::Conical(ref terms) => {
                let fs: Vec<(f64, Box<dyn Fn(f64) -> f64 + Send + Sync>)> = terms
                    .iter()
                    .map(|(w, c)| c.scalar_fn().map(|f| (*w, f)))
                    .collect::<Option<_>>()?;
                Box::new(move |x: f64| fs.iter().map(|(w, f)| w * f(x)).sum())
            }
            _ => return None,
        })
    }

    pub fn eval_matrix(&self, m: &Matrix) -> Result<f64> {
        self.eval_values(m.as_slice(), Some(m.rows()))
    }

    pub fn eval(&self, t: &Tensor) -> Result<f64> {
        let rows = (t.order() == 2).then(|| t.shape()[0]);
        self.eval_values(t.as_slice(), rows)
    }

    /// Evaluates on column-major values. `rows` is required by masked costs.
    pub fn eval_values(&self, values: &[Scalar], rows: Option<usize>) -> Result<f64> {
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(GooError::NonFinite);
        }
        Ok(match self {
            CostSpec::EntrywisePow(p) => {
                if *p == 1.0 {
                    values.iter().map(|z| z.norm()).sum()
                } else {
                    values.iter().map(|z| z.norm().powf(*p)).sum()
                }
            }
            CostSpec::EntrywisePowNeg(p) => -values.iter().map(|z| z.norm().powf(*p)).sum::<f64>(),
            CostSpec::CappedPow { p, cap } => values.iter().map(|z| z.norm().powf(*p).min(*cap)).sum(),
            CostSpec::Log1p => values.iter().map(|z| z.norm().ln_1p()).sum(),
            CostSpec::Entropy => values.iter().map(|z| entropy(z.norm())).sum(),
            CostSpec::MaskedPow { p, mask } => {
                let rows = rows.ok_or_else(|| {
                    GooError::InvalidArgument("masked cost applies to matrices only".into())
                })?;
                if let MaskSpec::Custom { rows: mr, cols: mc, .. } = mask {
                    if *mr != rows || mr * mc != values.len() {
                        return Err(GooError::DimensionMismatch("mask shape differs from data".into()));
                    }
                }
                let mut s = 0.0;
                for (k, z) in values.iter().enumerate() {
                    if mask.includes(k % rows, k / rows) {
                        s += if *p == 1.0 { z.norm() } else { z.norm().powf(*p) };
                    }
                }
                s
            }
            CostSpec::InfNorm => values.iter().map(|z| z.norm()).fold(0.0, f64::max),
            CostSpec::Nnz(t) => values.iter().filter(|z| z.norm() > *t).count() as f64,
            CostSpec::Conical(terms) => {
                let mut s = 0.0;
                for (w, c) in terms {
                    if *w != 0.0 {
                        s += w * c.eval_values(values, rows)?;
                    }
                }
                s
            }
        })
    }

    /// Same cost with exponent `p`, for the kinds that have one.
    pub fn with_exponent(&self, p: f64) -> CostSpec {
        match self {
            CostSpec::EntrywisePow(_) => CostSpec::EntrywisePow(p),
            CostSpec::MaskedPow { mask, .. } => CostSpec::MaskedPow { p, mask: mask.clone() },
            CostSpec::CappedPow { cap, .. } => CostSpec::CappedPow { p, cap: *cap },
            other => other.clone(),
        }
    }
}

fn entropy(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else {
        -a * a.ln()
    }
}

/// Conical (nonnegative weighted) combination of costs.
pub fn conical_combine(terms: Vec<(f64, CostSpec)>) -> Result<CostSpec> {
    let c = CostSpec::Conical(terms);
    c.validate()?;
    Ok(c)
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::EntrywisePow(p) => write!(f, "lp:{p}"),
            CostSpec::EntrywisePowNeg(p) => write!(f, "lpneg:{p}"),
            CostSpec::CappedPow { p, cap } => write!(f, "capped:{p},{cap}"),
            CostSpec::Log1p => write!(f, "log1p"),
            CostSpec::Entropy => write!(f, "entropy"),
            CostSpec::MaskedPow { p, mask } => match mask {
                MaskSpec::StrictLower => write!(f, "masked-lp:{p},lower"),
                MaskSpec::StrictUpper => write!(f, "masked-lp:{p},upper"),
                MaskSpec::Custom { rows, cols, mask } => {
                    let bits: String = mask.iter().map(|b| if *b { '1' } else { '0' }).collect();
                    write!(f, "masked-lp:{p},{rows}x{cols}:{bits}")
                }
            },
            CostSpec::InfNorm => write!(f, "inf"),
            CostSpec::Nnz(t) => write!(f, "nnz:{t}"),
            CostSpec::Conical(terms) => {
                let parts: Vec<String> = terms.iter().map(|(w, c)| format!("{w}*{c}")).collect();
                write!(f, "conical({})", parts.join(";"))
            }
        }
    }
}

impl FromStr for CostSpec {
    type Err = GooError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GooError::Parse(format!("bad cost spec '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        if let Some(inner) = s.strip_prefix("conical(").and_then(|r| r.strip_suffix(')')) {
            let terms = inner
                .split(';')
                .map(|term| {
                    let (w, c) = term.split_once('*').ok_or_else(bad)?;
                    Ok((num(w)?, c.parse::<CostSpec>()?))
                })
                .collect::<Result<Vec<_>>>()?;
            return conical_combine(terms);
        }
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let cost = match (head, arg) {
            ("lp", Some(p)) => CostSpec::EntrywisePow(num(p)?),
            ("lpneg", Some(p)) => CostSpec::EntrywisePowNeg(num(p)?),
            ("capped", Some(a)) => {
                let (p, cap) = a.split_once(',').ok_or_else(bad)?;
                CostSpec::CappedPow {
                    p: num(p)?,
                    cap: num(cap)?,
                }
            }
            ("log1p", None) => CostSpec::Log1p,
            ("entropy", None) => CostSpec::Entropy,
            ("inf", None) => CostSpec::InfNorm,
            ("nnz", Some(t)) => CostSpec::Nnz(num(t)?),
            ("nnz", None) => CostSpec::Nnz(1e-6),
            ("masked-lp", Some(a)) => {
                let (p, m) = a.split_once(',').ok_or_else(bad)?;
                let mask = match m.trim() {
                    "lower" => MaskSpec::StrictLower,
                    "upper" => MaskSpec::StrictUpper,
                    custom => {
                        let (dims, bits) = custom.split_once(':').ok_or_else(bad)?;
                        let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                        let rows: usize = r.parse().map_err(|_| bad())?;
                        let cols: usize = c.parse().map_err(|_| bad())?;
                        let mask: Vec<bool> = bits.chars().map(|ch| ch == '1').collect();
                        if mask.len() != rows * cols {
                            return Err(bad());
                        }
                        MaskSpec::Custom { rows, cols, mask }
                    }
                };
                CostSpec::MaskedPow { p: num(p)?, mask }
            }
            _ => return Err(bad()),
        };
        cost.validate()?;
        Ok(cost)
    }
}

impl From<CostSpec> for String {
    fn from(c: CostSpec) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for CostSpec {
    type Error = GooError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Outcome of [`check_sparsifying`]; every flag must hold for the sufficient condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsifyingReport {
    pub even: bool,
    pub subadditive: bool,
    pub strictly_concave: bool,
    pub nonneg_at_zero: bool,
}

impl SparsifyingReport {
    pub fn passes(&self) -> bool {
        self.even && self.subadditive && self.strictly_concave && self.nonneg_at_zero
    }
}

pub const STRICT_MIN_GAP: f64 = 0.01;

/// Grid `0, 0.01, …, 10` plus 200 seeded uniform draws in `(0, 10)`.
pub fn default_samples() -> Vec<f64> {
    let mut s: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    s.extend((0..200).map(|_| rng.random_range(1e-6..10.0)));
    s
}

/// Checks the sufficient condition on sample points (absolute values are used).
///
/// Concavity must hold within `tol` on every pair; the strict margin
/// `f((a+b)/2) > (f(a)+f(b))/2 + tol` is required for pairs at least
/// [`STRICT_MIN_GAP`] apart, where rounding cannot mask it.
pub fn check_sparsifying(f: &dyn Fn(f64) -> f64, samples: &[f64], tol: f64) -> SparsifyingReport {
    let xs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let even = xs.iter().zip(&fx).all(|(&x, &v)| {
        let w = f(-x);
        v == w || (v - w).abs() <= tol
    });
    let f0 = f(0.0);
    let nonneg_at_zero = f0 >= -tol;
    let mut subadditive = true;
    let mut strictly_concave = true;
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let (a, b) = (xs[i], xs[j]);
            if subadditive && !(fx[i] + fx[j] >= f(a + b) - tol) {
                subadditive = false;
            }
            if strictly_concave && a != b {
                let gap = f(0.5 * (a + b)) - 0.5 * (fx[i] + fx[j]);
                let need = if (a - b).abs() >= STRICT_MIN_GAP { tol } else { -tol };
                if !(gap > need) {
                    strictly_concave = false;
                }
            }
        }
        if !subadditive && !strictly_concave {
            break;
        }
    }
    SparsifyingReport {
        even,
        subadditive,
        strictly_concave,
        nonneg_at_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn inf_norm_and_mask() {
        let m = Matrix::from_rows(&[&[1.0, -3.0], &[2.0, 0.5]]);
        assert_eq!(CostSpec::InfNorm.eval_matrix(&m).unwrap(), 3.0);
        let upper = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[0.0, 4.0, 5.0], &[0.0, 0.0, 6.0]]);
        assert_eq!(CostSpec::masked_l1_lower().eval_matrix(&upper).unwrap(), 0.0);
        let upper_mask = CostSpec::MaskedPow { p: 1.0, mask: MaskSpec::StrictUpper };
        assert_eq!(upper_mask.eval_matrix(&upper).unwrap(), 10.0);
    }

    #[test]
    fn custom_mask_and_shape_check() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let c: CostSpec = "masked-lp:1,2x2:0110".parse().unwrap();
        assert_eq!(c.eval_matrix(&m).unwrap(), 5.0);
        assert!(c.eval_matrix(&Matrix::zeros(3, 3)).is_err());
        let t = Tensor::zeros(&[2, 2, 2]);
        assert!(CostSpec::masked_l1_lower().eval(&t).is_err());
    }

    #[test]
    fn nan_rejected() {
        let m = Matrix::from_rows(&[&[f64::NAN]]);
        assert_eq!(CostSpec::l1().eval_matrix(&m).unwrap_err(), GooError::NonFinite);
    }

    #[test]
    fn entropy_zero_by_continuity() {
        let m = Matrix::diag_real(&[0.5, 0.5]);
        let v = CostSpec::Entropy.eval_matrix(&m).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn nnz_counts_above_threshold() {
        let m = Matrix::from_rows(&[&[1.0, 1e-9], &[-2.0, 0.0]]);
        assert_eq!(CostSpec::Nnz(1e-6).eval_matrix(&m).unwrap(), 2.0);
        assert_eq!(CostSpec::Nnz(1e-12).eval_matrix(&m).unwrap(), 3.0);
    }

    #[test]
    fn sparsifying_examples() {
        let samples = default_samples();
        let sqrt = |x: f64| x.abs().sqrt();
        assert!(check_sparsifying(&sqrt, &samples, 1e-12).passes());
        let square = |x: f64| x * x;
        let r = check_sparsifying(&square, &samples, 1e-12);
        assert!(!r.strictly_concave);
        let log = |x: f64| x.abs().ln();
        let r = check_sparsifying(&log, &samples, 1e-12);
        assert!(!r.nonneg_at_zero);
        assert!(!r.passes());
    }

    #[test]
    fn builtin_kinds_pass_checker() {
        let samples = default_samples();
        for c in [CostSpec::EntrywisePow(0.5), CostSpec::Log1p, CostSpec::Entropy] {
            let f = c.scalar_fn().unwrap();
            assert!(check_sparsifying(&*f, &samples, 1e-12).passes(), "{c}");
        }
    }

    #[test]
    fn conical_rules() {
        let mix = conical_combine(vec![(0.5, CostSpec::EntrywisePow(0.5)), (0.5, CostSpec::Log1p)]).unwrap();
        let f = mix.scalar_fn().unwrap();
        assert!(check_sparsifying(&*f, &default_samples(), 1e-12).passes());
        assert!(conical_combine(vec![(-1.0, CostSpec::Log1p)]).is_err());
        assert!(conical_combine(vec![(0.0, CostSpec::Log1p)]).is_err());

        let m = Matrix::from_rows(&[&[0.3, -1.2], &[2.5, 0.1]]);
        let one = conical_combine(vec![(1.0, CostSpec::EntrywisePow(0.5)), (0.0, CostSpec::Log1p)]).unwrap();
        assert_eq!(
            one.eval_matrix(&m).unwrap(),
            CostSpec::EntrywisePow(0.5).eval_matrix(&m).unwrap()
        );
        let a = CostSpec::EntrywisePow(0.5);
        let b = CostSpec::EntrywisePow(1.5);
        let lin = conical_combine(vec![(2.0, a.clone()), (3.0, b.clone())]).unwrap();
        let expect = 2.0 * a.eval_matrix(&m).unwrap() + 3.0 * b.eval_matrix(&m).unwrap();
        assert!((lin.eval_matrix(&m).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn cost_strings_round_trip() {
        for s in [
            "lp:1",
            "lp:0.5",
            "lpneg:3",
            "capped:0.5,1",
            "log1p",
            "entropy",
            "masked-lp:1,lower",
            "inf",
            "nnz:0.000001",
            "conical(0.5*lp:0.5;0.5*log1p)",
        ] {
            let c: CostSpec = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<CostSpec>().unwrap(), c, "{s}");
        }
        assert!("lp:2.5".parse::<CostSpec>().is_err());
        assert!("lpneg:1".parse::<CostSpec>().is_err());
        assert!("bogus".parse::<CostSpec>().is_err());
    }

    #[test]
    fn tensor_and_matrix_agree() {
        let m = Matrix::from_rows(&[&[1.0, -2.0], &[0.0, 3.0]]);
        let t: Tensor = m.clone().into();
        let c = CostSpec::l1();
        assert_eq!(c.eval(&t).unwrap(), c.eval_matrix(&m).unwrap());
        assert_eq!(c.eval_values(&[re(-4.0)], None).unwrap(), 4.0);
    }
}
