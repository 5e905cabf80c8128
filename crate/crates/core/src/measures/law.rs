use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Pmf;
use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, series_tail, zeta};

/// Number of tabulated tail values kept for the infinite lattice families.
pub const TAIL_TABLE_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawKind {
    LatticeFinite,
    LatticePowerLaw,
    LatticeLogPowerLaw,
    SignedLatticeFinite,
    SignedSymmetricPowerLaw,
    ContinuousExponential,
    ContinuousUniform,
    ContinuousPareto,
}

impl LawKind {
    pub fn is_lattice(self) -> bool {
        !self.is_continuous()
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, LawKind::ContinuousExponential | LawKind::ContinuousUniform | LawKind::ContinuousPareto)
    }

    pub fn is_signed(self) -> bool {
        matches!(self, LawKind::SignedLatticeFinite | LawKind::SignedSymmetricPowerLaw)
    }

    /// Half-line lattice law (`lat:` families).
    pub fn is_half_line_lattice(self) -> bool {
        matches!(self, LawKind::LatticeFinite | LawKind::LatticePowerLaw | LawKind::LatticeLogPowerLaw)
    }
}

/// Distribution of the increments `Y_n`.
///
/// Lattice laws live on the integers; their span is the gcd of the support.
/// Cloning is cheap: tables are shared.
#[derive(Debug, Clone)]
pub struct IncrementLaw {
    spec: String,
    family: Family,
}

#[derive(Debug, Clone)]
pub(crate) enum Family {
    Finite(Arc<FiniteAtoms>),
    PowerLaw(Arc<PowerTail>),
    LogPower(Arc<LogPowerTail>),
    SymPower(Arc<PowerTail>),
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Pareto { alpha: f64, scale: f64 },
}

#[derive(Debug)]
pub(crate) struct FiniteAtoms {
    pub signed: bool,
    pub span: i64,
    pub atoms: Vec<(i64, f64)>,
    pub exact: Vec<(i64, BigRational)>,
    /// `tails[i]` = mass strictly above `atoms[i].0`.
    pub tails: Vec<f64>,
}

/// `mu(k) = c k^-(1+a)` on `k >= 1` with `c = 1/zeta(1+a)`.
#[derive(Debug)]
pub(crate) struct PowerTail {
    pub a: f64,
    pub c: f64,
    /// `tail[k] = P(Y > k)`.
    tail: Vec<f64>,
}

/// `mu(n) = c (log(n+2))^b / (n+1)^(1+a)` on `n >= 0`.
#[derive(Debug)]
pub(crate) struct LogPowerTail {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    mass: Vec<f64>,
    tail: Vec<f64>,
    /// Envelope constant for rejection sampling beyond the table.
    envelope: f64,
}

impl IncrementLaw {
    pub(crate) fn family(&self) -> &Family {
        &self.family
    }

    /// Half-line lattice law from exact atoms.
    pub fn lattice_pmf(atoms: &[(i64, BigRational)]) -> Result<Self> {
        let finite = FiniteAtoms::new(atoms, false, false)?;
        let spec = format!("lat:pmf({})", render_atoms(&finite.exact));
        Ok(IncrementLaw { spec, family: Family::Finite(Arc::new(finite)) })
    }

    /// Signed lattice law on the integers from exact atoms.
    pub fn signed_pmf(atoms: &[(i64, BigRational)]) -> Result<Self> {
        let finite = FiniteAtoms::new(atoms, true, false)?;
        let spec = format!("int:pmf({})", render_atoms(&finite.exact));
        Ok(IncrementLaw { spec, family: Family::Finite(Arc::new(finite)) })
    }

    /// Deterministic step `Y = k` with `k >= 1`.
    ///
    /// This is the only way to build a degenerate law; `parse_law` rejects
    /// them. It is useful as a driver with a known, trivial answer.
    pub fn deterministic(k: i64) -> Result<Self> {
        if k < 1 {
            return Err(Error::Validation(format!("deterministic step must be positive, got {k}")));
        }
        let finite = FiniteAtoms::new(&[(k, BigRational::one())], false, true)?;
        let spec = format!("lat:pmf({k}:1)");
        Ok(IncrementLaw { spec, family: Family::Finite(Arc::new(finite)) })
    }

    /// Half-line lattice law from floating-point atoms (converted exactly).
    pub fn lattice_pmf_f64(atoms: &[(i64, f64)]) -> Result<Self> {
        Self::lattice_pmf(&to_exact(atoms)?)
    }

    pub fn signed_pmf_f64(atoms: &[(i64, f64)]) -> Result<Self> {
        Self::signed_pmf(&to_exact(atoms)?)
    }

    pub fn power_law(a: f64) -> Result<Self> {
        let tail = PowerTail::new(a)?;
        Ok(IncrementLaw { spec: format!("lat:powerlaw(a={a})"), family: Family::PowerLaw(Arc::new(tail)) })
    }

    pub fn log_power_law(a: f64, b: f64) -> Result<Self> {
        let tail = LogPowerTail::new(a, b)?;
        Ok(IncrementLaw { spec: format!("lat:logpow(a={a},b={b})"), family: Family::LogPower(Arc::new(tail)) })
    }

    pub fn symmetric_power_law(a: f64) -> Result<Self> {
        let tail = PowerTail::new(a)?;
        Ok(IncrementLaw { spec: format!("int:sympow(a={a})"), family: Family::SymPower(Arc::new(tail)) })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Validation(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(IncrementLaw { spec: format!("cont:exp(rate={rate})"), family: Family::Exponential { rate } })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Validation(format!("uniform needs 0 <= lo < hi, got lo={lo}, hi={hi}")));
        }
        Ok(IncrementLaw { spec: format!("cont:uniform(lo={lo},hi={hi})"), family: Family::Uniform { lo, hi } })
    }

    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && scale > 0.0 && alpha.is_finite() && scale.is_finite()) {
            return Err(Error::Validation(format!("pareto needs alpha, scale > 0, got {alpha}, {scale}")));
        }
        Ok(IncrementLaw {
            spec: format!("cont:pareto(alpha={alpha},scale={scale})"),
            family: Family::Pareto { alpha, scale },
        })
    }

    /// Canonical spec string (whitespace stripped).
    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn kind(&self) -> LawKind {
        match &self.family {
            Family::Finite(f) if f.signed => LawKind::SignedLatticeFinite,
            Family::Finite(_) => LawKind::LatticeFinite,
            Family::PowerLaw(_) => LawKind::LatticePowerLaw,
            Family::LogPower(_) => LawKind::LatticeLogPowerLaw,
            Family::SymPower(_) => LawKind::SignedSymmetricPowerLaw,
            Family::Exponential { .. } => LawKind::ContinuousExponential,
            Family::Uniform { .. } => LawKind::ContinuousUniform,
            Family::Pareto { .. } => LawKind::ContinuousPareto,
        }
    }

    pub fn is_lattice(&self) -> bool {
        self.kind().is_lattice()
    }

    pub fn is_continuous(&self) -> bool {
        self.kind().is_continuous()
    }

    pub fn is_signed(&self) -> bool {
        self.kind().is_signed()
    }

    pub(crate) fn require_half_line_lattice(&self, op: &'static str) -> Result<()> {
        if self.kind().is_half_line_lattice() {
            Ok(())
        } else {
            Err(Error::WrongKind { op, what: format!("{:?} law `{}`", self.kind(), self.spec) })
        }
    }

    pub(crate) fn require_continuous(&self, op: &'static str) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::WrongKind { op, what: format!("{:?} law `{}`", self.kind(), self.spec) })
        }
    }

    /// Lattice span `d` (gcd of the support); `None` for continuous laws.
    pub fn span(&self) -> Option<i64> {
        match &self.family {
            Family::Finite(f) => Some(f.span),
            Family::PowerLaw(_) | Family::LogPower(_) | Family::SymPower(_) => Some(1),
            _ => None,
        }
    }

    /// `N = sup supp(mu)`; `None` when unbounded.
    pub fn support_max(&self) -> Option<f64> {
        match &self.family {
            Family::Finite(f) => f.atoms.last().map(|&(k, _)| k as f64),
            Family::Uniform { hi, .. } => Some(*hi),
            _ => None,
        }
    }

    pub fn has_finite_support(&self) -> bool {
        matches!(self.family, Family::Finite(_))
    }

    /// Atoms of a finite lattice law.
    pub fn atoms(&self) -> Option<&[(i64, f64)]> {
        match &self.family {
            Family::Finite(f) => Some(&f.atoms),
            _ => None,
        }
    }

    /// Exact rational atoms of a finite lattice law.
    pub fn exact_atoms(&self) -> Option<&[(i64, BigRational)]> {
        match &self.family {
            Family::Finite(f) => Some(&f.exact),
            _ => None,
        }
    }

    pub fn exact_pmf(&self) -> Option<Pmf<BigRational>> {
        self.exact_atoms().map(|a| Pmf::new(a.iter().cloned()))
    }

    /// Lattice pmf restricted to `|k| <= n_max`; the cut mass goes to the remainder.
    pub fn pmf(&self, n_max: i64) -> Result<Pmf<f64>> {
        if !self.is_lattice() {
            return Err(Error::WrongKind { op: "pmf", what: format!("continuous law `{}`", self.spec) });
        }
        let lo = if self.is_signed() { -n_max } else { 0 };
        let atoms: Vec<(i64, f64)> = match &self.family {
            Family::Finite(f) => f.atoms.iter().copied().filter(|(k, _)| k.abs() <= n_max).collect(),
            _ => (lo..=n_max).map(|k| (k, self.mass(k))).collect(),
        };
        let pmf = Pmf::new(atoms);
        let rem = (1.0 - pmf.total()).max(0.0);
        Ok(pmf.with_remainder(rem))
    }

    /// Point mass `mu({k})` of a lattice law (0 for continuous laws).
    pub fn mass(&self, k: i64) -> f64 {
        match &self.family {
            Family::Finite(f) => match f.atoms.binary_search_by_key(&k, |&(i, _)| i) {
                Ok(i) => f.atoms[i].1,
                Err(_) => 0.0,
            },
            Family::PowerLaw(p) => p.mass(k),
            Family::LogPower(p) => p.mass(k),
            Family::SymPower(p) => 0.5 * p.mass(k.abs()),
            _ => 0.0,
        }
    }

    /// `P(Y > k)` for a lattice law at an integer `k`.
    pub fn tail_gt(&self, k: i64) -> f64 {
        match &self.family {
            Family::Finite(f) => {
                let idx = f.atoms.partition_point(|&(i, _)| i <= k);
                if idx == 0 {
                    1.0
                } else {
                    f.tails[idx - 1]
                }
            }
            Family::PowerLaw(p) => p.tail_gt(k),
            Family::LogPower(p) => p.tail_gt(k),
            Family::SymPower(p) => {
                if k >= 0 {
                    0.5 * p.tail_gt(k)
                } else {
                    // P(Y > k) = 1 - P(Y <= k) = 1 - P(-Y >= -k) = 1 - P(|Y| > -k-1)/2
                    1.0 - 0.5 * p.tail_gt(-k - 1)
                }
            }
            _ => self.cdf_tail(k as f64).1,
        }
    }

    /// `(F(x), H(x))` with `F(x) = P(Y <= x)` and `H = 1 - F`.
    pub fn cdf_tail(&self, x: f64) -> (f64, f64) {
        let h = match &self.family {
            Family::Finite(_) | Family::PowerLaw(_) | Family::LogPower(_) | Family::SymPower(_) => {
                let k = x.floor();
                if k >= i64::MAX as f64 {
                    0.0
                } else if k <= i64::MIN as f64 {
                    1.0
                } else {
                    self.tail_gt(k as i64)
                }
            }
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Family::Uniform { lo, hi } => {
                if x < *lo {
                    1.0
                } else if x >= *hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
            Family::Pareto { alpha, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (1.0 + x / scale).powf(-alpha)
                }
            }
        };
        (1.0 - h, h)
    }

    /// Smooth interpolation of `k -> P(Y > k)` for the infinite lattice
    /// families, exact at integers. Used by Euler-Maclaurin tail sums.
    pub(crate) fn tail_gt_smooth(&self, t: f64) -> f64 {
        match &self.family {
            Family::PowerLaw(p) => p.tail_smooth(t),
            Family::LogPower(p) => p.tail_smooth(t),
            _ => self.tail_gt(t.floor() as i64),
        }
    }

    /// Smooth interpolation of `k -> mu(k)` for the infinite lattice families.
    pub(crate) fn mass_smooth(&self, t: f64) -> f64 {
        match &self.family {
            Family::PowerLaw(p) => p.c * t.powf(-(1.0 + p.a)),
            Family::LogPower(p) => p.c * p.f(t),
            _ => self.mass(t.round() as i64),
        }
    }

    /// Density of a continuous law.
    pub fn pdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Family::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Family::Pareto { alpha, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    alpha / scale * (1.0 + x / scale).powf(-alpha - 1.0)
                }
            }
            _ => 0.0,
        }
    }

    /// Smallest `x` with `H(x) <= v`, for continuous laws.
    pub fn upper_quantile(&self, v: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => -v.ln() / rate,
            Family::Uniform { lo, hi } => hi - v * (hi - lo),
            Family::Pareto { alpha, scale } => scale * (v.powf(-1.0 / alpha) - 1.0),
            _ => f64::NAN,
        }
    }

    /// Points where the density of a continuous law is not smooth.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Uniform { lo, hi } => vec![*lo, *hi],
            _ => vec![],
        }
    }

    /// Draw one increment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            Family::Finite(f) => {
                let u: f64 = rng.gen();
                // smallest i with F(atoms[i]) >= u, i.e. tails[i] <= 1 - u
                let v = 1.0 - u;
                let idx = f.tails.partition_point(|&t| t > v);
                f.atoms[idx.min(f.atoms.len() - 1)].0 as f64
            }
            Family::PowerLaw(p) => p.sample(open_unit(rng)),
            Family::LogPower(p) => p.sample(rng),
            Family::SymPower(p) => {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                sign * p.sample(open_unit(rng))
            }
            Family::Exponential { rate } => -open_unit(rng).ln() / rate,
            Family::Uniform { lo, hi } => lo + rng.gen::<f64>() * (hi - lo),
            Family::Pareto { alpha, scale } => scale * (open_unit(rng).powf(-1.0 / alpha) - 1.0),
        }
    }

    /// Parameters of the analytic families, for reporting.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.family {
            Family::Finite(f) => vec![("span", f.span as f64)],
            Family::PowerLaw(p) | Family::SymPower(p) => vec![("a", p.a), ("c", self.normalizer())],
            Family::LogPower(p) => vec![("a", p.a), ("b", p.b), ("c", p.c)],
            Family::Exponential { rate } => vec![("rate", *rate)],
            Family::Uniform { lo, hi } => vec![("lo", *lo), ("hi", *hi)],
            Family::Pareto { alpha, scale } => vec![("alpha", *alpha), ("scale", *scale)],
        }
    }

    /// Normalizing constant `c` of the analytic lattice families (1 otherwise).
    pub fn normalizer(&self) -> f64 {
        match &self.family {
            Family::PowerLaw(p) => p.c,
            Family::SymPower(p) => p.c / 2.0,
            Family::LogPower(p) => p.c,
            _ => 1.0,
        }
    }

    /// Exponent parameters used by analytic finiteness decisions.
    pub(crate) fn tail_exponents(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::PowerLaw(p) | Family::SymPower(p) => Some((p.a, 0.0)),
            Family::LogPower(p) => Some((p.a, p.b)),
            Family::Pareto { alpha, .. } => Some((*alpha, 0.0)),
            _ => None,
        }
    }
}

impl fmt::Display for IncrementLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

/// Uniform draw on `(0, 1]`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn render_atoms(atoms: &[(i64, BigRational)]) -> String {
    atoms.iter().map(|(k, p)| format!("{k}:{p}")).collect::<Vec<_>>().join(",")
}

fn to_exact(atoms: &[(i64, f64)]) -> Result<Vec<(i64, BigRational)>> {
    atoms
        .iter()
        .map(|&(k, p)| {
            BigRational::from_float(p)
                .map(|q| (k, q))
                .ok_or_else(|| Error::Validation(format!("mass {p} at {k} is not finite")))
        })
        .collect()
}

impl FiniteAtoms {
    fn new(atoms: &[(i64, BigRational)], signed: bool, allow_point: bool) -> Result<Self> {
        let mut sorted: Vec<(i64, BigRational)> = Vec::new();
        for (k, p) in atoms {
            if p.is_negative() {
                return Err(Error::Validation(format!("negative mass {p} at {k}")));
            }
            if !signed && *k < 0 {
                return Err(Error::Validation(format!("half-line law has mass at negative index {k}")));
            }
            if p.is_zero() {
                continue;
            }
            match sorted.iter_mut().find(|(i, _)| i == k) {
                Some(slot) => slot.1 += p.clone(),
                None => sorted.push((*k, p.clone())),
            }
        }
        sorted.sort_by_key(|&(k, _)| k);
        let total: BigRational = sorted.iter().map(|(_, p)| p.clone()).sum();
        let defect = (total.clone() - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY);
        if defect > 1e-12 {
            return Err(Error::Validation(format!(
                "masses sum to {} instead of 1",
                total.to_f64().unwrap_or(f64::NAN)
            )));
        }
        if !total.is_one() {
            for (_, p) in sorted.iter_mut() {
                *p = p.clone() / total.clone();
            }
        }
        if sorted.len() < 2 && !(allow_point && sorted.len() == 1) {
            return Err(Error::Validation("degenerate law: all mass on a single point".into()));
        }
        let span = sorted.iter().fold(0i64, |g, &(k, _)| g.gcd(&k));
        let float_atoms: Vec<(i64, f64)> = sorted.iter().map(|(k, p)| (*k, p.to_f64().unwrap())).collect();
        let mut tails = vec![0.0; float_atoms.len()];
        let mut acc = BigRational::zero();
        for i in (0..sorted.len()).rev() {
            tails[i] = acc.to_f64().unwrap();
            acc += sorted[i].1.clone();
        }
        Ok(FiniteAtoms { signed, span, atoms: float_atoms, exact: sorted, tails })
    }
}

impl PowerTail {
    fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Validation(format!("power-law exponent must be positive, got {a}")));
        }
        let s = 1.0 + a;
        let c = 1.0 / zeta(s);
        let n = TAIL_TABLE_LEN;
        let mut tail = vec![0.0; n];
        tail[n - 1] = c * hurwitz_zeta(s, n as f64);
        for k in (0..n - 1).rev() {
            tail[k] = tail[k + 1] + c * ((k + 1) as f64).powf(-s);
        }
        tail[0] = 1.0;
        Ok(PowerTail { a, c, tail })
    }

    fn mass(&self, k: i64) -> f64 {
        if k >= 1 {
            self.c * (k as f64).powf(-(1.0 + self.a))
        } else {
            0.0
        }
    }

    fn tail_gt(&self, k: i64) -> f64 {
        if k < 0 {
            1.0
        } else if (k as usize) < self.tail.len() {
            self.tail[k as usize]
        } else {
            self.tail_smooth(k as f64)
        }
    }

    fn tail_smooth(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        self.c * hurwitz_zeta(1.0 + self.a, t + 1.0)
    }

    /// Inverse CDF: smallest `k` with `P(Y > k) <= v`.
    fn sample(&self, v: f64) -> f64 {
        let last = self.tail.len() - 1;
        if self.tail[last] <= v {
            return self.tail.partition_point(|&t| t > v).max(1) as f64;
        }
        // exponential search then bisection on the exact tail
        let mut lo = last as f64; // tail(lo) > v
        let mut hi = lo * 2.0;
        while self.tail_smooth(hi) > v {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return lo;
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1.0 {
                break;
            }
            let mid = (0.5 * (lo + hi)).floor();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail_smooth(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

impl LogPowerTail {
    fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Validation(format!("logpow needs a > 0 and finite b, got a={a}, b={b}")));
        }
        let n = TAIL_TABLE_LEN;
        let raw = |t: f64| (t + 2.0).ln().powf(b) * (t + 1.0).powf(-(1.0 + a));
        // f is non-increasing on t >= exp(b/(1+a)) - 2; check the finite prefix exactly.
        let turn = (b / (1.0 + a)).exp() - 2.0;
        if turn > (n / 2) as f64 {
            return Err(Error::Validation(format!("logpow(a={a},b={b}): log exponent too large")));
        }
        let check_to = turn.max(0.0).ceil() as usize + 2;
        for k in 0..=check_to {
            if raw((k + 1) as f64) > raw(k as f64) * (1.0 + 1e-15) {
                return Err(Error::Validation(format!("logpow(a={a},b={b}) is not monotone: mu({}) > mu({k})", k + 1)));
            }
        }
        let far = series_tail(raw, n as f64, 0);
        let head: Vec<f64> = (0..n).map(|k| raw(k as f64)).collect();
        let mut unnorm_tail = vec![0.0; n];
        let mut acc = far.value;
        for k in (0..n).rev() {
            unnorm_tail[k] = acc;
            acc += head[k];
        }
        let total = acc;
        let c = 1.0 / total;
        let mass = head.iter().map(|m| m * c).collect();
        let tail = unnorm_tail.iter().map(|t| t * c).collect();

        // Envelope for n >= TAIL_TABLE_LEN with proposal density ~ t^-(1+a/2):
        // mu(floor t) t^(1+a/2) <= c log(t+1)^b t^-(a/2).
        let lt0 = (n as f64).ln();
        let envelope = (0..70_000)
            .map(|j| lt0 + j as f64 * 0.01)
            .take_while(|lt| *lt < 700.0)
            .map(|lt| b * (lt.exp() + 1.0).ln().ln() - 0.5 * a * lt)
            .fold(f64::NEG_INFINITY, f64::max);
        let envelope = c * envelope.exp() * 1.01;
        Ok(LogPowerTail { a, b, c, mass, tail, envelope })
    }

    fn f(&self, t: f64) -> f64 {
        (t + 2.0).ln().powf(self.b) * (t + 1.0).powf(-(1.0 + self.a))
    }

    fn mass(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if (k as usize) < self.mass.len() {
            self.mass[k as usize]
        } else {
            self.c * self.f(k as f64)
        }
    }

    fn tail_gt(&self, k: i64) -> f64 {
        if k < 0 {
            1.0
        } else if (k as usize) < self.tail.len() {
            self.tail[k as usize]
        } else {
            self.tail_smooth(k as f64)
        }
    }

    fn tail_smooth(&self, t: f64) -> f64 {
        let start = t + 1.0;
        let direct = if start < 256.0 { (256.0 - start).ceil() as u64 } else { 0 };
        self.c * series_tail(|x| self.f(x), start, direct).value
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = open_unit(rng);
        let last = self.tail.len() - 1;
        if self.tail[last] <= v {
            return self.tail.partition_point(|&t| t > v) as f64;
        }
        let lower = self.tail.len() as f64;
        let shape = 0.5 * self.a;
        loop {
            let t = lower * open_unit(rng).powf(-1.0 / shape);
            let k = t.floor();
            let accept = self.c * self.f(k) / (self.envelope * t.powf(-(1.0 + shape)));
            if rng.gen::<f64>() < accept {
                return k;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn finite_law_basic_queries() {
        let law = IncrementLaw::lattice_pmf(&[(1, q(1, 2)), (2, q(1, 2))]).unwrap();
        assert_eq!(law.span(), Some(1));
        assert_eq!(law.support_max(), Some(2.0));
        assert_eq!(law.cdf_tail(1.0), (0.5, 0.5));
        assert_eq!(law.cdf_tail(0.5), (0.0, 1.0));
        assert_eq!(law.cdf_tail(7.0), (1.0, 0.0));
        assert_eq!(law.tail_gt(1), 0.5);
    }

    #[test]
    fn deterministic_step() {
        let law = IncrementLaw::deterministic(2).unwrap();
        assert_eq!(law.span(), Some(2));
        assert_eq!(law.tail_gt(1), 1.0);
        assert_eq!(law.tail_gt(2), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(law.sample(&mut rng), 2.0);
        assert!(IncrementLaw::deterministic(0).is_err());
    }

    #[test]
    fn span_is_gcd_of_support() {
        let law = IncrementLaw::lattice_pmf(&[(4, q(1, 2)), (6, q(1, 2))]).unwrap();
        assert_eq!(law.span(), Some(2));
    }

    #[test]
    fn degenerate_and_unnormalized_laws_rejected() {
        assert!(IncrementLaw::lattice_pmf(&[(2, q(1, 1))]).is_err());
        assert!(IncrementLaw::lattice_pmf(&[(1, q(6, 10)), (2, q(3, 10))]).is_err());
        assert!(IncrementLaw::lattice_pmf(&[(-1, q(1, 2)), (2, q(1, 2))]).is_err());
    }

    #[test]
    fn power_law_tail_is_consistent_with_masses() {
        let law = IncrementLaw::power_law(0.7).unwrap();
        let partial: f64 = (1..=50).map(|k| law.mass(k)).sum();
        assert!((law.tail_gt(50) - (1.0 - partial)).abs() < 1e-12);
        // beyond the table the closed form continues smoothly
        let k = TAIL_TABLE_LEN as i64 + 10;
        assert!((law.tail_gt(k - 1) - law.tail_gt(k) - law.mass(k)).abs() < 1e-15);
    }

    #[test]
    fn log_power_normalization() {
        let law = IncrementLaw::log_power_law(0.5, 1.0).unwrap();
        let partial: f64 = (0..=100).map(|k| law.mass(k)).sum();
        assert!((law.tail_gt(100) - (1.0 - partial)).abs() < 1e-12);
        assert!(law.mass(0) > law.mass(1));
        // smooth tail agrees with the table at an integer
        assert!((law.tail_gt_smooth(1000.0) - law.tail_gt(1000)).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_logpow_rejected() {
        assert!(IncrementLaw::log_power_law(0.5, 3.0).is_err());
    }

    #[test]
    fn pareto_tail_closed_form() {
        let law = IncrementLaw::pareto(0.75, 1.0).unwrap();
        let (_, h) = law.cdf_tail(3.0);
        assert!((h - 4f64.powf(-0.75)).abs() < 1e-15);
        assert!((h - 0.353_553_390_593_273_8).abs() < 1e-12);
    }

    #[test]
    fn power_law_sampler_matches_tail() {
        let law = IncrementLaw::power_law(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut above = [0usize; 3];
        let cuts = [1i64, 10, 1000];
        for _ in 0..n {
            let y = law.sample(&mut rng);
            assert!(y >= 1.0 && y.fract() == 0.0);
            for (i, &c) in cuts.iter().enumerate() {
                if y > c as f64 {
                    above[i] += 1;
                }
            }
        }
        for (i, &c) in cuts.iter().enumerate() {
            let p = law.tail_gt(c);
            let emp = above[i] as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() < 5.0 * sd, "k={c}: {emp} vs {p}");
        }
    }

    #[test]
    fn log_power_sampler_beyond_table() {
        let law = IncrementLaw::log_power_law(0.5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let cut = 4 * TAIL_TABLE_LEN as i64;
        let p = law.tail_gt(cut);
        let emp = (0..n).filter(|_| law.sample(&mut rng) > cut as f64).count() as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() < 5.0 * sd, "{emp} vs {p}");
    }
}
