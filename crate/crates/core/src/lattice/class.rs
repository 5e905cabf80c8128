use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::IncrementLaw;

/// Fractional part of a state: `0`, `phi` or `1 - phi`, where `phi` is the
/// fractional part of the starting point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tag {
    Zero,
    Phi,
    OneMinusPhi,
}

impl Tag {
    /// `(c0, c1)` with fractional part `c0 + c1 * phi`.
    fn coefficients(self) -> (i64, i64) {
        match self {
            Tag::Zero => (0, 0),
            Tag::Phi => (0, 1),
            Tag::OneMinusPhi => (1, -1),
        }
    }
}

/// A point `int + frac(tag)` of the state space. Integer arithmetic on the
/// integer part keeps lattice sums exact even for irrational offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct State {
    pub int: i64,
    pub tag: Tag,
}

impl State {
    pub fn integer(int: i64) -> Self {
        State { int, tag: Tag::Zero }
    }

    pub fn is_zero(&self) -> bool {
        self.int == 0 && self.tag == Tag::Zero
    }

    pub fn shifted(&self, k: i64) -> Self {
        State { int: self.int + k, tag: self.tag }
    }
}

/// The essential class `C(x0) = {kd +- x0 : k in Z} ∩ [0, N]`, capped at
/// `x_max` when the support is unbounded.
#[derive(Debug, Clone, Serialize)]
pub struct EssentialClass {
    pub span: i64,
    pub x0: f64,
    /// Fractional part of `x0`.
    pub phi: f64,
    /// Distinct offsets `alpha` in `[0, d)` generating the class.
    pub offsets: Vec<f64>,
    /// `sup supp(mu)`, `None` when unbounded.
    pub cap_n: Option<f64>,
    /// Largest value enumerated: `min(N, x_max)`.
    pub cap: f64,
    pub states: Vec<State>,
}

impl EssentialClass {
    pub fn value(&self, s: State) -> f64 {
        s.int as f64 + self.frac(s.tag)
    }

    fn frac(&self, tag: Tag) -> f64 {
        match tag {
            Tag::Zero => 0.0,
            Tag::Phi => self.phi,
            Tag::OneMinusPhi => 1.0 - self.phi,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.states.iter().map(|&s| self.value(s)).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// True when the whole support fits under the cap (`N <= x_max`).
    pub fn is_complete(&self) -> bool {
        self.cap_n.is_some_and(|n| n <= self.cap)
    }

    pub fn compare(&self, a: State, b: State) -> Ordering {
        a.int.cmp(&b.int).then_with(|| self.frac(a.tag).total_cmp(&self.frac(b.tag)))
    }

    /// Index of the state with the given value (tolerance 1e-9).
    pub fn position(&self, value: f64) -> Option<usize> {
        self.states.iter().position(|&s| (self.value(s) - value).abs() < 1e-9)
    }

    pub fn state_at(&self, value: f64) -> Option<State> {
        self.position(value).map(|i| self.states[i])
    }

    pub fn index_of(&self, s: State) -> Option<usize> {
        self.states.binary_search_by(|probe| self.compare(*probe, s)).ok()
    }

    /// `a + b` if it is an integer.
    pub fn sum_int(&self, a: State, b: State) -> Option<i64> {
        let (a0, a1) = a.tag.coefficients();
        let (b0, b1) = b.tag.coefficients();
        self.integral(a.int + b.int + a0 + b0, a1 + b1)
    }

    /// `a - b` if it is an integer.
    pub fn diff_int(&self, a: State, b: State) -> Option<i64> {
        let (a0, a1) = a.tag.coefficients();
        let (b0, b1) = b.tag.coefficients();
        self.integral(a.int - b.int + a0 - b0, a1 - b1)
    }

    /// `a` if it is an integer.
    pub fn as_int(&self, a: State) -> Option<i64> {
        let (c0, c1) = a.tag.coefficients();
        self.integral(a.int + c0, c1)
    }

    fn integral(&self, base: i64, c1: i64) -> Option<i64> {
        if c1 == 0 {
            Some(base)
        } else if self.phi == 0.5 && c1 % 2 == 0 {
            Some(base + c1 / 2)
        } else {
            None
        }
    }
}

/// Enumerate `C(x0)` for a half-line lattice law, capped at `x_max`.
pub fn essential_class(m: &IncrementLaw, x0: f64, x_max: f64) -> Result<EssentialClass> {
    m.require_half_line_lattice("essential_class")?;
    if !(x0 >= 0.0 && x0.is_finite()) {
        return Err(Error::Argument(format!("x0 must be finite and non-negative, got {x0}")));
    }
    if !(x_max >= 0.0) {
        return Err(Error::Argument(format!("x_max must be non-negative, got {x_max}")));
    }
    let d = m.span().expect("lattice law has a span");
    let cap_n = m.support_max();
    let cap = cap_n.map_or(x_max, |n| n.min(x_max));
    let floor = x0.floor();
    let phi = x0 - floor;
    let r = (floor as i64).rem_euclid(d);
    let neg = |k: i64| k.rem_euclid(d);

    // (tag, residue of the integer part mod d)
    let groups: Vec<(Tag, i64)> = if phi == 0.0 {
        vec![(Tag::Zero, r), (Tag::Zero, neg(-r))]
    } else if phi == 0.5 {
        vec![(Tag::Phi, r), (Tag::Phi, neg(-r - 1))]
    } else {
        vec![(Tag::Phi, r), (Tag::OneMinusPhi, neg(-r - 1))]
    };

    let mut class = EssentialClass { span: d, x0, phi, offsets: Vec::new(), cap_n, cap, states: Vec::new() };
    for &(tag, residue) in &groups {
        let frac = class.frac(tag);
        let alpha = residue as f64 + frac;
        if !class.offsets.contains(&alpha) {
            class.offsets.push(alpha);
        }
        let mut int = residue;
        while int as f64 + frac <= cap {
            class.states.push(State { int, tag });
            int += d;
        }
    }
    class.offsets.sort_by(f64::total_cmp);
    let mut states = std::mem::take(&mut class.states);
    states.sort_by(|a, b| class.compare(*a, *b));
    states.dedup();
    class.states = states;
    Ok(class)
}
