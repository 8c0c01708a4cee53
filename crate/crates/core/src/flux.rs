//! Flux functions with exact derivative rules on a compact interval.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{linspace, Real};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi - lo < T::lit(1e-12) {
            return Err(Error::InvalidInput(format!("interval [{lo}, {hi}] must be finite with width >= 1e-12")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, u: T) -> bool {
        u >= self.lo && u <= self.hi
    }

    pub fn check(&self, u: T) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::Domain { value: u.as_f64(), lo: self.lo.as_f64(), hi: self.hi.as_f64() })
        }
    }
}

/// Derivative rule `(u, k) -> f^{(k)}(u)` for `k = 0..=max_order`.
pub type DerivativeRule<T> = Arc<dyn Fn(T, usize) -> T + Send + Sync>;

#[derive(Clone)]
pub enum FluxFamily<T> {
    /// `|u|^exponent`.
    PowerLaw { exponent: T },
    /// `sum_j coeffs[j] u^j`.
    Polynomial { coeffs: Vec<T> },
    /// Arbitrary rule with derivatives up to `max_order`.
    Rule { name: String, rule: DerivativeRule<T>, max_order: usize },
}

impl<T: fmt::Debug> fmt::Debug for FluxFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PowerLaw { exponent } => write!(f, "PowerLaw({exponent:?})"),
            Self::Polynomial { coeffs } => write!(f, "Polynomial({coeffs:?})"),
            Self::Rule { name, max_order, .. } => write!(f, "Rule({name}, order {max_order})"),
        }
    }
}

/// A flux `f` on a compact interval `K`.
#[derive(Debug, Clone)]
pub struct Flux<T> {
    family: FluxFamily<T>,
    domain: Interval<T>,
}

/// Orders above this are reported unsupported even for analytic families.
pub const MAX_ANALYTIC_ORDER: usize = 64;

impl<T: Real> Flux<T> {
    pub fn power_law(exponent: T, domain: Interval<T>) -> Result<Self> {
        if !(exponent >= T::one()) {
            return Err(Error::InvalidInput(format!("power-law exponent {exponent} must be >= 1")));
        }
        Ok(Self { family: FluxFamily::PowerLaw { exponent }, domain })
    }

    pub fn polynomial(coeffs: Vec<T>, domain: Interval<T>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial needs finite coefficients".into()));
        }
        Ok(Self { family: FluxFamily::Polynomial { coeffs }, domain })
    }

    pub fn rule(
        name: impl Into<String>,
        rule: impl Fn(T, usize) -> T + Send + Sync + 'static,
        max_order: usize,
        domain: Interval<T>,
    ) -> Self {
        Self { family: FluxFamily::Rule { name: name.into(), rule: Arc::new(rule), max_order }, domain }
    }

    /// Burgers flux `u^2 / 2`.
    pub fn burgers(domain: Interval<T>) -> Self {
        Self::polynomial(vec![T::zero(), T::zero(), T::lit(0.5)], domain).expect("valid coefficients")
    }

    /// Cubic flux `u^3`.
    pub fn cubic(domain: Interval<T>) -> Self {
        Self::polynomial(vec![T::zero(), T::zero(), T::zero(), T::one()], domain).expect("valid coefficients")
    }

    pub fn family(&self) -> &FluxFamily<T> {
        &self.family
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    /// Same rule on another interval.
    pub fn with_domain(&self, domain: Interval<T>) -> Self {
        Self { family: self.family.clone(), domain }
    }

    /// Adds `slope * u + offset`; the result shares every derivative of order >= 2.
    pub fn add_linear(&self, slope: T, offset: T) -> Self {
        let family = match &self.family {
            FluxFamily::Polynomial { coeffs } => {
                let mut c = coeffs.clone();
                c.resize(c.len().max(2), T::zero());
                c[0] = c[0] + offset;
                c[1] = c[1] + slope;
                FluxFamily::Polynomial { coeffs: c }
            }
            _ => {
                let base = self.clone();
                let max_order = self.max_order();
                FluxFamily::Rule {
                    name: format!("{:?} + linear", self.family),
                    rule: Arc::new(move |u, k| {
                        let v = base.raw_derivative(u, k);
                        match k {
                            0 => v + slope * u + offset,
                            1 => v + slope,
                            _ => v,
                        }
                    }),
                    max_order,
                }
            }
        };
        Self { family, domain: self.domain }
    }

    /// Highest derivative order the family can supply.
    pub fn max_order(&self) -> usize {
        match &self.family {
            FluxFamily::Rule { max_order, .. } => *max_order,
            _ => MAX_ANALYTIC_ORDER,
        }
    }

    pub fn eval(&self, u: T) -> Result<T> {
        self.domain.check(u)?;
        Ok(self.raw_derivative(u, 0))
    }

    pub fn derivative(&self, u: T, k: usize) -> Result<T> {
        self.domain.check(u)?;
        if k > self.max_order() {
            return Err(Error::OrderUnsupported { order: k, max: self.max_order() });
        }
        Ok(self.raw_derivative(u, k))
    }

    /// Wave speed `a(u) = f'(u)`.
    pub fn speed(&self, u: T) -> Result<T> {
        self.derivative(u, 1)
    }

    /// Derivative without domain or order checks. Hot loops in the solvers use this
    /// after validating their data once.
    pub fn raw_derivative(&self, u: T, k: usize) -> T {
        match &self.family {
            FluxFamily::PowerLaw { exponent } => power_law_derivative(*exponent, u, k),
            FluxFamily::Polynomial { coeffs } => polynomial_derivative(coeffs, u, k),
            FluxFamily::Rule { rule, .. } => rule(u, k),
        }
    }

    /// Largest relative mismatch between each derivative rule of order `1..=max_order`
    /// and a central difference of the rule one order below, on an interior grid.
    /// Power-law fluxes are only probed at `|u| >= 5%` of the domain width.
    pub fn derivative_consistency(&self, max_order: usize, grid_size: usize) -> Result<T> {
        if max_order > self.max_order() {
            return Err(Error::OrderUnsupported { order: max_order, max: self.max_order() });
        }
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        let w = hi - lo;
        let step = w * T::lit(1e-4);
        let away = w * T::lit(0.05);
        let mut worst = T::zero();
        for u in linspace(lo + T::lit(0.02) * w, hi - T::lit(0.02) * w, grid_size.max(3)) {
            if matches!(self.family, FluxFamily::PowerLaw { .. }) && u.abs() < away {
                continue;
            }
            for k in 1..=max_order {
                let fd = (self.raw_derivative(u + step, k - 1) - self.raw_derivative(u - step, k - 1)) / (step + step);
                let exact = self.raw_derivative(u, k);
                let scale = exact.abs().max(T::one());
                worst = worst.max((fd - exact).abs() / scale);
            }
        }
        Ok(worst)
    }
}

fn falling_factorial<T: Real>(e: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (e - T::from_usize_lossy(j)))
}

/// `d^k/du^k |u|^e`; at `u = 0` the right-hand limit is used, `+inf` where it blows up.
fn power_law_derivative<T: Real>(e: T, u: T, k: usize) -> T {
    let coef = falling_factorial(e, k);
    if coef == T::zero() {
        return T::zero();
    }
    let rest = e - T::from_usize_lossy(k);
    if u == T::zero() {
        return if rest > T::zero() {
            T::zero()
        } else if rest == T::zero() {
            coef
        } else {
            T::infinity() * coef.signum()
        };
    }
    let sign = if u < T::zero() && k % 2 == 1 { -T::one() } else { T::one() };
    coef * sign * u.abs().powf(rest)
}

fn polynomial_derivative<T: Real>(coeffs: &[T], u: T, k: usize) -> T {
    if k >= coeffs.len() {
        return T::zero();
    }
    coeffs[k..]
        .iter()
        .enumerate()
        .rev()
        .fold(T::zero(), |acc, (i, &c)| acc * u + c * falling_factorial(T::from_usize_lossy(i + k), k))
}

/// Parses the inline form `family=powerlaw exponent=3.0 domain=-1,1` or
/// `family=poly coeffs=0,0,0.5 domain=-2,2`. A missing domain defaults to `[-1, 1]`.
pub fn parse_flux_spec<T: Real>(text: &str) -> Result<Flux<T>> {
    let mut fields = Vec::new();
    for token in text.split_whitespace() {
        let (k, v) =
            token.split_once('=').ok_or_else(|| Error::InvalidInput(format!("expected key=value, got `{token}`")))?;
        fields.push((k.trim().to_string(), v.trim().to_string()));
    }
    flux_from_fields(fields.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

/// Builds a flux from `(key, value)` pairs: `family`, `exponent`, `coeffs`, `domain`.
pub fn flux_from_fields<'a, T: Real>(fields: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Flux<T>> {
    let mut family = None;
    let mut exponent = None;
    let mut coeffs = None;
    let mut domain = (T::lit(-1.0), T::one());
    for (k, v) in fields {
        match k {
            "family" => family = Some(v.to_string()),
            "exponent" => exponent = Some(parse_real::<T>(k, v)?),
            "coeffs" => coeffs = Some(parse_list::<T>(k, v)?),
            "domain" => {
                let d = parse_list::<T>(k, v)?;
                if d.len() != 2 {
                    return Err(Error::InvalidInput("domain needs two values lo,hi".into()));
                }
                domain = (d[0], d[1]);
            }
            _ => {}
        }
    }
    let domain = Interval::new(domain.0, domain.1)?;
    match family.as_deref() {
        Some("powerlaw") | Some("power") => {
            let e = exponent.ok_or_else(|| Error::InvalidInput("missing field `exponent`".into()))?;
            Flux::power_law(e, domain)
        }
        Some("poly") | Some("polynomial") => {
            let c = coeffs.ok_or_else(|| Error::InvalidInput("missing field `coeffs`".into()))?;
            Flux::polynomial(c, domain)
        }
        Some(other) => Err(Error::InvalidInput(format!("unknown flux family `{other}`"))),
        None => Err(Error::InvalidInput("missing field `family`".into())),
    }
}

fn parse_real<T: Real>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<f64>()
        .ok()
        .and_then(T::from_f64)
        .ok_or_else(|| Error::InvalidInput(format!("field `{key}`: `{v}` is not a number")))
}

fn parse_list<T: Real>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse_real(key, x)).collect()
}
