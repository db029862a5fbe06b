//! Machine-readable run reports: versioned JSON and flat CSV.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{applicable_lower_bounds, lb_m_eps, ub_construction_n, ConstructionBound};
use crate::error::{Error, Result};
use crate::ring::{Factorization, Rational};

pub const SCHEMA: &str = "kzn/1";

/// Six significant digits, plain notation for moderate magnitudes.
pub fn approx(r: &Rational) -> String {
    let x = r.to_f64().unwrap_or(f64::NAN);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() || x.abs() >= 1e15 || x.abs() < 1e-4 {
        return format!("{x:.5e}");
    }
    let digits = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Int(i128),
    Flag(bool),
    Text(String),
}

impl Quantity {
    fn exact_text(&self) -> String {
        match self {
            Quantity::Exact(r) => r.to_string(),
            Quantity::Int(i) => i.to_string(),
            Quantity::Flag(b) => b.to_string(),
            Quantity::Text(t) => t.clone(),
        }
    }

    fn approx_text(&self) -> String {
        match self {
            Quantity::Exact(r) => approx(r),
            _ => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Quantity::Exact(r) => json!({ "exact": r.to_string(), "approx": approx(r) }),
            Quantity::Int(i) => i64::try_from(*i).map_or_else(|_| json!(i.to_string()), |x| json!(x)),
            Quantity::Flag(b) => json!(b),
            Quantity::Text(t) => json!(t),
        }
    }
}

/// One named quantity at a parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub params: Vec<(String, String)>,
    pub name: String,
    pub value: Quantity,
    pub pass: Option<bool>,
}

impl Row {
    pub fn new(params: &[(&str, String)], name: &str, value: Quantity) -> Self {
        Row {
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            name: name.into(),
            value,
            pass: None,
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub kind: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(kind: &str) -> Self {
        Report {
            kind: kind.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    /// Fails iff some row carries a failed check.
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let params: serde_json::Map<String, Value> = r
                    .params
                    .iter()
                    .map(|(k, v)| (k.clone(), json!(v)))
                    .collect();
                let mut obj = json!({ "params": params, "name": r.name, "value": r.value.to_json() });
                if let Some(p) = r.pass {
                    obj["pass"] = json!(p);
                }
                obj
            })
            .collect();
        json!({ "schema": SCHEMA, "kind": self.kind, "pass": self.pass(), "rows": rows })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }

    /// Header: every parameter name in order of first appearance, then
    /// `name,exact,approx,pass`.
    pub fn to_csv(&self) -> Result<String> {
        let mut keys: Vec<String> = Vec::new();
        for r in &self.rows {
            for (k, _) in &r.params {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = keys.clone();
        header.extend(["name", "exact", "approx", "pass"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let map: BTreeMap<&str, &str> =
                r.params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            let mut rec: Vec<String> = keys
                .iter()
                .map(|k| map.get(k.as_str()).unwrap_or(&"").to_string())
                .collect();
            rec.push(r.name.clone());
            rec.push(r.value.exact_text());
            rec.push(r.value.approx_text());
            rec.push(r.pass.map_or(String::new(), |p| p.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Bounds at one parameter point, with a measured size when available.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub factorization: Factorization,
    pub n: usize,
    /// `(m, ε)` for the `(m, ε)`-Kakeya bound.
    pub m_eps: Option<(u64, Rational)>,
    /// Lower bounds valid for every Kakeya set in `(Z/NZ)^n`.
    pub lower: Vec<(String, Rational)>,
    /// The `(m, ε)` bound, for prime-power moduli.
    pub m_eps_bound: Option<Rational>,
    pub upper: Option<ConstructionBound>,
    pub measured: Option<usize>,
    /// Whether the measured set is a full Kakeya set, as opposed to only
    /// `(m, ε)`-Kakeya.
    pub measured_is_kakeya: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundFlags {
    pub above_lower_bounds: Option<bool>,
    pub within_closed_form: Option<bool>,
    pub within_sum_form: Option<bool>,
    pub within_certified: Option<bool>,
}

impl BoundReport {
    pub fn new(f: &Factorization, n: usize) -> Result<Self> {
        Ok(BoundReport {
            factorization: f.clone(),
            n,
            m_eps: None,
            lower: applicable_lower_bounds(f, n)?,
            m_eps_bound: None,
            upper: None,
            measured: None,
            measured_is_kakeya: false,
        })
    }

    pub fn with_m_eps(mut self, m: u64, eps: Rational) -> Result<Self> {
        let modulus = self.factorization.modulus();
        if m == 0 || m > modulus {
            return Err(crate::error::invalid(format!("m = {m} must lie in [1, {modulus}]")));
        }
        if eps < Rational::zero() || eps > Rational::from_integer(1.into()) {
            return Err(crate::error::invalid("epsilon must lie in [0, 1]"));
        }
        if self.factorization.is_prime_power() {
            let (p, k) = self.factorization.factors()[0];
            self.m_eps_bound = Some(lb_m_eps(p, k, self.n, m, &eps)?.best());
        }
        self.m_eps = Some((m, eps));
        Ok(self)
    }

    pub fn with_construction(mut self, spec: &[(u64, u32)]) -> Result<Self> {
        self.upper = Some(ub_construction_n(spec, self.n)?);
        Ok(self)
    }

    pub fn with_measured(mut self, size: usize, is_kakeya: bool) -> Self {
        self.measured = Some(size);
        self.measured_is_kakeya = is_kakeya;
        self
    }

    /// The largest lower bound the measured set must respect.
    fn binding_lower(&self) -> Option<Rational> {
        let mut all: Vec<&Rational> = Vec::new();
        if self.measured_is_kakeya {
            all.extend(self.lower.iter().map(|(_, b)| b));
        }
        all.extend(self.m_eps_bound.iter());
        all.into_iter().max().cloned()
    }

    pub fn flags(&self) -> BoundFlags {
        let size = self.measured.map(|s| Rational::from_integer(s.into()));
        let within = |f: fn(&ConstructionBound) -> &Rational| match (&size, &self.upper) {
            (Some(s), Some(u)) => Some(s <= f(u)),
            _ => None,
        };
        BoundFlags {
            above_lower_bounds: size
                .as_ref()
                .map(|s| self.binding_lower().map_or(true, |b| *s >= b)),
            within_closed_form: within(|u| &u.closed_form),
            within_sum_form: within(|u| &u.sum_form),
            within_certified: within(|u| &u.certified),
        }
    }

    /// Measured size respects every applicable lower bound (vacuous with
    /// nothing measured).
    pub fn consistent(&self) -> bool {
        self.flags().above_lower_bounds != Some(false)
    }

    pub fn to_report(&self) -> Report {
        let mut params = vec![
            ("N", self.factorization.modulus().to_string()),
            ("n", self.n.to_string()),
        ];
        if let Some((m, eps)) = &self.m_eps {
            params.push(("m", m.to_string()));
            params.push(("eps", eps.to_string()));
        }
        let mut r = Report::new("bounds");
        for (name, b) in &self.lower {
            r.push(Row::new(&params, &format!("lb_{name}"), Quantity::Exact(b.clone())));
        }
        if let Some(b) = &self.m_eps_bound {
            r.push(Row::new(&params, "lb_m_eps", Quantity::Exact(b.clone())));
        }
        if let Some(u) = &self.upper {
            r.push(Row::new(&params, "ub_closed_form", Quantity::Exact(u.closed_form.clone())));
            r.push(Row::new(&params, "ub_sum_form", Quantity::Exact(u.sum_form.clone())));
            r.push(Row::new(&params, "ub_certified", Quantity::Exact(u.certified.clone())));
        }
        if let Some(s) = self.measured {
            let flags = self.flags();
            r.push(
                Row::new(&params, "measured_size", Quantity::Int(s as i128))
                    .with_pass(flags.above_lower_bounds.unwrap_or(true)),
            );
            for (name, flag) in [
                ("within_ub_closed_form", flags.within_closed_form),
                ("within_ub_sum_form", flags.within_sum_form),
                ("within_ub_certified", flags.within_certified),
            ] {
                if let Some(f) = flag {
                    r.push(Row::new(&params, name, Quantity::Flag(f)));
                }
            }
        }
        r
    }
}

/// `Rational` from a decimal fraction string such as `1/3`, `0.25` or `1`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    use num_bigint::BigInt;
    let bad = || Error::Format(format!("not a rational number: {text:?}"));
    let text = text.trim();
    let r = if let Some((a, b)) = text.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        Rational::new(a, b)
    } else if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        Rational::new(digits, num_traits::pow(BigInt::from(10), frac.len()))
    } else {
        Rational::from_integer(text.parse().map_err(|_| bad())?)
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{factorize, rational};

    #[test]
    fn approx_formatting() {
        assert_eq!(approx(&rational(59049, 16)), "3690.56");
        assert_eq!(approx(&rational(4, 9)), "0.444444");
        assert_eq!(approx(&rational(4374, 1)), "4374");
        assert_eq!(approx(&Rational::zero()), "0");
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report::new("empty");
        let v: Value = serde_json::from_str(&r.to_json_string()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["rows"], json!([]));
        assert!(r.pass());
        assert_eq!(r.to_csv().unwrap(), "name,exact,approx,pass\n");
    }

    #[test]
    fn bound_report_rows() {
        let b = BoundReport::new(&factorize(81).unwrap(), 2)
            .unwrap()
            .with_construction(&[(3, 1)])
            .unwrap()
            .with_m_eps(81, rational(1, 1))
            .unwrap()
            .with_measured(2000, true);
        assert!(b.consistent());
        let flags = b.flags();
        assert_eq!(flags.within_certified, Some(true));
        assert_eq!(flags.within_closed_form, Some(true));
        let rep = b.to_report();
        assert!(rep.pass());
        let csv = rep.to_csv().unwrap();
        assert!(csv.starts_with("N,n,m,eps,name,exact,approx,pass\n"));
        assert!(csv.contains("81,2,81,1,ub_closed_form,59049/16,3690.56,"));
        let tiny = BoundReport::new(&factorize(6).unwrap(), 2)
            .unwrap()
            .with_measured(2, true);
        assert!(!tiny.consistent());
        assert!(!tiny.to_report().pass());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/3").unwrap(), rational(1, 3));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("1").unwrap(), rational(1, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("0.").is_err());
    }
}
