use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kzn::bounds::ub_construction_n;
use kzn::geometry::{enumerate_projective, Line};
use kzn::hasse::{decode_coeffs, decode_row, m_row, monomial_exponents, verify_decode, WeightFunction};
use kzn::incidence::{
    binom_rank_bound, build_m, diag_rank_bound, lift_directions, relaxed_rank_bound, relaxed_threshold_holds,
    verify_restricted_rank, MAX_M_SIZE,
};
use kzn::kakeya::{
    construct_kakeya_n, greedy_kakeya, min_kakeya_bruteforce, verify_kakeya, KakeyaReport, KakeyaWitness, PointSet,
    MAX_BRUTEFORCE_GRID,
};
use kzn::report::{parse_rational, BoundReport, Quantity, Report, Row};
use kzn::ring::{factorize, rational_int, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Format, Output, Sweep};

type Params = Vec<(&'static str, String)>;

fn emit(report: &Report, output: &Output) -> Result<bool> {
    let text = match output.format {
        Format::Json => report.to_json_string() + "\n",
        Format::Csv => report.to_csv()?,
    };
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(report.pass())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// `"2:1,3:0"` as `[(2, 1), (3, 0)]`.
pub fn parse_spec(text: &str) -> Result<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (p, s) = part
            .split_once(':')
            .with_context(|| format!("expected p:s, got {part:?}"))?;
        out.push((p.trim().parse()?, s.trim().parse()?));
    }
    if out.is_empty() {
        bail!("empty construction spec");
    }
    Ok(out)
}

fn spec_text(spec: &[(u64, u32)]) -> String {
    spec.iter().map(|(p, s)| format!("{p}:{s}")).collect::<Vec<_>>().join(",")
}

fn kakeya_rows(r: &KakeyaReport, params: &Params, eps: &Rational) -> Report {
    let mut out = Report::new("verify");
    let row = |name: &str, q: Quantity| Row::new(params, name, q);
    out.push(row("size", Quantity::Int(r.size as i128)));
    out.push(row("directions", Quantity::Int(r.total_directions as i128)));
    out.push(row("rich_directions", Quantity::Int(r.satisfied as i128)));
    out.push(row("epsilon", Quantity::Exact(r.epsilon.clone())));
    if let Some((d, rich)) = &r.worst {
        out.push(row("worst_direction", Quantity::Text(format!("{:?}", d.rep()))));
        out.push(row("worst_richness", Quantity::Int(*rich as i128)));
    }
    out.push(row("m_eps_kakeya", Quantity::Flag(r.meets(eps))).with_pass(r.meets(eps)));
    out
}

pub fn construct_report(spec: &[(u64, u32)], n: usize) -> Result<(Report, kzn::kakeya::Construction)> {
    let c = construct_kakeya_n(spec, n)?;
    let modulus = c.set.modulus();
    let params: Params = vec![
        ("spec", spec_text(spec)),
        ("N", modulus.to_string()),
        ("n", n.to_string()),
    ];
    let v = verify_kakeya(&c.set, modulus, Some(&c.witness))?;
    let mut report = Report::new("construct");
    report.extend(kakeya_rows(&v, &params, &Rational::from_integer(1.into())));
    report.push(Row::new(&params, "is_kakeya", Quantity::Flag(v.is_kakeya())).with_pass(v.is_kakeya()));
    let f = factorize(modulus)?;
    let bounds = BoundReport::new(&f, n)?
        .with_construction(spec)?
        .with_measured(c.set.len(), v.is_kakeya());
    report.extend(bounds.to_report());
    let certified = ub_construction_n(spec, n)?.certified;
    let ok = rational_int(c.set.len() as u64) <= certified;
    report.push(Row::new(&params, "meets_certified_size", Quantity::Flag(ok)).with_pass(ok));
    Ok((report, c))
}

pub fn construct(
    ps: Option<(u64, u32)>,
    spec: Option<&str>,
    n: usize,
    points: Option<PathBuf>,
    witness: Option<PathBuf>,
    output: &Output,
) -> Result<bool> {
    let spec = match (ps, spec) {
        (Some(ps), None) => vec![ps],
        (None, Some(text)) => parse_spec(text)?,
        _ => bail!("give either --p and --s, or --spec"),
    };
    let (report, c) = construct_report(&spec, n)?;
    if let Some(path) = points {
        write_file(&path, &c.set.to_json()?)?;
    }
    if let Some(path) = witness {
        write_file(&path, &c.witness.to_json()?)?;
    }
    emit(&report, output)
}

pub fn verify(input: &Path, m: Option<u64>, eps: &str, witness: Option<&Path>, output: &Output) -> Result<bool> {
    let set = PointSet::from_json(&read_file(input)?)?;
    let m = m.unwrap_or(set.modulus());
    let eps = parse_rational(eps)?;
    let w = witness
        .map(|p| -> Result<KakeyaWitness> { Ok(KakeyaWitness::from_json(&read_file(p)?, set.modulus())?) })
        .transpose()?;
    let r = verify_kakeya(&set, m, w.as_ref())?;
    let params: Params = vec![
        ("N", set.modulus().to_string()),
        ("n", set.dim().to_string()),
        ("m", m.to_string()),
        ("eps", eps.to_string()),
    ];
    let mut report = kakeya_rows(&r, &params, &eps);
    let f = factorize(set.modulus())?;
    let mut bounds = BoundReport::new(&f, set.dim())?;
    if r.meets(&eps) {
        bounds = bounds.with_m_eps(m, eps.clone())?.with_measured(set.len(), r.is_kakeya());
    }
    report.extend(bounds.to_report());
    emit(&report, output)
}

pub fn rank_report(p: u64, ell: u32, n: usize, restrict: bool) -> Result<Report> {
    let m = build_m(p, ell, n)?;
    let params: Params = vec![("p", p.to_string()), ("ell", ell.to_string()), ("n", n.to_string())];
    let row = |name: &str, q: Quantity| Row::new(&params, name, q);
    let mut report = Report::new("rank");
    let rank = m.rank()? as i128;
    let big = |b: num_bigint::BigUint| Quantity::Exact(rational_int(b));
    let diag = diag_rank_bound(p, ell, n)?;
    let diag_ok = num_bigint::BigUint::from(rank as u64) >= diag;
    report.push(row("size", Quantity::Int(m.size() as i128)));
    report.push(row("rank", Quantity::Int(rank)));
    report.push(row("diag_bound", big(diag)).with_pass(diag_ok));
    if relaxed_threshold_holds(p, ell)? {
        let relaxed = relaxed_rank_bound(p, ell, n)?;
        let ok = num_bigint::BigUint::from(rank as u64) >= relaxed;
        report.push(row("relaxed_bound", big(relaxed)).with_pass(ok));
    }
    let binom = binom_rank_bound(p, ell, n)?;
    report.push(row("binom_bound", Quantity::Exact(rational_int(binom))));
    if restrict {
        let r = verify_restricted_rank(p, ell, n)?;
        report.push(row("restricted_rank", Quantity::Int(r.restricted_rank as i128)).with_pass(r.equal()));
    }
    Ok(report)
}

pub fn rank(p: u64, ell: u32, n: usize, restrict: bool, output: &Output) -> Result<bool> {
    emit(&rank_report(p, ell, n, restrict)?, output)
}

pub fn bounds(
    modulus: u64,
    n: usize,
    m: Option<u64>,
    eps: Option<&str>,
    spec: Option<&str>,
    output: &Output,
) -> Result<bool> {
    let f = factorize(modulus)?;
    let mut b = BoundReport::new(&f, n)?;
    if m.is_some() || eps.is_some() {
        let eps = parse_rational(eps.unwrap_or("1"))?;
        b = b.with_m_eps(m.unwrap_or(modulus), eps)?;
    }
    if let Some(spec) = spec {
        let spec = parse_spec(spec)?;
        b = b.with_construction(&spec)?;
    }
    emit(&b.to_report(), output)
}

pub fn decode_check(
    p: u64,
    k: u32,
    ell: u32,
    n: usize,
    all_directions: bool,
    seed: u64,
    output: &Output,
) -> Result<bool> {
    if ell < k {
        bail!("need ell >= k");
    }
    let modulus = p
        .checked_pow(k)
        .context("p^k overflows")?;
    let q = p.checked_pow(ell).context("p^ell overflows")?;
    let cols = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if cols > MAX_M_SIZE {
        bail!("p^(ell n) = {cols} exceeds the budget {MAX_M_SIZE}");
    }
    let exps = monomial_exponents(q as u32, n);
    let mut dirs = enumerate_projective(modulus, n)?;
    if !all_directions {
        dirs.truncate(1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cases, mut checked, mut failures) = (0usize, 0usize, 0usize);
    for d in dirs {
        let mut lifts = lift_directions(std::slice::from_ref(&d), p, k, ell)?.lifted;
        if !all_directions {
            lifts.truncate(1);
        }
        for lift in lifts {
            let base: Vec<u64> = (0..n).map(|_| rng.gen_range(0..modulus)).collect();
            let line = Line::new(base, d.clone())?;
            let pi = WeightFunction::uniform(line.clone(), q / modulus)?;
            let dc = decode_coeffs(&line, &lift, &pi, ell)?;
            let r = verify_decode(&dc, &exps)?;
            cases += 1;
            checked += r.checked;
            let row_ok = decode_row(&dc)? == m_row(&lift, p, ell)?;
            if !r.pass() || !row_ok {
                failures += 1;
            }
        }
    }
    let params: Params = vec![
        ("p", p.to_string()),
        ("k", k.to_string()),
        ("ell", ell.to_string()),
        ("n", n.to_string()),
        ("seed", seed.to_string()),
    ];
    let mut report = Report::new("decode-check");
    report.push(Row::new(&params, "cases", Quantity::Int(cases as i128)));
    report.push(Row::new(&params, "monomials_checked", Quantity::Int(checked as i128)));
    report.push(Row::new(&params, "failures", Quantity::Int(failures as i128)).with_pass(failures == 0));
    emit(&report, output)
}

pub fn search_min(modulus: u64, n: usize, seed: u64, points: Option<PathBuf>, output: &Output) -> Result<bool> {
    let grid = (modulus as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let exhaustive = grid <= MAX_BRUTEFORCE_GRID;
    let set = if exhaustive {
        min_kakeya_bruteforce(modulus, n)?.1
    } else {
        greedy_kakeya(modulus, n, seed)?
    };
    let params: Params = vec![
        ("N", modulus.to_string()),
        ("n", n.to_string()),
        ("method", if exhaustive { "exhaustive" } else { "greedy" }.to_string()),
    ];
    let v = verify_kakeya(&set, modulus, None)?;
    let mut report = Report::new("search-min");
    report.push(Row::new(&params, "size", Quantity::Int(set.len() as i128)));
    report.push(Row::new(&params, "is_kakeya", Quantity::Flag(v.is_kakeya())).with_pass(v.is_kakeya()));
    let f = factorize(modulus)?;
    report.extend(BoundReport::new(&f, n)?.with_measured(set.len(), v.is_kakeya()).to_report());
    if let Some(path) = points {
        write_file(&path, &set.to_json()?)?;
    }
    emit(&report, output)
}

pub fn report(sweep: Sweep, p: u64, s: u32, max_ell: u32, max_n: usize, output: &Output) -> Result<bool> {
    let mut report = Report::new(match sweep {
        Sweep::Empty => "empty",
        Sweep::Rank => "rank-sweep",
        Sweep::Construct => "construct-sweep",
    });
    match sweep {
        Sweep::Empty => {}
        Sweep::Rank => {
            for ell in 1..=max_ell {
                for n in 1..=max_n {
                    let size = (p as u128).checked_pow(ell * n as u32).unwrap_or(u128::MAX);
                    if size <= MAX_M_SIZE {
                        report.extend(rank_report(p, ell, n, false)?);
                    }
                }
            }
        }
        Sweep::Construct => {
            for n in 1..=max_n {
                report.extend(construct_report(&[(p, s)], n)?.0);
            }
        }
    }
    emit(&report, output)
}
