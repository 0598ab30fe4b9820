use serde::{Deserialize, Serialize};

use super::{iterate_log, DynamicsError, OrbitParams, OrbitRecord, OrbitStatus};
use crate::baker::{annuli, RadiiTable};
use crate::modulus::EntireFunction;
use crate::scalar::{ln_add_exp, ln_exp_plus, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    WanderingAnnulus,
    GapComponent,
    Central,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentEstimate {
    pub kind: ComponentKind,
    pub n: Option<usize>,
    pub t_inner: f64,
    pub t_outer: f64,
    /// `A_n`, for wandering annuli.
    pub seed: Option<(f64, f64)>,
    /// `[t_{n-1}/2, 2 t_{n+1}]`, for wandering annuli.
    pub outer_bound: Option<(f64, f64)>,
    /// `ln` of the `|z| + 1` ratio; this one is unbounded in general.
    pub log_b0: f64,
    pub b1: f64,
    pub b2: f64,
    /// Set when an undecided orbit stopped the bisection of an edge.
    pub inconclusive: bool,
}

/// `(ln b0, b1, b2)` for the bracket `[t_inner, t_outer]`.
pub fn component_ratios(t_inner: f64, t_outer: f64) -> (f64, f64, f64) {
    let log_b0 = ln_exp_plus(t_outer, 1.0) - ln_exp_plus(t_inner, 1.0);
    let den = ln_exp_plus(t_inner, 3.0);
    let b1 = ln_exp_plus(t_outer, 3.0) / den;
    let b2 = ln_exp_plus(t_outer, 30.0).ln() / den;
    (log_b0, b1, b2)
}

impl ComponentEstimate {
    fn new(kind: ComponentKind, n: Option<usize>, t_inner: f64, t_outer: f64) -> Self {
        let (log_b0, b1, b2) = component_ratios(t_inner, t_outer);
        ComponentEstimate {
            kind,
            n,
            t_inner,
            t_outer,
            seed: None,
            outer_bound: None,
            log_b0,
            b1,
            b2,
            inconclusive: false,
        }
    }
}

type Signature = (Vec<Option<usize>>, OrbitStatus);

fn signature<T: Real>(f: &EntireFunction<T>, t: T, params: &OrbitParams) -> Option<Signature> {
    let rec: OrbitRecord = iterate_log(f, t, T::zero(), params).ok()?;
    (rec.status != OrbitStatus::Undecided).then(|| rec.signature())
}

/// Whether the orbit from `t` follows `sig`. An undecided orbit still
/// answers `false` once its exact part has left the itinerary.
fn follows<T: Real>(f: &EntireFunction<T>, t: T, params: &OrbitParams, sig: &Signature) -> Option<bool> {
    let rec = iterate_log(f, t, T::zero(), params).ok()?;
    if rec.status != OrbitStatus::Undecided {
        return Some(&rec.signature() == sig);
    }
    let exact = rec.upper_from.unwrap_or(rec.annulus.len());
    if let (Some(j), Some(Some(m))) = (rec.upper_from, sig.0.get(exact - 1)) {
        // the upper bound already falls short of the band the seed reaches
        let short = params
            .bands
            .iter()
            .find(|b| b.n == *m)
            .is_some_and(|b| rec.ts.get(j).is_some_and(|&u| u < b.t_inner));
        if short {
            return Some(false);
        }
    }
    let seen = &rec.annulus[1..exact];
    if seen.len() <= sig.0.len() && sig.0[..seen.len()] == *seen {
        None
    } else {
        Some(false)
    }
}

/// Moves `outside` towards `inside` while keeping it outside the set of
/// points sharing `sig`. `None` when an undecided orbit got in the way.
fn bisect<T: Real>(
    f: &EntireFunction<T>,
    params: &OrbitParams,
    sig: &Signature,
    inside: T,
    outside: T,
    iters: usize,
) -> Option<T> {
    let same = |t: T| follows(f, t, params, sig);
    let mut outside = outside;
    match same(outside) {
        Some(true) => return Some(outside),
        Some(false) => {}
        None => {
            let max = f.certified_max_t()? - T::ln2();
            if !(max < outside && max > inside) || same(max)? {
                return None;
            }
            outside = max;
        }
    }
    let mut inside = inside;
    for _ in 0..iters {
        let mid = (inside + outside) / T::from_u64(2);
        if same(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Some(outside)
}

/// Brackets along the positive axis for the components `U_n`, the gaps
/// between them and the central piece below the first one.
///
/// Each `U_n` starts from `[t_{n-1}/2, 2 t_{n+1}]`; with `refine_iters > 0`
/// each edge is bisected towards `A_n` against the annulus itinerary of
/// the orbits starting on the edges of `A_n`.
pub fn detect_components<T: Real>(
    f: &EntireFunction<T>,
    table: &RadiiTable<T>,
    refine_iters: usize,
    params: &OrbitParams,
) -> Result<Vec<ComponentEstimate>, DynamicsError> {
    let t = table.log_radii();
    for n in 2..t.len() {
        if !(t[n] > t[n - 1]) {
            return Err(DynamicsError::Precondition(format!(
                "log radii must increase after the first; t_{} <= t_{}",
                n + 1,
                n
            )));
        }
    }
    let ann = annuli(table);
    let seeds: Vec<_> = ann.a.iter().filter(|b| b.n >= 2).collect();
    if seeds.is_empty() {
        return Err(DynamicsError::Precondition(
            "no nonempty annulus beyond n0".into(),
        ));
    }
    let two = T::from_u64(2);
    let mut wandering = Vec::new();
    for a in seeds {
        let n = a.n;
        let lo = table.t(n - 1).unwrap() / two;
        let hi = table.t(n + 1).unwrap() * two;
        let (mut inner, mut outer) = (lo, hi);
        let mut inconclusive = false;
        if refine_iters > 0 {
            let sig_in = signature(f, a.t_inner, params);
            let sig_out = signature(f, a.t_outer, params);
            match (sig_in, sig_out) {
                (Some(si), Some(so)) if si == so => {
                    match bisect(f, params, &si, a.t_inner, lo, refine_iters) {
                        Some(e) => inner = e,
                        None => inconclusive = true,
                    }
                    match bisect(f, params, &so, a.t_outer, hi, refine_iters) {
                        Some(e) => outer = e,
                        None => inconclusive = true,
                    }
                }
                _ => inconclusive = true,
            }
        }
        let mut c = ComponentEstimate::new(
            ComponentKind::WanderingAnnulus,
            Some(n),
            inner.to_f64(),
            outer.to_f64(),
        );
        c.seed = Some((a.t_inner.to_f64(), a.t_outer.to_f64()));
        c.outer_bound = Some((lo.to_f64(), hi.to_f64()));
        c.inconclusive = inconclusive;
        wandering.push(c);
    }
    let mut out = vec![ComponentEstimate::new(
        ComponentKind::Central,
        None,
        f64::NEG_INFINITY,
        wandering[0].t_inner,
    )];
    for (i, w) in wandering.iter().enumerate() {
        out.push(w.clone());
        if let Some(next) = wandering.get(i + 1) {
            if w.t_outer < next.t_inner {
                out.push(ComponentEstimate::new(
                    ComponentKind::GapComponent,
                    w.n,
                    w.t_outer,
                    next.t_inner,
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BRatios {
    pub log_b0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Largest contribution of each kind; `None` for an empty list.
pub fn b_ratios(components: &[ComponentEstimate]) -> Option<BRatios> {
    let first = components.first()?;
    let mut r = BRatios {
        log_b0: first.log_b0,
        b1: first.b1,
        b2: first.b2,
    };
    for c in &components[1..] {
        r.log_b0 = r.log_b0.max(c.log_b0);
        r.b1 = r.b1.max(c.b1);
        r.b2 = r.b2.max(c.b2);
    }
    Some(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Witness {
    Found { n: usize, b1: f64, needed: f64 },
    NotYet { max_b1: Option<f64>, needed: f64 },
}

/// First wandering annulus whose `b1` reaches `m_target / 5`.
pub fn strong_uniform_failure_witness(components: &[ComponentEstimate], m_target: f64) -> Witness {
    let needed = m_target / 5.0;
    let mut max_b1: Option<f64> = None;
    for c in components
        .iter()
        .filter(|c| c.kind == ComponentKind::WanderingAnnulus)
    {
        if c.b1 >= needed {
            return Witness::Found {
                n: c.n.unwrap_or(0),
                b1: c.b1,
                needed,
            };
        }
        max_b1 = Some(max_b1.map_or(c.b1, |m| m.max(c.b1)));
    }
    Witness::NotYet { max_b1, needed }
}

/// `(1/2) ln((e^tb + e^tbd) / (e^ta + e^tbd))`; `t_boundary = -inf` stands
/// for a boundary point at the origin.
pub fn hyperbolic_radial_bound(t_a: f64, t_b: f64, t_boundary: f64) -> Result<f64, DynamicsError> {
    if t_a.is_nan() || t_b.is_nan() || t_boundary.is_nan() || t_boundary == f64::INFINITY {
        return Err(DynamicsError::Precondition("non-finite argument".into()));
    }
    if t_a > t_b {
        return Err(DynamicsError::Precondition(format!(
            "t_a = {t_a} exceeds t_b = {t_b}"
        )));
    }
    if t_a == t_b {
        return Ok(0.0);
    }
    Ok(0.5 * (ln_add_exp(t_b, t_boundary) - ln_add_exp(t_a, t_boundary)))
}
