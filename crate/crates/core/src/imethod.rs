//! The I-operator and the multilinear calculus behind the modified energies.
//!
//! A `k`-multiplier functional is
//! `Λ_k(m; u_1, …, u_k) = Σ_{ξ_1+…+ξ_k=0} m(ξ) Π_j û_j(ξ_j)`, the sum running
//! over nonzero band frequencies. With `m(ξ_1, ξ_2) = m(ξ_1) m(ξ_2)` this is
//! exactly `‖Iu‖²_{L²}` under the coefficient convention of [`crate::spectral`].
//!
//! Along the flow `∂_t û = (iξ³ − γ)û − (iξ/2)(u²)^ + f̂`,
//!
//! ```text
//! d/dt Λ_k(m) = −kγ Λ_k(m) + Λ_k(α_k m) + k Λ_k(m; u, …, u, f)
//!               − (ik/2) Λ_{k+1}(m(ξ_1, …, ξ_{k−1}, ξ_k + ξ_{k+1}) (ξ_k + ξ_{k+1}))
//! ```
//!
//! with `α_k = i(ξ_1³ + … + ξ_k³)`. At `k = 2` the last term is `Λ_3(M_3)` with
//! `M_3 = (i/3) Σ_j m²(ξ_j) ξ_j`; the corrections `σ_3 = −M_3/α_3`,
//! `σ_4 = −M_4/α_4` remove the non-resonant part of each flux in turn.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SobolevIndex, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance under which `M_4` counts as vanishing on `{α_4 = 0}`.
pub const CANCELLATION_TOL: f64 = 1e-12;

/// Fourier multiplier `m_{N,s}(ξ) = min(1, (|ξ|/N)^s)`, `s < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IMultiplier {
    n: f64,
    s: f64,
}

impl IMultiplier {
    pub fn new(n: f64, s: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Domain(format!("cutoff N = {n} must be positive")));
        }
        let s = SobolevIndex::new(s)?.value();
        if s >= 0.0 {
            return Err(Error::Domain(format!("I-multiplier needs s < 0, got {s}")));
        }
        Ok(Self { n, s })
    }

    #[inline]
    pub fn cutoff(&self) -> f64 {
        self.n
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    #[inline]
    pub fn m(&self, xi: i64) -> f64 {
        let a = xi.unsigned_abs() as f64;
        if a <= self.n {
            1.0
        } else {
            (a / self.n).powf(self.s).min(1.0)
        }
    }
}

pub fn m_value(xi: i64, im: &IMultiplier) -> f64 {
    im.m(xi)
}

/// `I u`: `coeff(ξ) ↦ m(ξ) coeff(ξ)`.
pub fn apply_i(f: &SpectralField, im: &IMultiplier) -> SpectralField {
    f.map_real(|xi| im.m(xi as i64))
}

fn check_hyperplane(xis: &[i64]) -> Result<()> {
    let sum: i64 = xis.iter().sum();
    if sum != 0 {
        return Err(Error::Domain(format!("frequencies {xis:?} sum to {sum}, not 0")));
    }
    Ok(())
}

fn check_nonzero(xis: &[i64]) -> Result<()> {
    if xis.contains(&0) {
        return Err(Error::Domain(format!("zero frequency in {xis:?}")));
    }
    Ok(())
}

/// Resonance function `α_k = i(ξ_1³ + … + ξ_k³)` on `Σξ = 0`.
pub fn alpha_k(xis: &[i64]) -> Result<Complex64> {
    check_hyperplane(xis)?;
    let cubes: f64 = xis.iter().map(|&x| (x as f64).powi(3)).sum();
    Ok(I * cubes)
}

/// Calls `visit` on every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &mut [i64], visit: &mut impl FnMut(&[i64])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `[m]_sym(ξ) = (1/k!) Σ_{σ ∈ S_k} m(σ(ξ))`.
pub fn symmetrize(m: impl Fn(&[i64]) -> Complex64, xis: &[i64]) -> Complex64 {
    let mut buf = xis.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for_each_permutation(&mut buf, &mut |p| {
        acc += m(p);
        count += 1;
    });
    acc / count as f64
}

/// Direct nested-loop evaluation of `Λ_k(m; u_1, …, u_k)`, `2 ≤ k ≤ 5`.
///
/// The outermost frequency is distributed over threads; partial sums are
/// combined in ascending frequency order.
pub fn lambda_k<F>(m: F, fields: &[&SpectralField]) -> Result<Complex64>
where
    F: Fn(&[i64]) -> Complex64 + Sync,
{
    let k = fields.len();
    if !(2..=5).contains(&k) {
        return Err(Error::Input(format!("Λ_k needs 2 ≤ k ≤ 5 fields, got {k}")));
    }
    let grid = fields[0].grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::Shape("fields of Λ_k live on different grids".into()));
    }
    let band = grid.k() as i64;
    let spectra: Vec<Vec<Complex64>> = fields.iter().map(|f| f.full_spectrum()).collect();
    let outer: Vec<i64> = (-band..=band).filter(|&x| x != 0).collect();
    let partial: Vec<Complex64> = outer
        .par_iter()
        .map(|&x0| {
            let mut xis = [0i64; 5];
            xis[0] = x0;
            let mut acc = Complex64::new(0.0, 0.0);
            let lead = spectra[0][(x0 + band) as usize];
            if lead.norm_sqr() != 0.0 {
                nested(&m, &spectra, band, &mut xis, 1, x0, lead, &mut acc);
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum())
}

#[allow(clippy::too_many_arguments)]
fn nested<F: Fn(&[i64]) -> Complex64>(
    m: &F,
    spectra: &[Vec<Complex64>],
    band: i64,
    xis: &mut [i64; 5],
    depth: usize,
    partial_sum: i64,
    prod: Complex64,
    acc: &mut Complex64,
) {
    let k = spectra.len();
    if depth == k - 1 {
        let last = -partial_sum;
        if last == 0 || last.abs() > band {
            return;
        }
        xis[depth] = last;
        let c = spectra[depth][(last + band) as usize];
        *acc += m(&xis[..k]) * prod * c;
        return;
    }
    for x in -band..=band {
        if x == 0 {
            continue;
        }
        let c = spectra[depth][(x + band) as usize];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        xis[depth] = x;
        nested(m, spectra, band, xis, depth + 1, partial_sum + x, prod * c, acc);
    }
}

/// `M_3 = (i/3)(m²(ξ_1)ξ_1 + m²(ξ_2)ξ_2 + m²(ξ_3)ξ_3)`, the flux multiplier of `‖Iu‖²`.
pub fn m3(xis: [i64; 3], im: &IMultiplier) -> Result<Complex64> {
    check_hyperplane(&xis)?;
    let w: f64 = xis.iter().map(|&x| im.m(x).powi(2) * x as f64).sum();
    Ok(I * (w / 3.0))
}

fn real_quotient(num: Complex64, den: Complex64) -> f64 {
    let q = num / den;
    debug_assert!(
        q.im.abs() < 1e-14 * q.re.abs() + 1e-300,
        "multiplier quotient not real: {q}"
    );
    q.re
}

/// `σ_3 = −M_3/α_3`.
pub fn sigma3(xis: [i64; 3], im: &IMultiplier) -> Result<f64> {
    check_hyperplane(&xis)?;
    check_nonzero(&xis)?;
    Ok(real_quotient(-m3(xis, im)?, alpha_k(&xis)?))
}

/// `M_4 = −(3i/2)[σ_3(ξ_1, ξ_2, ξ_3+ξ_4)(ξ_3+ξ_4)]_sym`; terms with
/// `ξ_3 + ξ_4 = 0` are zero.
pub fn m4(xis: [i64; 4], im: &IMultiplier) -> Result<Complex64> {
    check_hyperplane(&xis)?;
    check_nonzero(&xis)?;
    // σ_3 is symmetric, so a permutation's term only depends on which pair
    // lands in the last two slots: 6 pairs, each hit by 4 of the 24 orderings.
    let mut acc = 0.0;
    for (p, q) in PAIRS4 {
        let pair = xis[p] + xis[q];
        if pair == 0 {
            continue;
        }
        let rest: Vec<i64> = (0..4).filter(|&j| j != p && j != q).map(|j| xis[j]).collect();
        acc += sigma3([rest[0], rest[1], pair], im)? * pair as f64;
    }
    Ok(I * (-1.5 * acc / 6.0))
}

const PAIRS4: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const PAIRS5: [(usize, usize); 10] =
    [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Bound used for the `{α_4 = 0}` cancellation check: the largest single
/// permutation term of `M_4`.
pub fn m4_scale(xis: [i64; 4], im: &IMultiplier) -> Result<f64> {
    let mut scale = 0.0f64;
    for (p, q) in PAIRS4 {
        let pair = xis[p] + xis[q];
        if pair == 0 {
            continue;
        }
        let rest: Vec<i64> = (0..4).filter(|&j| j != p && j != q).map(|j| xis[j]).collect();
        scale = scale.max((1.5 * sigma3([rest[0], rest[1], pair], im)? * pair as f64).abs());
    }
    Ok(scale)
}

/// `σ_4 = −M_4/α_4`. On the resonant set `{α_4 = 0}` the numerator is
/// checked to vanish before returning 0.
pub fn sigma4(xis: [i64; 4], im: &IMultiplier) -> Result<f64> {
    let num = m4(xis, im)?;
    let den = alpha_k(&xis)?;
    if den.im == 0.0 {
        let scale = m4_scale(xis, im)?;
        let bound = CANCELLATION_TOL * scale;
        if num.norm() > bound {
            return Err(Error::Cancellation { xis, value: num.norm(), bound });
        }
        return Ok(0.0);
    }
    Ok(real_quotient(-num, den))
}

/// Worst `|M_4|/scale` over the resonant quadruples of a box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub reach: i64,
    /// Resonant quadruples with nonzero entries inside `|ξ_j| ≤ reach`.
    pub checked: usize,
    pub worst_ratio: f64,
    pub worst_tuple: [i64; 4],
}

impl CancellationReport {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= CANCELLATION_TOL
    }
}

/// Evaluates `M_4` on every quadruple with `Σξ_j = 0`, `α_4 = 0`, nonzero
/// entries and `|ξ_j| ≤ reach`.
pub fn resonant_cancellation(reach: i64, im: &IMultiplier) -> Result<CancellationReport> {
    if reach < 1 {
        return Err(Error::Input(format!("reach {reach} must be positive")));
    }
    let rows: Vec<(usize, f64, [i64; 4])> = (-reach..=reach)
        .into_par_iter()
        .filter(|&a| a != 0)
        .map(|a| {
            let mut row = (0usize, 0.0f64, [0i64; 4]);
            for b in (-reach..=reach).filter(|&b| b != 0) {
                for c in (-reach..=reach).filter(|&c| c != 0) {
                    let d = -(a + b + c);
                    if d == 0 || d.abs() > reach {
                        continue;
                    }
                    if (a + b) * (a + c) * (a + d) != 0 {
                        continue;
                    }
                    let x = [a, b, c, d];
                    let value = m4(x, im).expect("hyperplane tuple").norm();
                    let scale = m4_scale(x, im).expect("hyperplane tuple");
                    let ratio = if scale > 0.0 { value / scale } else if value == 0.0 { 0.0 } else { f64::INFINITY };
                    row.0 += 1;
                    if ratio > row.1 {
                        row.1 = ratio;
                        row.2 = x;
                    }
                }
            }
            row
        })
        .collect();
    let mut report = CancellationReport { reach, checked: 0, worst_ratio: 0.0, worst_tuple: [0; 4] };
    for (n, r, x) in rows {
        report.checked += n;
        if r > report.worst_ratio {
            report.worst_ratio = r;
            report.worst_tuple = x;
        }
    }
    Ok(report)
}

/// `M_5 = −2i[σ_4(ξ_1, ξ_2, ξ_3, ξ_4+ξ_5)(ξ_4+ξ_5)]_sym`.
pub fn m5(xis: [i64; 5], im: &IMultiplier) -> Result<Complex64> {
    check_hyperplane(&xis)?;
    check_nonzero(&xis)?;
    let mut acc = 0.0;
    for (p, q) in PAIRS5 {
        let pair = xis[p] + xis[q];
        if pair == 0 {
            continue;
        }
        let rest: Vec<i64> = (0..5).filter(|&j| j != p && j != q).map(|j| xis[j]).collect();
        acc += sigma4([rest[0], rest[1], rest[2], pair], im)? * pair as f64;
    }
    Ok(I * (-2.0 * acc / 10.0))
}

/// Precomputed `m²(ξ)ξ` for fast band sums of `σ_3` and `σ_4`.
pub(crate) struct SigmaTable {
    offset: i64,
    weight: Vec<f64>,
}

impl SigmaTable {
    pub(crate) fn new(im: &IMultiplier, reach: i64) -> Self {
        let weight = (-reach..=reach).map(|x| im.m(x).powi(2) * x as f64).collect();
        Self { offset: reach, weight }
    }

    #[inline]
    fn w(&self, x: i64) -> f64 {
        self.weight[(x + self.offset) as usize]
    }

    /// `σ_3(a, b, c) = −(w(a)+w(b)+w(c)) / (9abc)` on `a+b+c = 0`.
    #[inline]
    pub(crate) fn sigma3(&self, a: i64, b: i64, c: i64) -> f64 {
        let num = self.w(a) + self.w(b) + self.w(c);
        if num == 0.0 {
            return 0.0;
        }
        -num / (9.0 * a as f64 * b as f64 * c as f64)
    }

    /// `M_3 / i`.
    #[inline]
    pub(crate) fn m3_imag(&self, a: i64, b: i64, c: i64) -> f64 {
        (self.w(a) + self.w(b) + self.w(c)) / 3.0
    }

    /// `(M_4 / i, largest term)` from the six pair splittings.
    #[inline]
    fn m4_parts(&self, x: [i64; 4]) -> (f64, f64) {
        let mut acc = 0.0;
        let mut scale = 0.0f64;
        let mut term = |a: i64, b: i64, pair: i64| {
            if pair != 0 {
                let t = self.sigma3(a, b, pair) * pair as f64;
                acc += t;
                scale = scale.max(t.abs());
            }
        };
        term(x[2], x[3], x[0] + x[1]);
        term(x[1], x[3], x[0] + x[2]);
        term(x[1], x[2], x[0] + x[3]);
        term(x[0], x[3], x[1] + x[2]);
        term(x[0], x[2], x[1] + x[3]);
        term(x[0], x[1], x[2] + x[3]);
        (-0.25 * acc, 1.5 * scale)
    }

    /// `(σ_4, resonant residual)`: the residual is `|M_4|/scale` on
    /// `{α_4 = 0}` and 0 elsewhere.
    #[inline]
    pub(crate) fn sigma4(&self, x: [i64; 4]) -> (f64, f64) {
        let (m4, scale) = self.m4_parts(x);
        let a = 3.0 * (x[0] + x[1]) as f64 * (x[0] + x[2]) as f64 * (x[0] + x[3]) as f64;
        if a == 0.0 {
            let r = if scale > 0.0 { m4.abs() / scale } else { 0.0 };
            return (0.0, r);
        }
        (-m4 / a, 0.0)
    }
}

/// `Λ_3(σ_3; u, u, u)` by direct summation over the band.
pub(crate) fn lambda3_sigma3(u: &SpectralField, table: &SigmaTable) -> Complex64 {
    lambda3_with(u, |a, b, c| table.sigma3(a, b, c))
}

/// `Λ_3(M_3; u, u, u) / i`-weighted sum, returned as the complex value of `Λ_3(M_3)`.
pub(crate) fn lambda3_m3(u: &SpectralField, table: &SigmaTable) -> Complex64 {
    I * lambda3_with(u, |a, b, c| table.m3_imag(a, b, c))
}

fn lambda3_with(u: &SpectralField, w: impl Fn(i64, i64, i64) -> f64 + Sync) -> Complex64 {
    let band = u.k() as i64;
    let spec = u.full_spectrum();
    let at = |x: i64| spec[(x + band) as usize];
    let partial: Vec<Complex64> = (-band..=band)
        .into_par_iter()
        .filter(|&a| a != 0)
        .map(|a| {
            let mut acc = Complex64::new(0.0, 0.0);
            let lo = (-band).max(-band - a);
            let hi = band.min(band - a);
            for b in lo..=hi {
                let c = -a - b;
                if b == 0 || c == 0 {
                    continue;
                }
                let weight = w(a, b, c);
                if weight != 0.0 {
                    acc += at(a) * at(b) * at(c) * weight;
                }
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// `Λ_4(σ_4; u, u, u, u)` and the largest resonant residual seen.
pub(crate) fn lambda4_sigma4(u: &SpectralField, table: &SigmaTable) -> (Complex64, f64) {
    let band = u.k() as i64;
    let spec = u.full_spectrum();
    let at = |x: i64| spec[(x + band) as usize];
    let partial: Vec<(Complex64, f64)> = (-band..=band)
        .into_par_iter()
        .filter(|&a| a != 0)
        .map(|a| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut worst = 0.0f64;
            let ua = at(a);
            for b in -band..=band {
                if b == 0 {
                    continue;
                }
                let uab = ua * at(b);
                let lo = (-band).max(-band - a - b);
                let hi = band.min(band - a - b);
                for c in lo..=hi {
                    let d = -a - b - c;
                    if c == 0 || d == 0 {
                        continue;
                    }
                    let (sigma, resid) = table.sigma4([a, b, c, d]);
                    worst = worst.max(resid);
                    if sigma != 0.0 {
                        acc += uab * at(c) * at(d) * sigma;
                    }
                }
            }
            (acc, worst)
        })
        .collect();
    partial
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0.0f64), |(s, w), (a, r)| (s + a, w.max(*r)))
}

/// Order of the modified energy requested from [`modified_energy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnergyOrder {
    Two = 2,
    Three = 3,
    Four = 4,
}

/// `E²_I`, `E³_I = E²_I + Λ_3(σ_3)`, `E⁴_I = E³_I + Λ_4(σ_4)` at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiEnergyReport {
    pub t: f64,
    pub e2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub e3: f64,
    pub e4: f64,
    /// Highest order actually evaluated; entries above it are zero-filled.
    pub order: EnergyOrder,
    /// Largest `|M_4|/scale` met on `{α_4 = 0}` while summing `Λ_4(σ_4)`.
    pub resonant_residual: f64,
}

impl MultiEnergyReport {
    pub fn has(&self, order: EnergyOrder) -> bool {
        order <= self.order
    }
}

/// Modified energies of `u` up to `order`.
pub fn modified_energy(u: &SpectralField, im: &IMultiplier, order: EnergyOrder) -> MultiEnergyReport {
    let e2 = apply_i(u, im).l2_norm().powi(2);
    let mut report = MultiEnergyReport {
        t: 0.0,
        e2,
        lambda3: 0.0,
        lambda4: 0.0,
        e3: 0.0,
        e4: 0.0,
        order,
        resonant_residual: 0.0,
    };
    if order == EnergyOrder::Two {
        return report;
    }
    let table = SigmaTable::new(im, 2 * u.k() as i64);
    let l3 = lambda3_sigma3(u, &table);
    debug_assert!(l3.im.abs() <= 1e-10 * l3.re.abs() + 1e-14 * e2.max(1.0).powf(1.5));
    report.lambda3 = l3.re;
    report.e3 = e2 + l3.re;
    if order == EnergyOrder::Three {
        return report;
    }
    let (l4, resid) = lambda4_sigma4(u, &table);
    report.lambda4 = l4.re;
    report.e4 = report.e3 + l4.re;
    report.resonant_residual = resid;
    report
}

/// `Λ_3(M_3; u, u, u)`: the flux of `‖Iu‖²` generated by the nonlinearity.
pub fn lambda3_flux(u: &SpectralField, im: &IMultiplier) -> Complex64 {
    lambda3_m3(u, &SigmaTable::new(im, u.k() as i64))
}

/// `Λ_2(m(ξ_1)m(ξ_2); u, v)` through the padded-transform product of `Iu` and `Iv`.
pub fn lambda2_i(u: &SpectralField, v: &SpectralField, im: &IMultiplier) -> Result<f64> {
    let p = apply_i(u, im).dealiased_product(&apply_i(v, im))?;
    Ok(p.mean())
}

/// One row of [`multiplier_scaling_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: f64,
    /// `max |Λ_3(σ_3)| / (N^{-3/2} ‖Iu‖³)` over the ensemble.
    pub ratio3: f64,
    /// `max |Λ_4(σ_4)| / (N^{-3} ‖Iu‖⁴)` over the ensemble.
    pub ratio4: f64,
}

/// Empirical constants of the `N^{-3/2}` and `N^{-3}` bounds for `Λ_3(σ_3)`
/// and `Λ_4(σ_4)`.
pub fn multiplier_scaling_check(
    ensemble: &[SpectralField],
    s: SobolevIndex,
    cutoffs: &[f64],
) -> Result<Vec<ScalingRow>> {
    if ensemble.is_empty() {
        return Err(Error::Input("empty ensemble".into()));
    }
    cutoffs
        .iter()
        .map(|&n| {
            let im = IMultiplier::new(n, s.value())?;
            let mut row = ScalingRow { n, ratio3: 0.0, ratio4: 0.0 };
            for u in ensemble {
                let iu = apply_i(u, &im).l2_norm();
                if iu == 0.0 {
                    continue;
                }
                let e = modified_energy(u, &im, EnergyOrder::Four);
                row.ratio3 = row.ratio3.max(e.lambda3.abs() / (n.powf(-1.5) * iu.powi(3)));
                row.ratio4 = row.ratio4.max(e.lambda4.abs() / (n.powf(-3.0) * iu.powi(4)));
            }
            Ok(row)
        })
        .collect()
}

/// Grid-exact equivalence constants `(c, C)` with `c‖f‖_{H^s} ≤ ‖If‖_{L²} ≤ C‖f‖_{H^s}`.
pub fn norm_equivalence_bounds(grid: GridSpec, im: &IMultiplier) -> (f64, f64) {
    (1..=grid.k() as i64)
        .map(|x| im.m(x) * (1.0 + (x * x) as f64).powf(-0.5 * im.s()))
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
}
