use ndarray::Array2;

use crate::error::{RbError, Result};
use crate::field::{SpectralField2D, SpectralVector2D};
use crate::grid::Grid2D;
use crate::symbol::SymbolG;

/// Smooth bump exp(-1/x) for x > 0.
fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, monotone in between.
fn smooth_step(x: f64) -> f64 {
    let a = bump(x);
    let b = bump(1.0 - x);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Radial low-pass profile: 1 on r <= 1, 0 on r >= 4/3, smooth monotone
/// transition built from the standard exp(-1/x) bump.
pub fn chi_profile(r: f64) -> f64 {
    smooth_step((4.0 / 3.0 - r) * 3.0)
}

/// Annulus profile phi(r) = chi(r/2) - chi(r), supported in [1, 8/3].
pub fn phi_profile(r: f64) -> f64 {
    chi_profile(r / 2.0) - chi_profile(r)
}

/// Dyadic partition of unity evaluated on the wavenumber lattice.
///
/// `profiles[0]` is the low-pass block (j = -1), `profiles[j + 1]` the
/// annulus profile phi(2^-j .). On the dealiased band the profiles sum to 1.
pub struct DyadicPartition {
    j_max: i32,
    profiles: Vec<Array2<f64>>,
}

/// j_max = floor(log2(n/3)); fails when the grid cannot host at least
/// three dyadic blocks.
pub fn build_partition(grid: &Grid2D) -> Result<DyadicPartition> {
    let scale = grid.box_length() / (2.0 * std::f64::consts::PI);
    let j_max = ((grid.n() as f64 / 3.0).log2()).floor() as i32;
    if j_max < 2 {
        return Err(RbError::PartitionTooCoarse { n: grid.n(), j_max });
    }
    let mut profiles = Vec::with_capacity(j_max as usize + 2);
    // the partition lives on the scaled lattice; with the default box the
    // lattice is the integer one
    let _ = scale;
    profiles.push(grid.kmag().mapv(chi_profile));
    for j in 0..=j_max {
        let inv = 1.0 / (2.0_f64).powi(j);
        profiles.push(grid.kmag().mapv(|km| phi_profile(km * inv)));
    }
    Ok(DyadicPartition { j_max, profiles })
}

impl DyadicPartition {
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn profile(&self, j: i32) -> &Array2<f64> {
        &self.profiles[(j + 1) as usize]
    }

    /// Frequency-localized block: multiplication by chi for j = -1 and by
    /// phi(2^-j .) for 0 <= j <= j_max.
    pub fn delta_j(&self, f: &SpectralField2D, j: i32) -> Result<SpectralField2D> {
        if j < -1 || j > self.j_max {
            return Err(RbError::BlockIndex {
                j,
                lo: -1,
                hi: self.j_max,
            });
        }
        let mut out = f.coeffs.clone();
        out.zip_mut_with(self.profile(j), |c, p| *c *= *p);
        Ok(SpectralField2D { coeffs: out })
    }

    /// Low-frequency partial sum of blocks below j, for 0 <= j <= j_max + 1.
    pub fn s_j(&self, f: &SpectralField2D, j: i32) -> Result<SpectralField2D> {
        if j < 0 || j > self.j_max + 1 {
            return Err(RbError::BlockIndex {
                j,
                lo: 0,
                hi: self.j_max + 1,
            });
        }
        let n = f.n();
        let mut acc = Array2::<f64>::zeros((n, n));
        for block in -1..=(j - 1) {
            acc.zip_mut_with(self.profile(block), |a, p| *a += *p);
        }
        let mut out = f.coeffs.clone();
        out.zip_mut_with(&acc, |c, p| *c *= *p);
        Ok(SpectralField2D { coeffs: out })
    }
}

/// Weight applied per block as g(2^j)^exponent; exponent 0 means none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GWeight(pub f64);

/// Besov norm parameters: ell^q over blocks of 2^{js} w(2^j) |block|_{L^p}.
#[derive(Debug, Clone, PartialEq)]
pub struct BesovNormSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub weight: GWeight,
}

impl BesovNormSpec {
    pub fn new(s: f64, p: f64, q: f64, weight: GWeight) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(RbError::InvalidInput(format!(
                "Besov indices need p, q >= 1 (got p = {p}, q = {q})"
            )));
        }
        Ok(Self { s, p, q, weight })
    }

    /// Parses strings like "B:s=0.5,p=2,q=2,w=g^-0.5"; p, q accept "inf",
    /// w accepts "none", "g" or "g^<exp>".
    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .strip_prefix("B:")
            .ok_or_else(|| RbError::InvalidInput(format!("norm spec must start with 'B:': {text:?}")))?;
        let mut s = None;
        let mut p = None;
        let mut q = None;
        let mut w = GWeight(0.0);
        for item in body.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| RbError::InvalidInput(format!("bad norm spec item {item:?}")))?;
            let parse_num = |v: &str| -> Result<f64> {
                if v == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    v.parse::<f64>()
                        .map_err(|_| RbError::InvalidInput(format!("bad number {v:?} in {text:?}")))
                }
            };
            match key.trim() {
                "s" => s = Some(parse_num(value.trim())?),
                "p" => p = Some(parse_num(value.trim())?),
                "q" => q = Some(parse_num(value.trim())?),
                "w" => {
                    let v = value.trim();
                    w = if v == "none" {
                        GWeight(0.0)
                    } else if v == "g" {
                        GWeight(1.0)
                    } else if let Some(exp) = v.strip_prefix("g^") {
                        GWeight(exp.parse::<f64>().map_err(|_| {
                            RbError::InvalidInput(format!("bad weight exponent {v:?}"))
                        })?)
                    } else {
                        return Err(RbError::InvalidInput(format!("bad weight {v:?}")));
                    };
                }
                other => {
                    return Err(RbError::InvalidInput(format!(
                        "unknown norm spec key {other:?} in {text:?}"
                    )))
                }
            }
        }
        let (s, p, q) = match (s, p, q) {
            (Some(s), Some(p), Some(q)) => (s, p, q),
            _ => {
                return Err(RbError::InvalidInput(format!(
                    "norm spec {text:?} must set s, p and q"
                )))
            }
        };
        Self::new(s, p, q, w)
    }

    /// Canonical column-name fragment, e.g. "b_s0.5_p2_q2_wg-0.5".
    pub fn column_tag(&self) -> String {
        let fmt = |v: f64| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            }
        };
        let mut tag = format!("b_s{}_p{}_q{}", fmt(self.s), fmt(self.p), fmt(self.q));
        if self.weight.0 != 0.0 {
            tag.push_str(&format!("_wg{}", self.weight.0));
        }
        tag
    }
}

fn block_lp(grid: &Grid2D, block: &SpectralField2D, p: f64) -> Result<f64> {
    if p == 2.0 {
        Ok(grid.l2_norm_spectral(block))
    } else {
        grid.lp_norm(&grid.inverse(block)?, p)
    }
}

fn ell_q(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0_f64, |m, t| m.max(*t))
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn weight_at(g: &SymbolG, weight: GWeight, j: i32) -> f64 {
    if weight.0 == 0.0 {
        return 1.0;
    }
    // the j = -1 block evaluates the weight at 1/2
    let arg = (2.0_f64).powi(j);
    g.eval(arg).powf(weight.0)
}

/// Inhomogeneous (weighted) Besov norm over blocks j = -1 ... j_max.
pub fn besov_norm(
    part: &DyadicPartition,
    grid: &Grid2D,
    f: &SpectralField2D,
    spec: &BesovNormSpec,
    g: &SymbolG,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(part.j_max() as usize + 2);
    for j in -1..=part.j_max() {
        let lp = block_lp(grid, &part.delta_j(f, j)?, spec.p)?;
        terms.push((2.0_f64).powi(j).powf(spec.s) * weight_at(g, spec.weight, j) * lp);
    }
    Ok(ell_q(&terms, spec.q))
}

/// Homogeneous norm realized as the block sum restricted to j >= 0 on
/// mean-free fields. Exact for fields with no content below |k| = 4/3
/// (the annuli tile |k| >= 4/3); content in the lowest shell is dropped,
/// matching the torus-side reading of the quotient by constants.
pub fn besov_norm_homogeneous(
    part: &DyadicPartition,
    grid: &Grid2D,
    f: &SpectralField2D,
    spec: &BesovNormSpec,
    g: &SymbolG,
) -> Result<f64> {
    let mean = f.coeffs[(0, 0)].norm();
    if mean > 1e-13 * f.max_abs().max(1.0) {
        return Err(RbError::NonzeroMean { mean, tol: 1e-13 });
    }
    let mut terms = Vec::with_capacity(part.j_max() as usize + 1);
    for j in 0..=part.j_max() {
        let lp = block_lp(grid, &part.delta_j(f, j)?, spec.p)?;
        terms.push((2.0_f64).powi(j).powf(spec.s) * weight_at(g, spec.weight, j) * lp);
    }
    Ok(ell_q(&terms, spec.q))
}

/// Fourier-sum Sobolev norm (box_area sum (1+|k|^2)^s |c|^2)^{1/2};
/// independent of the dyadic machinery.
pub fn hs_norm(grid: &Grid2D, f: &SpectralField2D, s: f64) -> f64 {
    let mut sum = 0.0;
    for ((i, j), c) in f.coeffs.indexed_iter() {
        let k2 = grid.kmag()[(i, j)].powi(2);
        sum += (1.0 + k2).powf(s) * c.norm_sqr();
    }
    (sum * grid.box_area()).sqrt()
}

/// Homogeneous Sobolev seminorm from the Fourier sum over k != 0.
pub fn hs_dot_norm(grid: &Grid2D, f: &SpectralField2D, s: f64) -> f64 {
    let mut sum = 0.0;
    for ((i, j), c) in f.coeffs.indexed_iter() {
        let km = grid.kmag()[(i, j)];
        if km > 0.0 {
            sum += km.powf(2.0 * s) * c.norm_sqr();
        }
    }
    (sum * grid.box_area()).sqrt()
}

pub fn hs_norm_vec(grid: &Grid2D, v: &SpectralVector2D, s: f64) -> f64 {
    (hs_norm(grid, &v.x1, s).powi(2) + hs_norm(grid, &v.x2, s).powi(2)).sqrt()
}

/// L2-based Besov norm of a vector field (blocks combined in quadrature);
/// only meaningful for p = q = 2.
pub fn besov_norm_vec_l2(
    part: &DyadicPartition,
    grid: &Grid2D,
    v: &SpectralVector2D,
    s: f64,
    weight: GWeight,
    g: &SymbolG,
) -> Result<f64> {
    let mut sum = 0.0;
    for j in -1..=part.j_max() {
        let b1 = grid.l2_norm_spectral(&part.delta_j(&v.x1, j)?);
        let b2 = grid.l2_norm_spectral(&part.delta_j(&v.x2, j)?);
        let term = (2.0_f64).powi(j).powf(s) * weight_at(g, weight, j) * (b1 * b1 + b2 * b2).sqrt();
        sum += term * term;
    }
    Ok(sum.sqrt())
}

/// Paraproduct split of the pointwise product uv into (T_u v, T_v u, R(u, v)).
/// Low-high and high-low parts pair S_{j-1} with Delta_j; the remainder pairs
/// Delta_j with the three neighbouring blocks. All products are formed in
/// physical space and dealiased; the three parts sum to the dealiased product.
pub fn bony_decompose(
    part: &DyadicPartition,
    grid: &Grid2D,
    u: &SpectralField2D,
    v: &SpectralField2D,
) -> Result<(SpectralField2D, SpectralField2D, SpectralField2D)> {
    let n = grid.n();
    let j_max = part.j_max();
    let nblocks = (j_max + 2) as usize;

    let mut u_blocks = Vec::with_capacity(nblocks);
    let mut v_blocks = Vec::with_capacity(nblocks);
    for j in -1..=j_max {
        u_blocks.push(grid.inverse(&part.delta_j(u, j)?)?.values);
        v_blocks.push(grid.inverse(&part.delta_j(v, j)?)?.values);
    }

    let mut t_uv = Array2::<f64>::zeros((n, n));
    let mut t_vu = Array2::<f64>::zeros((n, n));
    let mut remainder = Array2::<f64>::zeros((n, n));

    // running S_{j-1} sums (empty for j = -1 and j = 0)
    let mut s_u = Array2::<f64>::zeros((n, n));
    let mut s_v = Array2::<f64>::zeros((n, n));
    for j in -1..=j_max {
        let bi = (j + 1) as usize;
        if j >= 1 {
            // S_{j-1} = sum of blocks -1 ... j-2; extend by block j-2
            let prev = (j - 1) as usize;
            s_u.zip_mut_with(&u_blocks[prev], |a, b| *a += *b);
            s_v.zip_mut_with(&v_blocks[prev], |a, b| *a += *b);
            for ((t, s), b) in t_uv.iter_mut().zip(s_u.iter()).zip(v_blocks[bi].iter()) {
                *t += s * b;
            }
            for ((t, s), b) in t_vu.iter_mut().zip(s_v.iter()).zip(u_blocks[bi].iter()) {
                *t += s * b;
            }
        }
        for dj in -1..=1i32 {
            let k = j + dj;
            if k < -1 || k > j_max {
                continue;
            }
            let ki = (k + 1) as usize;
            for ((r, a), b) in remainder
                .iter_mut()
                .zip(u_blocks[bi].iter())
                .zip(v_blocks[ki].iter())
            {
                *r += a * b;
            }
        }
    }

    let to_spec = |vals: Array2<f64>| -> Result<SpectralField2D> {
        Ok(grid.dealias(&grid.forward(&crate::field::RealField2D { values: vals })?))
    };
    Ok((to_spec(t_uv)?, to_spec(t_vu)?, to_spec(remainder)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField2D;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (Grid2D, DyadicPartition) {
        let g = Grid2D::with_default_box(n).unwrap();
        let p = build_partition(&g).unwrap();
        (g, p)
    }

    #[test]
    fn j_max_values() {
        let (_, p) = setup(128);
        assert_eq!(p.j_max(), 5);
        let (_, p) = setup(64);
        assert_eq!(p.j_max(), 4);
        assert!(matches!(
            build_partition(&Grid2D::with_default_box(8).unwrap()),
            Err(RbError::PartitionTooCoarse { .. })
        ));
    }

    #[test]
    fn partition_of_unity_on_dealiased_band() {
        let (g, p) = setup(128);
        let mut worst = 0.0_f64;
        for ((i, j), keep) in g.keep_mask().indexed_iter() {
            if !keep {
                continue;
            }
            let mut sum = 0.0;
            for b in -1..=p.j_max() {
                sum += p.profile(b)[(i, j)];
            }
            worst = worst.max((sum - 1.0).abs());
        }
        assert!(worst < 1e-12, "partition deviation {worst}");
    }

    #[test]
    fn partition_identity_at_unit_mode() {
        let (_, p) = setup(128);
        let idx = (1usize, 0usize);
        let mut sum = 0.0;
        for b in -1..=p.j_max() {
            sum += p.profile(b)[idx];
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn supports_are_disjoint_two_apart() {
        let (_, p) = setup(128);
        for j in 0..=p.j_max() {
            for jp in 0..=p.j_max() {
                if (j - jp).abs() < 2 {
                    continue;
                }
                let prod_max = p
                    .profile(j)
                    .iter()
                    .zip(p.profile(jp).iter())
                    .fold(0.0_f64, |m, (a, b)| m.max(a * b));
                assert_eq!(prod_max, 0.0, "blocks {j} and {jp} overlap");
            }
        }
    }

    #[test]
    fn delta_j_on_single_mode() {
        let (g, p) = setup(128);
        let f = g
            .forward(&RealField2D::from_fn(128, g.box_length(), |x1, _| (3.0 * x1).cos()))
            .unwrap();
        // |k| = 3 sits where phi(2^-1 .) = 1
        let b1 = p.delta_j(&f, 1).unwrap();
        let diff: f64 = b1
            .coeffs
            .iter()
            .zip(f.coeffs.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-13);
        for j in [-1, 0, 2, 3, 4, 5] {
            assert!(p.delta_j(&f, j).unwrap().max_abs() < 1e-14, "block {j} must vanish");
        }
        assert!(p.delta_j(&f, 6).is_err());
        assert!(p.delta_j(&f, -2).is_err());
    }

    #[test]
    fn delta_j_on_constant() {
        let (g, p) = setup(64);
        let f = g
            .forward(&RealField2D::from_fn(64, g.box_length(), |_, _| 2.5))
            .unwrap();
        let low = p.delta_j(&f, -1).unwrap();
        assert!((low.coeff(0, 0).re - 2.5).abs() < 1e-13);
        for j in 0..=p.j_max() {
            assert!(p.delta_j(&f, j).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn blocks_reconstruct_band_limited_fields() {
        let (g, p) = setup(128);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = g.random_band(1.0, 42.0, 1.0, &mut rng);
        let mut sum = SpectralField2D::zeros(128);
        for j in -1..=p.j_max() {
            let b = p.delta_j(&f, j).unwrap();
            sum.coeffs.zip_mut_with(&b.coeffs, |a, x| *a += *x);
        }
        let err: f64 = sum
            .coeffs
            .iter()
            .zip(f.coeffs.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / g.l2_norm_spectral(&f) < 1e-12);
    }

    #[test]
    fn s_j_telescopes() {
        let (g, p) = setup(64);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = g.random_band(1.0, 20.0, 1.0, &mut rng);

        // top partial sum is the identity on the band
        let full = p.s_j(&f, p.j_max() + 1).unwrap();
        let err: f64 = full
            .coeffs
            .iter()
            .zip(f.coeffs.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / g.l2_norm_spectral(&f) < 1e-12);

        // S_0 = Delta_{-1}
        let s0 = p.s_j(&f, 0).unwrap();
        let d_low = p.delta_j(&f, -1).unwrap();
        assert!(s0.coeffs.iter().zip(d_low.coeffs.iter()).all(|(a, b)| (a - b).norm() < 1e-14));

        // S_{j+1} - S_j = Delta_j
        for j in 0..=p.j_max() {
            let hi = p.s_j(&f, j + 1).unwrap();
            let lo = p.s_j(&f, j).unwrap();
            let dj = p.delta_j(&f, j).unwrap();
            let worst = hi
                .coeffs
                .iter()
                .zip(lo.coeffs.iter())
                .zip(dj.coeffs.iter())
                .fold(0.0_f64, |m, ((h, l), d)| m.max((h - l - d).norm()));
            assert!(worst < 1e-13);
        }
        assert!(p.s_j(&f, -1).is_err());
    }

    #[test]
    fn besov_norm_examples() {
        let (g, p) = setup(128);
        let one = SymbolG::constant(1.0).unwrap();

        let zero = SpectralField2D::zeros(128);
        let spec = BesovNormSpec::new(0.7, 2.0, 1.0, GWeight(0.0)).unwrap();
        assert_eq!(besov_norm(&p, &g, &zero, &spec, &one).unwrap(), 0.0);

        // single mode at |k| = 3: only block 1 contributes
        let f = g
            .forward(&RealField2D::from_fn(128, g.box_length(), |x1, _| (3.0 * x1).cos()))
            .unwrap();
        for s in [0.5, 1.0, 2.0] {
            let spec = BesovNormSpec::new(s, 2.0, f64::INFINITY, GWeight(0.0)).unwrap();
            let norm = besov_norm(&p, &g, &f, &spec, &one).unwrap();
            let l2 = g.l2_norm_spectral(&f);
            assert!(
                (norm - (2.0_f64).powf(s) * l2).abs() / norm < 1e-12,
                "s = {s}: {norm} vs {}",
                (2.0_f64).powf(s) * l2
            );
        }
    }

    #[test]
    fn besov_l2_comparable_to_sobolev() {
        let (g, p) = setup(128);
        let one = SymbolG::constant(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for s in [0.5, 1.0, 2.0] {
            let spec = BesovNormSpec::new(s, 2.0, 2.0, GWeight(0.0)).unwrap();
            for _ in 0..10 {
                let f = g.random_band(1.0, 42.0, 1.0, &mut rng);
                let b = besov_norm(&p, &g, &f, &spec, &one).unwrap();
                let h = hs_norm(&g, &f, s);
                let ratio = b / h;
                assert!(
                    (0.25..=4.0).contains(&ratio),
                    "s = {s}: ratio {ratio} outside [1/4, 4]"
                );
            }
        }
    }

    #[test]
    fn weighted_norm_uses_half_argument_at_low_block() {
        let (g, p) = setup(64);
        let glog = SymbolG::log(1.0).unwrap();
        let f = g
            .forward(&RealField2D::from_fn(64, g.box_length(), |x1, _| x1.cos()))
            .unwrap();
        // |k| = 1 lives in the low-pass block only
        let spec = BesovNormSpec::new(0.0, 2.0, 1.0, GWeight(1.0)).unwrap();
        let norm = besov_norm(&p, &g, &f, &spec, &glog).unwrap();
        let expected = glog.eval(0.5) * g.l2_norm_spectral(&f);
        assert!((norm - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn parse_norm_specs() {
        let s = BesovNormSpec::parse("B:s=0.5,p=2,q=2,w=g^-0.5").unwrap();
        assert_eq!(s.s, 0.5);
        assert_eq!(s.p, 2.0);
        assert_eq!(s.q, 2.0);
        assert_eq!(s.weight, GWeight(-0.5));

        let s = BesovNormSpec::parse("B:s=0,p=inf,q=1,w=g").unwrap();
        assert!(s.p.is_infinite());
        assert_eq!(s.weight, GWeight(1.0));

        assert!(BesovNormSpec::parse("s=1,p=2,q=2").is_err());
        assert!(BesovNormSpec::parse("B:s=1,p=0.5,q=2").is_err());
        assert!(BesovNormSpec::parse("B:s=1,p=2,q=2,w=h").is_err());
    }

    #[test]
    fn homogeneous_norm_needs_zero_mean() {
        let (g, p) = setup(64);
        let one = SymbolG::constant(1.0).unwrap();
        let spec = BesovNormSpec::new(0.5, 2.0, 2.0, GWeight(0.0)).unwrap();
        let mut f = SpectralField2D::zeros(64);
        f.set_coeff(0, 0, Complex64::new(1.0, 0.0));
        assert!(besov_norm_homogeneous(&p, &g, &f, &spec, &one).is_err());
    }

    #[test]
    fn bony_reconstructs_product() {
        let (g, p) = setup(64);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u = g.random_band(1.0, 15.0, 0.8, &mut rng);
        let v = g.random_band(1.0, 15.0, 0.6, &mut rng);
        let (tuv, tvu, rem) = bony_decompose(&p, &g, &u, &v).unwrap();

        let fu = g.inverse(&u).unwrap();
        let fv = g.inverse(&v).unwrap();
        let mut prod = fu.clone();
        prod.values.zip_mut_with(&fv.values, |a, b| *a *= *b);
        let direct = g.dealias(&g.forward(&prod).unwrap());

        let mut sum = tuv.coeffs;
        sum.zip_mut_with(&tvu.coeffs, |a, b| *a += *b);
        sum.zip_mut_with(&rem.coeffs, |a, b| *a += *b);
        let err: f64 = sum
            .iter()
            .zip(direct.coeffs.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(
            err / g.l2_norm_spectral(&direct) < 1e-10,
            "paraproduct reconstruction error {}",
            err / g.l2_norm_spectral(&direct)
        );
    }

    #[test]
    fn bony_with_constant_factor() {
        let (g, p) = setup(64);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let u = g.random_band(1.0, 12.0, 1.0, &mut rng);
        let v = g
            .forward(&RealField2D::from_fn(64, g.box_length(), |_, _| 3.0))
            .unwrap();
        let (tuv, tvu, rem) = bony_decompose(&p, &g, &u, &v).unwrap();
        let mut sum = tuv.coeffs;
        sum.zip_mut_with(&tvu.coeffs, |a, b| *a += *b);
        sum.zip_mut_with(&rem.coeffs, |a, b| *a += *b);
        // u * 3 scaled copy
        let worst = sum
            .iter()
            .zip(u.coeffs.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b * 3.0).norm()));
        assert!(worst < 1e-12);
    }

    #[test]
    fn bony_single_mode_square() {
        let (g, p) = setup(64);
        let u = g
            .forward(&RealField2D::from_fn(64, g.box_length(), |x1, _| (2.0 * x1).cos()))
            .unwrap();
        let (tuv, tvu, rem) = bony_decompose(&p, &g, &u, &u).unwrap();
        let fu = g.inverse(&u).unwrap();
        let mut sq = fu.clone();
        sq.values.zip_mut_with(&fu.values, |a, b| *a *= *b);
        let direct = g.dealias(&g.forward(&sq).unwrap());
        let mut sum = tuv.coeffs;
        sum.zip_mut_with(&tvu.coeffs, |a, b| *a += *b);
        sum.zip_mut_with(&rem.coeffs, |a, b| *a += *b);
        let worst = sum
            .iter()
            .zip(direct.coeffs.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(worst < 1e-13);
    }
}
