//! Real hyperspherical harmonics on S^{n-1} built from Gegenbauer ladders,
//! with separable analysis and synthesis on a product rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::sphere::SphereRule;
use super::QuadratureError;

/// Which angular derivative a synthesis pass produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularDerivative {
    None,
    /// d/d theta_j for polar angle j (0-based).
    Theta(usize),
    Phi,
}

#[derive(Debug, Clone)]
struct Level {
    size: usize,
    head: Vec<usize>,
    next: Vec<usize>,
    tail: Vec<usize>,
    tab: Vec<f64>,
    tab_w: Vec<f64>,
    dtab: Vec<f64>,
}

/// C_0^lambda(x), ..., C_nmax^lambda(x).
pub fn gegenbauer_all(nmax: usize, lambda: f64, x: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(nmax + 1);
    c.push(1.0);
    if nmax >= 1 {
        c.push(2.0 * lambda * x);
    }
    for k in 2..=nmax {
        let kf = k as f64;
        let v = (2.0 * x * (kf + lambda - 1.0) * c[k - 1] - (kf + 2.0 * lambda - 2.0) * c[k - 2]) / kf;
        c.push(v);
    }
    c
}

/// log of int_{-1}^{1} (1-u^2)^{lambda-1/2} C_k^lambda(u)^2 du.
pub fn gegenbauer_log_norm(k: usize, lambda: f64) -> f64 {
    let kf = k as f64;
    PI.ln() + (1.0 - 2.0 * lambda) * 2f64.ln() + ln_gamma(kf + 2.0 * lambda)
        - ln_gamma(kf + 1.0)
        - (kf + lambda).ln()
        - 2.0 * ln_gamma(lambda)
}

/// Number of degree-l harmonics on S^d.
pub fn harmonic_dim(d: usize, l: usize) -> usize {
    if d == 1 {
        return if l == 0 { 1 } else { 2 };
    }
    let c = binomial(d + l, l);
    let c2 = if l >= 2 { binomial(d + l - 2, l - 2) } else { 0 };
    (c - c2) as usize
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Orthonormal real harmonics of degree at most `kmax` on S^{n-1}.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    ambient: usize,
    kmax: usize,
    rule: SphereRule,
    levels: Vec<Level>,
    labels: Vec<Vec<i64>>,
    degrees: Vec<usize>,
    phi_tab: Vec<f64>,
    phi_tab_w: Vec<f64>,
    dphi_tab: Vec<f64>,
    frames: Vec<f64>,
    inv_h: Vec<f64>,
}

fn phi_fn(m: i64, phi: f64) -> (f64, f64) {
    let s = 1.0 / PI.sqrt();
    if m == 0 {
        (1.0 / (2.0 * PI).sqrt(), 0.0)
    } else if m > 0 {
        let mf = m as f64;
        (s * (mf * phi).cos(), -s * mf * (mf * phi).sin())
    } else {
        let mf = (-m) as f64;
        (s * (mf * phi).sin(), s * mf * (mf * phi).cos())
    }
}

impl HarmonicBasis {
    /// Basis on S^{ambient-1} with a product rule of the given exactness
    /// (at least 2 * kmax).
    pub fn new(ambient: usize, kmax: usize, exactness: usize) -> Result<Self, QuadratureError> {
        if ambient < 3 {
            return Err(QuadratureError::InvalidRule(format!("harmonics need ambient dimension >= 3, got {ambient}")));
        }
        if exactness < 2 * kmax {
            return Err(QuadratureError::InvalidRule(format!(
                "rule exactness {exactness} below 2*kmax = {}",
                2 * kmax
            )));
        }
        let rule = SphereRule::new(ambient - 1, exactness)?;
        let n = ambient;
        let k = kmax;
        let nth = rule.n_theta();
        let nph = rule.n_phi();
        let mc = 2 * k + 1;

        // azimuthal level
        let ms: Vec<i64> = (0..mc).map(|i| i as i64 - k as i64).collect();
        let mut phi_tab = vec![0.0; nph * mc];
        let mut phi_tab_w = vec![0.0; nph * mc];
        let mut dphi_tab = vec![0.0; nph * mc];
        for (p, &ph) in rule.phi().iter().enumerate() {
            for (mi, &m) in ms.iter().enumerate() {
                let (v, dv) = phi_fn(m, ph);
                phi_tab[p * mc + mi] = v;
                phi_tab_w[p * mc + mi] = v * rule.phi_weight();
                dphi_tab[p * mc + mi] = dv;
            }
        }

        // polar levels, built from the innermost outward
        let npolar = n - 2;
        let mut levels_rev: Vec<Level> = Vec::with_capacity(npolar);
        let mut next_heads: Vec<usize> = ms.iter().map(|m| m.unsigned_abs() as usize).collect();
        for j in (0..npolar).rev() {
            let mut head = Vec::new();
            let mut next = Vec::new();
            let mut tail = Vec::new();
            for l in 0..=k {
                for (t, &nh) in next_heads.iter().enumerate() {
                    if nh <= l {
                        head.push(l);
                        next.push(nh);
                        tail.push(t);
                    }
                }
            }
            let size = head.len();
            let ang = &rule.polar()[j];
            // weight sin^{n-2-j} theta for 0-based j
            let wexp = (n - 2 - j) as f64;
            let mut tab = vec![0.0; nth * size];
            let mut tab_w = vec![0.0; nth * size];
            let mut dtab = vec![0.0; nth * size];
            // cache per (l, l') pair
            for q in 0..nth {
                let (c, s) = (ang.cos[q], ang.sin[q]);
                let mut cache: std::collections::HashMap<(usize, usize), (f64, f64)> = Default::default();
                for idx in 0..size {
                    let (l, lp) = (head[idx], next[idx]);
                    let (v, dv) = *cache.entry((l, lp)).or_insert_with(|| {
                        let lambda = lp as f64 + wexp / 2.0;
                        let deg = l - lp;
                        let norm = (-0.5 * gegenbauer_log_norm(deg, lambda)).exp();
                        let cs = gegenbauer_all(deg, lambda, c);
                        let sp = s.powi(lp as i32);
                        let v = norm * sp * cs[deg];
                        let mut dv = if lp > 0 {
                            norm * lp as f64 * c * s.powi(lp as i32 - 1) * cs[deg]
                        } else {
                            0.0
                        };
                        if deg >= 1 {
                            let c1 = gegenbauer_all(deg - 1, lambda + 1.0, c);
                            dv -= norm * s.powi(lp as i32 + 1) * 2.0 * lambda * c1[deg - 1];
                        }
                        (v, dv)
                    });
                    tab[q * size + idx] = v;
                    tab_w[q * size + idx] = v * ang.weights[q];
                    dtab[q * size + idx] = dv;
                }
            }
            levels_rev.push(Level {
                size,
                head: head.clone(),
                next,
                tail,
                tab,
                tab_w,
                dtab,
            });
            next_heads = head;
        }
        levels_rev.reverse();
        let levels = levels_rev;

        // channel labels
        let nchan = levels[0].size;
        let mut labels = Vec::with_capacity(nchan);
        for s in 0..nchan {
            let mut lab = Vec::with_capacity(n - 1);
            let mut idx = s;
            for lvl in &levels {
                lab.push(lvl.head[idx] as i64);
                idx = lvl.tail[idx];
            }
            lab.push(ms[idx]);
            labels.push(lab);
        }
        let degrees = labels.iter().map(|l| l[0] as usize).collect();

        // orthonormal frames and scale factors at the rule points
        let na = rule.len();
        let mut frames = vec![0.0; na * n * n];
        let mut inv_h = vec![0.0; na * (n - 1)];
        let mut qidx = vec![0usize; npolar];
        let mut a = 0;
        for _ in 0..nth.pow(npolar as u32) {
            let mut h = vec![1.0; npolar + 1];
            for j in 0..npolar {
                h[j + 1] = h[j] * rule.polar()[j].sin[qidx[j]];
            }
            for &ph in rule.phi() {
                let omega = rule.point(a).to_vec();
                let fr = &mut frames[a * n * n..(a + 1) * n * n];
                fr[..n].copy_from_slice(&omega);
                for j in 0..npolar {
                    let (c, s) = (rule.polar()[j].cos[qidx[j]], rule.polar()[j].sin[qidx[j]]);
                    let row = &mut fr[(j + 1) * n..(j + 2) * n];
                    row[j] = -s;
                    for kk in j + 1..n {
                        row[kk] = omega[kk] * c / s / h[j];
                    }
                    inv_h[a * (n - 1) + j] = 1.0 / h[j];
                }
                let row = &mut fr[(n - 1) * n..n * n];
                row[n - 2] = -ph.sin();
                row[n - 1] = ph.cos();
                inv_h[a * (n - 1) + n - 2] = 1.0 / h[npolar];
                a += 1;
            }
            for j in (0..npolar).rev() {
                qidx[j] += 1;
                if qidx[j] < nth {
                    break;
                }
                qidx[j] = 0;
            }
        }

        Ok(Self {
            ambient,
            kmax,
            rule,
            levels,
            labels,
            degrees,
            phi_tab,
            phi_tab_w,
            dphi_tab,
            frames,
            inv_h,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels (l_1, ..., l_{n-2}, m) of each channel; l_1 is the degree.
    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn degree(&self, c: usize) -> usize {
        self.degrees[c]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn channel(&self, label: &[i64]) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Orthonormal frame (e_r, e_theta_1, ..., e_phi) at rule point `a`, row-major.
    pub fn frame(&self, a: usize) -> &[f64] {
        let n = self.ambient;
        &self.frames[a * n * n..(a + 1) * n * n]
    }

    /// Reciprocal scale factors (1/h_theta_1, ..., 1/h_phi) at rule point `a`.
    pub fn inv_scale(&self, a: usize) -> &[f64] {
        let m = self.ambient - 1;
        &self.inv_h[a * m..(a + 1) * m]
    }

    /// Values at the rule points from coefficients; both arrays are
    /// `outer` blocks (coefficients channel-minor, values point-minor).
    pub fn synthesize(&self, coeffs: &[Complex64], outer: usize, deriv: AngularDerivative) -> Vec<Complex64> {
        let nth = self.rule.n_theta();
        let nph = self.rule.n_phi();
        let mc = 2 * self.kmax + 1;
        assert_eq!(coeffs.len(), outer * self.len());
        let mut cur = coeffs.to_vec();
        let mut cur_outer = outer;
        for (li, lvl) in self.levels.iter().enumerate() {
            let next_size = self.levels.get(li + 1).map_or(mc, |l| l.size);
            let tab = match deriv {
                AngularDerivative::Theta(j) if j == li => &lvl.dtab,
                _ => &lvl.tab,
            };
            let mut next = vec![Complex64::new(0.0, 0.0); cur_outer * nth * next_size];
            for o in 0..cur_outer {
                let src = &cur[o * lvl.size..(o + 1) * lvl.size];
                for q in 0..nth {
                    let base = (o * nth + q) * next_size;
                    let dst = &mut next[base..base + next_size];
                    let row = &tab[q * lvl.size..(q + 1) * lvl.size];
                    for s in 0..lvl.size {
                        dst[lvl.tail[s]] += src[s] * row[s];
                    }
                }
            }
            cur = next;
            cur_outer *= nth;
        }
        let ptab = if deriv == AngularDerivative::Phi {
            &self.dphi_tab
        } else {
            &self.phi_tab
        };
        let mut out = vec![Complex64::new(0.0, 0.0); cur_outer * nph];
        for o in 0..cur_outer {
            let src = &cur[o * mc..(o + 1) * mc];
            let dst = &mut out[o * nph..(o + 1) * nph];
            for p in 0..nph {
                let row = &ptab[p * mc..(p + 1) * mc];
                let mut acc = Complex64::new(0.0, 0.0);
                for mi in 0..mc {
                    acc += src[mi] * row[mi];
                }
                dst[p] = acc;
            }
        }
        out
    }

    /// Projection of point values onto the channels (quadrature inner products).
    pub fn analyze(&self, values: &[Complex64], outer: usize) -> Vec<Complex64> {
        let nth = self.rule.n_theta();
        let nph = self.rule.n_phi();
        let mc = 2 * self.kmax + 1;
        assert_eq!(values.len(), outer * self.rule.len());
        let mut cur_outer = values.len() / nph;
        let mut cur = vec![Complex64::new(0.0, 0.0); cur_outer * mc];
        for o in 0..cur_outer {
            let src = &values[o * nph..(o + 1) * nph];
            let dst = &mut cur[o * mc..(o + 1) * mc];
            for p in 0..nph {
                let row = &self.phi_tab_w[p * mc..(p + 1) * mc];
                let v = src[p];
                for mi in 0..mc {
                    dst[mi] += v * row[mi];
                }
            }
        }
        for li in (0..self.levels.len()).rev() {
            let lvl = &self.levels[li];
            let in_size = self.levels.get(li + 1).map_or(mc, |l| l.size);
            let new_outer = cur_outer / nth;
            let mut next = vec![Complex64::new(0.0, 0.0); new_outer * lvl.size];
            for o in 0..new_outer {
                let dst = &mut next[o * lvl.size..(o + 1) * lvl.size];
                for q in 0..nth {
                    let base = (o * nth + q) * in_size;
                    let src = &cur[base..base + in_size];
                    let row = &lvl.tab_w[q * lvl.size..(q + 1) * lvl.size];
                    for s in 0..lvl.size {
                        dst[s] += src[lvl.tail[s]] * row[s];
                    }
                }
            }
            cur = next;
            cur_outer = new_outer;
        }
        cur
    }

    /// All channel values at an arbitrary unit vector.
    pub fn eval_point(&self, omega: &[f64]) -> Vec<f64> {
        let n = self.ambient;
        let mc = 2 * self.kmax + 1;
        let mut tail_sq = vec![0.0; n + 1];
        for k in (0..n).rev() {
            tail_sq[k] = tail_sq[k + 1] + omega[k] * omega[k];
        }
        let phi = omega[n - 1].atan2(omega[n - 2]);
        let mut cur: Vec<f64> = (0..mc)
            .map(|mi| phi_fn(mi as i64 - self.kmax as i64, phi).0)
            .collect();
        for j in (0..self.levels.len()).rev() {
            let lvl = &self.levels[j];
            let theta = tail_sq[j + 1].sqrt().atan2(omega[j]);
            let (c, s) = (theta.cos(), theta.sin());
            let wexp = (n - 2 - j) as f64;
            let mut cache: std::collections::HashMap<(usize, usize), f64> = Default::default();
            let mut next = vec![0.0; lvl.size];
            for idx in 0..lvl.size {
                let (l, lp) = (lvl.head[idx], lvl.next[idx]);
                let a = *cache.entry((l, lp)).or_insert_with(|| {
                    let lambda = lp as f64 + wexp / 2.0;
                    let deg = l - lp;
                    let norm = (-0.5 * gegenbauer_log_norm(deg, lambda)).exp();
                    norm * s.powi(lp as i32) * gegenbauer_all(deg, lambda, c)[deg]
                });
                next[idx] = a * cur[lvl.tail[idx]];
            }
            cur = next;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn channel_counts_match_dimension_formula() {
        for (amb, k) in [(3usize, 5usize), (5, 8), (6, 3)] {
            let hb = HarmonicBasis::new(amb, k, 2 * k).unwrap();
            let expect: usize = (0..=k).map(|l| harmonic_dim(amb - 1, l)).sum();
            assert_eq!(hb.len(), expect);
        }
        assert_eq!(harmonic_dim(4, 1), 5);
        assert_eq!(harmonic_dim(5, 1), 6);
        assert_eq!(harmonic_dim(2, 3), 7);
    }

    #[test]
    fn orthonormal_under_rule() {
        let hb = HarmonicBasis::new(5, 4, 8).unwrap();
        let nc = hb.len();
        let na = hb.rule().len();
        // synthesize identity columns, then analyze back
        let mut eye = vec![Complex64::new(0.0, 0.0); nc * nc];
        for c in 0..nc {
            eye[c * nc + c] = Complex64::new(1.0, 0.0);
        }
        let vals = hb.synthesize(&eye, nc, AngularDerivative::None);
        assert_eq!(vals.len(), nc * na);
        let back = hb.analyze(&vals, nc);
        for i in 0..nc {
            for j in 0..nc {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((back[i * nc + j].re - e).abs() < 1e-12, "{i} {j} {}", back[i * nc + j]);
            }
        }
    }

    #[test]
    fn pointwise_matches_synthesis() {
        let hb = HarmonicBasis::new(5, 3, 6).unwrap();
        let nc = hb.len();
        let coeffs: Vec<Complex64> = (0..nc).map(|c| Complex64::new((c as f64 * 0.37).sin(), 0.1 * c as f64)).collect();
        let vals = hb.synthesize(&coeffs, 1, AngularDerivative::None);
        for a in [0usize, 17, 101, hb.rule().len() - 1] {
            let y = hb.eval_point(hb.rule().point(a));
            let v: Complex64 = y.iter().zip(&coeffs).map(|(y, c)| c * y).sum();
            assert_relative_eq!(v.re, vals[a].re, epsilon = 1e-12);
            assert_relative_eq!(v.im, vals[a].im, epsilon = 1e-12);
        }
    }

    #[test]
    fn degree_one_spans_coordinates() {
        let hb = HarmonicBasis::new(5, 1, 2).unwrap();
        let na = hb.rule().len();
        for k in 0..5 {
            let vals: Vec<Complex64> = (0..na).map(|a| Complex64::new(hb.rule().point(a)[k], 0.0)).collect();
            let c = hb.analyze(&vals, 1);
            let e: f64 = c.iter().map(|v| v.norm_sqr()).sum();
            // int x_k^2 over S^4 = area/5
            assert_relative_eq!(e, hb.rule().area() / 5.0, max_relative = 1e-12);
            for (ci, v) in c.iter().enumerate() {
                if hb.degree(ci) != 1 {
                    assert!(v.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn derivative_synthesis_matches_finite_differences() {
        // gradient of a degree-2 polynomial in frame components
        let hb = HarmonicBasis::new(5, 2, 4).unwrap();
        let na = hb.rule().len();
        let f = |x: &[f64]| x[0] * x[1] + 0.5 * x[3] * x[3] - 0.3 * x[4] * x[2];
        let grad = |x: &[f64]| [x[1], x[0], -0.3 * x[4], x[3], -0.3 * x[2]];
        let vals: Vec<Complex64> = (0..na).map(|a| Complex64::new(f(hb.rule().point(a)), 0.0)).collect();
        let c = hb.analyze(&vals, 1);
        let n = 5;
        let mut comps = Vec::new();
        for j in 0..3 {
            comps.push(hb.synthesize(&c, 1, AngularDerivative::Theta(j)));
        }
        comps.push(hb.synthesize(&c, 1, AngularDerivative::Phi));
        for a in (0..na).step_by(37) {
            let x = hb.rule().point(a);
            let g = grad(x);
            let fr = hb.frame(a);
            let ih = hb.inv_scale(a);
            for t in 0..4 {
                // tangential component of the ambient gradient
                let e = &fr[(t + 1) * n..(t + 2) * n];
                let expect: f64 = (0..n).map(|k| e[k] * g[k]).sum();
                let got = comps[t][a].re * ih[t];
                assert_relative_eq!(got, expect, epsilon = 1e-11);
            }
        }
    }
}
