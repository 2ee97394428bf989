//! Metrics on grids, the Levi-Civita connection and Schouten curvature.

#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

use super::field::{Tensor, Trig};
use super::grid::{FdOrder, GridDomain};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Flat,
    /// `e^{2φ} δ`.
    ConformallyFlat,
    /// `δ + ε h` with a fixed non-conformally-flat `h`.
    Perturbed {
        eps: f64,
    },
    /// Conformal rescaling of another metric.
    Rescaled,
}

/// Riemannian metric sampled on a grid.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub domain: GridDomain,
    pub g: Tensor,
    pub provenance: Provenance,
}

impl MetricField {
    pub fn flat(domain: GridDomain) -> MetricField {
        let (n, npts) = (domain.n, domain.npts());
        let mut g = Tensor::zeros(n, 2, npts);
        for i in 0..n {
            g.comp_mut(i * n + i).fill(1.0);
        }
        MetricField {
            domain,
            g,
            provenance: Provenance::Flat,
        }
    }

    pub fn conformally_flat(domain: GridDomain, phi: &Trig) -> MetricField {
        let mut m = MetricField::flat(domain).rescaled(phi);
        m.provenance = Provenance::ConformallyFlat;
        m
    }

    /// `δ + ε h` with `h` acting on the last two coordinates:
    /// `h_{n−2,n−2} = sin x₁ cos x₂`, `h_{n−2,n−1} = cos x₁`, `h_{n−1,n−1} = sin x₂`.
    pub fn perturbed(domain: GridDomain, eps: f64) -> MetricField {
        let n = domain.n;
        let mut m = MetricField::flat(domain);
        let (p, q) = (n - 2, n - 1);
        let second = domain.active.min(2) - 1;
        let hpp = domain.sample(|x| x[0].sin() * x[second].cos());
        let hpq = domain.sample(|x| x[0].cos());
        let hqq = domain.sample(|x| x[second].sin());
        for (i, j, h) in [(p, p, &hpp), (p, q, &hpq), (q, p, &hpq), (q, q, &hqq)] {
            for (v, hv) in m.g.comp_mut(i * n + j).iter_mut().zip(h) {
                *v += eps * hv;
            }
        }
        m.provenance = Provenance::Perturbed { eps };
        m
    }

    /// `e^{2φ} g`.
    pub fn rescaled(&self, phi: &Trig) -> MetricField {
        let f: Vec<f64> = phi.sample(&self.domain).iter().map(|v| (2.0 * v).exp()).collect();
        MetricField {
            domain: self.domain,
            g: self.g.times_scalar(&f),
            provenance: Provenance::Rescaled,
        }
    }
}

/// Connection and curvature of a metric, with the structural sparsity used
/// by covariant derivatives and contractions.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub domain: GridDomain,
    pub fd: FdOrder,
    pub g: Tensor,
    pub ginv: Tensor,
    /// `Γ^c_{ab}` at component `(c, a, b)`.
    pub gamma: Tensor,
    pub ricci: Tensor,
    pub scal: Vec<f64>,
    pub schouten: Tensor,
    pub schouten_trace: Vec<f64>,
    ginv_nz: Vec<Vec<usize>>,
    /// For `(a, i)`, the `e` with `Γ^e_{ai}` not identically zero.
    gamma_nz: Vec<Vec<usize>>,
}

fn row_support(t: &Tensor) -> Vec<Vec<usize>> {
    let n = t.n;
    let support = t.support();
    (0..n)
        .map(|r| (0..n).filter(|j| support[r * n + j]).collect())
        .collect()
}

/// Levi-Civita connection, Ricci, scalar and Schouten curvature by central
/// differences.
pub fn curvature_pipeline(metric: &MetricField, fd: FdOrder) -> Result<Geometry> {
    let d = metric.domain;
    let (n, npts) = (d.n, d.npts());
    let g = &metric.g;

    let mut ginv = Tensor::zeros(n, 2, npts);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for p in 0..npts {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = g.data[(i * n + j) * npts + p];
            }
        }
        if (0..n).any(|i| (0..i).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12)) {
            return Err(Error::Numeric(format!("metric not symmetric at point {p}")));
        }
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric(format!("metric not positive definite at point {p}")))?;
        let inv = chol.inverse();
        for i in 0..n {
            for j in 0..n {
                ginv.data[(i * n + j) * npts + p] = inv[(i, j)];
            }
        }
    }

    // ∂_c g_ab at (c, a, b)
    let mut dg = Tensor::zeros(n, 3, npts);
    for c in 0..d.active {
        for ab in 0..n * n {
            let block = c * n * n + ab;
            d.partial_into(g.comp(ab), c, fd, &mut dg.data[block * npts..(block + 1) * npts]);
        }
    }
    let ginv_nz = row_support(&ginv);

    let mut gamma = Tensor::zeros(n, 3, npts);
    for a in 0..n {
        for b in 0..n {
            // Γ_{e ab} = ½(∂_a g_eb + ∂_b g_ea − ∂_e g_ab)
            for e in 0..n {
                let (x, y, z) = (
                    dg.comp(a * n * n + e * n + b),
                    dg.comp(b * n * n + e * n + a),
                    dg.comp(e * n * n + a * n + b),
                );
                if x.iter().chain(y).chain(z).all(|v| *v == 0.0) {
                    continue;
                }
                for c in 0..n {
                    if !ginv_nz[c].contains(&e) {
                        continue;
                    }
                    let gi = ginv.comp(c * n + e).to_vec();
                    let out = gamma.comp_mut(c * n * n + a * n + b);
                    for p in 0..npts {
                        out[p] += 0.5 * gi[p] * (x[p] + y[p] - z[p]);
                    }
                }
            }
        }
    }

    // Ric_bd = ∂_a Γ^a_db − ∂_d Γ^a_ab + Γ^a_ae Γ^e_db − Γ^a_de Γ^e_ab
    let mut ricci = Tensor::zeros(n, 2, npts);
    let mut tmp = vec![0.0; npts];
    let mut trace_gamma = Tensor::zeros(n, 1, npts); // Γ^a_ab
    for b in 0..n {
        let out = trace_gamma.comp_mut(b);
        for a in 0..n {
            for (o, v) in out.iter_mut().zip(gamma.comp(a * n * n + a * n + b)) {
                *o += v;
            }
        }
    }
    for b in 0..n {
        for dd in 0..n {
            let mut acc = vec![0.0; npts];
            for a in 0..d.active.min(n) {
                d.partial_into(gamma.comp(a * n * n + dd * n + b), a, fd, &mut tmp);
                acc.iter_mut().zip(&tmp).for_each(|(x, t)| *x += t);
            }
            if dd < d.active {
                d.partial_into(trace_gamma.comp(b), dd, fd, &mut tmp);
                acc.iter_mut().zip(&tmp).for_each(|(x, t)| *x -= t);
            }
            for e in 0..n {
                let (ta, g1) = (trace_gamma.comp(e), gamma.comp(e * n * n + dd * n + b));
                for p in 0..npts {
                    acc[p] += ta[p] * g1[p];
                }
                for a in 0..n {
                    let (x, y) = (gamma.comp(a * n * n + dd * n + e), gamma.comp(e * n * n + a * n + b));
                    for p in 0..npts {
                        acc[p] -= x[p] * y[p];
                    }
                }
            }
            ricci.comp_mut(b * n + dd).copy_from_slice(&acc);
        }
    }

    for b in 0..n {
        for dd in 0..b {
            let avg: Vec<f64> = ricci
                .comp(b * n + dd)
                .iter()
                .zip(ricci.comp(dd * n + b))
                .map(|(x, y)| 0.5 * (x + y))
                .collect();
            ricci.comp_mut(b * n + dd).copy_from_slice(&avg);
            ricci.comp_mut(dd * n + b).copy_from_slice(&avg);
        }
    }

    let mut scal = vec![0.0; npts];
    for ij in 0..n * n {
        let (gi, r) = (ginv.comp(ij), ricci.comp(ij));
        for p in 0..npts {
            scal[p] += gi[p] * r[p];
        }
    }

    let nf = n as f64;
    let mut schouten = Tensor::zeros(n, 2, npts);
    if n > 2 {
        for ij in 0..n * n {
            let (r, gg) = (ricci.comp(ij), g.comp(ij));
            let out = schouten.comp_mut(ij);
            for p in 0..npts {
                out[p] = (r[p] - scal[p] / (2.0 * (nf - 1.0)) * gg[p]) / (nf - 2.0);
            }
        }
    }
    let schouten_trace = scal
        .iter()
        .map(|s| if n > 2 { s / (2.0 * (nf - 1.0)) } else { 0.0 })
        .collect();

    let support = gamma.support();
    let gamma_nz = (0..n * n)
        .map(|ai| (0..n).filter(|e| support[e * n * n + ai]).collect())
        .collect();
    Ok(Geometry {
        domain: d,
        fd,
        g: g.clone(),
        ginv,
        gamma,
        ricci,
        scal,
        schouten,
        schouten_trace,
        ginv_nz,
        gamma_nz,
    })
}

impl Geometry {
    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn npts(&self) -> usize {
        self.domain.npts()
    }

    /// `(∇T)_{a i_1 … i_r}` with the new index first.
    pub fn covd(&self, t: &Tensor) -> Tensor {
        let (n, npts, r) = (self.n(), self.npts(), t.rank);
        let comps = t.comps();
        let mut out = Tensor::zeros(n, r + 1, npts);
        let support = t.support();
        for a in 0..self.domain.active {
            for c in 0..comps {
                if support[c] {
                    let block = a * comps + c;
                    self.domain
                        .partial_into(t.comp(c), a, self.fd, &mut out.data[block * npts..(block + 1) * npts]);
                }
            }
        }
        if r == 0 {
            return out;
        }
        let pow: Vec<usize> = (0..r).map(|m| n.pow((r - 1 - m) as u32)).collect();
        for a in 0..n {
            for c in 0..comps {
                let idx = t.multi_index(c);
                let block = a * comps + c;
                for m in 0..r {
                    let i = idx[m];
                    for &e in &self.gamma_nz[a * n + i] {
                        // replace the m-th index by e
                        let src = c - i * pow[m] + e * pow[m];
                        if !support[src] {
                            continue;
                        }
                        let gam = &self.gamma.data[((e * n + a) * n + i) * npts..][..npts];
                        let s = &t.data[src * npts..][..npts];
                        let o = &mut out.data[block * npts..][..npts];
                        for p in 0..npts {
                            o[p] -= gam[p] * s[p];
                        }
                    }
                }
            }
        }
        out
    }

    /// Raises the index at position `m` with `g^{-1}`.
    pub fn raise(&self, t: &Tensor, m: usize) -> Tensor {
        let (n, npts, r) = (self.n(), self.npts(), t.rank);
        let pow = n.pow((r - 1 - m) as u32);
        let mut out = Tensor::zeros(n, r, npts);
        let support = t.support();
        for c in 0..t.comps() {
            let i = (c / pow) % n;
            for &j in &self.ginv_nz[i] {
                let src = c - i * pow + j * pow;
                if !support[src] {
                    continue;
                }
                let gi = &self.ginv.data[(i * n + j) * npts..][..npts];
                let s = &t.data[src * npts..][..npts];
                let o = &mut out.data[c * npts..][..npts];
                for p in 0..npts {
                    o[p] += gi[p] * s[p];
                }
            }
        }
        out
    }

    /// Metric trace over positions `x < y`.
    pub fn contract(&self, t: &Tensor, x: usize, y: usize) -> Tensor {
        assert!(x < y && y < t.rank);
        let (n, npts, r) = (self.n(), self.npts(), t.rank);
        let mut out = Tensor::zeros(n, r - 2, npts);
        let px = n.pow((r - 1 - x) as u32);
        let py = n.pow((r - 1 - y) as u32);
        let support = t.support();
        for oc in 0..out.comps() {
            let rest = out.multi_index(oc);
            let mut full = Vec::with_capacity(r);
            let mut it = rest.iter();
            for k in 0..r {
                full.push(if k == x || k == y { 0 } else { *it.next().unwrap() });
            }
            let base = t.flat_index(&full);
            let o = &mut out.data[oc * npts..][..npts];
            for s in 0..n {
                for &u in &self.ginv_nz[s] {
                    let src = base + s * px + u * py;
                    if !support[src] {
                        continue;
                    }
                    let gi = &self.ginv.data[(s * n + u) * npts..][..npts];
                    let v = &t.data[src * npts..][..npts];
                    for p in 0..npts {
                        o[p] += gi[p] * v[p];
                    }
                }
            }
        }
        out
    }

    /// Largest Weyl tensor component `W_abcd` over the grid.
    pub fn weyl_max(&self) -> f64 {
        let (n, npts) = (self.n(), self.npts());
        let d = self.domain;
        // R^a_{bcd} = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
        let dgamma = |c: usize, a: usize, dd: usize, b: usize| -> Vec<f64> {
            if c >= d.active {
                return vec![0.0; npts];
            }
            d.partial(self.gamma.comp((a * n + dd) * n + b), c, self.fd)
        };
        let mut worst: f64 = 0.0;
        let mut riem_up = vec![vec![0.0; npts]; n];
        for b in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    for (a, slot) in riem_up.iter_mut().enumerate() {
                        let x = dgamma(c, a, dd, b);
                        let y = dgamma(dd, a, c, b);
                        for p in 0..npts {
                            let mut v = x[p] - y[p];
                            for e in 0..n {
                                v += self.gamma.data[((a * n + c) * n + e) * npts + p]
                                    * self.gamma.data[((e * n + dd) * n + b) * npts + p]
                                    - self.gamma.data[((a * n + dd) * n + e) * npts + p]
                                        * self.gamma.data[((e * n + c) * n + b) * npts + p];
                            }
                            slot[p] = v;
                        }
                    }
                    for a in 0..n {
                        for p in 0..npts {
                            let gv = |i: usize, j: usize| self.g.data[(i * n + j) * npts + p];
                            let pv = |i: usize, j: usize| self.schouten.data[(i * n + j) * npts + p];
                            let r: f64 = (0..n).map(|e| gv(a, e) * riem_up[e][p]).sum();
                            let kn = gv(a, c) * pv(b, dd) - gv(a, dd) * pv(b, c) + gv(b, dd) * pv(a, c)
                                - gv(b, c) * pv(a, dd);
                            worst = worst.max((r - kn).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Schouten tensor of `e^{2φ} δ` from the transformation law:
/// `−∂_a∂_bφ + ∂_aφ ∂_bφ − ½|dφ|² δ_ab`.
pub fn conformally_flat_schouten(domain: &GridDomain, phi: &Trig) -> Tensor {
    let n = domain.n;
    let npts = domain.npts();
    let grads: Vec<Vec<f64>> = (0..n).map(|a| phi.partial(a).sample(domain)).collect();
    let norm2: Vec<f64> = (0..npts).map(|p| grads.iter().map(|g| g[p] * g[p]).sum()).collect();
    let mut out = Tensor::zeros(n, 2, npts);
    for a in 0..n {
        for b in 0..n {
            let hess = phi.partial(a).partial(b).sample(domain);
            let o = out.comp_mut(a * n + b);
            for p in 0..npts {
                o[p] = -hess[p] + grads[a][p] * grads[b][p] - if a == b { 0.5 * norm2[p] } else { 0.0 };
            }
        }
    }
    out
}
