//! Tensor fields on a grid and analytic trigonometric fields.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use super::grid::{GridDomain, MAX_ACTIVE_AXES};

/// Covariant tensor field with all indices ranging over `0..n`.
/// Component `(i_1, …, i_r)` occupies the contiguous block
/// `data[c·npts .. (c+1)·npts]` with `c = Σ i_k n^{r−k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub n: usize,
    pub rank: usize,
    pub npts: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(n: usize, rank: usize, npts: usize) -> Tensor {
        Tensor {
            n,
            rank,
            npts,
            data: vec![0.0; n.pow(rank as u32) * npts],
        }
    }

    pub fn scalar(values: Vec<f64>, n: usize) -> Tensor {
        Tensor {
            n,
            rank: 0,
            npts: values.len(),
            data: values,
        }
    }

    pub fn comps(&self) -> usize {
        self.n.pow(self.rank as u32)
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.data[c * self.npts..(c + 1) * self.npts]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.npts..(c + 1) * self.npts]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, i| acc * self.n + i)
    }

    pub fn multi_index(&self, mut c: usize) -> Vec<usize> {
        let mut out = vec![0; self.rank];
        for slot in out.iter_mut().rev() {
            *slot = c % self.n;
            c /= self.n;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Components that are not identically zero.
    pub fn support(&self) -> Vec<bool> {
        (0..self.comps())
            .map(|c| self.comp(c).iter().any(|v| *v != 0.0))
            .collect()
    }

    pub fn axpy(&mut self, a: f64, x: &Tensor) {
        debug_assert_eq!(self.data.len(), x.data.len());
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += a * x;
        }
    }

    pub fn scaled(&self, a: f64) -> Tensor {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|v| *v *= a);
        t
    }

    /// Pointwise product with a scalar field.
    pub fn times_scalar(&self, f: &[f64]) -> Tensor {
        let mut t = self.clone();
        for c in 0..t.comps() {
            t.comp_mut(c).iter_mut().zip(f).for_each(|(v, s)| *v *= s);
        }
        t
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        let mut t = self.clone();
        t.axpy(-1.0, other);
        t
    }
}

/// `amp · cos(k·x + phase)` with an integer wave vector on the active axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Wave {
    pub amp: f64,
    pub k: [i32; MAX_ACTIVE_AXES],
    pub phase: f64,
}

/// Finite sum of waves: periodic, smooth and exactly differentiable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trig {
    pub waves: Vec<Wave>,
}

impl Trig {
    pub fn zero() -> Trig {
        Trig::default()
    }

    pub fn wave(amp: f64, k: [i32; MAX_ACTIVE_AXES], phase: f64) -> Trig {
        Trig {
            waves: vec![Wave { amp, k, phase }],
        }
    }

    pub fn sin(amp: f64, k: [i32; MAX_ACTIVE_AXES]) -> Trig {
        Trig::wave(amp, k, -FRAC_PI_2)
    }

    pub fn cos(amp: f64, k: [i32; MAX_ACTIVE_AXES]) -> Trig {
        Trig::wave(amp, k, 0.0)
    }

    /// `amp · sin(x_a) cos(x_b)` for distinct axes.
    pub fn sin_cos(amp: f64, a: usize, b: usize) -> Trig {
        let mut k1 = [0; MAX_ACTIVE_AXES];
        let mut k2 = [0; MAX_ACTIVE_AXES];
        k1[a] = 1;
        k1[b] = 1;
        k2[a] = 1;
        k2[b] = -1;
        Trig::sin(amp / 2.0, k1).plus(&Trig::sin(amp / 2.0, k2))
    }

    pub fn plus(&self, other: &Trig) -> Trig {
        let mut waves = self.waves.clone();
        waves.extend(other.waves.iter().cloned());
        Trig { waves }
    }

    pub fn scaled(&self, a: f64) -> Trig {
        Trig {
            waves: self
                .waves
                .iter()
                .map(|w| Wave {
                    amp: w.amp * a,
                    ..w.clone()
                })
                .collect(),
        }
    }

    pub fn value(&self, x: &[f64; MAX_ACTIVE_AXES]) -> f64 {
        self.waves
            .iter()
            .map(|w| {
                let arg: f64 = w.k.iter().zip(x).map(|(k, x)| *k as f64 * x).sum::<f64>() + w.phase;
                w.amp * arg.cos()
            })
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Trig {
        Trig {
            waves: self
                .waves
                .iter()
                .filter(|w| axis < MAX_ACTIVE_AXES && w.k[axis] != 0)
                .map(|w| Wave {
                    amp: w.amp * w.k[axis] as f64,
                    k: w.k,
                    phase: w.phase + FRAC_PI_2,
                })
                .collect(),
        }
    }

    /// Flat Laplacian `Σ_a ∂_a²`.
    pub fn laplacian(&self) -> Trig {
        Trig {
            waves: self
                .waves
                .iter()
                .map(|w| Wave {
                    amp: -w.amp * w.k.iter().map(|k| (k * k) as f64).sum::<f64>(),
                    ..w.clone()
                })
                .collect(),
        }
    }

    pub fn sample(&self, d: &GridDomain) -> Vec<f64> {
        d.sample(|x| self.value(x))
    }

    /// A few low-frequency waves with random amplitudes and phases.
    pub fn random(rng: &mut impl Rng, active: usize, kmax: i32, waves: usize) -> Trig {
        let mut out = Trig::zero();
        for _ in 0..waves {
            let mut k = [0; MAX_ACTIVE_AXES];
            for ki in k.iter_mut().take(active) {
                *ki = rng.gen_range(-kmax..=kmax);
            }
            let amp = rng.gen_range(-1.0..1.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            out.waves.push(Wave { amp, k, phase });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_roundtrip() {
        let t = Tensor::zeros(4, 3, 1);
        for c in 0..t.comps() {
            assert_eq!(t.flat_index(&t.multi_index(c)), c);
        }
    }

    #[test]
    fn trig_derivatives_match_fd() {
        let d = GridDomain::new(4, 2, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = Trig::random(&mut rng, 2, 2, 4);
        for axis in 0..2 {
            let fd = d.partial(&f.sample(&d), axis, crate::numeric::grid::FdOrder::Six);
            let ex = f.partial(axis).sample(&d);
            let err = fd.iter().zip(&ex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn sin_cos_product() {
        let f = Trig::sin_cos(0.3, 0, 1);
        let x = [0.7, 1.9, 0.0];
        assert!((f.value(&x) - 0.3 * 0.7f64.sin() * 1.9f64.cos()).abs() < 1e-14);
        let lap = f.laplacian();
        assert!((lap.value(&x) + 2.0 * f.value(&x)).abs() < 1e-14);
    }
}
