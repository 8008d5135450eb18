//! Derivative-free searches over a compact group.
//!
//! K is parametrized as exp(Σ θᵢ kᵢ) composed with finitely many discrete
//! branches (component representatives, and optionally normalizer/outer
//! representatives). Searches run seeded multi-start Nelder-Mead over the
//! θ-coordinates per branch, so results are deterministic for a fixed seed.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::sample;

/// A located element of the search set: exp(Σ θᵢ kᵢ) · comps[comp] · outers[outer].
#[derive(Debug, Clone, Serialize)]
pub struct KWitness {
    pub theta: Vec<f64>,
    pub comp: usize,
    pub outer: usize,
}

impl KWitness {
    pub fn identity(dim: usize) -> Self {
        KWitness {
            theta: vec![0.0; dim],
            comp: 0,
            outer: 0,
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.comp == 0 && self.outer == 0 && self.theta.iter().all(|t| t.abs() <= tol)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub starts: usize,
    pub nm_iters: usize,
    pub seed: u64,
    /// Stop the whole search once the objective falls below this.
    pub early_exit: f64,
    /// Run the tighter polishing restart only when the first pass got
    /// below this value (saves work on hopeless starts).
    pub polish_below: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: 32,
            nm_iters: 220,
            seed: 0,
            early_exit: 0.0,
            polish_below: f64::INFINITY,
        }
    }
}

/// Search domain: skew generators plus discrete branches. `comps` and
/// `outers` both contain the identity at index 0.
pub struct CompactSearch {
    pub gens: Vec<DMatrix<f64>>,
    pub comps: Vec<DMatrix<f64>>,
    pub outers: Vec<DMatrix<f64>>,
    dim_v: usize,
}

impl CompactSearch {
    pub fn new(
        dim_v: usize,
        gens: Vec<DMatrix<f64>>,
        comp_reps: &[DMatrix<f64>],
        outer_reps: &[DMatrix<f64>],
    ) -> Self {
        let eye = DMatrix::identity(dim_v, dim_v);
        let mut comps = vec![eye.clone()];
        comps.extend(comp_reps.iter().cloned());
        let mut outers = vec![eye];
        outers.extend(outer_reps.iter().cloned());
        CompactSearch {
            gens,
            comps,
            outers,
            dim_v,
        }
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    fn exp_theta(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim_v, self.dim_v);
        for (c, g) in theta.iter().zip(&self.gens) {
            m += g * *c;
        }
        m.exp()
    }

    pub fn realize(&self, w: &KWitness) -> DMatrix<f64> {
        let theta = DVector::from_column_slice(&w.theta);
        self.exp_theta(&theta) * &self.comps[w.comp] * &self.outers[w.outer]
    }

    /// Minimize `obj` over the search set; returns the best witness found
    /// and its objective value.
    pub fn minimize<F>(&self, obj: F, opts: &SearchOptions) -> (KWitness, f64)
    where
        F: Fn(&DMatrix<f64>) -> f64,
    {
        let mut best: Option<(KWitness, f64)> = None;
        'branches: for comp in 0..self.comps.len() {
            for outer in 0..self.outers.len() {
                let branch_obj = |theta: &DVector<f64>| {
                    let k = self.exp_theta(theta) * &self.comps[comp] * &self.outers[outer];
                    obj(&k)
                };
                let mut rng = sample::rng(opts.seed, (comp * self.outers.len() + outer) as u64);
                let starts = self.starts(&mut rng, opts.starts);
                for x0 in starts {
                    let (theta, val) = polish_min(&branch_obj, &x0, opts.nm_iters, opts.polish_below);
                    let w = KWitness {
                        theta: theta.as_slice().to_vec(),
                        comp,
                        outer,
                    };
                    if best.as_ref().map_or(true, |(_, b)| val < *b) {
                        best = Some((w, val));
                    }
                    if val <= opts.early_exit {
                        break 'branches;
                    }
                }
            }
        }
        best.expect("at least one branch evaluated")
    }

    /// Run every start and keep all local solutions with objective below
    /// `accept`. Used when the full solution set matters (fiber searches).
    pub fn collect_solutions<F>(&self, obj: F, accept: f64, opts: &SearchOptions) -> Vec<(KWitness, f64)>
    where
        F: Fn(&DMatrix<f64>) -> f64,
    {
        let mut found = Vec::new();
        for comp in 0..self.comps.len() {
            for outer in 0..self.outers.len() {
                let branch_obj = |theta: &DVector<f64>| {
                    let k = self.exp_theta(theta) * &self.comps[comp] * &self.outers[outer];
                    obj(&k)
                };
                let mut rng = sample::rng(opts.seed, (comp * self.outers.len() + outer) as u64);
                for x0 in self.starts(&mut rng, opts.starts) {
                    let (theta, val) = polish_min(&branch_obj, &x0, opts.nm_iters, opts.polish_below);
                    if val <= accept {
                        found.push((
                            KWitness {
                                theta: theta.as_slice().to_vec(),
                                comp,
                                outer,
                            },
                            val,
                        ));
                    }
                }
            }
        }
        found
    }

    fn starts(&self, rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<DVector<f64>> {
        let d = self.dim();
        let mut out = vec![DVector::zeros(d)];
        if d > 0 {
            for _ in 1..n.max(1) {
                out.push(sample::uniform_cube(rng, d, std::f64::consts::PI));
            }
        }
        out
    }
}

/// Nelder-Mead followed by a tighter restart from the found point.
fn polish_min<F>(f: &F, x0: &DVector<f64>, iters: usize, polish_below: f64) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> f64,
{
    if x0.len() == 0 {
        return (x0.clone(), f(x0));
    }
    let (x1, v1) = nelder_mead(f, x0, 0.7, iters);
    if v1 > polish_below {
        return (x1, v1);
    }
    let (x2, v2) = nelder_mead(f, &x1, 0.02, iters);
    (x2, v2)
}

/// Classic Nelder-Mead with standard coefficients; deterministic.
pub fn nelder_mead<F>(f: &F, x0: &DVector<f64>, scale: f64, max_iters: usize) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return (x0.clone(), f(x0));
    }
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(x0)));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= 1e-14 * (1.0 + best.abs()) {
            break;
        }
        let centroid: DVector<f64> = {
            let mut c = DVector::zeros(n);
            for item in simplex.iter().take(n) {
                c += &item.0;
            }
            c / (n as f64)
        };
        let xr = &centroid + (&centroid - &simplex[n].0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            // Try expanding.
            let xe = &centroid + (&xr - &centroid) * 2.0;
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            // Contract (outside if the reflection helped at all).
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = &centroid + (&xr - &centroid) * 0.5;
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = &centroid + (&simplex[n].0 - &centroid) * 0.5;
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    item.0 = &x_best + (&item.0 - &x_best) * 0.5;
                    item.1 = f(&item.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex[0].clone()
}

/// Closure of a discrete representative set under products, up to `cap`
/// elements. The identity is always included first.
pub fn closure_reps(dim_v: usize, reps: &[DMatrix<f64>], cap: usize) -> Vec<DMatrix<f64>> {
    let mut out = vec![DMatrix::identity(dim_v, dim_v)];
    let mut frontier: Vec<DMatrix<f64>> = reps.to_vec();
    while let Some(r) = frontier.pop() {
        if out.len() >= cap {
            break;
        }
        if out.iter().any(|m| (m - &r).norm() < 1e-9) {
            continue;
        }
        for existing in out.clone() {
            frontier.push(&existing * &r);
            frontier.push(&r * &existing);
        }
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let f = |x: &DVector<f64>| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let (x, v) = nelder_mead(&f, &DVector::from_row_slice(&[3.0, 3.0]), 0.7, 400);
        let (x, v2) = nelder_mead(&f, &x, 0.02, 400);
        assert!(v2 <= v);
        assert!((x[0] - 1.5).abs() < 1e-6 && (x[1] + 0.5).abs() < 1e-6, "{v2}");
    }

    #[test]
    fn search_finds_rotation_angle() {
        // Rotate (1,0) onto (0,1) over K = SO(2).
        let j = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        let search = CompactSearch::new(2, vec![j], &[], &[]);
        let target = DVector::from_row_slice(&[0., 1.]);
        let start = DVector::from_row_slice(&[1., 0.]);
        let (w, val) = search.minimize(
            |k| (k * &start - &target).norm(),
            &SearchOptions {
                seed: 9,
                ..Default::default()
            },
        );
        assert!(val < 1e-8, "val = {val}");
        let k = search.realize(&w);
        assert!((k * &start - &target).norm() < 1e-8);
    }

    #[test]
    fn closure_of_reflection_has_two_elements() {
        let r = DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        let cl = closure_reps(2, &[r], 16);
        assert_eq!(cl.len(), 2);
    }
}
