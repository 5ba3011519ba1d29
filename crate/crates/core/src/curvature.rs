//! Christoffel → Riemann → Ricci → Weyl for diagonal metrics.
//!
//! Conventions:
//!
//! ```text
//! R^i_{jkl} = ∂_kΓ^i_{lj} − ∂_lΓ^i_{kj} + Γ^i_{km}Γ^m_{lj} − Γ^i_{lm}Γ^m_{kj}
//! R_{jl}    = R^i_{jil}
//! C_{ijkl}  = R_{ijkl} − ½(g_ik R_jl − g_il R_jk + g_jl R_ik − g_jk R_il)
//!                      + R/6 (g_ik g_jl − g_il g_jk)
//! ```
//!
//! The metric components are evaluated as order-2 jets; Γ is carried as
//! order-1 jets so the Riemann tensor needs no third derivatives.

use crate::expr::Expr;
use crate::jet::{Jet1, Jet2, DIM};
use crate::metric::{MetricSpec, PAIRS};
use crate::scalar::Scalar;
use crate::Error;

pub type Tensor4<S> = [[[[S; DIM]; DIM]; DIM]; DIM];
pub type Christoffel<S> = [[[Jet1<S>; DIM]; DIM]; DIM];

fn tensor4<S>(f: impl Fn(usize, usize, usize, usize) -> S) -> Tensor4<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| f(i, j, k, l)))))
}

/// All curvature quantities of a diagonal metric at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle<S> {
    /// Diagonal components `g_ii`.
    pub metric: [S; DIM],
    /// `Γ^i_{jk}` with first derivatives, indexed `[i][j][k]`.
    pub gamma: Christoffel<S>,
    /// `R^i_{jkl}`.
    pub riemann_up: Tensor4<S>,
    /// `R_{ijkl} = g_ii R^i_{jkl}`.
    pub riemann: Tensor4<S>,
    pub ricci: [[S; DIM]; DIM],
    pub scalar: S,
    /// `C_{ijkl}`.
    pub weyl: Tensor4<S>,
    /// `C^i_{jkl} = g^ii C_{ijkl}`.
    pub weyl_mixed13: Tensor4<S>,
    /// `C^{ij}_{ij} = g^ii g^jj C_{ijij}` in pair order.
    pub weyl_mixed22: [S; 6],
}

/// Christoffel symbols of `diag(g)` as order-1 jets.
pub fn christoffel_from_jets<S: Scalar>(g: &[Jet2<S>; DIM]) -> Result<Christoffel<S>, Error> {
    let two = S::from_i64(2);
    let mut twice_g: Vec<Jet1<S>> = Vec::with_capacity(DIM);
    for gi in g {
        let t = gi.truncate();
        twice_g.push(Jet1 {
            value: t.value * two.clone(),
            grad: t.grad.map(|d| d * two.clone()),
        });
    }
    let zero = Jet1::constant(S::zero());
    let mut out: Christoffel<S> = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zero.clone())));
    for i in 0..DIM {
        for j in 0..DIM {
            for k in j..DIM {
                // δ_ik ∂_j g_ii + δ_ij ∂_k g_ii − δ_jk ∂_i g_jj
                let mut num: Option<Jet1<S>> = None;
                let mut push = |term: Jet1<S>| {
                    num = Some(match num.take() {
                        Some(acc) => acc + term,
                        None => term,
                    })
                };
                if i == k {
                    push(g[i].partial(j));
                }
                if i == j {
                    push(g[i].partial(k));
                }
                if j == k {
                    push(-g[j].partial(i));
                }
                if let Some(n) = num {
                    let v = n.try_div(&twice_g[i])?;
                    out[i][j][k] = v.clone();
                    out[i][k][j] = v;
                }
            }
        }
    }
    Ok(out)
}

impl<S: Scalar> CurvatureBundle<S> {
    /// Builds the bundle from order-2 jets of the diagonal components.
    pub fn from_jets(g: &[Jet2<S>; DIM]) -> Result<Self, Error> {
        let gamma = christoffel_from_jets(g)?;
        let metric: [S; DIM] = std::array::from_fn(|i| g[i].value.clone());
        let inv: Vec<S> = metric.iter().map(|x| x.recip()).collect::<Result<_, _>>()?;

        let riemann_up = tensor4(|i, j, k, l| {
            if k == l {
                return S::zero();
            }
            let mut r = gamma[i][l][j].grad[k].clone() - gamma[i][k][j].grad[l].clone();
            for m in 0..DIM {
                r = r + gamma[i][k][m].value.clone() * gamma[m][l][j].value.clone()
                    - gamma[i][l][m].value.clone() * gamma[m][k][j].value.clone();
            }
            r
        });
        let riemann = tensor4(|i, j, k, l| metric[i].clone() * riemann_up[i][j][k][l].clone());
        let ricci: [[S; DIM]; DIM] = std::array::from_fn(|j| {
            std::array::from_fn(|l| (0..DIM).fold(S::zero(), |acc, i| acc + riemann_up[i][j][i][l].clone()))
        });
        let scalar = (0..DIM).fold(S::zero(), |acc, j| acc + inv[j].clone() * ricci[j][j].clone());

        let sixth = S::from_rational(&crate::scalar::q(1, 6));
        let gm = |a: usize, b: usize| if a == b { metric[a].clone() } else { S::zero() };
        let weyl = tensor4(|i, j, k, l| {
            let ricci_part = gm(i, k) * ricci[j][l].clone() - gm(i, l) * ricci[j][k].clone()
                + gm(j, l) * ricci[i][k].clone()
                - gm(j, k) * ricci[i][l].clone();
            let scalar_part = gm(i, k) * gm(j, l) - gm(i, l) * gm(j, k);
            riemann[i][j][k][l].clone() - S::half() * ricci_part + sixth.clone() * scalar.clone() * scalar_part
        });
        let weyl_mixed13 = tensor4(|i, j, k, l| inv[i].clone() * weyl[i][j][k][l].clone());
        let weyl_mixed22 = std::array::from_fn(|p| {
            let (i, j) = PAIRS[p];
            inv[i].clone() * inv[j].clone() * weyl[i][j][i][j].clone()
        });
        Ok(CurvatureBundle {
            metric,
            gamma,
            riemann_up,
            riemann,
            ricci,
            scalar,
            weyl,
            weyl_mixed13,
            weyl_mixed22,
        })
    }

    /// Bundle for `diag(components)` where each component is an [`Expr`].
    pub fn from_components(components: &[Expr; DIM], p: &[S; DIM]) -> Result<Self, Error> {
        let seeds = Jet2::seed(p);
        let mut g: Vec<Jet2<S>> = Vec::with_capacity(DIM);
        for c in components {
            g.push(c.eval(&seeds)?);
        }
        let g: [Jet2<S>; DIM] = g.try_into().expect("four components");
        Self::from_jets(&g)
    }

    /// `C^{ij}_{ij}` for `i ≠ j` (either order).
    pub fn weyl22(&self, i: usize, j: usize) -> &S {
        &self.weyl_mixed22[crate::metric::pair_index(i, j)]
    }
}

/// Christoffel symbols of a metric spec at an admissible point.
pub fn christoffel<S: Scalar>(spec: &MetricSpec, p: &[S; DIM]) -> Result<Christoffel<S>, Error> {
    spec.admissible(p).into_result()?;
    christoffel_from_jets(&spec.metric_jets(p)?)
}

/// Full curvature bundle of a metric spec at an admissible point.
pub fn curvature<S: Scalar>(spec: &MetricSpec, p: &[S; DIM]) -> Result<CurvatureBundle<S>, Error> {
    spec.admissible(p).into_result()?;
    CurvatureBundle::from_jets(&spec.metric_jets(p)?)
}

/// `Σ R_{ijkl}² / Σ g_ii²`.
pub fn riemann_norm(spec: &MetricSpec, p: &[f64; DIM]) -> Result<f64, Error> {
    Ok(curvature(spec, p)?.riemann_norm())
}

/// Maxima of the residuals of the algebraic curvature identities, each
/// measured on orthonormal-frame components and divided by
/// `max(1, max |frame Riemann|)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymmetryResiduals {
    pub antisym_first: f64,
    pub antisym_last: f64,
    pub pair_exchange: f64,
    pub bianchi: f64,
    pub weyl_trace: f64,
    pub weyl_symmetries: f64,
    pub mixed22_consistency: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        [
            self.antisym_first,
            self.antisym_last,
            self.pair_exchange,
            self.bianchi,
            self.weyl_trace,
            self.weyl_symmetries,
            self.mixed22_consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn max_abs4(t: &Tensor4<f64>) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

impl CurvatureBundle<f64> {
    /// Components in the orthonormal frame: `T_{ijkl} / sqrt|g_ii g_jj g_kk g_ll|`.
    pub fn frame(&self, t: &Tensor4<f64>) -> Tensor4<f64> {
        let s: [f64; DIM] = self.metric.map(|g| g.abs().sqrt());
        tensor4(|i, j, k, l| t[i][j][k][l] / (s[i] * s[j] * s[k] * s[l]))
    }

    /// `Σ R_{ijkl}² / Σ g_ii²`.
    pub fn riemann_norm(&self) -> f64 {
        let num: f64 = self.riemann.iter().flatten().flatten().flatten().map(|x| x * x).sum();
        let den: f64 = self.metric.iter().map(|g| g * g).sum();
        num / den
    }

    /// Largest frame Riemann component.
    pub fn frame_riemann_scale(&self) -> f64 {
        max_abs4(&self.frame(&self.riemann))
    }

    /// Scale-free conformal-flatness residual: `max |frame C| / max(1, max |frame R|)`.
    pub fn weyl_residual(&self) -> f64 {
        max_abs4(&self.frame(&self.weyl)) / self.frame_riemann_scale().max(1.0)
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let r = self.frame(&self.riemann);
        let c = self.frame(&self.weyl);
        let scale = max_abs4(&r).max(1.0);
        let sign: [f64; DIM] = self.metric.map(f64::signum);
        let mut out = SymmetryResiduals::default();
        let upd = |slot: &mut f64, v: f64| *slot = slot.max(v.abs() / scale);
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        upd(&mut out.antisym_first, r[i][j][k][l] + r[j][i][k][l]);
                        upd(&mut out.antisym_last, r[i][j][k][l] + r[i][j][l][k]);
                        upd(&mut out.pair_exchange, r[i][j][k][l] - r[k][l][i][j]);
                        upd(&mut out.bianchi, r[i][j][k][l] + r[i][k][l][j] + r[i][l][j][k]);
                        upd(&mut out.weyl_symmetries, c[i][j][k][l] + c[j][i][k][l]);
                        upd(&mut out.weyl_symmetries, c[i][j][k][l] + c[i][j][l][k]);
                        upd(&mut out.weyl_symmetries, c[i][j][k][l] - c[k][l][i][j]);
                        upd(&mut out.weyl_symmetries, c[i][j][k][l] + c[i][k][l][j] + c[i][l][j][k]);
                    }
                }
            }
        }
        for j in 0..DIM {
            for k in 0..DIM {
                // g^{il} C_{ijkl} in the frame
                let trace: f64 = (0..DIM).map(|a| sign[a] * c[a][j][k][a]).sum();
                upd(&mut out.weyl_trace, trace);
            }
        }
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let direct = self.weyl_mixed22[p];
            let via13 = self.weyl_mixed13[i][j][i][j] / self.metric[j];
            let scale22 = direct.abs().max(via13.abs()).max(1.0);
            out.mixed22_consistency = out.mixed22_consistency.max((direct - via13).abs() / scale22);
        }
        out
    }
}

/// Finite-difference reference: metric values only, every derivative by
/// central differences, general (non-diagonal-shortcut) tensor formulas.
/// Accuracy is O(h²). Intended for tests.
pub mod fd_oracle {
    use super::{tensor4, Tensor4, DIM};
    use crate::metric::MetricSpec;
    use crate::Error;

    /// Curvature tensors computed from metric values by finite differences.
    #[derive(Debug, Clone, PartialEq)]
    pub struct FdBundle {
        pub metric: [f64; DIM],
        /// `Γ^i_{jk}`.
        pub gamma: [[[f64; DIM]; DIM]; DIM],
        pub riemann: Tensor4<f64>,
        pub ricci: [[f64; DIM]; DIM],
        pub scalar: f64,
        pub weyl: Tensor4<f64>,
    }

    fn metric_matrix(spec: &MetricSpec, p: &[f64; DIM]) -> Result<[[f64; DIM]; DIM], Error> {
        let d = spec.metric_values(p)?;
        let mut g = [[0.0; DIM]; DIM];
        for i in 0..DIM {
            g[i][i] = d[i];
        }
        Ok(g)
    }

    fn shifted(p: &[f64; DIM], a: usize, h: f64) -> [f64; DIM] {
        let mut q = *p;
        q[a] += h;
        q
    }

    fn inverse_diag(g: &[[f64; DIM]; DIM]) -> [[f64; DIM]; DIM] {
        let mut inv = [[0.0; DIM]; DIM];
        for i in 0..DIM {
            inv[i][i] = 1.0 / g[i][i];
        }
        inv
    }

    /// `Γ^i_{jk} = ½ g^{im}(∂_j g_mk + ∂_k g_mj − ∂_m g_jk)` with central differences.
    fn gamma_at(spec: &MetricSpec, p: &[f64; DIM], h: f64) -> Result<[[[f64; DIM]; DIM]; DIM], Error> {
        let g = metric_matrix(spec, p)?;
        let inv = inverse_diag(&g);
        let mut dg = [[[0.0; DIM]; DIM]; DIM]; // dg[a][m][n] = ∂_a g_mn
        for a in 0..DIM {
            let plus = metric_matrix(spec, &shifted(p, a, h))?;
            let minus = metric_matrix(spec, &shifted(p, a, -h))?;
            for m in 0..DIM {
                for n in 0..DIM {
                    dg[a][m][n] = (plus[m][n] - minus[m][n]) / (2.0 * h);
                }
            }
        }
        let mut gamma = [[[0.0; DIM]; DIM]; DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut s = 0.0;
                    for m in 0..DIM {
                        s += inv[i][m] * (dg[j][m][k] + dg[k][m][j] - dg[m][j][k]);
                    }
                    gamma[i][j][k] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    pub fn curvature(spec: &MetricSpec, p: &[f64; DIM], h: f64) -> Result<FdBundle, Error> {
        let g = metric_matrix(spec, p)?;
        let inv = inverse_diag(&g);
        let gamma = gamma_at(spec, p, h)?;
        let mut dgamma = [[[[0.0; DIM]; DIM]; DIM]; DIM]; // dgamma[a][i][j][k]
        for a in 0..DIM {
            let plus = gamma_at(spec, &shifted(p, a, h), h)?;
            let minus = gamma_at(spec, &shifted(p, a, -h), h)?;
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        dgamma[a][i][j][k] = (plus[i][j][k] - minus[i][j][k]) / (2.0 * h);
                    }
                }
            }
        }
        let riemann_up = tensor4(|i, j, k, l| {
            let mut r = dgamma[k][i][l][j] - dgamma[l][i][k][j];
            for m in 0..DIM {
                r += gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j];
            }
            r
        });
        let riemann = tensor4(|i, j, k, l| (0..DIM).map(|a| g[i][a] * riemann_up[a][j][k][l]).sum());
        let mut ricci = [[0.0; DIM]; DIM];
        for j in 0..DIM {
            for l in 0..DIM {
                ricci[j][l] = (0..DIM).map(|i| riemann_up[i][j][i][l]).sum();
            }
        }
        let mut scalar = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                scalar += inv[a][b] * ricci[a][b];
            }
        }
        let weyl = tensor4(|i, j, k, l| {
            riemann[i][j][k][l]
                - 0.5 * (g[i][k] * ricci[j][l] - g[i][l] * ricci[j][k] + g[j][l] * ricci[i][k] - g[j][k] * ricci[i][l])
                + scalar / 6.0 * (g[i][k] * g[j][l] - g[i][l] * g[j][k])
        });
        Ok(FdBundle {
            metric: std::array::from_fn(|i| g[i][i]),
            gamma,
            riemann,
            ricci,
            scalar,
            weyl,
        })
    }
}

impl CurvatureBundle<f64> {
    /// Largest deviation from a finite-difference bundle over Γ, Riemann and
    /// Weyl, relative to `max(1, largest component)` of each tensor.
    pub fn deviation_from(&self, fd: &fd_oracle::FdBundle) -> f64 {
        let rel = |a: &Tensor4<f64>, b: &Tensor4<f64>| {
            let scale = max_abs4(a).max(1.0);
            let mut d: f64 = 0.0;
            for (x, y) in a.iter().flatten().flatten().flatten().zip(b.iter().flatten().flatten().flatten()) {
                d = d.max((x - y).abs());
            }
            d / scale
        };
        let mut gscale: f64 = 1.0;
        let mut gdev: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    gscale = gscale.max(self.gamma[i][j][k].value.abs());
                    gdev = gdev.max((self.gamma[i][j][k].value - fd.gamma[i][j][k]).abs());
                }
            }
        }
        (gdev / gscale).max(rel(&self.riemann, &fd.riemann)).max(rel(&self.weyl, &fd.weyl))
    }
}
