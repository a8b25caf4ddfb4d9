//! Douglas, Weyl-type and related projectively invariant tensors.

use serde::{Deserialize, Serialize};

use crate::deriv::{Jet, TangentPoint};
use crate::error::Result;
use crate::geometry::{require, LocalGeometry, MetricModel};
use crate::randers::{RandersJets, VolumeForm};
use crate::squantities::SQuantityJets;
use crate::tensor::{JetTensor, Symmetry, TensorValue};

/// Orders needed by each tensor.
pub mod order {
    pub const DOUGLAS: usize = 6;
    pub const W_STAR: usize = 6;
    pub const Z: usize = 6;
    pub const W_TILDE: usize = 7;
    pub const WEYL: usize = 8;
}

/// Jets of the invariant tensors at one point; each is present when the
/// context order allows it.
pub struct InvariantJets {
    pub douglas: Option<JetTensor>,
    pub weyl: Option<JetTensor>,
    pub w_tilde: Option<JetTensor>,
    pub w_star: Option<JetTensor>,
    pub z: Option<JetTensor>,
    /// `alpha s^i_j`, for Randers metrics.
    pub alpha_s: Option<JetTensor>,
}

impl InvariantJets {
    pub fn new(
        local: &LocalGeometry<'_>,
        sq: Option<&SQuantityJets>,
        randers: Option<&RandersJets>,
    ) -> Result<InvariantJets> {
        let k = local.order();
        let n = local.n();
        let nf = n as f64;
        let douglas = if k >= order::DOUGLAS {
            Some(douglas(local)?)
        } else {
            None
        };

        let (mut weyl, mut w_tilde, mut w_star) = (None, None, None);
        if k >= order::W_STAR && n >= 2 {
            let k4 = local.berwald_riemann()?;
            let ric = local.ricci_tensor()?;
            let c = 1.0 / (nf * nf - 1.0);
            w_star = Some(JetTensor::from_fn(n, "ulll", |idx| {
                let (i, j, kk, l) = (idx[0], idx[1], idx[2], idx[3]);
                let mut t = k4.get(idx).clone();
                let mut corr = t.zero_like().truncate(ric.order());
                if i == kk {
                    corr += &(ric.get(&[j, l]) * nf + ric.get(&[l, j]));
                }
                if i == l {
                    corr -= &(ric.get(&[j, kk]) * nf + ric.get(&[kk, j]));
                }
                if i == j {
                    corr += &((ric.get(&[kk, l]) - ric.get(&[l, kk])) * (nf - 1.0));
                }
                t -= &(corr * c);
                t
            })?);

            if k >= order::W_TILDE {
                // K_jr.k stored as [j][r][k]
                let ric_dot = ric.vertical();
                let y = |r: usize| local.y(r);
                // y^r K_{ar.b}
                let contract_dot = |a: usize, b: usize| -> Jet {
                    let terms: Vec<Jet> = (0..n).map(|r| y(r) * ric_dot.get(&[a, r, b])).collect();
                    crate::deriv::sum(&terms).expect("n >= 1")
                };
                let khat = JetTensor::from_fn(n, "ll", |jk| {
                    let (j, kk) = (jk[0], jk[1]);
                    ric.get(&[j, kk]) * nf + ric.get(&[kk, j]) + contract_dot(kk, j)
                })?;
                // y^r (K_jr.k - K_jk.r)
                let twist = |j: usize, kk: usize| -> Jet {
                    let terms: Vec<Jet> = (0..n)
                        .map(|r| y(r) * &(ric_dot.get(&[j, r, kk]) - ric_dot.get(&[j, kk, r])))
                        .collect();
                    crate::deriv::sum(&terms).expect("n >= 1")
                };
                let inv = 1.0 / (1.0 - nf * nf);
                let ratio = nf / (nf + 1.0);
                w_tilde = Some(JetTensor::from_fn(n, "ulll", |idx| {
                    let (i, j, kk, l) = (idx[0], idx[1], idx[2], idx[3]);
                    let mut t = k4.get(idx).clone();
                    if i == l {
                        t -= &((khat.get(&[j, kk]) + twist(j, kk) * ratio) * inv);
                    }
                    if i == kk {
                        t += &((khat.get(&[j, l]) + twist(j, l) * ratio) * inv);
                    }
                    t
                })?);

                if k >= order::WEYL {
                    let skew =
                        JetTensor::from_fn(n, "ll", |kl| khat.get(kl) - khat.get(&[kl[1], kl[0]]))?;
                    let skew_dot = skew.vertical(); // [k][l][j]
                    weyl = Some(JetTensor::from_fn(n, "ulll", |idx| {
                        let (i, j, kk, l) = (idx[0], idx[1], idx[2], idx[3]);
                        let mut corr = local.y(i) * skew_dot.get(&[kk, l, j]);
                        if i == j {
                            corr += skew.get(&[kk, l]);
                        }
                        if i == kk {
                            corr += khat.get(&[j, l]);
                        }
                        if i == l {
                            corr -= khat.get(&[j, kk]);
                        }
                        k4.get(idx) - corr * c
                    })?);
                }
            }
        }

        let z = match sq {
            Some(q) if k >= order::Z => {
                let skew = local.ricci_skew()?;
                let half = (nf + 1.0) / 2.0;
                Some(JetTensor::from_fn(n, "ll", |jl| {
                    skew.get(jl) - q.sigma.get(jl) * half
                })?)
            }
            _ => None,
        };
        let alpha_s = randers.map(RandersJets::alpha_s);
        Ok(InvariantJets {
            douglas,
            weyl,
            w_tilde,
            w_star,
            z,
            alpha_s,
        })
    }
}

/// `D^i_jkl = d^3/dy^j dy^k dy^l (G^i - G^m_m y^i / (n + 1))`.
fn douglas(local: &LocalGeometry<'_>) -> Result<JetTensor> {
    require(local.ctx(), order::DOUGLAS)?;
    let n = local.n();
    let spray = local.spray()?;
    let conn = local.connection()?;
    let trace = crate::deriv::sum((0..n).map(|m| conn.get(&[m, m]))).expect("n >= 1");
    let reduced = JetTensor::from_fn(n, "u", |i| {
        &spray[i[0]] - local.y(i[0]) * &trace * (1.0 / (n as f64 + 1.0))
    })?;
    Ok(reduced.vertical().vertical().vertical())
}

/// The invariant tensors at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantTensors {
    pub douglas: TensorValue,
    pub weyl: TensorValue,
    pub w_tilde: TensorValue,
    pub w_star: TensorValue,
    pub z: TensorValue,
    pub alpha_s: Option<TensorValue>,
}

/// `(D, W, W-tilde, W-star, Z, alpha s)` at a point.
pub fn invariant_tensors(m: &MetricModel, at: &TangentPoint) -> Result<InvariantTensors> {
    let local = LocalGeometry::new(m, at, order::WEYL)?;
    let vol = if m.randers_spec().is_some() {
        VolumeForm::BusemannHausdorff
    } else {
        VolumeForm::Coordinate
    };
    let sq = SQuantityJets::new(&local, &vol)?;
    let rj = match m.randers_spec() {
        Some(spec) => Some(RandersJets::from_coords(spec, local.coords())?),
        None => None,
    };
    let inv = InvariantJets::new(&local, Some(&sq), rj.as_ref())?;
    let value = |t: Option<JetTensor>| t.expect("order covers every tensor").value();
    Ok(InvariantTensors {
        douglas: value(inv.douglas).with_symmetries(&[
            Symmetry::Symmetric(1, 2),
            Symmetry::Symmetric(2, 3),
            Symmetry::Symmetric(1, 3),
        ]),
        weyl: value(inv.weyl),
        w_tilde: value(inv.w_tilde),
        w_star: value(inv.w_star),
        z: value(inv.z).with_symmetries(&[Symmetry::Antisymmetric(0, 1)]),
        alpha_s: inv.alpha_s.map(|t| t.value()),
    })
}
