//! Galerkin assembly of the regularized crack traction operator.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::forward::kernel::CrackKernel;
use crate::geometry::{CrackElement, CrackGeometry};
use crate::linalg::{c, CMat, CMat3, CVec3, Point, C64};
use crate::quadrature::gauss_legendre01;

/// Element pairs closer than this many element diameters use polar inner quadrature.
pub const NEAR_FACTOR: f64 = 2.0;
/// Gauss order per direction of the polar inner rule.
pub const POLAR_ORDER: usize = 6;
/// Number of fixed work chunks; partial matrices are summed in chunk order so
/// results do not depend on the thread count.
const CHUNKS: usize = 16;

/// Values and surface gradients of the three weighted hat functions of an element.
#[derive(Clone, Copy, Debug)]
pub struct BasisEval {
    pub psi: [f64; 3],
    pub grad: [Point; 3],
}

pub fn basis_at(crack: &CrackGeometry, el: &CrackElement, bary: [f64; 3]) -> BasisEval {
    let (w, gw) = crack.weight_at(el, bary);
    BasisEval {
        psi: [w * bary[0], w * bary[1], w * bary[2]],
        grad: [
            gw * bary[0] + el.grad_lambda[0] * w,
            gw * bary[1] + el.grad_lambda[1] * w,
            gw * bary[2] + el.grad_lambda[2] * w,
        ],
    }
}

/// Quadrature point with basis data, cached per element.
#[derive(Clone, Debug)]
pub struct QData {
    pub pos: Point,
    pub weight: f64,
    pub basis: BasisEval,
}

pub fn element_qdata(crack: &CrackGeometry) -> Vec<Vec<QData>> {
    crack
        .elements
        .iter()
        .map(|el| {
            el.rule
                .iter()
                .map(|q| QData { pos: q.pos, weight: q.weight, basis: basis_at(crack, el, q.bary) })
                .collect()
        })
        .collect()
}

/// Closest point of triangle `(a, b, c)` to `p`, returned as barycentric coordinates.
pub fn closest_bary(p: &Point, a: &Point, b: &Point, cc: &Point) -> [f64; 3] {
    let ab = b - a;
    let ac = cc - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }
    let cp = p - cc;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

/// Polar rule on element `el` centred at its point closest to `x`.
///
/// Sub-triangles fan out from that point; radial and angular variables are
/// graded with `sin²` maps wherever the edge weight vanishes so the
/// square-root behaviour at the crack front is integrated accurately.
pub fn polar_rule(crack: &CrackGeometry, el: &CrackElement, x: &Point, order: usize) -> Vec<(Point, f64, [f64; 3])> {
    let v = [crack.nodes[el.nodes[0]], crack.nodes[el.nodes[1]], crack.nodes[el.nodes[2]]];
    let s = [crack.edge_weight[el.nodes[0]], crack.edge_weight[el.nodes[1]], crack.edge_weight[el.nodes[2]]];
    let b0 = closest_bary(x, &v[0], &v[1], &v[2]);
    let p0 = v[0] * b0[0] + v[1] * b0[1] + v[2] * b0[2];
    let s0 = s[0] * b0[0] + s[1] * b0[1] + s[2] * b0[2];
    let (g, gw) = gauss_legendre01(order);
    let graded = |u: f64| {
        let a = 0.5 * PI * u;
        (a.sin().powi(2), 0.5 * PI * (2.0 * a).sin())
    };
    let mut out = Vec::with_capacity(3 * order * order);
    for k in 0..3 {
        let (ia, ib) = ((k + 1) % 3, (k + 2) % 3);
        let area2 = (v[ia] - p0).cross(&(v[ib] - p0)).norm();
        if area2 < 1e-14 * el.area {
            continue;
        }
        let front_a = s[ia] <= 0.0;
        let front_b = s[ib] <= 0.0;
        let grade_rho = front_a || front_b || s0 <= 1e-14;
        let grade_t = front_a != front_b;
        for (&sr, &wr) in g.iter().zip(&gw) {
            let (rho, drho) = if grade_rho { graded(sr) } else { (sr, 1.0) };
            for (&st, &wt) in g.iter().zip(&gw) {
                let (t, dt) = if grade_t { graded(st) } else { (st, 1.0) };
                let mut bary = [b0[0] * (1.0 - rho), b0[1] * (1.0 - rho), b0[2] * (1.0 - rho)];
                bary[ia] += rho * (1.0 - t);
                bary[ib] += rho * t;
                let pos = v[0] * bary[0] + v[1] * bary[1] + v[2] * bary[2];
                out.push((pos, wr * wt * drho * dt * rho * area2, bary));
            }
        }
    }
    out
}

/// Per-pair accumulators of the scalar and tensor integrals.
#[derive(Clone, Copy)]
struct PairAcc {
    mp: [[C64; 3]; 3],
    ms: [[C64; 3]; 3],
    n1: [[C64; 3]; 3],
    n2: [[C64; 3]; 3],
    qm: [[CMat3; 3]; 3],
}

impl PairAcc {
    fn zero() -> Self {
        let z = c(0.0);
        Self { mp: [[z; 3]; 3], ms: [[z; 3]; 3], n1: [[z; 3]; 3], n2: [[z; 3]; 3], qm: [[CMat3::zeros(); 3]; 3] }
    }
}

struct Inner {
    ap: [C64; 3],
    as_: [C64; 3],
    v1: [CVec3; 3],
    v2: [CVec3; 3],
    vq: [CVec3; 3],
}

impl Inner {
    fn zero() -> Self {
        let z = c(0.0);
        Self { ap: [z; 3], as_: [z; 3], v1: [CVec3::zeros(); 3], v2: [CVec3::zeros(); 3], vq: [CVec3::zeros(); 3] }
    }

    #[inline]
    fn add(&mut self, kern: &CrackKernel, x: &Point, y: &Point, w: f64, b: &BasisEval) {
        let r = (x - y).norm();
        if r < 1e-14 {
            return;
        }
        let kv = kern.eval(r);
        for j in 0..3 {
            let pw = b.psi[j] * w;
            self.ap[j] += kv.gp * pw;
            self.as_[j] += kv.gs * pw;
            let g = b.grad[j] * w;
            for d in 0..3 {
                self.v1[j][d] += kv.h1 * g[d];
                self.v2[j][d] += kv.gs * g[d];
                self.vq[j][d] += kv.q * g[d];
            }
        }
    }

    #[inline]
    fn flush(&self, acc: &mut PairAcc, w: f64, b: &BasisEval) {
        for i in 0..3 {
            let pw = b.psi[i] * w;
            let g = b.grad[i] * w;
            for j in 0..3 {
                acc.mp[i][j] += self.ap[j] * pw;
                acc.ms[i][j] += self.as_[j] * pw;
                let mut d1 = c(0.0);
                let mut d2 = c(0.0);
                for d in 0..3 {
                    d1 += self.v1[j][d] * g[d];
                    d2 += self.v2[j][d] * g[d];
                }
                acc.n1[i][j] += d1;
                acc.n2[i][j] += d2;
                for a in 0..3 {
                    for d in 0..3 {
                        acc.qm[i][j][(a, d)] += self.vq[j][d] * g[a];
                    }
                }
            }
        }
    }
}

fn pair_integrals(crack: &CrackGeometry, qd: &[Vec<QData>], kern: &CrackKernel, e: usize, f: usize) -> PairAcc {
    let (el, fl) = (&crack.elements[e], &crack.elements[f]);
    let near = (el.centroid - fl.centroid).norm() < NEAR_FACTOR * el.diameter.max(fl.diameter);
    let mut acc = PairAcc::zero();
    for xp in &qd[e] {
        let mut inner = Inner::zero();
        if near {
            for (y, w, bary) in polar_rule(crack, fl, &xp.pos, POLAR_ORDER) {
                let b = basis_at(crack, fl, bary);
                inner.add(kern, &xp.pos, &y, w, &b);
            }
        } else {
            for yq in &qd[f] {
                inner.add(kern, &xp.pos, &yq.pos, yq.weight, &yq.basis);
            }
        }
        inner.flush(&mut acc, xp.weight, &xp.basis);
    }
    acc
}

/// Scatter a pair's integrals into 3×3 DOF blocks (test node i, trial node j).
fn pair_blocks(crack: &CrackGeometry, kern: &CrackKernel, e: usize, f: usize, acc: &PairAcc) -> [[CMat3; 3]; 3] {
    let (el, fl) = (&crack.elements[e], &crack.elements[f]);
    let row2 = kern.rho_omega2();
    let mu = kern.mu;
    let mut out = [[CMat3::zeros(); 3]; 3];
    for i in 0..3 {
        let fi = crack.frame(el.nodes[i]);
        for j in 0..3 {
            let fj = crack.frame(fl.nodes[j]);
            for b in 0..3 {
                let eb = fi.column(b).into_owned();
                let nb = eb.dot(&el.normal);
                let tb = eb - el.normal * nb;
                for a in 0..3 {
                    let ea = fj.column(a).into_owned();
                    let na = ea.dot(&fl.normal);
                    let ta = ea - fl.normal * na;
                    let tt = tb.dot(&ta);
                    let mut v = (acc.mp[i][j] * (nb * na) + acc.ms[i][j] * tt) * row2 + acc.n1[i][j] * (4.0 * mu * nb * na)
                        - acc.n2[i][j] * (mu * tt);
                    let q = &acc.qm[i][j];
                    for r in 0..3 {
                        for s in 0..3 {
                            v -= q[(r, s)] * (tb[r] * ta[s]);
                        }
                    }
                    out[i][j][(b, a)] = v;
                }
            }
        }
    }
    out
}

/// Galerkin matrix of the crack traction operator, `T[(i,b),(j,a)] = ⟨T(ψ_j e_ja), ψ_i e_ib⟩`,
/// with DOFs in each node's local `(ν, τ1, τ2)` frame. Symmetric by construction.
pub fn assemble_traction_operator(crack: &CrackGeometry, kern: &CrackKernel) -> CMat {
    let n = 3 * crack.len();
    let ne = crack.elements.len();
    let qd = element_qdata(crack);
    let chunk = ne.div_ceil(CHUNKS).max(1);
    let starts: Vec<usize> = (0..ne).step_by(chunk).collect();
    let partials: Vec<CMat> = starts
        .par_iter()
        .map(|&s0| {
            let mut m = CMat::zeros(n, n);
            for e in s0..(s0 + chunk).min(ne) {
                for f in e..ne {
                    if crack.elements[e].rule.is_empty() || crack.elements[f].rule.is_empty() {
                        continue;
                    }
                    let acc = pair_integrals(crack, &qd, kern, e, f);
                    let blocks = pair_blocks(crack, kern, e, f, &acc);
                    let (ne_, nf_) = (crack.elements[e].nodes, crack.elements[f].nodes);
                    for i in 0..3 {
                        for j in 0..3 {
                            let blk = &blocks[i][j];
                            let (gi, gj) = (3 * ne_[i], 3 * nf_[j]);
                            for b in 0..3 {
                                for a in 0..3 {
                                    let v = blk[(b, a)];
                                    if e == f {
                                        let half = v * 0.5;
                                        m[(gi + b, gj + a)] += half;
                                        m[(gj + a, gi + b)] += half;
                                    } else {
                                        m[(gi + b, gj + a)] += v;
                                        m[(gj + a, gi + b)] += v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            m
        })
        .collect();
    let mut total = CMat::zeros(n, n);
    for p in partials {
        total += p;
    }
    total
}

/// `K_h[(i,b),(j,a)] = ∫ ψ_i ψ_j e_ib·K(y) e_ja`, with K interpolated linearly.
pub fn assemble_stiffness(crack: &CrackGeometry) -> CMat {
    let n = 3 * crack.len();
    let mut m = CMat::zeros(n, n);
    let kg: Vec<CMat3> = (0..crack.len()).map(|j| crack.stiffness_global(j)).collect();
    let frames: Vec<_> = (0..crack.len()).map(|j| crack.frame(j).map(c)).collect();
    for el in &crack.elements {
        for q in &el.rule {
            let b = basis_at(crack, el, q.bary);
            let ky = kg[el.nodes[0]] * c(q.bary[0]) + kg[el.nodes[1]] * c(q.bary[1]) + kg[el.nodes[2]] * c(q.bary[2]);
            for i in 0..3 {
                for j in 0..3 {
                    let (ni, nj) = (el.nodes[i], el.nodes[j]);
                    let local = frames[ni].transpose() * ky * frames[nj] * c(q.weight * b.psi[i] * b.psi[j]);
                    for bb in 0..3 {
                        for a in 0..3 {
                            m[(3 * ni + bb, 3 * nj + a)] += local[(bb, a)];
                        }
                    }
                }
            }
        }
    }
    m
}
