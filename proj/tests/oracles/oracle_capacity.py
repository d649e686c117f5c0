#!/usr/bin/env python3
"""Reference values for the capacity bounds (c*, e(q), alpha_low)."""
import json
import math

import numpy as np
from scipy import optimize
from scipy.stats import norm


def c_star(kappa):
    f = lambda c: c * norm.sf(kappa + c) - norm.pdf(kappa + c)
    # c* is tiny for very negative kappa. The function underflows to exactly 0
    # for large c, so grow the upper bracket only until it turns positive.
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2
    return optimize.brentq(f, 1e-300, hi, xtol=1e-300, rtol=8.9e-16)


def e_of_q_grid(kappa, cs, qs, n_nodes=400, L=14.0):
    """e(q) = E[f(G1)f(G2)] at correlation q, f(x)=exp(-cs*x)1{x>=kappa}.

    Substitution G2 = q G1 + sqrt(1-q^2) Z turns the inner integral into a
    shifted Gaussian with lower limit depending on G1.
    """
    # Outer nodes on [kappa, upper]: integrand ~ exp(-cs*x) phi(x), which is
    # phi(x + cs) up to scale, so mass sits near max(kappa, -cs).
    x_nodes, x_w = np.polynomial.legendre.leggauss(n_nodes)
    lo = kappa
    hi = max(kappa, -cs) + L
    x = 0.5 * (hi - lo) * x_nodes + 0.5 * (hi + lo)
    wx = 0.5 * (hi - lo) * x_w
    outer = np.exp(-cs * x) * norm.pdf(x)
    res = []
    for q in qs:
        if abs(q) >= 1.0:
            if q >= 1.0:
                res.append(float(np.sum(wx * outer * np.exp(-cs * x))))
            else:
                # q = -1: G2 = -G1; f(G1)f(-G1) = 1{kappa <= G1 <= -kappa}.
                res.append(float(norm.cdf(-kappa) - norm.cdf(kappa)))
            continue
        s = math.sqrt(1 - q * q)
        # Inner: E_Z[e^{-cs(qx+sZ)} 1{qx+sZ>=kappa}]
        #      = e^{-cs q x} e^{cs^2 s^2/2} Phi(-( (kappa-qx)/s + cs*s )).
        inner = np.exp(-cs * q * x + 0.5 * cs * cs * s * s) * norm.sf(
            (kappa - q * x) / s + cs * s
        )
        res.append(float(np.sum(wx * outer * inner)))
    return res


def e_mc(kappa, cs, q, n=10_000_000, seed=7):
    rng = np.random.default_rng(seed)
    g1 = rng.standard_normal(n)
    g2 = q * g1 + math.sqrt(1 - q * q) * rng.standard_normal(n)
    f1 = np.where(g1 >= kappa, np.exp(-cs * g1), 0.0)
    f2 = np.where(g2 >= kappa, np.exp(-cs * g2), 0.0)
    v = f1 * f2
    return float(v.mean()), float(v.std() / math.sqrt(n))


def ent(x):
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


def alpha_low(kappa, q_grid=2001, tol=1e-4):
    cs = c_star(kappa)
    qs = np.linspace(-1, 1, q_grid)
    e_vals = np.array(e_of_q_grid(kappa, cs, qs))
    log_e = np.log(e_vals)
    ent_vals = np.array([ent((1 + q) / 2) for q in qs])
    e0 = e_of_q_grid(kappa, cs, [0.0])[0]
    # Richardson second derivative.
    h1, h2 = 1e-3, 5e-4
    d2 = lambda h: (
        e_of_q_grid(kappa, cs, [h])[0] - 2 * e0 + e_of_q_grid(kappa, cs, [-h])[0]
    ) / h**2
    a1, a2 = d2(h1), d2(h2)
    e2 = (4 * a2 - a1) / 3

    def admissible(alpha):
        psi = alpha * log_e + ent_vals + math.log(2)
        psi0 = alpha * math.log(e0) + 2 * math.log(2)
        mask = np.abs(qs) >= 2 / q_grid
        if np.max(psi[mask]) > psi0 - 1e-9:
            return False
        return alpha * e2 / e0 - 1 < 0

    lo, hi = 1e-6, 1.0
    if not admissible(lo):
        return None
    while admissible(hi):
        hi *= 2
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return dict(alpha_low=lo, c_star=cs, e0=e0, e2=e2)


out = {}
for k in (-2.0, -4.0, -5.0, -6.0):
    out[f"c_star_{k}"] = c_star(k)

# e(q) identities at kappa=-3.
k3 = -3.0
cs3 = c_star(k3)
e_vals = e_of_q_grid(k3, cs3, [0.0, 0.5, 0.9, 1.0, -1.0, 1e-3, -1e-3])
out["e_kappa_-3"] = dict(
    c_star=cs3,
    e_0=e_vals[0],
    e_05=e_vals[1],
    e_09=e_vals[2],
    e_1=e_vals[3],
    e_m1=e_vals[4],
    e0_closed=(math.exp(cs3**2 / 2) * norm.sf(k3 + cs3)) ** 2,
    e1_closed=math.exp(2 * cs3**2) * norm.sf(k3 + 2 * cs3),
    em1_closed=1 - 2 * norm.cdf(k3),
    eprime0_fd=(e_vals[5] - e_vals[6]) / 2e-3,
)
mc0 = e_mc(k3, cs3, 0.0)
mc5 = e_mc(k3, cs3, 0.5)
mc9 = e_mc(k3, cs3, 0.9)
out["e_mc_-3"] = dict(q0=mc0, q05=mc5, q09=mc9)

for k in (-3.0, -4.0, -5.0, -6.0):
    r = alpha_low(k)
    r["alpha_up"] = -math.log(2) / math.log1p(-norm.cdf(k))
    r["ratio_up"] = r["alpha_up"] * norm.cdf(k) / math.log(2)
    r["ratio_low_vs_naive"] = r["alpha_low"] / (math.log(2) / norm.cdf(k))
    out[f"alpha_low_{k}"] = r

print(json.dumps(out, indent=2))
