#!/usr/bin/env python3
"""Reference values for the overlap-gap exponent and the joint tail bound."""
import json
import math

import numpy as np
from scipy.stats import norm


def ent(x):
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


def log_phi(x):
    # log Phi(x), stable deep in the left tail.
    return norm.logcdf(x)


def ogp_exponent(m, beta, eta, iota, alpha, kappa):
    # log(1 + x) with x assembled multiplicatively: x can be ~ -1e-22 at very
    # negative kappa, where forming 1+x first rounds to exactly 1.
    phi_k = math.exp(norm.logcdf(kappa))
    x = m * phi_k * (
        -1.0 + 2 * (m - 1) * math.exp(norm.logcdf(-abs(kappa) * math.sqrt((1 - beta) / 2)))
    )
    if x <= -1.0:
        raise ValueError("log argument nonpositive")
    return (
        math.log(2)
        + (m - 1) * ent((1 + beta - eta) / 2)
        + m * iota
        + alpha * math.log1p(x)
    )


out = {}

# m=1 root identity: exponent(alpha) = log2 + alpha*log(1-Phi(kappa)).
for k in (-3.0, -5.0):
    root = -math.log(2) / math.log1p(-norm.cdf(k))
    out[f"m1_root_{k}"] = dict(
        root=root,
        alpha_up=-math.log(2) / math.log1p(-norm.cdf(k)),
        exponent_at_root=ogp_exponent(1, 0.5, 0.1, 0.0, root, k),
    )

# C1 scan at kappa=-10 with the theorem's (m, beta, eta) choices.
k = -10.0
lk2 = math.log(abs(k)) ** 2
m = int(k * k)  # 100
beta = 1 - 9 * lk2 / k**2
eta = lk2 / k**2
phi_k = math.exp(norm.logcdf(k))
scan = []
c1 = 1.0
found = None
while c1 <= 2**40:
    alpha = c1 * lk2 / (k**2 * phi_k)
    # inner term needs log-space care: m*phi_k ~ 100*7.6e-24 fine in double.
    e = ogp_exponent(m, beta, eta, 0.0, alpha, k)
    scan.append((c1, e))
    if e < 0 and found is None:
        found = c1
        break
    c1 *= 2
out["c1_kappa_-10"] = dict(found=found, scan=[(c, float(e)) for c, e in scan])

# Joint tail bound MC validation by importance sampling: G restricted to
# (-inf, A], G' = q G + sqrt(1-q^2) Z. P(G<=A, G'<=A) =
#   Phi(A) * E_{G|G<=A}[ Phi( (A - qG)/sqrt(1-q^2) ) ].
rng = np.random.default_rng(20240817)
mc = {}
for A in (-3.0, -4.0):
    for q in (0.0, 0.5, 0.9):
        n = 10_000_000
        u = rng.random(n)
        g = norm.ppf(u * norm.cdf(A))  # exact conditional draw
        if q == 0.0:
            w = np.full(n, norm.cdf(A))
        else:
            w = norm.cdf((A - q * g) / math.sqrt(1 - q * q))
        est = norm.cdf(A) * float(w.mean())
        se = norm.cdf(A) * float(w.std() / math.sqrt(n))
        bound = 4 * norm.cdf(A) * norm.sf(abs(A) * math.sqrt((1 - q) / 2))
        mc[f"A{A}_q{q}"] = dict(
            estimate=float(est),
            se=float(se),
            bound=float(bound),
            ok=bool(est <= bound + 3 * se),
            exact_q0=float(norm.cdf(A) ** 2) if q == 0.0 else None,
        )
out["joint_tail"] = mc

print(json.dumps(out, indent=2))
