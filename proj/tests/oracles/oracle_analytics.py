#!/usr/bin/env python3
"""Independent reference values for the order-parameter layer.

Everything here is computed with scipy primitives (quadrature + brentq), not
with the C++ code paths, so the frozen constants in the unit tests are an
actual cross-check rather than a tautology.
"""
import json
import math

import numpy as np
from scipy import integrate, optimize
from scipy.stats import norm


def min_sq(t):
    # E[min(|G|,t)^2] by quadrature.
    f = lambda x: min(abs(x), t) ** 2 * norm.pdf(x)
    v, _ = integrate.quad(f, -12, 12, limit=200, points=[-t, 0, t] if t < 12 else [0])
    return v


def min_sq_closed(t):
    q = norm.sf(t)
    return (1 - 2 * q) - 2 * t * norm.pdf(t) + 2 * t * t * q


def excess_closed(t):
    return 2 * (norm.pdf(t) - t * norm.sf(t))


def hinge_sq_closed(kappa, rho):
    u = kappa / rho
    return (rho * rho + kappa * kappa) * norm.cdf(u) + kappa * rho * norm.pdf(u)


def t_of_rho(rho):
    if rho >= 1:
        return 0.0
    if rho <= 0:
        return math.inf
    h = lambda t: min_sq_closed(t) / t**2 - rho * rho
    hi = 1.0
    while h(hi) > 0:
        hi *= 2
    return optimize.brentq(h, 1e-13, hi, xtol=1e-15, rtol=8.9e-16)


def phi_of_rho(rho):
    if rho <= 0:
        return 0.0
    if rho >= 1:
        return math.sqrt(2 / math.pi)
    t = t_of_rho(rho)
    return 0.5 * rho * rho * t + 0.5 * min_sq_closed(t) / t + excess_closed(t)


def solve_order_params(alpha, kappa):
    g = lambda rho: phi_of_rho(rho) * t_of_rho(rho) - alpha * norm.cdf(kappa / rho)
    rho = optimize.brentq(g, 1e-6, 1 - 1e-9, xtol=1e-14)
    t = t_of_rho(rho)
    a = phi_of_rho(rho)
    b2 = alpha * hinge_sq_closed(kappa, rho)
    return dict(
        rho=rho,
        t=t,
        tight=2 * norm.sf(t),
        gamma=math.sqrt(b2) / math.sqrt(a * a - b2),
        objective=math.sqrt(a * a - b2),
    )


def effective_stage2(alpha, kappa0):
    op = solve_order_params(alpha, kappa0)
    r = op["tight"]
    return dict(
        rho=op["rho"],
        t=op["t"],
        r=r,
        alpha0=alpha / (1 - r),
        r0=(op["rho"] ** 2 - r) / (1 - r),
    )


out = {}

# Closed forms vs quadrature.
out["hinge_sq_2_1_closed"] = hinge_sq_closed(2, 1)
out["hinge_sq_2_1_quad"] = integrate.quad(
    lambda x: (2 - x) ** 2 * norm.pdf(x), -12, 2, limit=200
)[0]
out["min_sq_1.6_closed"] = min_sq_closed(1.6)
out["min_sq_1.6_quad"] = min_sq(1.6)
out["excess_0"] = excess_closed(0.0)

# t(rho) spots.
out["t_of_rho_0.5"] = t_of_rho(0.5)
out["t_of_rho_0.999"] = t_of_rho(0.999)
out["t_slope_limit"] = 3 * math.sqrt(math.pi / 2)

# MC confirmation of t_of_rho(0.5): E[min(|G|/t,1)^2] should be 0.25.
rng = np.random.default_rng(12345)
gs = rng.standard_normal(10_000_000)
t5 = out["t_of_rho_0.5"]
mc = np.minimum(np.abs(gs) / t5, 1.0) ** 2
out["t_of_rho_0.5_mc_mean"] = float(mc.mean())
out["t_of_rho_0.5_mc_se"] = float(mc.std() / math.sqrt(len(gs)))

# Fixed points used across acceptance.
out["op_005_342"] = solve_order_params(0.05, 3.42)
out["op_01_231"] = solve_order_params(0.1, 2.31)
out["stage2_01_231"] = effective_stage2(0.1, 2.31)
out["stage2_005_342"] = effective_stage2(0.05, 3.42)

# Feasibility thresholds.
ratio = lambda rho, kappa: phi_of_rho(rho) ** 2 / hinge_sq_closed(kappa, rho)
rr = np.linspace(1e-4, 1.0, 2000)
vals = [ratio(r, 2.0) for r in rr]
i = int(np.argmax(vals))
ref = optimize.minimize_scalar(
    lambda r: -ratio(r, 2.0),
    bounds=(max(1e-6, rr[i] - 0.01), min(1.0, rr[i] + 0.01)),
    method="bounded",
    options={"xatol": 1e-12},
)
out["feas_threshold_2"] = -ref.fun
out["feas_lower_2_over_pi"] = (2 / math.pi) / hinge_sq_closed(2, 1)

# alpha_up spot values.
out["alpha_up_-3"] = -math.log(2) / math.log1p(-norm.cdf(-3))
out["alpha_up_0_neg_branch"] = -math.log(2) / math.log(0.5)

# Negative-kappa asymptotics at kappa=-8, c=1: 3 b e^b = 1.
b = optimize.brentq(lambda x: 3 * x * math.exp(x) - 1, 1e-6, 1)
kap = -8.0
alpha_asym = 1.0 / (kap**2 * norm.cdf(kap))
op_asym = solve_order_params(alpha_asym, kap)
out["neg_asym"] = dict(
    b=b,
    alpha=alpha_asym,
    rho=op_asym["rho"],
    rho_pred=1 - b / kap**2,
    t=op_asym["t"],
    t_pred=3 * math.sqrt(math.pi / 2) * b / kap**2,
)

# Positive-kappa asymptotics: alpha = c/kappa^2 with c=0.5, kappa=12.
kp = 12.0
op_pos = solve_order_params(0.5 / kp**2, kp)
out["pos_asym"] = dict(rho=op_pos["rho"], rho_pred=1 - 0.5 / (3 * kp**2))

# phi properties.
out["phi_1"] = phi_of_rho(1.0)
out["phi_0p5"] = phi_of_rho(0.5)
out["phi_prime_0_fd"] = (phi_of_rho(1e-4) - 0.0) / 1e-4

print(json.dumps(out, indent=2))
