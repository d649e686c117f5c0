"""Prototype of the constrained edge walk at desk scale.

Independent numpy implementation used to freeze reference values for the
ODE-vs-walk comparison: integrates the mean-field ODE
    u' = max(1 - u - v, 0),  v(t) = 2 alpha Phi(-c/sqrt(t)),  u(0) = r0
at the pinned parameters (alpha0 = 1.008960, r0 = 0.332645, c = 2.00), then
runs the actual walk at N = 400 over 20 seeds and reports the uniform gap
between the seed-averaged frozen fraction |c_var|(t)/N and u(t).

Writes walk_values.json (via stdout redirect).
"""

import json
import math
import sys

import numpy as np

ALPHA0 = 1.008960
R0 = 0.332645
C_SCALAR = 2.00
N = 400
SEEDS = 20
H = 1e-4  # RK4 step


def phi_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def v_of_t(t):
    if t <= 0:
        return 0.0
    return 2.0 * ALPHA0 * phi_cdf(-C_SCALAR / math.sqrt(t))


def integrate_ode():
    """RK4 for u up to the crossing u = 1 - v; returns grid, u-values, T1."""
    ts = [0.0]
    us = [R0]
    t, u = 0.0, R0
    while t < 1e3:
        def f(tt, uu):
            return max(1.0 - uu - v_of_t(tt), 0.0)

        k1 = f(t, u)
        k2 = f(t + H / 2, u + H / 2 * k1)
        k3 = f(t + H / 2, u + H / 2 * k2)
        k4 = f(t + H, u + H * k3)
        u_next = u + H / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t_next = t + H
        if u_next >= 1.0 - v_of_t(t_next):
            # bisect the crossing g(t) = u(t) - (1 - v(t)) within the last step
            lo, hi = t, t_next
            ulo = u
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                # one RK4 substep from (t, u) to mid
                hh = mid - t
                k1m = f(t, u)
                k2m = f(t + hh / 2, u + hh / 2 * k1m)
                k3m = f(t + hh / 2, u + hh / 2 * k2m)
                k4m = f(t + hh, u + hh * k3m)
                umid = u + hh / 6 * (k1m + 2 * k2m + 2 * k3m + k4m)
                if umid >= 1.0 - v_of_t(mid):
                    hi = mid
                else:
                    lo, ulo = mid, umid
            ts.append(hi)
            us.append(1.0 - v_of_t(hi))
            return np.array(ts), np.array(us), hi
        t, u = t_next, u_next
        ts.append(t)
        us.append(u)
    raise RuntimeError("no crossing before t = 1e3")


def t2_p0_p1(ts, us, T1):
    # I(t) = int_t^T1 v(s) ds via trapezoid on the stored grid
    vs = np.array([v_of_t(t) for t in ts])
    # cumulative integral from 0
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts))])
    I_T1 = cum[-1]
    uT1 = us[-1]
    # H(t) = u(t) + (T1 - t)(1 - u(t)) - int_t^T1 v
    best = None
    for i in range(len(ts) - 1, -1, -1):
        Hval = us[i] + (T1 - ts[i]) * (1.0 - us[i]) - (I_T1 - cum[i])
        if Hval >= 1.0:
            best = i
            break
    if best is None:
        raise RuntimeError("T2 undefined")
    T2 = ts[best]
    uT2 = us[best]
    p1 = uT2
    p0 = (uT1 - uT2) / (1.0 - uT2)
    return T2, p0, p1, uT1


def run_walk(seed, T1, sample_ts):
    rng = np.random.default_rng(seed)
    M = int(round(ALPHA0 * N))
    X = rng.standard_normal((M, N))
    row_norms = np.linalg.norm(X, axis=1)
    c = C_SCALAR * math.sqrt(N) / row_norms  # c_j so that c_j * ||X_j|| = c sqrt(N)

    delta = 0.05 / math.log(N)
    gamma = delta / math.sqrt(math.log(N))
    T = int(round(T1 / gamma**2))

    theta = np.zeros(N)
    k0 = int(round(R0 * N))
    init_idx = rng.permutation(N)[:k0]
    theta[init_idx] = rng.choice([-1.0, 1.0], size=k0)
    theta0 = theta.copy()

    frozen = np.abs(theta) >= 1.0 - delta
    active = np.zeros(M, dtype=bool)
    margins = np.zeros(M)  # <theta - theta0, X_j>
    thresholds = -c * row_norms + delta * row_norms  # activation cutoffs

    Q = None  # orthonormal basis (n_free x k) of active rows restricted to free coords
    free_idx = np.where(~frozen)[0]

    def rebuild():
        nonlocal Q, free_idx
        free_idx = np.where(~frozen)[0]
        act = np.where(active)[0]
        if len(act) == 0 or len(free_idx) == 0:
            Q = None
            return
        A = X[np.ix_(act, free_idx)]
        Q = np.linalg.qr(A.T, mode="reduced")[0]

    rebuild()
    trace = []
    sample_steps = [int(round(st / gamma**2)) for st in sample_ts]
    si = 0
    overshoot_halvings = 0
    for step in range(T + 1):
        while si < len(sample_steps) and step == sample_steps[si]:
            trace.append(
                (
                    float(sample_ts[si]),
                    float(frozen.sum()) / N,
                    int(active.sum()),
                    float(theta @ theta) / N,
                )
            )
            si += 1
        if step == T:
            break
        nf = len(free_idx)
        k = 0 if Q is None else Q.shape[1]
        if nf == 0 or (Q is not None and k >= nf):
            # subspace exhausted; trace stays flat
            continue
        g = rng.standard_normal(nf)
        if Q is not None:
            g = g - Q @ (Q.T @ g)
        u_full = np.zeros(N)
        u_full[free_idx] = g
        gs = gamma
        for _ in range(20):
            cand = theta + gs * u_full
            if np.max(np.abs(cand)) <= 1.0:
                break
            gs *= 0.5
            overshoot_halvings += 1
        else:
            continue  # give up on this step
        theta = cand
        margins += gs * (X @ u_full)
        changed = False
        newly_frozen = (~frozen) & (np.abs(theta) >= 1.0 - delta)
        if newly_frozen.any():
            frozen |= newly_frozen
            changed = True
        newly_active = (~active) & (margins <= thresholds)
        if newly_active.any():
            active |= newly_active
            changed = True
        if changed:
            rebuild()
    return trace, overshoot_halvings, T


def main():
    ts, us, T1 = integrate_ode()
    T2, p0, p1, uT1 = t2_p0_p1(ts, us, T1)
    out = {
        "pinned": dict(alpha0=ALPHA0, r0=R0, c=C_SCALAR, N=N, seeds=SEEDS),
        "ode": dict(T1=float(T1), T2=float(T2), p0=float(p0), p1=float(p1), uT1=float(uT1)),
    }
    n_samples = 81
    sample_ts = np.linspace(0.0, T1, n_samples)
    u_at = np.interp(sample_ts, ts, us)
    out["u_grid"] = [[float(a), float(b)] for a, b in zip(sample_ts, u_at)]

    traces = []
    halvings = []
    for s in range(SEEDS):
        tr, oh, T = run_walk(1000 + s, T1, sample_ts)
        traces.append(tr)
        halvings.append(oh)
        print(f"seed {1000+s}: final f={tr[-1][1]:.4f} w={tr[-1][3]:.4f} "
              f"active={tr[-1][2]} halvings={oh} T={T}", file=sys.stderr)

    f_mat = np.array([[p[1] for p in tr] for tr in traces])  # seeds x samples
    w_mat = np.array([[p[3] for p in tr] for tr in traces])
    a_mat = np.array([[p[2] for p in tr] for tr in traces])
    f_mean = f_mat.mean(axis=0)
    gap = f_mean - u_at
    out["walk"] = dict(
        sup_gap_mean_trace=float(np.max(np.abs(gap))),
        argmax_t=float(sample_ts[int(np.argmax(np.abs(gap)))]),
        per_seed_sup=[float(np.max(np.abs(f_mat[i] - u_at))) for i in range(SEEDS)],
        f_mean_grid=[float(x) for x in f_mean],
        w_mean_grid=[float(x) for x in w_mat.mean(axis=0)],
        active_mean_grid=[float(x) for x in a_mat.mean(axis=0)],
        halvings=halvings,
        final_f_mean=float(f_mean[-1]),
        final_w_mean=float(w_mat.mean(axis=0)[-1]),
    )
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
