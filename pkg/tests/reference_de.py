"""Straight-line scheduled density evolution used as a test oracle.

Shares no code with the package: lattice pushforwards are done by brute
force over all point pairs with np.add.at.  The lattice is the symmetric
point set y_k = -L + k * step, k = 0..n_bins; results landing outside
[-L, L] saturate at the end points and others round to the nearest point.
"""

import numpy as np


def lattice(l_max, n_bins):
    return -l_max + (2.0 * l_max / n_bins) * np.arange(n_bins + 1)


def _push(values, weights, y):
    step = y[1] - y[0]
    idx = np.clip(np.rint((values - y[0]) / step).astype(np.int64), 0, len(y) - 1)
    out = np.zeros(len(y))
    np.add.at(out, idx.ravel(), weights.ravel())
    return out / out.sum()


def var_combine(p, q, y):
    a, b = np.meshgrid(y, y, indexing="ij")
    return _push(a + b, np.outer(p, q), y)


def chk_combine(p, q, y):
    a, b = np.meshgrid(y, y, indexing="ij")
    t = np.tanh(a / 2) * np.tanh(b / 2)
    t = np.clip(t, -1 + 1e-16, 1 - 1e-16)
    return _push(2 * np.arctanh(t), np.outer(p, q), y)


def ent(p, y):
    return float(np.sum(p * np.logaddexp(0.0, -y)) / np.log(2.0))


def zero(y):
    p = np.zeros(len(y))
    p[len(y) // 2] = 1.0
    return p


def gaussian(mean, y):
    """Per-point Gaussian N(mean, 2 mean) mass integrated over each point's cell."""
    from math import erf, sqrt
    step = y[1] - y[0]
    s = sqrt(2 * mean)
    cdf = lambda x: 0.5 * (1 + erf((x - mean) / (s * sqrt(2))))
    out = np.array([cdf(v + step / 2) - cdf(v - step / 2) for v in y])
    out[0] = cdf(y[0] + step / 2)
    out[-1] = 1 - cdf(y[-1] - step / 2)
    return out / out.sum()


def run(checks, n_vars, chan, order, iterations, y):
    """Return per-step rows (nmp, ae, gap), first row for the fresh state.

    checks: list of variable lists; chan: list of N mass vectors.
    Edge (a, i) keys the dicts; folds go in neighbor-list order.
    """
    var_checks = [[a for a, c in enumerate(checks) if i in c] for i in range(n_vars)]
    v2c = {(a, i): zero(y) for a, c in enumerate(checks) for i in c}
    c2v = {(a, i): zero(y) for a, c in enumerate(checks) for i in c}

    def post(i):
        p = chan[i]
        for a in var_checks[i]:
            p = var_combine(p, c2v[(a, i)], y)
        return p

    def metrics():
        ae = sum(ent(post(i), y) for i in range(n_vars)) / n_vars
        s_post = sum(ent(post(i), y) for i in range(n_vars))
        s_v2c = sum(ent(v2c[k], y) for k in v2c)
        s_chk = 0.0
        for a, c in enumerate(checks):
            p = v2c[(a, c[0])]
            for i in c[1:]:
                p = chk_combine(p, v2c[(a, i)], y)
            s_chk += ent(p, y)
        s_pair = sum(ent(var_combine(v2c[k], c2v[k], y), y) for k in v2c)
        return ae, -(s_post + s_v2c - s_chk - s_pair) / n_vars

    rows = [(0, *metrics())]
    nmp = 0
    for _ in range(iterations):
        for a in order:
            c = checks[a]
            for i in c:
                p = chan[i]
                for h in var_checks[i]:
                    if h != a:
                        p = var_combine(p, c2v[(h, i)], y)
                v2c[(a, i)] = p
            new = {}
            for i in c:
                others = [j for j in c if j != i]
                if not others:
                    p = np.zeros(len(y))
                    p[-1] = 1.0
                else:
                    p = v2c[(a, others[0])]
                    for j in others[1:]:
                        p = chk_combine(p, v2c[(a, j)], y)
                new[i] = p
            for i in c:
                c2v[(a, i)] = new[i]
            nmp += 2 * len(c)
            rows.append((nmp, *metrics()))
    return np.array(rows)


def tau(rows, degrees_in_order, metric="AE", per_step=False):
    col = 1 if metric == "AE" else 2
    w = np.ones(len(degrees_in_order)) if per_step else 2.0 * np.asarray(degrees_in_order)
    return float(np.dot(w, rows[1:, col]))
