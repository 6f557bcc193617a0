"""Exact rational evaluation of the estimators on small hand datasets.

Writes tests/oracles/hand_goldens.hpp. Each estimator is evaluated term by
term from its defining sum, independently of the C++ code; the AIPW values
are computed under both readings of the propensity in the augmentation term
and must agree.
"""
from fractions import Fraction as F
from pathlib import Path

OBS_GRID = [  # (y, t, x): two records per cell, y = x/2 + t
    (F(0), 0, 0), (F(0), 0, 0), (F(1), 1, 0), (F(1), 1, 0),
    (F(1, 2), 0, 1), (F(1, 2), 0, 1), (F(3, 2), 1, 1), (F(3, 2), 1, 1),
]
OBS_UNEVEN = [  # unequal cells and noisy outcomes
    (F("0.3"), 0, 0), (F("-0.4"), 0, 0), (F("1.1"), 0, 0), (F("2.0"), 1, 0),
    (F("0.9"), 0, 1), (F("1.7"), 1, 1), (F("2.6"), 1, 1), (F("1.2"), 1, 1),
    (F("3.1"), 1, 1), (F("0.2"), 0, 1),
]
IV_CONFOUNDED = [  # (i, t, y)
    (F(1), F("1.5"), F("2.9")), (F(-1), F("-0.2"), F("0.4")), (F(2), F("2.1"), F("3.0")),
    (F(0), F("0.7"), F("1.9")), (F(-2), F("-1.3"), F("-1.1")), (F("0.5"), F("0.1"), F("0.8")),
]
OLS_MIXED = [  # (i or None, t, y); ols uses every record
    (F(1), F("0.5"), F("1.2")), (F(-1), F("-1.0"), F("-0.3")), (None, F("2.0"), F("2.2")),
    (F(0), F("0.0"), F("0.9")), (None, F("1.5"), F("2.8")), (F(2), F("-0.5"), F("0.1")),
]
PROXY = [  # (y, t, p)
    (F("1.4"), 1, 1), (F("0.9"), 1, 1), (F("0.2"), 1, 0), (F("1.0"), 1, 1),
    (F("0.3"), 0, 0), (F("1.1"), 0, 1), (F("-0.2"), 0, 0), (F("0.4"), 0, 0),
]


def strata(rows):
    p, q = {}, {}
    for x in (0, 1):
        nx = sum(1 for _, _, xx in rows if xx == x)
        for t in (0, 1):
            cell = [y for y, tt, xx in rows if xx == x and tt == t]
            if nx:
                p[(x, t)] = F(len(cell), nx)
            if cell:
                q[(x, t)] = sum(cell) / len(cell)
    return p, q


def aipw_ate(rows, own_arm=True):
    p, q = strata(rows)
    n = len(rows)
    mu = []
    for a in (0, 1):
        total = F(0)
        for y, t, x in rows:
            ind = 1 if t == a else 0
            prop = p[(x, t)] if own_arm else p[(x, a)]
            total += y * ind / prop - F(ind - prop) / prop * q[(x, a)]
        mu.append(total / n)
    return mu[1] - mu[0]


def aipw_overlap(rows, own_arm=True):
    p, q = strata(rows)
    n = len(rows)
    denom = sum(p[(x, 1)] * (1 - p[(x, 1)]) for _, _, x in rows) / n
    eta = []
    for a in (0, 1):
        total = F(0)
        for y, t, x in rows:
            ind = 1 if t == a else 0
            prop = p[(x, t)] if own_arm else p[(x, a)]
            total += y * ind * (1 - prop) - (ind - prop) * (1 - prop) * q[(x, a)]
        eta.append(total / n)
    return (eta[1] - eta[0]) / denom


def cov(u, v):
    mu, mv = sum(u) / len(u), sum(v) / len(v)
    return sum((a - mu) * (b - mv) for a, b in zip(u, v)) / len(u)


def iv_ratio(rows):
    rows = [r for r in rows if r[0] is not None]
    i, t, y = zip(*rows)
    return cov(i, y) / cov(i, t)


def ols_slope(rows):
    # normal equations for y = c + b t
    n = len(rows)
    st = sum(r[1] for r in rows)
    sy = sum(r[2] for r in rows)
    stt = sum(r[1] * r[1] for r in rows)
    sty = sum(r[1] * r[2] for r in rows)
    return (n * sty - st * sy) / (n * stt - st * st)


def mean(v):
    return sum(v) / len(v)


def product(rows):
    first = mean([F(p) for _, t, p in rows if t == 1]) - mean([F(p) for _, t, p in rows if t == 0])
    second = mean([y for y, _, p in rows if p == 1]) - mean([y for y, _, p in rows if p == 0])
    return first * second


def main():
    values = {}
    for name, rows in (("grid", OBS_GRID), ("uneven", OBS_UNEVEN)):
        a1, a2 = aipw_ate(rows, True), aipw_ate(rows, False)
        o1, o2 = aipw_overlap(rows, True), aipw_overlap(rows, False)
        assert a1 == a2 and o1 == o2
        values[f"aipw_ate_{name}"] = a1
        values[f"aipw_overlap_{name}"] = o1
    values["iv_ratio_confounded"] = iv_ratio(IV_CONFOUNDED)
    values["ols_slope_mixed"] = ols_slope(OLS_MIXED)
    values["product_proxy"] = product(PROXY)

    out = ["#pragma once", "", "// Generated by hand_goldens.py; exact rationals rounded to double.", "",
           "namespace goldens {", ""]
    for k, v in values.items():
        out.append(f"inline constexpr double {k} = {float(v)!r};  // {v}")
    out += ["", "}  // namespace goldens", ""]
    Path(__file__).with_name("hand_goldens.hpp").write_text("\n".join(out))
    for k, v in values.items():
        print(k, v, float(v))


if __name__ == "__main__":
    main()
