"""Regenerates values.json with 40-digit arithmetic.

Run: python3 freeze.py > values.json
"""
import json

from mpmath import mp, mpf, acosh, sqrt, log, sin, exp, quad, pi

mp.dps = 40


def cd_sep(K, N, k0, k1):
    m = (k0 ** (1 / N) + k1 ** (1 / N)) / 2
    return 2 * sqrt((1 - N) / K) * acosh(m ** (-N / (1 - N)))


def cd_obs(K, N, k):
    return 2 * sqrt((1 - N) / K) * acosh((2 / k) ** (1 / (1 - N)))


def star_sep(K, N, k0, k1):
    return 2 * sqrt(-N / K) * acosh((k0 ** (1 / N) + k1 ** (1 / N)) / 2)


def star_obs(K, N, k):
    return 2 * sqrt(-N / K) * acosh((2 / k) ** (-1 / N))


def softabs(a, x):
    x = abs(x)
    return x + log(1 + exp(-2 * a * x)) / a


def a_n(n, K=mpf(-1), N=mpf(-1)):
    np_ = N - 1
    D = pi * sqrt(np_ / K)
    r = D / pi
    f = lambda t: softabs(n, sin(t / r)) ** np_
    pts = [mpf(0), D / 2, D, 3 * D / 2, 2 * D]
    total = quad(f, pts)
    return total ** (-1 / np_)


rows = []
for K in ["0.5", "1", "4", "16"]:
    for N in ["-0.5", "-1", "-3"]:
        for k0, k1 in [("0.05", "0.05"), ("0.1", "0.1"), ("0.1", "0.3"), ("0.2", "0.4"), ("0.45", "0.45")]:
            Km, Nm, a, b = mpf(K), mpf(N), mpf(k0), mpf(k1)
            rows.append({
                "K": float(Km), "N": float(Nm), "k0": float(a), "k1": float(b),
                "cd_sep": float(cd_sep(Km, Nm, a, b)),
                "cdstar_sep": float(star_sep(Km, Nm, a, b)),
            })
obs = []
for K in ["1", "4"]:
    for N in ["-1", "-2.5"]:
        for k in ["0.05", "0.2", "0.5", "1"]:
            Km, Nm, km = mpf(K), mpf(N), mpf(k)
            obs.append({
                "K": float(Km), "N": float(Nm), "kappa": float(km),
                "cd_obs": float(cd_obs(Km, Nm, km)),
                "cdstar_obs": float(star_obs(Km, Nm, km)),
            })
an = [{"n": n, "a_n": float(a_n(n))} for n in [1, 2, 4, 8, 16, 32, 64]]
print(json.dumps({"separation": rows, "obsdiam": obs, "counterexample_a_n": an}, indent=1))
