"""Regenerates the golden reference data in crates/core/data with mpmath.

    python3 tools/oracle.py            # compare against the committed files
    python3 tools/oracle.py --write    # overwrite them

All values are computed at 60 significant digits and rounded to binary64
only when written. Arguments are the binary64 numbers the library sees.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 60
DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

KERNEL_POINTS = [
    (0, 1), (1, 0.5), (1, 3), (5, 2), (5, 20), (20, 5), (20, 20), (20, 40),
    (50, 10), (50, 52), (100, 30), (100, 95), (100, 100), (100, 130),
    (250, 400), (500, 200), (1000, 700), (1000, 1010), (2000, 1500), (2000, 2100),
]
CONSTANT_T = [10, 100, 1000, 2000]
J0_POINTS = ["0.5", "2.0", "4.0", "9.5", "17.25", "30.0", "77.7", "100.0"]
EISENSTEIN_POINTS = [(10, "1.2"), (10, "2.5"), (30, "1.05")]


def scaled_k(t, y):
    """e^{πT/2} K_{iT}(y)."""
    t, y = mp.mpf(t), mp.mpf(y)
    return mp.re(mp.exp(mp.pi * t / 2) * mp.besselk(1j * t, y))


def constants(t):
    t = mp.mpf(t)
    s = mp.mpc(0.5, t)
    ln_theta = -s * mp.log(mp.pi) + mp.loggamma(s) + mp.log(mp.zeta(mp.mpc(1, 2 * t)))
    ln_rho = mp.log(mp.sqrt(2 / mp.pi)) - mp.re(ln_theta)
    mu = mp.expjpi(mp.im(ln_theta) / mp.pi)
    return {
        "ln_theta_re": mp.re(ln_theta),
        "mu_re": mp.re(mu),
        "mu_im": mp.im(mu),
        "ln_rho_star_1": ln_rho,
        "rho_star_1_scaled": mp.exp(ln_rho - mp.pi * t / 2),
    }


def tau(t, n):
    return sum(2 * mp.cos(t * mp.log(mp.mpf(n) / d**2)) if d * d != n else 1
               for d in range(1, int(mp.sqrt(n)) + 1) if n % d == 0)


def eisenstein(t, y):
    """E*_T(iy) = 2√y cos(arg μ + T log y) + 2ρ*(1)√(2πy) Σ τ_{iT}(n) K_{iT}(2πny)."""
    c = constants(t)
    t, y = mp.mpf(t), mp.mpf(float(y))
    const = 2 * mp.sqrt(y) * mp.cos(mp.atan2(c["mu_im"], c["mu_re"]) + t * mp.log(y))
    total, n = mp.mpf(0), 1
    while True:
        term = tau(t, n) * scaled_k(t, 2 * mp.pi * n * y)
        total += term
        if 2 * mp.pi * n * y > t and abs(term) < mp.mpf(10) ** -40:
            break
        n += 1
    return const + 2 * c["rho_star_1_scaled"] * mp.sqrt(2 * mp.pi * y) * total


def binomial_residual(z, u, big_l):
    """|(1+z)^u − Σ_{ℓ≤L} C(u,ℓ) z^ℓ|."""
    z, u = mp.mpf(z), mp.mpc(u)
    partial, coef = mp.mpc(0), mp.mpc(1)
    for ell in range(big_l + 1):
        partial += coef * z**ell
        coef *= (u - ell) / (ell + 1)
    return abs(mp.power(1 + z, u) - partial)


def pair(z):
    return [float(mp.re(z)), float(mp.im(z))]


def kernel_rows():
    rows = []
    for t, y in KERNEL_POINTS:
        v = scaled_k(t, y)
        rows.append((float(t), float(y), mp.nstr(v, 17, min_fixed=-mp.inf, max_fixed=mp.inf), "1e-30"))
    return rows


def misc():
    return {
        "ln_gamma_half_plus_50i": pair(mp.loggamma(mp.mpc(0.5, 50))),
        "zeta_half_plus_100i": pair(mp.zeta(mp.mpc(0.5, 100))),
        "zeta_1_plus_200i": pair(mp.zeta(mp.mpc(1, 200))),
        "eisenstein": {str(t): {k: float(v) for k, v in constants(t).items()} for t in CONSTANT_T},
        "j0": {x: float(mp.besselj(0, mp.mpf(float(x)))) for x in J0_POINTS},
        "eisenstein_values": [
            {"T": t, "y": float(y), "value": float(eisenstein(t, y))} for t, y in EISENSTEIN_POINTS
        ],
        "binomial_residual": {
            "z": 0.004, "u_im": -800.0, "L": 20,
            "residual": float(binomial_residual("0.004", mp.mpc(0, -800), 20)),
        },
    }


def flatten(x, prefix=""):
    if isinstance(x, dict):
        for k, v in x.items():
            yield from flatten(v, f"{prefix}/{k}")
    elif isinstance(x, list):
        for i, v in enumerate(x):
            yield from flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, x


def compare():
    worst = 0.0
    with open(DATA / "golden_bessel_k.csv") as f:
        stored = list(csv.DictReader(f))
    for row, (t, y, v, _) in zip(stored, kernel_rows()):
        rel = abs(float(row["scaled_k"]) - float(v)) / abs(float(v))
        worst = max(worst, rel)
        print(f"kernel T={t:g} y={y:g}: rel diff {rel:.1e}")
    fresh = dict(flatten(misc()))
    for key, old in flatten(json.loads((DATA / "golden_misc.json").read_text())):
        new = fresh[key]
        rel = abs(old - new) / max(abs(new), 1e-300)
        worst = max(worst, rel)
        print(f"{key}: rel diff {rel:.1e}")
    print(f"worst relative difference {worst:.1e}")
    return worst <= 1e-15


def write():
    with open(DATA / "golden_bessel_k.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["T", "y", "scaled_k", "abs_err"])
        w.writerows(kernel_rows())
    (DATA / "golden_misc.json").write_text(json.dumps(misc(), indent=2) + "\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--write", action="store_true", help="overwrite the data files")
    if ap.parse_args().write:
        write()
    else:
        sys.exit(0 if compare() else 1)
