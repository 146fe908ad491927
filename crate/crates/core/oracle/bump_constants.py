#!/usr/bin/env python3
"""Constants of the base bump psi0(x) = exp(-1/(1-4x^2)) on (-1/2, 1/2)."""
import mpmath as mp

mp.mp.dps = 40
psi0 = lambda x: mp.exp(-1 / (1 - 4 * x * x)) if abs(x) < 0.5 else mp.mpf(0)

def deriv(j):
    return lambda x: mp.diff(psi0, x, j) if abs(x) < 0.5 else mp.mpf(0)

print("int psi0   =", mp.quad(psi0, [-0.5, 0, 0.5]))
print("int psi0^2 =", mp.quad(lambda x: psi0(x) ** 2, [-0.5, 0, 0.5]))
print("int psi0'^2=", mp.quad(lambda x: deriv(1)(x) ** 2, [-0.5, 0, 0.5]))
for j in (1, 2, 3):
    f = deriv(j)
    # the higher derivatives peak close to the support ends, so scan finely
    xs = [mp.mpf(k) / 20000 for k in range(-9999, 10000, 5)]
    best = max(xs, key=lambda x: abs(f(x)))
    # local refinement: ternary search on |f| around the grid maximum
    lo, hi = best - mp.mpf(1) / 4000, best + mp.mpf(1) / 4000
    for _ in range(80):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if abs(f(m1)) < abs(f(m2)):
            lo = m1
        else:
            hi = m2
    m = (lo + hi) / 2
    print(f"sup|psi0^({j})| =", abs(f(m)), "at", m)
