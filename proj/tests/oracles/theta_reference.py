#!/usr/bin/env python3
"""Brute-force reference values for the Riemann theta tests.

Evaluates theta by direct summation over a large integer box (no lattice
reduction, no ellipsoid pruning) with mpmath at 40 digits, so the C++
evaluator is tested against a genuinely independent computation.  Run once;
the printed values are frozen into tests/test_theta.cpp.
"""
import mpmath as mp

mp.mp.dps = 40


def theta_box(z, B, eps=None, dirs=None, R=30):
    g = len(z)
    if eps is None:
        eps = [mp.mpf(0)] * g
    if dirs is None:
        dirs = []
    total = mp.mpc(0)
    two_pi_i = 2j * mp.pi

    def rec(idx, n):
        nonlocal total
        if idx == g:
            m = [n[j] + eps[j] for j in range(g)]
            zm = sum(z[j] * m[j] for j in range(g))
            Bmm = sum(B[j][k] * m[j] * m[k] for j in range(g) for k in range(g))
            term = mp.exp(two_pi_i * zm + 1j * mp.pi * Bmm)
            for d in dirs:
                term *= two_pi_i * sum(d[j] * m[j] for j in range(g))
            total += term
            return
        for nj in range(-R, R + 1):
            rec(idx + 1, n + [nj])

    rec(0, [])
    return total


def show(label, val):
    print(f"{label}: {mp.nstr(val, 25)}")


# genus 1, B = [[i]]
B1 = [[mp.mpc(0, 1)]]
show("g1 theta(0)", theta_box([mp.mpc(0)], B1, R=30))
show("g1 closed form pi^(1/4)/Gamma(3/4)", mp.pi ** mp.mpf("0.25") / mp.gamma(mp.mpf("0.75")))
z1 = [mp.mpc("0.3", "0.1")]
show("g1 theta(0.3+0.1i)", theta_box(z1, B1, R=30))
show("g1 theta[1/2](0.17-0.06i)", theta_box([mp.mpc("0.17", "-0.06")], B1, eps=[mp.mpf("0.5")], R=30))
show("g1 dtheta(0.3+0.1i)", theta_box(z1, B1, dirs=[[mp.mpf(1)]], R=30))
# level two value theta[1/2](2z | 2B)
show("g1 level2[1/2](0.3+0.1i)", theta_box([2 * z1[0]], [[mp.mpc(0, 2)]], eps=[mp.mpf("0.5")], R=30))

# genus 2
B2 = [[mp.mpc(0, "0.9"), mp.mpc("0.2", "0.15")],
      [mp.mpc("0.2", "0.15"), mp.mpc(0, "1.1")]]
z2 = [mp.mpc("0.2", "-0.3"), mp.mpc("-0.1", "0.05")]
show("g2 theta(z2)", theta_box(z2, B2, R=16))
show("g2 theta[(0,1/2)](z2)", theta_box(z2, B2, eps=[mp.mpf(0), mp.mpf("0.5")], R=16))
show("g2 theta[(1/2,0)](z2)", theta_box(z2, B2, eps=[mp.mpf("0.5"), mp.mpf(0)], R=16))
show("g2 theta[(1/2,1/2)](z2)", theta_box(z2, B2, eps=[mp.mpf("0.5"), mp.mpf("0.5")], R=16))
d1 = [mp.mpc(1), mp.mpc("0.5")]
d2 = [mp.mpc(0, "0.3"), mp.mpc(1)]
show("g2 d1 d2 theta(z2)", theta_box(z2, B2, dirs=[d1, d2], R=16))
show("g2 d1 d1 d2 d2 theta(z2)", theta_box(z2, B2, dirs=[d1, d1, d2, d2], R=16))

# Kummer vector at z2: theta[eps,0](2 z2 | 2 B2), eps lexicographic, last index fastest
twoz2 = [2 * z for z in z2]
twoB2 = [[2 * B2[j][k] for k in range(2)] for j in range(2)]
for i, eps in enumerate([[0, 0], [0, mp.mpf("0.5")], [mp.mpf("0.5"), 0], [mp.mpf("0.5"), mp.mpf("0.5")]]):
    show(f"g2 kummer[{i}](z2)", theta_box(twoz2, twoB2, eps=eps, R=16))

# AGM constants for the genus-1 period oracle (modulus k^2 = 1/4)
show("agm(1,1/2)", mp.agm(1, mp.mpf("0.5")))
show("agm(1,sqrt(3)/2)", mp.agm(1, mp.sqrt(3) / 2))
show("tau for k^2=1/4: i*agm(1,k')/agm(1,k)", mp.agm(1, mp.sqrt(3) / 2) / mp.agm(1, mp.mpf("0.5")))
