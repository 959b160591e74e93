"""Regenerates bessel_reference.csv with mpmath at 40 significant digits.

Covers the Miller and Hankel-asymptotic regimes (|w| from 12 to 500) that the
exact rational series oracle in tests/common cannot reach cheaply.
"""
import random

import mpmath as mp

mp.mp.dps = 40
rng = random.Random(20261019)
rows = []
while len(rows) < 400:
    modulus = rng.uniform(12.0, 500.0)
    imag = rng.uniform(-20.0, 20.0)
    if abs(imag) >= modulus:
        continue
    re = (modulus * modulus - imag * imag) ** 0.5
    if rng.random() < 0.25:
        re = -re
    m = rng.randint(0, 200)
    w = mp.mpc(repr(re), repr(imag))
    j = mp.besselj(m, w)
    y = mp.bessely(m, w)
    if abs(y) > mp.mpf("1e290") or abs(j) < mp.mpf("1e-290"):
        continue
    rows.append((m, re, imag, j, y))

rows.append((3, 2.0, 0.5, mp.besselj(3, mp.mpc(2, 0.5)), mp.bessely(3, mp.mpc(2, 0.5))))

with open("bessel_reference.csv", "w") as f:
    f.write("m,w_re,w_im,j_re,j_im,y_re,y_im\n")
    for m, re, imag, j, y in rows:
        f.write(
            f"{m},{re!r},{imag!r},{mp.nstr(j.real, 25)},{mp.nstr(j.imag, 25)},"
            f"{mp.nstr(y.real, 25)},{mp.nstr(y.imag, 25)}\n"
        )
