#!/usr/bin/env python3
# Copyright 2026 The SURVIVRS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes tests/data/viewmath_fixture.txt: random unit directions and their
equirectangular (u, v), computed with mpmath at 50 digits.

Each data line is "x y z u v". Directions within 0.01 of a pole in v are
skipped so u is well defined.
"""

import argparse
import random

import mpmath


def uv_of(x, y, z):
    u = mpmath.atan2(x, -z) / (2 * mpmath.pi) + mpmath.mpf("0.5")
    v = mpmath.mpf("0.5") - mpmath.asin(y) / mpmath.pi
    return u, v


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/viewmath_fixture.txt")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2026)
    args = ap.parse_args()

    mpmath.mp.dps = 50
    rng = random.Random(args.seed)
    rows = []
    while len(rows) < args.count:
        g = [mpmath.mpf(rng.gauss(0.0, 1.0)) for _ in range(3)]
        n = mpmath.sqrt(sum(c * c for c in g))
        x, y, z = (c / n for c in g)
        u, v = uv_of(x, y, z)
        if not (mpmath.mpf("0.01") <= v <= mpmath.mpf("0.99")):
            continue
        rows.append((x, y, z, u, v))

    with open(args.out, "w") as f:
        f.write("# x y z u v (unit direction, equirect coords), generated by gen_viewmath_fixture.py\n")
        for row in rows:
            f.write(" ".join(mpmath.nstr(c, 20, min_fixed=-1, max_fixed=1) for c in row) + "\n")


if __name__ == "__main__":
    main()
