#!/usr/bin/env python3
"""Search for the embedded toy curve and regenerate its group-table fixture.

Criteria: prime p = 3 (mod 4) (so compressed-point decoding uses the same
square-root path as the big curve), a = -3 mirroring the standard curve,
smallest b giving a prime group order under 500 so the whole group can be
enumerated and every non-identity point generates.

Writes tests/fixtures/toy_group_table.json: {"p", "a", "b", "gx", "gy",
"order", "table": [[k, x, y] for k in 1..order-1]} with the table built by
literal repeated addition from the lexicographically smallest point.

Usage: python scripts/find_toy_curve.py [--search]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, int(n**0.5) + 1):
        if n % q == 0:
            return False
    return True


def enumerate_points(p: int, a: int, b: int):
    squares: dict[int, list[int]] = {}
    for y in range(p):
        squares.setdefault(y * y % p, []).append(y)
    pts = [None]
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        for y in squares.get(rhs, ()):
            pts.append((x, y))
    return pts


def add(P, Q, p, a):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + a) * pow(2 * y1, p - 2, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def search():
    for p in range(300, 1022):
        if not is_prime(p) or p % 4 != 3:
            continue
        a = p - 3
        for b in range(1, 60):
            if (4 * a * a * a + 27 * b * b) % p == 0:
                continue
            n = len(enumerate_points(p, a, b))
            if n < 500 and n != p and is_prime(n):
                return p, a, b, n
    raise SystemExit("no curve found in the search window")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--search", action="store_true",
                        help="re-run the search instead of using the embedded pick")
    args = parser.parse_args()

    if args.search:
        p, a, b, n = search()
        print(f"found: p={p} a={a} b={b} order={n}")
    else:
        p, a, b, n = 347, 344, 28, 367

    pts = enumerate_points(p, a, b)
    assert len(pts) == n
    G = min(q for q in pts if q is not None)
    table = []
    acc = None
    for k in range(1, n):
        acc = add(acc, G, p, a)
        table.append([k, acc[0], acc[1]])
    assert add(acc, G, p, a) is None, "order*G must be infinity"
    assert len({tuple(t[1:]) for t in table}) == n - 1, "G must generate the group"

    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy_group_table.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(
        {"p": p, "a": a, "b": b, "gx": G[0], "gy": G[1], "order": n, "table": table},
        indent=None,
    ))
    print(f"wrote {out} (G = {G}, order {n})")


if __name__ == "__main__":
    main()
