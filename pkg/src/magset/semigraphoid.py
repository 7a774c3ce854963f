"""Closure of sets of elementary CI statements under inference rules.

A semigraphoid is determined by its elementary statements <a,b|D>, and the
semigraphoid axioms reduce to a single rule on them:

    <a,b|cD> and <a,c|D>  <=>  <a,c|bD> and <a,b|D>

Intersection and composition also have elementary forms:

    intersection:  <a,b|cD> and <a,c|bD>  =>  <a,b|D> (and <a,c|D>)
    composition:   <a,b|D> and <a,c|D>    =>  <a,b|cD> (and <a,c|bD>)

The ordered stability rules act on single statements given a strict partial
order ``below[v]`` (bitmask of vertices strictly below v):

    ordered upward:   <i,j|Y>  =>  <i,j|Yk>  for k below i or below j
    ordered downward: <i,j|Yk> =>  <i,j|Y>   for k not below any of i, j, Y

Elementary statements are stored as (a, b, D) with a < b.
"""

from __future__ import annotations

from typing import Iterable

from .graph_core import bits

SEMIGRAPHOID = "semi-graphoids"
INTERSECTION = "intersection"
COMPOSITION = "composition"
SINGLETON_TRANSITIVITY = "singleton-transitivity"
ORDERED_UPWARD = "ordered-upward"
ORDERED_DOWNWARD = "ordered-downward"
ALL_RULES = (SEMIGRAPHOID, INTERSECTION, COMPOSITION, SINGLETON_TRANSITIVITY, ORDERED_UPWARD, ORDERED_DOWNWARD)


def key(a: int, b: int, D: int) -> tuple[int, int, int]:
    return (a, b, D) if a < b else (b, a, D)


def close(
    seed: Iterable[tuple[int, int, int]],
    n: int,
    rules: Iterable[str] = (SEMIGRAPHOID,),
    below: list[int] | None = None,
) -> set[tuple[int, int, int]]:
    """Least set of elementary statements containing ``seed`` and closed under ``rules``.

    Singleton transitivity is disjunctive and has no least fixed point, so it
    is not used for derivation; see ``transitivity_violations``.
    """
    rules = set(rules)
    unknown = rules - set(ALL_RULES)
    if unknown:
        raise ValueError(f"unknown rules {sorted(unknown)}")
    if rules & {ORDERED_UPWARD, ORDERED_DOWNWARD} and below is None:
        raise ValueError("ordered rules need a partial order")
    full = (1 << n) - 1
    have: set[tuple[int, int, int]] = set()
    work = []

    def add(a, b, D):
        k = key(a, b, D)
        if k not in have:
            have.add(k)
            work.append(k)

    for a, b, D in seed:
        add(a, b, D)
    sg = SEMIGRAPHOID in rules
    inter = INTERSECTION in rules
    comp = COMPOSITION in rules
    up = ORDERED_UPWARD in rules
    down = ORDERED_DOWNWARD in rules
    while work:
        a0, b0, E = work.pop()
        for x, y in ((a0, b0), (b0, a0)):
            # the new statement <x,y|E> in the role <a,b|cD> (c in E)
            for c in bits(E):
                D = E & ~(1 << c)
                if sg and key(x, c, D) in have:
                    add(x, c, D | 1 << y)
                    add(x, y, D)
                if inter and key(x, c, D | 1 << y) in have:
                    add(x, y, D)
                    add(x, c, D)
            # the new statement <x,y|E> in the role <a,c|D> (or <a,b|D>)
            rest = full & ~(E | 1 << x | 1 << y)
            for z in bits(rest):
                if sg and key(x, z, E | 1 << y) in have:
                    add(x, y, E | 1 << z)
                    add(x, z, E)
                if comp and key(x, z, E) in have:
                    add(x, y, E | 1 << z)
                    add(x, z, E | 1 << y)
        if up:
            for k in bits((below[a0] | below[b0]) & ~(E | 1 << a0 | 1 << b0)):
                add(a0, b0, E | 1 << k)
        if down:
            for k in bits(E):
                others = (E & ~(1 << k)) | 1 << a0 | 1 << b0
                if not any(below[w] >> k & 1 for w in bits(others)):
                    add(a0, b0, E & ~(1 << k))
    return have


def transitivity_violations(model: set[tuple[int, int, int]], n: int) -> list[tuple]:
    """Instances of <i,j|Y>, <i,j|Yk> present with neither <i,k|Y> nor <j,k|Y>."""
    out = []
    full = (1 << n) - 1
    for a, b, Y in sorted(model):
        for k in bits(full & ~(Y | 1 << a | 1 << b)):
            if key(a, b, Y | 1 << k) in model:
                if key(a, k, Y) not in model and key(b, k, Y) not in model:
                    out.append(((a, b, Y), k))
    return out
