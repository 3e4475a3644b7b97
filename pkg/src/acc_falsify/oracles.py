"""Slow reference implementations used to cross-check the fast paths.

Nothing here is used by the falsifiers themselves.
"""
from __future__ import annotations

from . import stl


def _atom_margin(a: stl.Atom, sig, t: int) -> float:
    lhs = None
    for name, coef in a.terms:
        x = float(sig[name][t])
        x = x if coef == 1.0 else coef * x
        lhs = x if lhs is None else lhs + x
    m = lhs - a.threshold if a.op == "ge" else a.threshold - lhs
    return m / a.scale


def naive_robustness(f, sig, t: int) -> float:
    """Direct recursive min/max semantics evaluated at a single index."""
    n = len(next(iter(sig.values())))
    if isinstance(f, stl.Atom):
        return _atom_margin(f, sig, t)
    if isinstance(f, stl.Top):
        return stl.RHO_TOP
    if isinstance(f, stl.Not):
        return -naive_robustness(f.arg, sig, t)
    if isinstance(f, stl.And):
        return min(naive_robustness(a, sig, t) for a in f.args)
    if isinstance(f, stl.Or):
        return max(naive_robustness(a, sig, t) for a in f.args)
    if isinstance(f, stl.Implies):
        return max(-naive_robustness(f.lhs, sig, t), naive_robustness(f.rhs, sig, t))
    if isinstance(f, stl.Globally):
        return min(naive_robustness(f.arg, sig, k) for k in range(t, n))
    if isinstance(f, stl.Eventually):
        return max(naive_robustness(f.arg, sig, k) for k in range(t, n))
    raise TypeError(f)


def boolean_sat(f, sig, t: int) -> bool:
    """Qualitative finite-trace semantics (atoms are non-strict)."""
    n = len(next(iter(sig.values())))
    if isinstance(f, stl.Atom):
        return _atom_margin(f, sig, t) >= 0.0
    if isinstance(f, stl.Top):
        return True
    if isinstance(f, stl.Not):
        return not boolean_sat(f.arg, sig, t)
    if isinstance(f, stl.And):
        return all(boolean_sat(a, sig, t) for a in f.args)
    if isinstance(f, stl.Or):
        return any(boolean_sat(a, sig, t) for a in f.args)
    if isinstance(f, stl.Implies):
        return (not boolean_sat(f.lhs, sig, t)) or boolean_sat(f.rhs, sig, t)
    if isinstance(f, stl.Globally):
        return all(boolean_sat(f.arg, sig, k) for k in range(t, n))
    if isinstance(f, stl.Eventually):
        return any(boolean_sat(f.arg, sig, k) for k in range(t, n))
    raise TypeError(f)


def random_formula(rng, names, depth: int):
    """Random formula of at most ``depth`` operator levels above the atoms."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.05:
            return stl.Top()
        k = int(rng.integers(1, 3))
        terms = tuple((str(rng.choice(names)), 1.0 if rng.random() < 0.5 else float(rng.uniform(-2, 2)))
                      for _ in range(k))
        return stl.Atom(terms, str(rng.choice(["ge", "le"])), float(rng.uniform(-3, 3)),
                        1.0 if rng.random() < 0.7 else float(rng.uniform(0.5, 3)))
    kind = int(rng.integers(0, 7))
    sub = lambda: random_formula(rng, names, depth - 1)  # noqa: E731
    if kind == 0:
        return stl.Not(sub())
    if kind == 1:
        return stl.And(tuple(sub() for _ in range(int(rng.integers(2, 4)))))
    if kind == 2:
        return stl.Or(tuple(sub() for _ in range(int(rng.integers(2, 4)))))
    if kind == 3:
        return stl.Implies(sub(), sub())
    if kind == 4:
        return stl.Globally(sub())
    return stl.Eventually(sub())


def stopping_distance_sim(v0: float, a_brake: float, dt: float = 1e-3) -> float:
    """Distance to standstill under constant braking, by plain Euler steps.

    Steps until the next update would reverse the velocity; the overshoot of
    the final partial step is at most ``v * dt``.
    """
    s, v = 0.0, v0
    while v + dt * a_brake > 0.0:
        s += dt * v + 0.5 * dt * dt * a_brake
        v += dt * a_brake
    return s + dt * v
