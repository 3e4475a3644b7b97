"""Temporal-logic formulas with quantitative (robustness) semantics.

Formulas are evaluated over finite, uniformly sampled signals. ``G`` and
``F`` range over the whole remaining horizon. Evaluation runs bottom-up over
entire signals, so every node costs O(N) regardless of nesting depth.

Textual format (prefix, s-expressions)::

    formula := true
             | (ge TERM NUM [SCALE]) | (le TERM NUM [SCALE])
             | (not f) | (and f f ...) | (or f f ...) | (implies f f)
             | (G f) | (F f)
    TERM    := NAME | (* NUM NAME) | (+ TERM TERM ...)

``(ge x c)`` has robustness ``(x - c) / scale`` and ``(le x c)`` has
``(c - x) / scale``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

#: margin of the constant-true predicate
RHO_TOP = 1e6
#: exp() argument cap in the reward; keeps rewards finite
MAX_EXP_ARG = 700.0


@dataclass(frozen=True)
class Atom:
    terms: tuple[tuple[str, float], ...]
    op: str
    threshold: float
    scale: float = 1.0

    def __post_init__(self):
        if self.op not in ("ge", "le"):
            raise ValueError(f"unknown comparison {self.op!r}")
        if not self.terms:
            raise ValueError("atom needs at least one signal term")
        if not self.scale > 0:
            raise ValueError("atom scale must be positive")


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Globally:
    arg: "Formula"


@dataclass(frozen=True)
class Eventually:
    arg: "Formula"


Formula = Union[Atom, Top, Not, And, Or, Implies, Globally, Eventually]


def ge(name: str, c: float, scale: float = 1.0) -> Atom:
    return Atom(((name, 1.0),), "ge", float(c), scale)


def le(name: str, c: float, scale: float = 1.0) -> Atom:
    return Atom(((name, 1.0),), "le", float(c), scale)


@dataclass
class SignalTrace:
    signals: dict[str, np.ndarray]
    ts: float = 1.0

    def __post_init__(self):
        self.signals = {k: np.asarray(v, dtype=float) for k, v in self.signals.items()}
        lengths = {len(v) for v in self.signals.values()}
        if len(lengths) != 1:
            raise ValueError(f"signals have different lengths: {sorted(lengths)}")
        if lengths.pop() < 1:
            raise ValueError("empty signal trace")

    def __len__(self) -> int:
        return len(next(iter(self.signals.values())))


def signal_names(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {name for name, _ in f.terms}
    if isinstance(f, Top):
        return set()
    if isinstance(f, (Not, Globally, Eventually)):
        return signal_names(f.arg)
    if isinstance(f, Implies):
        return signal_names(f.lhs) | signal_names(f.rhs)
    return set().union(*(signal_names(a) for a in f.args))


def _lhs(terms, sig: Mapping[str, np.ndarray]) -> np.ndarray:
    out = None
    for name, coef in terms:
        try:
            x = sig[name]
        except KeyError:
            raise KeyError(f"unknown signal {name!r}") from None
        x = x if coef == 1.0 else coef * x
        out = x if out is None else out + x
    return out


def robustness_signal(f: Formula, sig: Mapping[str, np.ndarray]) -> np.ndarray:
    """Robustness of ``f`` at every sample index."""
    if isinstance(f, Atom):
        lhs = _lhs(f.terms, sig)
        m = lhs - f.threshold if f.op == "ge" else f.threshold - lhs
        return m / f.scale
    if isinstance(f, Top):
        n = len(next(iter(sig.values())))
        return np.full(n, RHO_TOP)
    if isinstance(f, Not):
        return -robustness_signal(f.arg, sig)
    if isinstance(f, And):
        return np.minimum.reduce([robustness_signal(a, sig) for a in f.args])
    if isinstance(f, Or):
        return np.maximum.reduce([robustness_signal(a, sig) for a in f.args])
    if isinstance(f, Implies):
        return np.maximum(-robustness_signal(f.lhs, sig), robustness_signal(f.rhs, sig))
    if isinstance(f, Globally):
        return np.minimum.accumulate(robustness_signal(f.arg, sig)[::-1])[::-1]
    if isinstance(f, Eventually):
        return np.maximum.accumulate(robustness_signal(f.arg, sig)[::-1])[::-1]
    raise TypeError(f"not a formula node: {f!r}")


def robustness(f: Formula, w: SignalTrace, t: int = 0) -> float:
    n = len(w)
    if not 0 <= t < n:
        raise IndexError(f"time index {t} outside [0, {n})")
    return float(robustness_signal(f, w.signals)[t])


def reward(rho: float, residuals=None, penalty_weight: float = 1.0) -> float:
    """``exp(-rho)``, minus a weighted L1 penalty on constraint residuals."""
    r = math.exp(min(-rho, MAX_EXP_ARG))
    if residuals is not None:
        r -= penalty_weight * float(np.sum(np.abs(residuals)))
    return r


def build_acc_spec(prm, cfg) -> Formula:
    """The ACC requirement as a formula over signals ``a_h``, ``v`` and ``h``.

    Set-speed mode holds when ``h - v_d * t_h_d >= 0``; time-gap mode is
    its negation.
    """
    s_u = And((ge("a_h", cfg.a_h_min), le("a_h", cfg.a_h_max)))
    m1 = ge("h", prm.v_d * prm.t_h_d)
    s1 = Top()
    t1 = le("v", prm.v_d)
    m2 = Not(m1)
    s2 = Atom((("h", 1.0), ("v", -prm.t_h_min)), "ge", 0.0)
    t2 = Atom((("h", 1.0), ("v", -prm.t_h_d)), "ge", 0.0)

    def clause(m, s, t):
        return And((Implies(m, s), Implies(Globally(m), Globally(Eventually(t)))))

    return Globally(And((s_u, And((clause(m1, s1, t1), clause(m2, s2, t2))))))


# --- text format -----------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def _num(tok) -> float:
    if not isinstance(tok, str):
        raise ValueError(f"expected a number, got {tok!r}")
    try:
        return float(tok)
    except ValueError:
        raise ValueError(f"expected a number, got {tok!r}") from None


def _read(tokens: list[str], i: int):
    if i >= len(tokens):
        raise ValueError("unexpected end of formula")
    tok = tokens[i]
    if tok == ")":
        raise ValueError("unbalanced ')'")
    if tok != "(":
        return tok, i + 1
    out = []
    i += 1
    while i < len(tokens) and tokens[i] != ")":
        node, i = _read(tokens, i)
        out.append(node)
    if i >= len(tokens):
        raise ValueError("missing ')'")
    return out, i + 1


def _term(node) -> tuple[tuple[str, float], ...]:
    if isinstance(node, str):
        return ((node, 1.0),)
    if node and node[0] == "*" and len(node) == 3 and isinstance(node[2], str):
        return ((node[2], _num(node[1])),)
    if node and node[0] == "+" and len(node) >= 2:
        return tuple(t for sub in node[1:] for t in _term(sub))
    raise ValueError(f"bad signal term: {node!r}")


def _build(node) -> Formula:
    if node == "true":
        return Top()
    if isinstance(node, str) or not node:
        raise ValueError(f"expected an operator expression, got {node!r}")
    op, args = node[0], node[1:]
    if op in ("ge", "le"):
        if len(args) not in (2, 3):
            raise ValueError(f"({op} ...) takes a term, a threshold and an optional scale")
        scale = _num(args[2]) if len(args) == 3 else 1.0
        return Atom(_term(args[0]), op, _num(args[1]), scale)
    if op == "not" and len(args) == 1:
        return Not(_build(args[0]))
    if op == "and" and args:
        return And(tuple(_build(a) for a in args))
    if op == "or" and args:
        return Or(tuple(_build(a) for a in args))
    if op == "implies" and len(args) == 2:
        return Implies(_build(args[0]), _build(args[1]))
    if op == "G" and len(args) == 1:
        return Globally(_build(args[0]))
    if op == "F" and len(args) == 1:
        return Eventually(_build(args[0]))
    raise ValueError(f"bad operator or arity: {op!r} with {len(args)} argument(s)")


def parse(text: str) -> Formula:
    tokens = _tokenize(text)
    node, i = _read(tokens, 0)
    if i != len(tokens):
        raise ValueError("trailing tokens after formula")
    return _build(node)


def _fmt_num(x: float) -> str:
    return repr(float(x))


def _fmt_term(terms) -> str:
    parts = [name if coef == 1.0 else f"(* {_fmt_num(coef)} {name})" for name, coef in terms]
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def to_text(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        tail = "" if f.scale == 1.0 else " " + _fmt_num(f.scale)
        return f"({f.op} {_fmt_term(f.terms)} {_fmt_num(f.threshold)}{tail})"
    if isinstance(f, Not):
        return f"(not {to_text(f.arg)})"
    if isinstance(f, (And, Or)):
        name = "and" if isinstance(f, And) else "or"
        return f"({name} " + " ".join(to_text(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_text(f.lhs)} {to_text(f.rhs)})"
    if isinstance(f, Globally):
        return f"(G {to_text(f.arg)})"
    if isinstance(f, Eventually):
        return f"(F {to_text(f.arg)})"
    raise TypeError(f"not a formula node: {f!r}")
