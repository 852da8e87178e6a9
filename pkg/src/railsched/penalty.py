"""Quadratic penalty form of a :class:`DecisionModel` over binary variables.

Bounded integers are written in base 2 over ``ceil(log2(range + 1))`` bits,
with the top coefficient capped so that every bit pattern decodes inside the
window. Each constraint becomes ``(lhs - rhs - slack)**2`` (no slack for
equalities); constraints that hold everywhere on the box are dropped.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .model import DecisionModel, Var


def bounded_binary_coefficients(span: int) -> list[int]:
    """Bit weights whose subset sums are exactly ``0..span``."""
    if span < 0:
        raise ValueError("span must be nonnegative")
    if span == 0:
        return []
    k = span.bit_length()  # == ceil(log2(span + 1))
    coefs = [1 << i for i in range(k - 1)]
    coefs.append(span - (sum(coefs)))
    return coefs


@dataclass(frozen=True)
class BitInfo:
    owner: object  # Var, or ("slack", constraint index)
    weight: int


@dataclass
class PenaltyModel:
    """``E(x) = offset + sum_i Q[i,i] x_i + sum_{i<k} Q[i,k] x_i x_k``."""

    bits: list[BitInfo]
    quadratic: dict[tuple[int, int], Fraction]
    offset: Fraction
    penalty_weight: Fraction
    p_min: Fraction
    model: DecisionModel

    @property
    def n_bits(self) -> int:
        return len(self.bits)

    def energy(self, x: Sequence[int]) -> Fraction:
        e = self.offset
        for (i, k), c in self.quadratic.items():
            if x[i] and x[k]:
                e += c
        return e

    def dense(self) -> tuple[np.ndarray, float]:
        q = np.zeros((self.n_bits, self.n_bits))
        for (i, k), c in self.quadratic.items():
            q[i, k] = float(c)
        return q, float(self.offset)

    def integer_form(self) -> tuple[np.ndarray, int, int]:
        """Integer matrix ``Q``, offset and scale with ``E = (x Q x + offset) / scale``."""
        denoms = [c.denominator for c in self.quadratic.values()] + [self.offset.denominator]
        scale = lcm(*denoms) if denoms else 1
        q = np.zeros((self.n_bits, self.n_bits), dtype=np.int64)
        for (i, k), c in self.quadratic.items():
            q[i, k] = int(c * scale)
        return q, int(self.offset * scale), scale

    def decode(self, x: Sequence[int]) -> tuple[dict[tuple[str, str], int], dict[Var, int]]:
        deps = {(v.j, v.s): lo for v, (lo, _) in self.model.time_vars.items()}
        prec = {v: 0 for v in self.model.binary_vars}
        for xi, b in zip(x, self.bits):
            if not xi or not isinstance(b.owner, Var):
                continue
            if b.owner.is_time:
                deps[(b.owner.j, b.owner.s)] += b.weight
            else:
                prec[b.owner] = 1
        return deps, prec

    def encode(self, departures: dict[tuple[str, str], int], precedences: dict[Var, int]) -> list[int]:
        """Bits for an assignment, with slack bits chosen to zero every satisfied penalty."""
        x = [0] * self.n_bits
        by_owner: dict[object, list[int]] = defaultdict(list)
        for i, b in enumerate(self.bits):
            by_owner[b.owner].append(i)

        def put(owner, value: int) -> None:
            # greedy from the largest weight works for the bounded binary encoding
            for i in sorted(by_owner.get(owner, []), key=lambda i: -self.bits[i].weight):
                if self.bits[i].weight <= value:
                    x[i] = 1
                    value -= self.bits[i].weight
            if value:
                raise ValueError(f"value not representable for {owner}")

        for v, (lo, _) in self.model.time_vars.items():
            put(v, departures[(v.j, v.s)] - lo)
        for v in self.model.binary_vars:
            if precedences[v]:
                put(v, 1)
        values = {Var.t(j, s): t for (j, s), t in departures.items()}
        values.update(precedences)
        for owner, idx in by_owner.items():
            if isinstance(owner, tuple) and owner[0] == "slack":
                c = self.model.constraints[owner[1]]
                terms, rhs = c.linear()
                gap = sum(k * values[v] for v, k in terms.items()) - rhs
                cap = sum(self.bits[i].weight for i in idx)
                if gap >= 0:
                    put(owner, min(gap, cap))
        return x


def _box(terms: dict[Var, int], bounds: dict[Var, tuple[int, int]]) -> tuple[int, int]:
    lo = hi = 0
    for v, k in terms.items():
        a, b = bounds[v]
        lo += min(k * a, k * b)
        hi += max(k * a, k * b)
    return lo, hi


def min_penalty_weight(model: DecisionModel) -> Fraction:
    """Largest objective gain any assignment can have over another on the box.

    Every violated constraint costs at least one penalty unit (all
    coefficients are integers), so a weight above this makes every infeasible
    assignment score worse than every feasible one.
    """
    total = Fraction(0)
    for v, c in model.objective:
        lo, hi = model.time_vars[v]
        total += abs(Fraction(c)) * (hi - lo)
    return total


def to_penalty_form(model: DecisionModel, penalty_weight: Fraction | int | float | str) -> PenaltyModel:
    weight = Fraction(str(penalty_weight)) if isinstance(penalty_weight, (float, str)) else Fraction(penalty_weight)
    p_min = min_penalty_weight(model)
    if weight <= p_min:
        raise ValueError(f"penalty weight {weight} must exceed {p_min}")

    bits: list[BitInfo] = []
    owner_bits: dict[object, list[int]] = {}

    def add_var(owner, span: int) -> None:
        idx = []
        for w in bounded_binary_coefficients(span):
            idx.append(len(bits))
            bits.append(BitInfo(owner, w))
        owner_bits[owner] = idx

    for v, (lo, hi) in model.time_vars.items():
        add_var(v, hi - lo)
    for v in model.binary_vars:
        add_var(v, 1)

    bounds: dict[Var, tuple[int, int]] = dict(model.time_vars)
    bounds.update({v: (0, 1) for v in model.binary_vars})
    base = {v: lo for v, (lo, _) in model.time_vars.items()}

    quad: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    offset = Fraction(model.objective_constant)

    def linear_in_bits(terms: dict[object, int | Fraction]) -> tuple[dict[int, Fraction], Fraction]:
        lin: dict[int, Fraction] = defaultdict(Fraction)
        const = Fraction(0)
        for owner, k in terms.items():
            const += k * base.get(owner, 0)
            for i in owner_bits.get(owner, []):
                lin[i] += k * bits[i].weight
        return lin, const

    lin, const = linear_in_bits({v: Fraction(c) for v, c in model.objective})
    offset += const
    for i, c in lin.items():
        quad[(i, i)] += c

    for ci, c in enumerate(model.constraints):
        if c.defines is not None:
            continue
        terms, rhs = c.linear()
        lo, hi = _box(terms, bounds)
        expr: dict[object, int] = dict(terms)
        if c.relation == ">=":
            if lo - rhs >= 0:
                continue
            span = max(hi - rhs, 0)
            owner = ("slack", ci)
            add_var(owner, span)
            expr[owner] = -1
        lin, const = linear_in_bits(expr)
        const -= rhs
        # weight * (sum a_i x_i + const)^2 with x_i^2 = x_i
        items = sorted(lin.items())
        for n, (i, a) in enumerate(items):
            quad[(i, i)] += weight * (a * a + 2 * a * const)
            for k, b in items[n + 1:]:
                quad[(i, k)] += weight * 2 * a * b
        offset += weight * const * const

    return PenaltyModel(bits, {k: v for k, v in quad.items() if v != 0}, offset, weight, p_min, model)


def export_qubo(pm: PenaltyModel) -> str:
    """``i j coeff`` triples preceded by a commented decoding legend."""
    lines = [
        "# penalty form: E = offset + sum coeff * x_i * x_j (i == j for linear terms)",
        f"# bits {pm.n_bits} penalty_weight {pm.penalty_weight} p_min {pm.p_min}",
        f"# offset {pm.offset}",
        "# legend: index owner weight [lo]",
    ]
    for i, b in enumerate(pm.bits):
        if isinstance(b.owner, Var):
            lo = pm.model.time_vars[b.owner][0] if b.owner.is_time else 0
            lines.append(f"# {i} {b.owner.label()} {b.weight} {lo}")
        else:
            lines.append(f"# {i} slack_{b.owner[1]} {b.weight} 0")
    for (i, k), c in sorted(pm.quadratic.items()):
        lines.append(f"{i} {k} {c}")
    return "\n".join(lines) + "\n"
