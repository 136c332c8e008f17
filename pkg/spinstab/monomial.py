# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Monomials in replica overlaps (``c12 * c23^2``) and in spins (``s0*s1``).
"""

import re
from dataclasses import dataclass

from .errors import ArgumentError

__all__ = ["OverlapMonomial", "SpinMonomial", "ONE"]

_FACTOR = re.compile(r"^c(?:(\d)(\d)|_?\{?(\d+),(\d+)\}?)?(?:\^(\d+))?$")


@dataclass(frozen=True)
class OverlapMonomial:
    """
    Product of overlaps between replicas, replica labels starting at 1.

    ``factors`` is a sorted tuple of ``((a, b), power)`` with ``a < b``.
    """

    factors: tuple = ()

    def __post_init__(self):
        merged = {}
        for (a, b), power in self.factors:
            a, b = int(a), int(b)
            if a == b or a < 1 or b < 1:
                raise ArgumentError("overlap c%d%d needs two distinct replicas >= 1" % (a, b))
            if power < 0:
                raise ArgumentError("negative power in overlap monomial")
            key = (min(a, b), max(a, b))
            merged[key] = merged.get(key, 0) + int(power)
        object.__setattr__(
            self, "factors", tuple(sorted((k, p) for k, p in merged.items() if p))
        )

    @classmethod
    def of(cls, *pairs):
        """
        ``OverlapMonomial.of((1, 2), (2, 3))`` is c12 * c23.
        """
        return cls(tuple((p, 1) for p in pairs))

    @classmethod
    def parse(cls, text):
        """
        Parse ``"1"``, ``"c"`` (same as c12), ``"c12*c23^2"`` or ``"c_{1,10}"``.
        """
        if isinstance(text, OverlapMonomial):
            return text
        text = str(text).replace(" ", "")
        if text in ("", "1"):
            return ONE
        factors = []
        for token in text.split("*"):
            m = _FACTOR.match(token)
            if not m:
                raise ArgumentError("malformed overlap monomial %r" % text)
            if m.group(1):
                pair = (int(m.group(1)), int(m.group(2)))
            elif m.group(3):
                pair = (int(m.group(3)), int(m.group(4)))
            else:
                pair = (1, 2)
            factors.append((pair, int(m.group(5) or 1)))
        return cls(tuple(factors))

    def __str__(self):
        if not self.factors:
            return "1"
        parts = []
        for (a, b), p in self.factors:
            name = "c%d%d" % (a, b) if a < 10 and b < 10 else "c_{%d,%d}" % (a, b)
            parts.append(name if p == 1 else "%s^%d" % (name, p))
        return "*".join(parts)

    def __mul__(self, other):
        return OverlapMonomial(self.factors + other.factors)

    def degree(self):
        return sum(p for _, p in self.factors)

    def replicas(self):
        return tuple(sorted({r for (pair, _) in self.factors for r in pair}))

    def arity(self):
        return len(self.replicas())

    def replica_degree(self, replica):
        return sum(p for pair, p in self.factors if replica in pair)

    def relabel(self, mapping):
        return OverlapMonomial(
            tuple(((mapping[a], mapping[b]), p) for (a, b), p in self.factors)
        )

    def canonical(self):
        """
        Relabel replicas to 1..k in order of first appearance.
        """
        mapping = {r: i + 1 for i, r in enumerate(self.replicas())}
        return self.relabel(mapping)

    def components(self):
        """
        Split into monomials over disjoint replica sets.
        """
        groups = []
        for pair, p in self.factors:
            hit = [g for g in groups if g[0] & set(pair)]
            merged = (set(pair), [(pair, p)])
            for g in hit:
                merged[0].update(g[0])
                merged[1].extend(g[1])
                groups.remove(g)
            groups.append(merged)
        return [OverlapMonomial(tuple(g[1])) for g in groups]


ONE = OverlapMonomial()


@dataclass(frozen=True)
class SpinMonomial:
    """
    Product of distinct spins, sites counted from 0.
    """

    sites: tuple = ()

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(set(sites)) != len(sites) or any(s < 0 for s in sites):
            raise ArgumentError("spin monomial needs distinct non-negative sites")
        object.__setattr__(self, "sites", tuple(sorted(sites)))

    @classmethod
    def parse(cls, spec):
        if isinstance(spec, SpinMonomial):
            return spec
        if isinstance(spec, str):
            text = spec.replace(" ", "")
            if text in ("", "1"):
                return cls(())
            try:
                return cls(tuple(int(t.lstrip("s")) for t in text.split("*")))
            except ValueError:
                raise ArgumentError("malformed spin monomial %r" % spec)
        return cls(tuple(spec))

    def degree(self):
        return len(self.sites)

    def __str__(self):
        return "*".join("s%d" % s for s in self.sites) or "1"
