"""Truncated power series over exact rationals.

Scalars throughout the engine are elements of Q[[z]] / z^(N+1) for a fixed
truncation order N, with Fraction coefficients.  Nothing is ever floated;
an identity that holds here holds to all computed orders exactly.

Each scalar also carries exact_to, the number of leading coefficients that
are guaranteed exact.  Freshly constructed series are exact through their
order; dividing by the deformation parameter shifts coefficients down and
costs one order of guarantee.  truncate() refuses to hand out coefficients
beyond exact_to, so precision loss is always loud (PrecisionLoss), never a
silently wrong top coefficient.

EpsSeriesScalar layers a finite Laurent expansion in the contraction
parameter eps on top: a dict from eps-degree to SeriesScalar.  eps_limit()
extracts the eps^0 part and raises DivergentContraction if any negative
eps-degree survives.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    DivergentContraction,
    MismatchedOrder,
    NotAUnit,
    NotDivisible,
    PrecisionLoss,
)

F = Fraction

_ZERO = F(0)
_ONE = F(1)


def binom(a, k):
    """Generalized binomial coefficient C(a, k) for rational a, integer k >= 0."""
    a = F(a)
    out = _ONE
    for i in range(k):
        out *= (a - i)
    for i in range(2, k + 1):
        out /= i
    return out


class SeriesScalar:
    __slots__ = ("coeffs", "exact_to")

    def __init__(self, coeffs, exact_to=None):
        self.coeffs = tuple(F(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a series needs at least the constant coefficient")
        n = len(self.coeffs) - 1
        self.exact_to = n if exact_to is None else min(exact_to, n)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, order):
        return cls((_ZERO,) * (order + 1))

    @classmethod
    def one(cls, order):
        return cls((_ONE,) + (_ZERO,) * order)

    @classmethod
    def constant(cls, c, order):
        return cls((F(c),) + (_ZERO,) * order)

    @classmethod
    def monomial(cls, c, k, order):
        """c * z^k truncated at the given order (zero if k exceeds it)."""
        cs = [_ZERO] * (order + 1)
        if 0 <= k <= order:
            cs[k] = F(c)
        return cls(cs)

    @classmethod
    def indeterminate(cls, order):
        return cls.monomial(1, 1, order)

    # -- basic queries ------------------------------------------------------

    @property
    def order(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_zero_through(self, n):
        if n > self.exact_to:
            raise PrecisionLoss(
                f"zero test through degree {n} but only {self.exact_to} exact"
            )
        return all(c == 0 for c in self.coeffs[: n + 1])

    def valuation(self):
        """Degree of the lowest nonzero coefficient, or None for zero."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def constant_term(self):
        return self.coeffs[0]

    def __eq__(self, other):
        if not isinstance(other, SeriesScalar):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"SeriesScalar({self.render()}; N={self.order})"

    def render(self, symbol="z"):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                mono = symbol if k == 1 else f"{symbol}^{k}"
                if c == 1:
                    parts.append(mono)
                elif c == -1:
                    parts.append(f"-{mono}")
                else:
                    parts.append(f"{c}*{mono}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if self.order != other.order:
            raise MismatchedOrder(
                f"orders {self.order} and {other.order} cannot mix"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SeriesScalar.constant(other, self.order)
        elif not isinstance(other, SeriesScalar):
            return NotImplemented
        self._check(other)
        return SeriesScalar(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
            min(self.exact_to, other.exact_to),
        )

    __radd__ = __add__

    def __neg__(self):
        return SeriesScalar(tuple(-c for c in self.coeffs), self.exact_to)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SeriesScalar.constant(other, self.order)
        elif not isinstance(other, SeriesScalar):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = F(other)
            return SeriesScalar(tuple(c * q for c in self.coeffs), self.exact_to)
        if not isinstance(other, SeriesScalar):
            return NotImplemented
        self._check(other)
        n = self.order
        out = [_ZERO] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b != 0:
                    out[i + j] += a * b
        return SeriesScalar(tuple(out), min(self.exact_to, other.exact_to))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = F(other)
            if q == 0:
                raise ZeroDivisionError("series divided by rational zero")
            return self * (1 / q)
        if not isinstance(other, SeriesScalar):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("scalar powers take a non-negative integer")
        out = SeriesScalar.one(self.order)
        out.exact_to = self.exact_to
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self):
        c0 = self.coeffs[0]
        if c0 == 0:
            raise NotAUnit("constant term vanishes; series is not invertible")
        n = self.order
        inv = [_ZERO] * (n + 1)
        inv[0] = 1 / c0
        # standard recursion: b_d = -(1/c0) * sum_{i=1..d} a_i b_{d-i}
        for d in range(1, n + 1):
            s = _ZERO
            for i in range(1, d + 1):
                if self.coeffs[i] != 0:
                    s += self.coeffs[i] * inv[d - i]
            inv[d] = -s / c0
        return SeriesScalar(tuple(inv), self.exact_to)

    def shift_down(self, k):
        """Exact division by z^k.  The k coefficients past the truncation edge
        are unknown, so exact_to drops by k."""
        if k == 0:
            return self
        if any(c != 0 for c in self.coeffs[:k]):
            raise NotDivisible(f"valuation below {k}; cannot divide by z^{k}")
        n = self.order
        cs = list(self.coeffs[k:]) + [_ZERO] * k
        return SeriesScalar(tuple(cs), self.exact_to - k)

    def shift_up(self, k):
        """Multiplication by z^k."""
        if k == 0:
            return self
        n = self.order
        cs = [_ZERO] * k + list(self.coeffs[: n + 1 - k])
        return SeriesScalar(tuple(cs), min(self.exact_to + k, n))

    def truncate(self, n):
        """Forget degrees above n.  Requires those of degree <= n to be exact."""
        if n > self.exact_to:
            raise PrecisionLoss(
                f"need coefficients through degree {n}, exact only to {self.exact_to}"
            )
        return SeriesScalar(self.coeffs[: n + 1])

    def extend(self, order):
        """View at a higher truncation order.  Degrees past exact_to are unknown."""
        if order < self.order:
            raise MismatchedOrder("extend cannot lower the order; use truncate")
        cs = self.coeffs + (_ZERO,) * (order - self.order)
        return SeriesScalar(cs, self.exact_to)

    def eval_at(self, value):
        """Evaluate at an exact rational value of the parameter."""
        v = F(value)
        out = _ZERO
        for c in reversed(self.coeffs):
            out = out * v + c
        return out

    def to_eps(self, coeff, eps_power):
        """Substitute z -> coeff * eps^eps_power * z term by term.

        Used by contractions, where the old deformation parameter is a
        rational multiple of an eps power times the new one.
        """
        q = F(coeff)
        n = self.order
        out = {}
        for k, c in enumerate(self.coeffs):
            if c == 0 and k > self.exact_to:
                continue
            d = eps_power * k
            bucket = out.setdefault(d, [_ZERO] * (n + 1))
            bucket[k] = c * q**k
        return EpsSeriesScalar(
            {d: SeriesScalar(tuple(cs), self.exact_to) for d, cs in out.items()},
            order=n,
        )


class EpsSeriesScalar:
    """Finite Laurent expansion in eps with SeriesScalar coefficients."""

    __slots__ = ("parts", "order")

    def __init__(self, parts, order):
        self.order = order
        self.parts = {}
        for d, s in parts.items():
            if s.order != order:
                raise MismatchedOrder("eps components must share the truncation order")
            if not s.is_zero() or s.exact_to < order:
                self.parts[int(d)] = s

    @classmethod
    def zero(cls, order):
        return cls({}, order)

    @classmethod
    def from_scalar(cls, s, eps_power=0):
        return cls({eps_power: s}, s.order)

    def min_exact(self):
        return min((s.exact_to for s in self.parts.values()), default=self.order)

    def __add__(self, other):
        if isinstance(other, SeriesScalar):
            other = EpsSeriesScalar.from_scalar(other)
        if not isinstance(other, EpsSeriesScalar):
            return NotImplemented
        if self.order != other.order:
            raise MismatchedOrder("eps series orders differ")
        parts = dict(self.parts)
        for d, s in other.parts.items():
            parts[d] = parts[d] + s if d in parts else s
        return EpsSeriesScalar(parts, self.order)

    def __neg__(self):
        return EpsSeriesScalar({d: -s for d, s in self.parts.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return EpsSeriesScalar(
                {d: s * other for d, s in self.parts.items()}, self.order
            )
        if isinstance(other, SeriesScalar):
            other = EpsSeriesScalar.from_scalar(other)
        if not isinstance(other, EpsSeriesScalar):
            return NotImplemented
        if self.order != other.order:
            raise MismatchedOrder("eps series orders differ")
        parts = {}
        for d1, s1 in self.parts.items():
            for d2, s2 in other.parts.items():
                d = d1 + d2
                p = s1 * s2
                parts[d] = parts[d] + p if d in parts else p
        return EpsSeriesScalar(parts, self.order)

    __rmul__ = __mul__

    def shift_eps(self, k):
        return EpsSeriesScalar(
            {d + k: s for d, s in self.parts.items()}, self.order
        )

    def is_zero(self):
        return all(s.is_zero() for s in self.parts.values())

    def eps_limit(self, through=None):
        """The eps^0 component, provided all negative eps-degrees vanish.

        through bounds the z-degree window that must be clean; it defaults
        to the full exact window of the components.
        """
        n = self.min_exact() if through is None else through
        bad = sorted(
            d
            for d, s in self.parts.items()
            if d < 0 and not s.is_zero_through(min(n, s.exact_to))
        )
        if bad:
            raise DivergentContraction(
                f"nonzero coefficients at eps degrees {bad}", degrees=bad
            )
        part = self.parts.get(0)
        if part is None:
            return SeriesScalar.zero(self.order)
        return part

    def __eq__(self, other):
        if not isinstance(other, EpsSeriesScalar):
            return NotImplemented
        keys = set(self.parts) | set(other.parts)
        for d in keys:
            a = self.parts.get(d)
            b = other.parts.get(d)
            if a is None:
                a = SeriesScalar.zero(self.order)
            if b is None:
                b = SeriesScalar.zero(other.order)
            if a != b:
                return False
        return True

    def __repr__(self):
        if not self.parts:
            return "EpsSeriesScalar(0)"
        bits = [
            f"eps^{d}*({s.render()})" for d, s in sorted(self.parts.items())
        ]
        return "EpsSeriesScalar(" + " + ".join(bits) + ")"
