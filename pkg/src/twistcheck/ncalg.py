"""PBW normal ordering over truncated series scalars.

An AlgebraContext holds a finite generator list in a fixed PBW order, a
bracket table [A,B] for every pair, and a working truncation order.  Words
are tuples of generator indices; an NCElement maps words to SeriesScalar
coefficients.  Products are normal ordered by swapping the leftmost
descent A.B -> B.A + [A,B] until every word is sorted; a fuel counter and
a total-degree cap bound the rewriting, and both failure modes raise.

The bracket table entries are expressions (they may themselves involve
products and exponentials of generators), so the table is compiled on
demand and recursively: compiling [P,C] may normal order words that need
[D,P] first.  Cycles are a validation error, not a hang.

Tensor powers of the algebra reuse the same machinery slot by slot.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import (
    ArityMismatch,
    DegreeCapExceeded,
    FuelExhausted,
    MismatchedOrder,
    NonNilpotentArgument,
    NotAUnit,
    NotDivisible,
    PrecisionLoss,
    UnknownGenerator,
    UnmappedGenerator,
    ValidationFailed,
)
from .exprs import evaluate
from .series import EpsSeriesScalar, SeriesScalar, binom

F = Fraction


class AlgebraContext:
    """A presentation compiled at a fixed working order.

    order is the order verification results are stated at; internally the
    context computes with pad extra degrees so that divisions by the
    deformation parameter inside table entries still leave exact
    coefficients through `order` (tracked per value via exact_to).
    """

    def __init__(
        self,
        name,
        generators,
        bracket_asts,
        order,
        *,
        deformation="z",
        macros=None,
        pad=2,
        degree_cap=12,
        fuel=10**6,
    ):
        self.name = name
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ValidationFailed("duplicate generator", location=name)
        self.index = {g: i for i, g in enumerate(self.generators)}
        self.deformation = deformation
        self.order = order
        self.work_order = order + pad
        self.degree_cap = degree_cap + 2 * pad
        self.fuel_limit = fuel
        self.fuel_used = 0
        self._bracket_asts = {}
        for (a, b), ast in bracket_asts.items():
            if a not in self.index or b not in self.index:
                raise ValidationFailed(
                    f"bracket [{a},{b}] names unknown generator", location=name
                )
            self._bracket_asts[(self.index[a], self.index[b])] = ast
        self.macros = dict(macros or {})
        self._brackets = {}
        self._compiling = set()
        self._no_memo = {}

    # -- scalar helpers ------------------------------------------------------

    def scalar(self, c):
        return SeriesScalar.constant(c, self.work_order)

    def scalar_one(self):
        return SeriesScalar.one(self.work_order)

    def param(self):
        return SeriesScalar.indeterminate(self.work_order)

    # -- element constructors -------------------------------------------------

    def zero(self):
        return NCElement(self, {}, self.work_order)

    def one(self):
        return NCElement(self, {(): self.scalar_one()}, self.work_order)

    def gen(self, g):
        if isinstance(g, str):
            if g not in self.index:
                raise UnknownGenerator(f"{g!r} not in {self.name}")
            g = self.index[g]
        return NCElement(self, {(g,): self.scalar_one()}, self.work_order)

    def from_scalar(self, s):
        if s.order != self.work_order:
            raise MismatchedOrder("scalar order does not match the context")
        return NCElement(self, {(): s}, self.work_order)

    def parse(self, ast, extra=None):
        return evaluate(ast, NCDomain(self, extra))

    # -- bracket table ---------------------------------------------------------

    def bracket(self, i, j):
        """Compiled [g_i, g_j] as an NCElement, any orientation."""
        if isinstance(i, str):
            i = self.index[i]
        if isinstance(j, str):
            j = self.index[j]
        if i == j:
            return self.zero()
        key = (i, j)
        cached = self._brackets.get(key)
        if cached is not None:
            return cached
        flipped = self._brackets.get((j, i))
        if flipped is not None:
            out = -flipped
            self._brackets[key] = out
            return out
        if key in self._bracket_asts:
            ast, sign = self._bracket_asts[key], 1
        elif (j, i) in self._bracket_asts:
            ast, sign = self._bracket_asts[(j, i)], -1
        else:
            raise ValidationFailed(
                f"no bracket for pair ({self.generators[i]},{self.generators[j]})",
                location=self.name,
            )
        if key in self._compiling or (j, i) in self._compiling:
            raise ValidationFailed(
                f"bracket compilation cycle at ({self.generators[i]},{self.generators[j]})",
                location=self.name,
            )
        self._compiling.add(key)
        try:
            elem = self.parse(ast)
        finally:
            self._compiling.discard(key)
        if sign < 0:
            elem = -elem
        self._brackets[key] = elem
        self._brackets[(j, i)] = -elem
        return elem

    # -- normal ordering --------------------------------------------------------

    def normal_order_word(self, word, headroom=None):
        """Normal order a word, exploring only rewrite paths whose inserted
        bracket coefficients fit the parameter-degree budget.

        headroom is the z-valuation the caller's coefficient leaves free
        (work_order minus its valuation).  Contributions of higher valuation
        would vanish after that multiplication, so their paths are pruned;
        the returned element is therefore only trustworthy through z^headroom
        unless headroom is the full work order.  Results memoize per (word,
        headroom) and a higher-headroom entry serves any lower request.
        """
        if headroom is None or headroom > self.work_order:
            headroom = self.work_order
        memo = self._no_memo
        for h in range(headroom, self.work_order + 1):
            out = memo.get((word, h))
            if out is not None:
                return out
        if len(word) > self.degree_cap:
            raise DegreeCapExceeded(
                f"word degree {len(word)} exceeds cap {self.degree_cap} in {self.name}"
            )
        k = -1
        for i in range(len(word) - 1):
            if word[i] > word[i + 1]:
                k = i
                break
        if k < 0:
            out = NCElement(self, {word: self.scalar_one()}, self.work_order)
            memo[(word, self.work_order)] = out
            return out
        self.fuel_used += 1
        if self.fuel_used > self.fuel_limit:
            raise FuelExhausted(f"rewrite budget exhausted in {self.name}")
        a, b = word[k], word[k + 1]
        pre, post = word[:k], word[k + 2 :]
        acc = dict(self.normal_order_word(pre + (b, a) + post, headroom).terms)
        exact = self.work_order
        br = self.bracket(a, b)
        exact = min(exact, br.exact_to)
        for u, c in br.terms.items():
            v = c.valuation()
            if v is None or v > headroom:
                continue
            piece = self.normal_order_word(pre + u + post, headroom - v)
            exact = min(exact, piece.exact_to)
            for w2, c2 in piece.terms.items():
                prod = c * c2
                if prod.is_zero():
                    exact = min(exact, prod.exact_to)
                    continue
                cur = acc.get(w2)
                acc[w2] = prod if cur is None else cur + prod
        out = NCElement(self, acc, exact)
        memo[(word, headroom)] = out
        return out


class NCElement:
    __slots__ = ("ctx", "terms", "exact_to")

    def __init__(self, ctx, terms, exact_to):
        self.ctx = ctx
        self.terms = {}
        for w, c in terms.items():
            # a coefficient zero through its exact window contributes no
            # value; folding the window keeps the exactness claim honest
            # and stops such terms compounding in products
            if c.is_zero():
                exact_to = min(exact_to, c.exact_to)
                continue
            self.terms[w] = c
            exact_to = min(exact_to, c.exact_to)
        self.exact_to = exact_to

    def _check(self, other):
        if self.ctx is not other.ctx:
            raise MismatchedOrder("elements from different contexts cannot mix")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.from_scalar(self.ctx.scalar(other))
        if not isinstance(other, NCElement):
            return NotImplemented
        self._check(other)
        acc = dict(self.terms)
        for w, c in other.terms.items():
            cur = acc.get(w)
            acc[w] = c if cur is None else cur + c
        return NCElement(self.ctx, acc, min(self.exact_to, other.exact_to))

    __radd__ = __add__

    def __neg__(self):
        return NCElement(
            self.ctx, {w: -c for w, c in self.terms.items()}, self.exact_to
        )

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.from_scalar(self.ctx.scalar(other))
        if not isinstance(other, NCElement):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s):
        """Multiply by a SeriesScalar or rational."""
        if isinstance(s, (int, Fraction)):
            if s == 0:
                return NCElement(self.ctx, {}, self.exact_to)
            return NCElement(
                self.ctx, {w: c * s for w, c in self.terms.items()}, self.exact_to
            )
        return NCElement(
            self.ctx,
            {w: c * s for w, c in self.terms.items()},
            min(self.exact_to, s.exact_to),
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, NCElement):
            return NotImplemented
        self._check(other)
        ctx = self.ctx
        acc = {}
        exact = min(self.exact_to, other.exact_to)
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                c = ca * cb
                if c.is_zero():
                    exact = min(exact, c.exact_to)
                    continue
                piece = ctx.normal_order_word(
                    wa + wb, ctx.work_order - c.valuation()
                )
                exact = min(exact, piece.exact_to)
                for w, cw in piece.terms.items():
                    prod = c * cw
                    if prod.is_zero():
                        exact = min(exact, prod.exact_to)
                        continue
                    cur = acc.get(w)
                    acc[w] = prod if cur is None else cur + prod
        return NCElement(ctx, acc, exact)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scalar_part(self):
        return self.terms.get((), SeriesScalar.zero(self.ctx.work_order))

    def is_scalar(self):
        return all(w == () for w in self.terms)

    def valuation(self):
        vals = [c.valuation() for c in self.terms.values()]
        vals = [v for v in vals if v is not None]
        return min(vals) if vals else None

    def is_zero_at(self, n=None):
        n = self.ctx.order if n is None else n
        if n > self.exact_to:
            raise PrecisionLoss(
                f"zero test at order {n} but element exact only to {self.exact_to}"
            )
        return all(c.is_zero_through(n) for c in self.terms.values())

    def eq_at(self, other, n=None):
        return (self - other).is_zero_at(n)

    def truncated(self, n=None):
        """dict word-of-names -> SeriesScalar at the stated order, for freezing."""
        n = self.ctx.order if n is None else n
        out = {}
        for w, c in self.terms.items():
            t = c.truncate(n)
            if not t.is_zero():
                out[tuple(self.ctx.generators[i] for i in w)] = t
        return out

    def render(self, n=None):
        n = self.ctx.order if n is None else min(self.ctx.order, self.exact_to)
        sym = self.ctx.deformation
        bits = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w].truncate(min(n, self.terms[w].exact_to))
            if c.is_zero():
                continue
            word = "*".join(self.ctx.generators[i] for i in w) if w else "1"
            bits.append(f"({c.render(sym)})*{word}" if w else f"({c.render(sym)})")
        return " + ".join(bits) if bits else "0"

    def __repr__(self):
        return f"NCElement<{self.ctx.name}>({self.render()})"


# -- element-level series functions ------------------------------------------


def _require_nilpotent(x, what):
    v = x.valuation()
    if v is not None and v < 1:
        raise NonNilpotentArgument(f"{what} needs valuation >= 1 in the parameter")


def exp_element(x):
    _require_nilpotent(x, "exp")
    out = x.ctx.one() + x
    p = x
    for k in range(2, x.ctx.work_order + 1):
        p = p * x
        if not p.terms:
            break
        out = out + p.scale(F(1, math.factorial(k)))
    out.exact_to = min(out.exact_to, x.exact_to)
    return out


def log_one_plus(n):
    _require_nilpotent(n, "log(1+.)")
    out = n
    p = n
    for k in range(2, n.ctx.work_order + 1):
        p = p * n
        if not p.terms:
            break
        out = out + p.scale(F((-1) ** (k + 1), k))
    return out


def invert_one_plus(n):
    _require_nilpotent(n, "(1+.)^-1")
    out = n.ctx.one() - n
    p = n
    for k in range(2, n.ctx.work_order + 1):
        p = p * n
        if not p.terms:
            break
        out = out + p.scale(F((-1) ** k))
    out.exact_to = min(out.exact_to, n.exact_to)
    return out


def binomial_power(n, a):
    """(1 + n)^a for rational a and n of valuation >= 1."""
    _require_nilpotent(n, "binomial power")
    out = n.ctx.one() + n.scale(F(a))
    p = n
    for k in range(2, n.ctx.work_order + 1):
        p = p * n
        if not p.terms:
            break
        c = binom(a, k)
        if c != 0:
            out = out + p.scale(c)
    out.exact_to = min(out.exact_to, n.exact_to)
    return out


def power(x, a):
    """x^a: repeated products for integer a >= 0, binomial series otherwise."""
    a = F(a)
    if a.denominator == 1 and a >= 0:
        k = int(a)
        out = x.ctx.one()
        base = x
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out
    n = x - 1
    return binomial_power(n, a)


def commutator(a, b):
    return a * b - b * a


def rescale_series(s, q):
    """Substitute the parameter z -> q*z for rational q."""
    q = F(q)
    out = []
    p = F(1)
    for c in s.coeffs:
        out.append(c * p)
        p *= q
    return SeriesScalar(tuple(out), s.exact_to)


def substitute(elem, images, target_ctx, param_scale=None):
    """Push an element through generator images living in target_ctx.

    images maps generator names to NCElements of the target context; a
    missing name for an occurring generator raises.  param_scale, when
    given, rescales coefficient series (source parameter = param_scale *
    target parameter), e.g. -1 for z = -sigma.
    """
    img = {}
    for name, e in images.items():
        if name in elem.ctx.index:
            img[elem.ctx.index[name]] = e
    word_cache = {(): target_ctx.one()}

    def image_of(word):
        got = word_cache.get(word)
        if got is not None:
            return got
        head = word[:-1]
        last = word[-1]
        if last not in img:
            raise UnmappedGenerator(
                f"no image for generator {elem.ctx.generators[last]!r}"
            )
        out = image_of(head) * img[last]
        word_cache[word] = out
        return out

    total = target_ctx.zero()
    for w, c in elem.terms.items():
        s = rescale_series(c, param_scale) if param_scale is not None else c
        total = total + image_of(w).scale(s)
    return total


def substitute_tensor(t, images, target_ctx, param_scale=None):
    """Tensor-legged counterpart of substitute.

    Every slot word maps through the generator images into target_ctx and
    the slots are recombined, so (f (x) f) circle Delta is one call when f
    is given on generators.
    """
    img = {}
    for name, e in images.items():
        if name in t.ctx.index:
            img[t.ctx.index[name]] = e
    word_cache = {(): target_ctx.one()}

    def image_of(word):
        got = word_cache.get(word)
        if got is not None:
            return got
        last = word[-1]
        if last not in img:
            raise UnmappedGenerator(
                f"no image for generator {t.ctx.generators[last]!r}"
            )
        out = image_of(word[:-1]) * img[last]
        word_cache[word] = out
        return out

    total = TensorElement.zero(target_ctx, t.arity)
    for key, c in t.terms.items():
        factors = [image_of(w) for w in key]
        s = rescale_series(c, param_scale) if param_scale is not None else c
        total = total + TensorElement.of(*factors).scale(s)
    return total


def verify_jacobi(ctx):
    """Jacobi residuals for all generator triples, at the context's order.

    Commutators in an associative algebra satisfy Jacobi identically, so a
    nonzero residual can only come from inconsistent rewriting: this is
    the operational consistency probe for a presentation.
    """
    failures = []
    gens = range(len(ctx.generators))
    for a in gens:
        for b in gens:
            if b <= a:
                continue
            for c in gens:
                if c <= b:
                    continue
                ea, eb, ec = ctx.gen(a), ctx.gen(b), ctx.gen(c)
                j = (
                    commutator(commutator(ea, eb), ec)
                    + commutator(commutator(eb, ec), ea)
                    + commutator(commutator(ec, ea), eb)
                )
                if not j.is_zero_at():
                    failures.append(
                        (
                            ctx.generators[a],
                            ctx.generators[b],
                            ctx.generators[c],
                            j.render(),
                        )
                    )
    return failures


# -- tensor legs ----------------------------------------------------------------


class TensorElement:
    """Element of the arity-fold tensor power, words per slot."""

    __slots__ = ("ctx", "arity", "terms", "exact_to")

    def __init__(self, ctx, arity, terms, exact_to):
        self.ctx = ctx
        self.arity = arity
        self.terms = {}
        for key, c in terms.items():
            if len(key) != arity:
                raise ArityMismatch(f"term has {len(key)} slots, arity is {arity}")
            if c.is_zero():
                exact_to = min(exact_to, c.exact_to)
                continue
            self.terms[key] = c
            exact_to = min(exact_to, c.exact_to)
        self.exact_to = exact_to

    @classmethod
    def zero(cls, ctx, arity):
        return cls(ctx, arity, {}, ctx.work_order)

    @classmethod
    def unit(cls, ctx, arity):
        return cls(ctx, arity, {((),) * arity: ctx.scalar_one()}, ctx.work_order)

    @classmethod
    def of(cls, *factors):
        """Tensor product of NCElements, one per slot."""
        ctx = factors[0].ctx
        exact = ctx.work_order
        acc = {(): ctx.scalar_one()}
        for f in factors:
            if f.ctx is not ctx:
                raise MismatchedOrder("tensor slots from different contexts")
            exact = min(exact, f.exact_to)
            nxt = {}
            for key, c in acc.items():
                for w, cw in f.terms.items():
                    prod = c * cw
                    k2 = key + (w,)
                    cur = nxt.get(k2)
                    nxt[k2] = prod if cur is None else cur + prod
            acc = nxt
        return cls(ctx, len(factors), acc, exact)

    def _check(self, other):
        if self.ctx is not other.ctx or self.arity != other.arity:
            raise ArityMismatch("tensor operands do not match")

    def __add__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            cur = acc.get(k)
            acc[k] = c if cur is None else cur + c
        return TensorElement(
            self.ctx, self.arity, acc, min(self.exact_to, other.exact_to)
        )

    def __neg__(self):
        return TensorElement(
            self.ctx, self.arity, {k: -c for k, c in self.terms.items()}, self.exact_to
        )

    def __sub__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self + (-other)

    def scale(self, s):
        if isinstance(s, (int, Fraction)):
            if s == 0:
                return TensorElement(self.ctx, self.arity, {}, self.exact_to)
            return TensorElement(
                self.ctx,
                self.arity,
                {k: c * s for k, c in self.terms.items()},
                self.exact_to,
            )
        return TensorElement(
            self.ctx,
            self.arity,
            {k: c * s for k, c in self.terms.items()},
            min(self.exact_to, s.exact_to),
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TensorElement):
            return NotImplemented
        self._check(other)
        ctx = self.ctx
        acc = {}
        exact = min(self.exact_to, other.exact_to)
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                c = ca * cb
                if c.is_zero():
                    exact = min(exact, c.exact_to)
                    continue
                h = ctx.work_order - c.valuation()
                slot_elems = [
                    ctx.normal_order_word(wa + wb, h) for wa, wb in zip(ka, kb)
                ]
                for e in slot_elems:
                    exact = min(exact, e.exact_to)
                # distribute the per-slot expansions
                partial = {(): c}
                for e in slot_elems:
                    nxt = {}
                    for key, cc in partial.items():
                        for w, cw in e.terms.items():
                            prod = cc * cw
                            if prod.is_zero():
                                exact = min(exact, prod.exact_to)
                                continue
                            k2 = key + (w,)
                            cur = nxt.get(k2)
                            nxt[k2] = prod if cur is None else cur + prod
                    partial = nxt
                for key, cc in partial.items():
                    cur = acc.get(key)
                    acc[key] = cc if cur is None else cur + cc
        return TensorElement(ctx, self.arity, acc, exact)

    __rmul__ = __mul__

    def swap(self, i=0, j=1):
        """Exchange two slots (the op form of the opposite coproduct)."""
        acc = {}
        for key, c in self.terms.items():
            k = list(key)
            k[i], k[j] = k[j], k[i]
            k = tuple(k)
            cur = acc.get(k)
            acc[k] = c if cur is None else cur + c
        return TensorElement(self.ctx, self.arity, acc, self.exact_to)

    def embed(self, arity, slots):
        """Place this element's slots at the given positions of a wider tensor,
        unit words elsewhere.  slots is a tuple like (0, 2) for R13."""
        if len(slots) != self.arity:
            raise ArityMismatch("embed needs one target slot per existing slot")
        acc = {}
        for key, c in self.terms.items():
            k = [()] * arity
            for pos, w in zip(slots, key):
                k[pos] = w
            k = tuple(k)
            cur = acc.get(k)
            acc[k] = c if cur is None else cur + c
        return TensorElement(self.ctx, arity, acc, self.exact_to)

    def is_zero_at(self, n=None):
        n = self.ctx.order if n is None else n
        if n > self.exact_to:
            raise PrecisionLoss(
                f"zero test at order {n} but tensor exact only to {self.exact_to}"
            )
        return all(c.is_zero_through(n) for c in self.terms.values())

    def eq_at(self, other, n=None):
        return (self - other).is_zero_at(n)

    def render(self, n=None):
        n = self.ctx.order if n is None else n
        bits = []
        for key in sorted(self.terms, key=lambda k: (sum(len(w) for w in k), k)):
            c = self.terms[key].truncate(min(n, self.terms[key].exact_to))
            if c.is_zero():
                continue
            slots = " (x) ".join(
                "*".join(self.ctx.generators[i] for i in w) if w else "1"
                for w in key
            )
            bits.append(f"({c.render(self.ctx.deformation)})*[{slots}]")
        return " + ".join(bits) if bits else "0"

    def __repr__(self):
        return f"TensorElement<{self.ctx.name}@{self.arity}>({self.render()})"


def exp_tensor(x):
    """exp of a tensor element whose coefficients all carry the parameter."""
    vals = [c.valuation() for c in x.terms.values()]
    vals = [v for v in vals if v is not None]
    if vals and min(vals) < 1:
        raise NonNilpotentArgument("tensor exp needs valuation >= 1")
    out = TensorElement.unit(x.ctx, x.arity) + x
    p = x
    for k in range(2, x.ctx.work_order + 1):
        p = p * x
        if not p.terms:
            break
        out = out + p.scale(F(1, math.factorial(k)))
    out.exact_to = min(out.exact_to, x.exact_to)
    return out


def tensor_extend(images, elem, arity=2):
    """Extend a generator assignment multiplicatively over an element.

    images maps generator index -> TensorElement (e.g. a coproduct); words
    map to ordered products of their letters' images; the unit maps to the
    tensor unit.  This is how Delta is applied to anything non-generator.
    """
    ctx = elem.ctx
    cache = {(): TensorElement.unit(ctx, arity)}

    def extend_word(word):
        got = cache.get(word)
        if got is not None:
            return got
        head, last = word[:-1], word[-1]
        if last not in images:
            raise UnmappedGenerator(
                f"no tensor image for generator {ctx.generators[last]!r}"
            )
        out = extend_word(head) * images[last]
        cache[word] = out
        return out

    total = TensorElement.zero(ctx, arity)
    for w, c in elem.terms.items():
        total = total + extend_word(w).scale(c)
    return total


# -- expression domains ----------------------------------------------------------


class NCDomain:
    """Evaluates expression ASTs to NCElements of one context.

    Symbols resolve to generators, the deformation parameter, or caller
    extras (already-built elements).  Division is by scalar series only:
    a unit, or the parameter times a unit, with exact_to bookkeeping.
    """

    def __init__(self, ctx, extra=None):
        self.ctx = ctx
        self.extra = dict(extra or {})

    def number(self, q):
        return self.ctx.from_scalar(self.ctx.scalar(q))

    def symbol(self, name):
        if name in self.extra:
            return self.extra[name]
        if name in self.ctx.index:
            return self.ctx.gen(name)
        if name == self.ctx.deformation:
            return self.ctx.from_scalar(self.ctx.param())
        raise UnknownGenerator(f"{name!r} unknown in {self.ctx.name}")

    def add(self, a, b):
        return self._join(a, b, lambda x, y: x + y)

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return self._join(a, b, lambda x, y: x * y)

    def _join(self, a, b, op):
        if isinstance(a, TensorElement) or isinstance(b, TensorElement):
            a = self._to_tensor(a, b)
            b = self._to_tensor(b, a)
            return op(a, b)
        return op(a, b)

    def _to_tensor(self, v, peer):
        if isinstance(v, TensorElement):
            return v
        arity = peer.arity if isinstance(peer, TensorElement) else 2
        if not v.is_scalar():
            raise ArityMismatch(
                "only scalar factors can multiply a tensor expression"
            )
        return TensorElement.unit(self.ctx, arity).scale(v.scalar_part())

    def div(self, a, b):
        if isinstance(b, TensorElement):
            raise ArityMismatch("division by a tensor is not defined")
        if not b.is_scalar():
            raise NotAUnit("division is only by scalar series")
        s = b.scalar_part()
        v = s.valuation()
        if v is None:
            raise ZeroDivisionError("division by the zero series")
        if v > 0:
            s = s.shift_down(v)
        inv = s.inverse()
        if isinstance(a, TensorElement):
            if v:
                raise NotDivisible("tensor division by the parameter is unsupported")
            return a.scale(inv)
        if v:
            # shift the numerator first so only the monomial part costs precision
            a = NCElement(
                a.ctx,
                {w: c.shift_down(v) for w, c in a.terms.items()},
                a.exact_to - v,
            )
        return a.scale(inv)

    def pow(self, base, exp):
        if isinstance(base, TensorElement):
            if exp.denominator != 1 or exp < 0:
                raise ArityMismatch("tensor powers take non-negative integers")
            out = TensorElement.unit(self.ctx, base.arity)
            for _ in range(int(exp)):
                out = out * base
            return out
        return power(base, exp)

    def call(self, name, args):
        if name == "exp":
            (x,) = args
            if isinstance(x, TensorElement):
                return exp_tensor(x)
            return exp_element(x)
        if name == "log":
            (x,) = args
            if isinstance(x, TensorElement):
                raise ArityMismatch("log of a tensor is not defined")
            return log_one_plus(x - self.ctx.one())
        if name == "tensor":
            for a in args:
                if isinstance(a, TensorElement):
                    raise ArityMismatch("tensor slots must be algebra elements")
            return TensorElement.of(*args)
        raise UnknownGenerator(f"unknown call {name!r}")
