"""Exact algebra of difference-differential operators on functions of (x, t).

An operator is a finite sum of canonical terms

    c * sigma^i tau^j m^k  *  x^a t^b  Tx^r Tt^s  dx^p dt^q

with rational c, integer parameter exponents (negative allowed, so 1/sigma
is a coefficient, not a limit), multiplication operators on the left,
shifts in the middle, derivatives on the right.  Composition normal-orders
against the exact relations

    dx x = x dx + 1        Tx x = (x + sigma) Tx
    dt t = t dt + 1        Tt t = (t + tau)  Tt

and every cross pair commutes.  There is no series truncation anywhere:
operator identities are decided by equality of canonical forms, and the
shift expansion Tx = sum sigma^n dx^n / n! is applied only on demand, to a
stated parameter degree, for continuum limits and series cross-checks.
"""

from fractions import Fraction
from math import comb, factorial, perm

from .errors import (
    NotDivisible,
    PrecisionLoss,
    UnknownEntry,
    UnknownGenerator,
    UnresolvedExponential,
    ValidationFailed,
)
from .exprs import evaluate, parse
from .hopf import Check
from .ncalg import commutator

F = Fraction

# key layout of one canonical term
#   (a, b, r, s, p, q, es, et, em)
#    x  t  Tx Tt dx dt sigma tau m
_UNIT = (0, 0, 0, 0, 0, 0, 0, 0, 0)

# (sigma-or-tau, m) bindings every realized identity is confirmed at
SAMPLES = ((F(1, 2), F(1, 2)), (F(1, 3), F(1)), (F(1, 5), F(3, 2)))


class DiffDiffOperator:
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = {k: c for k, c in terms.items() if c != 0}

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def scalar(cls, c):
        return cls({_UNIT: F(c)})

    @classmethod
    def term(cls, c, **exps):
        key = [0] * 9
        for name, e in exps.items():
            key["a b r s p q es et em".split().index(name)] = e
        return cls({tuple(key): F(c)})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DiffDiffOperator):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other):
        if isinstance(other, (int, F)):
            other = DiffDiffOperator.scalar(other)
        if not isinstance(other, DiffDiffOperator):
            return NotImplemented
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0) + c
        return DiffDiffOperator(acc)

    __radd__ = __add__

    def __neg__(self):
        return DiffDiffOperator({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, F)):
            other = DiffDiffOperator.scalar(other)
        if not isinstance(other, DiffDiffOperator):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, F)):
            return DiffDiffOperator(
                {k: c * other for k, c in self.terms.items()}
            )
        if not isinstance(other, DiffDiffOperator):
            return NotImplemented
        acc = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                _mul_terms(k1, c1, k2, c2, acc)
        return DiffDiffOperator(acc)

    def __rmul__(self, other):
        if isinstance(other, (int, F)):
            return self * other
        return NotImplemented

    def subs(self, sigma=None, tau=None, m=None):
        """Bind parameters to rationals; unbound ones stay symbolic."""
        values = (sigma, tau, m)
        acc = {}
        for k, c in self.terms.items():
            k = list(k)
            for slot, v in enumerate(values, start=6):
                if v is not None and k[slot]:
                    c *= F(v) ** k[slot]
                    k[slot] = 0
            k = tuple(k)
            acc[k] = acc.get(k, 0) + c
        return DiffDiffOperator(acc)

    def param_span(self):
        """Smallest and largest total degree in (sigma, tau) over all terms."""
        degs = [k[6] + k[7] for k in self.terms]
        return (min(degs), max(degs)) if degs else (0, 0)

    def expand_shifts(self, order):
        """Replace every shift by its derivative series, keeping terms of
        total (sigma, tau)-degree at most `order`.  Degrees below zero are
        kept too: their survival is exactly what a continuum check must
        see, so they are never silently dropped.
        """
        acc = {}
        for (a, b, r, s, p, q, es, et, em), c in self.terms.items():
            budget = order - es - et
            if budget < 0:
                continue
            for i in range(budget + 1) if r else (0,):
                ci = c * F(r) ** i / factorial(i)
                for j in range(budget - i + 1) if s else (0,):
                    k = (a, b, 0, 0, p + i, q + j, es + i, et + j, em)
                    acc[k] = acc.get(k, 0) + ci * F(s) ** j / factorial(j)
        return DiffDiffOperator(acc)

    def render(self):
        if not self.terms:
            return "0"
        names = ("x", "t", "Tx", "Tt", "dx", "dt", "sigma", "tau", "m")
        out = ""
        for k in sorted(self.terms):
            c = self.terms[k]
            mag = abs(c)
            parts = [] if mag == 1 else [str(mag)]
            for slot in (6, 7, 8, 0, 1, 2, 3, 4, 5):
                e = k[slot]
                if e == 0:
                    continue
                parts.append(names[slot] if e == 1 else f"{names[slot]}^{e}")
            body = "*".join(parts) or "1"
            if not out:
                out = f"-{body}" if c < 0 else body
            else:
                out += f" - {body}" if c < 0 else f" + {body}"
        return out

    def __repr__(self):
        return f"DiffDiffOperator({self.render()})"


def _mul_terms(k1, c1, k2, c2, acc):
    # move x^a2 t^b2 of the right term left through the derivatives
    # (Leibniz, falling factorials) and the shifts (argument offset,
    # binomial in r*sigma); everything else commutes and just adds up.
    a1, b1, r1, s1, p1, q1, es1, et1, em1 = k1
    a2, b2, r2, s2, p2, q2, es2, et2, em2 = k2
    c = c1 * c2
    for kx in range(min(p1, a2) + 1):
        cx = c * comb(p1, kx) * perm(a2, kx)
        ax = a2 - kx
        for jx in range(ax + 1):
            ex = ax - jx
            if ex and not r1:
                continue
            cj = cx * comb(ax, jx) * F(r1) ** ex
            for kt in range(min(q1, b2) + 1):
                ct = cj * comb(q1, kt) * perm(b2, kt)
                bt = b2 - kt
                for jt in range(bt + 1):
                    et = bt - jt
                    if et and not s1:
                        continue
                    key = (
                        a1 + jx,
                        b1 + jt,
                        r1 + r2,
                        s1 + s2,
                        p1 - kx + p2,
                        q1 - kt + q2,
                        es1 + es2 + ex,
                        et1 + et2 + et,
                        em1 + em2,
                    )
                    v = ct * comb(bt, jt) * F(s1) ** et
                    acc[key] = acc.get(key, 0) + v


def apply_operator(op, poly, *, sigma=None, tau=None, m=None):
    """Apply an operator to a polynomial {(i, j): coeff} in x and t.

    Exact throughout; parameters that actually occur (in a coefficient,
    or through a shift hitting a positive power) must be bound.
    """

    def need(v, name):
        if v is None:
            raise ValueError(f"parameter {name} occurs but is unbound")
        return F(v)

    out = {}
    for (a, b, r, s, p, q, es, et, em), c in op.terms.items():
        if es:
            c *= need(sigma, "sigma") ** es
        if et:
            c *= need(tau, "tau") ** et
        if em:
            c *= need(m, "m") ** em
        for (i, j), fc in poly.items():
            if p > i or q > j:
                continue
            base = c * fc * perm(i, p) * perm(j, q)
            i2, j2 = i - p, j - q
            for u in range(i2 + 1):
                eu = i2 - u
                if eu and not r:
                    continue
                cu = base * comb(i2, u)
                if eu:
                    cu *= (r * need(sigma, "sigma")) ** eu
                for v in range(j2 + 1):
                    ev = j2 - v
                    if ev and not s:
                        continue
                    cv = cu * comb(j2, v)
                    if ev:
                        cv *= (s * need(tau, "tau")) ** ev
                    key = (a + u, b + v)
                    out[key] = out.get(key, 0) + cv
    return {k: c for k, c in out.items() if c != 0}


# -- expression evaluation --------------------------------------------------------

_COORDS = {
    "x": (1, 0, 0, 0, 0, 0, 0, 0, 0),
    "t": (0, 1, 0, 0, 0, 0, 0, 0, 0),
    "Tx": (0, 0, 1, 0, 0, 0, 0, 0, 0),
    "Tt": (0, 0, 0, 1, 0, 0, 0, 0, 0),
    "dx": (0, 0, 0, 0, 1, 0, 0, 0, 0),
    "dt": (0, 0, 0, 0, 0, 1, 0, 0, 0),
    "sigma": (0, 0, 0, 0, 0, 0, 1, 0, 0),
    "tau": (0, 0, 0, 0, 0, 0, 0, 1, 0),
    "m": (0, 0, 0, 0, 0, 0, 0, 0, 1),
}

_SHIFT_ARGS = {
    (0, 0, 0, 0, 1, 0, 1, 0, 0): (0, 0, 1, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 1, 0, 1, 0): (0, 0, 0, 1, 0, 0, 0, 0, 0),
}


class OpDomain:
    """Evaluates expression ASTs to operators.

    Symbols are the coordinates, shifts, derivatives and parameters, plus
    caller extras (realized generator images, which shadow).  exp is
    recognized only on arguments that are an integer multiple of sigma*dx
    or tau*dt, where it realizes to that power of the matching shift; any
    other exponential has no operator meaning and is a hard error, never
    an approximation.
    """

    def __init__(self, extra=None):
        self.extra = dict(extra or {})

    def number(self, q):
        return DiffDiffOperator.scalar(q)

    def symbol(self, name):
        if name in self.extra:
            return self.extra[name]
        key = _COORDS.get(name)
        if key is None:
            raise UnknownGenerator(f"{name!r} has no operator meaning")
        return DiffDiffOperator({key: F(1)})

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        if b.is_zero():
            raise ZeroDivisionError("operator division by zero")
        if len(b.terms) != 1:
            raise NotDivisible(
                "operator division is only by a single parameter monomial"
            )
        (key, c), = b.terms.items()
        if any(key[:6]):
            raise NotDivisible(f"cannot divide by {b.render()}")
        inv = DiffDiffOperator(
            {key[:6] + (-key[6], -key[7], -key[8]): 1 / c}
        )
        return a * inv

    def pow(self, base, exp):
        if exp.denominator != 1:
            raise UnresolvedExponential(
                f"operator power {exp} is not an integer"
            )
        n = int(exp)
        if n >= 0:
            out = DiffDiffOperator.scalar(1)
            for _ in range(n):
                out = out * base
            return out
        if len(base.terms) != 1:
            raise NotDivisible(f"negative power of {base.render()}")
        (key, c), = base.terms.items()
        a, b, r, s, p, q, es, et, em = key
        if a or b or p or q:
            raise NotDivisible(f"negative power of {base.render()}")
        return DiffDiffOperator(
            {(0, 0, r * n, s * n, 0, 0, es * n, et * n, em * n): c**n}
        )

    def call(self, name, args):
        if name == "exp":
            (v,) = args
            if v.is_zero():
                return DiffDiffOperator.scalar(1)
            if len(v.terms) == 1:
                (key, c), = v.terms.items()
                shift = _SHIFT_ARGS.get(key)
                if shift is not None and c.denominator == 1:
                    return self.pow(DiffDiffOperator({shift: F(1)}), F(c))
            raise UnresolvedExponential(
                f"exp({v.render()}) does not realize to an integer shift power"
            )
        raise UnknownGenerator(f"{name!r} has no operator meaning")


def operator_of(text, macros=None, images=None):
    return evaluate(parse(text, macros=macros), OpDomain(images))


# -- catalog realizations ----------------------------------------------------------


def _entry(cat, entry_id, kind):
    e = cat.get(entry_id)
    if e.kind != kind:
        raise UnknownEntry(f"{entry_id!r} is a {e.kind}, not a {kind}")
    return e


def realize(cat, real_id):
    """Generator -> operator images of a realization entry."""
    d = _entry(cat, real_id, "realization").definition
    macros = d.get("macros")
    return {g: operator_of(text, macros) for g, text in d["operators"].items()}


def _bracket_table(pres):
    """(a, b, rhs ast) for every generator pair, central zeros included."""
    d = pres.definition
    macros = d.get("macros")
    out = []
    seen = set()
    for pair, text in d.get("brackets", {}).items():
        a, b = (s.strip() for s in pair.split(","))
        out.append((a, b, parse(text, macros=macros)))
        seen.add(frozenset((a, b)))
    for c in d.get("central", ()):
        for g in d["generators"]:
            if g != c and frozenset((c, g)) not in seen:
                out.append((c, g, ("num", F(0))))
                seen.add(frozenset((c, g)))
    return out


def _monomials(degree):
    return [
        {(i, j): F(1)}
        for i in range(degree + 1)
        for j in range(degree + 1 - i)
    ]


def _poly_eq(p, q):
    return {k: c for k, c in p.items() if c} == {k: c for k, c in q.items() if c}


def _binding(sample):
    v, mm = sample
    return {"sigma": v, "tau": v, "m": mm}


# -- the discrepancy protocol -------------------------------------------------------


def _term_label(where, key, coeff):
    one = DiffDiffOperator({key: coeff if coeff else F(1)})
    return f"{where}: {one.render()}"


def _fit_delta(r0, r1):
    """delta with r0 + delta*r1 == 0 termwise, or None."""
    if not r1:
        return None
    probe = next(iter(sorted(r1)))
    if probe not in r0:
        return None
    delta = -r0[probe] / r1[probe]
    for k in set(r0) | set(r1):
        if r0.get(k, 0) + delta * r1.get(k, 0) != 0:
            return None
    return delta


def _flatten(residuals):
    out = {}
    for i, r in enumerate(residuals):
        for k, c in r.terms.items():
            out[(i, k)] = c
    return out


def suggest_erratum(candidates, base_residuals, bound=8):
    """Smallest single-coefficient change repairing a failing identity.

    candidates are (label, key, coeff, patched) rows where patched(delta)
    recomputes every residual with that one canonical term's coefficient
    shifted by delta; the patched list must be aligned with the base list.
    The residuals are affine in delta, so one probe at delta=1 determines
    the fix, if any; a repaired coefficient must stay rational with
    denominator at most `bound`.  Returns a report string or "", and the
    change is only ever suggested, never applied.
    """
    r0 = _flatten(base_residuals)
    best = None
    for label, key, coeff, patched in candidates:
        probe = _flatten(patched(F(1)))
        r1 = {}
        for k in set(r0) | set(probe):
            d = probe.get(k, 0) - r0.get(k, 0)
            if d:
                r1[k] = d
        delta = _fit_delta(r0, r1)
        if delta is None or delta == 0:
            continue
        fixed = coeff + delta
        if fixed.denominator > bound:
            continue
        row = (abs(delta), label, coeff, fixed)
        if best is None or row < best:
            best = row
    if best is None:
        return ""
    _, label, coeff, fixed = best
    return (
        f"suspected erratum (not applied): coefficient of [{label}] "
        f"{coeff} -> {fixed}"
    )


def _image_candidates(imgs, names, residuals_with):
    rows = []
    for g in names:
        for key in sorted(imgs[g].terms):
            coeff = imgs[g].terms[key]

            def patched(delta, g=g, key=key):
                changed = dict(imgs)
                changed[g] = imgs[g] + DiffDiffOperator({key: delta})
                return residuals_with(changed)

            rows.append((_term_label(g, key, coeff), key, coeff, patched))
    return rows


# -- verification suites ------------------------------------------------------------


def verify_realization(cat, real_id, presentation_id=None, action_degree=10):
    """The full bracket table as exact operator identities, then sample
    bindings, then action spot-checks (canonical commutator against nested
    application, which must agree even where the identity itself fails).
    """
    entry = _entry(cat, real_id, "realization")
    pid = presentation_id or entry.definition["algebra"]
    pres = _entry(cat, pid, "presentation")
    if set(entry.definition["operators"]) != set(pres.definition["generators"]):
        raise ValidationFailed(
            f"{real_id} does not cover the generators of {pid}", location=real_id
        )
    imgs = realize(cat, real_id)
    table = _bracket_table(pres)

    def residuals_with(images):
        out = []
        for a, b, ast in table:
            rhs = evaluate(ast, OpDomain(images))
            out.append(commutator(images[a], images[b]) - rhs)
        return out

    residuals = residuals_with(imgs)
    bad = [
        (a, b, res)
        for (a, b, _), res in zip(table, residuals)
        if not res.is_zero()
    ]
    erratum = ""
    if bad:
        names = sorted({a for a, _, _ in bad} | {b for _, b, _ in bad})
        erratum = suggest_erratum(
            _image_candidates(imgs, names, residuals_with), residuals
        )
    checks = [
        Check(
            f"{real_id}:brackets",
            not bad,
            "; ".join(f"[{a},{b}] residual {r.render()}" for a, b, r in bad),
            erratum,
        )
    ]

    sample_bad = []
    for sample in SAMPLES:
        kw = _binding(sample)
        for (a, b, _), res in zip(table, residuals):
            if not res.subs(**kw).is_zero():
                sample_bad.append(f"[{a},{b}] at {kw}")
    checks.append(
        Check(f"{real_id}:samples", not sample_bad, "; ".join(sample_bad[:4]))
    )

    kw = _binding(SAMPLES[0])
    route_bad = []
    for (a, b, ast), res in zip(table, residuals):
        rhs = evaluate(ast, OpDomain(imgs))
        for f in _monomials(action_degree):
            direct = apply_operator(res, f, **kw)
            nested = apply_operator(imgs[a], apply_operator(imgs[b], f, **kw), **kw)
            for k, c in apply_operator(
                imgs[b], apply_operator(imgs[a], f, **kw), **kw
            ).items():
                nested[k] = nested.get(k, 0) - c
            for k, c in apply_operator(rhs, f, **kw).items():
                nested[k] = nested.get(k, 0) - c
            if not _poly_eq(direct, nested):
                (i, j), = f
                route_bad.append(f"[{a},{b}] on x^{i}*t^{j}")
                break
    checks.append(
        Check(
            f"{real_id}:monomial-actions",
            not route_bad,
            "; ".join(route_bad),
        )
    )
    return checks


def casimir(cat, real_id, casimir_id):
    """The casimir element pushed through a realization, canonical form."""
    cas = _entry(cat, casimir_id, "casimir")
    real = _entry(cat, real_id, "realization")
    if real.definition["algebra"] != cas.definition["algebra"]:
        raise ValidationFailed(
            f"{real_id} realizes {real.definition['algebra']},"
            f" not {cas.definition['algebra']}",
            location=casimir_id,
        )
    element = parse(cas.definition["element"], macros=cas.definition.get("macros"))
    return evaluate(element, OpDomain(realize(cat, real_id)))


def verify_casimir(cat, casimir_id, order=3):
    """Centrality and scaling at the algebra level (truncated, at `order`),
    then the stated realized form, centrality and scaling as exact operator
    identities under every listed realization.
    """
    cas = _entry(cat, casimir_id, "casimir")
    d = cas.definition
    ctx = cat.context(d["algebra"], order)
    element = parse(d["element"], macros=d.get("macros"))
    e_alg = ctx.parse(element)
    bad = []
    for g in d.get("central_with", ()):
        if not commutator(e_alg, ctx.gen(g)).is_zero_at():
            bad.append(f"[E,{g}] != 0")
    for g, c in d.get("scaling", {}).items():
        if not (commutator(e_alg, ctx.gen(g)) - e_alg.scale(F(c))).is_zero_at():
            bad.append(f"[E,{g}] != {c}E")
    checks = [Check(f"{casimir_id}:abstract", not bad, "; ".join(bad))]

    for rid, stated_text in d["realized_by"].items():
        imgs = realize(cat, rid)
        e_op = evaluate(element, OpDomain(imgs))
        stated = operator_of(stated_text)
        res = e_op - stated
        erratum = ""
        if not res.is_zero():
            rows = []
            for key in sorted(stated.terms):
                coeff = stated.terms[key]

                def patched(delta, key=key):
                    return [e_op - (stated + DiffDiffOperator({key: delta}))]

                rows.append((_term_label("E", key, coeff), key, coeff, patched))
            erratum = suggest_erratum(rows, [res])
        checks.append(
            Check(
                f"{casimir_id}:realizes:{rid}",
                res.is_zero(),
                "" if res.is_zero() else f"residual {res.render()}",
                erratum,
            )
        )

        bad = [
            f"[E,{g}] residual {r.render()}"
            for g in d.get("central_with", ())
            if not (r := commutator(e_op, imgs[g])).is_zero()
        ]
        checks.append(Check(f"{casimir_id}:central:{rid}", not bad, "; ".join(bad)))

        bad = [
            f"[E,{g}] - {c}E residual {r.render()}"
            for g, c in d.get("scaling", {}).items()
            if not (r := commutator(e_op, imgs[g]) - e_op * F(c)).is_zero()
        ]
        checks.append(Check(f"{casimir_id}:scaling:{rid}", not bad, "; ".join(bad)))
    return checks


def verify_symmetry_table(cat, table_id, action_degree=10):
    """[E, O] = Lambda * E for every generator image O, exactly, then the
    same rows confirmed by nested application on monomials.
    """
    entry = _entry(cat, table_id, "symmetry")
    d = entry.definition
    rid = d["realization"]
    cas = _entry(cat, d["casimir"], "casimir")
    imgs = realize(cat, rid)
    e_op = evaluate(
        parse(cas.definition["element"], macros=cas.definition.get("macros")),
        OpDomain(imgs),
    )
    lams = {g: operator_of(text) for g, text in d["table"].items()}
    rows = sorted(d["table"])

    def residuals_with(lams2):
        return [
            commutator(e_op, imgs[g]) - lams2[g] * e_op for g in rows
        ]

    residuals = residuals_with(lams)
    bad = [
        f"[E,{g}] - Lambda*E residual {r.render()}"
        for g, r in zip(rows, residuals)
        if not r.is_zero()
    ]
    erratum = ""
    if bad:
        cands = []
        for g in rows:
            for key in sorted(lams[g].terms):
                coeff = lams[g].terms[key]

                def patched(delta, g=g, key=key):
                    changed = dict(lams)
                    changed[g] = lams[g] + DiffDiffOperator({key: delta})
                    return residuals_with(changed)

                cands.append(
                    (_term_label(f"Lambda[{g}]", key, coeff), key, coeff, patched)
                )
        erratum = suggest_erratum(cands, residuals)
    checks = [Check(f"{table_id}:table", not bad, "; ".join(bad), erratum)]

    kw = _binding(SAMPLES[0])
    route_bad = []
    for g, res in zip(rows, residuals):
        for f in _monomials(action_degree):
            direct = apply_operator(res, f, **kw)
            nested = apply_operator(e_op, apply_operator(imgs[g], f, **kw), **kw)
            for back in (
                apply_operator(imgs[g], apply_operator(e_op, f, **kw), **kw),
                apply_operator(lams[g], apply_operator(e_op, f, **kw), **kw),
            ):
                for k, c in back.items():
                    nested[k] = nested.get(k, 0) - c
            if not _poly_eq(direct, nested):
                route_bad.append(g)
                break
    checks.append(
        Check(
            f"{table_id}:monomial-actions", not route_bad, "; ".join(route_bad)
        )
    )
    return checks


def check_continuum_limit(
    cat, real_id, target_id="real_classical", action_degree=8
):
    """Shift expansion at parameter degree zero against the undeformed
    vector fields, generator by generator; a deformed family's generator g
    matches the target's g or cg.  Negative parameter degrees surviving
    the expansion fail the check rather than being discarded.
    """
    imgs = realize(cat, real_id)
    target = realize(cat, target_id)
    bad = []
    for g in sorted(imgs):
        tname = g if g in target else f"c{g}"
        if tname not in target:
            bad.append(f"{g}: no counterpart {tname!r}")
            continue
        limit = imgs[g].expand_shifts(0)
        stray = [k for k in limit.terms if k[6] + k[7] != 0]
        if stray:
            bad.append(f"{g}: parameter degree survives the limit")
            continue
        if limit != target[tname]:
            bad.append(f"{g}: limit {limit.render()} != {target[tname].render()}")
            continue
        mm = SAMPLES[0][1]
        for f in _monomials(action_degree):
            if not _poly_eq(
                apply_operator(limit, f, m=mm),
                apply_operator(target[tname], f, m=mm),
            ):
                (i, j), = f
                bad.append(f"{g}: actions differ on x^{i}*t^{j}")
                break
    return [Check(f"{real_id}:continuum", not bad, "; ".join(bad))]


def series_oracle(cat, real_id, order=3):
    """Two routes to every realized commutator: the exact operator product
    expanded in the lattice step, against the abstract normal-ordered
    bracket with its basis words pushed through the realization.  Keeping
    both honest through `order` needs extra working precision because the
    images carry inverse parameter powers.
    """
    entry = _entry(cat, real_id, "realization")
    pid = entry.definition["algebra"]
    pres = cat.get(pid)
    imgs = realize(cat, real_id)
    span = min(imgs[g].param_span()[0] for g in imgs)
    ctx = cat.context(pid, order, pad=2 - span * 2)
    slot = 6 if pres.definition["deformation"] == "sigma" else 7
    gens = ctx.generators

    word_ops = {(): DiffDiffOperator.scalar(1)}

    def word_op(w):
        got = word_ops.get(w)
        if got is None:
            got = word_op(w[:-1]) * imgs[gens[w[-1]]]
            word_ops[w] = got
        return got

    bad = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            abstract = commutator(ctx.gen(i), ctx.gen(j))
            mapped = DiffDiffOperator.zero()
            for w, c in abstract.terms.items():
                op = word_op(w)
                need = order - op.param_span()[0]
                if need > c.exact_to:
                    raise PrecisionLoss(
                        f"{real_id}: word needs degree {need},"
                        f" exact only to {c.exact_to}"
                    )
                for k, coeff in enumerate(c.coeffs[: max(need, -1) + 1]):
                    if coeff:
                        key = [0] * 9
                        key[slot] = k
                        mapped = mapped + op * DiffDiffOperator(
                            {tuple(key): coeff}
                        )
            direct = commutator(imgs[gens[i]], imgs[gens[j]])
            if direct.expand_shifts(order) != mapped.expand_shifts(order):
                bad.append(f"[{gens[i]},{gens[j]}]")
    return [Check(f"{real_id}:series-oracle", not bad, "; ".join(bad))]
