"""Load, validate, and serialize the identity catalog.

The catalog is a set of TOML files, each holding an [[entries]] array.
Every entry carries:

    id          unique slug, referenced by other entries and the CLI
    kind        one of KINDS below
    paper_label two-letter tag of the identity in the source text
                (empty for derived helper entries)
    extra_labels  further tags the same entry's definition incorporates
    source_text the identity as transcribed, math only
    definition  kind-specific table; all math is stored as expression
                strings in the shared grammar (see exprs)

Definition layouts by kind:

    presentation  generators (PBW order), deformation symbol, brackets
                  "A,B" -> expr, coproducts gen -> tensor expr, central
                  list (zero brackets filled in), optional macros,
                  rmatrix {factors, classical_r}, grouplike
                  {base, exponents}
    twist         defines/inside presentation ids, images (one per
                  generator of `defines`, written in `inside`), optional
                  inverse, equivalent_to, composition_of
    contraction   source/target presentation ids, param_rule
                  {coeff, eps_power} with old = coeff*eps^power * new,
                  assignments target gen -> {gen, coeff, eps_power}
    embedding     sub/big presentation ids, param_scale (sub parameter =
                  param_scale * big parameter), images per sub generator
    realization   algebra id, operators gen -> difference-operator expr
                  over x, t, dx, dt, Tx, Tt, sigma, tau, m
    casimir       algebra id, element expr, realized_by realization id ->
                  operator expr, central_with gens, scaling gen -> const
    symmetry      realization id, casimir id, table gen -> multiplier
                  operator expr ("0" for plain commutation)
    screen        operator expr, family key for the solution family,
                  optional realization/casimir ids

Entries are validated on load: unknown fields and kinds are rejected,
every expression must parse, generator references must resolve, bracket
tables must cover all pairs, and cross-entry ids must exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError, UnknownEntry, ValidationFailed
from .exprs import ParseError, parse, symbols_of
from .ncalg import AlgebraContext

F = Fraction

KINDS = (
    "presentation",
    "twist",
    "contraction",
    "embedding",
    "realization",
    "casimir",
    "symmetry",
    "screen",
)

OPERATOR_SYMBOLS = frozenset(
    {"x", "t", "dx", "dt", "Tx", "Tt", "sigma", "tau", "m"}
)

FAMILIES = ("space_geometric", "time_geometric", "both_geometric")

# every identity tag, in source order
ALL_LABELS = (
    "aaa", "aa", "ab",
    "ba", "bb", "eb", "bc", "bd", "be", "bf", "bg", "bh",
    "ca", "cb", "cc", "cd",
    "da", "db", "dc", "dd", "de",
    "fa", "fb", "fc", "fe", "fg",
    "ac", "ad", "ae",
    "ga", "gb", "gc", "gd", "ge", "gf", "gg",
    "ha", "hb", "hc", "hd", "he", "hf", "hg", "hi", "hk",
    "ia", "ib",
    "ja", "jb", "jc", "jd", "je", "jf", "jg",
    "ka", "kb", "kc", "kd", "ke", "kf", "kg",
    "la", "lb", "lc",
)

# tags that no entry implements directly, with the reason
UNCHECKED_LABELS = {
    "ae": "generic symmetry-operator condition; operationalized by every"
    " symmetry-table check",
}

# central-generator quotients that collapse one algebra onto another:
# (source id, target id, images of source generators in the target)
DIAGRAM_QUOTIENTS = (
    (
        "uz_gl2_ca",
        "uz_sl2_bc",
        {"I": "0", "Jm": "Jm", "J3": "J3", "Jp": "Jp"},
    ),
    (
        "gl2_twist_cd",
        "sl2_twist_bf",
        {"cI": "0", "cJm": "cJm", "cJ3": "cJ3", "cJp": "cJp"},
    ),
    (
        "uz_h4_fb",
        "uz_poincare_db",
        {"M": "0", "Am": "Pm", "N": "K", "Ap": "Pp"},
    ),
    (
        "h4_twist_fg",
        "poincare_twist_de",
        {"cM": "0", "cAm": "cPm", "cN": "cK", "cAp": "cPp"},
    ),
)


@dataclass(frozen=True)
class Entry:
    id: str
    kind: str
    paper_label: str
    extra_labels: tuple
    source_text: str
    definition: dict

    def labels(self):
        out = []
        if self.paper_label:
            out.append(self.paper_label)
        out.extend(self.extra_labels)
        return tuple(out)


class Catalog:
    def __init__(self, entries):
        self._entries = {}
        for e in entries:
            if e.id in self._entries:
                raise ValidationFailed(f"duplicate entry id {e.id!r}")
            self._entries[e.id] = e
        self._ctx_cache = {}
        _cross_validate(self._entries)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def ids(self, kind=None):
        return [
            e.id for e in self._entries.values() if kind is None or e.kind == kind
        ]

    def get(self, entry_id):
        try:
            return self._entries[entry_id]
        except KeyError:
            raise UnknownEntry(f"no catalog entry {entry_id!r}") from None

    def context(self, entry_id, order, *, pad=2, degree_cap=12, fuel=10**6):
        """AlgebraContext for a presentation entry, cached per options."""
        e = self.get(entry_id)
        if e.kind != "presentation":
            raise UnknownEntry(f"{entry_id!r} is a {e.kind}, not a presentation")
        key = (entry_id, order, pad, degree_cap, fuel)
        ctx = self._ctx_cache.get(key)
        if ctx is not None:
            return ctx
        d = e.definition
        macros = d.get("macros")
        brackets = {}
        for pair, text in d.get("brackets", {}).items():
            a, b = (s.strip() for s in pair.split(","))
            brackets[(a, b)] = parse(text, macros=macros)
        for c in d.get("central", ()):
            for g in d["generators"]:
                if g != c and (g, c) not in brackets and (c, g) not in brackets:
                    brackets[(c, g)] = ("num", F(0))
        ctx = AlgebraContext(
            e.id,
            d["generators"],
            brackets,
            order,
            deformation=d["deformation"],
            macros=macros,
            pad=pad,
            degree_cap=degree_cap,
            fuel=fuel,
        )
        self._ctx_cache[key] = ctx
        return ctx

    def coverage(self):
        """Which tags are implemented by which entries, and what is missing."""
        by_label = {}
        for e in self:
            for lab in e.labels():
                by_label.setdefault(lab, []).append(e.id)
        missing = [
            lab
            for lab in ALL_LABELS
            if lab not in by_label and lab not in UNCHECKED_LABELS
        ]
        unknown = sorted(set(by_label) - set(ALL_LABELS))
        return {
            "labels": by_label,
            "missing": missing,
            "unknown": unknown,
            "unchecked": dict(UNCHECKED_LABELS),
        }


# -- loading -------------------------------------------------------------------


def data_dir():
    return resources.files("twistcheck") / "data"


def load_catalog(path=None):
    """Load all *.toml files from a directory (default: the packaged data)."""
    root = data_dir() if path is None else path
    entries = []
    files = sorted(f.name for f in root.iterdir() if f.name.endswith(".toml"))
    if not files:
        raise ConfigError(f"no catalog files under {root}")
    for name in files:
        raw = (root / name).read_bytes()
        try:
            doc = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
        for i, item in enumerate(doc.get("entries", [])):
            entries.append(_validate_entry(item, f"{name}[{i}]"))
    return Catalog(entries)


def load_catalog_text(text):
    doc = tomllib.loads(text)
    return Catalog(
        [
            _validate_entry(item, f"<text>[{i}]")
            for i, item in enumerate(doc.get("entries", []))
        ]
    )


def _fail(loc, msg):
    raise ValidationFailed(msg, location=loc)


def _require(cond, loc, msg):
    if not cond:
        _fail(loc, msg)


def _parse_checked(text, loc, macros=None, allowed=None):
    try:
        node = parse(text, macros=macros)
    except ParseError as exc:
        _fail(loc, f"bad expression {text!r}: {exc}")
    if allowed is not None:
        stray = symbols_of(node) - set(allowed)
        _require(not stray, loc, f"unknown symbols {sorted(stray)} in {text!r}")
    return node


def _rational(text, loc):
    try:
        return F(text)
    except (ValueError, ZeroDivisionError):
        _fail(loc, f"not a rational constant: {text!r}")


def _validate_entry(item, loc):
    _require(isinstance(item, dict), loc, "entry must be a table")
    known = {"id", "kind", "paper_label", "extra_labels", "source_text", "definition"}
    stray = set(item) - known
    _require(not stray, loc, f"unknown fields {sorted(stray)}")
    for field in ("id", "kind", "source_text"):
        _require(
            isinstance(item.get(field), str) and item[field],
            loc,
            f"missing or empty {field}",
        )
    label = item.get("paper_label", "")
    _require(isinstance(label, str), loc, "paper_label must be a string")
    extra = item.get("extra_labels", [])
    _require(
        isinstance(extra, list) and all(isinstance(s, str) and s for s in extra),
        loc,
        "extra_labels must be a list of tags",
    )
    kind = item["kind"]
    _require(kind in KINDS, loc, f"unknown kind {kind!r}")
    d = item.get("definition")
    _require(isinstance(d, dict), loc, "missing definition table")
    loc = f"{loc}:{item['id']}"
    _VALIDATORS[kind](d, loc)
    return Entry(
        id=item["id"],
        kind=kind,
        paper_label=label,
        extra_labels=tuple(extra),
        source_text=item["source_text"],
        definition=d,
    )


def _check_fields(d, loc, required, optional=()):
    stray = set(d) - set(required) - set(optional)
    _require(not stray, loc, f"unknown definition fields {sorted(stray)}")
    for f in required:
        _require(f in d, loc, f"missing definition field {f!r}")


def _str_map(v, loc, what):
    _require(
        isinstance(v, dict)
        and all(isinstance(k, str) and isinstance(s, str) for k, s in v.items()),
        loc,
        f"{what} must map names to expression strings",
    )
    return v


def _validate_presentation(d, loc):
    _check_fields(
        d,
        loc,
        required=("generators", "deformation", "brackets", "coproducts"),
        optional=("central", "macros", "rmatrix", "grouplike"),
    )
    gens = d["generators"]
    _require(
        isinstance(gens, list)
        and len(gens) >= 2
        and len(set(gens)) == len(gens)
        and all(isinstance(g, str) for g in gens),
        loc,
        "generators must be a list of unique names",
    )
    dz = d["deformation"]
    _require(isinstance(dz, str) and dz not in gens, loc, "bad deformation symbol")
    macros = d.get("macros")
    if macros is not None:
        _str_map(macros, loc, "macros")
    allowed = set(gens) | {dz}
    covered = set()
    for pair, text in _str_map(d["brackets"], loc, "brackets").items():
        names = [s.strip() for s in pair.split(",")]
        _require(
            len(names) == 2 and all(n in gens for n in names) and names[0] != names[1],
            loc,
            f"bracket key {pair!r} must name two distinct generators",
        )
        key = frozenset(names)
        _require(key not in covered, loc, f"duplicate bracket for {pair!r}")
        covered.add(key)
        _parse_checked(text, loc, macros=macros, allowed=allowed)
    central = d.get("central", [])
    _require(
        isinstance(central, list) and all(c in gens for c in central),
        loc,
        "central must list generators",
    )
    for a in gens:
        for b in gens:
            if a >= b:
                continue
            if frozenset((a, b)) not in covered:
                _require(
                    a in central or b in central,
                    loc,
                    f"no bracket given for pair ({a},{b})",
                )
    cops = _str_map(d["coproducts"], loc, "coproducts")
    _require(
        set(cops) == set(gens),
        loc,
        "coproducts must cover exactly the generator list",
    )
    for g, text in cops.items():
        _parse_checked(text, loc, macros=macros, allowed=allowed)
    rm = d.get("rmatrix")
    if rm is not None:
        _check_fields(rm, loc, required=("factors", "classical_r"))
        _require(
            isinstance(rm["factors"], list) and rm["factors"],
            loc,
            "rmatrix.factors must be a non-empty list",
        )
        for text in rm["factors"]:
            _parse_checked(text, loc, macros=macros, allowed=allowed)
        _parse_checked(rm["classical_r"], loc, macros=macros, allowed=allowed)
    gl = d.get("grouplike")
    if gl is not None:
        _check_fields(gl, loc, required=("base", "exponents"))
        _parse_checked(gl["base"], loc, macros=macros, allowed=allowed)
        _require(
            isinstance(gl["exponents"], list) and gl["exponents"],
            loc,
            "grouplike.exponents must be a non-empty list",
        )
        for e in gl["exponents"]:
            _rational(e, loc)


def _validate_twist(d, loc):
    _check_fields(
        d,
        loc,
        required=("defines", "inside", "images"),
        optional=("inverse", "equivalent_to", "composition_of", "macros"),
    )
    for f in ("defines", "inside"):
        _require(isinstance(d[f], str), loc, f"{f} must be an entry id")
    macros = d.get("macros")
    if macros is not None:
        _str_map(macros, loc, "macros")
    for g, text in _str_map(d["images"], loc, "images").items():
        _parse_checked(text, loc, macros=macros)
    if "inverse" in d:
        for g, text in _str_map(d["inverse"], loc, "inverse").items():
            _parse_checked(text, loc, macros=macros)
    if "equivalent_to" in d:
        _require(isinstance(d["equivalent_to"], str), loc, "equivalent_to is an id")
    if "composition_of" in d:
        v = d["composition_of"]
        _require(
            isinstance(v, list) and len(v) == 2 and all(isinstance(s, str) for s in v),
            loc,
            "composition_of must list two twist ids, applied right after left",
        )


def _validate_contraction(d, loc):
    _check_fields(d, loc, required=("source", "target", "param_rule", "assignments"))
    for f in ("source", "target"):
        _require(isinstance(d[f], str), loc, f"{f} must be an entry id")
    pr = d["param_rule"]
    _check_fields(pr, loc, required=("coeff", "eps_power"))
    _require(
        _rational(pr["coeff"], loc) != 0, loc, "param_rule.coeff must be nonzero"
    )
    _require(
        isinstance(pr["eps_power"], int) and pr["eps_power"] >= 0,
        loc,
        "param_rule.eps_power must be a non-negative integer",
    )
    asg = d["assignments"]
    _require(isinstance(asg, dict) and asg, loc, "assignments must be a table")
    for g, rule in asg.items():
        _check_fields(rule, f"{loc}.{g}", required=("gen", "coeff", "eps_power"))
        _require(isinstance(rule["gen"], str), loc, "assignment gen must be a name")
        _require(
            _rational(rule["coeff"], loc) != 0, loc, "assignment coeff must be nonzero"
        )
        _require(
            isinstance(rule["eps_power"], int) and rule["eps_power"] >= 0,
            loc,
            "assignment eps_power must be a non-negative integer",
        )


def _validate_embedding(d, loc):
    _check_fields(d, loc, required=("sub", "big", "param_scale", "images"))
    for f in ("sub", "big"):
        _require(isinstance(d[f], str), loc, f"{f} must be an entry id")
    _require(
        _rational(d["param_scale"], loc) != 0, loc, "param_scale must be nonzero"
    )
    for g, text in _str_map(d["images"], loc, "images").items():
        _parse_checked(text, loc)


def _validate_realization(d, loc):
    _check_fields(d, loc, required=("algebra", "operators"), optional=("macros",))
    _require(isinstance(d["algebra"], str), loc, "algebra must be an entry id")
    macros = d.get("macros")
    if macros is not None:
        _str_map(macros, loc, "macros")
    for g, text in _str_map(d["operators"], loc, "operators").items():
        _parse_checked(text, loc, macros=macros, allowed=OPERATOR_SYMBOLS)


def _validate_casimir(d, loc):
    _check_fields(
        d,
        loc,
        required=("algebra", "element", "realized_by"),
        optional=("central_with", "scaling", "macros"),
    )
    _require(isinstance(d["algebra"], str), loc, "algebra must be an entry id")
    macros = d.get("macros")
    _parse_checked(d["element"], loc, macros=macros)
    for rid, text in _str_map(d["realized_by"], loc, "realized_by").items():
        _parse_checked(text, loc, allowed=OPERATOR_SYMBOLS)
    cw = d.get("central_with", [])
    _require(
        isinstance(cw, list) and all(isinstance(g, str) for g in cw),
        loc,
        "central_with must list generators",
    )
    for g, text in d.get("scaling", {}).items():
        _rational(text, loc)


def _validate_symmetry(d, loc):
    _check_fields(d, loc, required=("realization", "casimir", "table"))
    for f in ("realization", "casimir"):
        _require(isinstance(d[f], str), loc, f"{f} must be an entry id")
    for g, text in _str_map(d["table"], loc, "table").items():
        _parse_checked(text, loc, allowed=OPERATOR_SYMBOLS)


def _validate_screen(d, loc):
    _check_fields(
        d, loc, required=("operator", "family"), optional=("realization", "casimir")
    )
    _parse_checked(d["operator"], loc, allowed=OPERATOR_SYMBOLS)
    _require(d["family"] in FAMILIES, loc, f"family must be one of {FAMILIES}")


_VALIDATORS = {
    "presentation": _validate_presentation,
    "twist": _validate_twist,
    "contraction": _validate_contraction,
    "embedding": _validate_embedding,
    "realization": _validate_realization,
    "casimir": _validate_casimir,
    "symmetry": _validate_symmetry,
    "screen": _validate_screen,
}


def _cross_validate(entries):
    def presentation(eid, loc):
        _require(eid in entries, loc, f"unknown entry {eid!r}")
        _require(
            entries[eid].kind == "presentation",
            loc,
            f"{eid!r} must be a presentation",
        )
        return entries[eid]

    for e in entries.values():
        d, loc = e.definition, e.id
        if e.kind == "twist":
            defined = presentation(d["defines"], loc)
            inside = presentation(d["inside"], loc)
            _require(
                set(d["images"]) == set(defined.definition["generators"]),
                loc,
                "images must cover the defined presentation's generators",
            )
            for g, text in d["images"].items():
                node = parse(text, macros=d.get("macros"))
                allowed = set(inside.definition["generators"]) | {
                    inside.definition["deformation"]
                }
                stray = symbols_of(node) - allowed
                _require(not stray, loc, f"image of {g} uses unknown {sorted(stray)}")
            if "inverse" in d:
                _require(
                    set(d["inverse"]) == set(inside.definition["generators"]),
                    loc,
                    "inverse must cover the inside presentation's generators",
                )
            if "equivalent_to" in d:
                other = entries.get(d["equivalent_to"])
                _require(
                    other is not None and other.kind == "twist",
                    loc,
                    "equivalent_to must name a twist",
                )
            if "composition_of" in d:
                for t in d["composition_of"]:
                    _require(
                        t in entries and entries[t].kind == "twist",
                        loc,
                        f"composition_of names unknown twist {t!r}",
                    )
        elif e.kind == "contraction":
            src = presentation(d["source"], loc)
            tgt = presentation(d["target"], loc)
            _require(
                set(d["assignments"]) == set(tgt.definition["generators"]),
                loc,
                "assignments must cover the target generators",
            )
            for g, rule in d["assignments"].items():
                _require(
                    rule["gen"] in src.definition["generators"],
                    loc,
                    f"assignment for {g} names unknown source generator",
                )
        elif e.kind == "embedding":
            sub = presentation(d["sub"], loc)
            big = presentation(d["big"], loc)
            _require(
                set(d["images"]) == set(sub.definition["generators"]),
                loc,
                "images must cover the sub presentation's generators",
            )
            allowed = set(big.definition["generators"]) | {
                big.definition["deformation"]
            }
            for g, text in d["images"].items():
                stray = symbols_of(parse(text)) - allowed
                _require(not stray, loc, f"image of {g} uses unknown {sorted(stray)}")
        elif e.kind == "realization":
            alg = presentation(d["algebra"], loc)
            _require(
                set(d["operators"]) == set(alg.definition["generators"]),
                loc,
                "operators must cover the algebra's generators",
            )
        elif e.kind == "casimir":
            alg = presentation(d["algebra"], loc)
            allowed = set(alg.definition["generators"]) | {
                alg.definition["deformation"]
            }
            stray = (
                symbols_of(parse(d["element"], macros=d.get("macros"))) - allowed
            )
            _require(not stray, loc, f"element uses unknown symbols {sorted(stray)}")
            for rid in d["realized_by"]:
                _require(
                    rid in entries and entries[rid].kind == "realization",
                    loc,
                    f"realized_by names unknown realization {rid!r}",
                )
                _require(
                    entries[rid].definition["algebra"] == d["algebra"],
                    loc,
                    f"realization {rid!r} is for a different algebra",
                )
            gens = set(alg.definition["generators"])
            _require(
                set(d.get("central_with", [])) <= gens,
                loc,
                "central_with must list algebra generators",
            )
            _require(
                set(d.get("scaling", {})) <= gens,
                loc,
                "scaling must map algebra generators",
            )
        elif e.kind == "symmetry":
            _require(
                d["realization"] in entries
                and entries[d["realization"]].kind == "realization",
                loc,
                "realization must name a realization entry",
            )
            _require(
                d["casimir"] in entries and entries[d["casimir"]].kind == "casimir",
                loc,
                "casimir must name a casimir entry",
            )
            alg = entries[entries[d["realization"]].definition["algebra"]]
            _require(
                set(d["table"]) == set(alg.definition["generators"]),
                loc,
                "table must cover the algebra's generators",
            )
        elif e.kind == "screen":
            for f in ("realization", "casimir"):
                if f in d:
                    _require(
                        d[f] in entries and entries[d[f]].kind == f,
                        loc,
                        f"{f} must name a {f} entry",
                    )

    for src_id, tgt_id, images in DIAGRAM_QUOTIENTS:
        if src_id in entries and tgt_id in entries:
            src = entries[src_id].definition
            _require(
                set(images) == set(src["generators"]),
                src_id,
                "quotient images must cover the source generators",
            )


# -- serialization ---------------------------------------------------------------


def _toml_str(s):
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{out}"'


def _toml_key(k):
    if k and all(c.isalnum() or c in "-_" for c in k):
        return k
    return _toml_str(k)


def _is_inline(v):
    return isinstance(v, dict) and all(
        isinstance(x, (str, int, bool)) for x in v.values()
    ) and len(v) <= 4


def _inline(v):
    if isinstance(v, str):
        return _toml_str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{_toml_key(k)} = {_inline(x)}" for k, x in v.items())
        return "{ " + inner + " }"
    raise ValidationFailed(f"cannot serialize value of type {type(v).__name__}")


def _emit_table(lines, path, table):
    scalars = {
        k: v
        for k, v in table.items()
        if not isinstance(v, dict) or _is_inline(v)
    }
    subtables = {k: v for k, v in table.items() if k not in scalars}
    for k, v in scalars.items():
        lines.append(f"{_toml_key(k)} = {_inline(v)}")
    for k, v in subtables.items():
        lines.append("")
        lines.append(f"[{path}.{_toml_key(k)}]")
        _emit_table(lines, f"{path}.{_toml_key(k)}", v)


def serialize_catalog(catalog):
    """One TOML document with all entries, loadable by load_catalog_text."""
    lines = []
    for e in catalog:
        lines.append("[[entries]]")
        lines.append(f"id = {_toml_str(e.id)}")
        lines.append(f"kind = {_toml_str(e.kind)}")
        lines.append(f"paper_label = {_toml_str(e.paper_label)}")
        if e.extra_labels:
            lines.append(f"extra_labels = {_inline(list(e.extra_labels))}")
        lines.append(f"source_text = {_toml_str(e.source_text)}")
        lines.append("")
        lines.append("[entries.definition]")
        _emit_table(lines, "entries.definition", e.definition)
        lines.append("")
    return "\n".join(lines)
