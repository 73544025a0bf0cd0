"""Walk one deformed enveloping algebra from its brackets to its limit.

The sl(2) presentation with the sinh bracket is the seed everything else
grows from.  This prints its bracket table order by order, then sets the
deformation parameter to zero and confirms the table collapses to the
classical one.
"""

from twistcheck.catalog import load_catalog
from twistcheck.hopf import check_classical_limit, model


def main():
    cat = load_catalog()
    pid = "uz_sl2_ba"
    entry = cat.get(pid)
    gens = entry.definition["generators"]
    print(f"{pid}: generators {', '.join(gens)}, "
          f"deformation {entry.definition['deformation']}")
    print()

    for order in (1, 2, 4):
        ctx = cat.context(pid, order)
        print(f"brackets truncated at order {order}:")
        for pair in sorted(entry.definition["brackets"]):
            a, b = (s.strip() for s in pair.split(","))
            el = ctx.bracket(gens.index(a), gens.index(b))
            print(f"  [{a}, {b}] = {el.render()}")
        print()

    m = model(cat, pid, 3)
    print("coproducts at order 3:")
    ctx = cat.context(pid, 3)
    for i in sorted(m.deltas):
        print(f"  Delta({ctx.generators[i]}) = {m.deltas[i].render()}")
    print()

    print("at deformation zero the table must be the classical one:")
    for c in check_classical_limit(cat, pid, 4):
        print(f"  {c.name}: {c.status}")


if __name__ == "__main__":
    main()
