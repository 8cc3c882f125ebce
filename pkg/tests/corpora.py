"""Random well-formed Java-subset corpora for extractor properties."""

from __future__ import annotations

import random

PACKAGES = ["org.shop.core", "org.shop.web", "org.shop.data"]
EXTERNAL = ["java.util.List", "java.util.Date", "java.io.IOException", "javax.inject.Named"]


def random_corpus(rng: random.Random, max_types: int = 8) -> dict[str, str]:
    n = rng.randint(1, max_types)
    classes = [(rng.choice(PACKAGES), f"K{i}") for i in range(n)]
    fqns = [f"{p}.{c}" for p, c in classes]
    # every class gets run(int) and a no-arg constructor; some get a field
    sources = {}
    for i, (pkg, name) in enumerate(classes):
        imports = sorted({f for j, f in enumerate(fqns) if j != i and classes[j][0] != pkg} | set(EXTERNAL))
        lines = [f"package {pkg};", ""] + [f"import {x};" for x in imports] + [""]
        if rng.random() < 0.3:
            lines.append("@Named")
        header = f"public class {name}"
        if i > 0 and rng.random() < 0.4:
            header += f" extends {classes[rng.randrange(i)][1]}"
        lines.append(header + " {")
        peers = [c for _, c in classes]
        for f in range(rng.randint(0, 2)):
            lines.append(f"    private {rng.choice(peers + ['List', 'Date', 'int'])} f{f};")
        lines.append(f"    public {name}() {{ }}")
        lines.append("    public int run(int x) {")
        for s in range(rng.randint(0, 4)):
            other = rng.choice(peers)
            roll = rng.random()
            if roll < 0.4:
                lines.append(f"        {other} v{s} = new {other}();")
                lines.append(f"        v{s}.run({s});")
            elif roll < 0.6:
                lines.append(f"        new {other}();")
            elif roll < 0.8:
                lines.append(f"        try {{ x = x + {s}; }} catch (IOException e{s}) {{ return 0; }}")
            else:
                lines.append(f"        Date d{s} = null;")
        lines.append("        return x;")
        lines.append("    }")
        lines.append("}")
        sources[f"{pkg.replace('.', '/')}/{name}.java"] = "\n".join(lines) + "\n"
    return sources


def random_constraint_set(rng: random.Random):
    """A seeded ConstraintSet covering every modality, kind and pattern shape."""
    from archfix.dcl import Constraint, ConstraintSet, ModuleDef
    from archfix.facts import DependencyKind

    def dotted() -> str:
        return ".".join(rng.choice(["app", "core", "web", "x1", "Data", "dao"]) for _ in range(rng.randint(1, 3)))

    def pattern() -> str:
        return rng.choice([dotted(), dotted() + ".*", dotted() + ".**", "**"])

    names = rng.sample(["View", "Model", "Ctl", "Dao", "Util", "Web"], k=rng.randint(1, 4))
    modules = tuple(ModuleDef(n, tuple(pattern() for _ in range(rng.randint(1, 3)))) for n in names)
    refs = names + ["$system", "$java", "JavaAPI"]
    constraints = []
    for i in range(rng.randint(0, 6)):
        modality = rng.choice(["only_can", "can_only", "cannot", "must"])
        n = 1 if modality == "must" else rng.randint(1, 3)
        targets = tuple(rng.choice(refs + ["java.io.Serializable", "x.Ann"]) for _ in range(n))
        constraints.append(Constraint(f"R{i}", modality, rng.choice(list(DependencyKind)), rng.choice(refs), targets))
    moves = tuple((f"app.T{i}", rng.choice(names)) for i in range(rng.randint(0, 2)))
    return ConstraintSet(modules, tuple(constraints), moves)
