#!/usr/bin/env python3
"""End-to-end smoke test for the fglearn_py extension module.

Builds nothing itself: it expects `cargo build -p fglearn-py` (or --release)
to have produced the cdylib already, copies that library into a temp
directory under the importable name, and drives one full workflow through
the Python surface: generate -> enumerate -> sample -> learn -> evaluate.

Run from anywhere:  python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libfglearn_py.so", "libfglearn_py.dylib", "fglearn_py.dll")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit(
        "could not find the built extension; run `cargo build -p fglearn-py` first\n"
        "looked at:\n" + "\n".join(f"  {c}" for c in candidates)
    )


def import_module(tmp: Path):
    src = locate_cdylib()
    suffix = ".pyd" if src.suffix == ".dll" else ".so"
    shutil.copy2(src, tmp / f"fglearn_py{suffix}")
    sys.path.insert(0, str(tmp))
    import fglearn_py

    return fglearn_py


CHECKS = []


def check(label, ok):
    CHECKS.append((label, bool(ok)))
    print(f"{'PASS' if ok else 'FAIL'}  {label}")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        fg = import_module(Path(tmp))

        # generation and the exact oracle
        g = fg.generate("chain", 6, max_cardinality=2, strength=3.0, seed=5)
        check("generate: 6-variable chain has 5 pair factors",
              g.n_vars() == 6 and sorted(map(tuple, g.scopes())) ==
              [(i, i + 1) for i in range(5)])
        check("generate: text round trip is exact",
              fg.FactorGraph.from_text(g.to_text()).to_text() == g.to_text())

        joint = fg.JointTable(g)
        total = sum(
            joint.prob([(i >> v) & 1 for v in range(6)]) for i in range(64)
        )
        check("oracle: probabilities sum to one", math.isclose(total, 1.0, rel_tol=1e-12))
        gamma = joint.min_conditional_gamma()
        check("oracle: positivity measure in (0, 0.5]", 0.0 < gamma <= 0.5)
        h_joint = joint.entropy()
        h_cond = joint.conditional_entropy([0], [1, 2])
        check("oracle: entropies are finite and ordered",
              0.0 <= h_cond <= h_joint <= 6 * math.log(2) + 1e-12)

        # sampling, determinism, truncation
        data = fg.exact_sample(joint, 20000, 17)
        again = fg.exact_sample(joint, 20000, 17)
        check("sampling: same seed gives identical rows", data.rows() == again.rows())
        check("sampling: csv round trip is exact",
              fg.Dataset.from_csv(data.to_csv()).to_csv() == data.to_csv())
        check("sampling: truncation keeps a prefix",
              data.truncated(10).rows() == data.rows()[:10])
        gibbs = fg.gibbs_sample(g, 200, 3, burn_in=50, thinning=2)
        check("sampling: gibbs produces the requested rows", len(gibbs) == 200)

        # parameter learning against the generating structure
        model = fg.learn_parameters(g.scopes(), data, gamma=gamma)
        sym = fg.symmetric_kl(joint, model.to_joint())
        check(f"learning: sym-kl after 20k samples is small ({sym:.2e})", sym < 0.02)
        check("learning: normalized metric divides by n",
              math.isclose(
                  fg.normalized_symmetric_kl(joint, model.to_joint()),
                  sym / 6, rel_tol=1e-12))
        check("learning: model text round trip is exact",
              fg.LearnedModel.from_text(model.to_text()).to_text() == model.to_text())
        check("learning: every factor records a conditioning set",
              len(model.conditioning_sets()) == len(model.scopes()))

        # structure learning recovers the chain on this seeded instance
        result = fg.learn_structure(data, 2, 2, 2.4, gamma=gamma)
        learned_pairs = sorted(tuple(s) for s in result.model().scopes() if len(s) == 2)
        check("structure: chain edges recovered",
              learned_pairs == [(i, i + 1) for i in range(5)])
        check("structure: threshold is epsilon / 2**(k+2)",
              math.isclose(result.threshold, 2.4 / 2 ** 4, rel_tol=1e-12))
        check("structure: one blanket choice per candidate scope",
              len(result.choices()) == len({tuple(c[0]) for c in result.choices()}))

        # sample-size calculators match the reference values
        check("bounds: parameter bound reference value",
              fg.parameter_sample_bound(1.0, 0.1, 1, 1, 0.5, 1, 2) == 3335)
        check("bounds: structure bound reference value",
              fg.structure_sample_bound(1.0, 0.1, 1, 1, 0.5, 2, 4) == 76305075433439)

        # failure modes surface as the documented exceptions
        try:
            fg.learn_parameters(g.scopes(), data.truncated(5), strict=True)
            check("errors: strict mode raises ZeroCountError", False)
        except fg.ZeroCountError:
            check("errors: strict mode raises ZeroCountError", True)
        try:
            fg.JointTable(fg.generate("chain", 40, strength=2.0, seed=1))
            check("errors: oversized joint raises CapExceededError", False)
        except fg.CapExceededError:
            check("errors: oversized joint raises CapExceededError", True)
        try:
            fg.generate("mystery", 4)
            check("errors: unknown family raises ValueError", False)
        except ValueError:
            check("errors: unknown family raises ValueError", True)

    failed = [label for label, ok in CHECKS if not ok]
    print(f"\n{len(CHECKS) - len(failed)}/{len(CHECKS)} checks passed")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
