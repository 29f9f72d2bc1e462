"""Write every hand-assembled fixture as a .hex file and describe each one.

    python3 scripts/describe_fixtures.py --out /tmp/bytedoc-fixtures

The .hex files can be fed back through ``bytedoc describe --file``.
"""

import argparse
import time
from pathlib import Path

from bytedoc import fixtures
from bytedoc.nlg import describe_contract
from bytedoc.sigdb import builtin_database


def all_programs():
    for fx in fixtures.dispatcher_fixtures():
        yield f"dispatcher-{fx.name}", fx.program
    for fx in fixtures.payment_fixtures():
        yield f"payment-{fx.name}", fx.program
    for fx in fixtures.behavior_fixtures():
        yield f"behavior-{fx.name}", fx.program
    yield "nf", fixtures.nf_fixture()
    yield "je", fixtures.je_fixture()
    yield "composite", fixtures.composite_fixture().program


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("fixtures-out"))
    ap.add_argument("--quiet", action="store_true", help="only print timings")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    db = builtin_database()
    db.import_phrases(fixtures.COMPOSITE_DEVDOC)
    for name, prog in all_programs():
        slug = "".join(c if c.isalnum() or c in "-_" else "_" for c in name)
        (args.out / f"{slug}.hex").write_text(prog.hex + "\n")
        t0 = time.perf_counter()
        docs = describe_contract(prog.code, db)
        elapsed = time.perf_counter() - t0
        print(f"### {name}: {len(docs)} doc(s), {elapsed * 1e3:.1f} ms")
        if not args.quiet:
            for d in docs:
                print(d.render())
                print()


if __name__ == "__main__":
    main()
