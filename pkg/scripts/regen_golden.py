"""Rewrite the NLG golden files under tests/golden from the current templates.

Run after an intentional template or phrase change, then review the diff.
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from test_acceptance import composite_db  # noqa: E402

from bytedoc import fixtures  # noqa: E402
from bytedoc.nlg import describe_contract  # noqa: E402


def render(code, db=None) -> str:
    return "\n\n".join(d.render() for d in describe_contract(code, db)) + "\n"


def main() -> None:
    out = ROOT / "tests" / "golden"
    out.mkdir(exist_ok=True)
    files = {
        "composite.txt": render(fixtures.composite_fixture().code, composite_db()),
        "figure.txt": render(fixtures.figure_dispatcher().code),
        "nf.txt": render(fixtures.nf_fixture().code),
        "je.txt": render(fixtures.je_fixture().code),
    }
    for name, text in files.items():
        (out / name).write_text(text)
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
