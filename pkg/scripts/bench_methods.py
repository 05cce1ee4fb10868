#!/usr/bin/env python3
"""Run the bench subcommand over a corpus and summarize agreement between
methods.

Usage:
    python3 scripts/bench_methods.py corpus_dir [--methods auto,oracle,treecut]
"""

import argparse
import io
import sys
from contextlib import redirect_stdout

from edpsolve.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpus_dir")
    parser.add_argument("--methods", default="auto,oracle,treecut")
    args = parser.parse_args()

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["bench", args.corpus_dir, "--methods", args.methods])
    csv_text = buf.getvalue()
    sys.stdout.write(csv_text)
    if code != 0:
        return code

    answers: dict[str, set[str]] = {}
    for line in csv_text.strip().splitlines()[1:]:
        name, _method, *_mid, answer, _secs = line.split(",")
        if answer != "NA":
            answers.setdefault(name, set()).add(answer)
    disagreements = {name: sorted(seen) for name, seen in answers.items() if len(seen) > 1}
    print(f"# {len(answers)} instances, {len(disagreements)} method disagreements", file=sys.stderr)
    for name, seen in sorted(disagreements.items()):
        print(f"# DISAGREE {name}: {seen}", file=sys.stderr)
    return 1 if disagreements else 0


if __name__ == "__main__":
    sys.exit(main())
