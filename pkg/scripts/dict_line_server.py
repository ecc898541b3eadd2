#!/usr/bin/env python3
"""Minimal line-protocol MT stand-in: one source line in, one target line out.

    slidewin simulate doc.txt --translator subprocess \
        --command "python scripts/dict_line_server.py table.tsv" --log-out log.jsonl
"""

import sys


def main():
    table = {}
    if len(sys.argv) > 1:
        with open(sys.argv[1], encoding="utf-8") as fh:
            for line in fh:
                if "\t" in line:
                    src, tgt = line.rstrip("\n").split("\t", 1)
                    table[src] = tgt
    for line in sys.stdin:
        print(" ".join(table.get(t, t) for t in line.split()), flush=True)


if __name__ == "__main__":
    main()
