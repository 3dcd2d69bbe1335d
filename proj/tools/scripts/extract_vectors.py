#!/usr/bin/env python3
"""Copies the rows for the given words out of a large text vector file
(GloVe / word2vec text / fastText .vec) into a small fixture."""
import argparse
import sys

DEFAULT_WORDS = "shower,bathtub,toilet,stove,toaster,table,microwave,bed,wardrobe,nightstand"


def main():
    p = argparse.ArgumentParser()
    p.add_argument("source")
    p.add_argument("--words", default=DEFAULT_WORDS)
    p.add_argument("--out", default="-")
    args = p.parse_args()

    wanted = args.words.split(",")
    found = {}
    with open(args.source, encoding="utf-8", errors="replace") as f:
        for i, line in enumerate(f):
            parts = line.rstrip("\n").split(" ")
            if i == 0 and len(parts) == 2:
                continue  # word2vec header "<count> <dim>"
            if parts[0] in wanted and parts[0] not in found:
                found[parts[0]] = " ".join(parts)
    missing = [w for w in wanted if w not in found]
    if missing:
        sys.exit("missing words: " + ", ".join(missing))
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    out.write(f"# extracted from {args.source}\n")
    for w in wanted:
        out.write(found[w] + "\n")


if __name__ == "__main__":
    main()
