#!/usr/bin/env python3
"""Assemble the language-model training corpus.

Concatenates the hand-assembled base text with State of the Union addresses
(public domain; CC0 packaging in the npm package @stdlib/datasets-sotu) up to
a cutoff year. Any sentence sharing a run of SHINGLE words with the held-out
target text is dropped, so the corpus never quotes the target.
"""

import argparse
import pathlib
import re

SHINGLE = 6


def words(text):
    return re.sub(r"[^A-Z]+", " ", text.upper()).split()


def shingles(ws, k=SHINGLE):
    return {tuple(ws[i:i + k]) for i in range(len(ws) - k + 1)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", required=True, type=pathlib.Path)
    ap.add_argument("--sotu-dir", required=True, type=pathlib.Path,
                    help="data/ directory of @stdlib/datasets-sotu")
    ap.add_argument("--target", required=True, type=pathlib.Path)
    ap.add_argument("--max-year", type=int, default=1860)
    ap.add_argument("--out", required=True, type=pathlib.Path)
    args = ap.parse_args()

    banned = shingles(words(args.target.read_text()))
    parts = [args.base.read_text().strip()]
    kept = dropped = 0
    for f in sorted(args.sotu_dir.glob("*.txt")):
        if int(f.name.split("_", 1)[0]) > args.max_year:
            continue
        for sentence in re.split(r"(?<=[.!?])\s+", f.read_text()):
            if shingles(words(sentence)) & banned:
                dropped += 1
                continue
            parts.append(sentence.strip())
            kept += 1
    args.out.write_text("\n".join(p for p in parts if p) + "\n")
    print(f"kept {kept} sentences, dropped {dropped} overlapping the target")


if __name__ == "__main__":
    main()
