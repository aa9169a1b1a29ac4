"""Independent token-count oracle.

Rule: every maximal run of ASCII letters/digits costs ceil(len/4); every
other non-whitespace code point costs 1; ASCII whitespace costs 0.

Usage:
  tokenize_oracle.py FILE...               count each file
  tokenize_oracle.py --elements SIDECAR... count the elements-only payload
"""
import json
import math
import pathlib
import sys

ALNUM = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")
SPACE = set(" \t\n\r\f\v")


def count(text: str) -> int:
    total = 0
    run = 0
    for ch in text:
        if ch in ALNUM:
            run += 1
            continue
        if run:
            total += math.ceil(run / 4)
            run = 0
        if ch not in SPACE:
            total += 1
    if run:
        total += math.ceil(run / 4)
    return total


def elements_payload(sidecar_text: str) -> str:
    # json.loads keeps key order, which is the canonical order in our fixtures.
    doc = json.loads(sidecar_text)
    return json.dumps(doc["elements"], indent=2, ensure_ascii=False)


def main(argv):
    if argv and argv[0] == "--elements":
        for name in argv[1:]:
            text = pathlib.Path(name).read_bytes().decode("utf-8")
            print(f"{count(elements_payload(text))}\t{name}")
        return 0
    for name in argv:
        text = pathlib.Path(name).read_bytes().decode("utf-8")
        print(f"{count(text)}\t{name}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
