#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from Python's unicodedata.

Usage: python3 tools/gen_unicode_tables.py > src/unicode_tables.inc
"""
import sys
import unicodedata


def ranges_for(predicate):
    out = []
    start = None
    for cp in range(0x110000):
        if predicate(chr(cp)):
            if start is None:
                start = cp
        elif start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, ranges):
    print(f"inline constexpr CodepointRange {name}[] = {{")
    for i in range(0, len(ranges), 4):
        row = ", ".join(f"{{0x{lo:04X}, 0x{hi:04X}}}" for lo, hi in ranges[i : i + 4])
        print(f"    {row},")
    print("};")
    print()


def main():
    print("// Generated by tools/gen_unicode_tables.py "
          f"(Unicode {unicodedata.unidata_version}). Do not edit by hand.")
    print()
    emit("kPunctuationRanges",
         ranges_for(lambda c: unicodedata.category(c).startswith("P")))
    emit("kSpaceSeparatorRanges",
         ranges_for(lambda c: unicodedata.category(c) == "Zs"))
    emit("kFormatControlRanges",
         ranges_for(lambda c: unicodedata.category(c) in ("Cc", "Cf")))


if __name__ == "__main__":
    sys.exit(main())
