#!/usr/bin/env python3
"""Regenerate the shipped toy PRG table files (deterministic)."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from pqext.prg import generate_toy_table, write_toy_table

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "pqext" / "data"

for lam in (2, 3, 4, 6, 8):
    table = generate_toy_table(lam)
    path = OUT / f"prg_toy_lambda{lam}.bin"
    write_toy_table(path, lam, table)
    print(f"wrote {path} ({path.stat().st_size} bytes)")
