#!/usr/bin/env python3
"""Regenerate the bundled benchmark maps and start scenarios under maps/.

Output is deterministic for a fixed seed.
"""
import argparse
from collections import deque
from pathlib import Path

import numpy as np


def largest_component(free):
    h, w = free.shape
    label = np.full(free.shape, -1, dtype=np.int64)
    best, best_size, cur = -1, 0, 0
    for r in range(h):
        for c in range(w):
            if not free[r, c] or label[r, c] >= 0:
                continue
            size = 0
            queue = deque([(r, c)])
            label[r, c] = cur
            while queue:
                y, x = queue.popleft()
                size += 1
                for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and free[ny, nx] and label[ny, nx] < 0:
                        label[ny, nx] = cur
                        queue.append((ny, nx))
            if size > best_size:
                best, best_size = cur, size
            cur += 1
    return label == best


def random_map(size, density, rng):
    free = np.ones((size, size), dtype=bool)
    cells = rng.choice(size * size, size=int(round(size * size * density)), replace=False)
    free.flat[cells] = False
    return largest_component(free)


def warehouse(shelf_rows=20, shelf_cols=10, shelf_w=10, shelf_h=2, aisle=2, side=26, top=3):
    width = 2 * side + shelf_cols * shelf_w + (shelf_cols - 1) * aisle
    height = 2 * top + shelf_rows * shelf_h + (shelf_rows - 1) * aisle
    free = np.ones((height, width), dtype=bool)
    for i in range(shelf_rows):
        r = top + i * (shelf_h + aisle)
        for j in range(shelf_cols):
            c = side + j * (shelf_w + aisle)
            free[r:r + shelf_h, c:c + shelf_w] = False
    return free


def write_map(path, free):
    h, w = free.shape
    rows = ["".join("." if f else "@" for f in row) for row in free]
    path.write_text(f"type octile\nheight {h}\nwidth {w}\nmap\n" + "\n".join(rows) + "\n")


def write_scen(path, map_name, free, count, rng):
    h, w = free.shape
    cells = np.flatnonzero(free.ravel())
    starts = rng.choice(cells, size=count, replace=False)
    goals = rng.choice(cells, size=count, replace=True)
    lines = ["version 1"]
    for s, g in zip(starts, goals):
        sy, sx = divmod(int(s), w)
        gy, gx = divmod(int(g), w)
        lines.append(f"0\t{map_name}\t{w}\t{h}\t{sx}\t{sy}\t{gx}\t{gy}\t{abs(sx - gx) + abs(sy - gy)}")
    path.write_text("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "maps"))
    ap.add_argument("--seed", type=int, default=2025)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    maps = {
        "empty-32-32": (np.ones((32, 32), dtype=bool), 5, 1000),
        "empty-48-48": (np.ones((48, 48), dtype=bool), 5, 1000),
        "random-32-32-10": (random_map(32, 0.10, rng), 10, 900),
        "random-64-64-10": (random_map(64, 0.10, rng), 5, 1000),
        "random-64-64-20": (random_map(64, 0.20, rng), 5, 1000),
        "warehouse-10-20-10-2-2": (warehouse(), 5, 2000),
    }
    for name, (free, scens, rows) in maps.items():
        write_map(out / f"{name}.map", free)
        rows = min(rows, int(free.sum()))
        for k in range(1, scens + 1):
            write_scen(out / f"{name}-random-{k}.scen", f"{name}.map", free, rows, rng)
        print(f"{name}: {free.shape[1]}x{free.shape[0]}, {int(free.sum())} passable")


if __name__ == "__main__":
    main()
