#!/usr/bin/env python3
"""Writes the bundled track files under data/tracks/.

oval200.csv      200 m stadium loop: two straights joined by 20 m radius turns.
course1180.csv   1.18 km closed course from a perturbed polar curve.
"""
import math
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "tracks"


def resample(points, spacing):
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n = int(round(s[-1] / spacing))
    t = np.linspace(0.0, s[-1], n, endpoint=False)
    return np.column_stack([np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1])]), s[-1]


def stadium(length, radius):
    straight = (length - 2 * math.pi * radius) / 2
    pts = []
    for x in np.linspace(0, straight, 200, endpoint=False):
        pts.append((x, -radius))
    for a in np.linspace(-math.pi / 2, math.pi / 2, 400, endpoint=False):
        pts.append((straight + radius * math.cos(a), radius * math.sin(a)))
    for x in np.linspace(straight, 0, 200, endpoint=False):
        pts.append((x, radius))
    for a in np.linspace(math.pi / 2, 3 * math.pi / 2, 400, endpoint=False):
        pts.append((radius * math.cos(a), radius * math.sin(a)))
    return np.array(pts)


def course(length):
    th = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
    r = 1.0 + 0.28 * np.cos(2 * th) + 0.10 * np.sin(3 * th + 0.4)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    closed = np.vstack([pts, pts[:1]])
    perim = np.linalg.norm(np.diff(closed, axis=0), axis=1).sum()
    return pts * (length / perim)


def write(name, header, points, half_width):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / name, "w") as f:
        f.write(header)
        f.write("# x_m, y_m, half_width_m\n")
        for x, y in points:
            f.write(f"{x:.4f}, {y:.4f}, {half_width:.2f}\n")
        x, y = points[0]
        f.write(f"{x:.4f}, {y:.4f}, {half_width:.2f}\n")


def main():
    pts, length = resample(stadium(200.0, 20.0), 1.0)
    write("oval200.csv", f"# stadium loop, {length:.1f} m\n", pts, 5.0)
    pts, length = resample(course(1180.0), 2.0)
    write("course1180.csv", f"# closed course, {length:.1f} m\n", pts, 6.0)


if __name__ == "__main__":
    main()
