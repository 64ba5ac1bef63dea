"""Files written next to episode results: map snapshots, JSONL traces, reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

FREE = 255
UNKNOWN = 128
OBSTACLE = 0
DYNAMIC = 200

CSV_COLUMNS = ("id", "success", "spl_term", "psc", "collided", "steps", "status")
TABLE_COLUMNS = ("SR", "SPL", "PSC", "H-Coll", "Final Score")


def snapshot_image(static, explored, dynamic=None) -> np.ndarray:
    """8-bit map image: free 255, unknown 128, static obstacle 0, human obstacle 200."""
    img = np.full(static.shape, UNKNOWN, dtype=np.uint8)
    img[explored] = FREE
    if dynamic is not None:
        img[dynamic] = DYNAMIC
    img[static] = OBSTACLE
    return img


def write_pgm(path, image: np.ndarray) -> Path:
    """Binary (P5) greyscale PGM."""
    path = Path(path)
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + image.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h).reshape(h, w)


def write_png(path, image: np.ndarray) -> Path:
    path = Path(path)
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="L").save(path)
    return path


def snapshot_name(episode: int, t: int, layer: str, ext: str = "pgm") -> str:
    return f"ep{episode}_t{t}_{layer}.{ext}"


def write_snapshots(directory, episode: int, t: int, static, explored, dynamic, fmt: str = "pgm") -> list[Path]:
    """Write the static, dynamic and combined layers for one timestep."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    writer = write_png if fmt == "png" else write_pgm
    layers = {
        "static": snapshot_image(static, explored),
        "dynamic": snapshot_image(np.zeros_like(static), explored, dynamic),
        "combined": snapshot_image(static, explored, dynamic),
    }
    return [writer(directory / snapshot_name(episode, t, name, fmt), img) for name, img in layers.items()]


def write_jsonl(path, rows) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return path


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def episodes_csv(rows) -> str:
    """Per-episode rows (dicts keyed by :data:`CSV_COLUMNS`) as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in CSV_COLUMNS])
    return buf.getvalue()


def table_csv(rows, key: str = "variant") -> str:
    """Rows of headline metrics (dicts with ``key`` plus :data:`TABLE_COLUMNS`)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    extra = [c for c in rows[0] if c not in TABLE_COLUMNS and c != key] if rows else []
    w.writerow([key, *TABLE_COLUMNS, *extra])
    for row in rows:
        w.writerow([_fmt(row[key]), *(f"{row[c]:.2f}" for c in TABLE_COLUMNS), *(_fmt(row[c]) for c in extra)])
    return buf.getvalue()


def format_table(rows, key: str = "variant") -> str:
    """Fixed-width text table mirroring the published layout."""
    width = max([len(key), *(len(str(r[key])) for r in rows)]) + 2
    lines = [f"{key:<{width}}" + "".join(f"{c:>13}" for c in TABLE_COLUMNS)]
    for r in rows:
        lines.append(f"{str(r[key]):<{width}}" + "".join(f"{r[c]:>13.2f}" for c in TABLE_COLUMNS))
    return "\n".join(lines)
