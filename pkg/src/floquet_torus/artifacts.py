"""Deterministic CSV/JSON artifact writing with a run manifest."""

from __future__ import annotations

import csv
import json
import os
from datetime import datetime, timezone


def format_value(v) -> str:
    import numpy as np

    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, header: list, rows: list):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_json(path: str, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(o):
    import numpy as np

    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_manifest(directory: str, cfg_hash: str, version: str, seed: int, started: str):
    finished = datetime.now(timezone.utc).isoformat()
    doc = {
        "config_hash": cfg_hash,
        "version": version,
        "seed": seed,
        "started": started,
        "finished": finished,
    }
    write_json(os.path.join(directory, "manifest.json"), doc)
    return doc


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()
