"""Deterministic CSV / JSON / SVG writers."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

CSV_HEADERS = {
    "kernel": ["r", "F", "envelope_prediction"],
    "bl": ["s", "sup_error", "lyapunov"],
    "regularity": ["tau", "|c0|", "linear", "nonlinear", "ratio", "s"],
    "shoot": ["p", "mismatch"],
    "profile": ["y", "v", "v1", "v2", "v3"],
}


def fmt(x) -> str:
    """17 significant digits for floats; exact forms for rationals."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        if len(r) != len(header):
            raise ValueError("row width does not match header")
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan literals
        return x if math.isfinite(x) else fmt(x)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def json_text(obj) -> str:
    # repr of a float is the shortest round-tripping form, so this is
    # deterministic and lossless (at most 17 significant digits)
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def svg_text(series, xlabel="", ylabel="", title="", logy=False, logx=False) -> str:
    """Line plot of [(x, y, label), ...] as a byte-stable SVG document."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "vertexreg", "svg.fonttype": "none",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for x, y, label in series:
            ax.plot(np.asarray(x, float), np.asarray(y, float), label=label, lw=1.2)
        if logy:
            ax.set_yscale("log")
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if any(lbl for _, _, lbl in series):
            ax.legend(loc="best", fontsize=8)
        ax.grid(alpha=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def write(text: str, path: str | Path | None, stream=None):
    """Write to ``path`` (parents created) or to ``stream``."""
    if path is None:
        (stream or sys.stdout).write(text)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
