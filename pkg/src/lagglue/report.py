"""Report emission: atomic JSON/CSV/SVG writes stamped with config hash and version."""
import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def atomic_write(path, data):
    """Write bytes or text to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, payload, config):
    """JSON document with ``tool_version`` and ``config_hash`` embedded."""
    doc = dict(_plain(payload))
    doc["tool_version"] = __version__
    doc["config_hash"] = config_hash(config)
    return atomic_write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def csv_text(rows, columns=None):
    """RFC 4180 CSV (CRLF line ends, minimal quoting) from a list of dicts."""
    rows = [_plain(r) for r in rows]
    columns = columns or (list(rows[0].keys()) if rows else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\r\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def write_csv(path, rows, columns=None):
    return atomic_write(path, csv_text(rows, columns))


def svg_loglog(series, title="", xlabel="t", ylabel="", width=480, height=360):
    """Minimal log-log line plot; ``series`` maps a label to (x, y) arrays."""
    pad = 56
    xs = np.concatenate([np.log10(np.asarray(x, float)) for x, _ in series.values()])
    ys = np.concatenate([np.log10(np.asarray(y, float)) for _, y in series.values()])
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda v: height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)
    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">log10 {xlabel}</text>',
           f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})" '
           f'text-anchor="middle">log10 {ylabel}</text>']
    for v in (x0, x1):
        out.append(f'<text x="{sx(v):.1f}" y="{height - pad + 16}" font-size="10" text-anchor="middle">{v:.2f}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{pad - 6}" y="{sy(v):.1f}" font-size="10" text-anchor="end">{v:.2f}</text>')
    for i, (label, (x, y)) in enumerate(series.items()):
        c = colours[i % len(colours)]
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(np.log10(x), np.log10(y)))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        for a, b in zip(np.log10(x), np.log10(y)):
            out.append(f'<circle cx="{sx(a):.1f}" cy="{sy(b):.1f}" r="3" fill="{c}"/>')
        out.append(f'<text x="{width - pad}" y="{pad + 14 * (i + 1)}" font-size="11" fill="{c}" '
                   f'text-anchor="end">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
