"""Deterministic serialization and atomic file output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

SCHEMA_VERSION = 1


def _encode(obj: Any, out: list) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(int(obj)))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, Mapping):
        out.append("{")
        for j, key in enumerate(sorted(obj, key=str)):
            if j:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for j, item in enumerate(obj):
            if j:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalar
        _encode(obj.item(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys, no whitespace and floats at 17 significant digits."""
    out: list = []
    _encode(obj, out)
    return "".join(out) + "\n"


def config_hash(raw_config: Mapping) -> str:
    return hashlib.sha256(canonical_json(raw_config).encode()).hexdigest()


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def atomic_write(path: str | Path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out_dir: str | Path, files: Mapping[str, str]) -> list[Path]:
    """Write several prepared files; nothing is written unless every text is ready."""
    out_dir = Path(out_dir)
    written = []
    for name, text in files.items():
        p = out_dir / name
        atomic_write(p, text)
        written.append(p)
    return written
