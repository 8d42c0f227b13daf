# hybridq/services/persistence.py
import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from hybridq import __version__
from hybridq.services.documents import config_hash

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"   # round-trip exact for doubles


def header_lines(config_text: str, columns: Dict[str, str], note: Optional[str] = None) -> list[str]:
    lines = [
        f"# hybridq {__version__}",
        f"# config_sha256: {config_hash(config_text)}",
    ]
    if note:
        lines.append(f"# note: {note}")
    lines.append("# columns: " + "; ".join(f"{k} = {v}" for k, v in columns.items()))
    return lines


def write_csv(
    path: Path,
    frame: pd.DataFrame,
    *,
    config_text: str,
    columns: Dict[str, str],
    note: Optional[str] = None,
) -> Path:
    """Comment header (version, config hash, note, column legend) followed by the table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    missing = [c for c in frame.columns if c not in columns]
    if missing:
        raise ValueError(f"undocumented columns {missing} for {path.name}")
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(header_lines(config_text, columns, note)) + "\n")
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT)
    log.info(f"💾 wrote {path} ({len(frame)} rows)")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_cavity_state(path: Path, rho_c: np.ndarray, *, config_text: str, time: float, note: Optional[str] = None) -> Path:
    rows, cols = np.indices(rho_c.shape)
    frame = pd.DataFrame({
        "row": rows.ravel(),
        "col": cols.ravel(),
        "re": rho_c.real.ravel(),
        "im": rho_c.imag.ravel(),
    })
    stamp = f"t = {float(time)!r} us" if not note else f"{note} | t = {float(time)!r} us"
    return write_csv(
        path, frame, config_text=config_text, note=stamp,
        columns={"row": "Fock row", "col": "Fock column", "re": "Re rho_c", "im": "Im rho_c"},
    )
