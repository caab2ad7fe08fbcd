"""Plot-script emission.

Scripts are written next to the CSVs and only reference them; nothing is
rendered here, so the package itself never imports a plotting library.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Iterable

GROUP_RE = re.compile(r"^(fig\d+|res)")

HEADER = """\
# Auto-generated; run with: python {name}
# Needs matplotlib. Reads the CSV files listed below.
import csv
import matplotlib.pyplot as plt

FILES = {files!r}


def read(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {{k: [float(r[k]) if r[k] not in ("", "nan") else float("nan") for r in rows] for k in rows[0] if k != "status"}}


fig, axes = plt.subplots({n}, 1, figsize=(6, 3 * {n}), squeeze=False)
"""

TRACE = """\
d = read({path!r})
ax = axes[{i}][0]
ax.plot(d["t"], d["fidelity"], label="fidelity")
ax.set_xlabel("t")
ax.set_ylabel("fidelity")
ax.set_title({title!r})
"""

SWEEP = """\
d = read({path!r})
ax = axes[{i}][0]
ax.plot(d["value"], d["final_fidelity"], "o-", label={title!r})
ax.set_xlabel({xlabel!r})
ax.set_ylabel("final fidelity")
{log}ax.legend()
"""

FOOTER = """\
fig.tight_layout()
fig.savefig({out!r})
"""


class PlotError(ValueError):
    """No usable CSV inputs."""


def _kind(path: Path) -> str:
    with path.open() as fh:
        head = next(csv.reader(fh), [])
    if head[:2] == ["value", "final_fidelity"]:
        return "sweep"
    if head[:2] == ["t", "fidelity"]:
        return "trace"
    return ""


def _group(path: Path) -> str:
    m = GROUP_RE.match(path.stem)
    return m.group(1) if m else "other"


def emit_plots(results: Path | str | Iterable[Path | str], out_dir: Path | str | None = None) -> list[Path]:
    """Write one plot script per figure group (``fig1``, ``fig5``, ...).

    ``results`` is a directory or an explicit list of CSV paths. Sweep CSVs in
    the same group become curves on one axis (so a decay figure gets one curve
    per protocol/gate sweep); trace CSVs get their own axis.
    """
    if isinstance(results, (str, Path)) and Path(results).is_dir():
        paths = sorted(Path(results).glob("*.csv"))
        out_dir = Path(out_dir or results)
    else:
        paths = [Path(p) for p in ([results] if isinstance(results, (str, Path)) else results)]
        missing = [p for p in paths if not p.is_file()]
        if missing:
            raise PlotError(f"missing inputs: {', '.join(map(str, missing))}")
        out_dir = Path(out_dir or (paths[0].parent if paths else "."))
    usable = [(p, _kind(p)) for p in paths]
    usable = [(p, k) for p, k in usable if k]
    if not usable:
        raise PlotError("no trace or sweep CSV files to plot")

    groups: dict[str, list[tuple[Path, str]]] = {}
    for p, k in usable:
        groups.setdefault(_group(p), []).append((p, k))

    scripts: dict[Path, str] = {}
    for g, items in sorted(groups.items()):
        traces = [p for p, k in items if k == "trace"]
        sweeps = [p for p, k in items if k == "sweep"]
        n = len(traces) + (1 if sweeps else 0)
        name = f"plot_{g}.py"
        files = [str(p.resolve()) for p, _ in items]
        body = [HEADER.format(name=name, files=files, n=n)]
        for i, p in enumerate(traces):
            body.append(TRACE.format(path=str(p.resolve()), i=i, title=p.stem))
        for p in sweeps:
            param = p.stem.rsplit("-", 1)[-1]
            body.append(
                SWEEP.format(
                    path=str(p.resolve()),
                    i=len(traces),
                    title=p.stem,
                    xlabel=param,
                    log='ax.set_xscale("log")\n' if param == "tf" else "",
                )
            )
        body.append(FOOTER.format(out=str((out_dir / f"{g}.png").resolve())))
        scripts[out_dir / name] = "\n".join(body)

    out_dir.mkdir(parents=True, exist_ok=True)
    for path, text in scripts.items():
        path.write_text(text)
    return sorted(scripts)
