"""Scenario bundles: a JSON manifest naming one edge-list file per scenario.

Layout of ``manifest.json``::

    {
      "num_nodes": 106,
      "scenarios": [
        {"name": "scenario-0", "model": "DIC", "graph": "scenario-0.tsv"},
        {"name": "cic", "model": "CIC", "graph": "g.tsv",
         "window": 1.0, "delay_family": "exponential"}
      ],
      "meta": {...}
    }

Graph paths are relative to the manifest's directory. ``num_nodes`` fixes the
shared node set; when absent it is taken from the graph files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from .diffusion import DiffusionScenario, ScenarioError
from .graph import GraphError, read_edge_list, write_edge_list

MANIFEST = "manifest.json"


class BundleError(ValueError):
    pass


def manifest_path(path) -> Path:
    path = Path(path)
    return path / MANIFEST if path.is_dir() else path


def write_bundle(out_dir, scenarios: Sequence[DiffusionScenario],
                 meta: Optional[dict] = None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(scenarios):
        name = s.name or f"scenario-{i}"
        fname = f"{i:03d}-{_safe(name)}.tsv"
        write_edge_list(s.graph, out_dir / fname)
        entry = {"name": name, "model": s.model, "graph": fname}
        if s.model == "CIC":
            entry.update(window=s.window, delay_family=s.delay_family)
        entries.append(entry)
    doc = {"num_nodes": scenarios[0].n if scenarios else 0, "scenarios": entries}
    if meta:
        doc["meta"] = meta
    path = out_dir / MANIFEST
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)[:60]


def read_bundle(path) -> list:
    """Load every scenario of a bundle (directory or manifest file)."""
    mpath = manifest_path(path)
    try:
        doc = json.loads(mpath.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BundleError(f"manifest not found: {mpath}") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"malformed manifest {mpath}: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("scenarios"), list) or not doc["scenarios"]:
        raise BundleError(f"{mpath}: manifest needs a non-empty 'scenarios' list")
    n = doc.get("num_nodes")
    base = mpath.parent
    scenarios = []
    for i, entry in enumerate(doc["scenarios"]):
        if not isinstance(entry, dict) or "model" not in entry or "graph" not in entry:
            raise BundleError(f"{mpath}: scenario {i} needs 'model' and 'graph'")
        gpath = base / entry["graph"]
        if not gpath.exists():
            raise BundleError(f"{mpath}: graph file missing: {gpath}")
        try:
            g = read_edge_list(gpath, n)
            scenarios.append(DiffusionScenario(
                entry["model"], g, window=entry.get("window"),
                delay_family=entry.get("delay_family", "exponential"),
                name=entry.get("name", f"scenario-{i}")))
        except (GraphError, ScenarioError) as exc:
            raise BundleError(f"{mpath}: scenario {i}: {exc}") from None
    sizes = {s.n for s in scenarios}
    if len(sizes) != 1:
        raise BundleError(f"{mpath}: scenarios disagree on the node count {sorted(sizes)}")
    return scenarios
