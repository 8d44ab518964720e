"""Text formats: problem files (JSON), sample tables and stage traces (CSV).

Problem file::

    {"n": 3, "h": [[0, 1.0], [2, -0.5]], "J": [[0, 1, 2.0]], "offset": 0.0}

``n`` is the root variable count and the active variables are ``0..n-1``
unless an ``"active"`` list is present. ``offset`` is optional. Floats are
written with ``repr`` precision, so ``loads(dumps(H)) == H``.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from qaga.exceptions import ContractError
from qaga.ising import IsingHamiltonian
from qaga.samplers import SampleSet

__all__ = [
    "dumps_problem",
    "loads_problem",
    "write_problem",
    "read_problem",
    "format_sampleset",
    "parse_sampleset",
    "format_trace",
    "parse_trace",
]


def problem_to_dict(H: IsingHamiltonian) -> dict:
    active = list(H.active_vars)
    n = active[-1] + 1 if active else 0
    doc = {
        "n": n,
        "h": [[i, v] for i, v in H.h.items()],
        "J": [[i, j, v] for (i, j), v in H.J.items()],
        "offset": H.offset,
    }
    if active != list(range(n)):
        doc["active"] = active
    return doc


def problem_from_dict(doc: dict) -> IsingHamiltonian:
    try:
        n = int(doc["n"])
        h = {int(i): float(v) for i, v in doc.get("h", [])}
        J = {(int(i), int(j)): float(v) for i, j, v in doc.get("J", [])}
        offset = float(doc.get("offset", 0.0))
        active = doc.get("active", range(n))
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed problem document: {exc}") from exc
    return IsingHamiltonian(h, J, offset=offset, active_vars=active)


def dumps_problem(H: IsingHamiltonian) -> str:
    return json.dumps(problem_to_dict(H), indent=1) + "\n"


def loads_problem(text: str) -> IsingHamiltonian:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ContractError(f"problem file is not valid JSON: {exc}") from exc
    return problem_from_dict(doc)


def write_problem(H: IsingHamiltonian, path) -> None:
    Path(path).write_text(dumps_problem(H))


def read_problem(path) -> IsingHamiltonian:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ContractError(f"cannot read problem file {path}: {exc}") from exc
    return loads_problem(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def format_sampleset(S) -> str:
    """One row per read: index, energy, then spins in ascending variable order."""
    header = ["sample", "energy"] + [str(v) for v in S.variables]
    rows = (
        [j, repr(float(S.energies[j]))] + [int(s) for s in S.spins[j]]
        for j in range(len(S))
    )
    return _csv_text(header, rows)


def parse_sampleset(text: str) -> SampleSet:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    variables = [int(v) for v in header[2:]]
    energies, spins = [], []
    for row in reader:
        energies.append(float(row[1]))
        spins.append([int(s) for s in row[2:]])
    spins = np.array(spins, dtype=np.int8).reshape(-1, len(variables))
    return SampleSet(tuple(variables), spins, np.array(energies))


TRACE_HEADER = ["stage", "vars_fixed", "remaining", "best_energy"]


def format_trace(trace) -> str:
    """Stage rows followed by one summary row (``total_stages, fallback_used, final_energy``)."""
    rows = [
        [r.stage, r.vars_fixed, r.remaining, repr(r.best_energy)] for r in trace.stages
    ]
    text = _csv_text(TRACE_HEADER, rows)
    summary = _csv_text(
        ["total_stages", "fallback_used", "final_energy", "total_reads"],
        [[trace.total_stages, int(trace.fallback_used), repr(trace.final_energy), trace.total_reads]],
    )
    return text + "\n" + summary


def parse_trace(text: str) -> dict:
    stages_part, summary_part = text.split("\n\n", 1)
    stages = list(csv.DictReader(io.StringIO(stages_part)))
    (summary,) = list(csv.DictReader(io.StringIO(summary_part)))
    return {
        "stages": [
            {
                "stage": int(r["stage"]),
                "vars_fixed": int(r["vars_fixed"]),
                "remaining": int(r["remaining"]),
                "best_energy": float(r["best_energy"]),
            }
            for r in stages
        ],
        "total_stages": int(summary["total_stages"]),
        "fallback_used": bool(int(summary["fallback_used"])),
        "final_energy": float(summary["final_energy"]),
        "total_reads": int(summary["total_reads"]),
    }
