"""Wavefunction persistence as a self-describing JSON document.

Every number is stored as a decimal string carrying the full working
precision, so a document written on one platform reloads bit-exactly on
any other.  The term list is stored explicitly and is re-checked against
the canonical enumeration on load; a document whose terms disagree with
its omega is rejected rather than silently reinterpreted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from .basis import BasisSpec
from .operators import SystemSpec
from .precision import deserialize_mpfr, serialize_mpfr, working_precision
from .solver import Wavefunction

FORMAT_VERSION = 1


class ArchiveError(ValueError):
    """Document malformed, version-mismatched, or internally inconsistent."""


def wavefunction_document(wf: Wavefunction, run_id: Optional[str] = None) -> dict:
    """JSON-ready dict for a solved state."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": wf.system.kind,
        "z": None if wf.system.z is None else serialize_mpfr(wf.system.z),
        "interaction_on": wf.system.interaction_on,
        "omega": wf.basis.omega,
        "alpha": serialize_mpfr(wf.basis.alpha),
        "beta": serialize_mpfr(wf.basis.beta),
        "energy": serialize_mpfr(wf.energy),
        "bits": wf.bits,
        "terms": [[t.k, t.m, t.n] for t in wf.basis.terms],
        "coefficients": [serialize_mpfr(c) for c in wf.coefficients],
    }
    if run_id is not None:
        doc["run_id"] = run_id
    return doc


def save_wavefunction(
    wf: Wavefunction, path: Union[str, Path], run_id: Optional[str] = None
) -> None:
    text = json.dumps(wavefunction_document(wf, run_id), indent=1) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def wavefunction_from_document(doc: dict) -> Wavefunction:
    """Rebuild a state, validating shape and the stored term list."""
    try:
        version = doc["format_version"]
        if version != FORMAT_VERSION:
            raise ArchiveError(f"unsupported format version {version!r}")
        bits = int(doc["bits"])
        if bits < 2:
            raise ArchiveError(f"implausible precision {bits!r}")
        with working_precision(bits):
            kind = doc["kind"]
            if kind == "nucleus":
                system = SystemSpec.nucleus(
                    deserialize_mpfr(doc["z"]),
                    interaction_on=bool(doc["interaction_on"]),
                )
            elif kind == "ps_minus":
                system = SystemSpec.ps_minus()
            else:
                raise ArchiveError(f"unknown system kind {kind!r}")
            basis = BasisSpec(
                int(doc["omega"]),
                deserialize_mpfr(doc["alpha"]),
                deserialize_mpfr(doc["beta"]),
            )
            stored = [tuple(t) for t in doc["terms"]]
            if stored != [(t.k, t.m, t.n) for t in basis.terms]:
                raise ArchiveError(
                    "stored term list does not match the canonical "
                    f"enumeration for omega={basis.omega}"
                )
            coefficients = tuple(deserialize_mpfr(c) for c in doc["coefficients"])
            energy = deserialize_mpfr(doc["energy"])
            return Wavefunction(system, basis, energy, coefficients, bits)
    except ArchiveError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveError(f"malformed wavefunction document: {exc}") from exc


def load_wavefunction(path: Union[str, Path]) -> Wavefunction:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArchiveError("document root must be an object")
    return wavefunction_from_document(doc)
