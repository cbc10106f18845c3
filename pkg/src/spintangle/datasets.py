"""Register-file parsing and bundled example registers.

A register file is CSV with header ``label,A_kHz,B_kHz`` and one row per
nucleus.  Comment lines of the form ``# key=value`` before the header may
set ``larmor_kHz``, ``s0`` and ``s1``; values may also be supplied (or
overridden) by the caller.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .spin_model import ElectronQubitSpec, NuclearSpinParams

BUNDLED = (
    "nv27",
    "rand-cpmg-k1",
    "rand-cpmg-k2",
    "rand-udd3-k1",
    "rand-udd3-k3",
    "rand-udd4-k1",
    "rand-udd4-k2",
)


class RegisterFormatError(ValueError):
    """Malformed register file."""


@dataclass
class RegisterFile:
    """A parsed register: spins plus any electron metadata found in the file."""

    spins: list
    larmor_khz: float | None = None
    s0: float | None = None
    s1: float | None = None
    source: str = "<memory>"

    def electron(self) -> ElectronQubitSpec:
        if self.s0 is None or self.s1 is None:
            raise RegisterFormatError(
                f"{self.source}: electron projections s0/s1 not resolvable")
        return ElectronQubitSpec(self.s0, self.s1)

    def by_label(self, label: str) -> NuclearSpinParams:
        for s in self.spins:
            if s.label == label:
                return s
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.spins]


def parse_register(text: str, source: str = "<memory>",
                   larmor_khz: float | None = None,
                   s0: float | None = None,
                   s1: float | None = None) -> RegisterFile:
    meta: dict[str, float] = {}
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, val = body.partition("=")
                try:
                    meta[key.strip()] = float(val)
                except ValueError:
                    raise RegisterFormatError(
                        f"{source}:{lineno}: bad metadata value {val!r}")
            continue
        if header is None:
            header = [h.strip() for h in line.split(",")]
            if header != ["label", "A_kHz", "B_kHz"]:
                raise RegisterFormatError(
                    f"{source}:{lineno}: expected header label,A_kHz,B_kHz")
            continue
        rows.append((lineno, line))

    if header is None:
        raise RegisterFormatError(f"{source}: missing header row")

    if larmor_khz is None:
        larmor_khz = meta.get("larmor_kHz")
    if s0 is None:
        s0 = meta.get("s0")
    if s1 is None:
        s1 = meta.get("s1")
    if larmor_khz is None:
        raise RegisterFormatError(f"{source}: Larmor frequency not resolvable")

    spins = []
    seen = set()
    for lineno, line in rows:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise RegisterFormatError(f"{source}:{lineno}: expected 3 fields")
        label = parts[0]
        if label in seen:
            raise RegisterFormatError(f"{source}:{lineno}: duplicate label {label!r}")
        seen.add(label)
        try:
            a = float(parts[1])
            b = float(parts[2])
        except ValueError:
            raise RegisterFormatError(f"{source}:{lineno}: unparseable decimals")
        try:
            spins.append(NuclearSpinParams.from_khz(label, a, b, larmor_khz))
        except ValueError as exc:
            raise RegisterFormatError(f"{source}:{lineno}: {exc}")
    return RegisterFile(spins, larmor_khz, s0, s1, source)


def load_register(path_or_name: str, **overrides) -> RegisterFile:
    """Load a register from a file path or a bundled dataset name."""
    if path_or_name in BUNDLED:
        ref = resources.files("spintangle.data") / f"{path_or_name}.csv"
        return parse_register(ref.read_text(), source=path_or_name, **overrides)
    path = Path(path_or_name)
    if not path.exists():
        raise RegisterFormatError(
            f"{path_or_name!r} is neither a file nor one of {', '.join(BUNDLED)}")
    return parse_register(path.read_text(), source=str(path), **overrides)
