"""
Readers for DL_POLY-style CONTROL, FIELD and HISTORY files and writers for
the RDF / POP result tables.

CONTROL is scanned only below the ``finish`` directive for an analysis block
of the form::

    polyana
      start  1001
      stop   5000
      rmax   10.0
      dr     0.2
      smooth
    end polyana

Keywords are case-insensitive, may be indented freely and may appear in any
order; missing keywords fall back to defaults.  FIELD keywords are matched on
their first four characters, case-insensitively, following the DL_POLY
convention.  HISTORY files are streamed frame by frame and may lack the
two-line header (the restart case); a file cut off mid-frame terminates the
stream gracefully instead of erroring.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator

import numpy as np

from .errors import InputError
from .geometry import CellTensor

logger = logging.getLogger(__name__)

DEFAULT_START = 1
DEFAULT_STOP = sys.maxsize
DEFAULT_RMAX = 12.5
DEFAULT_DR = 0.1


@dataclass(frozen=True)
class Directives:
    """Analysis settings read from the CONTROL file."""

    start: int = DEFAULT_START
    stop: int = DEFAULT_STOP
    rmax: float = DEFAULT_RMAX
    dr: float = DEFAULT_DR
    smooth: bool = False

    def __post_init__(self):
        if self.start < 1:
            raise InputError(f"start must be >= 1, got {self.start}")
        if self.stop < self.start:
            raise InputError(f"stop ({self.stop}) must be >= start ({self.start})")
        if self.dr <= 0:
            raise InputError(f"dr must be positive, got {self.dr}")
        if self.rmax <= self.dr:
            raise InputError(f"rmax ({self.rmax}) must exceed dr ({self.dr})")


@dataclass(frozen=True)
class SiteSpec:
    """One interaction site after repeat expansion."""

    name: str
    mass: float
    charge: float
    frozen: int = 0


@dataclass(frozen=True)
class MoleculeSpec:
    """A molecule type: its name, how many copies exist, and its sites."""

    name: str
    count: int
    sites: tuple[SiteSpec, ...]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.sites])

    @property
    def total_mass(self) -> float:
        return float(sum(s.mass for s in self.sites))


@dataclass(frozen=True)
class Topology:
    """Ordered molecule types; type numbers follow FIELD order, starting at 1."""

    molecules: tuple[MoleculeSpec, ...]

    @property
    def n_types(self) -> int:
        return len(self.molecules)

    @property
    def total_sites(self) -> int:
        return sum(m.count * m.n_sites for m in self.molecules)

    def site_ranges(self) -> list[tuple[int, int, slice]]:
        """(type index, molecule index within type, site slice) per molecule.

        Type indices are 0-based here; they become 1-based labels only in the
        output files.
        """
        out = []
        offset = 0
        for t, mol in enumerate(self.molecules):
            for k in range(mol.count):
                out.append((t, k, slice(offset, offset + mol.n_sites)))
                offset += mol.n_sites
        return out


@dataclass(frozen=True, eq=False)
class Frame:
    """One stored configuration of the trajectory."""

    step: int
    natoms: int
    cell: CellTensor
    positions: np.ndarray  # (natoms, 3), Angstrom, FIELD declaration order


def _first_token(line: str) -> str:
    parts = line.split(maxsplit=1)
    return parts[0].lower() if parts else ""


def parse_directives(control_text: str) -> Directives:
    """Extract the analysis directives from CONTROL text.

    Only content after the DL_POLY ``finish`` directive is considered.  A
    missing block (or a CONTROL with no ``finish`` at all) yields the
    defaults.  A ``polyana`` opener without its ``end polyana`` closer is an
    error, as is a malformed numeric value.
    """
    past_finish = False
    in_block = False
    block_seen = False
    values: dict[str, object] = {}

    for lineno, line in enumerate(control_text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        keyword = tokens[0].lower()

        if not past_finish:
            if keyword == "finish":
                past_finish = True
            continue

        if not in_block:
            if keyword == "polyana" and not block_seen:
                in_block = True
                block_seen = True
            continue

        if keyword == "end" and len(tokens) >= 2 and tokens[1].lower() == "polyana":
            in_block = False
            continue

        if keyword in ("start", "stop", "rmax", "dr"):
            if len(tokens) < 2:
                raise InputError(f"CONTROL line {lineno}: '{keyword}' needs a value")
            try:
                value = int(tokens[1]) if keyword in ("start", "stop") else float(tokens[1])
            except ValueError:
                raise InputError(
                    f"CONTROL line {lineno}: bad numeric value {tokens[1]!r} "
                    f"for '{keyword}'"
                ) from None
            values[keyword] = value
        elif keyword == "smooth":
            values["smooth"] = True
        else:
            logger.warning("CONTROL line %d: unknown directive %r ignored", lineno, tokens[0])

    if in_block:
        raise InputError("CONTROL: 'polyana' block is never closed by 'end polyana'")
    return Directives(**values)


def _keyword_matches(token: str, keyword: str) -> bool:
    # DL_POLY convention: directives are recognised by their first 4 characters.
    return token.lower().startswith(keyword[:4])


def parse_field(field_text: str) -> Topology:
    """Parse the molecular-topology section of a FIELD file.

    The first line is the title.  After the ``MOLECULES n`` directive, each
    of the n blocks contributes a name line, ``NUMMOLS``, ``ATOMS`` and the
    site records; everything else up to ``FINISH`` (bonds, constraints,
    rigid bodies, ...) is irrelevant to centre-of-mass analysis and skipped,
    as are the force-field sections after the last block.
    """
    lines = field_text.splitlines()
    pos = 0
    n_lines = len(lines)

    def next_content() -> tuple[int, str]:
        nonlocal pos
        while pos < n_lines:
            line = lines[pos]
            pos += 1
            if line.strip():
                return pos, line
        return 0, ""

    # Title line, then scan for MOLECULES.
    next_content()
    n_types = None
    while True:
        lineno, line = next_content()
        if not line:
            raise InputError("FIELD: no MOLECULES directive found")
        tokens = line.split()
        if _keyword_matches(tokens[0], "molecules"):
            # The count is the last token: both "MOLECULES n" and the long
            # "MOLECULAR TYPES n" form occur in the wild.
            try:
                n_types = int(tokens[-1])
            except ValueError:
                raise InputError(f"FIELD line {lineno}: bad MOLECULES count") from None
            break

    molecules = []
    for _ in range(n_types):
        lineno, line = next_content()
        if not line:
            raise InputError("FIELD: unexpected end of file before molecule name")
        name = line.strip()

        lineno, line = next_content()
        tokens = line.split()
        if not line or not _keyword_matches(tokens[0], "nummols"):
            raise InputError(f"FIELD line {lineno or n_lines}: expected NUMMOLS for {name!r}")
        try:
            count = int(tokens[-1])
        except ValueError:
            raise InputError(f"FIELD line {lineno}: bad NUMMOLS value") from None
        if count < 1:
            raise InputError(f"FIELD line {lineno}: NUMMOLS must be >= 1")

        lineno, line = next_content()
        tokens = line.split()
        if not line or not _keyword_matches(tokens[0], "atoms"):
            raise InputError(f"FIELD line {lineno or n_lines}: expected ATOMS for {name!r}")
        try:
            n_sites = int(tokens[-1])
        except ValueError:
            raise InputError(f"FIELD line {lineno}: bad ATOMS value") from None

        sites: list[SiteSpec] = []
        while len(sites) < n_sites:
            lineno, line = next_content()
            if not line:
                raise InputError(f"FIELD: unexpected end of file in ATOMS of {name!r}")
            tokens = line.split()
            if len(tokens) < 3:
                raise InputError(
                    f"FIELD line {lineno}: site record needs name, mass and charge"
                )
            try:
                mass = float(tokens[1])
                charge = float(tokens[2])
                repeat = int(tokens[3]) if len(tokens) > 3 else 1
                frozen = int(tokens[4]) if len(tokens) > 4 else 0
            except ValueError:
                raise InputError(f"FIELD line {lineno}: bad site record {line.strip()!r}") from None
            if mass < 0:
                raise InputError(f"FIELD line {lineno}: negative site mass")
            if repeat < 1:
                raise InputError(f"FIELD line {lineno}: repeat count must be >= 1")
            sites.extend(SiteSpec(tokens[0], mass, charge, frozen) for _ in range(repeat))
        if len(sites) > n_sites:
            raise InputError(
                f"FIELD: repeat counts in {name!r} expand to {len(sites)} sites, "
                f"ATOMS says {n_sites}"
            )

        # Skip bonds/constraints/... up to the closing FINISH.
        while True:
            lineno, line = next_content()
            if not line:
                raise InputError(f"FIELD: missing FINISH for molecule {name!r}")
            if _keyword_matches(line.split()[0], "finish"):
                break

        molecules.append(MoleculeSpec(name, count, tuple(sites)))

    return Topology(tuple(molecules))


class HistoryReader:
    """Streaming reader for HISTORY trajectories.

    Detects and consumes the optional two-line header, then yields
    :class:`Frame` objects lazily.  ``truncated`` becomes True when the file
    ends (or degenerates) mid-frame; the partial frame is dropped and all
    frames yielded before it remain valid.
    """

    def __init__(self, source: str | Path | IO[str], expected_natoms: int | None = None):
        if hasattr(source, "readline"):
            self._fh = source
            self._owns_fh = False
        else:
            self._fh = open(source, "r")
            self._owns_fh = True
        self._expected_natoms = expected_natoms
        self.frames_read = 0
        self.truncated = False
        self._header_checked = False

    def close(self):
        if self._owns_fh:
            self._fh.close()

    def __enter__(self) -> "HistoryReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _next_line(self) -> str | None:
        """Next non-blank line, or None at end of file."""
        for line in self._fh:
            if line.strip():
                return line
        return None

    def _consume_header(self) -> str | None:
        """Swallow the header if present; return the first timestep line."""
        self._header_checked = True
        first = self._next_line()
        if first is None:
            self.truncated = True  # empty trajectory counts as abnormal
            return None
        if _first_token(first) == "timestep":
            return first
        # Header: title line just read, then the levcfg/imcon/natoms line.
        info = self._next_line()
        try:
            for tok in info.split()[:3]:
                int(tok)
        except (AttributeError, ValueError, IndexError):
            raise InputError(
                "HISTORY: first record is neither a header nor a timestep record"
            ) from None
        return self._next_line()

    def __iter__(self) -> Iterator[Frame]:
        line = self._consume_header()
        while line is not None:
            frame = self._read_frame(line)
            if frame is None:
                self.truncated = True
                return
            self.frames_read += 1
            yield frame
            line = self._next_line()

    def _read_frame(self, timestep_line: str) -> Frame | None:
        """Parse one frame; None signals truncation (partial frame dropped)."""
        tokens = timestep_line.split()
        if tokens[0].lower() != "timestep" or len(tokens) < 5:
            return None
        try:
            step = int(tokens[1])
            natoms = int(tokens[2])
            keytrj = int(tokens[3])
            imcon = int(tokens[4])
        except ValueError:
            return None

        if self._expected_natoms is not None and natoms != self._expected_natoms:
            raise InputError(
                f"HISTORY: frame at step {step} has {natoms} sites, "
                f"FIELD topology expects {self._expected_natoms}"
            )

        if imcon > 0:
            rows = []
            for _ in range(3):
                line = self._next_line()
                if line is None:
                    return None
                try:
                    rows.append([float(t) for t in line.split()[:3]])
                except ValueError:
                    return None
                if len(rows[-1]) < 3:
                    return None
            cell = CellTensor(np.array(rows), imcon)
        else:
            cell = CellTensor(np.zeros((3, 3)), 0)

        positions = np.empty((natoms, 3))
        for i in range(natoms):
            if self._next_line() is None:  # name/index/mass/charge record
                return None
            line = self._next_line()
            if line is None:
                return None
            parts = line.split()
            if len(parts) < 3:
                return None
            try:
                positions[i] = [float(parts[0]), float(parts[1]), float(parts[2])]
            except ValueError:
                return None
            for _ in range(min(keytrj, 2)):  # velocity and force lines
                if self._next_line() is None:
                    return None

        return Frame(step, natoms, cell, positions)


def _pair_header(labels, prefix: str) -> str:
    cols = [f"{prefix}({a},{b})" for a, b in labels]
    return "#" + f"{'r':>13}" + "".join(f"{c:>14}" for c in cols)


def _write_table(table, values: np.ndarray, destination, prefix: str) -> None:
    lines = [_pair_header(table.pair_labels, prefix)]
    for n, r in enumerate(table.bin_centers):
        row = f"{r:14.6E}" + "".join(f"{values[p, n]:14.6E}" for p in range(len(table.pair_labels)))
        lines.append(row)
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


def write_rdf(table, destination) -> None:
    """Write the g(r) columns: r first, then like pairs (1,1), (2,2), ...,
    then unlike pairs (1,2), (1,3), (2,3), ... in fixed-width scientific
    notation."""
    _write_table(table, table.g, destination, "g")


def write_pop(table, destination) -> None:
    """Write the cumulative coordination populations in the same layout as
    the RDF file."""
    _write_table(table, table.pop, destination, "pop")
