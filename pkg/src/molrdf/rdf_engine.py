"""Pair-distance histograms, their normalisation to g(r), and coordination counts.

Binning convention: distances go into bins of width dr centred on 0, dr,
2*dr, ..., so bin n (1-based) covers [(n-1)*dr - dr/2, (n-1)*dr + dr/2) and a
distance lands in bin 1 + NINT(r/dr).  The first bin is a half shell; shell
volumes clamp the inner radius at zero accordingly.  A pair is counted
whenever its bin exists (r below rmax + dr/2), so every recorded shell,
including the one centred on rmax, is fully populated; distances beyond that
are discarded.

Counting is over ordered pairs: each unordered molecule pair (i, j) of types
(a, b) increments both the (a, b) and the (b, a) cell, so a like pair adds 2
to its own histogram.  Dividing the per-frame average by the number of
molecules of the first type gives h(n), the mean count of second-type
neighbours in shell n around one first-type molecule; g(r) then divides out
the shell volume and the bulk number density of the second type, and the
cumulative sum of h(n) is the coordination population.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NoFramesError
from .geometry import CellTensor, cell_volume, min_image_cutoff, nint, periodic_mask, to_reduced
from .trajectory_io import Topology

logger = logging.getLogger(__name__)

# Pair index chunks are capped so per-frame scratch arrays stay modest.
_CHUNK_PAIRS = 2_000_000

SMOOTH_KERNEL = np.array([-3.0, 12.0, 17.0, 12.0, -3.0]) / 35.0


def n_bins(rmax: float, dr: float) -> int:
    return int(1 + nint(rmax / dr))


def bin_index(r, dr: float):
    """1-based bin number(s) for distance(s) r."""
    idx = 1 + nint(np.asarray(r) / dr)
    return idx.astype(np.int64) if idx.ndim else int(idx)


@dataclass(eq=False)
class PairHistogram:
    """Accumulated pair counts plus the bookkeeping needed to normalise them."""

    counts: np.ndarray  # (n_types, n_types, n_bins) int64, ordered pairs
    dr: float
    rmax: float
    frames_used: int = 0
    volume_sum: float = 0.0
    range_warned: bool = False

    @classmethod
    def create(cls, n_types: int, rmax: float, dr: float) -> "PairHistogram":
        if n_types < 1:
            raise ValueError("need at least one molecule type")
        shape = (n_types, n_types, n_bins(rmax, dr))
        return cls(np.zeros(shape, dtype=np.int64), dr, rmax)

    @property
    def n_types(self) -> int:
        return self.counts.shape[0]


def _pair_strips(n: int):
    """All i < j index pairs, yielded in row strips of bounded size."""
    rows_per_strip = max(1, _CHUNK_PAIRS // max(n, 1))
    for i0 in range(0, n - 1, rows_per_strip):
        i1 = min(i0 + rows_per_strip, n - 1)
        ii = np.arange(i0, i1)[:, None]
        jj = np.arange(n)[None, :]
        mask = jj > ii
        yield (
            np.broadcast_to(ii, mask.shape)[mask],
            np.broadcast_to(jj, mask.shape)[mask],
        )


def accumulate_frame(
    hist: PairHistogram,
    types: np.ndarray,
    coms: np.ndarray,
    cell: CellTensor,
) -> None:
    """Add one frame's centre-of-mass pair distances to the histogram.

    ``types`` holds the 0-based type index of each molecule and ``coms`` the
    matching positions.  Distances use the minimum-image convention along the
    periodic directions of the cell.
    """
    coms = np.asarray(coms, dtype=float)
    types = np.asarray(types, dtype=np.int64)
    if coms.ndim != 2 or coms.shape[1] != 3 or len(types) != len(coms):
        raise ValueError("types and coms must be matching (n,) and (n, 3) arrays")
    if types.size and (types.min() < 0 or types.max() >= hist.n_types):
        raise ValueError("type index out of range for this histogram")

    if cell.imcon > 0 and not hist.range_warned:
        cutoff = min_image_cutoff(cell)
        if hist.rmax > cutoff + 1e-9:
            hist.range_warned = True
            logger.warning(
                "rmax %.4f exceeds the safe minimum-image radius %.4f of the "
                "cell; g(r) is unreliable beyond that distance",
                hist.rmax,
                cutoff,
            )

    if cell.imcon > 0:
        pos = to_reduced(coms, cell)
        mask = periodic_mask(cell.imcon)
    else:
        pos = coms
        mask = None

    n = len(pos)
    nbins = hist.counts.shape[2]
    for i_arr, j_arr in _pair_strips(n):
        d = pos[j_arr] - pos[i_arr]
        if mask is not None:
            d[:, mask] -= nint(d[:, mask])
            d = d @ cell.matrix
        r = np.linalg.norm(d, axis=1)
        # Acceptance is by bin, not by raw distance: a pair counts whenever
        # its bin exists, so the shell around rmax itself fills completely
        # instead of being cut in half at the boundary.
        idx = nint(r / hist.dr).astype(np.int64)
        keep = idx < nbins
        if not np.any(keep):
            continue
        idx = idx[keep]
        ti = types[i_arr[keep]]
        tj = types[j_arr[keep]]
        np.add.at(hist.counts, (ti, tj, idx), 1)
        np.add.at(hist.counts, (tj, ti, idx), 1)

    hist.frames_used += 1
    hist.volume_sum += cell_volume(cell)


def merge(a: PairHistogram, b: PairHistogram) -> PairHistogram:
    """Combine two partial histograms (same geometry) into a new one."""
    if a.counts.shape != b.counts.shape or a.dr != b.dr or a.rmax != b.rmax:
        raise ValueError("histograms were built with different binning")
    return PairHistogram(
        a.counts + b.counts,
        a.dr,
        a.rmax,
        a.frames_used + b.frames_used,
        a.volume_sum + b.volume_sum,
        a.range_warned or b.range_warned,
    )


def smooth_curve(y: np.ndarray) -> np.ndarray:
    """Five-point least-squares quadratic smoothing of the interior points.

    The two points at each end pass through unchanged, as do curves shorter
    than the window.  Exact for data that is quadratic in the bin index.
    """
    y = np.asarray(y, dtype=float)
    out = y.copy()
    if y.shape[-1] >= 5:
        out[..., 2:-2] = np.apply_along_axis(
            lambda row: np.convolve(row, SMOOTH_KERNEL, mode="valid"), -1, y
        )
    return out


@dataclass(frozen=True, eq=False)
class RdfTable:
    """Normalised results ready for writing.

    ``pair_labels`` carries 1-based type numbers in output order: like pairs
    first, then unlike pairs lexicographically.  Row p of ``g`` and ``pop``
    belongs to ``pair_labels[p]``; for a pair (a, b), pop is the average
    number of type-b molecules within r of one type-a molecule.
    """

    pair_labels: tuple[tuple[int, int], ...]
    bin_centers: np.ndarray  # (n_bins,)
    g: np.ndarray  # (n_pairs, n_bins)
    pop: np.ndarray  # (n_pairs, n_bins)
    mean_volume: float
    frames_used: int


def shell_volumes(nbins: int, dr: float) -> np.ndarray:
    centers = np.arange(nbins) * dr
    outer = centers + dr / 2.0
    inner = np.maximum(centers - dr / 2.0, 0.0)
    return (4.0 * np.pi / 3.0) * (outer**3 - inner**3)


def finalize(hist: PairHistogram, topology: Topology, smooth: bool = False) -> RdfTable:
    """Turn raw counts into g(r) and coordination populations.

    Molecule types whose sites carry no mass have no centre of mass; they are
    dropped from the output with a warning.  Type numbering in the labels
    stays as declared, so dropping a type leaves a gap rather than renumbering
    the survivors.
    """
    if hist.frames_used == 0:
        raise NoFramesError("no frames were accumulated")
    if topology.n_types != hist.n_types:
        raise ValueError("topology does not match histogram type count")
    mean_volume = hist.volume_sum / hist.frames_used
    if mean_volume <= 0.0:
        raise InputError(
            "mean cell volume is not positive; g(r) needs a periodic cell"
        )

    kept = []
    for t, mol in enumerate(topology.molecules):
        if mol.total_mass > 0.0:
            kept.append(t)
        else:
            logger.warning(
                "molecule type %d (%s) carries no mass and is excluded from "
                "the distribution functions",
                t + 1,
                mol.name,
            )
    if not kept:
        raise InputError("every molecule type is massless; nothing to analyse")

    labels = [(t, t) for t in kept]
    labels += [(a, b) for k, a in enumerate(kept) for b in kept[k + 1 :]]

    nbins = hist.counts.shape[2]
    centers = np.arange(nbins) * hist.dr
    vshell = shell_volumes(nbins, hist.dr)

    g = np.empty((len(labels), nbins))
    pop = np.empty_like(g)
    for p, (a, b) in enumerate(labels):
        n_a = topology.molecules[a].count
        n_b = topology.molecules[b].count
        h_mean = hist.counts[a, b] / (hist.frames_used * n_a)
        rho_b = n_b / mean_volume
        g[p] = h_mean / (vshell * rho_b)
        pop[p] = np.cumsum(h_mean)

    if smooth:
        g = smooth_curve(g)

    return RdfTable(
        pair_labels=tuple((a + 1, b + 1) for a, b in labels),
        bin_centers=centers,
        g=g,
        pop=pop,
        mean_volume=mean_volume,
        frames_used=hist.frames_used,
    )
