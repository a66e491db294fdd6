"""
Cell-tensor algebra for the periodic-boundary conventions of DL_POLY-style
simulation cells.

Rows of the cell matrix are the lattice vectors (``C[0] = a``, ``C[1] = b``,
``C[2] = c``) and positions are row vectors, so

- Cartesian from reduced: ``r = s @ C``
- reduced from Cartesian: ``s = r @ inv(C)``

Supported periodic-image convention codes (``imcon``):

====== ====================================================
0      no periodic boundaries
1      cubic cell
2      orthorhombic cell
3      parallelepiped (triclinic) cell
6      slab: periodic along the first two lattice vectors only
====== ====================================================

Two rounding conventions live here and downstream histogram bin edges depend
on them:

- :func:`nint` rounds half away from zero (the Fortran NINT convention), so a
  reduced displacement component of exactly +0.5 folds to -0.5 and -0.5 folds
  to +0.5.
- :func:`wrap_point` centres the cell on the origin: wrapped reduced
  components lie in the half-open interval [-0.5, 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

SUPPORTED_IMCON = frozenset({0, 1, 2, 3, 6})

#: Relative tolerance used to check that cells declared cubic/orthorhombic
#: really are diagonal.
_SHAPE_TOL = 1e-6

_PERIODIC_MASK = {
    0: np.array([False, False, False]),
    1: np.array([True, True, True]),
    2: np.array([True, True, True]),
    3: np.array([True, True, True]),
    6: np.array([True, True, False]),
}


def nint(x):
    """Nearest integer with halves rounded away from zero (Fortran NINT).

    Works elementwise on arrays; returns floats so the result can be
    subtracted from reduced coordinates without casting.
    """
    x = np.asarray(x, dtype=float)
    return np.trunc(x + np.copysign(0.5, x))


def periodic_mask(imcon: int) -> np.ndarray:
    """Boolean mask of the lattice directions that are periodic for *imcon*."""
    try:
        return _PERIODIC_MASK[imcon]
    except KeyError:
        raise InputError(f"unsupported periodic-boundary code imcon={imcon}") from None


@dataclass(frozen=True, eq=False)
class CellTensor:
    """A 3x3 lattice matrix (rows are lattice vectors) plus its imcon code.

    The inverse is computed once at construction for periodic cells; a
    singular matrix with ``imcon > 0`` is rejected.
    """

    matrix: np.ndarray
    imcon: int
    inverse: np.ndarray | None = field(init=False, default=None)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.shape != (3, 3):
            raise InputError(f"cell matrix must be 3x3, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise InputError("cell matrix contains non-finite entries")
        if self.imcon not in SUPPORTED_IMCON:
            raise InputError(
                f"unsupported periodic-boundary code imcon={self.imcon} "
                f"(supported: {sorted(SUPPORTED_IMCON)})"
            )
        object.__setattr__(self, "matrix", matrix)

        if self.imcon > 0:
            det = np.linalg.det(matrix)
            if det == 0.0:
                raise InputError("singular cell tensor for a periodic cell")
            object.__setattr__(self, "inverse", np.linalg.inv(matrix))

        scale = max(np.abs(matrix).max(), 1.0)
        off_diagonal = matrix[~np.eye(3, dtype=bool)]
        if self.imcon in (1, 2) and np.abs(off_diagonal).max() > _SHAPE_TOL * scale:
            raise InputError(f"imcon={self.imcon} requires a diagonal cell matrix")
        if self.imcon == 1:
            diag = np.diag(matrix)
            if np.abs(diag - diag[0]).max() > _SHAPE_TOL * scale:
                raise InputError("imcon=1 requires a cubic cell (equal diagonal)")

    @classmethod
    def cubic(cls, length: float) -> "CellTensor":
        return cls(np.diag([length, length, length]), imcon=1)

    @classmethod
    def orthorhombic(cls, lx: float, ly: float, lz: float) -> "CellTensor":
        return cls(np.diag([lx, ly, lz]), imcon=2)

    @property
    def periodic(self) -> np.ndarray:
        """Boolean mask of the periodic lattice directions."""
        return periodic_mask(self.imcon)


def to_reduced(r: np.ndarray, cell: CellTensor) -> np.ndarray:
    """Convert Cartesian positions to reduced (fractional) coordinates.

    Parameters
    ----------
    r : np.ndarray, shape (3,) or (N, 3)
        Cartesian positions in Angstrom.
    cell : CellTensor
        Periodic cell; must have ``imcon > 0`` so the inverse exists.

    Returns
    -------
    np.ndarray
        Reduced coordinates ``s = r @ inv(C)``; unbounded (unfolded values
        may lie outside [0, 1)).
    """
    if cell.inverse is None:
        raise InputError("reduced coordinates undefined for a non-periodic cell")
    return np.asarray(r, dtype=float) @ cell.inverse


def to_real(s: np.ndarray, cell: CellTensor) -> np.ndarray:
    """Convert reduced coordinates back to Cartesian: ``r = s @ C``."""
    return np.asarray(s, dtype=float) @ cell.matrix


def min_image_displacement(s_from: np.ndarray, s_to: np.ndarray, imcon: int) -> np.ndarray:
    """Minimum-image displacement in reduced coordinates.

    Computes ``b = s_to - s_from`` and folds each periodic component with
    ``d = b - nint(b)``, leaving non-periodic components (all of them for
    imcon 0, the third for imcon 6) untouched.  Folded components lie in
    [-0.5, 0.5]; a component of exactly +/-0.5 flips sign per the
    half-away-from-zero rule.

    Broadcasts over leading axes, so ``(N, 3)`` inputs give ``(N, 3)``
    displacements.
    """
    mask = periodic_mask(imcon)
    d = np.asarray(s_to, dtype=float) - np.asarray(s_from, dtype=float)
    if mask.any():
        d[..., mask] -= nint(d[..., mask])
    return d


def wrap_point(r: np.ndarray, cell: CellTensor) -> np.ndarray:
    """Translate a point by lattice vectors into the origin-centred cell.

    Periodic reduced components of the result lie in [-0.5, 0.5); for
    imcon 0 the point is returned unchanged.  The return value differs from
    the input by an integer combination of lattice vectors, so repeated
    wrapping is a no-op.
    """
    r = np.asarray(r, dtype=float)
    if cell.imcon == 0:
        return r.copy()
    s = to_reduced(r, cell)
    shift = np.zeros_like(s)
    mask = cell.periodic
    shift[..., mask] = np.floor(s[..., mask] + 0.5)
    return r - shift @ cell.matrix


def cell_volume(cell: CellTensor) -> float:
    """Cell volume ``|det(C)|`` in cubic Angstrom."""
    return float(abs(np.linalg.det(cell.matrix)))


def min_image_cutoff(cell: CellTensor) -> float:
    """Largest pair distance for which the minimum-image fold is unbiased.

    Half the smallest perpendicular width of the cell over its periodic
    directions: the inscribed-sphere radius for fully periodic cells, the
    inscribed-circle radius of the (a, b) parallelogram for slabs, and
    infinity when nothing is periodic.
    """
    a, b, c = cell.matrix
    if cell.imcon == 0:
        return np.inf
    if cell.imcon == 6:
        area = np.linalg.norm(np.cross(a, b))
        return 0.5 * min(area / np.linalg.norm(a), area / np.linalg.norm(b))
    volume = cell_volume(cell)
    heights = [
        volume / np.linalg.norm(np.cross(b, c)),
        volume / np.linalg.norm(np.cross(c, a)),
        volume / np.linalg.norm(np.cross(a, b)),
    ]
    return 0.5 * min(heights)
