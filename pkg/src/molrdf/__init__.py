"""Centre-of-mass radial distribution functions from DL_POLY-style trajectories."""

from .errors import AnalysisError, InputError, NoFramesError, UnfoldError
from .geometry import CellTensor
from .rdf_engine import PairHistogram, RdfTable, accumulate_frame, finalize, merge
from .synthetic import SyntheticConfig, generate_dataset
from .trajectory_io import (
    Directives,
    Frame,
    HistoryReader,
    MoleculeSpec,
    SiteSpec,
    Topology,
    parse_directives,
    parse_field,
    write_pop,
    write_rdf,
)
from .unfolding import MoleculeSnapshot, center_of_mass, unfold_molecule

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "CellTensor",
    "Directives",
    "Frame",
    "HistoryReader",
    "InputError",
    "MoleculeSnapshot",
    "MoleculeSpec",
    "NoFramesError",
    "PairHistogram",
    "RdfTable",
    "SiteSpec",
    "SyntheticConfig",
    "Topology",
    "UnfoldError",
    "accumulate_frame",
    "center_of_mass",
    "finalize",
    "generate_dataset",
    "merge",
    "parse_directives",
    "parse_field",
    "unfold_molecule",
    "write_pop",
    "write_rdf",
    "__version__",
]
