"""
Configuration Module for the Quasi-Power Lab
Centralizes numeric defaults, capacity limits, exit codes and output templates.
"""
from typing import Dict, List

# --- Artifact ---
ARTIFACT_NAME = "quasipower-lab"
ARTIFACT_VERSION = "1.0.0"

# --- Capacity limits ---
MAX_PARTITION_SIZE = 12
MAX_QUADRATURE_DIM = 3
MAX_GAUSSIAN_CDF_DIM = 3
MAX_QUADRATURE_NODES = 2 ** 23
GRAMMAR_LENGTH_CAP = 40
ENUMERATION_CERTIFY_DEPTH = 12
DISSECTION_ENUMERATION_CAP = 10

# --- Numerics ---
DEFAULT_LAMBDA_FLOOR = 1e-12
DEFAULT_NODES_PER_PANEL = 24
DEFAULT_PANELS_PER_SIGN = 2
DEFAULT_MAX_LEVEL = 4
DEFAULT_REL_TOL = 1e-6
DEFAULT_TOL = 1e-4
DEFAULT_T_SWEEP = (2.0, 5.0, 10.0)
DEFAULT_SERIES_ORDER = 4
KOLMOGOROV_EPS_FACTOR = 1e-9
DEFAULT_BOUND_REL_TOL = 1e-3

# Gaussian CDF: graded Gauss-Legendre panels on each conditional interval,
# split where the next conditional bound changes sign
GAUSSIAN_CDF_PANELS = 4
GAUSSIAN_CDF_NODES_PER_PANEL = 24
GAUSSIAN_CDF_MAX_LEVEL = 4
GAUSSIAN_CDF_MAX_NODES = 2 ** 20
GAUSSIAN_CDF_CHUNK_NODES = 2 ** 22

# --- Exit codes ---
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPACITY = 2
EXIT_NONCONVERGENCE = 3

# --- Example grammar (context-free language example) ---
EXAMPLE_GRAMMAR = """# S -> aSbS | bT,  T -> bS | cT | a
terminals: a b c
nonterminals: S T
start: S
track: a b
S -> a S b S
S -> b T
T -> b S
T -> c T
T -> a
"""

# --- Output templates ---
OUTPUT_COLUMNS: Dict[str, List[str]] = {
    "partitions": ["index", "blocks", "num_blocks", "mobius"],
    "bound": ["T", "integral", "marginal", "smoothing", "rhs", "lhs", "holds"],
    "study": ["n", "phi_n", "d_n", "d_n_sqrt_phi", "mode"],
    "moments": ["n", "exact", "predicted", "abs_error"],
    "degenerate": ["n", "distance", "gaussian_floor_distance"],
    "grammar_counts": ["n", "{axes}", "count"],
    "dissection_counts": ["n", "{axes}", "count"],
}


def get_columns(kind: str, axes: List[str] = None) -> List[str]:
    """
    Retrieves the CSV column list for an output kind.

    Args:
        kind: Output kind ("bound", "study", ...).
        axes: Axis names substituted for the "{axes}" placeholder.

    Returns:
        Column names in output order.

    Raises:
        KeyError: If kind is not a known output kind.
    """
    if kind not in OUTPUT_COLUMNS:
        raise KeyError(f"Output template '{kind}' not found.")

    columns: List[str] = []
    for column in OUTPUT_COLUMNS[kind]:
        if column == "{axes}":
            columns.extend(axes or [])
        else:
            columns.append(column)
    return columns
