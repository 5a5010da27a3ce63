"""Experiment store, polynomial models and optimum search for debiting processes."""

from erode.errors import (
    CsvFormatError,
    ErodeError,
    FitError,
    RecordError,
    SingularSystemError,
    StoreFormatError,
    UnsupportedDegreeError,
)
from erode.store import (
    Dataset,
    ExperimentRecord,
    ExperimentStore,
    QueryFilter,
    extract_dataset,
    load_store,
    parse_csv,
    save_store,
    to_csv,
)
from erode.polyfit import (
    FitReport,
    PolynomialModel,
    derivative,
    deviation,
    evaluate,
    fit,
    select_best,
)
from erode.optimizer import (
    OptimizationResult,
    RandomSearchParams,
    Range,
    inverse_solve,
    minimize_analytic,
    minimize_controlled_random,
    minimize_grid,
    minimize_pure_random,
)

__version__ = "0.1.0"
