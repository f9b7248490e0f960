"""Multi-view linear predictors trained for multivariate performance measures."""

from .data import MultiViewDataset, from_arrays, load_manifest, validate, write_dataset
from .errors import DataError, DimensionMismatch, MeasureError, MVPerfError, SearchError, SolverError
from .inference import point_scores, predict, psi, view_score
from .measures import ContingencyTable, Measure, admissible, contingency, loss, parse_measure
from .search import SearchResult, most_violated, most_violated_bruteforce
from .trainer import Model, TrainConfig, TrainState, evaluate, load_model, save_model, train

__version__ = "0.1.0"

__all__ = [
    "ContingencyTable", "DataError", "DimensionMismatch", "Measure", "MeasureError", "Model", "MultiViewDataset",
    "MVPerfError", "SearchError", "SearchResult", "SolverError", "TrainConfig", "TrainState", "admissible",
    "contingency", "evaluate", "from_arrays", "load_manifest", "load_model", "loss", "most_violated",
    "most_violated_bruteforce", "parse_measure", "point_scores", "predict", "psi", "save_model", "train",
    "validate", "view_score", "write_dataset",
]
