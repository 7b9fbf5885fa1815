from eigenfactors.storage.formats import (
    accuracy_csv,
    bench_csv,
    dataset_from_dict,
    dataset_to_dict,
    evaluation_csv,
    format_trajectory,
    load_dataset,
    load_trajectory,
    parse_trajectory,
    save_dataset,
    save_trajectory,
    trace_csv,
)
from eigenfactors.storage.manifest import RunStore

__all__ = [
    "RunStore",
    "accuracy_csv",
    "bench_csv",
    "dataset_from_dict",
    "dataset_to_dict",
    "evaluation_csv",
    "format_trajectory",
    "load_dataset",
    "load_trajectory",
    "parse_trajectory",
    "save_dataset",
    "save_trajectory",
    "trace_csv",
]
