from cyccon.stats.intervals import MomentBox, TTestResult, conservative_box, two_sample_t
from cyccon.stats.moments import (
    ContextEstimate,
    EstimatedMoment,
    MomentTerms,
    TrialRecords,
    estimate_moments,
    estimates_from_system_file,
    read_records_csv,
    simulate_records,
    system_from_estimates,
    terms_from_estimates,
    write_records_csv,
)
from cyccon.stats.source import MomentDataset, get_dataset, list_datasets, register_dataset
from cyccon.stats.tdist import betainc, t_cdf, t_quantile, t_sf

# Importing the dataset package triggers registration so that
# ``list_datasets()`` / ``get_dataset()`` always see every built-in dataset.
import cyccon.datasets  # noqa: E402,F401

__all__ = [
    "ContextEstimate",
    "EstimatedMoment",
    "MomentBox",
    "MomentDataset",
    "MomentTerms",
    "TTestResult",
    "TrialRecords",
    "betainc",
    "conservative_box",
    "estimate_moments",
    "estimates_from_system_file",
    "get_dataset",
    "list_datasets",
    "read_records_csv",
    "register_dataset",
    "simulate_records",
    "system_from_estimates",
    "t_cdf",
    "t_quantile",
    "t_sf",
    "terms_from_estimates",
    "two_sample_t",
    "write_records_csv",
]
