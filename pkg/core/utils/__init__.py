from .config_parser import config_hash, load_app_config, load_experiment_file, runtime_threads
from .reports import read_echo, read_report, write_report
from .runner import ReplicationRunner

__all__ = [
    "load_app_config",
    "load_experiment_file",
    "runtime_threads",
    "config_hash",
    "write_report",
    "read_echo",
    "read_report",
    "ReplicationRunner",
]
