from .orchestrator import ExperimentOrchestrator, RunResult

__all__ = ["ExperimentOrchestrator", "RunResult"]
