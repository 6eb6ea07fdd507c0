import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, TypedDict

import numpy as np
import pandas as pd
from omegaconf import DictConfig, OmegaConf

from core.asymptotics import (
    ExperimentSettings,
    dense_constant,
    quartile_deviations,
    regime_experiment,
    sparse_constant,
    strong_law_experiment,
    thermo_constant,
)
from core.components import census
from core.concentration import condition_check, empirical_tails, lemma_sweep
from core.geometry import build_graph, resolve_packing_constant
from core.intensity import sample_poisson, sigma_s
from core.models.experiment_models import ExperimentConfig, GraphStatsSection
from core.utils.config_parser import runtime_threads
from core.utils.reports import write_report
from core.utils.runner import ReplicationRunner
from core.utils.seeding import derive_sequence

logger = logging.getLogger(__name__)

Frames = Dict[str, pd.DataFrame]
Outcome = Tuple[Frames, Dict[str, Any]]


class RunResult(TypedDict):
    subcommand: str
    outputs: List[str]
    summary: Dict[str, Any]


class ExperimentOrchestrator:
    """
    Runs one experiment subcommand against a validated ExperimentConfig.

    Each handler returns the tables to write (file stem → DataFrame) and a
    flat summary dict for the console. Every table is written with the
    config echo block.
    """

    def __init__(self, app_config: DictConfig, config: ExperimentConfig, out_dir: Path):
        self.app_config = app_config
        self.config = config
        self.out_dir = Path(out_dir)
        runtime = app_config.runtime
        self.threads = runtime_threads(app_config, config.threads)
        self.chunk_size = int(config.chunk_size or runtime.chunk_size)
        self.runner = ReplicationRunner(self.threads, self.chunk_size)
        self.handlers: Dict[str, Callable[[], Outcome]] = {
            "sample": self.run_sample,
            "graph-stats": self.run_graph_stats,
            "tails": self.run_tails,
            "condition-check": self.run_condition_check,
            "constants": self.run_constants,
            "regime": self.run_regime,
            "strong-law": self.run_strong_law,
            "lemma-check": self.run_lemma_check,
        }

    def run(self, subcommand: str) -> RunResult:
        if subcommand not in self.handlers:
            raise ValueError(f"Unknown subcommand '{subcommand}'. Available: {', '.join(self.handlers)}")
        self.config.require(subcommand)
        logger.info(f"Running '{subcommand}' with master seed {self.config.master_seed} on {self.threads} thread(s).")
        frames, summary = self.handlers[subcommand]()

        echo = self.config.echo()
        outputs = [
            str(write_report(frame, self.out_dir / f"{stem}.csv", echo)) for stem, frame in frames.items()
        ]
        return {"subcommand": subcommand, "outputs": outputs, "summary": summary}

    # --- helpers -----------------------------------------------------------

    def _settings(self, boundary: str = "eroded") -> ExperimentSettings:
        mc = self.app_config.runtime.monte_carlo
        windows = self.app_config.runtime.windows
        constants = self.config.constants
        return ExperimentSettings(
            n_samples=int(constants.n_samples if constants and constants.n_samples else mc.n_samples),
            inner_samples=int(constants.inner_samples if constants and constants.inner_samples else mc.inner_samples),
            chunk_size=int(mc.chunk_size),
            tail_fraction=float(windows.tail_fraction),
            min_radius=float(windows.min_radius),
            boundary=boundary,
            u_cap=int(self.app_config.runtime.u_enumeration_cap),
            dense_method=constants.dense_method if constants else "importance",
        )

    def _packing(self, override):
        shape = self.config.build_shape()
        packing = self.app_config.packing
        return resolve_packing_constant(
            shape,
            override=override,
            table=OmegaConf.to_container(packing.known),
            restarts=int(packing.search.restarts),
            pool_size=int(packing.search.pool_size),
            seed=self.config.master_seed,
        )

    def _sub_seed(self, *path: int) -> int:
        return int(derive_sequence(self.config.master_seed, *path).generate_state(1, dtype=np.uint64)[0])

    # --- handlers ----------------------------------------------------------

    def run_sample(self) -> Outcome:
        model, window = self.config.build_model(), self.config.build_window()
        points = sample_poisson(model, window, self.config.master_seed, replication=0)
        columns = [f"x{i}" for i in range(window.dimension)]
        frame = pd.DataFrame(points.points, columns=columns)
        return {"sample": frame}, {"points": len(points), "expected": model.mass(window)}

    def run_graph_stats(self) -> Outcome:
        model, window, shape = self.config.build_model(), self.config.build_window(), self.config.build_shape()
        section = self.config.graph_stats or GraphStatsSection()
        boundary = self.config.boundary

        def task(i: int):
            graph = build_graph(sample_poisson(model, window, self.config.master_seed, replication=i), shape)
            return graph.n_vertices, census(graph, depth=section.depth, boundary=boundary)

        rows = []
        vertices = []
        for i, (n, result) in enumerate(self.runner.map(task, range(section.n_replications))):
            vertices.append(n)
            for size, count in result.counts_by_size.items():
                rows.append({"replication": i, "size": size, "isoclass": "", "count": count})
            for (size, code), count in sorted(result.counts_by_isoclass.items()):
                rows.append({"replication": i, "size": size, "isoclass": code, "count": count})
        frame = pd.DataFrame(rows, columns=["replication", "size", "isoclass", "count"])
        summary = {"replications": section.n_replications, "mean_vertices": float(np.mean(vertices))}
        return {"graph_stats": frame}, summary

    def run_tails(self) -> Outcome:
        section = self.config.tails
        model, window, shape = self.config.build_model(), self.config.build_window(), self.config.build_shape()
        selector = self.config.build_selector()
        packing = self._packing(section.c_s_override)
        sigma = sigma_s(model, shape)
        logger.info(f"c_S = {packing.value} ({packing.source}); sigma = {sigma:.6g}.")
        report = empirical_tails(
            model, window, shape, selector, section.r_grid, section.n_replications, self.config.master_seed,
            c_s=packing.value, sigma=sigma, c_s_certified=packing.certified, boundary=self.config.boundary,
            mean_f=section.mean_f, runner=self.runner, enforce=section.enforce,
        )
        frame = report.to_frame().join(report.domination().drop(columns="r"))
        return {"tails": frame, "tails_log": report.log_tail_frame()}, report.summary()

    def run_condition_check(self) -> Outcome:
        section = self.config.condition
        model, window, shape = self.config.build_model(), self.config.build_window(), self.config.build_shape()
        selector = self.config.build_selector()
        packing = self._packing(section.c_s_override)
        sigma = sigma_s(model, shape)

        def task(i: int) -> Dict[str, Any]:
            config = sample_poisson(model, window, self.config.master_seed, replication=i)
            record = condition_check(
                config, shape, selector, model, section.mc_points, self._sub_seed(i), packing.value, sigma=sigma
            )
            return {"replication": i, **record.to_dict()}

        frame = pd.DataFrame(self.runner.map(task, range(section.n_configs)))
        summary = {
            "configs": section.n_configs,
            "c_s": packing.value,
            "sigma": sigma,
            "all_satisfied": bool(frame["satisfied"].all()),
            "hard_failures": int((~frame["satisfied"]).sum()),
        }
        return {"condition": frame}, summary

    def run_constants(self) -> Outcome:
        section = self.config.constants
        model, shape, selector = self.config.build_model(), self.config.build_shape(), self.config.build_selector()
        settings = self._settings()
        seed = self.config.master_seed
        window = self.config.build_window() if self.config.window is not None else None
        if section.regime == "sparse":
            report = sparse_constant(model, shape, selector, settings.n_samples, seed, settings.chunk_size, window=window)
        elif section.regime == "thermodynamic":
            report = thermo_constant(
                model, shape, selector, section.c, settings.n_samples, settings.inner_samples, seed,
                settings.chunk_size, window=window,
            )
        else:
            report = dense_constant(
                model, shape, selector, settings.n_samples, settings.inner_samples, seed, settings.chunk_size,
                method=section.dense_method,
            )
        summary = {"regime": section.regime, **report.summary()}
        return {"constants": pd.DataFrame([summary])}, summary

    def _regime_inputs(self):
        section = self.config.regime
        window = section.window.build() if section.window is not None else None
        return (
            self.config.build_regime(),
            self.config.build_shape(),
            self.config.build_selector(),
            self.config.build_model(),
            window,
            self._settings(section.boundary),
        )

    def run_regime(self) -> Outcome:
        regime, shape, selector, model, window, settings = self._regime_inputs()
        report = regime_experiment(
            regime, shape, selector, model, self.config.regime.n_replications, self.config.master_seed,
            settings, self.runner, window,
        )
        table = report.table
        summary = {
            "regime": regime.classified_regime,
            "limit": report.value,
            "limit_se": report.std_error,
            "final_ratio": float(table["ratio"].iloc[-1]),
        }
        if "bracket_ok" in table:
            summary["bracket_ok"] = bool(table["bracket_ok"].all())
        return {"regime": table}, summary

    def run_strong_law(self) -> Outcome:
        regime, shape, selector, model, window, settings = self._regime_inputs()
        report = strong_law_experiment(
            regime, shape, selector, model, self.config.master_seed, settings, self.runner, window
        )
        bottom, top = quartile_deviations(report.table)
        summary = {
            "regime": regime.classified_regime,
            "limit": report.value,
            "growth_ok": bool(report.table["growth_ok"].iloc[0]),
            "bottom_quartile_deviation": bottom,
            "top_quartile_deviation": top,
        }
        return {"strong_law": report.table}, summary

    def run_lemma_check(self) -> Outcome:
        section = self.config.lemma
        kwargs = section.model_dump() if section is not None else {}
        sweep = lemma_sweep(seed=self.config.master_seed, **kwargs)
        violations = (
            sweep["lemma_violations"]
            + sweep["majorant_violations"]
            + int(not sweep["psi_over_z2_monotone"])
            + int(not sweep["phi_below_psi"])
        )
        summary = {"violations": violations, **sweep}
        return {"lemma_check": pd.DataFrame([sweep])}, summary
