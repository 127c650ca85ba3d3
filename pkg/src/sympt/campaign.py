"""Seeded, order-stable batches of extremal-state searches."""

from __future__ import annotations

import csv
import json
import os
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extremal import SearchAborted, SearchOptions, run_to_extremal
from .spectra import RankProfile, _tol, view_summaries
from .statefile import save_state
from .symcore import InvalidInputError, SymmetricState

CSV_COLUMNS = ("run_index", "seed", "n_steps", "terminal_profile", "extremal", "verdict", "wall_ms")
ABORTED = "Aborted"


@dataclass(frozen=True)
class CampaignConfig:
    n_qubits: int
    runs: int
    seed: int = 0
    rank_tol: float | None = None
    target_profile: RankProfile | None = None
    output_dir: Path | None = None
    parallelism: int = 1
    # stop at the last candidate-entangled state instead of descending into
    # provably separable territory
    stop_when_separable: bool = True

    def __post_init__(self):
        if not 4 <= self.n_qubits <= 30:
            raise InvalidInputError(f"n_qubits must be in 4..30, got {self.n_qubits}")
        if self.runs < 1:
            raise InvalidInputError("runs must be >= 1")
        if self.parallelism < 1:
            raise InvalidInputError("parallelism must be >= 1")
        if self.target_profile is not None:
            target = RankProfile(tuple(self.target_profile))
            target.check(self.n_qubits)
            object.__setattr__(self, "target_profile", target)


@dataclass(frozen=True, eq=False)
class RunRecord:
    run_index: int
    seed: int
    n_steps: int
    terminal_profile: RankProfile
    extremal: bool
    entangled: bool
    verdict: str
    wall_ms: float
    rules: tuple[str, ...] = ()
    exit_profile: RankProfile | None = None
    intermediate: tuple[RankProfile, ...] = ()
    # eigenvalues of the terminal views within 10x of the rank threshold
    borderline: int = 0
    terminal: SymmetricState | None = field(default=None, repr=False)

    def csv_row(self) -> list:
        return [self.run_index, self.seed, self.n_steps, self.terminal_profile.dashed(),
                int(self.extremal), self.verdict, f"{self.wall_ms:.3f}"]


@dataclass(eq=False)
class CampaignReport:
    config: CampaignConfig
    records: list[RunRecord]
    state_files: dict[int, Path] = field(default_factory=dict)

    @property
    def profile_frequencies(self) -> Counter:
        return Counter(r.terminal_profile for r in self.records)

    @property
    def entangled_records(self) -> list[RunRecord]:
        return [r for r in self.records if r.entangled]

    @property
    def entangled_profiles(self) -> Counter:
        return Counter(r.terminal_profile for r in self.entangled_records)

    @property
    def extremal_entangled_fraction(self) -> float:
        return len(self.entangled_records) / len(self.records)

    def to_json(self) -> dict:
        cfg = self.config
        return {
            "n_qubits": cfg.n_qubits,
            "runs": cfg.runs,
            "seed": cfg.seed,
            "rank_tol": _tol(cfg.rank_tol),
            "target_profile": None if cfg.target_profile is None else cfg.target_profile.dashed(),
            "stop_when_separable": cfg.stop_when_separable,
            "extremal_entangled_fraction": self.extremal_entangled_fraction,
            "profile_frequencies": {p.dashed(): c for p, c in sorted(self.profile_frequencies.items(),
                                                                      key=lambda kv: kv[0].ranks)},
            "runs_detail": [
                {
                    "run_index": r.run_index,
                    "seed": r.seed,
                    "n_steps": r.n_steps,
                    "terminal_profile": r.terminal_profile.dashed(),
                    "extremal": r.extremal,
                    "entangled": r.entangled,
                    "verdict": r.verdict,
                    "rules": list(r.rules),
                    "borderline_eigenvalues": r.borderline,
                    "exit_profile": None if r.exit_profile is None else r.exit_profile.dashed(),
                    "wall_ms": round(r.wall_ms, 3),
                    "state_file": str(self.state_files[r.run_index]) if r.run_index in self.state_files else None,
                }
                for r in self.records
            ],
        }


def run_seed(seed: int, run_index: int) -> int:
    """Per-run seed; a pure function of (campaign seed, run index)."""
    return int(np.random.SeedSequence([seed, run_index]).generate_state(1, np.uint64)[0])


def _single_run(args) -> RunRecord:
    cfg, index = args
    seed = run_seed(cfg.seed, index)
    opts = SearchOptions(rel_tol=cfg.rank_tol, target=cfg.target_profile,
                         stop_when_separable=cfg.stop_when_separable, keep_states=False)
    start = time.perf_counter()
    try:
        traj = run_to_extremal(rng_seed=seed, opts=opts, n_qubits=cfg.n_qubits)
    except SearchAborted as err:
        traj = err.trajectory
        wall = (time.perf_counter() - start) * 1e3
        return RunRecord(index, seed, len(traj.steps), traj.terminal_profile, False, False, ABORTED, wall)
    wall = (time.perf_counter() - start) * 1e3
    cls = traj.terminal_classification
    borderline = sum(len(summ.borderline) for summ in view_summaries(traj.terminal, cfg.rank_tol))
    return RunRecord(
        index, seed, len(traj.steps), traj.terminal_profile, traj.terminal_extremal, traj.entangled,
        cls.verdict.value, wall, cls.triggered_rules, traj.exit_profile,
        tuple(st.profile for st in traj.steps), borderline, traj.terminal,
    )


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe-"):
            pass
    except OSError as err:
        raise OSError(f"output directory {out} is not writable: {err}") from err


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Run ``cfg.runs`` independent searches and merge them in run-index order.

    Results depend only on (seed, runs, n_qubits, rank_tol, target); the
    worker count changes wall time, not content.
    """
    out = Path(cfg.output_dir) if cfg.output_dir is not None else None
    if out is not None:
        _check_writable(out)
    jobs = [(cfg, i) for i in range(cfg.runs)]
    if cfg.parallelism == 1:
        records = [_single_run(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            records = list(pool.map(_single_run, jobs, chunksize=max(1, cfg.runs // (4 * cfg.parallelism))))
    report = CampaignReport(cfg, records)
    if out is not None:
        persist(report, out)
    return report


def persist(report: CampaignReport, out: Path) -> None:
    tol = _tol(report.config.rank_tol)
    states = out / "states"
    for r in report.entangled_records:
        if r.terminal is None:
            continue
        states.mkdir(exist_ok=True)
        report.state_files[r.run_index] = save_state(states / f"run_{r.run_index:05d}.json", r.terminal, tol)
    with open(out / "runs.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(r.csv_row() for r in report.records)
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + os.linesep)
