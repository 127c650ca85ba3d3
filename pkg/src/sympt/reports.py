"""File classification, rank-table reproduction and the full-space oracle check."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .campaign import CampaignConfig, run_campaign
from .classify import (
    RULE_CERTIFICATE,
    Classification,
    EdgeReport,
    EdgeVerdict,
    Verdict,
    classify_ranks,
    decompose_separable,
    edge_excluded,
    excluded_profiles,
    extremality_excluded,
    find_product_vector,
    schmidt_bound,
)
from .extremal import nullity
from .spectra import PPTResult, RankProfile, _tol, is_ppt, rank_profile, spectral_summary
from .statefile import load_state
from .symcore import (
    expand_to_full,
    full_partial_transpose,
    oracle_view,
    partial_transpose_view,
    random_state,
)
from .tables import NON_EXTREMAL_PROFILES, REFERENCE_MAX_N, expected_extremal_profiles

RULE_NOT_PPT = "not-ppt"
EXIT_CODES = {
    Verdict.SEPARABLE: 0,
    Verdict.CANDIDATE_ENTANGLED: 1,
    Verdict.GENERICALLY_SEPARABLE: 2,
}
EXIT_PARSE_ERROR = 64


@dataclass(eq=False)
class FileReport:
    path: str
    n_qubits: int
    rank_tol: float
    profile: RankProfile
    ppt: PPTResult
    classification: Classification
    edge: EdgeReport | None
    edge_lookup: EdgeVerdict
    extremality_excluded: bool
    nullity: int | None
    certificate_terms: int | None
    schmidt_bound: int | None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.classification.verdict]

    def to_json(self) -> dict:
        edge = None
        if self.edge is not None:
            e = self.edge.found_vector
            edge = {
                "product_vector_found": e is not None,
                "residual": self.edge.residual,
                "threshold": self.edge.threshold,
                "vector": None if e is None else [[e.a.real, e.a.imag], [e.b.real, e.b.imag]],
            }
        return {
            "path": self.path,
            "n_qubits": self.n_qubits,
            "rank_tol": self.rank_tol,
            "rank_profile": list(self.profile.ranks),
            "ppt": self.ppt.is_ppt,
            "min_eigenvalue": self.ppt.min_eigenvalue,
            "verdict": self.classification.verdict.value,
            "triggered_rules": list(self.classification.triggered_rules),
            "edge_report": edge,
            "edge_lookup": self.edge_lookup.value,
            "extremality_excluded": self.extremality_excluded,
            "nullity": self.nullity,
            "certificate_terms": self.certificate_terms,
            "schmidt_bound": self.schmidt_bound,
            "exit_code": self.exit_code,
        }

    def text(self) -> str:
        lines = [
            f"state:          {self.path} (N={self.n_qubits}, rank_tol={self.rank_tol:g})",
            f"rank profile:   {self.profile}",
            f"PPT:            {'yes' if self.ppt else 'no'} (min eigenvalue {self.ppt.min_eigenvalue:.3e}"
            f" in view k={self.ppt.worst_k})",
            f"verdict:        {self.classification.verdict.value}",
            f"rules:          {', '.join(self.classification.triggered_rules) or '-'}",
        ]
        if self.edge is not None:
            if self.edge.found:
                e = self.edge.found_vector.canonical()
                lines.append(f"product vector: found, alpha={e.alpha:.6g} (residual {self.edge.residual:.2e})")
            else:
                lines.append(f"product vector: none found (best residual {self.edge.residual:.2e})")
        lines.append(f"edge lookup:    {self.edge_lookup.value}")
        if self.nullity is not None:
            lines.append(f"nullity:        {self.nullity}{' (extremal)' if self.nullity == 1 else ''}")
        if self.certificate_terms is not None:
            lines.append(f"certificate:    {self.certificate_terms} product terms")
        sb = "-" if self.schmidt_bound is None else str(self.schmidt_bound)
        lines.append(f"Schmidt bound:  {sb}")
        return "\n".join(lines)


def classify_file(path, rank_tol: float | None = None) -> FileReport:
    """Load a state file and run every classification tool on it.

    ``rank_tol`` defaults to the tolerance recorded in the file. Raises
    :class:`~sympt.statefile.StateFileError` for malformed input.
    """
    s, file_tol = load_state(path)
    tol = file_tol if rank_tol is None else float(rank_tol)
    n = s.n_qubits
    profile = rank_profile(s, tol)
    ppt = is_ppt(s, tol)
    edge = certificate = null = None
    if not ppt:
        cls = Classification(Verdict.CANDIDATE_ENTANGLED, (RULE_NOT_PPT,))
    else:
        cls = classify_ranks(profile, n) if n >= 2 else Classification(Verdict.SEPARABLE)
        edge = find_product_vector(s, rel_tol=tol)
        if edge.found:
            dec = decompose_separable(s, rel_tol=tol)
            if dec.success:
                certificate = len(dec.terms)
                rules = tuple(r for r in cls.triggered_rules if r != RULE_CERTIFICATE) + (RULE_CERTIFICATE,)
                cls = Classification(Verdict.SEPARABLE, rules)
        null = nullity(s, tol)
    full_rank = profile[0] == n + 1
    return FileReport(
        path=str(path),
        n_qubits=n,
        rank_tol=tol,
        profile=profile,
        ppt=ppt,
        classification=cls,
        edge=edge,
        edge_lookup=edge_excluded(profile, n) if n >= 2 else EdgeVerdict.UNKNOWN,
        extremality_excluded=full_rank and n >= 2 and extremality_excluded(profile, n),
        nullity=null,
        certificate_terms=certificate,
        # an explicit product decomposition pins the Schmidt number to 1
        schmidt_bound=1 if certificate else (schmidt_bound(s, tol) if ppt else None),
    )


@dataclass(eq=False)
class TableRow:
    n_qubits: int
    runs: int
    observed: Counter
    expected: set[tuple[int, ...]] | None
    excluded_hits: set[tuple[int, ...]] = field(default_factory=set)
    exclusion_consistent: bool | None = None

    @property
    def matches(self) -> bool | None:
        if self.expected is None:
            return None
        return all(p.ranks in self.expected for p in self.observed)

    def flag(self) -> str:
        if self.expected is None:
            return "no-ref"
        if not self.observed:
            return "none-found"
        return "match" if self.matches else "MISMATCH"


@dataclass(eq=False)
class RankTable:
    rows: list[TableRow]

    @property
    def ok(self) -> bool:
        return all(r.matches is not False and r.exclusion_consistent is not False and not r.excluded_hits
                   for r in self.rows)

    def text(self) -> str:
        head = f"{'N':>3}  {'runs':>5}  {'observed extremal entangled (count)':<48}  {'reference':<40}  flag"
        out = [head, "-" * len(head)]
        for r in self.rows:
            obs = ", ".join(f"{p}x{c}" for p, c in sorted(r.observed.items(), key=lambda kv: kv[0].ranks)) or "-"
            ref = "-" if r.expected is None else " | ".join(
                str(RankProfile(p)) for p in sorted(r.expected, reverse=True))
            out.append(f"{r.n_qubits:>3}  {r.runs:>5}  {obs:<48}  {ref:<40}  {r.flag()}")
        checks = [r for r in self.rows if r.exclusion_consistent is not None]
        if checks:
            out.append("")
            out.append("Exclusion cross-check (profiles that cannot be extremal):")
            for r in checks:
                status = "ok" if r.exclusion_consistent and not r.excluded_hits else "FAIL"
                hits = ", ".join(str(RankProfile(p)) for p in sorted(r.excluded_hits)) or "none observed"
                out.append(f"  N={r.n_qubits}: enumeration {'agrees' if r.exclusion_consistent else 'DISAGREES'};"
                           f" excluded profiles among observed: {hits}  [{status}]")
        return "\n".join(out)

    def to_json(self) -> list[dict]:
        return [
            {
                "n_qubits": r.n_qubits,
                "runs": r.runs,
                "observed": {p.dashed(): c for p, c in r.observed.items()},
                "expected": None if r.expected is None else sorted("-".join(map(str, p)) for p in r.expected),
                "flag": r.flag(),
                "exclusion_consistent": r.exclusion_consistent,
                "excluded_hits": sorted("-".join(map(str, p)) for p in r.excluded_hits),
            }
            for r in self.rows
        ]


def reproduce_rank_table(max_n: int, runs_per_n: int, seed: int = 0, *, min_n: int = 4,
                         jobs: int = 1, rank_tol: float | None = None) -> RankTable:
    """Observed extremal entangled profiles per N next to the reference rows."""
    if not 4 <= max_n <= 30:
        raise ValueError("max_n must be in 4..30")
    rows = []
    for n in range(max(4, min_n), max_n + 1):
        rep = run_campaign(CampaignConfig(n, runs_per_n, seed, rank_tol, parallelism=jobs))
        observed = rep.entangled_profiles
        expected = expected_extremal_profiles(n) if n <= REFERENCE_MAX_N else None
        row = TableRow(n, runs_per_n, observed, expected)
        if n in NON_EXTREMAL_PROFILES:
            row.exclusion_consistent = excluded_profiles(n) == NON_EXTREMAL_PROFILES[n]
            row.excluded_hits = {p.ranks for p in observed} & NON_EXTREMAL_PROFILES[n]
        rows.append(row)
    return RankTable(rows)


@dataclass(frozen=True)
class OracleRow:
    n_qubits: int
    states: int
    max_abs_error: float
    profile_mismatches: int

    def passed(self, atol: float) -> bool:
        return self.max_abs_error <= atol and self.profile_mismatches == 0


def oracle_check(max_n: int = 8, states_per_n: int = 50, seed: int = 0,
                 rel_tol: float | None = None, min_n: int = 2) -> list[OracleRow]:
    """Compare the compressed views against literal 2^N-space partial transposes.

    States mix full-rank and low-rank draws so that rank profiles are
    non-trivial.
    """
    tol = _tol(rel_tol)
    rng = np.random.default_rng(seed)
    rows = []
    for n in range(min_n, max_n + 1):
        err, mismatches = 0.0, 0
        for i in range(states_per_n):
            rank = None if i % 2 == 0 else int(rng.integers(1, n + 2))
            s = random_state(n, rng, rank)
            full = expand_to_full(s)
            ours = [spectral_summary(s.matrix, tol).rank]
            theirs = [spectral_summary(full, tol).rank]
            for k in range(1, n // 2 + 1):
                view = partial_transpose_view(s, k).matrix
                err = max(err, float(np.abs(view - oracle_view(s, k)).max()))
                ours.append(spectral_summary(view, tol).rank)
                # rank in the full 2^N space, no restriction to the symmetric factors
                theirs.append(spectral_summary(full_partial_transpose(full, n, k), tol).rank)
            mismatches += ours != theirs
        rows.append(OracleRow(n, states_per_n, err, mismatches))
    return rows
