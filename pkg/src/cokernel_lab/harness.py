"""Experiment harness: replica execution, aggregation, and persistence.

Runs are configured once, executed either inline or on a process pool
(replica order is preserved either way), and persisted as JSONL record
streams plus CSV report tables; a short human summary goes to stdout.
Reruns with the same master seed produce byte-identical record and report
files regardless of worker count.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import seeds
from .abelian import (
    AbelianGroup,
    PGroupPartition,
    cl_mass,
    make_group,
    partitions_up_to,
    subgroups,
    sur_count,
    sylow,
)
from .errors import OutOfRange
from .hypertree import homology, sample_hypertree
from .linalg_exact import invariant_factors
from .moments import window_decomposition_report
from .structured_ensemble import assemble_matrix, sample_subset

# Census rows list partitions up to this total weight per prime; heavier
# classes fall into the "other" bucket.
CLASS_WEIGHT_CUTOFF = 6

_OTHER = "other"


@dataclass
class ExperimentConfig:
    """Shared knobs for harness runs."""

    n_grid: tuple[int, ...]
    group_factors: tuple[int, ...] = ()
    primes: tuple[int, ...] = ()
    replicas: int = 0
    seed: int = 0
    out_dir: Path | None = None
    window_constant: float = 1.0
    budget: int = 5_000_000
    threads: int = 1
    exact: bool | None = None

    @property
    def n(self) -> int:
        return self.n_grid[0]


def resolve_threads(explicit: int | None) -> int:
    """CLI value if given, else COKERNEL_LAB_THREADS, else 1."""
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get("COKERNEL_LAB_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise OutOfRange(f"COKERNEL_LAB_THREADS={env!r} is not an integer") from exc
    return 1


@dataclass
class ExperimentRecord:
    """One replica outcome. wall_time stays in memory only: persisting it
    would break byte-identical reruns."""

    replica: int
    seed: int
    n: int
    digest: str
    det_abs: int
    factors: tuple[int, ...]
    sylow_parts: dict[int, tuple[int, ...]]
    wall_time: float = 0.0
    sur: int | None = None

    def to_json_line(self) -> str:
        obj = {
            "replica": self.replica,
            "seed": self.seed,
            "n": self.n,
            "digest": self.digest,
            "det": str(self.det_abs),
            "invariant_factors": [str(d) for d in self.factors],
            "sylow": {str(p): list(parts) for p, parts in sorted(self.sylow_parts.items())},
        }
        return json.dumps(obj, separators=(",", ":"))


def _matrix_replica(args) -> ExperimentRecord:
    n, master_seed, replica, primes, target_factors = args
    t0 = time.perf_counter()
    derived = seeds.derive_seed(master_seed, replica)
    sub = sample_subset(n, derived)
    facs = invariant_factors(assemble_matrix(sub))
    det_abs = math.prod(facs)
    group = make_group([d for d in facs if d > 1])
    parts = {p: sylow(group, p).parts for p in primes}
    sur = None
    if target_factors is not None:
        sur = sur_count(group, make_group(target_factors))
    return ExperimentRecord(
        replica=replica,
        seed=derived,
        n=n,
        digest=sub.digest(),
        det_abs=det_abs,
        factors=facs,
        sylow_parts=parts,
        wall_time=time.perf_counter() - t0,
        sur=sur,
    )


def _hypertree_replica(args) -> ExperimentRecord:
    n, master_seed, replica, primes = args
    t0 = time.perf_counter()
    derived = seeds.derive_seed(master_seed, replica)
    sample = sample_hypertree(n, derived)
    group = homology(sample)
    parts = {p: sylow(group, p).parts for p in primes}
    return ExperimentRecord(
        replica=replica,
        seed=derived,
        n=n,
        digest=sample.digest(),
        det_abs=group.order,
        factors=group.invariant_factors,
        sylow_parts=parts,
        wall_time=time.perf_counter() - t0,
    )


def _run_replicas(worker, arg_list, threads: int, sink=None):
    """Execute replicas, preserving replica order; optionally stream each
    finished record to a sink (crash-safe flush per record)."""
    records = []
    if threads > 1:
        chunk = max(1, len(arg_list) // (threads * 8) or 1)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for rec in pool.map(worker, arg_list, chunksize=chunk):
                records.append(rec)
                if sink is not None:
                    sink(rec)
    else:
        for args in arg_list:
            rec = worker(args)
            records.append(rec)
            if sink is not None:
                sink(rec)
    return records


# ---------------------------------------------------------------------------
# Census aggregation


@dataclass
class CensusRow:
    label: str
    parts: tuple[tuple[int, ...], ...]  # per prime, aligned with primes
    count: int
    frequency: float
    std_error: float
    reference_mass: float


@dataclass
class CensusReport:
    kind: str
    n: int
    primes: tuple[int, ...]
    replicas: int
    rows: list[CensusRow]
    other_count: int
    other_frequency: float
    other_reference_mass: float
    tv_distance: float
    truncation_note: str
    note: str | None = None
    total_wall_time: float = 0.0

    def frequency_of(self, parts_per_prime) -> float:
        key = tuple(tuple(p) for p in parts_per_prime)
        for row in self.rows:
            if row.parts == key:
                return row.frequency
        return 0.0


def class_label(primes, parts_per_prime) -> str:
    return "|".join(
        f"{p}:[{','.join(str(x) for x in parts)}]"
        for p, parts in zip(primes, parts_per_prime)
    )


def aggregate_census(kind: str, n: int, primes, records: list[ExperimentRecord]) -> CensusReport:
    """Tally joint Sylow classes against Cohen-Lenstra reference masses.

    Reference classes enumerate partitions of weight <= CLASS_WEIGHT_CUTOFF
    per prime; sampled classes outside that space land in 'other'.
    """
    primes = tuple(primes)
    replicas = len(records)
    counts: dict[tuple, int] = {}
    for rec in records:
        key = tuple(rec.sylow_parts[p] for p in primes)
        counts[key] = counts.get(key, 0) + 1
    base = partitions_up_to(CLASS_WEIGHT_CUTOFF)
    ref_keys = [()]
    for _ in primes:
        ref_keys = [k + (parts,) for k in ref_keys for parts in base]
    ref_mass = {}
    for key in ref_keys:
        mass = 1.0
        for p, parts in zip(primes, key):
            mass *= cl_mass(PGroupPartition(p, parts))
        ref_mass[key] = mass
    rows = []
    for key in sorted(ref_keys, key=lambda k: (-ref_mass[k], k)):
        cnt = counts.get(key, 0)
        freq = cnt / replicas if replicas else 0.0
        rows.append(
            CensusRow(
                label=class_label(primes, key),
                parts=key,
                count=cnt,
                frequency=freq,
                std_error=math.sqrt(freq * (1.0 - freq) / replicas) if replicas else 0.0,
                reference_mass=ref_mass[key],
            )
        )
    listed = set(ref_keys)
    other_count = sum(c for k, c in counts.items() if k not in listed)
    other_freq = other_count / replicas if replicas else 0.0
    other_ref = max(0.0, 1.0 - sum(ref_mass.values()))
    tv = 0.5 * (
        sum(abs(r.frequency - r.reference_mass) for r in rows)
        + abs(other_freq - other_ref)
    )
    note = None
    if any(p == 2 for p in primes) and kind == "hypertree-census":
        note = (
            "p = 2 census: the reference-mass comparison is known to be false "
            "at the prime 2; frequencies are reported for study only"
        )
    return CensusReport(
        kind=kind,
        n=n,
        primes=primes,
        replicas=replicas,
        rows=rows,
        other_count=other_count,
        other_frequency=other_freq,
        other_reference_mass=other_ref,
        tv_distance=tv,
        truncation_note=(
            f"classes truncated at partition weight {CLASS_WEIGHT_CUTOFF} per prime; "
            "heavier classes aggregate into 'other'"
        ),
        note=note,
        total_wall_time=sum(r.wall_time for r in records),
    )


def write_census_csv(report: CensusReport, path: Path) -> None:
    lines = ["class,count,frequency,std_error,reference_mass"]
    for row in report.rows:
        lines.append(
            f"{row.label},{row.count},{row.frequency!r},{row.std_error!r},{row.reference_mass!r}"
        )
    if report.replicas:
        q = report.other_frequency
        other_se = math.sqrt(q * (1.0 - q) / report.replicas)
    else:
        other_se = 0.0
    lines.append(
        f"{_OTHER},{report.other_count},{report.other_frequency!r},"
        f"{other_se!r},{report.other_reference_mass!r}"
    )
    lines.append(f"# tv_distance,{report.tv_distance!r}")
    lines.append(f"# {report.truncation_note}")
    if report.note:
        lines.append(f"# {report.note}")
    path.write_text("\n".join(lines) + "\n")


def census_summary(report: CensusReport, top: int = 8) -> str:
    out = [
        f"{report.kind}: n={report.n} replicas={report.replicas} "
        f"primes={list(report.primes)}",
        f"  TV(empirical, reference) = {report.tv_distance:.4f}",
        f"  {report.truncation_note}",
    ]
    if report.note:
        out.append(f"  note: {report.note}")
    shown = [r for r in report.rows if r.count > 0 or r.reference_mass > 1e-4][:top]
    for row in shown:
        out.append(
            f"    {row.label:<18} freq {row.frequency:.4f}  se {row.std_error:.4f}"
            f"  ref {row.reference_mass:.4f}"
        )
    out.append(
        f"    {_OTHER:<18} freq {report.other_frequency:.4f}"
        f"  ref {report.other_reference_mass:.4f}"
    )
    out.append(f"  wall time: {report.total_wall_time:.1f}s across replicas")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Runners


def _record_sink(path: Path):
    fh = open(path, "w")

    def sink(rec: ExperimentRecord):
        fh.write(rec.to_json_line() + "\n")
        fh.flush()

    return fh, sink


def run_sylow_census(cfg: ExperimentConfig, kind: str = "census") -> CensusReport:
    """Matrix-cokernel census (kind='census') or hypertree homology census."""
    if cfg.replicas < 1:
        raise OutOfRange("census needs at least one replica")
    if not cfg.primes:
        raise OutOfRange("census needs at least one prime")
    if kind == "census" and any(p < 5 for p in cfg.primes):
        raise OutOfRange("matrix census primes must be >= 5")
    n = cfg.n
    if kind == "census":
        worker = _matrix_replica
        args = [(n, cfg.seed, r, cfg.primes, None) for r in range(cfg.replicas)]
    else:
        worker = _hypertree_replica
        args = [(n, cfg.seed, r, cfg.primes) for r in range(cfg.replicas)]
    fh = sink = None
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        fh, sink = _record_sink(cfg.out_dir / "records.jsonl")
    try:
        records = _run_replicas(worker, args, cfg.threads, sink)
    finally:
        if fh is not None:
            fh.close()
    report = aggregate_census(kind, n, cfg.primes, records)
    if cfg.out_dir is not None:
        write_census_csv(report, cfg.out_dir / "report.csv")
        from .figures import census_figure

        census_figure(report, cfg.out_dir / "report.png")
    return report


def run_hypertree_census(cfg: ExperimentConfig) -> CensusReport:
    return run_sylow_census(cfg, kind="hypertree-census")


@dataclass
class MomentScanRow:
    n: int
    group: str
    exact_moment: float
    mc_estimate: float | None
    mc_se: float | None
    residual: float
    subgroup_sums: tuple[float, ...]


@dataclass
class MomentScanReport:
    group_factors: tuple[int, ...]
    subgroup_labels: tuple[str, ...]
    rows: list[MomentScanRow]
    window_constant: float
    total_wall_time: float = 0.0


def subgroup_labels(group: AbelianGroup) -> tuple[str, ...]:
    """Stable display labels for subgroups(group), disambiguated by index."""
    labels = []
    seen: dict[str, int] = {}
    for sub in subgroups(group):
        base = str(sub.as_group())
        seen[base] = seen.get(base, 0) + 1
        labels.append(base)
    counts: dict[str, int] = {}
    final = []
    for base in labels:
        if seen[base] == 1:
            final.append(base)
        else:
            counts[base] = counts.get(base, 0) + 1
            final.append(f"{base}#{counts[base]}")
    return tuple(final)


def run_moment_scan(cfg: ExperimentConfig) -> MomentScanReport:
    """Window-decomposed exact moments over the n grid, with optional
    Monte Carlo cross-estimates when replicas > 0."""
    group = make_group(cfg.group_factors)
    labels = subgroup_labels(group)
    t0 = time.perf_counter()
    sink = fh = None
    if cfg.out_dir is not None and cfg.replicas > 0:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        fh, sink = _record_sink(cfg.out_dir / "records.jsonl")
    rows = []
    try:
        for n in cfg.n_grid:
            scan = window_decomposition_report(
                group, n, constant=cfg.window_constant, budget=cfg.budget
            )
            mc_est = mc_se = None
            if cfg.replicas > 0:
                args = [
                    (n, seeds.derive_seed(cfg.seed, n), r, (), cfg.group_factors)
                    for r in range(cfg.replicas)
                ]
                records = _run_replicas(_matrix_replica, args, cfg.threads, sink)
                surs = [rec.sur for rec in records]
                mc_est = sum(surs) / len(surs)
                var = sum((s - mc_est) ** 2 for s in surs) / max(1, len(surs) - 1)
                mc_se = math.sqrt(var / len(surs))
            rows.append(
                MomentScanRow(
                    n=n,
                    group=str(group),
                    exact_moment=scan.total,
                    mc_estimate=mc_est,
                    mc_se=mc_se,
                    residual=scan.residual,
                    subgroup_sums=scan.subgroup_sums,
                )
            )
    finally:
        if fh is not None:
            fh.close()
    report = MomentScanReport(
        group_factors=cfg.group_factors,
        subgroup_labels=labels,
        rows=rows,
        window_constant=cfg.window_constant,
        total_wall_time=time.perf_counter() - t0,
    )
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        write_moment_scan_csv(report, cfg.out_dir / "scan.csv")
        from .figures import moment_scan_figure

        moment_scan_figure(report, cfg.out_dir / "scan.png")
    return report


def write_moment_scan_csv(report: MomentScanReport, path: Path) -> None:
    head = ["n", "group", "exact_moment", "mc_estimate", "mc_se", "residual"]
    head += [f"B[{lab}]" for lab in report.subgroup_labels]
    lines = [",".join(head)]
    for row in report.rows:
        cells = [
            str(row.n),
            row.group.replace(" ", ""),
            repr(row.exact_moment),
            "" if row.mc_estimate is None else repr(row.mc_estimate),
            "" if row.mc_se is None else repr(row.mc_se),
            repr(row.residual),
        ]
        cells += [repr(s) for s in row.subgroup_sums]
        lines.append(",".join(cells))
    lines.append(f"# window_constant,{report.window_constant!r} (heuristic scale)")
    path.write_text("\n".join(lines) + "\n")


def moment_scan_summary(report: MomentScanReport) -> str:
    g = str(make_group(report.group_factors))
    out = [f"moment-scan: group={g} window C={report.window_constant} (heuristic)"]
    full_idx = len(report.subgroup_labels) - 1
    for row in report.rows:
        mc = ""
        if row.mc_estimate is not None:
            mc = f"  mc {row.mc_estimate:.4f} +- {row.mc_se:.4f}"
        out.append(
            f"  n={row.n:<4d} exact {row.exact_moment:.6f}{mc}"
            f"  residual {row.residual:+.3e}"
            f"  B[full] {row.subgroup_sums[full_idx]:.6f}"
        )
    out.append(f"  wall time: {report.total_wall_time:.1f}s")
    return "\n".join(out)
