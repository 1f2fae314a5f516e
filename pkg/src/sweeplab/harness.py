"""Experiment orchestration: replicate fan-out, aggregation, reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from ._jit import JIT_ENABLED
from .analytics import expected_jump_counts, one_step_coal_probs, one_step_recomb_probs
from .approx_p import alpha_and_p, qp_pair_stats, sample_p_partition_codes
from .branching import skeleton_partition_codes
from .genealogy import OneStepTally, PairStats
from .model import Params, SweepWorkspace, run_in_workspace, validate_params
from .paintbox import default_L, paintbox_pair_stats_exact, sample_paintbox_codes
from .partitions import MarkedPartition, encode_partitions
from .rng import KernelStream, numpy_stream

log = logging.getLogger(__name__)

MODES = ("moran", "qp", "paintbox", "paintbox_thinned", "skeleton", "table", "validate")
PRESETS = {"sweep-2004": {"N": 10_000, "s": 0.1, "r": (0.00106, 0.00516), "sample_size": 2}}

MORAN_CHUNK = 16
DRAW_CHUNK = 10_000
MAX_CODED_N = 8


class ConfigError(ValueError):
    """Invalid experiment configuration; raised before any computation."""


@dataclass
class ExperimentConfig:
    mode: str
    N: Optional[int] = None
    s: Optional[float] = None
    r: Optional[float] = None
    sample_size: int = 2
    reps: int = 1000
    seed: int = 0
    L: Optional[int] = None
    q: Optional[float] = None
    H: Optional[int] = None
    J: Sequence[int] = (1,)
    preset: Optional[str] = None
    workers: int = 1
    out: Optional[str] = None
    format: str = "csv"

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.mode == "table":
            if (self.preset or "sweep-2004") not in PRESETS:
                raise ConfigError(f"unknown preset {self.preset!r}")
            return self
        if self.mode == "validate":
            self.N = 10 if self.N is None else self.N
            self.s = 0.3 if self.s is None else self.s
            self.r = 0.05 if self.r is None else self.r
        missing = [k for k in ("N", "s", "r") if getattr(self, k) is None]
        if self.mode == "skeleton":
            missing = [k for k in ("s", "r", "H") if getattr(self, k) is None]
        if self.mode in ("paintbox", "paintbox_thinned") and self.L is not None and self.N is None:
            missing.remove("N")  # N only sets the default level count
        if self.mode == "paintbox_thinned" and self.q is None:
            missing.append("q")
        if missing:
            raise ConfigError(f"mode {self.mode} needs {', '.join(missing)}")
        try:
            if self.mode == "skeleton":
                validate_params(max(self.H, 1), self.s, self.r, 1, self.seed)
            elif self.N is None:
                validate_params(max(self.L, 1), self.s, self.r, self.sample_size, self.seed)
            else:
                validate_params(self.N, self.s, self.r, self.sample_size, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.mode in ("paintbox", "paintbox_thinned", "skeleton") and not self.r < self.s:
            raise ConfigError("paintbox laws need r < s")
        if self.q is not None and not 0.0 <= self.q <= 1.0:
            raise ConfigError("q must lie in [0,1]")
        if self.L is not None and self.L < 1:
            raise ConfigError("L must be at least 1")
        if self.mode == "skeleton" and not 1 <= self.sample_size <= self.H:
            raise ConfigError("skeleton needs 1 <= sample-size <= H")
        if self.mode == "moran" and self.N is not None:
            bad = [j for j in self.J if not 1 <= j <= 2 * self.N]
            if bad:
                raise ConfigError(f"J levels must lie in 1..2N, got {bad}")
        return self


@dataclass
class ReportRow:
    """One estimated or analytic row; ``stats`` maps name -> (estimate, std error)."""

    source: str
    stats: dict
    replicates: int
    params: dict
    partitions: dict = field(default_factory=dict)

    @classmethod
    def from_pair_stats(cls, source, ps: PairStats, params, partitions=None, extra=None):
        stats = {name: (v, e) for name, v, e in zip(PairStats.NAMES, ps.values(), ps.se)}
        stats.update(extra or {})
        return cls(source, stats, ps.n_reps, params, partitions or {})

    def pair_stats(self) -> PairStats:
        vals = [self.stats[k][0] for k in PairStats.NAMES]
        return PairStats(*vals, n_reps=self.replicates, se=tuple(self.stats[k][1] for k in PairStats.NAMES))


@dataclass
class ReportTable:
    rows: list
    metadata: dict

    def row(self, source: str) -> ReportRow:
        for row in self.rows:
            if row.source == source:
                return row
        raise KeyError(source)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["statistic", "estimate", "std_error", "replicates"])
        for row in self.rows:
            for name, (est, se) in row.stats.items():
                writer.writerow([f"{row.source}.{name}", repr(float(est)), repr(float(se)), row.replicates])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "rows": [asdict(r) for r in self.rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def write(self, path: str, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def estimate_tv_distance(samples_a: Iterable[MarkedPartition], samples_b: Iterable[MarkedPartition]) -> float:
    """Half the L1 distance between the empirical laws of two partition samples."""
    a = Counter(samples_a)
    b = Counter(samples_b)
    sizes = {p.n for p in a} | {p.n for p in b}
    if len(sizes) > 1:
        raise ValueError(f"samples are partitions of different ground sets: n in {sorted(sizes)}")
    return tv_from_counts(a, b)


def tv_from_counts(a: dict, b: dict) -> float:
    na, nb = sum(a.values()), sum(b.values())
    if na == 0 or nb == 0:
        raise ValueError("empty sample")
    keys = set(a) | set(b)
    return 0.5 * math.fsum(abs(a.get(k, 0) / na - b.get(k, 0) / nb) for k in keys)


# --- count aggregation -------------------------------------------------------

def _merge(acc: Optional[dict], part: dict) -> dict:
    """Sum count containers key by key (commutative and associative)."""
    if acc is None:
        return {k: (Counter(v) if isinstance(v, dict) else np.array(v, copy=True)) for k, v in part.items()}
    for k, v in part.items():
        if isinstance(v, dict):
            acc[k].update(v)
        else:
            acc[k] = acc[k] + v
    return acc


def _fan_out(fn: Callable, tasks: list, workers: int) -> dict:
    acc = None
    if workers == 1 or len(tasks) <= 1:
        for i, task in enumerate(tasks):
            acc = _merge(acc, fn(*task))
            log.debug("chunk %d/%d done", i + 1, len(tasks))
        return acc
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *task) for task in tasks]
        for i, fut in enumerate(futures):
            acc = _merge(acc, fut.result())
            log.debug("chunk %d/%d done", i + 1, len(tasks))
    return acc


def _chunks(total, size):
    return [(start, min(total, start + size)) for start in range(0, total, size)]


def moran_chunk(N, s, r, n, seed, tag, start, stop, J_levels=(1,), one_step=False):
    """Counts from conditioned sweeps ``start..stop-1`` of the stream family ``(seed, tag)``."""
    params = Params(N=N, s=s, r=r, n=n, seed=seed)
    two_n = params.two_n
    ws = SweepWorkspace(two_n)
    J_levels = tuple(J_levels)
    out = {
        "pairs": np.zeros(4, np.int64),
        "escaped": np.zeros(1, np.int64),
        "double_recombination": np.zeros(1, np.int64),
        "attempts": np.zeros(1, np.int64),
        "steps": np.zeros(1, np.int64),
        "K": np.zeros((len(J_levels), n + 1), np.int64),
        "coal_after_tau": np.zeros(len(J_levels), np.int64),
        "partitions": Counter(),
    }
    if one_step:
        out["U"] = np.zeros(two_n + 1, np.int64)
        out["D"] = np.zeros(two_n + 1, np.int64)
        out["H"] = np.zeros(two_n + 1, np.int64)
        out["U2"] = np.zeros(two_n + 1, np.int64)
        out["D2"] = np.zeros(two_n + 1, np.int64)
        out["H2"] = np.zeros(two_n + 1, np.int64)
        tally = OneStepTally.empty(two_n)
    for i in range(start, stop):
        stream = KernelStream(seed, tag, i)
        with np.errstate(over="ignore"):
            mutant, nsteps, nev, attempts = run_in_workspace(params, stream, ws)
        bad, pos, escape, coal = _kernels.trace_lineages(
            ws.victim, ws.parent, ws.source, ws.prev, ws.xpath, nev, two_n, mutant, n
        )
        if bad != -1:
            raise RuntimeError(f"replicate {i}: inconsistent trajectory ({bad})")
        out["attempts"][0] += attempts
        out["steps"][0] += nsteps
        lost = pos != mutant
        out["escaped"][0] += int(lost.sum())
        out["double_recombination"][0] += int(((escape >= 0) & ~lost).sum())
        if n >= 2:
            a, b = pos[0], pos[1]
            cat = int(lost[0]) + int(lost[1])
            if lost[0] and lost[1]:
                cat = 3 if a == b else 2
            out["pairs"][cat] += 1
        if n <= MAX_CODED_N:
            code = int(encode_partitions(pos[None, :], (pos == mutant)[None, :])[0])
            out["partitions"][code] += 1
        xpath = ws.xpath[: nev + 1]
        for jj, J in enumerate(J_levels):
            tau_j = int(np.argmax(xpath >= J))
            out["K"][jj, int(np.count_nonzero(escape >= tau_j))] += 1
            if n >= 2:
                out["coal_after_tau"][jj] += int(coal[0, 1] >= tau_j)
        if one_step:
            lc = ws.tallies
            for key, d in (("U", _kernels.UP), ("D", _kernels.DOWN), ("H", _kernels.HOLD)):
                out[key] += lc[d]
                out[key + "2"] += lc[d] * lc[d]
            tally.add_arrays(ws.victim, ws.parent, ws.source, nev, mutant, ws.xpath, lc)
    if one_step:
        out["one_step_steps"] = tally.steps
        out["one_step_events"] = tally.events
    return out


def run_moran(N, s, r, n, reps, seed, tag=0, J_levels=(1,), workers=1, one_step=False) -> dict:
    tasks = [(N, s, r, n, seed, tag, a, b, tuple(J_levels), one_step) for a, b in _chunks(reps, MORAN_CHUNK)]
    counts = _fan_out(moran_chunk, tasks, workers)
    counts["reps"] = reps
    return counts


def _sampler_chunk(kind, n, args, seed, tag, start, stop):
    codes = []
    for c in range(start, stop):
        lo = c * DRAW_CHUNK
        gen = numpy_stream(seed, tag, c)
        size = args["reps"] - lo if (c + 1) * DRAW_CHUNK > args["reps"] else DRAW_CHUNK
        if kind == "qp":
            codes.append(sample_p_partition_codes(n, args["p"], size, gen))
        elif kind == "paintbox":
            codes.append(sample_paintbox_codes(n, args["r"], args["s"], args["L"], size, gen, q=args.get("q", 0.0)))
        elif kind == "skeleton":
            codes.append(skeleton_partition_codes(n, args["r"], args["s"], args["H"], size, KernelStream(seed, tag, c)))
        else:  # pragma: no cover
            raise ValueError(kind)
    values, counts = np.unique(np.concatenate(codes), return_counts=True)
    return {"partitions": Counter(dict(zip(values.tolist(), counts.tolist())))}


def sample_partition_counts(kind, n, args, seed, tag=0, workers=1) -> Counter:
    n_chunks = math.ceil(args["reps"] / DRAW_CHUNK)
    per_task = max(1, math.ceil(n_chunks / (4 * workers)))
    tasks = [(kind, n, args, seed, tag, a, b) for a, b in _chunks(n_chunks, per_task)]
    return _fan_out(_sampler_chunk, tasks, workers)["partitions"]


def pair_counts_from_partitions(codes: dict, n: int):
    """Two-lineage outcome counts (neither, one, both distinct, both shared) of lineages 1 and 2."""
    out = [0, 0, 0, 0]
    for code, count in codes.items():
        pi = MarkedPartition.from_code(code, n)
        labels = pi.labels()
        m = pi.marked
        e1, e2 = labels[0] != m, labels[1] != m
        if m is None:
            e1 = e2 = True
        if e1 and e2:
            out[3 if labels[0] == labels[1] else 2] += count
        else:
            out[int(e1) + int(e2)] += count
    return out


def _partition_table(codes: dict, n: int) -> dict:
    total = sum(codes.values())
    return {str(MarkedPartition.from_code(c, n)): v / total for c, v in sorted(codes.items())}


def _mc_row(source, codes, n, params, extra=None) -> ReportRow:
    if n >= 2:
        ps = PairStats.from_counts(*pair_counts_from_partitions(codes, n))
        return ReportRow.from_pair_stats(source, ps, params, _partition_table(codes, n), extra)
    total = sum(codes.values())
    lost = sum(v for c, v in codes.items() if MarkedPartition.from_code(c, n).marked is None)
    p = lost / total
    stats = {"pinb": (p, math.sqrt(p * (1 - p) / total))}
    stats.update(extra or {})
    return ReportRow(source, stats, total, params, _partition_table(codes, n))


def _moran_row(source, counts, n, params, J_levels) -> ReportRow:
    reps = counts["reps"]
    extra = {"mean_attempts": (counts["attempts"][0] / reps, 0.0)}
    lineages = reps * n
    frac = counts["double_recombination"][0] / lineages
    extra["double_recombination"] = (frac, math.sqrt(frac * (1 - frac) / lineages))
    for jj, J in enumerate(J_levels):
        for d, c in enumerate(counts["K"][jj]):
            p = c / reps
            extra[f"K[J={J}]={d}"] = (p, math.sqrt(p * (1 - p) / reps))
    if n >= 2:
        ps = PairStats.from_counts(*counts["pairs"].tolist())
        partitions = _partition_table(counts["partitions"], n) if n <= MAX_CODED_N else {}
        return ReportRow.from_pair_stats(source, ps, params, partitions, extra)
    p = counts["escaped"][0] / reps
    stats = {"pinb": (p, math.sqrt(p * (1 - p) / reps)), **extra}
    return ReportRow(source, stats, reps, params, _partition_table(counts["partitions"], n))


def _analytic_row(source, ps: PairStats, params) -> ReportRow:
    return ReportRow.from_pair_stats(source, ps, params)


def _validate_rows(cfg: ExperimentConfig) -> list:
    """Occupancy and one-step frequencies from conditioned runs against closed forms."""
    N, s, r = cfg.N, cfg.s, cfg.r
    two_n = 2 * N
    counts = run_moran(N, s, r, 1, cfg.reps, cfg.seed, tag=7, workers=cfg.workers, one_step=True)
    reps = counts["reps"]
    params = {"N": N, "s": s, "r": r, "reps": reps, "seed": cfg.seed}
    stats = {}
    worst = 0.0
    for k in range(1, two_n):
        ex = expected_jump_counts(N, s, k, 1)
        for key, expected in (("U", ex.EU), ("D", ex.ED), ("H", ex.EH)):
            mean = counts[key][k] / reps
            var = counts[key + "2"][k] / reps - mean * mean
            se = math.sqrt(max(var, 0.0) / reps)
            stats[f"E{key}[k={k}]"] = (mean, se)
            stats[f"E{key}[k={k}].expected"] = (expected, 0.0)
            if se > 0:
                worst = max(worst, abs(mean - expected) / se)
    tally = OneStepTally(two_n, counts["one_step_steps"], counts["one_step_events"])
    for k in range(1, two_n):
        for l in (k - 1, k, k + 1):
            if not 1 <= l <= two_n:
                continue
            pB, pb = one_step_recomb_probs(N, r, s, k, l)
            pBB, pbb, pBb = one_step_coal_probs(N, r, s, k, l)
            for name, expected in (("pB", pB), ("pb", pb), ("BB", pBB), ("bb", pbb), ("Bb", pBb)):
                est, se, steps = tally.frequency(name, k, l)
                if steps == 0 or not math.isfinite(est):
                    continue
                stats[f"{name}[{k}->{l}]"] = (est, se)
                stats[f"{name}[{k}->{l}].expected"] = (expected, 0.0)
                if se > 0:
                    worst = max(worst, abs(est - expected) / se)
    stats["max_abs_z"] = (worst, 0.0)
    return [ReportRow("validate", stats, reps, params)]


def run_experiment(cfg: ExperimentConfig) -> ReportTable:
    cfg.validate()
    t0 = time.perf_counter()
    n = cfg.sample_size
    rows = []
    if cfg.mode == "table":
        preset = PRESETS[cfg.preset or "sweep-2004"]
        N, s, n = preset["N"], preset["s"], preset["sample_size"]
        L = cfg.L or default_L(N, s)
        for tag, r in enumerate(preset["r"]):
            params = {"N": N, "s": s, "r": r, "n": n, "seed": cfg.seed, "stream": tag, "L": L, "reps": cfg.reps}
            _, p = alpha_and_p(N, r, s)
            rows.append(_analytic_row(f"coin[r={r}]", qp_pair_stats(p), params))
            log.info("table: r=%s, %d Moran sweeps", r, cfg.reps)
            counts = run_moran(N, s, r, n, cfg.reps, cfg.seed, tag=tag, workers=cfg.workers)
            rows.append(_moran_row(f"moran[r={r}]", counts, n, params, (1,)))
            rows.append(_analytic_row(f"paintbox[r={r}]", paintbox_pair_stats_exact(r, s, L), params))
    elif cfg.mode == "moran":
        params = {"N": cfg.N, "s": cfg.s, "r": cfg.r, "n": n, "seed": cfg.seed, "stream": 0, "reps": cfg.reps}
        counts = run_moran(cfg.N, cfg.s, cfg.r, n, cfg.reps, cfg.seed, J_levels=cfg.J, workers=cfg.workers)
        rows.append(_moran_row("moran", counts, n, params, tuple(cfg.J)))
    elif cfg.mode == "qp":
        _, p = alpha_and_p(cfg.N, cfg.r, cfg.s)
        params = {"N": cfg.N, "s": cfg.s, "r": cfg.r, "n": n, "p": p, "seed": cfg.seed, "reps": cfg.reps}
        rows.append(_analytic_row("coin", qp_pair_stats(p), params))
        codes = sample_partition_counts("qp", n, {"p": p, "reps": cfg.reps}, cfg.seed, workers=cfg.workers)
        rows.append(_mc_row("coin-mc", codes, n, params))
    elif cfg.mode in ("paintbox", "paintbox_thinned"):
        L = cfg.L or default_L(cfg.N, cfg.s)
        q = cfg.q or 0.0
        params = {"N": cfg.N, "s": cfg.s, "r": cfg.r, "n": n, "L": L, "q": q, "seed": cfg.seed, "reps": cfg.reps}
        if q == 0.0 and cfg.r > 0:
            rows.append(_analytic_row("paintbox", paintbox_pair_stats_exact(cfg.r, cfg.s, L), params))
        args = {"r": cfg.r, "s": cfg.s, "L": L, "q": q, "reps": cfg.reps}
        codes = sample_partition_counts("paintbox", n, args, cfg.seed, workers=cfg.workers)
        rows.append(_mc_row("paintbox-mc", codes, n, params))
    elif cfg.mode == "skeleton":
        params = {"s": cfg.s, "r": cfg.r, "n": n, "H": cfg.H, "seed": cfg.seed, "reps": cfg.reps}
        args = {"r": cfg.r, "s": cfg.s, "H": cfg.H, "L": cfg.H, "reps": cfg.reps}
        codes = sample_partition_counts("skeleton", n, args, cfg.seed, tag=0, workers=cfg.workers)
        ref = sample_partition_counts("paintbox", n, args, cfg.seed, tag=1, workers=cfg.workers)
        extra = {"tv_vs_paintbox": (tv_from_counts(codes, ref), 0.0)}
        rows.append(_mc_row("skeleton", codes, n, params, extra))
        rows.append(_mc_row("paintbox-mc", ref, n, params))
    elif cfg.mode == "validate":
        rows.extend(_validate_rows(cfg))
    metadata = {
        "mode": cfg.mode,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "runtime_seconds": time.perf_counter() - t0,
        "numba": JIT_ENABLED,
    }
    return ReportTable(rows, metadata)

