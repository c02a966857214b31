"""Evaluation quantities: bits/word, per-step divergence, Pinsker bounds.

Conventions: bits/word averages per message and then across messages; the
headline divergence is the truncation KL pooled over all steps, with the
per-message macro average and the integer-quantization penalty reported as
separate fields rather than folded in.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .errors import InputError
from .truncation import SelfAdjusting, total_bound

SCHEMA_VERSION = 1


@dataclass
class MessageRecord:
    """Everything the metrics need from one encoded message."""

    bits_encoded: int
    token_count: int
    traces: list
    wall_time: float = 0.0


def bits_per_word(records) -> float:
    """Per-message payload-bits/token ratio, macro-averaged across messages."""
    records = list(records)
    if not records:
        raise InputError("bits_per_word needs at least one message")
    ratios = []
    for r in records:
        if r.token_count < 1:
            raise InputError("message with no cover tokens")
        ratios.append(r.bits_encoded / r.token_count)
    return math.fsum(ratios) / len(ratios)


def nearest_rank(sorted_values, q: float) -> float:
    """Nearest-rank percentile of an ascending list (q in 0..100]."""
    n = len(sorted_values)
    rank = math.ceil(q / 100.0 * n)
    return sorted_values[max(rank, 1) - 1]


def step_kl_summary(traces) -> dict:
    """Exact nearest-rank percentiles of the per-step truncation KL."""
    kls = sorted(tr.kl for tr in traces)
    if not kls:
        raise InputError("step_kl_summary needs at least one step")
    return {
        "p50": nearest_rank(kls, 50),
        "p95": nearest_rank(kls, 95),
        "p99": nearest_rank(kls, 99),
        "max": kls[-1],
        "mean": math.fsum(kls) / len(kls),
    }


def pinsker_bound(traces) -> float:
    """Empirical total-variation bound sqrt(ln2/2 * sum of step KLs)."""
    return math.sqrt(math.log(2) / 2.0 * math.fsum(tr.kl for tr in traces))


def tvd_bound_report(policy, traces) -> dict:
    """Per-message empirical Pinsker bound plus the schedule's a-priori bound."""
    empirical = pinsker_bound(traces)
    apriori = None
    if isinstance(policy, SelfAdjusting):
        horizon = len(traces) if policy.schedule == "constant" else None
        apriori = total_bound(policy.delta0, policy.schedule, horizon=horizon)
    return {
        "empirical": empirical,
        "apriori": apriori,
        "vacuous": bool(apriori is not None and apriori > 1.0),
    }


@dataclass
class MetricsReport:
    """Table-row summary of one method over a message corpus."""

    method_id: str
    params: dict
    messages: int
    bits_per_word: float
    mean_step_kl: float          # pooled over all steps
    macro_step_kl: float         # mean of per-message means
    kl_percentiles: dict
    quantization_kl: float | None
    tvd_bound: float             # mean per-message empirical Pinsker bound
    apriori_bound: float | None
    k_histogram: dict
    total_steps: int
    wall_time_per_message: float
    schema_version: int = field(default=SCHEMA_VERSION)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "method": self.method_id,
            "params": self.params,
            "messages": self.messages,
            "bits_per_word": self.bits_per_word,
            "mean_step_kl": self.mean_step_kl,
            "macro_step_kl": self.macro_step_kl,
            "kl_percentiles": self.kl_percentiles,
            "quantization_kl": self.quantization_kl,
            "tvd_bound": self.tvd_bound,
            "apriori_bound": self.apriori_bound,
            "k_histogram": {str(k): v for k, v in sorted(self.k_histogram.items())},
            "total_steps": self.total_steps,
            "wall_time_per_message": self.wall_time_per_message,
        }


def build_report(method_id: str, params: dict, records, policy=None) -> MetricsReport:
    records = list(records)
    if not records:
        raise InputError("cannot build a report from zero messages")
    all_traces = [tr for r in records for tr in r.traces]
    per_message_means = [
        math.fsum(tr.kl for tr in r.traces) / len(r.traces) for r in records
    ]
    quant_kls = [tr.quant_kl for tr in all_traces if tr.quant_kl is not None]
    k_hist: dict[int, int] = {}
    for tr in all_traces:
        k_hist[tr.k] = k_hist.get(tr.k, 0) + 1
    bounds = [tvd_bound_report(policy, r.traces) for r in records]
    apriori = bounds[0]["apriori"] if bounds else None
    return MetricsReport(
        method_id=method_id,
        params=params,
        messages=len(records),
        bits_per_word=bits_per_word(records),
        mean_step_kl=math.fsum(tr.kl for tr in all_traces) / len(all_traces),
        macro_step_kl=math.fsum(per_message_means) / len(per_message_means),
        kl_percentiles=step_kl_summary(all_traces),
        quantization_kl=(math.fsum(quant_kls) / len(quant_kls)) if quant_kls else None,
        tvd_bound=math.fsum(b["empirical"] for b in bounds) / len(bounds),
        apriori_bound=apriori,
        k_histogram=k_hist,
        total_steps=len(all_traces),
        wall_time_per_message=math.fsum(r.wall_time for r in records) / len(records),
    )


def reports_to_csv(reports) -> str:
    """Table-style CSV: one row per method, headline columns only."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["method", "params", "bits_per_word", "d_kl", "quantization_kl", "tvd_bound"])
    for rep in reports:
        writer.writerow([
            rep.method_id,
            json.dumps(rep.params, sort_keys=True),
            f"{rep.bits_per_word:.6f}",
            f"{rep.mean_step_kl:.6f}",
            "" if rep.quantization_kl is None else f"{rep.quantization_kl:.6f}",
            f"{rep.tvd_bound:.6f}",
        ])
    return buf.getvalue()


def reports_to_table(reports) -> str:
    header = f"{'method':<36} {'bits/word':>10} {'D_KL':>10} {'quant KL':>10} {'TVD<=':>8}"
    lines = [header, "-" * len(header)]
    for rep in reports:
        q = "-" if rep.quantization_kl is None else f"{rep.quantization_kl:.4f}"
        lines.append(
            f"{rep.method_id:<36} {rep.bits_per_word:>10.4f} {rep.mean_step_kl:>10.4f} "
            f"{q:>10} {rep.tvd_bound:>8.4f}"
        )
    return "\n".join(lines)
