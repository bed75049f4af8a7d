"""Constant-time LCL solving with a precomputed identifier substitute.

The support is coloured so that nodes within distance ``2T(n0)+2`` get
distinct colours from ``[n0]``; the base algorithm then runs for ``T(n0)``
rounds with those colours in place of identifiers. ``n0`` is the least
value with ``Δ^{2T(n0)+2} + 1 <= n0``, which makes the round count
independent of the network size.

The distance ``2T(n0)+2`` (not ``2T(n0)+1``) is what the palette budget
above pays for, so that is what the preprocessing must provide.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from ..decompose import distance_coloring_preprocessor
from ..engine import ExecutionTrace, preprocess, run
from ..graphcore import SupportedInstance, subgraph
from ..verify import CheckReport, LclProblem, check_labeling

__all__ = ["LclCollapseParams", "find_n0", "collapse_params", "lcl_collapse_solve", "ContractViolation", "LclResult"]


class ContractViolation(RuntimeError):
    """The base algorithm broke its declared running time."""


@dataclass(frozen=True)
class LclCollapseParams:
    delta: int
    n0: int
    base_rounds: int

    @property
    def distance(self) -> int:
        return 2 * self.base_rounds + 2


def find_n0(running_time: Callable[[int], int], delta: int) -> int:
    """Least ``n0`` with ``delta**(2*T(n0)+2) + 1 <= n0``, for non-decreasing ``T``.

    For ``n < need(n)`` every ``m`` in ``[n, need(n))`` fails too, since
    ``need`` is non-decreasing, so jumping straight to ``need(n)`` is exact.
    """
    n = 1
    for _ in range(10_000):
        need = delta ** (2 * running_time(n) + 2) + 1
        if need <= n:
            return n
        n = need
    raise RuntimeError("n0 search did not converge; is T(n) = o(log n)?")


def collapse_params(base, delta: int) -> LclCollapseParams:
    n0 = find_n0(lambda n: base.running_time(n, delta), delta)
    return LclCollapseParams(delta, n0, base.running_time(n0, delta))


@dataclass
class LclResult:
    outputs: dict
    trace: ExecutionTrace
    params: LclCollapseParams
    report: CheckReport


def lcl_collapse_solve(
    inst: SupportedInstance,
    base,
    problem: LclProblem,
    memory: Mapping | None = None,
    delta: int | None = None,
) -> LclResult:
    """Solve ``problem`` in ``T(n0)`` rounds using a distance colouring of ``H``.

    Works unchanged in PASSIVE mode: only the colouring and input edges are
    used. Raises :class:`ContractViolation` if the base algorithm overruns
    and ``RuntimeError`` if the checker rejects the output.
    """
    delta = inst.support.max_degree if delta is None else delta
    params = collapse_params(base, delta)
    if memory is None:
        memory = preprocess(inst.support, distance_coloring_preprocessor(params.distance))
    for v, m in memory.items():
        if m.get("k", 0) < params.distance:
            raise ValueError(f"node {v}: colouring distance {m.get('k')} < required {params.distance}")
        if not 1 <= m["color"] <= params.n0:
            raise ValueError(f"node {v}: colour {m['color']} outside [1, n0={params.n0}]")
    trace = run(inst, base.program(params.n0, delta, id_key="color"), memory, max_rounds=params.base_rounds)
    if not trace.halted:
        raise ContractViolation(f"base algorithm did not halt within T(n0) = {params.base_rounds} rounds")
    report = check_labeling(subgraph(inst), problem, trace.outputs, outputs_only=True)
    if not report.accepted:
        raise RuntimeError(f"checker rejected collapsed output: {report.violations[:3]}")
    report.quality = max(trace.outputs.values(), default=0)
    return LclResult(dict(trace.outputs), trace, params, report)
