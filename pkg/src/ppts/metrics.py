"""Run counters and the message/comparison cost model.

Accounting used by the protocol engine:

* every conflict computation (the initial full one, and each pass of a
  synchronous move) evaluates a known set of external edges, each costing
  exactly two scalar-product messages;
* every synchronous move costs one comparison and every turn ends with one
  termination comparison.

With ``c`` turns, ``l`` synchronous moves and full re-evaluation this gives
``2 * n_e * (2l + 1)`` messages; with ``l = 0`` it is ``2 * n_e``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass
class RunMetrics:
    n_vertices: int = 0
    n_external: int = 0
    parties: int = 0
    iterations: int = 0
    turns: int = 0
    sync_moves: int = 0
    inner_moves: int = 0
    forced_moves: int = 0
    accepted_moves: int = 0
    touched: list[int] = field(default_factory=list)
    scalar_messages: int = 0
    comparisons: int = 0
    eval_requests: int = 0
    bytes_sent: int = 0
    wall_time: float = 0.0
    keygen_time: float = 0.0

    @property
    def conflict_computations(self) -> int:
        return len(self.touched)

    @property
    def sync_per_turn(self) -> float:
        return self.sync_moves / self.turns if self.turns else 0.0

    def expected_scalar_messages(self) -> int:
        return 2 * sum(self.touched)

    def expected_comparisons(self) -> int:
        return self.sync_moves + self.turns

    @classmethod
    def from_dict(cls, data: dict) -> "RunMetrics":
        """Inverse of ``asdict``; unknown keys are ignored."""
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def summary(self) -> dict:
        out = asdict(self)
        out["touched_total"] = sum(out.pop("touched"))
        out["conflict_computations"] = self.conflict_computations
        out["sync_per_turn"] = round(self.sync_per_turn, 4)
        return out


@dataclass
class CostCheck:
    ok: bool
    expected_messages: int
    observed_messages: int
    expected_comparisons: int
    observed_comparisons: int

    def __str__(self):
        verdict = "PASS" if self.ok else "FAIL"
        return (f"{verdict}: scalar messages {self.observed_messages} "
                f"(expected {self.expected_messages}), comparisons "
                f"{self.observed_comparisons} (expected {self.expected_comparisons})")


def verify_cost_model(metrics: RunMetrics) -> CostCheck:
    """Reconcile transport counters with the touched-edge accounting."""
    exp_m = metrics.expected_scalar_messages()
    exp_c = metrics.expected_comparisons()
    ok = exp_m == metrics.scalar_messages and exp_c == metrics.comparisons
    return CostCheck(ok, exp_m, metrics.scalar_messages, exp_c, metrics.comparisons)


def full_recompute_messages(n_external: int, sync_moves: int) -> int:
    """Closed form when every pass re-evaluates all external edges."""
    return 2 * n_external * (2 * sync_moves + 1)
