"""Flop models and a small counter used by the reduction drivers.

Reported gflops always use the fixed models below so that runs are
comparable; ``FlopCounter`` tallies what the code actually executed and is
only used to check the models.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def flop_model(stage: str, n: int, b: int = 0, nb: int = 0, k: int = 0) -> float:
    """Nominal flop count of one stage.

    dbr, direct: (4/3) n^3. chase: 6 n^2 b. syr2k: 2 n^2 k.
    eig and total have no model (NaN); only their time is reported.
    """
    if stage in ("dbr", "direct"):
        return 4.0 / 3.0 * n**3
    if stage == "chase":
        return 6.0 * n * n * b
    if stage == "syr2k":
        return 2.0 * n * n * k
    return float("nan")


@dataclass
class FlopCounter:
    total: float = 0.0
    by_kind: dict = field(default_factory=dict)

    def add(self, kind: str, flops: float) -> None:
        self.total += flops
        self.by_kind[kind] = self.by_kind.get(kind, 0.0) + flops

    def gemm(self, m: int, n: int, k: int, kind: str = "gemm") -> None:
        self.add(kind, 2.0 * m * n * k)
