"""Results-folder setup and throughput statistics (CCDF) for plotting."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path


@dataclass(frozen=True)
class CcdfPoint:
    value: float
    prob: float  # P(X > value)


def ccdf(samples) -> list[CcdfPoint]:
    """Empirical complementary CDF: for each distinct sorted value v,
    P(X > v) = (#samples strictly greater than v) / n.

    A leading point just below the minimum with probability 1.0 is prepended
    so plots start at the top of the axis.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("ccdf needs at least one sample")
    xs = sorted(samples)
    n = len(xs)
    lo, hi = xs[0], xs[-1]
    margin = 0.01 * (hi - lo) if hi > lo else max(abs(lo) * 1e-9, 1e-9)
    points = [CcdfPoint(lo - margin, 1.0)]
    i = 0
    while i < n:
        v = xs[i]
        while i < n and xs[i] == v:
            i += 1
        points.append(CcdfPoint(v, (n - i) / n))
    return points


def write_ccdf_csv(points, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("throughput_mbps,ccdf\n")
        for p in points:
            f.write(f"{p.value:.6f},{p.prob:.6f}\n")


def setup_results_dir(base, run_name: str, now: datetime | None = None) -> Path:
    """Create `<base>/<run_name>_<UTC timestamp>/`, adding a monotonic suffix
    when two runs collide within the same second."""
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    stamp = (now or datetime.now(timezone.utc)).strftime("%Y%m%dT%H%M%SZ")
    candidate = base / f"{run_name}_{stamp}"
    suffix = 0
    while True:
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            suffix += 1
            candidate = base / f"{run_name}_{stamp}_{suffix:02d}"
