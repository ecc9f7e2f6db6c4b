"""Closed-form storage, distance, energy and compromise bounds.

Each function returns a :class:`BoundsReport` (or a pair of them) carrying
the value together with whether the formula's preconditions hold. Inputs that
are merely outside a formula's domain give ``applicable=False``; structurally
invalid inputs such as negative counts raise ``ValueError``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

Direction = Literal["lower", "upper"]

# guards ceil() against float noise such as 0.9 * 100 = 90.00000000000001
_CEIL_EPS = 1e-9

CSV_FIELDS = ("name", "direction", "value", "applicable", "reason", "inputs")


@dataclass(frozen=True)
class BoundsReport:
    name: str
    direction: Direction
    value: float | int | None
    applicable: bool
    reason: str = ""
    inputs: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "direction": self.direction,
            "value": self.value,
            "applicable": self.applicable,
            "reason": self.reason,
            "inputs": dict(self.inputs),
        }

    def csv_row(self) -> dict:
        row = self.as_dict()
        row["inputs"] = json.dumps(self.inputs, sort_keys=True)
        row["value"] = "" if self.value is None else self.value
        return row

    def holds(self, measured: float, rel_tol: float = 0.0) -> bool | None:
        """Compare a measurement against the bound; ``None`` if inapplicable.

        ``rel_tol`` widens the comparison for quantities that are equal in
        exact arithmetic but computed along different float paths.
        """
        if not self.applicable or self.value is None:
            return None
        slack = rel_tol * abs(self.value)
        if self.direction == "lower":
            return measured >= self.value - slack
        return measured <= self.value + slack


def _require_nonneg(**kwargs) -> None:
    for k, v in kwargs.items():
        if v < 0:
            raise ValueError(f"{k} must be non-negative, got {v}")


def _na(name: str, direction: Direction, reason: str, inputs: dict) -> BoundsReport:
    return BoundsReport(name, direction, None, False, reason, inputs)


def moore_storage_lower(n: int, D: int) -> BoundsReport:
    """Degree lower bound ``1 + n**(1/D)`` for a graph of diameter ``D``."""
    _require_nonneg(n=n, D=D)
    inputs = {"n": n, "D": D}
    if n < 2 or D < 1:
        return _na("moore_storage_lower", "lower", "needs n >= 2 and D >= 1", inputs)
    value = 1 + _root(n, D)
    reason = "derivation assumes theta_max > 2"
    if D == 1:
        reason += "; D=1 degenerate (formula exceeds n-1)"
    return BoundsReport("moore_storage_lower", "lower", value, True, reason, inputs)


def _root(x: float, k: int) -> float:
    # exact for perfect powers, where x ** (1/k) can land one ulp low
    r = x ** (1.0 / k)
    nearest = round(r)
    if nearest**k == x:
        return float(nearest)
    return r


def moore_reach_bound(theta_max: int, D: int) -> BoundsReport:
    """Most nodes a graph of max degree ``theta_max`` and diameter ``D`` can have.

    Counts at most ``theta_max (theta_max-1)^(i-1)`` nodes at distance ``i``:
    ``n <= 1 + theta_max * sum_{i<D} (theta_max-1)^i``. This is the count that
    :func:`moore_storage_lower` is derived from, without the final relaxation.
    """
    _require_nonneg(theta_max=theta_max, D=D)
    inputs = {"theta_max": theta_max, "D": D}
    value = 1 + theta_max * sum((theta_max - 1) ** i for i in range(D))
    return BoundsReport("moore_reach_bound", "upper", value, True, "", inputs)


def moore_storage_lower_disjoint(n: int, D: int, f: int) -> BoundsReport:
    """Degree lower bound ``1 + (f*n)**(1/D)`` with ``f`` disjoint paths."""
    _require_nonneg(n=n, D=D, f=f)
    inputs = {"n": n, "D": D, "f": f}
    if n < 2 or D < 1 or f < 1:
        return _na("moore_storage_lower_disjoint", "lower", "needs n >= 2, D >= 1, f >= 1", inputs)
    return BoundsReport(
        "moore_storage_lower_disjoint",
        "lower",
        1 + _root(f * n, D),
        True,
        "derivation assumes theta_max > 2",
        inputs,
    )


def min_degree_for_connectivity(p_link: float, edge_count: int) -> BoundsReport:
    """Minimum t-graph degree ``ceil((1 - p_link) |E|) + 1``."""
    _require_nonneg(edge_count=edge_count)
    inputs = {"p_link": p_link, "edge_count": edge_count}
    if not 0.0 <= p_link <= 1.0:
        return _na("min_degree_for_connectivity", "lower", "p_link outside [0, 1]", inputs)
    expected_deleted = (1.0 - p_link) * edge_count
    value = math.ceil(expected_deleted - _CEIL_EPS) + 1
    return BoundsReport("min_degree_for_connectivity", "lower", value, True, "", inputs)


def chung_edge_deletion(D: int, t: int) -> BoundsReport:
    """Diameter after deleting ``t`` edges: ``(t+1) D + t``.

    The graph must be ``t+1`` edge-connected; that is left to the caller.
    """
    _require_nonneg(D=D, t=t)
    inputs = {"D": D, "t": t}
    if t < 1:
        return _na("chung_edge_deletion", "upper", "needs t >= 1", inputs)
    return BoundsReport(
        "chung_edge_deletion",
        "upper",
        (t + 1) * D + t,
        True,
        "requires a (t+1)-edge-connected graph",
        inputs,
    )


def chung_vertex_deletion(n: int, lam: int, t: int) -> BoundsReport:
    """Diameter after deleting ``t < lam`` vertices of a ``lam``-connected graph."""
    _require_nonneg(n=n, lam=lam, t=t)
    inputs = {"n": n, "lambda": lam, "t": t}
    if t >= lam:
        return _na("chung_vertex_deletion", "upper", "needs t < lambda", inputs)
    if n <= t + 2:
        return _na("chung_vertex_deletion", "upper", "needs n > t + 2", inputs)
    value = (n - t - 2) // (lam - t) + 1
    return BoundsReport("chung_vertex_deletion", "upper", value, True, "", inputs)


def disconnection_probability(D_T: int, n: int, b: float, p_die: float, f: int) -> float:
    """``[1 - (1-p_die)^(D_T-1) (b/(n-1))^D_T]^f``."""
    survive = (1.0 - p_die) ** (D_T - 1) * (b / (n - 1)) ** D_T
    return (1.0 - survive) ** f


def deployed_mean_distance_bound(
    d_bar_T: float,
    D_T: int,
    D_DT: int,
    theta_min: int,
    n: int,
    b: float,
    p_die: float,
    f: int,
) -> BoundsReport:
    """Upper bound on the deployed mean distance over physical neighbours.

    ``d_bar_T + (D_DT - 2) (1 - theta_min/(n-1)) P`` with ``P`` from
    :func:`disconnection_probability`.
    """
    _require_nonneg(D_T=D_T, D_DT=D_DT, theta_min=theta_min, n=n, b=b, f=f)
    inputs = {
        "d_bar_T": d_bar_T,
        "D_T": D_T,
        "D_DT": D_DT,
        "theta_min": theta_min,
        "n": n,
        "b": b,
        "p_die": p_die,
        "f": f,
    }
    name = "deployed_mean_distance_bound"
    if n < 2:
        return _na(name, "upper", "needs n >= 2", inputs)
    if D_DT < 2:
        return _na(name, "upper", "needs D_DT >= 2", inputs)
    if not 0.0 <= p_die < 1.0:
        return _na(name, "upper", "needs 0 <= p_die < 1", inputs)
    if b > n - 1:
        return _na(name, "upper", "needs b <= n - 1", inputs)
    if f < 1:
        return _na(name, "upper", "needs f >= 1", inputs)
    P = disconnection_probability(D_T, n, b, p_die, f)
    value = d_bar_T + (D_DT - 2) * (1.0 - theta_min / (n - 1)) * P
    return BoundsReport(name, "upper", value, True, "", inputs)


def mean_distance_bounds(
    n: int, D: int, theta_min: int, theta_max: int
) -> tuple[BoundsReport, BoundsReport]:
    """Lower and upper bounds ``(d_L, d_U)`` on the mean distance."""
    _require_nonneg(n=n, D=D, theta_min=theta_min, theta_max=theta_max)
    inputs = {"n": n, "D": D, "theta_min": theta_min, "theta_max": theta_max}
    if n < 2 or D < 1:
        reason = "needs n >= 2 and D >= 1"
        return _na("mean_distance_lower", "lower", reason, inputs), _na(
            "mean_distance_upper", "upper", reason, inputs
        )
    if theta_max > 2:
        d_l = D - theta_max / ((n - 1) * (theta_max - 2) ** 2) * (theta_max - 1) ** D
        lower = BoundsReport("mean_distance_lower", "lower", d_l, True, "", inputs)
    else:
        lower = _na("mean_distance_lower", "lower", "needs theta_max > 2", inputs)
    if theta_min > 2:
        d_u = D - ((theta_min - 1) ** D - (D + 1)) / ((n - 1) * (theta_min - 2))
        upper = BoundsReport("mean_distance_upper", "upper", d_u, True, "", inputs)
    else:
        upper = _na("mean_distance_upper", "upper", "needs theta_min > 2", inputs)
    return lower, upper


def affected_node_count(theta_max: int, g: int, D: int) -> int:
    """``theta_max * sum_{i<D} (g-1)^i``: nodes reached by the key cascade."""
    return theta_max * sum((g - 1) ** i for i in range(D))


def compromise_fraction_bound(
    n: int, D: int, theta_min: int, theta_max: int, g: int
) -> BoundsReport:
    """Upper bound on the fraction of links lost when one node is compromised.

    For ``g > 2`` this is ``g/(g-2) * theta_max/(n theta_min) * ((g-1)^D - 1)``.
    For ``g`` of 1 or 2 the closed form divides by zero, so the geometric sum
    it was derived from is used instead.
    """
    if g <= 0:
        raise ValueError(f"key reuse g must be >= 1, got {g}")
    _require_nonneg(n=n, D=D, theta_min=theta_min, theta_max=theta_max)
    inputs = {"n": n, "D": D, "theta_min": theta_min, "theta_max": theta_max, "g": g}
    name = "compromise_fraction_bound"
    if n < 1 or theta_min < 1 or D < 1:
        return _na(name, "upper", "needs n >= 1, theta_min >= 1, D >= 1", inputs)
    if g > 2:
        value = g / (g - 2) * theta_max / (n * theta_min) * ((g - 1) ** D - 1)
        reason = ""
    else:
        value = affected_node_count(theta_max, g, D) * g / (n * theta_min)
        reason = "geometric-sum form (g <= 2)"
    return BoundsReport(name, "upper", value, True, reason, inputs)


def p_c_bounds(
    n: int, b: float, p_die: float, theta_min: int, theta_max: int
) -> tuple[BoundsReport, BoundsReport]:
    """Degree-based bounds on the deployed edge probability ``p_c``."""
    _require_nonneg(n=n, b=b, theta_min=theta_min, theta_max=theta_max)
    inputs = {"n": n, "b": b, "p_die": p_die, "theta_min": theta_min, "theta_max": theta_max}
    if n < 2 or b > n - 1 or not 0.0 <= p_die <= 1.0:
        reason = "needs n >= 2, b <= n-1, 0 <= p_die <= 1"
        return _na("p_c_lower", "lower", reason, inputs), _na("p_c_upper", "upper", reason, inputs)
    scale = (1.0 - p_die) ** 2 * b / (n - 1) ** 2
    return (
        BoundsReport("p_c_lower", "lower", scale * theta_min, True, "", inputs),
        BoundsReport("p_c_upper", "upper", scale * theta_max, True, "", inputs),
    )


def p_c_analytic(n: int, b: float, p_die: float, edge_count: int) -> float:
    """``p_link * |E| / C(n, 2)``."""
    p_link = (1.0 - p_die) ** 2 * b / (n - 1)
    return p_link * edge_count / math.comb(n, 2)


REGISTRY = {
    "moore_storage_lower": moore_storage_lower,
    "moore_storage_lower_disjoint": moore_storage_lower_disjoint,
    "moore_reach_bound": moore_reach_bound,
    "min_degree_for_connectivity": min_degree_for_connectivity,
    "chung_edge_deletion": chung_edge_deletion,
    "chung_vertex_deletion": chung_vertex_deletion,
    "deployed_mean_distance_bound": deployed_mean_distance_bound,
    "mean_distance_bounds": mean_distance_bounds,
    "compromise_fraction_bound": compromise_fraction_bound,
    "p_c_bounds": p_c_bounds,
}
