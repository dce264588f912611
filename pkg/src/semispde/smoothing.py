"""Quadratic capping of the power function r -> |r|^p.

``SmoothPower(p, n)`` is the C^2 function that equals |r|^p for |r| < n and
continues beyond |r| = n with the second-order Taylor polynomial in (|r|-n),

    phi(r) = n^(p-2) * p(p-1)/2 * (|r|-n)^2 + p n^(p-1) (|r|-n) + n^p,

so phi has linearly-growing first derivative and bounded second derivative.
These caps drive the moment estimates for p-th powers of solutions: the
inequalities checked by :func:`check_phi_inequalities` are exactly the ones
that let phi(u) be handled by the Ito formula uniformly in n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SmoothPower", "check_phi_inequalities", "check_phi_limits"]


@dataclass(frozen=True)
class SmoothPower:
    """C^2 approximation of |r|^p, quadratic beyond |r| = n.

    Parameters
    ----------
    p : float
        Power, at least 2.
    n : float
        Cap level, positive.
    """

    p: float
    n: float

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError(f"p must be at least 2, got {self.p}")
        if self.n <= 0:
            raise ValueError(f"cap level n must be positive, got {self.n}")

    def phi(self, r) -> np.ndarray:
        p, n = self.p, self.n
        a = np.abs(np.asarray(r, dtype=float))
        excess = np.maximum(a - n, 0.0)
        outer = n ** (p - 2.0) * (p * (p - 1.0) / 2.0) * excess**2 + p * n ** (p - 1.0) * excess + n**p
        return np.where(a < n, a**p, outer)

    def phi_d1(self, r) -> np.ndarray:
        """First derivative; odd, vanishes at 0."""
        p, n = self.p, self.n
        r = np.asarray(r, dtype=float)
        a = np.abs(r)
        excess = np.maximum(a - n, 0.0)
        inner = p * a ** (p - 1.0)
        outer = n ** (p - 2.0) * p * (p - 1.0) * excess + p * n ** (p - 1.0)
        return np.sign(r) * np.where(a < n, inner, outer)

    def phi_d2(self, r) -> np.ndarray:
        """Second derivative; even, equals p(p-1)n^(p-2) beyond the cap.

        At r = 0 the value is 2 when p = 2 and 0 when p > 2.
        """
        p, n = self.p, self.n
        a = np.abs(np.asarray(r, dtype=float))
        if p == 2.0:
            inner = np.full_like(a, 2.0)
        else:
            inner = p * (p - 1.0) * a ** (p - 2.0)
        return np.where(a < n, inner, p * (p - 1.0) * n ** (p - 2.0))


def _rel_violation(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Largest value of (lhs - rhs) / scale; nonpositive means lhs <= rhs."""
    scale = np.maximum(np.maximum(np.abs(rhs), np.abs(lhs)), 1.0)
    return float(np.max((lhs - rhs) / scale))


def check_phi_inequalities(p: float, n: float, r_samples) -> dict:
    """Audit the cap inequalities on the given samples.

    Checks, with phi = phi_{p,n}:

    a.  |r phi'| <= p phi
    b.  r^2 phi'' <= p(p-1) phi
    c.  (phi')^2 <= 4 p phi'' phi
    d.  (phi'')^(p/(p-2)) <= (p(p-1))^(p/(p-2)) phi   (only for p > 2)

    together with evenness, convexity, domination phi <= |r|^p, and C^2
    matching of the two branches at |r| = n.  Violations are relative to
    max(lhs, rhs, 1); the report passes when the worst one is below ``tol``.
    """
    sp = SmoothPower(p, n)
    r = np.asarray(r_samples, dtype=float).ravel()
    phi = sp.phi(r)
    d1 = sp.phi_d1(r)
    d2 = sp.phi_d2(r)

    viol = {
        "a_r_phi1": _rel_violation(np.abs(r * d1), p * phi),
        "b_r2_phi2": _rel_violation(r**2 * d2, p * (p - 1.0) * phi),
        "c_phi1_sq": _rel_violation(d1**2, 4.0 * p * d2 * phi),
        "evenness": float(np.max(np.abs(sp.phi(-r) - phi))),
        "convexity": float(np.max(-d2)),
        "domination": _rel_violation(phi, np.abs(r) ** p),
    }
    if p > 2.0:
        ex = p / (p - 2.0)
        viol["d_phi2_pow"] = _rel_violation(d2**ex, (p * (p - 1.0)) ** ex * phi)

    # Branch agreement at the seam, evaluated from both closed forms.
    seam_inner = np.array([n**p, p * n ** (p - 1.0), p * (p - 1.0) * n ** (p - 2.0)])
    seam_outer = np.array([sp.phi(n), sp.phi_d1(n), sp.phi_d2(n)])
    viol["seam_c2"] = float(np.max(np.abs(seam_outer - seam_inner) / np.maximum(np.abs(seam_inner), 1.0)))

    tol = 1e-10
    worst = max(viol.values())
    return {
        "p": p,
        "n": n,
        "samples": int(r.size),
        "violations": viol,
        "max_violation": worst,
        "tol": tol,
        "passed": bool(worst <= tol),
    }


def check_phi_limits(p: float, r_samples, n_values) -> dict:
    """Convergence of the capped powers to |r|^p as the cap level grows.

    For each n the report records the sup gap of (phi, phi', phi'') against
    (|r|^p, p|r|^(p-2) r, p(p-1)|r|^(p-2)) on the samples, whether the match
    is exact once n exceeds max|r|, and the fitted constant
    sup phi / |r|^p, which stays below p(p-1)/2 + p + 1.
    """
    r = np.asarray(r_samples, dtype=float).ravel()
    a = np.abs(r)
    target = a**p
    target_d1 = p * np.sign(r) * a ** (p - 1.0)
    if p == 2.0:
        target_d2 = np.full_like(a, 2.0)
    else:
        target_d2 = p * (p - 1.0) * a ** (p - 2.0)

    rows = []
    rmax = float(a.max()) if a.size else 0.0
    nonzero = target > 0
    for n in sorted(float(v) for v in n_values):
        sp = SmoothPower(p, n)
        gap0 = float(np.max(np.abs(sp.phi(r) - target)))
        gap1 = float(np.max(np.abs(sp.phi_d1(r) - target_d1)))
        gap2 = float(np.max(np.abs(sp.phi_d2(r) - target_d2)))
        ratio = float(np.max(sp.phi(r)[nonzero] / target[nonzero])) if nonzero.any() else 0.0
        rows.append(
            {
                "n": n,
                "sup_gap_phi": gap0,
                "sup_gap_d1": gap1,
                "sup_gap_d2": gap2,
                "growth_ratio": ratio,
                "exact": bool(n > rmax and gap0 == 0.0 and gap1 == 0.0 and gap2 == 0.0),
            }
        )

    gaps = [row["sup_gap_phi"] for row in rows]
    decreasing = all(g2 <= g1 * (1 + 1e-12) for g1, g2 in zip(gaps, gaps[1:]))
    growth_bound = p * (p - 1.0) / 2.0 + p + 1.0
    max_ratio = max(row["growth_ratio"] for row in rows)
    return {
        "p": p,
        "rows": rows,
        "gaps_decreasing": bool(decreasing),
        "max_growth_ratio": max_ratio,
        "growth_bound": growth_bound,
        "passed": bool(decreasing and max_ratio <= growth_bound * (1 + 1e-12)),
    }
