"""Correlated Gaussian arms: validated matrices, problem instances, sampling."""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import objective
from .errors import (
    AsymmetricBeyondTolerance,
    CorrArmsError,
    DiagonalNotOne,
    EmptySubset,
    IndexOutOfRange,
    NegativeEntry,
    NotPSD,
    NotSquare,
    OrderingViolated,
    RhoOutOfRange,
)

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-8
FACTOR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """A K x K correlation matrix plus a lower-triangular sampling factor.

    Build through :func:`validate_matrix`; the arrays are read-only.
    """

    entries: np.ndarray
    factor: np.ndarray

    @property
    def dim(self):
        return self.entries.shape[0]


def _lower_factor(entries):
    try:
        return np.linalg.cholesky(entries)
    except np.linalg.LinAlgError:
        pass
    # singular PSD: clip the spectrum, then rotate V*sqrt(w) to lower-triangular
    # form with a QR of its transpose (L = R^T satisfies L L^T = V w V^T).
    w, v = np.linalg.eigh(entries)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    _, r = np.linalg.qr(root.T)
    return r.T


def validate_matrix(entries):
    """Check the correlation-matrix assumptions and cache a sampling factor."""
    a = np.array(entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    K = a.shape[0]
    if K < 2:
        raise NotSquare("need at least two arms")
    if not np.all(np.isfinite(a)):
        raise CorrArmsError("matrix has non-finite entries")
    asym = np.max(np.abs(a - a.T))
    if asym > SYMMETRY_TOL:
        raise AsymmetricBeyondTolerance(f"max |a - a^T| = {asym:.3g}")
    a = 0.5 * (a + a.T)
    diag = np.diag(a)
    if np.any(diag != 1.0):
        raise DiagonalNotOne(f"diagonal must be exactly 1, got {diag}")
    if np.any(a < 0.0):
        j, l = np.argwhere(a < 0.0)[0]
        raise NegativeEntry(f"entry ({j}, {l}) = {a[j, l]} is negative")
    lam = np.linalg.eigvalsh(a).min()
    if lam < -PSD_TOL:
        raise NotPSD(f"smallest eigenvalue {lam:.3g} < -{PSD_TOL}")
    factor = _lower_factor(a)
    err = np.linalg.norm(factor @ factor.T - a)
    if err > FACTOR_TOL:
        raise NotPSD(f"factorisation error {err:.3g} exceeds {FACTOR_TOL}")
    a.setflags(write=False)
    factor.setflags(write=False)
    return CorrelationMatrix(a, factor)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A correlation matrix with its size-h ground truth.

    ``ratios[i]`` is the suboptimality ratio of arm ``i`` (1 for optimal arms),
    ``complexity`` is H_C.  ``family``/``rhos`` record how a lower-bound
    instance was generated and are carried through JSON files.
    """

    matrix: CorrelationMatrix
    h: int
    optimal_subset: tuple
    ratios: np.ndarray
    complexity: float
    family: Optional[str] = None
    rhos: Optional[tuple] = field(default=None)

    @property
    def K(self):
        return self.matrix.dim

    @property
    def distances(self):
        return objective.distance_matrix(self.matrix.entries)

    def describe(self):
        return {
            "dim": self.K,
            "h": self.h,
            "optimal_subset": list(self.optimal_subset),
            "ratios": [float(r) for r in self.ratios],
            "complexity": self.complexity,
            "log_bar": objective.log_bar(self.K, self.h),
        }


def make_problem(matrix, h, cap=objective.ENUMERATION_CAP, family=None, rhos=None):
    """Attach the enumerated ground truth (S*, every R_i, H_C) to a matrix."""
    if not isinstance(matrix, CorrelationMatrix):
        matrix = validate_matrix(matrix)
    h = int(h)
    if not 2 <= h < matrix.dim:
        raise CorrArmsError(f"need 2 <= h < K, got h={h}, K={matrix.dim}")
    d = objective.distance_matrix(matrix.entries)
    best = objective.unique_best_subset(d, h, cap)
    ratios = objective.all_ratios(d, best, cap)
    ratios.setflags(write=False)
    complexity = objective.hardness(ratios, h)
    return ProblemInstance(
        matrix,
        h,
        best,
        ratios,
        complexity,
        family=family,
        rhos=None if rhos is None else tuple(float(r) for r in rhos),
    )


def lower_bound_entries(rhos, h):
    """Entries of the lower-bound family for ``rhos = (rho_h, ..., rho_K)``.

    Arms ``0 .. h-2`` form a perfectly correlated block; arm ``a >= h-1``
    carries ``rhos[a - h + 1]``.  No ordering is checked here.
    """
    rhos = [float(r) for r in rhos]
    K = h - 1 + len(rhos)
    rho = np.ones(K)
    rho[h - 1 :] = rhos
    a = np.ones((K, K))
    for j in range(K):
        for l in range(K):
            if j == l or (j < h - 1 and l < h - 1):
                continue
            if j >= h - 1 and l >= h - 1:
                a[j, l] = rho[j] * rho[l]
            elif j < h - 1:
                a[j, l] = rho[l]
            else:
                a[j, l] = rho[j]
    return a


def make_lower_bound_instance(rhos, h, cap=objective.ENUMERATION_CAP):
    """Build the hard non-adaptive instance for ``1 > rho_h > rho_{h+1} >= ... >= 0``."""
    rhos = [float(r) for r in rhos]
    h = int(h)
    if h < 2:
        raise CorrArmsError("lower-bound family needs h >= 2")
    if len(rhos) < 2:
        raise CorrArmsError("need at least rho_h and rho_{h+1}")
    if any(not (0.0 <= r < 1.0) for r in rhos):
        raise RhoOutOfRange(f"every rho must lie in [0, 1), got {rhos}")
    if not rhos[0] > rhos[1]:
        raise OrderingViolated(f"rho_h={rhos[0]} must exceed rho_(h+1)={rhos[1]}")
    if any(rhos[k] < rhos[k + 1] for k in range(1, len(rhos) - 1)):
        raise OrderingViolated(f"rho_(h+1) >= ... >= rho_K violated: {rhos}")
    inst = make_problem(lower_bound_entries(rhos, h), h, cap, family="lower_bound", rhos=rhos)
    if inst.optimal_subset != tuple(range(h)):
        raise AssertionError(f"expected S* = [h], enumerated {inst.optimal_subset}")
    expected = [(1.0 - r) / (1.0 - rhos[0]) for r in rhos[1:]]
    if not np.allclose(inst.ratios[h:], expected, rtol=1e-9, atol=0.0):
        raise AssertionError(f"ratios {inst.ratios[h:]} differ from closed form {expected}")
    return inst


def prime_rho(rho_h, rho_next):
    """``1 - (1 - rho_h)^2 / (1 - rho_{h+1})``."""
    return 1.0 - (1.0 - rho_h) ** 2 / (1.0 - rho_next)


def make_prime_instance(instance, cap=objective.ENUMERATION_CAP):
    """The perturbed twin: ``rho_{h+1}`` replaced by :func:`prime_rho`."""
    if instance.family != "lower_bound" or instance.rhos is None:
        raise CorrArmsError("make_prime_instance needs a lower-bound family instance")
    h = instance.h
    rhos = list(instance.rhos)
    rp = prime_rho(rhos[0], rhos[1])
    if not rp > rhos[0]:
        raise AssertionError(f"rho' = {rp} should exceed rho_h = {rhos[0]}")
    rhos[1] = rp
    inst = make_problem(
        lower_bound_entries(rhos, h), h, cap, family="lower_bound_prime", rhos=rhos
    )
    expected_set = tuple(range(h - 1)) + (h,)
    if inst.optimal_subset != expected_set:
        raise AssertionError(f"expected S' = {expected_set}, enumerated {inst.optimal_subset}")
    expected_r = (1.0 - instance.rhos[0]) / (1.0 - rp)
    if not math.isclose(inst.ratios[h - 1], expected_r, rel_tol=1e-9):
        raise AssertionError(f"R of arm {h - 1} is {inst.ratios[h - 1]}, expected {expected_r}")
    return inst


# ---------------------------------------------------------------------------
# sampling


def _revealed_index(revealed, K):
    idx = np.unique(np.asarray(list(revealed), dtype=np.int64))
    if idx.size == 0:
        raise EmptySubset("must reveal at least one arm")
    if idx[0] < 0 or idx[-1] >= K:
        raise IndexOutOfRange(f"arm indices must lie in [0, {K}), got {idx.tolist()}")
    return idx


class Sampler:
    """Draws one latent K-vector per time step and reveals a subset of it.

    One revealed coordinate costs one sample; ``t`` counts time steps.
    """

    def __init__(self, matrix, rng):
        self.matrix = matrix
        self.rng = rng
        self.t = 0
        self.samples = 0
        self.per_arm = np.zeros(matrix.dim, dtype=np.int64)

    def draw(self, revealed, count=1):
        """Reveal ``revealed`` for ``count`` consecutive steps.

        Returns ``(idx, values)`` with ``values`` of shape ``(count, len(idx))``.
        """
        idx = _revealed_index(revealed, self.matrix.dim)
        count = int(count)
        z = self.rng.standard_normal((count, self.matrix.dim))
        x = z @ self.matrix.factor.T
        self.t += count
        self.samples += count * idx.size
        self.per_arm[idx] += count
        return idx, x[:, idx]

    def step(self, revealed):
        idx, x = self.draw(revealed, 1)
        return dict(zip(idx.tolist(), x[0].tolist()))


def sample_step(matrix, revealed, rng):
    """Single-step convenience: draw ``X^t`` and return ``{arm: value}`` for ``revealed``."""
    return Sampler(matrix, rng).step(revealed)


# ---------------------------------------------------------------------------
# instance files


def instance_to_dict(instance):
    out = {
        "dim": instance.K,
        "h": instance.h,
        "entries": [float(v) for v in instance.matrix.entries.ravel()],
    }
    if instance.family is not None:
        out["family"] = instance.family
    if instance.rhos is not None:
        out["rhos"] = list(instance.rhos)
    return out


def instance_from_dict(data, cap=objective.ENUMERATION_CAP):
    try:
        h = int(data["h"])
        entries = data.get("entries")
        family = data.get("family")
        rhos = data.get("rhos")
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorrArmsError(f"malformed instance: {exc}") from None
    if entries is None:
        if family != "lower_bound" or rhos is None:
            raise CorrArmsError("instance needs 'entries' or lower_bound 'rhos'")
        return make_lower_bound_instance(rhos, h, cap)
    a = np.asarray(entries, dtype=np.float64)
    if a.ndim == 1:
        dim = int(data.get("dim", round(math.sqrt(a.size))))
        if dim * dim != a.size:
            raise NotSquare(f"{a.size} entries cannot form a {dim}x{dim} matrix")
        a = a.reshape(dim, dim)
    elif "dim" in data and a.shape[0] != int(data["dim"]):
        raise NotSquare(f"'dim' = {data['dim']} but entries have shape {a.shape}")
    return make_problem(a, h, cap, family=family, rhos=rhos)


def save_instance(instance, path):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=1)
        fh.write("\n")


def load_instance(path, cap=objective.ENUMERATION_CAP):
    with open(path) as fh:
        return instance_from_dict(json.load(fh), cap)
