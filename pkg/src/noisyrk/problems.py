"""Construction of consistent linear systems and their noisy counterparts.

A system is built from a prescribed spectrum: Gaussian bases are
orthonormalized into U and V, the singular values are placed on the
diagonal, and the right-hand side is drawn inside the range of A so the
noiseless system is consistent.  Four noise models then corrupt it:

* ``additive``            -- A + sigma_a * E,  b + sigma_b * eps
* ``multiplicative``      -- (I + sigma_a E) A (I + sigma_a F),  b + sigma_b * eps
* ``partial_consistent``  -- A(I + M) with the right-hand side unchanged,
                             rescaled so ||pinv(A)|| * ||dA|| equals a given
                             strength < 1; rank and consistency are preserved
* ``preconditioner``      -- A + (sigma_{r-1} - sigma_r) u_r v_r^T, a
                             deliberate rank-gap fill that shrinks the scaled
                             condition number

All constructors are pure and deterministic per ``(inputs, seed)``.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import seeding
from .errors import HypothesisError
from .linalg import (
    SvdFactors,
    orthonormalize_columns,
    read_matrix,
    read_vector,
    sigma_min_nonzero,
    spectral_norm,
    svd,
    write_matrix,
    write_vector,
)

__all__ = [
    "Spacing",
    "NoiseModel",
    "SpectrumSpec",
    "LinearSystem",
    "NoisySystem",
    "generate_system",
    "additive_noise",
    "multiplicative_noise",
    "partial_consistent_noise",
    "preconditioner_noise",
    "save_system",
    "load_system",
]

_MAX_REDRAWS = 100
_MIN_FACTOR_SIGMA = 1e-8  # nonsingularity floor for (I + E), (I + F), (I + M)


class Spacing(str, enum.Enum):
    """How the singular values fill [sigma_min, sigma_max]."""

    EVEN = "even"
    RANDOM_DISTINCT = "random_distinct"
    # All values equal to sigma_max except the last one at sigma_min; the
    # shape used to demonstrate additive preconditioning.
    FLAT_TOP = "flat_top"


class NoiseModel(str, enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"
    PARTIAL_CONSISTENT = "partial_consistent"
    PRECONDITIONER = "preconditioner"


@dataclass(frozen=True)
class SpectrumSpec:
    """Shape and spectrum of a generated system matrix."""

    m: int
    n: int
    r: int
    sigma_min: float
    sigma_max: float
    spacing: Spacing = Spacing.EVEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if not 1 <= self.r <= min(self.m, self.n):
            raise ValueError("rank must satisfy 1 <= r <= min(m, n)")
        if not 0 < self.sigma_min <= self.sigma_max:
            raise ValueError("need 0 < sigma_min <= sigma_max")
        if self.spacing is Spacing.FLAT_TOP and (self.r < 2 or self.sigma_min >= self.sigma_max):
            raise ValueError("flat_top spacing needs r >= 2 and sigma_min < sigma_max")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spacing"] = self.spacing.value
        return d


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """A consistent system A x = b with its minimal-norm solution.

    ``b`` lies in range(A) by construction and ``x_ls = pinv(A) b``.
    ``spec`` and ``seed`` are carried for serialization.
    """

    a: np.ndarray
    b: np.ndarray
    x_ls: np.ndarray
    factors: SvdFactors
    spec: SpectrumSpec | None = None
    seed: int | None = None


@dataclass(frozen=True, eq=False)
class NoisySystem:
    """A base system plus its corrupted counterpart and the noise pieces.

    ``e``/``f``/``eps`` hold the unit-variance draws for the additive and
    multiplicative models (scaled by ``sigma_a``/``sigma_b`` when applied);
    for the partial-consistent and preconditioner models ``e`` is the
    effective matrix perturbation itself and ``sigma_a == 1``.
    """

    base: LinearSystem
    a_tilde: np.ndarray
    b_tilde: np.ndarray
    e: np.ndarray
    f: np.ndarray | None
    eps: np.ndarray
    sigma_a: float
    sigma_b: float
    model: NoiseModel

    def matrix_noise(self) -> np.ndarray:
        """Total effective perturbation of the matrix, a_tilde - a.

        Formed from the scaled noise factors (E A + A F + E A F for the
        multiplicative model) rather than by subtraction.
        """
        if self.model is NoiseModel.MULTIPLICATIVE:
            a = self.base.a
            se = self.sigma_a * self.e
            sf = self.sigma_a * self.f
            return se @ a + a @ sf + se @ a @ sf
        return self.sigma_a * self.e

    def rhs_noise(self) -> np.ndarray:
        """Total effective perturbation of the right-hand side."""
        return self.sigma_b * self.eps


def _spectrum_values(spec: SpectrumSpec, seed: int) -> np.ndarray:
    """Nonincreasing singular values per the spacing rule."""
    if spec.spacing is Spacing.EVEN:
        if spec.r > 1 and spec.sigma_min == spec.sigma_max:
            raise ValueError("even spacing with r > 1 needs distinct endpoints")
        return np.linspace(spec.sigma_max, spec.sigma_min, spec.r)
    if spec.spacing is Spacing.FLAT_TOP:
        values = np.full(spec.r, spec.sigma_max)
        values[-1] = spec.sigma_min
        return values
    # random distinct: sorted uniforms, minimum pairwise gap enforced by redraw
    min_gap = 1e-6 * spec.sigma_max
    if spec.r > 1 and (spec.sigma_max - spec.sigma_min) < min_gap * (spec.r - 1):
        raise ValueError("interval too narrow for r distinct singular values")
    for attempt in range(_MAX_REDRAWS):
        rng = seeding.stream(seed, seeding.SPECTRUM, attempt)
        values = np.sort(rng.uniform(spec.sigma_min, spec.sigma_max, spec.r))[::-1]
        if spec.r == 1 or np.min(-np.diff(values)) >= min_gap:
            return values
    raise HypothesisError("could not draw distinct singular values after 100 attempts")


def generate_system(spec: SpectrumSpec, seed: int) -> LinearSystem:
    """Generate a consistent system with the prescribed spectrum.

    U and V come from entrywise standard-normal draws with the columns
    orthonormalized, b = A z for a standard-normal z, and
    x_ls = pinv(A) b.  Deterministic given ``seed``.
    """
    sigma = _spectrum_values(spec, seed)
    gu = seeding.stream(seed, seeding.LEFT_BASIS).standard_normal((spec.m, spec.r))
    gv = seeding.stream(seed, seeding.RIGHT_BASIS).standard_normal((spec.n, spec.r))
    u = orthonormalize_columns(gu)
    v = orthonormalize_columns(gv)
    a = (u * sigma) @ v.T
    z = seeding.stream(seed, seeding.SOLUTION).standard_normal(spec.n)
    b = a @ z
    factors = svd(a)
    x_ls = factors.pinv_apply(b)
    return LinearSystem(a=a, b=b, x_ls=x_ls, factors=factors, spec=spec, seed=seed)


def additive_noise(sys: LinearSystem, sigma_a: float, sigma_b: float, seed: int) -> NoisySystem:
    """Additive corruption a + sigma_a * E, b + sigma_b * eps.

    E and eps have standard-normal entries drawn from named streams, so
    the same seed yields the same unit draws for every magnitude pair.
    Zero magnitudes reproduce the base system bit-exactly.
    """
    if sigma_a < 0 or sigma_b < 0:
        raise ValueError("noise magnitudes must be nonnegative")
    m, n = sys.a.shape
    e = seeding.stream(seed, seeding.MATRIX_NOISE).standard_normal((m, n))
    eps = seeding.stream(seed, seeding.RHS_NOISE).standard_normal(m)
    a_tilde = sys.a + sigma_a * e if sigma_a else sys.a.copy()
    b_tilde = sys.b + sigma_b * eps if sigma_b else sys.b.copy()
    return NoisySystem(
        base=sys, a_tilde=a_tilde, b_tilde=b_tilde, e=e, f=None, eps=eps,
        sigma_a=float(sigma_a), sigma_b=float(sigma_b), model=NoiseModel.ADDITIVE,
    )


def multiplicative_noise(
    sys: LinearSystem,
    sigma_a: float,
    sigma_b: float,
    use_e: bool = True,
    use_f: bool = True,
    seed: int = 0,
) -> NoisySystem:
    """Multiplicative corruption (I + sigma_a E) a (I + sigma_a F).

    Either factor can be switched off (``use_e`` / ``use_f``), in which
    case the corresponding draw is the zero matrix.  Draws are redone up
    to 100 times if a factor comes out numerically singular.
    """
    if sigma_a < 0 or sigma_b < 0:
        raise ValueError("noise magnitudes must be nonnegative")
    m, n = sys.a.shape
    for attempt in range(_MAX_REDRAWS):
        if use_e:
            e = seeding.stream(seed, seeding.MATRIX_NOISE, attempt).standard_normal((m, m))
        else:
            e = np.zeros((m, m))
        if use_f:
            f = seeding.stream(seed, seeding.RIGHT_FACTOR_NOISE, attempt).standard_normal((n, n))
        else:
            f = np.zeros((n, n))
        left = np.eye(m) + sigma_a * e
        right = np.eye(n) + sigma_a * f
        if sigma_a == 0 or not (use_e or use_f):
            break
        if sigma_min_nonzero(left) >= _MIN_FACTOR_SIGMA and sigma_min_nonzero(right) >= _MIN_FACTOR_SIGMA:
            break
    else:
        raise HypothesisError(
            "nonsingularity of the multiplicative factors failed after 100 redraws"
        )
    if sigma_a == 0 or not (use_e or use_f):
        a_tilde = sys.a.copy()
    else:
        a_tilde = left @ sys.a @ right
    eps = seeding.stream(seed, seeding.RHS_NOISE).standard_normal(m)
    b_tilde = sys.b + sigma_b * eps if sigma_b else sys.b.copy()
    return NoisySystem(
        base=sys, a_tilde=a_tilde, b_tilde=b_tilde, e=e, f=f, eps=eps,
        sigma_a=float(sigma_a), sigma_b=float(sigma_b), model=NoiseModel.MULTIPLICATIVE,
    )


def partial_consistent_noise(sys: LinearSystem, strength: float, seed: int) -> NoisySystem:
    """Matrix-only corruption that keeps ``a_tilde x = b`` consistent.

    The perturbation is dA = a M for a square standard-normal M rescaled
    so that ``||pinv(a)|| * ||dA|| == strength < 1``.  Because
    a_tilde = a (I + M) with I + M nonsingular, the rank and the range
    of the matrix are unchanged and b stays in range(a_tilde).
    """
    if not 0 < strength < 1:
        raise ValueError("strength must lie strictly between 0 and 1")
    n = sys.a.shape[1]
    pinv_norm = 1.0 / sigma_min_nonzero(sys.factors)
    for attempt in range(_MAX_REDRAWS):
        m0 = seeding.stream(seed, seeding.MATRIX_NOISE, attempt).standard_normal((n, n))
        am = sys.a @ m0
        scale = strength / (pinv_norm * spectral_norm(am))
        if sigma_min_nonzero(np.eye(n) + scale * m0) >= _MIN_FACTOR_SIGMA:
            break
    else:
        raise HypothesisError("nonsingularity of (I + M) failed after 100 redraws")
    delta = scale * am
    a_tilde = sys.a + delta
    return NoisySystem(
        base=sys, a_tilde=a_tilde, b_tilde=sys.b.copy(), e=delta, f=None,
        eps=np.zeros(sys.a.shape[0]), sigma_a=1.0, sigma_b=0.0,
        model=NoiseModel.PARTIAL_CONSISTENT,
    )


def preconditioner_noise(sys: LinearSystem) -> NoisySystem:
    """Fill the trailing spectral gap: a + (sigma_{r-1} - sigma_r) u_r v_r^T.

    The corrupted matrix has singular values
    (sigma_1, ..., sigma_{r-1}, sigma_{r-1}), which lowers the scaled
    condition number while leaving the right-hand side untouched.
    Requires rank >= 2 and a strict gap between the two smallest values.
    """
    factors = sys.factors
    if factors.rank < 2:
        raise ValueError("preconditioner noise needs rank at least 2")
    gap = float(factors.sigma[-2] - factors.sigma[-1])
    if gap <= 1e-12 * float(factors.sigma[0]):
        raise ValueError("the two smallest singular values must be distinct")
    e = gap * np.outer(factors.u[:, -1], factors.v[:, -1])
    return NoisySystem(
        base=sys, a_tilde=sys.a + e, b_tilde=sys.b.copy(), e=e, f=None,
        eps=np.zeros(sys.a.shape[0]), sigma_a=1.0, sigma_b=0.0,
        model=NoiseModel.PRECONDITIONER,
    )


# ---------------------------------------------------------------------------
# Directory serialization: A.mat, b.vec, xls.vec, atilde.mat, btilde.vec,
# meta.json, plus the noise pieces (e.mat, f.mat, eps.vec) so a system
# round-trips without regenerating draws.
# ---------------------------------------------------------------------------


def save_system(noisy: NoisySystem, directory: str | os.PathLike) -> None:
    """Serialize a noisy system (and its base) into a directory."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    write_matrix(path / "A.mat", noisy.base.a)
    write_vector(path / "b.vec", noisy.base.b)
    write_vector(path / "xls.vec", noisy.base.x_ls)
    write_matrix(path / "atilde.mat", noisy.a_tilde)
    write_vector(path / "btilde.vec", noisy.b_tilde)
    write_matrix(path / "e.mat", noisy.e)
    if noisy.f is not None:
        write_matrix(path / "f.mat", noisy.f)
    write_vector(path / "eps.vec", noisy.eps)
    meta = {
        "model": noisy.model.value,
        "sigma_a": noisy.sigma_a,
        "sigma_b": noisy.sigma_b,
        "spec": noisy.base.spec.to_dict() if noisy.base.spec else None,
        "seed": noisy.base.seed,
    }
    with open(path / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_system(directory: str | os.PathLike) -> NoisySystem:
    """Reconstruct a noisy system written by :func:`save_system`."""
    path = Path(directory)
    with open(path / "meta.json") as fh:
        meta = json.load(fh)
    a = read_matrix(path / "A.mat")
    spec = SpectrumSpec(**meta["spec"]) if meta.get("spec") else None
    base = LinearSystem(
        a=a,
        b=read_vector(path / "b.vec"),
        x_ls=read_vector(path / "xls.vec"),
        factors=svd(a),
        spec=spec,
        seed=meta.get("seed"),
    )
    f_path = path / "f.mat"
    return NoisySystem(
        base=base,
        a_tilde=read_matrix(path / "atilde.mat"),
        b_tilde=read_vector(path / "btilde.vec"),
        e=read_matrix(path / "e.mat"),
        f=read_matrix(f_path) if f_path.exists() else None,
        eps=read_vector(path / "eps.vec"),
        sigma_a=float(meta["sigma_a"]),
        sigma_b=float(meta["sigma_b"]),
        model=NoiseModel(meta["model"]),
    )
