"""Convergence rates and horizons for randomized Kaczmarz on noisy systems.

Every bound has the shape ``rate^k * initial_error + horizon`` (with the
exponent halved for bounds on the unsquared error).  The rate is always
``1 - 1/Rt`` where ``Rt = ||pinv(At)||^2 ||At||_F^2`` is the scaled
condition number of the matrix the iteration actually touches.  The
catalog:

* ``noiseless``       squared error, horizon 0 (consistent system)
* ``rhs_noise``       squared, horizon ||eps||^2 / sigma_min(A)^2
* ``additive``        squared, hypothesis-free, horizon
                      ||E x_ls - eps||^2 / sigma_min(At)^2
* ``multiplicative``  squared, same with dA = E A + A F + E A F
* ``perturbation_doubly``   unsquared, routed through the noisy least
                      squares solution; needs rank preservation,
                      ||pinv(A)|| ||E|| < 1 and a consistent noisy system
* ``perturbation_partial``  unsquared, for matrix noise that keeps the
                      original right-hand side reachable
* ``multiplicative_perturbation``  unsquared, valid for perturbations of
                      any size but needs a consistent noisy system

Pure functions throughout; safe to evaluate concurrently.
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import HypothesisError
from .linalg import SvdFactors, as_vector, svd
from .problems import NoiseModel, LinearSystem, NoisySystem

__all__ = [
    "BoundKind",
    "BoundCurve",
    "HorizonComparison",
    "bound_noiseless",
    "bound_rhs_noise",
    "bound_additive",
    "bound_multiplicative",
    "bound_perturbation_doubly",
    "bound_perturbation_partial",
    "bound_multiplicative_perturbation",
    "perturbed_ls_distance",
    "horizon_comparison",
    "iterations_to_tolerance",
    "evaluate_bound",
    "write_bound_csv",
]

_CONSISTENCY_RTOL = 1e-8


class BoundKind(str, enum.Enum):
    NOISELESS = "noiseless"
    RHS_NOISE = "rhs_noise"
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"
    PERTURBATION_DOUBLY = "perturbation_doubly"
    PERTURBATION_PARTIAL = "perturbation_partial"
    MULTIPLICATIVE_PERTURBATION = "multiplicative_perturbation"


@dataclass(frozen=True, eq=False)
class BoundCurve:
    """A theoretical error bound evaluated on a recording grid.

    ``values[j] = rate**k_j * initial_error + horizon`` with the exponent
    halved when ``squared`` is False.  ``scalars`` records every norm and
    condition number that went into the formula.
    """

    kind: BoundKind
    rate: float
    horizon: float
    initial_error: float
    squared: bool
    iterations: np.ndarray
    values: np.ndarray
    scalars: dict

    def with_initial_error(self, initial_error: float) -> "BoundCurve":
        """Same bound re-evaluated from a different initial error."""
        values = _evaluate(self.rate, initial_error, self.horizon, self.iterations, self.squared)
        return replace(self, initial_error=float(initial_error), values=values)


@dataclass(frozen=True)
class HorizonComparison:
    """Side-by-side horizons of the direct and the perturbation bound.

    ``condition_holds`` is ``2 sigma_min(At) > sigma_min(A) - ||E||``;
    when it does, the three-term inequality chain linking the two
    horizons is checked numerically and reported as ``chain_verified``.
    """

    condition_holds: bool
    main_horizon: float
    partial_horizon: float
    chain_verified: bool


def _evaluate(rate, initial_error, horizon, ks, squared) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    exponent = ks if squared else ks / 2.0
    return rate ** exponent * initial_error + horizon


def _norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def _spec_norm(a: np.ndarray) -> float:
    """Spectral norm that maps the zero matrix to 0 (for noise terms)."""
    if not np.any(a):
        return 0.0
    s = svd(a)
    return float(s.sigma[0]) if s.rank else 0.0


def _scaled_r(factors: SvdFactors) -> float:
    if factors.rank == 0:
        raise HypothesisError("iteration matrix is numerically zero")
    s = factors.sigma
    return float(np.sum(s * s) / (s[-1] * s[-1]))


def _require_consistent(a: np.ndarray, x: np.ndarray, b: np.ndarray, what: str) -> None:
    rel = _norm(a @ x - b) / _norm(b)
    if rel > _CONSISTENCY_RTOL:
        raise HypothesisError(
            f"consistency of {what} failed: relative residual {rel:.3e} exceeds {_CONSISTENCY_RTOL:g}"
        )


def _require_perturbation_hypotheses(sys: LinearSystem, noise_norm: float) -> float:
    """Check ||pinv(A)|| ||E|| < 1 and return that product."""
    q = noise_norm / float(sys.factors.sigma[-1])
    if q >= 1.0:
        raise HypothesisError(f"noise smallness failed: ||pinv(A)|| * ||E|| = {q:.6g} >= 1")
    return q


def _require_rank_preserved(sys: LinearSystem, tilde: SvdFactors) -> None:
    if tilde.rank != sys.factors.rank:
        raise HypothesisError(
            f"rank preservation failed: rank(A) = {sys.factors.rank}, "
            f"rank of the noisy matrix = {tilde.rank}"
        )


def _check_weyl(base: SvdFactors, tilde: SvdFactors, shape: tuple, noise_norm: float) -> None:
    # opportunistic singular-value perturbation sanity check
    r = min(shape)
    sa = np.zeros(r)
    sa[: base.rank] = base.sigma
    st = np.zeros(r)
    st[: tilde.rank] = tilde.sigma
    slack = 1e-9 * max(1.0, float(sa[0]), float(st[0]))
    if np.max(np.abs(st - sa)) > noise_norm + slack:
        raise HypothesisError("singular value perturbation exceeded the noise norm (Weyl check)")


def bound_noiseless(sys: LinearSystem, x0: np.ndarray, ks) -> BoundCurve:
    """Squared-error bound for a consistent system: pure geometric decay."""
    x0 = as_vector(x0, "x0")
    r = _scaled_r(sys.factors)
    rate = 1.0 - 1.0 / r
    d = x0 - sys.x_ls
    initial = float(d @ d)
    values = _evaluate(rate, initial, 0.0, ks, squared=True)
    return BoundCurve(
        kind=BoundKind.NOISELESS, rate=rate, horizon=0.0, initial_error=initial,
        squared=True, iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={"scaled_condition_number": r},
    )


def bound_rhs_noise(sys: LinearSystem, eps: np.ndarray, x0: np.ndarray, ks) -> BoundCurve:
    """Squared-error bound when only the right-hand side is noisy."""
    x0 = as_vector(x0, "x0")
    eps = np.asarray(eps, dtype=float)
    r = _scaled_r(sys.factors)
    sigma_min = float(sys.factors.sigma[-1])
    horizon = float(eps @ eps) / (sigma_min * sigma_min)
    d = x0 - sys.x_ls
    initial = float(d @ d)
    rate = 1.0 - 1.0 / r
    values = _evaluate(rate, initial, horizon, ks, squared=True)
    return BoundCurve(
        kind=BoundKind.RHS_NOISE, rate=rate, horizon=horizon, initial_error=initial,
        squared=True, iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={
            "scaled_condition_number": r,
            "sigma_min": sigma_min,
            "rhs_noise_norm": _norm(eps),
        },
    )


def bound_additive(sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks) -> BoundCurve:
    """Hypothesis-free squared-error bound against the noiseless solution.

    Works for any matrix perturbation: the horizon is
    ``||E x_ls - eps||^2 / sigma_min(At)^2`` with the total effective
    noise terms, and the rate uses the noisy matrix's scaled condition
    number.
    """
    x0 = as_vector(x0, "x0")
    tilde = svd(noisy.a_tilde)
    r_tilde = _scaled_r(tilde)
    sigma_min = float(tilde.sigma[-1])
    mismatch = noisy.matrix_noise() @ sys.x_ls - noisy.rhs_noise()
    horizon = float(mismatch @ mismatch) / (sigma_min * sigma_min)
    d = x0 - sys.x_ls
    initial = float(d @ d)
    rate = 1.0 - 1.0 / r_tilde
    values = _evaluate(rate, initial, horizon, ks, squared=True)
    return BoundCurve(
        kind=BoundKind.ADDITIVE, rate=rate, horizon=horizon, initial_error=initial,
        squared=True, iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={
            "scaled_condition_number_tilde": r_tilde,
            "sigma_min_tilde": sigma_min,
            "noise_mismatch_norm": _norm(mismatch),
        },
    )


def bound_multiplicative(sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks) -> BoundCurve:
    """Squared-error bound for two-sided multiplicative corruption.

    Identical in shape to :func:`bound_additive` but with the effective
    perturbation formed explicitly as ``E A + A F + E A F`` from the
    scaled factors.
    """
    if noisy.model is not NoiseModel.MULTIPLICATIVE:
        raise HypothesisError("multiplicative bound requested for a non-multiplicative model")
    curve = bound_additive(sys, noisy, x0, ks)
    return replace(curve, kind=BoundKind.MULTIPLICATIVE)


def perturbed_ls_distance(sys: LinearSystem, noisy: NoisySystem) -> float:
    """Upper bound on the distance between the noisy and noiseless solutions.

    ``(2 q ||x_ls|| + ||pinv(A)|| ||eps||) / (1 - q)`` with
    ``q = ||pinv(A)|| ||E||``; requires rank preservation and ``q < 1``.
    The returned value is verified to dominate the directly computed
    distance ``||pinv(At) bt - x_ls||``.
    """
    tilde = svd(noisy.a_tilde)
    _require_rank_preserved(sys, tilde)
    noise = noisy.matrix_noise()
    noise_norm = _spec_norm(noise)
    q = _require_perturbation_hypotheses(sys, noise_norm)
    _check_weyl(sys.factors, tilde, noisy.a_tilde.shape, noise_norm)
    pinv_norm = 1.0 / float(sys.factors.sigma[-1])
    eps_norm = _norm(noisy.rhs_noise())
    x_ls_norm = _norm(sys.x_ls)
    value = (2.0 * q * x_ls_norm + pinv_norm * eps_norm) / (1.0 - q)
    x_nls = tilde.pinv_apply(noisy.b_tilde)
    direct = _norm(x_nls - sys.x_ls)
    if direct > value + 1e-9 * max(1.0, value):
        raise HypothesisError(
            f"perturbed least squares distance bound violated: {direct:.6g} > {value:.6g}"
        )
    return float(value)


def bound_perturbation_doubly(
    sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks
) -> BoundCurve:
    """Unsquared bound routed through the noisy least squares solution.

    Needs rank preservation, small noise, and consistency of the noisy
    system itself; the horizon is :func:`perturbed_ls_distance`.
    """
    x0 = as_vector(x0, "x0")
    tilde = svd(noisy.a_tilde)
    _require_rank_preserved(sys, tilde)
    noise_norm = _spec_norm(noisy.matrix_noise())
    _require_perturbation_hypotheses(sys, noise_norm)
    x_nls = tilde.pinv_apply(noisy.b_tilde)
    _require_consistent(noisy.a_tilde, x_nls, noisy.b_tilde, "the noisy linear system")
    horizon = perturbed_ls_distance(sys, noisy)
    r_tilde = _scaled_r(tilde)
    rate = 1.0 - 1.0 / r_tilde
    initial = _norm(x0 - x_nls)
    values = _evaluate(rate, initial, horizon, ks, squared=False)
    return BoundCurve(
        kind=BoundKind.PERTURBATION_DOUBLY, rate=rate, horizon=horizon,
        initial_error=initial, squared=False,
        iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={
            "scaled_condition_number_tilde": r_tilde,
            "sigma_min_tilde": float(tilde.sigma[-1]),
            "matrix_noise_norm": noise_norm,
            "rhs_noise_norm": _norm(noisy.rhs_noise()),
            "x_ls_norm": _norm(sys.x_ls),
        },
    )


def bound_perturbation_partial(
    sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks
) -> BoundCurve:
    """Unsquared bound for matrix noise with the original right-hand side.

    The horizon is ``2 ||x_ls|| q / (1 - q) + ||eps|| / sigma_min(At)``,
    the initial error is measured against ``pinv(At) b``.
    """
    if noisy.model is not NoiseModel.PARTIAL_CONSISTENT:
        raise HypothesisError(
            "partial perturbation bound requested for a model other than partial_consistent"
        )
    x0 = as_vector(x0, "x0")
    tilde = svd(noisy.a_tilde)
    _require_rank_preserved(sys, tilde)
    noise_norm = _spec_norm(noisy.matrix_noise())
    q = _require_perturbation_hypotheses(sys, noise_norm)
    _check_weyl(sys.factors, tilde, noisy.a_tilde.shape, noise_norm)
    x_pnls = tilde.pinv_apply(sys.b)
    _require_consistent(noisy.a_tilde, x_pnls, sys.b, "the partially noisy linear system")
    sigma_min_tilde = float(tilde.sigma[-1])
    eps_norm = _norm(noisy.rhs_noise())
    horizon = 2.0 * _norm(sys.x_ls) * q / (1.0 - q) + eps_norm / sigma_min_tilde
    r_tilde = _scaled_r(tilde)
    rate = 1.0 - 1.0 / r_tilde
    initial = _norm(x0 - x_pnls)
    values = _evaluate(rate, initial, horizon, ks, squared=False)
    return BoundCurve(
        kind=BoundKind.PERTURBATION_PARTIAL, rate=rate, horizon=horizon,
        initial_error=initial, squared=False,
        iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={
            "scaled_condition_number_tilde": r_tilde,
            "sigma_min_tilde": sigma_min_tilde,
            "matrix_noise_norm": noise_norm,
            "rhs_noise_norm": eps_norm,
            "x_ls_norm": _norm(sys.x_ls),
        },
    )


def bound_multiplicative_perturbation(
    sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks
) -> BoundCurve:
    """Unsquared bound for multiplicative noise of arbitrary size.

    With scaled factors E, F and relative right-hand noise
    ``rho = ||eps|| / ||b||``::

        e1 = sqrt(||F||^2 + ||inv(I+F) F||^2)
        e2 = (1 + e1) * (rho + (1 + rho) * sqrt(||E||^2 + ||inv(I+E) E||^2))
        horizon = e1 ||x_ls|| + e2 ||pinv(A)|| ||b||

    Requires nonsingular factors and a consistent noisy system.
    """
    if noisy.model is not NoiseModel.MULTIPLICATIVE:
        raise HypothesisError(
            "multiplicative perturbation bound requested for a non-multiplicative model"
        )
    x0 = as_vector(x0, "x0")
    m, n = noisy.a_tilde.shape
    e_eff = noisy.sigma_a * noisy.e
    f_eff = noisy.sigma_a * noisy.f
    i_e = np.eye(m) + e_eff
    i_f = np.eye(n) + f_eff
    for label, mat in (("I + E", i_e), ("I + F", i_f)):
        s = svd(mat)
        if s.rank < mat.shape[0] or float(s.sigma[-1]) < 1e-8:
            raise HypothesisError(f"invertibility of ({label}) failed")
    tilde = svd(noisy.a_tilde)
    x_nls = tilde.pinv_apply(noisy.b_tilde)
    _require_consistent(noisy.a_tilde, x_nls, noisy.b_tilde, "the noisy linear system")
    e1 = math.hypot(_spec_norm(f_eff), _spec_norm(np.linalg.solve(i_f, f_eff)))
    rho = _norm(noisy.rhs_noise()) / _norm(sys.b)
    e_part = math.hypot(_spec_norm(e_eff), _spec_norm(np.linalg.solve(i_e, e_eff)))
    e2 = (1.0 + e1) * (rho + (1.0 + rho) * e_part)
    pinv_norm = 1.0 / float(sys.factors.sigma[-1])
    b_norm = _norm(sys.b)
    horizon = e1 * _norm(sys.x_ls) + e2 * pinv_norm * b_norm
    r_tilde = _scaled_r(tilde)
    rate = 1.0 - 1.0 / r_tilde
    initial = _norm(x0 - x_nls)
    values = _evaluate(rate, initial, horizon, ks, squared=False)
    return BoundCurve(
        kind=BoundKind.MULTIPLICATIVE_PERTURBATION, rate=rate, horizon=horizon,
        initial_error=initial, squared=False,
        iterations=np.asarray(ks, dtype=np.int64), values=values,
        scalars={
            "scaled_condition_number_tilde": r_tilde,
            "e1": e1,
            "e2": e2,
            "relative_rhs_noise": rho,
            "x_ls_norm": _norm(sys.x_ls),
            "b_norm": b_norm,
        },
    )


def horizon_comparison(sys: LinearSystem, noisy: NoisySystem) -> HorizonComparison:
    """Compare the direct and the perturbation horizon (unsquared forms).

    Whenever ``2 sigma_min(At) > sigma_min(A) - ||E||`` the direct
    horizon ``||E x_ls - eps|| / sigma_min(At)`` is at most the
    perturbation horizon, via the chain

        ||E x_ls - eps|| / s  <=  (||E|| ||x_ls|| + ||eps||) / s
                              <=  2 ||E|| ||x_ls|| / (sigma_min(A) - ||E||) + ||eps|| / s

    with ``s = sigma_min(At)``; the chain is verified numerically.
    """
    if noisy.model is not NoiseModel.PARTIAL_CONSISTENT:
        raise HypothesisError(
            "horizon comparison requested for a model other than partial_consistent"
        )
    tilde = svd(noisy.a_tilde)
    _require_rank_preserved(sys, tilde)
    noise = noisy.matrix_noise()
    noise_norm = _spec_norm(noise)
    q = _require_perturbation_hypotheses(sys, noise_norm)
    _check_weyl(sys.factors, tilde, noisy.a_tilde.shape, noise_norm)
    sigma_min = float(sys.factors.sigma[-1])
    sigma_min_tilde = float(tilde.sigma[-1])
    eps = noisy.rhs_noise()
    eps_norm = _norm(eps)
    x_ls_norm = _norm(sys.x_ls)

    main = _norm(noise @ sys.x_ls - eps) / sigma_min_tilde
    partial = 2.0 * x_ls_norm * q / (1.0 - q) + eps_norm / sigma_min_tilde
    condition = 2.0 * sigma_min_tilde > sigma_min - noise_norm

    chain = False
    if condition:
        middle = (noise_norm * x_ls_norm + eps_norm) / sigma_min_tilde
        slack = 1e-9 * max(1.0, partial)
        chain = main <= middle + slack and middle <= partial + slack
    return HorizonComparison(
        condition_holds=bool(condition),
        main_horizon=float(main),
        partial_horizon=float(partial),
        chain_verified=bool(chain),
    )


def iterations_to_tolerance(r: float, initial_sq_error: float, tau: float, tau0: float = 0.0) -> int:
    """Smallest K with ``(1 - 1/r)^K * initial_sq_error <= tau - tau0``.

    ``tau0`` is the convergence horizon; a tolerance at or below it is
    unreachable and raises.
    """
    if r <= 1.0:
        raise ValueError("scaled condition number must exceed 1")
    if tau0 < 0.0:
        raise ValueError("horizon must be nonnegative")
    if tau <= tau0:
        raise ValueError("tolerance below horizon, unreachable")
    if initial_sq_error <= 0.0:
        raise ValueError("initial squared error must be positive")
    target = tau - tau0
    if initial_sq_error <= target:
        return 0
    log_rate = math.log1p(-1.0 / r)
    log_init = math.log(initial_sq_error)
    log_target = math.log(target)
    k = max(0, math.ceil((log_target - log_init) / log_rate))
    while k * log_rate + log_init > log_target:
        k += 1
    while k > 0 and (k - 1) * log_rate + log_init <= log_target:
        k -= 1
    return k


def evaluate_bound(
    kind: BoundKind, sys: LinearSystem, noisy: NoisySystem, x0: np.ndarray, ks
) -> BoundCurve:
    """Dispatch a bound by kind, validating it applies to the noise model."""
    kind = BoundKind(kind)
    if kind is BoundKind.NOISELESS:
        if np.any(noisy.matrix_noise()) or np.any(noisy.rhs_noise()):
            raise HypothesisError("noiseless bound requested but the system carries noise")
        return bound_noiseless(sys, x0, ks)
    if kind is BoundKind.RHS_NOISE:
        if np.any(noisy.matrix_noise()):
            raise HypothesisError("rhs-noise bound requested but the matrix carries noise")
        return bound_rhs_noise(sys, noisy.rhs_noise(), x0, ks)
    if kind is BoundKind.ADDITIVE:
        return bound_additive(sys, noisy, x0, ks)
    if kind is BoundKind.MULTIPLICATIVE:
        return bound_multiplicative(sys, noisy, x0, ks)
    if kind is BoundKind.PERTURBATION_DOUBLY:
        return bound_perturbation_doubly(sys, noisy, x0, ks)
    if kind is BoundKind.PERTURBATION_PARTIAL:
        return bound_perturbation_partial(sys, noisy, x0, ks)
    return bound_multiplicative_perturbation(sys, noisy, x0, ks)


def write_bound_csv(path: str | os.PathLike, curve: BoundCurve) -> None:
    """CSV of iteration/bound pairs plus a JSON sidecar with the scalars."""
    lines = ["iteration,bound_value"]
    for k, v in zip(curve.iterations, curve.values):
        lines.append(f"{int(k)},{format(float(v), '.17g')}")
    path = str(path)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    meta = {
        "kind": curve.kind.value,
        "rate_per_iteration": curve.rate,
        "horizon": curve.horizon,
        "initial_error": curve.initial_error,
        "squared": curve.squared,
        "scalars": curve.scalars,
    }
    sidecar = path[: -len(".csv")] + ".meta.json" if path.endswith(".csv") else path + ".meta.json"
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
