"""Stationary covariance kernels with per-dimension length scales.

Supported families are the squared-exponential kernel, the Matern kernel
with smoothness 5/2, and flat sums of those two.  Every kernel carries its
own signal variance; length scales are one-per-input-dimension (ARD).
Hyperparameters are exposed in log space for gradient-based fitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KernelSpec",
    "se",
    "matern25",
    "kernel_sum",
    "template_kernel",
    "kernel_eval",
    "kernel_matrix",
    "kernel_diag",
    "kernel_matrix_with_grads",
    "log_params",
    "with_log_params",
]

_LEAF_FAMILIES = ("se", "matern25")

_SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class KernelSpec:
    """A squared-exponential / Matern-5/2 leaf, or a flat sum of leaves.

    Attributes
    ----------
    family : str
        One of ``"se"``, ``"matern25"``, ``"sum"``.
    signal_variance : float or None
        Vertical variation of a leaf kernel; ``None`` for sums.
    length_scales : tuple of float or None
        One positive length scale per input dimension; ``None`` for sums.
    summands : tuple of KernelSpec
        Non-empty only for ``family == "sum"``.
    """

    family: str
    signal_variance: float | None = None
    length_scales: tuple[float, ...] | None = None
    summands: tuple["KernelSpec", ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.family == "sum":
            if len(self.summands) < 2:
                raise ValueError("sum kernel needs at least 2 summands")
            if any(s.family == "sum" for s in self.summands):
                raise ValueError("sum kernels must not be nested")
            dims = {len(s.length_scales) for s in self.summands}
            if len(dims) != 1:
                raise ValueError("summands disagree on input dimension")
        elif self.family in _LEAF_FAMILIES:
            if self.signal_variance is None or self.signal_variance <= 0:
                raise ValueError("signal_variance must be > 0")
            if self.length_scales is None or len(self.length_scales) == 0:
                raise ValueError("at least one length scale required")
            if any(l <= 0 for l in self.length_scales):
                raise ValueError("length scales must be > 0")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @property
    def n_dims(self) -> int:
        if self.family == "sum":
            return self.summands[0].n_dims
        return len(self.length_scales)

    @property
    def leaves(self) -> tuple["KernelSpec", ...]:
        return self.summands if self.family == "sum" else (self,)

    @property
    def total_signal_variance(self) -> float:
        """Prior variance k(x, x), summed over leaves."""
        return float(sum(leaf.signal_variance for leaf in self.leaves))


def _as_scales(length_scales) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(length_scales, dtype=float))
    return tuple(float(v) for v in arr)


def se(signal_variance: float, length_scales) -> KernelSpec:
    """Squared-exponential kernel k(x,x') = s2 * exp(-0.5 * r2)."""
    return KernelSpec("se", float(signal_variance), _as_scales(length_scales))


def matern25(signal_variance: float, length_scales) -> KernelSpec:
    """Matern-5/2 kernel k = s2 * (1 + a + a^2/3) * exp(-a), a = sqrt(5) r."""
    return KernelSpec("matern25", float(signal_variance), _as_scales(length_scales))


def kernel_sum(*specs: KernelSpec) -> KernelSpec:
    return KernelSpec("sum", summands=tuple(specs))


def template_kernel(family: str, n_dims: int) -> KernelSpec:
    """Unit-hyperparameter kernel of a named family, used as a fit template.

    ``family`` is ``"se"``, ``"matern25"`` or ``"se+matern25"``.
    """
    ones = tuple(1.0 for _ in range(n_dims))
    if family == "se":
        return se(1.0, ones)
    if family == "matern25":
        return matern25(1.0, ones)
    if family == "se+matern25":
        return kernel_sum(se(1.0, ones), matern25(1.0, ones))
    raise ValueError(f"unknown kernel family {family!r}")


def _scaled_sq_dims(X, X2, scales):
    """Per-dimension squared scaled differences, shape (N, M, n)."""
    d = X[:, None, :] - X2[None, :, :]
    return (d / scales) ** 2


def _leaf_matrix(leaf: KernelSpec, U):
    """Leaf kernel matrix from summed squared scaled distances U (N, M)."""
    if leaf.family == "se":
        return leaf.signal_variance * np.exp(-0.5 * U)
    a = _SQRT5 * np.sqrt(U)
    return leaf.signal_variance * (1.0 + a + a * a / 3.0) * np.exp(-a)


def kernel_matrix(spec: KernelSpec, X, X2=None) -> np.ndarray:
    """Dense cross-covariance matrix k(X, X2); X2 defaults to X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    X2 = X if X2 is None else np.atleast_2d(np.asarray(X2, dtype=float))
    if X.shape[1] != spec.n_dims or X2.shape[1] != spec.n_dims:
        raise ValueError(
            f"input dimension {X.shape[1]}x{X2.shape[1]} does not match "
            f"kernel dimension {spec.n_dims}"
        )
    K = np.zeros((X.shape[0], X2.shape[0]))
    for leaf in spec.leaves:
        scales = np.asarray(leaf.length_scales)
        U = _scaled_sq_dims(X, X2, scales).sum(axis=2)
        K += _leaf_matrix(leaf, U)
    return K


def kernel_diag(spec: KernelSpec, X) -> np.ndarray:
    """Prior variances k(x_i, x_i) without forming the full matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.full(X.shape[0], spec.total_signal_variance)


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    """Kernel value between two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x.shape != x2.shape:
        raise ValueError("point shapes differ")
    return float(kernel_matrix(spec, x[None, :], x2[None, :])[0, 0])


def kernel_matrix_with_grads(spec: KernelSpec, X):
    """Kernel matrix and its gradients w.r.t. every log hyperparameter.

    Returns ``(K, grads)`` where ``grads[j]`` is dK/d(log theta_j) in the
    order produced by :func:`log_params`: for each leaf, log signal variance
    followed by the per-dimension log length scales.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = np.zeros((X.shape[0], X.shape[0]))
    grads = []
    for leaf in spec.leaves:
        scales = np.asarray(leaf.length_scales)
        Ud = _scaled_sq_dims(X, X, scales)
        U = Ud.sum(axis=2)
        K_leaf = _leaf_matrix(leaf, U)
        K += K_leaf
        grads.append(K_leaf)  # d/d log s2 = K_leaf
        if leaf.family == "se":
            for j in range(len(scales)):
                grads.append(K_leaf * Ud[:, :, j])
        else:
            a = _SQRT5 * np.sqrt(U)
            # dK/d log l_j = (5/3) s2 (1 + a) exp(-a) * u_j, finite at r = 0
            base = (5.0 / 3.0) * leaf.signal_variance * (1.0 + a) * np.exp(-a)
            for j in range(len(scales)):
                grads.append(base * Ud[:, :, j])
    return K, grads


def log_params(spec: KernelSpec) -> np.ndarray:
    """Flatten hyperparameters to log space (per leaf: log s2, log l_1..n)."""
    vals = []
    for leaf in spec.leaves:
        vals.append(np.log(leaf.signal_variance))
        vals.extend(np.log(l) for l in leaf.length_scales)
    return np.array(vals)


def with_log_params(spec: KernelSpec, theta) -> KernelSpec:
    """Rebuild a kernel of the same structure from flattened log parameters."""
    theta = np.asarray(theta, dtype=float)
    leaves = []
    pos = 0
    for leaf in spec.leaves:
        n = len(leaf.length_scales)
        s2 = float(np.exp(theta[pos]))
        scales = tuple(float(v) for v in np.exp(theta[pos + 1 : pos + 1 + n]))
        leaves.append(KernelSpec(leaf.family, s2, scales))
        pos += 1 + n
    if pos != theta.size:
        raise ValueError("parameter vector length mismatch")
    if spec.family == "sum":
        return kernel_sum(*leaves)
    return leaves[0]
