"""Generative process models: simulation, closed-form moments, couplings.

Every model is a causal map from an iid stream of standard normal innovation
vectors to observations. ``path`` runs that map from a zero initial state,
which is what the dependence-measure couplings need; ``simulate`` adds a burn
-in long enough that the truncated start is invisible at double precision.

Linear models (white noise, scalar AR(1), VAR(1), VMA) expose closed-form
autocovariances Gamma(u) and spectral densities; the threshold AR model is
simulation-only. The spectral density follows the transform convention
f(lambda) = (1/2pi) sum_u e^{-i u lambda} Gamma(u) used by the estimator, so
for VAR(1) it reads conj(H) Sigma H' with H = (I - A e^{-i lambda})^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_discrete_lyapunov
from scipy.signal import lfilter

from .errors import NonStationaryModel, UnsupportedModel
from .series import MultivariateSeries

__all__ = [
    "ProcessModel",
    "WhiteNoise",
    "AR1Scalar",
    "VAR1",
    "VMA",
    "ThresholdAR1",
    "default_var1",
    "parse_model",
    "simulate",
]

_TWO_PI = 2.0 * np.pi


def _as_cov(sigma, n):
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape == (1, 1) and n > 1:
        sigma = sigma[0, 0] * np.eye(n)
    if sigma.shape != (n, n):
        raise ValueError(f"innovation covariance must be {n}x{n}")
    if not np.allclose(sigma, sigma.T):
        raise ValueError("innovation covariance must be symmetric")
    return sigma


class ProcessModel:
    """Common surface of all generative models."""

    kind: str = "abstract"
    has_closed_form: bool = False
    is_linear: bool = False

    @property
    def n_dim(self) -> int:
        raise NotImplementedError

    @property
    def innov_dim(self) -> int:
        return self.n_dim

    def decay_horizon(self, tol: float = 1e-14) -> int:
        """Lags after which the causal map's memory is below tol."""
        raise NotImplementedError

    def path(self, eps: np.ndarray) -> np.ndarray:
        """Run the causal map over innovations (..., steps, b) from zero state."""
        raise NotImplementedError

    def gamma(self, u: int) -> np.ndarray:
        raise UnsupportedModel(f"model {self.kind!r} has no closed-form Gamma(u)")

    def spectral_density(self, freqs) -> np.ndarray:
        raise UnsupportedModel(f"model {self.kind!r} has no closed-form spectrum")

    def ma_matrix(self, j: int) -> np.ndarray:
        """Coefficient of innovation eps_{t-j} for linear models."""
        raise UnsupportedModel(f"model {self.kind!r} is not linear")

    def simulate_values(self, t_len: int, rng: np.random.Generator) -> np.ndarray:
        burn = max(1000, self.decay_horizon())
        eps = rng.standard_normal((burn + t_len, self.innov_dim))
        return self.path(eps)[burn:]

    def describe(self) -> dict:
        return {"kind": self.kind, "n_dim": self.n_dim}


@dataclass(frozen=True, eq=False)
class WhiteNoise(ProcessModel):
    """iid Gaussian vectors with covariance sigma."""

    sigma: np.ndarray = field(default_factory=lambda: np.eye(1))
    kind = "white_noise"
    has_closed_form = True
    is_linear = True

    def __post_init__(self):
        sigma = _as_cov(self.sigma, np.atleast_2d(self.sigma).shape[0])
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", cholesky(sigma, lower=True))

    @property
    def n_dim(self):
        return self.sigma.shape[0]

    def decay_horizon(self, tol: float = 1e-14) -> int:
        return 0

    def path(self, eps):
        return eps @ self._chol.T

    def gamma(self, u):
        if u == 0:
            return self.sigma.copy()
        return np.zeros_like(self.sigma)

    def spectral_density(self, freqs):
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        flat = self.sigma.astype(complex) / _TWO_PI
        return np.broadcast_to(flat, (freqs.size, *flat.shape)).copy()

    def ma_matrix(self, j):
        if j == 0:
            return self._chol.copy()
        return np.zeros_like(self.sigma)


@dataclass(frozen=True, eq=False)
class VAR1(ProcessModel):
    """Z_t = A Z_{t-1} + w_t with w_t ~ N(0, sigma)."""

    coeff: np.ndarray
    sigma: np.ndarray | None = None
    kind = "var1"
    has_closed_form = True
    is_linear = True

    def __post_init__(self):
        coeff = np.atleast_2d(np.asarray(self.coeff, dtype=float))
        n = coeff.shape[0]
        if coeff.shape != (n, n):
            raise ValueError("VAR(1) coefficient must be square")
        radius = np.max(np.abs(np.linalg.eigvals(coeff)))
        if radius >= 1.0:
            raise NonStationaryModel(f"VAR(1) spectral radius {radius:.4f} >= 1")
        sigma = _as_cov(self.sigma if self.sigma is not None else np.eye(n), n)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", cholesky(sigma, lower=True))
        object.__setattr__(self, "_radius", float(radius))
        object.__setattr__(
            self, "_gamma0", solve_discrete_lyapunov(coeff, sigma)
        )

    @property
    def n_dim(self):
        return self.coeff.shape[0]

    def decay_horizon(self, tol: float = 1e-14) -> int:
        if self._radius == 0.0:
            return 1
        return int(np.ceil(np.log(tol) / np.log(self._radius))) + 1

    def path(self, eps):
        w = eps @ self._chol.T
        out = np.empty_like(w)
        state = np.zeros(w.shape[:-2] + (self.n_dim,))
        for t in range(w.shape[-2]):
            state = state @ self.coeff.T + w[..., t, :]
            out[..., t, :] = state
        return out

    def gamma(self, u):
        power = np.linalg.matrix_power(self.coeff.T, abs(u))
        if u >= 0:
            return self._gamma0 @ power
        return (self._gamma0 @ power).T.copy()

    def spectral_density(self, freqs):
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        eye = np.eye(self.n_dim)
        out = np.empty((freqs.size, self.n_dim, self.n_dim), dtype=complex)
        for k, lam in enumerate(freqs):
            h = np.linalg.inv(eye - self.coeff * np.exp(-1j * lam))
            out[k] = h.conj() @ self.sigma @ h.T / _TWO_PI
        return out

    def ma_matrix(self, j):
        return np.linalg.matrix_power(self.coeff, j) @ self._chol


class AR1Scalar(VAR1):
    """Scalar AR(1): Z_t = phi Z_{t-1} + eps_t, eps_t ~ N(0, sigma2)."""

    kind = "ar1_scalar"

    def __init__(self, phi: float, sigma2: float = 1.0):
        if not abs(phi) < 1.0:
            raise NonStationaryModel(f"AR(1) needs |phi| < 1, got {phi}")
        super().__init__(coeff=np.array([[phi]]), sigma=np.array([[sigma2]]))
        object.__setattr__(self, "phi", float(phi))
        object.__setattr__(self, "sigma2", float(sigma2))

    def path(self, eps):
        w = eps * np.sqrt(self.sigma2)
        return lfilter([1.0], [1.0, -self.phi], w, axis=-2)

    def describe(self):
        return {"kind": self.kind, "n_dim": 1, "phi": self.phi, "sigma2": self.sigma2}


@dataclass(frozen=True, eq=False)
class VMA(ProcessModel):
    """Vector MA: Z_t = sum_k B_k w_{t-k}, w_t ~ N(0, sigma)."""

    coeffs: tuple
    sigma: np.ndarray | None = None
    kind = "vma"
    has_closed_form = True
    is_linear = True

    def __post_init__(self):
        coeffs = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.coeffs)
        if not coeffs:
            raise ValueError("VMA needs at least one coefficient matrix")
        n = coeffs[0].shape[0]
        for b in coeffs:
            if b.shape != (n, n):
                raise ValueError("all VMA coefficient matrices must be square, same size")
            if not np.all(np.isfinite(b)):
                raise ValueError("VMA coefficients must be finite")
        sigma = _as_cov(self.sigma if self.sigma is not None else np.eye(n), n)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", cholesky(sigma, lower=True))

    @property
    def n_dim(self):
        return self.coeffs[0].shape[0]

    @property
    def order(self):
        return len(self.coeffs) - 1

    def decay_horizon(self, tol: float = 1e-14) -> int:
        return self.order

    def path(self, eps):
        w = eps @ self._chol.T
        out = np.zeros(w.shape[:-1] + (self.n_dim,))
        steps = w.shape[-2]
        for k, b in enumerate(self.coeffs):
            if k >= steps:
                break
            if k == 0:
                out += w @ b.T
            else:
                out[..., k:, :] += w[..., :-k, :] @ b.T
        return out

    def gamma(self, u):
        if u < 0:
            return self.gamma(-u).T.copy()
        n = self.n_dim
        out = np.zeros((n, n))
        for k in range(len(self.coeffs) - u):
            out += self.coeffs[k] @ self.sigma @ self.coeffs[k + u].T
        return out

    def spectral_density(self, freqs):
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        out = np.empty((freqs.size, self.n_dim, self.n_dim), dtype=complex)
        for idx, lam in enumerate(freqs):
            b_lam = sum(
                b * np.exp(-1j * k * lam) for k, b in enumerate(self.coeffs)
            )
            out[idx] = b_lam.conj() @ self.sigma @ b_lam.T / _TWO_PI
        return out

    def ma_matrix(self, j):
        if j < len(self.coeffs):
            return self.coeffs[j] @ self._chol
        return np.zeros((self.n_dim, self.n_dim))


@dataclass(frozen=True, eq=False)
class ThresholdAR1(ProcessModel):
    """Threshold AR: Z_t = a max(Z_{t-1}, 0) + b min(Z_{t-1}, 0) + eps_t."""

    a: float
    b: float
    sigma2: float = 1.0
    kind = "threshold_ar1"

    def __post_init__(self):
        contraction = max(abs(self.a), abs(self.b))
        if contraction >= 1.0:
            raise NonStationaryModel(
                f"threshold AR needs max(|a|, |b|) < 1, got {contraction:.4f}"
            )
        object.__setattr__(self, "_contraction", contraction)

    @property
    def n_dim(self):
        return 1

    def decay_horizon(self, tol: float = 1e-14) -> int:
        if self._contraction == 0.0:
            return 1
        return int(np.ceil(np.log(tol) / np.log(self._contraction))) + 1

    def path(self, eps):
        w = np.sqrt(self.sigma2) * eps[..., 0]
        out = np.empty_like(w)
        state = np.zeros(w.shape[:-1])
        for t in range(w.shape[-1]):
            state = (
                self.a * np.maximum(state, 0.0)
                + self.b * np.minimum(state, 0.0)
                + w[..., t]
            )
            out[..., t] = state
        return out[..., None]


def default_var1() -> VAR1:
    """Bivariate test model A = [[0.4, 0.1], [0, 0.3]], Sigma = I."""
    return VAR1(coeff=np.array([[0.4, 0.1], [0.0, 0.3]]), sigma=np.eye(2))


def simulate(model: ProcessModel, t_len: int, seed) -> MultivariateSeries:
    """Deterministic draw of T observations after burn-in."""
    if t_len < 2:
        raise ValueError("t_len must be at least 2")
    rng = np.random.default_rng(seed)
    values = model.simulate_values(t_len, rng)
    return MultivariateSeries(values, centered=False)


def _parse_kv(body: str) -> dict:
    out = {}
    if body:
        for item in body.split(","):
            key, _, value = item.partition("=")
            out[key.strip()] = value.strip()
    return out


def parse_model(text: str) -> ProcessModel:
    """Build a model from the CLI grammar.

    ``white[:dim=k,sigma2=v]``, ``ar1:phi=0.5[,sigma2=1]``,
    ``var1:file=A.csv,sigma=S.csv`` (or ``var1:default``),
    ``vma:file=B0.csv;B1.csv[,sigma=S.csv]``, ``tar:a=0.5,b=-0.3[,sigma2=1]``.
    """
    head, _, body = text.partition(":")
    head = head.strip().lower()
    if head in ("white", "white_noise", "wn"):
        kv = _parse_kv(body)
        dim = int(kv.get("dim", 1))
        sigma2 = float(kv.get("sigma2", 1.0))
        return WhiteNoise(sigma=sigma2 * np.eye(dim))
    if head == "ar1":
        kv = _parse_kv(body)
        if "phi" not in kv:
            raise ValueError("ar1 model needs phi=, e.g. ar1:phi=0.5")
        return AR1Scalar(phi=float(kv["phi"]), sigma2=float(kv.get("sigma2", 1.0)))
    if head == "var1":
        if body.strip() == "default":
            return default_var1()
        kv = _parse_kv(body)
        if "file" not in kv:
            raise ValueError("var1 model needs file=A.csv (or var1:default)")
        coeff = np.loadtxt(kv["file"], delimiter=",", ndmin=2)
        sigma = (
            np.loadtxt(kv["sigma"], delimiter=",", ndmin=2) if "sigma" in kv else None
        )
        return VAR1(coeff=coeff, sigma=sigma)
    if head == "vma":
        kv = _parse_kv(body)  # file paths are ;-separated, commas split options
        files = kv.get("file", "")
        if not files:
            raise ValueError("vma model needs file=B0.csv;B1.csv;...")
        coeffs = tuple(
            np.loadtxt(f, delimiter=",", ndmin=2) for f in files.split(";") if f
        )
        sigma = (
            np.loadtxt(kv["sigma"], delimiter=",", ndmin=2) if "sigma" in kv else None
        )
        return VMA(coeffs=coeffs, sigma=sigma)
    if head == "tar":
        kv = _parse_kv(body)
        if "a" not in kv or "b" not in kv:
            raise ValueError("tar model needs a= and b=")
        return ThresholdAR1(
            a=float(kv["a"]), b=float(kv["b"]), sigma2=float(kv.get("sigma2", 1.0))
        )
    raise ValueError(f"unknown model {text!r}")
