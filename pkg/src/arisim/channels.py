"""Channel generation: path loss laws, Ricean/Rayleigh fading, LoS steering,
self-interference matrices, and seeded substream management.

Conventions
-----------
Channels are stored untransposed: ``h[k]`` is the length-M BS-to-user vector,
``f[k]`` the length-N RIS-to-user vector, and ``G`` the N x M BS-to-RIS matrix.
All conjugate transposes are applied at evaluation time (see
:mod:`arisim.system`), never at generation time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .units import db2lin


class PathLossKind(enum.Enum):
    STRONG_3GPP = "strong_3gpp"
    WEAK_3GPP = "weak_3gpp"
    REFERENCE_EXPONENT = "reference_exponent"


@dataclass(frozen=True)
class PathLossModel:
    """Large-scale fading law.

    ``l0`` (linear gain at 1 m) and ``exponent`` are only meaningful for the
    ``REFERENCE_EXPONENT`` kind; the 3GPP kinds are fully parameterized by
    their dB-domain coefficients.
    """

    kind: PathLossKind
    l0: float = 1e-3
    exponent: float = 2.0

    @classmethod
    def strong_3gpp(cls) -> "PathLossModel":
        return cls(PathLossKind.STRONG_3GPP)

    @classmethod
    def weak_3gpp(cls) -> "PathLossModel":
        return cls(PathLossKind.WEAK_3GPP)

    @classmethod
    def reference(cls, l0: float, exponent: float) -> "PathLossModel":
        return cls(PathLossKind.REFERENCE_EXPONENT, l0=l0, exponent=exponent)


def path_loss_db(model: PathLossModel, d) -> float:
    """Path loss in dB at distance ``d`` meters.

    The 3GPP laws are ``37.3 + 22.0 log10(d)`` (strong link) and
    ``41.2 + 28.7 log10(d)`` (weak link), valid for d >= 1 m.  The
    reference-exponent law yields a linear gain ``l0 * d**(-exponent)``,
    i.e. a loss of ``-10 log10(l0) + 10 exponent log10(d)`` dB.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be positive")
    if model.kind is PathLossKind.STRONG_3GPP:
        if np.any(d < 1.0):
            raise ValueError("3GPP path loss laws require d >= 1 m")
        out = 37.3 + 22.0 * np.log10(d)
    elif model.kind is PathLossKind.WEAK_3GPP:
        if np.any(d < 1.0):
            raise ValueError("3GPP path loss laws require d >= 1 m")
        out = 41.2 + 28.7 * np.log10(d)
    else:
        out = -10.0 * np.log10(model.l0) + 10.0 * model.exponent * np.log10(d)
    return float(out) if np.isscalar(d) or d.ndim == 0 else out


def path_loss_linear(model: PathLossModel, d) -> float:
    """Linear power gain (<= 1 in sane configurations) at distance ``d``."""
    return db2lin(-path_loss_db(model, d))


@dataclass(frozen=True)
class Geometry:
    """2-D positions of BS, RIS and users (meters).  ``users`` is (K, 2)."""

    bs: np.ndarray
    ris: np.ndarray
    users: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bs", np.asarray(self.bs, dtype=float))
        object.__setattr__(self, "ris", np.asarray(self.ris, dtype=float))
        object.__setattr__(self, "users", np.atleast_2d(np.asarray(self.users, dtype=float)))
        pts = np.vstack([self.bs, self.ris, self.users])
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if np.any(dist <= 0.0):
            raise ValueError("all pairwise distances must be strictly positive")

    @property
    def k(self) -> int:
        return self.users.shape[0]

    def dist_bs_ris(self) -> float:
        return float(np.linalg.norm(self.ris - self.bs))

    def dist_bs_user(self, k: int) -> float:
        return float(np.linalg.norm(self.users[k] - self.bs))

    def dist_ris_user(self, k: int) -> float:
        return float(np.linalg.norm(self.users[k] - self.ris))


class Link(enum.Enum):
    BS_RIS = "bs_ris"
    RIS_USER = "ris_user"
    BS_USER = "bs_user"


def _steering(length: int, sin_angle: float) -> np.ndarray:
    # uniform linear array, half-wavelength spacing: phase step pi*sin(angle)
    return np.exp(1j * np.pi * np.arange(length) * sin_angle)


def los_component(geometry: Geometry, link: Link, m: int, n: int,
                  user: int | None = None, wavelength: float = 0.06) -> np.ndarray:
    """Deterministic unit-modulus LoS component for one link.

    Both arrays are modeled as half-wavelength ULAs aligned with the global
    x-axis; the steering phase of a link is set by the x-component of its unit
    direction vector (zero for broadside links).  With half-wavelength spacing
    the phases are independent of ``wavelength``; the argument is kept for
    interface completeness.

    Returns an (n, m) rank-one matrix for ``BS_RIS``, a length-n vector for
    ``RIS_USER`` and a length-m vector for ``BS_USER``.
    """
    del wavelength
    if link is Link.BS_RIS:
        u = geometry.ris - geometry.bs
        ux = u[0] / np.linalg.norm(u)
        return np.outer(_steering(n, ux), _steering(m, ux).conj())
    if user is None:
        raise ValueError("user index required for user links")
    if link is Link.RIS_USER:
        u = geometry.users[user] - geometry.ris
        return _steering(n, u[0] / np.linalg.norm(u))
    u = geometry.users[user] - geometry.bs
    return _steering(m, u[0] / np.linalg.norm(u))


def ricean_channel(rng: np.random.Generator, rows: int, cols: int,
                   pl_linear: float, kappa: float, los: np.ndarray) -> np.ndarray:
    """Draw one Ricean-fading channel matrix.

    H = sqrt(pl) * ( sqrt(kappa/(kappa+1)) H_los + sqrt(1/(kappa+1)) H_nlos )
    with H_nlos i.i.d. CN(0, 1).  ``kappa=np.inf`` gives the pure LoS limit.
    """
    if kappa < 0:
        raise ValueError("Ricean factor must be nonnegative")
    los = np.asarray(los, dtype=complex).reshape(rows, cols)
    if np.isinf(kappa):
        return np.sqrt(pl_linear) * los
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    mix = np.sqrt(kappa / (kappa + 1.0)) * los + np.sqrt(1.0 / (kappa + 1.0)) * nlos
    return np.sqrt(pl_linear) * mix


def rayleigh_vector(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    """i.i.d. CN(0, variance) vector of length n."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return np.sqrt(variance) * z


def self_interference_matrix(rng: np.random.Generator, n: int, delta: float) -> np.ndarray:
    """N x N matrix with i.i.d. CN(0, delta**2) entries."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    return delta * z


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all links.  ``H`` is the optional RIS
    self-interference matrix (absent or zero when the SI amplitude is 0)."""

    G: np.ndarray          # (N, M) BS -> RIS
    h: np.ndarray          # (K, M) BS -> user k (row k)
    f: np.ndarray          # (K, N) RIS -> user k (row k)
    H: np.ndarray | None = None   # (N, N) RIS self-interference

    def __post_init__(self):
        n, m = self.G.shape
        if self.h.shape[1] != m or self.f.shape[1] != n or self.h.shape[0] != self.f.shape[0]:
            raise ValueError("inconsistent channel dimensions")
        if self.H is not None and self.H.shape != (n, n):
            raise ValueError("self-interference matrix must be N x N")

    @property
    def n(self) -> int:
        return self.G.shape[0]

    @property
    def m(self) -> int:
        return self.G.shape[1]

    @property
    def k(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class PathLossAssignment:
    """Which large-scale law applies to each link class."""

    bs_user: PathLossModel
    bs_ris: PathLossModel
    ris_user: PathLossModel


def draw_channels(rng: np.random.Generator, geometry: Geometry,
                  losses: PathLossAssignment, kappa: float, m: int, n: int,
                  si_delta: float = 0.0) -> ChannelSet:
    """Draw a full ChannelSet for the given geometry.

    Draw order is fixed (G, then h_k for each user, then f_k for each user,
    then the SI matrix if ``si_delta > 0``) so that identical streams give
    bit-identical realizations.
    """
    k = geometry.k
    pl_g = path_loss_linear(losses.bs_ris, geometry.dist_bs_ris())
    G = ricean_channel(rng, n, m, pl_g, kappa, los_component(geometry, Link.BS_RIS, m, n))
    h = np.empty((k, m), dtype=complex)
    for i in range(k):
        pl = path_loss_linear(losses.bs_user, geometry.dist_bs_user(i))
        los = los_component(geometry, Link.BS_USER, m, n, user=i)
        h[i] = ricean_channel(rng, m, 1, pl, kappa, los[:, None])[:, 0]
    f = np.empty((k, n), dtype=complex)
    for i in range(k):
        pl = path_loss_linear(losses.ris_user, geometry.dist_ris_user(i))
        los = los_component(geometry, Link.RIS_USER, m, n, user=i)
        f[i] = ricean_channel(rng, n, 1, pl, kappa, los[:, None])[:, 0]
    H = self_interference_matrix(rng, n, si_delta) if si_delta > 0.0 else None
    return ChannelSet(G=G, h=h, f=f, H=H)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent random stream for a (trial, sweep-point, role) key.

    Streams are derived from ``SeedSequence([seed, *key])``, so any worker can
    reproduce any trial's stream from the master seed and the integer key
    alone, independent of execution order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(x) for x in key]]))
