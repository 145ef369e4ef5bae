"""Characteristic functions of coherent inputs and entangled resources.

Conventions used throughout the package: a phase-space point (x, p) maps
to the complex amplitude alpha = (x + i p)/sqrt(2); the characteristic
function is chi(alpha) = Tr[rho D(alpha)] with D(alpha) =
exp(alpha a+ - conj(alpha) a). The two-mode squeezer is
S12(zeta) = exp(-zeta a1+ a2+ + conj(zeta) a1 a2), zeta = r e^{i phi}.

Every resource family is a squeezer applied to a two-term core
superposition, so its chi is a sum of at most four displacement matrix
elements evaluated at Bogoliubov-transformed arguments.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

MAX_FOCK_ORDER = 64
# smallest squeezed-cat squared norm accepted before the state is
# treated as degenerate (cos d |00> + sin d |gg> with nearly zero norm)
NORM_SQ_FLOOR = 1e-12

FAMILIES = (
    "twin-beam",
    "squeezed-bell",
    "squeezed-cat",
    "buridan",
    "photon-subtracted",
)

SQRT2 = math.sqrt(2.0)


def _require_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PhasePoint:
    """A point (x, p) in single-mode phase space."""

    x: float
    p: float

    def __post_init__(self):
        _require_finite("phase-space point", self.x, self.p)

    @property
    def alpha(self):
        return complex(self.x, self.p) / SQRT2


@dataclass(frozen=True)
class TwoModePhasePoint:
    m1: PhasePoint
    m2: PhasePoint


@dataclass(frozen=True)
class CoherentInput:
    """Input coherent state |beta>."""

    beta: complex

    def __post_init__(self):
        _require_finite("coherent amplitude", self.beta)


@dataclass(frozen=True)
class ResourceSpec:
    """Tagged choice of entangled-resource family.

    Use the classmethod constructors; `family` selects the core
    superposition and which of the remaining fields are meaningful.
    gamma = gamma_mod * exp(i gamma_phase) is the cat amplitude.
    """

    family: str
    r: float
    phi: float
    delta: float = 0.0
    theta: float = 0.0
    gamma_mod: float = 0.0
    gamma_phase: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown resource family {self.family!r}")
        _require_finite("resource parameters", self.r, self.phi, self.delta,
                        self.theta, self.gamma_mod, self.gamma_phase)
        if self.r < 0:
            raise ParameterError(f"squeezing r must be >= 0, got {self.r}")
        if self.gamma_mod < 0:
            raise ParameterError(
                f"gamma_mod must be >= 0, got {self.gamma_mod}")
        if self.family == "squeezed-cat" and self.norm_sq < NORM_SQ_FLOOR:
            raise ParameterError(
                "squeezed-cat core superposition is degenerate "
                f"(squared norm {self.norm_sq:.3e})")

    @classmethod
    def twin_beam(cls, r, phi=math.pi):
        return cls("twin-beam", r, phi)

    @classmethod
    def squeezed_bell(cls, r, phi=math.pi, delta=0.0, theta=0.0):
        return cls("squeezed-bell", r, phi, delta, theta)

    @classmethod
    def squeezed_cat(cls, r, phi=math.pi, delta=0.0, theta=0.0,
                     gamma_mod=0.0, gamma_phase=0.0):
        return cls("squeezed-cat", r, phi, delta, theta,
                   gamma_mod, gamma_phase)

    @classmethod
    def buridan_donkey(cls, r, phi=math.pi, delta=0.0, theta=0.0):
        return cls("buridan", r, phi, delta, theta)

    @classmethod
    def photon_subtracted(cls, r, phi=math.pi):
        return cls("photon-subtracted", r, phi)

    @property
    def zeta(self):
        return self.r * cmath.exp(1j * self.phi)

    @property
    def gamma(self):
        return self.gamma_mod * cmath.exp(1j * self.gamma_phase)

    @property
    def norm_sq(self):
        """Squared norm of the un-normalized core superposition."""
        if self.family == "squeezed-cat":
            return 1.0 + (math.exp(-self.gamma_mod ** 2)
                          * math.sin(2 * self.delta) * math.cos(self.theta))
        return 1.0

    def resolve(self):
        """Map derived families onto their base representation.

        A photon-subtracted squeezed state is the squeezed Bell state
        with delta = arctan(tanh r) and theta = phi + pi.
        """
        if self.family == "photon-subtracted":
            theta = math.remainder(self.phi + math.pi, 2 * math.pi)
            return ResourceSpec("squeezed-bell", self.r, self.phi,
                                math.atan(math.tanh(self.r)), theta)
        return self


def laguerre(n, k, x):
    """Associated Laguerre polynomial L_n^(k)(x) by the three-term
    recurrence in the degree.

    :param n: degree, integer in [0, 64]
    :param k: superscript, integer >= -n
    :param x: real argument (scalar or array)
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ParameterError(f"laguerre degree must be an integer, got {n!r}")
    if not 0 <= n <= MAX_FOCK_ORDER:
        raise ParameterError(f"laguerre degree out of range: {n}")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ParameterError(f"laguerre superscript must be an integer, got {k!r}")
    if k < -n:
        raise ParameterError(f"laguerre superscript {k} below -n = {-n}")
    x = np.asarray(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for m in range(2, n + 1):
        prev, cur = cur, ((2 * m - 1 + k - x) * cur - (m - 1 + k) * prev) / m
    return cur if cur.ndim else float(cur)


def fock_displacement_element(m, n, alpha):
    """Matrix element <m| D(alpha) |n>.

    For m >= n this is sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2}
    L_n^(m-n)(|alpha|^2); the m < n case follows from
    <m|D(alpha)|n> = conj(<n|D(-alpha)|m>).
    """
    for label, idx in (("m", m), ("n", n)):
        if not isinstance(idx, (int, np.integer)) or isinstance(idx, bool):
            raise ParameterError(f"Fock index {label} must be an integer")
        if not 0 <= idx <= MAX_FOCK_ORDER:
            raise ParameterError(f"Fock index {label} out of range: {idx}")
    if m < n:
        return np.conj(fock_displacement_element(n, m, -np.asarray(alpha)))
    alpha = np.asarray(alpha, dtype=complex)
    a2 = (alpha * alpha.conj()).real
    ratio = math.sqrt(math.factorial(n) / math.factorial(m))
    val = ratio * alpha ** (m - n) * np.exp(-a2 / 2) * laguerre(n, m - n, a2)
    return val if val.ndim else complex(val)


def coherent_displacement_overlap(g1, xi, g2):
    """Overlap <g1| D(xi) |g2> of coherent states around a displacement.

    Follows from D(xi)|g2> = e^{(xi conj(g2) - conj(xi) g2)/2} |xi + g2>
    and the coherent-coherent overlap.
    """
    xi = np.asarray(xi, dtype=complex)
    val = np.exp((xi * np.conj(g2) - np.conj(xi) * g2) / 2
                 - abs(g1) ** 2 / 2
                 - (np.abs(xi + g2) ** 2) / 2
                 + np.conj(g1) * (xi + g2))
    return val if val.ndim else complex(val)


def bogoliubov_args(zeta, alpha1, alpha2):
    """Displacement arguments after conjugation by the squeezer.

    S+(zeta) D1(a1) D2(a2) S(zeta) = D1(xi1) D2(xi2) with
    xi_i = cosh(r) a_i + e^{i phi} sinh(r) conj(a_j), i != j.
    """
    r = abs(zeta)
    ph = cmath.phase(zeta) if r else 0.0
    ch, sh = math.cosh(r), math.sinh(r)
    phase = cmath.exp(1j * ph)
    xi1 = ch * np.asarray(alpha1, dtype=complex) + phase * sh * np.conj(alpha2)
    xi2 = ch * np.asarray(alpha2, dtype=complex) + phase * sh * np.conj(alpha1)
    return xi1, xi2


def _core_terms(spec):
    """Coefficients and kets of the un-squeezed core superposition.

    Returns (normalization, [(coeff, kind, k1, k2), ...]) with kind
    "fock" (k = photon number) or "coh" (k = coherent amplitude).
    """
    spec = spec.resolve()
    c, s = math.cos(spec.delta), math.sin(spec.delta)
    e_th = cmath.exp(1j * spec.theta)
    if spec.family == "twin-beam":
        return 1.0, [(1.0, "fock", 0, 0)]
    if spec.family == "squeezed-bell":
        return 1.0, [(c, "fock", 0, 0), (e_th * s, "fock", 1, 1)]
    if spec.family == "buridan":
        return 1.0, [(c, "fock", 0, 1), (e_th * s, "fock", 1, 0)]
    if spec.family == "squeezed-cat":
        g = spec.gamma
        return spec.norm_sq ** -0.5, [(c, "coh", 0.0, 0.0),
                                      (e_th * s, "coh", g, g)]
    raise ParameterError(f"unknown resource family {spec.family!r}")


def _mode_element(kind, bra, ket, xi):
    if kind == "fock":
        return fock_displacement_element(bra, ket, xi)
    return coherent_displacement_overlap(bra, xi, ket)


def _chi_resource_arrays(spec, alpha1, alpha2):
    """chi_res on arrays of complex two-mode arguments."""
    xi1, xi2 = bogoliubov_args(spec.zeta, alpha1, alpha2)
    norm, terms = _core_terms(spec)
    # every family's core terms share one ket kind
    kind = terms[0][1]
    total = 0.0
    for ci, _, a_i, b_i in terms:
        for cj, _, a_j, b_j in terms:
            total = total + (np.conj(ci) * cj
                             * _mode_element(kind, a_i, a_j, xi1)
                             * _mode_element(kind, b_i, b_j, xi2))
    return norm * norm * total


def _chi_input_arrays(beta, x, p):
    """Coherent-input chi on quadrature arrays."""
    return np.exp(-(x * x + p * p) / 4
                  + 1j * SQRT2 * (p * beta.real - x * beta.imag))


def chi_input_coherent(inp, pt):
    """Characteristic function of the input coherent state at pt."""
    val = _chi_input_arrays(inp.beta, np.asarray(pt.x, dtype=float),
                            np.asarray(pt.p, dtype=float))
    return complex(val)


def chi_resource(spec, pt):
    """Characteristic function of the entangled resource at a two-mode
    phase-space point."""
    val = _chi_resource_arrays(spec, np.asarray(pt.m1.alpha),
                               np.asarray(pt.m2.alpha))
    return complex(val)
