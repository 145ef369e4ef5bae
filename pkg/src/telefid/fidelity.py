"""Teleportation fidelities: closed forms, quadrature overlap, Gaussian
alphabet averages, and the classical benchmark.

The closed forms hold at the protocol-optimal phases phi = pi, theta = 0
with real cat amplitude; fidelity_closed rejects anything else so that
callers fall back to the universal quadrature overlap.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError, PhaseSpecializationError
from .phase_space import (CoherentInput, ResourceSpec, _chi_input_arrays,
                          _require_finite)
from .protocol import _chi_out_arrays, gamma_cov, gaussian_pipeline
from .quadrature import box_halfwidth, integrate_adaptive

GH_ORDER = 60
# |angle mod 2pi| below this counts as the specialized phase
PHASE_TOL = 1e-12


@dataclass(frozen=True)
class AlphabetPrior:
    """Gaussian prior p(beta) = exp(-|beta|^2 / sigma) / (pi sigma)."""

    sigma: float

    def __post_init__(self):
        _require_finite("prior variance", self.sigma)
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class FidelityReport:
    """A fidelity value plus the parameter point it belongs to."""

    value: float
    method: str
    spec: object
    noise: object
    gain: object
    beta: complex | None = None
    sigma: float | None = None


@lru_cache(maxsize=1)
def _gh_nodes():
    """Gauss-Hermite nodes with weights normalized to sum exactly 1,
    so averaging a constant is exact."""
    t, w = np.polynomial.hermite.hermgauss(GH_ORDER)
    return t, w / w.sum()


def _delta_scale(r, gt, tau, gam):
    """The common denominator scale Delta of all closed forms."""
    ep = np.exp(tau / 2)
    return (np.exp(-2 * r - tau) * (1 + ep * gt) ** 2
            + np.exp(2 * r - tau) * (1 - ep * gt) ** 2
            + 2 * (1 + gt * gt + 2 * gam))


def _ab_plus_minus(r, gt, tau):
    ep = np.exp(tau / 2)
    lo = (1 + ep * gt) ** 2
    hi = np.exp(4 * r) * (1 - ep * gt) ** 2
    return lo + hi, lo - hi


def _f_twb(r, gt, tau, gam, beta):
    D = _delta_scale(r, gt, tau, gam)
    u = (gt - 1) ** 2 * np.abs(beta) ** 2
    return 4 / D * np.exp(-4 * u / D)


def _f_sb(r, delta, gt, tau, gam, beta):
    D = _delta_scale(r, gt, tau, gam)
    u = (gt - 1) ** 2 * np.abs(beta) ** 2
    ap, am = _ab_plus_minus(r, gt, tau)
    s, c = np.sin(delta), np.cos(delta)
    brace = (1
             + 2 * np.exp(-4 * r - 2 * tau) / D ** 4 * am ** 2
             * (D * D - 8 * D * u + 8 * u * u) * s * s
             + 2 * np.exp(-2 * r - tau) / D ** 2
             * (4 * u - D) * s * (-c * am + s * ap))
    return 4 / D * np.exp(-4 * u / D) * brace


def _f_sc(r, delta, gamma, gt, tau, gam, beta):
    """Squeezed-cat closed form (real gamma, can be signed).

    The three exponent factors carry e^{r}(gt - e^{-tau/2}) gamma,
    e^{-r}(gt + e^{-tau/2}) gamma and e^{r} gamma (gt - e^{-tau/2});
    they follow from the Gaussian overlap integral with Bogoliubov
    coefficients k1 = cosh(r) gt - sinh(r) e^{-tau/2} and
    k2 = cosh(r) e^{-tau/2} - sinh(r) gt.
    """
    D = _delta_scale(r, gt, tau, gam)
    s, c = np.sin(delta), np.cos(delta)
    eps = np.exp(-tau / 2)
    u = np.exp(r) * (gt - eps) * gamma
    v = np.exp(-r) * (gt + eps) * gamma
    g2 = gamma * gamma
    beta = np.asarray(beta, dtype=complex)
    t1 = c * c * np.exp(-4 * (gt - 1) ** 2 * np.abs(beta) ** 2 / D)
    e_re = np.exp(-g2 - ((gt - 1) * 2 * beta.real - u) ** 2 / D)
    e_im = np.exp((2j * (gt - 1) * beta.imag + v) ** 2 / D)
    t2 = s * c * 2 * (e_re * e_im).real
    t3 = s * s * np.exp(
        -4 * np.abs((gt - 1) * beta - np.exp(r) * gamma * (gt - eps)) ** 2 / D)
    norm = 1 + np.exp(-g2) * np.sin(2 * delta)
    return 4 / (D * norm) * (t1 + t2 + t3)


def _f_sb2(r, delta, gt, tau, gam, beta):
    D = _delta_scale(r, gt, tau, gam)
    u = (gt - 1) ** 2 * np.abs(beta) ** 2
    ap, am = _ab_plus_minus(r, gt, tau)
    beta = np.asarray(beta, dtype=complex)
    b_sq = 2 * (beta * beta).real
    brace = (1 + np.exp(-2 * r - tau) / D ** 2
             * (ap * (4 * u - D)
                + 2 * np.cos(2 * delta) * np.exp(2 * r)
                * (np.exp(tau) * gt * gt - 1) * (D - 4 * u)
                - 2 * np.sin(2 * delta) * (gt - 1) ** 2 * b_sq * am))
    return 4 / D * np.exp(-4 * u / D) * brace


def _is_multiple(angle, period):
    return abs(math.remainder(angle, period)) <= PHASE_TOL


def _specialized_params(spec):
    """Validate the phase specialization and return (family, r, delta,
    signed real gamma) of the resolved spec."""
    base = spec.resolve()
    if not _is_multiple(base.phi - math.pi, 2 * math.pi):
        raise PhaseSpecializationError(
            f"closed forms need phi = pi, got {base.phi}; use quadrature")
    if base.family != "twin-beam" and not _is_multiple(base.theta,
                                                       2 * math.pi):
        raise PhaseSpecializationError(
            f"closed forms need theta = 0, got {base.theta}; use quadrature")
    gamma = 0.0
    if base.family == "squeezed-cat" and base.gamma_mod > 0:
        if _is_multiple(base.gamma_phase, 2 * math.pi):
            gamma = base.gamma_mod
        elif _is_multiple(base.gamma_phase - math.pi, 2 * math.pi):
            gamma = -base.gamma_mod
        else:
            raise PhaseSpecializationError(
                f"closed forms need real gamma, got phase "
                f"{base.gamma_phase}; use quadrature")
    return base.family, base.r, base.delta, gamma


def _closed_value(spec, noise, gain, beta):
    """Dispatch to the family kernel; beta may be an array."""
    family, r, delta, gamma = _specialized_params(spec)
    gt = gain.effective(noise)
    gam = gamma_cov(noise, gain)
    tau = noise.tau
    if family == "twin-beam":
        return _f_twb(r, gt, tau, gam, beta)
    if family == "squeezed-bell":
        return _f_sb(r, delta, gt, tau, gam, beta)
    if family == "squeezed-cat":
        return _f_sc(r, delta, gamma, gt, tau, gam, beta)
    if family == "buridan":
        return _f_sb2(r, delta, gt, tau, gam, beta)
    raise ParameterError(f"unknown resource family {family!r}")


def fidelity_closed(spec, noise, gain, beta=0j):
    """Closed-form fidelity at the specialized phases.

    Internally g~ = g T and the scale
    Delta = e^{-2r-tau}(1 + e^{tau/2} g~)^2
          + e^{2r-tau}(1 - e^{tau/2} g~)^2 + 2(1 + g~^2 + 2 Gamma)
    set the overall 4/Delta prefactor and every exponent.
    """
    val = float(_closed_value(spec, noise, gain, complex(beta)))
    return FidelityReport(val, "closed", spec, noise, gain,
                          beta=complex(beta))


def fidelity_quadrature(inp, spec, noise, gain):
    """Overlap fidelity (1/2pi) int chi_in(x,p) chi_out(-x,-p) dx dp by
    adaptive quadrature. Universal: any phases, any family."""
    gt = gain.effective(noise)
    gam = gamma_cov(noise, gain)

    def integrand(x, p):
        return (_chi_input_arrays(inp.beta, x, p)
                * _chi_out_arrays(inp, spec, noise, gain, -x, -p))

    L = box_halfwidth(0.25 + gam / 2 + gt * gt / 4)
    val = integrate_adaptive(integrand, L) / (2 * math.pi)
    return FidelityReport(float(val.real), "quadrature", spec, noise, gain,
                          beta=inp.beta)


def average_fidelity(spec, noise, gain, prior):
    """Fidelity averaged over the Gaussian alphabet prior.

    Gauss-Hermite tensor rule of order GH_ORDER in (Re beta, Im beta),
    scaled by sqrt(sigma). Falls back to quadrature fidelities when the
    closed forms do not apply.
    """
    t, w = _gh_nodes()
    scale = math.sqrt(prior.sigma)
    betas = scale * (t[:, None] + 1j * t[None, :])
    weights = np.outer(w, w)
    try:
        vals = _closed_value(spec, noise, gain, betas)
        method = "closed"
    except PhaseSpecializationError:
        vals = np.array([[fidelity_quadrature(CoherentInput(b), spec, noise,
                                              gain).value
                          for b in row] for row in betas])
        method = "quadrature"
    avg = float(np.sum(weights * vals))
    return FidelityReport(avg, method, spec, noise, gain, sigma=prior.sigma)


def fidelity_gaussian_oracle(inp, r, noise, gain):
    """Fidelity from the covariance-algebra pipeline (twin-beam only)."""
    out = gaussian_pipeline(inp, r, noise, gain)
    spec = ResourceSpec.twin_beam(r)
    return FidelityReport(out.fidelity(inp), "gaussian-oracle", spec, noise,
                          gain, beta=inp.beta)


def classical_benchmark(prior):
    """Best classical fidelity for the Gaussian alphabet:
    (sigma + 1)/(2 sigma + 1)."""
    return (prior.sigma + 1.0) / (2.0 * prior.sigma + 1.0)
