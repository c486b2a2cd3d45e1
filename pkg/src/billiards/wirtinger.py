"""Integral-identity pipeline reducing the billiard inequality to a
Wirtinger-type spectral gap.

Starting point is the pointwise integrand over the region below the
invariant curve (coordinates (psi, delta), measure already absorbed):

    inner(psi, delta) = cos^2 d sin^2 d (h'' h^2 + 3 h h'^2)(h + h'')
                        - sin^2 d  h h'^2 (h + h'')          (d := delta)

Integrating in delta up to d(psi) gives U(psi); with h = R sin d the
integrand splits as U = U1 + U2 + U3, symmetrizes under
psi -> psi + pi/2 into V1..V3, integrates by parts into W1..W3 (boundary
terms vanish by pi-periodicity), and collapses to

    P = (pi R^4 / 512) ((mu'')^2 - 4 (mu')^2),    mu := cos 2d,

so that  int_0^pi U = int_0^pi P,  with each intermediate integral
conserved step by step.  For pi-periodic mu the right side is the
Wirtinger gap: nonnegative, zero exactly when mu has only the constant
and first pi-harmonic, i.e. on the ellipse family.

Each intermediate integrand is implemented as its own fixed closed form
rather than re-derived from the previous stage; the point of this module
is to certify the chain numerically, which only means something if the
stages stay independent.  Quadratures run compensated (fsum) because the
integrals cancel between terms of magnitude R^4.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .billmap import LineCoord, forward_map, s_derivatives
from .errors import AliasingWarning, NoRealCaustic
from .profiles import validate_profile
from .supportfn import ProfileTable, SupportSpec, ellipse_support, eval_jet, \
    validate_table


# --- periodic grids ----------------------------------------------------------


@dataclass(frozen=True)
class PeriodicSamples:
    """Uniform samples of a periodic function; n a power of two, >= 64."""

    values: np.ndarray
    period: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        n = vals.shape[0]
        if n < 64 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size {n} must be a power of two >= 64")
        if self.period not in (math.pi, 2.0 * math.pi):
            raise ValueError(f"period must be pi or 2*pi, got {self.period}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n) * (self.period / self.n)


def periodic_quadrature(samples: PeriodicSamples) -> float:
    """Rectangle rule on the periodic grid (spectrally accurate); fsum."""
    return (samples.period / samples.n) * math.fsum(samples.values.tolist())


def spectral_derivative(samples: PeriodicSamples, order: int) -> PeriodicSamples:
    """Differentiate via the discrete Fourier transform.

    Exact for band-limited input below Nyquist; warns (AliasingWarning)
    when the top mode carries a > 1e-10 fraction of the non-constant
    energy.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    n = samples.n
    spectrum = np.fft.rfft(samples.values)
    energy = np.abs(spectrum[1:]) ** 2
    total = float(np.sum(energy))
    if total > 0.0 and float(energy[-1]) / total > 1e-10:
        warnings.warn(
            f"top-mode energy fraction {float(energy[-1]) / total:.3g} "
            "suggests the grid under-resolves the data", AliasingWarning)
    omega0 = 2.0 * math.pi / samples.period
    k = np.arange(n // 2 + 1)
    factor = (1j * omega0 * k) ** order
    if order % 2 == 1:
        factor[-1] = 0.0  # Nyquist mode has no well-defined odd derivative
    return PeriodicSamples(np.fft.irfft(spectrum * factor, n), samples.period)


# --- pointwise integrands ----------------------------------------------------


def integrand_inner(spec: SupportSpec, psi, delta):
    """Pointwise integrand on the phase region, before delta-integration."""
    xp = np if isinstance(psi, np.ndarray) or isinstance(delta, np.ndarray) else math
    h, dh, ddh = eval_jet(spec, psi)
    rho = h + ddh
    c = xp.cos(delta)
    s = xp.sin(delta)
    return (c * c * s * s * (ddh * h * h + 3.0 * h * dh * dh) * rho
            - s * s * h * dh * dh * rho)


def integrand_U(spec: SupportSpec, profile, psi):
    """U(psi): integrand_inner integrated in delta over [0, d(psi)].

    Closed form with weights (d/2 - sin 2d / 4) and (d/8 - sin 4d / 32).
    """
    xp = np if isinstance(psi, np.ndarray) else math
    h, dh, ddh = eval_jet(spec, psi)
    rho = h + ddh
    d = profile.jet(psi)[0]
    w_low = 0.5 * d - 0.25 * xp.sin(2.0 * d)
    w_high = 0.125 * d - xp.sin(4.0 * d) / 32.0
    return -h * dh * dh * rho * w_low + (ddh * h * h + 3.0 * h * dh * dh) * rho * w_high


def split_U(profile, R: float, psi):
    """The three-way split of U for a table in profile form (h = R sin d):

        U1 = h h'^2 (h + h'') sin 2d / 4
        U2 = -h (h + h'')(3 h'^2 + h h'') sin 4d / 32
        U3 = h (h + h'')(h h'' - h'^2) d / 8
    """
    xp = np if isinstance(psi, np.ndarray) else math
    d, dp, ddp = profile.jet(psi)
    sd = xp.sin(d)
    cd = xp.cos(d)
    h = R * sd
    dh = R * cd * dp
    ddh = R * (cd * ddp - sd * dp * dp)
    rho = h + ddh
    u1 = 0.25 * h * dh * dh * rho * xp.sin(2.0 * d)
    u2 = -h * rho * (3.0 * dh * dh + h * ddh) * xp.sin(4.0 * d) / 32.0
    u3 = 0.125 * h * rho * (h * ddh - dh * dh) * d
    return u1, u2, u3


# --- the reduction chain in d-only form ---------------------------------------
#
# q denotes (d')^2 below; every expression is the printed closed form.


def _u_parts_d(d, dp, ddp, R):
    q = dp * dp
    s = np.sin(d)
    c = np.cos(d)
    s2 = np.sin(2.0 * d)
    s4 = np.sin(4.0 * d)
    R4 = R**4
    u1 = (R4 / 8.0) * q * s2 * s2 * ((1.0 - q) * 0.5 * s2 + ddp * c * c)
    u2 = -(R4 / 32.0) * s4 * ((1.0 - q) * s * s + 0.5 * s2 * ddp) \
        * (q * (4.0 * c * c - 1.0) + 0.5 * s2 * ddp)
    u3 = (R4 / 16.0) * d * s * ((1.0 - q) * s + ddp * c) * (ddp * s2 - 2.0 * q)
    return u1, u2, u3


def _u_hat_parts_d(d, dp, ddp, R):
    q = dp * dp
    s = np.sin(d)
    c = np.cos(d)
    s2 = np.sin(2.0 * d)
    s4 = np.sin(4.0 * d)
    R4 = R**4
    u1 = (R4 / 8.0) * q * s2 * s2 * ((1.0 - q) * 0.5 * s2 - ddp * s * s)
    u2 = (R4 / 32.0) * s4 * ((1.0 - q) * c * c - 0.5 * s2 * ddp) \
        * (q * (4.0 * s * s - 1.0) - 0.5 * s2 * ddp)
    u3 = (R4 / 16.0) * (0.5 * math.pi - d) * c * ((1.0 - q) * c - ddp * s) \
        * (-ddp * s2 - 2.0 * q)
    return u1, u2, u3


def _v_parts_d(d, dp, ddp, R):
    q = dp * dp
    c = np.cos(d)
    s2 = np.sin(2.0 * d)
    c2 = np.cos(2.0 * d)
    s4 = np.sin(4.0 * d)
    R4 = R**4
    v1 = (R4 / 16.0) * q * s2 * s2 * ((1.0 - q) * s2 + ddp * c2)
    v2 = (R4 / 128.0) * s4 * (2.0 * q * (q - 1.0) * c2 - ddp * (1.0 + q) * s2)
    v3 = ((R4 / 32.0) * (math.pi * c * c - 2.0 * d * c2) * (q * q - q)
          + (math.pi * R4 / 128.0) * s2 * s2 * ddp * ddp
          + (R4 / 64.0) * s2 * (2.0 * d - math.pi * c * c) * ddp
          + (R4 / 128.0) * s2 * (math.pi * (3.0 + c2) - 12.0 * d) * q * ddp)
    return v1, v2, v3


def _w_parts_d(d, dp, ddp, R):
    q = dp * dp
    s2 = np.sin(2.0 * d)
    c2 = np.cos(2.0 * d)
    c4 = np.cos(4.0 * d)
    R4 = R**4
    w1 = (R4 / 16.0) * (s2**3 * q
                        - (4.0 * c2 * c2 * s2 + s2**3) * (q * q / 3.0))
    w2 = (R4 / 32.0) * s2 * c4 * q + (R4 / 96.0) * s2 * (2.0 + 3.0 * c4) * q * q
    w3 = ((math.pi * R4 / 128.0) * s2 * s2 * ddp * ddp
          - (R4 / 32.0) * s2 * (1.0 + math.pi * s2) * q
          - (R4 / 192.0) * (math.pi * c4 - 3.0 * (math.pi + 2.0 * s2)) * q * q)
    return w1, w2, w3


def _w_combined_d(d, dp, ddp, R):
    q = dp * dp
    s2 = np.sin(2.0 * d)
    c4 = np.cos(4.0 * d)
    R4 = R**4
    return (-(math.pi * R4 / 32.0) * s2 * s2 * q
            + (math.pi * R4 / 192.0) * (3.0 - c4) * q * q
            + (math.pi * R4 / 128.0) * s2 * s2 * ddp * ddp)


def mu_jet(profile, psi):
    """mu = cos 2d and its chain-rule derivatives at psi."""
    xp = np if isinstance(psi, np.ndarray) else math
    d, dp, ddp = profile.jet(psi)
    s2 = xp.sin(2.0 * d)
    mu = xp.cos(2.0 * d)
    dmu = -2.0 * s2 * dp
    ddmu = -4.0 * mu * dp * dp - 2.0 * s2 * ddp
    return mu, dmu, ddmu


def integrand_P(profile, R: float, psi):
    """P = (pi R^4 / 512)((mu'')^2 - 4 (mu')^2)."""
    _, dmu, ddmu = mu_jet(profile, psi)
    return (math.pi * R**4 / 512.0) * (ddmu * ddmu - 4.0 * dmu * dmu)


@dataclass(frozen=True)
class MuFunction:
    """mu = cos 2d on a period-pi grid with analytic derivatives."""

    psi: np.ndarray
    mu: np.ndarray
    dmu: np.ndarray
    ddmu: np.ndarray

    @classmethod
    def from_profile(cls, profile, n: int) -> "MuFunction":
        validate_profile(profile)  # 0 < d < pi/2 is what keeps |mu| < 1
        psi = np.arange(n) * (math.pi / n)
        mu, dmu, ddmu = mu_jet(profile, psi)
        return cls(psi=psi, mu=mu, dmu=dmu, ddmu=ddmu)


def spectral_gap(profile, R: float, n: int) -> float:
    """The P-integral from the Fourier coefficients of mu.

    With mu = sum a_k cos 2k psi + b_k sin 2k psi on period pi, the gap is
    (pi R^4/512) * (pi/2) * sum ((2k)^4 - 4 (2k)^2)(a_k^2 + b_k^2).
    """
    mu = MuFunction.from_profile(profile, n).mu
    spectrum = np.fft.rfft(mu) / n
    total = 0.0
    for k in range(1, n // 2 + 1):
        if k < n // 2:
            amp2 = 4.0 * (spectrum[k].real**2 + spectrum[k].imag**2)
        else:
            amp2 = spectrum[k].real**2  # Nyquist carries no factor 2
        freq2 = (2.0 * k) ** 2
        total += (freq2 * freq2 - 4.0 * freq2) * amp2
    return (math.pi * R**4 / 512.0) * (math.pi / 2.0) * total


# --- the full chain ------------------------------------------------------------


@dataclass(frozen=True)
class IntegralReport:
    """Quadrature values along the reduction chain and their residuals."""

    n: int
    R: float
    I_U_direct: float
    I_U1: float
    I_U2: float
    I_U3: float
    I_U_parts: float
    I_V1: float
    I_V2: float
    I_V3: float
    I_W1: float
    I_W2: float
    I_W3: float
    I_W: float
    I_P: float
    wirtinger_gap: float
    gap_spectral: float
    residual_UP: float
    residual_UW: float
    stepwise_UV: tuple
    stepwise_VW: tuple
    conv_delta_U: float
    conv_delta_P: float
    mu_max: float
    identity_ok: bool
    stepwise_ok: bool

    def to_dict(self) -> dict:
        data = asdict(self)
        data["stepwise_UV"] = list(self.stepwise_UV)
        data["stepwise_VW"] = list(self.stepwise_VW)
        return data


def _quad_pi(values: np.ndarray) -> float:
    n = values.shape[0]
    return (math.pi / n) * math.fsum(values.tolist())


def reduction_chain(profile, R: float, n: int = 1024, *,
                    require_convex: bool = True,
                    identity_tol: float = 1e-6,
                    stepwise_tol: float = 1e-8) -> IntegralReport:
    """Run the whole chain U -> (U1,U2,U3) -> V -> W -> P by spectral
    quadrature over [0, pi] and report every integral and residual.

    The chain is an identity for any smooth admissible profile; the table
    itself must additionally be convex to mean anything dynamically, so
    rho > 0 is enforced unless require_convex is False (diagnostics on
    non-convex profiles).
    """
    R = float(R)
    if n < 64 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size {n} must be a power of two >= 64")
    validate_profile(profile)
    table = ProfileTable(profile, R)
    if require_convex:
        validate_table(table)

    psi = np.arange(n) * (math.pi / n)
    d, dp, ddp = profile.jet(psi)

    u_direct = integrand_U(table, profile, psi)
    u1, u2, u3 = _u_parts_d(d, dp, ddp, R)
    v1, v2, v3 = _v_parts_d(d, dp, ddp, R)
    w1, w2, w3 = _w_parts_d(d, dp, ddp, R)
    p_vals = integrand_P(profile, R, psi)

    I_U_direct = _quad_pi(u_direct)
    I_U = tuple(_quad_pi(u) for u in (u1, u2, u3))
    I_V = tuple(_quad_pi(v) for v in (v1, v2, v3))
    I_W = tuple(_quad_pi(w) for w in (w1, w2, w3))
    I_W_combined = _quad_pi(_w_combined_d(d, dp, ddp, R))
    I_P = _quad_pi(p_vals)

    # grid halving reuses every other sample (same chain at n/2)
    I_U_half = _quad_pi(u_direct[::2])
    I_P_half = _quad_pi(p_vals[::2])

    mu_max = float(np.max(np.abs(np.cos(2.0 * d))))
    gap_fft = spectral_gap(profile, R, n)

    integrals = (I_U_direct, *I_U, *I_V, *I_W, I_W_combined, I_P)
    if not all(math.isfinite(v) for v in integrals):
        raise ValueError("non-finite integral in the reduction chain")

    residual_UP = abs(I_U_direct - I_P)
    residual_UW = abs(I_U_direct - I_W_combined)
    stepwise_UV = tuple(abs(a - b) for a, b in zip(I_U, I_V))
    stepwise_VW = tuple(abs(a - b) for a, b in zip(I_V, I_W))
    scale = R**4
    identity_ok = residual_UP <= identity_tol * (1.0 + abs(I_U_direct))
    stepwise_ok = all(r <= stepwise_tol * max(1.0, scale)
                      for r in stepwise_UV + stepwise_VW)

    return IntegralReport(
        n=n, R=R,
        I_U_direct=I_U_direct,
        I_U1=I_U[0], I_U2=I_U[1], I_U3=I_U[2],
        I_U_parts=math.fsum(I_U),
        I_V1=I_V[0], I_V2=I_V[1], I_V3=I_V[2],
        I_W1=I_W[0], I_W2=I_W[1], I_W3=I_W[2],
        I_W=I_W_combined, I_P=I_P,
        wirtinger_gap=I_P, gap_spectral=gap_fft,
        residual_UP=residual_UP, residual_UW=residual_UW,
        stepwise_UV=stepwise_UV, stepwise_VW=stepwise_VW,
        conv_delta_U=abs(I_U_direct - I_U_half),
        conv_delta_P=abs(I_P - I_P_half),
        mu_max=mu_max, identity_ok=identity_ok, stepwise_ok=stepwise_ok)


# --- pointwise equality case on ellipses ---------------------------------------


class HopfDefect(NamedTuple):
    defect: float        # residual of the weighted slope identity
    amgm_defect: float   # p^2 nu1 + p1^2/nu1 - 2 p p1
    nu1: float
    p_ratio: float       # p1 / p
    lam: float           # confocal caustic parameter


def hopf_identity_ellipse(a: float, b: float, line: LineCoord) -> HopfDefect:
    """Evaluate the weighted slope identity on a confocal-caustic line.

    The slope field comes from the invariant graph p = h_lam(phi):
    omega = (b^2 - a^2) sin 2phi / (2p).  On the ellipse both defects
    vanish: the AM-GM equality pins nu1 = p1/p.
    """
    a, b = float(a), float(b)
    spec = ellipse_support(a, b)
    p, phi = float(line.p), float(line.phi)
    lam = a * a * math.cos(phi) ** 2 + b * b * math.sin(phi) ** 2 - p * p
    if not (0.0 < lam < b * b):
        raise NoRealCaustic(
            f"lambda = {lam:.6g} outside (0, {b * b:.6g}): line crosses "
            "between the foci or exits the monotone region")
    image = forward_map(spec, LineCoord(p, phi))
    p1, phi1 = image.p, image.phi
    sd = s_derivatives(spec, phi, phi1)
    omega = (b * b - a * a) * math.sin(2.0 * phi) / (2.0 * p)
    omega1 = (b * b - a * a) * math.sin(2.0 * phi1) / (2.0 * p1)
    nu1 = (-sd.s11 - omega) / sd.s12
    lhs = p1 * p1 * omega1 - p * p * omega
    rhs = p * p * sd.s11 + p1 * p1 * sd.s22 \
        + sd.s12 * (p * p * nu1 + p1 * p1 / nu1)
    amgm = p * p * nu1 + p1 * p1 / nu1 - 2.0 * p * p1
    return HopfDefect(defect=lhs - rhs, amgm_defect=amgm, nu1=nu1,
                      p_ratio=p1 / p, lam=lam)


def equality_reconstruct(A: float, R: float) -> tuple[float, float]:
    """Semi-axes of the table whose profile satisfies cos 2d = A cos 2psi.

    h^2 = R^2 (1 - A)/2 cos^2 psi + R^2 (1 + A)/2 sin^2 psi, so the axes
    are (R sqrt((1-A)/2), R sqrt((1+A)/2)) along the x/y directions; A = 0
    gives a circle.  A = 1 is excluded since d may not vanish.  The phase
    of the profile is assumed zero; a rotated table corresponds to a
    nonzero phase and is not reconstructed here.
    """
    A, R = float(A), float(R)
    if not (0.0 <= A < 1.0):
        raise ValueError(f"A = {A} outside [0, 1)")
    if not R > 0.0:
        raise ValueError(f"R = {R} must be positive")
    return R * math.sqrt((1.0 - A) / 2.0), R * math.sqrt((1.0 + A) / 2.0)
