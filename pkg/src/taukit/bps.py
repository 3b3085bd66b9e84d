"""Uncoupled BPS structures and their tau functions.

A structure of half-rank d lives on a rank-2d lattice with basis pairing
<gamma_i, gamma_{i+d}> = c_i and active charges confined to the span of the
first d basis vectors.  The solution components are

    x_i = -z_i/eps + y_i,
    y_{i+d} = -(2 pi i omega_{i,i+d})^{-1} sum_k Omega(k) k_i log Lambda(w_k),

with w_k = Z(k)/(2 pi i eps), and the log-tau gradient is
-omega_{i,i+d} * d y_{i+d} / d eps in the first d slots and zero in the rest.
All derivatives here are analytic (chain rule through dlog Lambda); finite
differences appear only in tests.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import specfun
from .errors import (
    BranchCutError,
    DegenerateCharge,
    PathThroughDegenerateLocus,
)
from .forms import (
    ChartPoint,
    OneFormField,
    Polyline,
    PotentialChoice,
    TauReport,
    d_residual,
    integrate_one_form,
    shift_by_potential_change,
)

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class UncoupledBpsStructure:
    """Half-rank, pairing integers c_i, and the finite symmetric support."""

    half_rank: int
    pairing: tuple[int, ...]
    support: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        d = self.half_rank
        if d < 1:
            raise ValueError("half_rank must be >= 1")
        pairing = tuple(int(c) for c in self.pairing)
        if len(pairing) != d or any(c == 0 for c in pairing):
            raise ValueError("pairing must hold d nonzero integers")
        support = tuple(
            (tuple(int(v) for v in k), int(om)) for k, om in self.support
        )
        seen = {}
        for k, om in support:
            if len(k) != d:
                raise ValueError("support vectors must have length d")
            if all(v == 0 for v in k):
                raise ValueError("support must not contain the zero charge")
            if k in seen:
                raise ValueError(f"duplicate support charge {k}")
            seen[k] = om
        for k, om in support:
            neg = tuple(-v for v in k)
            if seen.get(neg) != om:
                raise ValueError(
                    f"support not symmetric: {k} has Omega={om} but {neg} is missing or differs"
                )
        object.__setattr__(self, "pairing", pairing)
        object.__setattr__(self, "support", support)

    @property
    def rank(self) -> int:
        return 2 * self.half_rank

    def omega_skew(self) -> np.ndarray:
        """omega_{i,i+d} = -1/(2 pi i c_i), so omega_{i,i+d}*eta_{i,i+d} = -1."""
        return np.array([-1.0 / (TWO_PI_I * c) for c in self.pairing])

    def charge_matrix(self) -> np.ndarray:
        if not self.support:
            return np.zeros((0, self.half_rank))
        return np.array([k for k, _ in self.support], dtype=float)

    def omega_values(self) -> np.ndarray:
        return np.array([om for _, om in self.support], dtype=float)

    def to_dict(self) -> dict:
        return {
            "d": self.half_rank,
            "pairing": list(self.pairing),
            "support": [{"k": list(k), "omega": om} for k, om in self.support],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "UncoupledBpsStructure":
        return cls(
            half_rank=int(payload["d"]),
            pairing=tuple(payload["pairing"]),
            support=tuple((tuple(item["k"]), item["omega"]) for item in payload["support"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "UncoupledBpsStructure":
        return cls.from_dict(json.loads(text))


def load_fixture(name: str) -> UncoupledBpsStructure:
    """Load one of the shipped structures (e.g. 'bps_d1_minimal')."""
    text = resources.files("taukit.fixtures").joinpath(f"{name}.json").read_text()
    return UncoupledBpsStructure.from_json(text)


@dataclass(frozen=True)
class CentralChargePoint:
    """Central charge coordinates z (length 2d) and the twistor parameter eps."""

    z: tuple[complex, ...]
    epsilon: complex

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(complex(v) for v in self.z))
        if self.epsilon == 0:
            raise ValueError("epsilon must be nonzero")
        object.__setattr__(self, "epsilon", complex(self.epsilon))

    def first_block(self, d: int) -> np.ndarray:
        return np.asarray(self.z[:d], dtype=complex)


def lambda_arguments(
    bps: UncoupledBpsStructure,
    pt: CentralChargePoint,
    margin: float = 1e-8,
) -> np.ndarray:
    """w_k = Z(k)/(2 pi i eps) for every support charge, with validity checks."""
    if len(pt.z) != bps.rank:
        raise ValueError(f"expected {bps.rank} coordinates, got {len(pt.z)}")
    charges = bps.charge_matrix()
    zz = pt.first_block(bps.half_rank)
    central = charges @ zz
    scale = max(1.0, float(np.max(np.abs(zz))))
    for k_row, value in zip(bps.support, central):
        if abs(value) <= 1e-13 * scale:
            raise DegenerateCharge(f"Z({k_row[0]}) vanished")
    w = central / (TWO_PI_I * pt.epsilon)
    for k_row, value in zip(bps.support, w):
        if abs(np.angle(-value)) < margin:
            raise BranchCutError(
                f"Lambda argument for charge {k_row[0]} within {margin:g} of the cut"
            )
    return w


def y_components(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> np.ndarray:
    """Solution correction y: zero in the first block, Lambda sums in the second."""
    d = bps.half_rank
    w = lambda_arguments(bps, pt)
    log_lam = np.array([specfun.log_lambda(v) for v in w])
    charges = bps.charge_matrix()
    omegas = bps.omega_values()
    skew = bps.omega_skew()
    out = np.zeros(2 * d, dtype=complex)
    sums = charges.T @ (omegas * log_lam)  # component i: sum_k Omega(k) k_i log Lambda
    out[d:] = -sums / (TWO_PI_I * skew)
    return out


def x_components(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> np.ndarray:
    """x = -z/eps + y; the first d components are exactly -z_i/eps."""
    z = np.asarray(pt.z, dtype=complex)
    return -z / pt.epsilon + y_components(bps, pt)


def _dy_dz(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> np.ndarray:
    """Matrix D[i, j] = d y_{i+d} / d z_j for i, j < d (analytic)."""
    d = bps.half_rank
    w = lambda_arguments(bps, pt)
    dlog = np.array([specfun.dlog_lambda(v) for v in w])
    charges = bps.charge_matrix()
    omegas = bps.omega_values()
    skew = bps.omega_skew()
    weighted = omegas * dlog / (TWO_PI_I * pt.epsilon)
    matrix = charges.T @ (charges * weighted[:, None])  # sum_k Om k_i k_j dlogLam / (2pi i eps)
    return -(matrix / (TWO_PI_I * skew)[:, None])


def _dy_deps(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> np.ndarray:
    """Vector of d y_{i+d} / d eps, via d w_k / d eps = -w_k / eps."""
    w = lambda_arguments(bps, pt)
    dlog = np.array([specfun.dlog_lambda(v) for v in w])
    charges = bps.charge_matrix()
    omegas = bps.omega_values()
    skew = bps.omega_skew()
    sums = charges.T @ (omegas * dlog * (-w / pt.epsilon))
    return -sums / (TWO_PI_I * skew)


def dlog_tau_gradient(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> np.ndarray:
    """Gradient of log(tau): -omega_{i,i+d} d y_{i+d}/d eps for i <= d, else 0."""
    d = bps.half_rank
    out = np.zeros(2 * d, dtype=complex)
    out[:d] = -bps.omega_skew() * _dy_deps(bps, pt)
    return out


def relation_residuals(
    bps: UncoupledBpsStructure, pt: CentralChargePoint
) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the gradient symmetry and homogeneity identities.

    Returns (S, H) with S[i, j] = omega_i dy_{i+d}/dz_j - omega_j dy_{j+d}/dz_i
    and H[i] = sum_j z_j dy_{i+d}/dz_j + eps * dy_{i+d}/d eps; both vanish for
    a consistent structure.
    """
    d = bps.half_rank
    skew = bps.omega_skew()
    dz = _dy_dz(bps, pt)
    weighted = skew[:, None] * dz
    symmetry = weighted - weighted.T
    homogeneity = dz @ pt.first_block(d) + pt.epsilon * _dy_deps(bps, pt)
    return symmetry, homogeneity


def chamber_signs(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> tuple[int, ...]:
    """Sign pattern of Re(w_k) over the support; fixed within a chamber."""
    w = lambda_arguments(bps, pt)
    return tuple(1 if v.real > 0 else -1 for v in w)


def bps_chart_id(bps: UncoupledBpsStructure) -> str:
    return f"bps-z{bps.rank}"


def tau_gradient_form(
    bps: UncoupledBpsStructure,
    epsilon: complex,
    reference_signs: tuple[int, ...] | None = None,
) -> OneFormField:
    """The closed 1-form dlog(tau) on the z-chart at fixed eps.

    With ``reference_signs`` given, every evaluation additionally enforces the
    chamber policy: a flipped sign of any Re(w_k) (a wall crossing) raises
    BranchCutError rather than applying a jump.
    """
    def evaluate(point: ChartPoint) -> np.ndarray:
        cp = CentralChargePoint(point.coords, epsilon)
        if reference_signs is not None:
            signs = chamber_signs(bps, cp)
            if signs != reference_signs:
                raise BranchCutError("evaluation path crossed an active wall")
        return dlog_tau_gradient(bps, cp)

    return OneFormField(bps_chart_id(bps), bps.rank, evaluate, expected_closed=True)


def shift_data_at(bps: UncoupledBpsStructure, pt: CentralChargePoint) -> dict:
    """Named scalars for shift_by_potential_change, evaluated at ``pt``.

    The section fixes theta = 0, so the flip scalar K vanishes identically.
    """
    d = bps.half_rank
    skew = bps.omega_skew()
    z = np.asarray(pt.z)
    x = x_components(bps, pt)
    return {
        "ie_lambda_half": complex(0.5 * np.sum(skew * z[:d] * z[d:])),
        "polarization_half": complex(0.5 * np.sum(skew * x[:d] * x[d:])),
        "flip_term": 0.0 + 0.0j,
    }


_REFERENCE_CHOICE = PotentialChoice("hamiltonian", "polarized", "standard")


def _segment_min_distance(z0: complex, z1: complex) -> float:
    """Distance from the origin to the segment [z0, z1] in C."""
    span = z1 - z0
    if span == 0:
        return abs(z0)
    t = -(z0.real * span.real + z0.imag * span.imag) / (abs(span) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(z0 + t * span)


def _validate_path(bps_structure: UncoupledBpsStructure, path: Polyline, epsilon: complex,
                   margin: float = 1e-6) -> None:
    """Exact per-segment chamber checks (Z is linear along each segment).

    Raises PathThroughDegenerateLocus when some active Z(k) meets the origin,
    and BranchCutError when some w_k = Z(k)/(2 pi i eps) crosses the negative
    real axis or changes the sign of its real part (a wall crossing).
    """
    charges = bps_structure.charge_matrix()
    d = bps_structure.half_rank
    for start, end in zip(path.points, path.points[1:]):
        z0 = charges @ np.asarray(start.coords[:d], dtype=complex)
        z1 = charges @ np.asarray(end.coords[:d], dtype=complex)
        for row, (c0, c1) in enumerate(zip(z0, z1)):
            scale = max(1.0, abs(c0), abs(c1))
            if _segment_min_distance(c0, c1) < margin * scale:
                raise PathThroughDegenerateLocus(
                    f"Z({bps_structure.support[row][0]}) meets the origin along the path"
                )
            w0 = c0 / (TWO_PI_I * epsilon)
            w1 = c1 / (TWO_PI_I * epsilon)
            if w0.real * w1.real < 0:
                raise BranchCutError(
                    f"Re(w) changes sign for charge {bps_structure.support[row][0]} (wall crossing)"
                )
            if w0.imag * w1.imag < 0:
                # crossing of the real axis: reject if it happens at Re < 0
                t = w0.imag / (w0.imag - w1.imag)
                crossing = w0 + t * (w1 - w0)
                if crossing.real < 0:
                    raise BranchCutError(
                        f"w crosses the negative real axis for charge {bps_structure.support[row][0]}"
                    )


def log_tau(
    bps: UncoupledBpsStructure,
    path: Polyline,
    epsilon: complex,
    choice: PotentialChoice = _REFERENCE_CHOICE,
    nodes_per_segment: int = 16,
    tol: float = 1e-10,
    closedness_step: float = 1e-5,
) -> TauReport:
    """Integrate dlog(tau) along ``path`` in z-space, normalized to 0 at the start.

    The raw integral realizes the (hamiltonian, polarized, standard) gauge;
    other potential choices are reached by the corresponding global function
    shifts evaluated at the endpoints.
    """
    if path.chart_id != bps_chart_id(bps):
        raise ValueError(f"path must live on chart {bps_chart_id(bps)!r}")
    start = CentralChargePoint(path.start.coords, epsilon)
    end = CentralChargePoint(path.end.coords, epsilon)
    _validate_path(bps, path, complex(epsilon))
    try:
        signs = chamber_signs(bps, start)
    except DegenerateCharge as exc:
        raise PathThroughDegenerateLocus(str(exc)) from exc
    form = tau_gradient_form(bps, epsilon, reference_signs=signs)
    try:
        raw = integrate_one_form(form, path, nodes_per_segment=nodes_per_segment, tol=tol)
    except DegenerateCharge as exc:
        raise PathThroughDegenerateLocus(str(exc)) from exc

    shifted = raw
    shift = 0.0 + 0.0j
    if choice != _REFERENCE_CHOICE:
        shift = shift_by_potential_change(
            0.0, _REFERENCE_CHOICE, choice, shift_data_at(bps, end)
        ) - shift_by_potential_change(
            0.0, _REFERENCE_CHOICE, choice, shift_data_at(bps, start)
        )
        shifted = raw + shift

    samples = []
    for point in (path.start, path.end):
        res = d_residual(form, point, step=closedness_step)
        samples.append(float(np.max(np.abs(res))))
    sym, hom = relation_residuals(bps, end)
    return TauReport(
        log_tau=shifted,
        chart_id=path.chart_id,
        start=path.start.coords,
        end=path.end.coords,
        epsilon=complex(epsilon),
        potential_choice=choice,
        shift_applied=shift,
        closedness_samples=tuple(samples),
        identity_residuals={
            "relation_symmetry": float(np.max(np.abs(sym))),
            "relation_homogeneity": float(np.max(np.abs(hom))),
        },
        notes=("section theta = 0, so the thetaI flip scalar K vanishes",),
    )


def conifold_truncation(n_levels: int, pairing_c: int = 1) -> UncoupledBpsStructure:
    """Truncated resolved-conifold structure in the (beta, delta) charge basis.

    Active charges: (+-1, m) for |m| <= N with Omega = 1, and (0, +-1) with
    Omega = -2; the dual completion carries Omega = 0 and pairing ``pairing_c``.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    support = []
    for sign in (1, -1):
        for m in range(-n_levels, n_levels + 1):
            support.append(((sign, m), 1))
    support.append(((0, 1), -2))
    support.append(((0, -1), -2))
    return UncoupledBpsStructure(
        half_rank=2, pairing=(pairing_c, pairing_c), support=tuple(support)
    )


def minimal_d1() -> UncoupledBpsStructure:
    """The minimal d = 1 structure: a single charge pair with Omega = 1."""
    return UncoupledBpsStructure(half_rank=1, pairing=(1,), support=(((1,), 1), ((-1,), 1)))
