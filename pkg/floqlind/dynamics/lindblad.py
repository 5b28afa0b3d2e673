from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from floqlind.errors import (
    DecompositionError,
    IndexOutOfRangeError,
    InvalidGeneratorError,
)
from floqlind.linalg.basis import FrobeniusBasis, frobenius_basis
from floqlind.linalg.matfuncs import (
    hermitian_min_eig,
    hermitian_part,
    hermitian_residual,
    norm2,
)
from floqlind.linalg.superop import (
    Superoperator,
    map_decomposition,
    star_residual,
    trace_annihilation_residual,
    vectorize_map,
)
from floqlind.utils.options import Tolerances

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    """
    Periodic generator L_t = −i[H_t, ·] + Σ_jk a_jk(t) D_jk.

    ``hamiltonian`` maps t to a d×d Hermitian matrix, ``kossakowski`` maps t
    to a (d²−1)×(d²−1) PSD matrix in the Frobenius basis of dimension d.
    Both must be T-periodic and continuous between consecutive breakpoints.
    The callables may be evaluated from several threads at once.
    """

    dim: int
    period: float
    hamiltonian: MatrixFunction
    kossakowski: MatrixFunction
    breakpoints: tuple[float, ...] = ()
    name: str = "custom"
    basis: FrobeniusBasis = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.period > 0:
            raise ValueError(f"Period must be positive, got {self.period}")
        bps = tuple(float(b) for b in self.breakpoints)
        if list(bps) != sorted(bps) or any(b < 0 or b >= self.period for b in bps):
            raise ValueError(
                f"Breakpoints must be sorted and lie in [0, T), got {self.breakpoints}"
            )
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "basis", frobenius_basis(self.dim))

    @property
    def n_channels(self) -> int:
        return self.dim * self.dim - 1

    @classmethod
    def from_jump_operators(
        cls,
        dim: int,
        period: float,
        hamiltonian: MatrixFunction,
        jumps: Callable[[float], Sequence[np.ndarray]],
        breakpoints: Iterable[float] = (),
        name: str = "custom",
    ) -> LindbladSpec:
        """
        Build a spec from jump operators V_{j,t}.

        Each V is expanded as V = c·I + W with W traceless; W gives the
        Kossakowski contribution a_jk = Σ_i w_ij conj(w_ik) and the identity
        component shifts the Hamiltonian by (i/2)(c̄W − cW*).
        """
        basis = frobenius_basis(dim)
        n = basis.size - 1

        def _split(t: float) -> tuple[np.ndarray, np.ndarray]:
            a = np.zeros((n, n), dtype=np.complex128)
            shift = np.zeros((dim, dim), dtype=np.complex128)
            for v in jumps(t):
                coords = basis.coordinates(np.asarray(v, dtype=np.complex128))
                w_coords = coords[:n]
                a += np.outer(w_coords, w_coords.conj())
                c = coords[-1] / np.sqrt(dim)
                w = basis.from_coordinates(np.append(w_coords, 0.0))
                shift += 0.5j * (np.conj(c) * w - c * w.conj().T)
            return a, shift

        def _hamiltonian(t: float) -> np.ndarray:
            return np.asarray(hamiltonian(t), dtype=np.complex128) + _split(t)[1]

        def _kossakowski(t: float) -> np.ndarray:
            return _split(t)[0]

        return cls(
            dim=dim,
            period=period,
            hamiltonian=_hamiltonian,
            kossakowski=_kossakowski,
            breakpoints=tuple(breakpoints),
            name=name,
        )


@dataclass(frozen=True)
class StandardFormDecomposition:
    hamiltonian_part: np.ndarray
    kossakowski_part: np.ndarray
    gksl_valid: bool
    residual: float
    min_kossakowski_eig: float


# ---------------------------------------------------------------------------
# Structure constants
# ---------------------------------------------------------------------------


def _dissipator_action(fj: np.ndarray, fk: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    fk_dag = fk.conj().T
    anti = fk_dag @ fj

    def _apply(x: np.ndarray) -> np.ndarray:
        return fj @ x @ fk_dag - 0.5 * (anti @ x + x @ anti)

    return _apply


def _commutator_action(f: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def _apply(x: np.ndarray) -> np.ndarray:
        return -1j * (f @ x - x @ f)

    return _apply


def _chop(m: np.ndarray, eps: float = 1e-13) -> None:
    # nonzero structure constants are O(1/d); anything below eps is rounding noise
    m.real[np.abs(m.real) < eps] = 0.0
    m.imag[np.abs(m.imag) < eps] = 0.0


@lru_cache(maxsize=None)
def _structure(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacks of −i ad_{F_m} (n, d², d²) and D_jk (n, n, d², d²), n = d²−1."""
    basis = frobenius_basis(d)
    n = basis.size - 1
    ad = np.array(
        [vectorize_map(_commutator_action(f), basis).matrix for f in basis.elements[:n]]
    )
    diss = np.empty((n, n, basis.size, basis.size), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            action = _dissipator_action(basis.elements[j], basis.elements[k])
            diss[j, k] = vectorize_map(action, basis).matrix
    _chop(ad)
    _chop(diss)
    ad.setflags(write=False)
    diss.setflags(write=False)
    logger.debug("Cached Lindblad structure constants for d=%d", d)
    return ad, diss


def dissipator(j: int, k: int, basis: FrobeniusBasis) -> Superoperator:
    """D_jk(x) = F_j x F_k* − ½{F_k* F_j, x}, with 1-based j, k in 1..d²−1."""
    n = basis.size - 1
    if not (1 <= j <= n and 1 <= k <= n):
        raise IndexOutOfRangeError(f"Dissipator indices ({j}, {k}) outside 1..{n}")
    _, diss = _structure(basis.dim)
    return Superoperator(diss[j - 1, k - 1].copy(), basis)


def hamiltonian_superop(h: np.ndarray, basis: FrobeniusBasis) -> Superoperator:
    """−i[H, ·]; the identity component of H drops out."""
    ad, _ = _structure(basis.dim)
    coeffs = basis.coordinates(np.asarray(h, dtype=np.complex128))[: basis.size - 1]
    return Superoperator(np.einsum("m,mxy->xy", coeffs, ad), basis)


def dissipative_superop(a: np.ndarray, basis: FrobeniusBasis) -> Superoperator:
    _, diss = _structure(basis.dim)
    return Superoperator(np.einsum("jk,jkxy->xy", np.asarray(a), diss), basis)


def assemble_generator(h: np.ndarray, a: np.ndarray, basis: FrobeniusBasis) -> Superoperator:
    """First standard form −i[H, ·] + Σ a_jk D_jk as a superoperator."""
    n = basis.size - 1
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (n, n):
        raise ValueError(f"Kossakowski matrix must be {n}x{n}, got {a.shape}")
    return hamiltonian_superop(h, basis) + dissipative_superop(a, basis)


# ---------------------------------------------------------------------------
# Spec evaluation
# ---------------------------------------------------------------------------


def _asymmetric_entry(m: np.ndarray) -> tuple[int, int]:
    """(row, col), 0-based, of the largest |m_ij − conj(m_ji)|."""
    diff = np.abs(m - m.conj().T)
    i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return int(min(i, j)), int(max(i, j))


def _check_coefficients(
    spec: LindbladSpec, t: float, h: np.ndarray, a: np.ndarray, tol: Tolerances
) -> None:
    d, n = spec.dim, spec.n_channels
    if h.shape != (d, d):
        raise InvalidGeneratorError(f"H_t has shape {h.shape}, expected {(d, d)}", t=t, check="shape")
    if a.shape != (n, n):
        raise InvalidGeneratorError(f"a_t has shape {a.shape}, expected {(n, n)}", t=t, check="shape")
    res_h = hermitian_residual(h)
    if res_h > tol.herm * max(norm2(h), 1.0):
        i, j = _asymmetric_entry(h)
        raise InvalidGeneratorError(
            f"H_t entry ({i}, {j}) not Hermitian at t={t} (residual {res_h:.3e})",
            t=t,
            check=f"hamiltonian-hermitian-{i}-{j}",
        )
    res_a = hermitian_residual(a)
    scale_a = max(norm2(a), 1.0)
    if res_a > tol.herm * scale_a:
        i, j = _asymmetric_entry(a)
        raise InvalidGeneratorError(
            f"Kossakowski entry ({i}, {j}) not Hermitian at t={t} (residual {res_a:.3e})",
            t=t,
            check=f"kossakowski-hermitian-{i}-{j}",
        )
    min_eig = float(np.linalg.eigvalsh(hermitian_part(a))[0])
    if min_eig < -tol.psd * scale_a:
        raise InvalidGeneratorError(
            f"Kossakowski matrix not PSD at t={t} (min eigenvalue {min_eig:.3e})", t=t, check="psd"
        )


def coefficients_at(
    spec: LindbladSpec, t: float, validate: bool = True, tol: Tolerances = Tolerances()
) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(spec.hamiltonian(t), dtype=np.complex128)
    a = np.asarray(spec.kossakowski(t), dtype=np.complex128)
    if validate:
        _check_coefficients(spec, t, h, a, tol)
    return h, a


def generator_at(
    spec: LindbladSpec, t: float, validate: bool = True, tol: Tolerances = Tolerances()
) -> Superoperator:
    """
    Vectorized L_t = −i[H_t, ·] + Σ a_jk(t) D_jk.

    Raises
    ------
    InvalidGeneratorError
        If H_t is not Hermitian or a_t is not PSD beyond tolerance.
    """
    h, a = coefficients_at(spec, t, validate, tol)
    return assemble_generator(h, a, spec.basis)


def validate_spec(spec: LindbladSpec, samples: int = 64, tol: Tolerances = Tolerances()) -> list[str]:
    """
    Sampled invariant check; returns human-readable diagnostics (empty if valid).

    Each kind of failure is reported once, at the first failing sample,
    together with the number of samples it occurs at.
    """
    first: dict[str, str] = {}
    counts: dict[str, int] = {}

    def _record(check: str, message: str) -> None:
        first.setdefault(check, message)
        counts[check] = counts.get(check, 0) + 1

    period = spec.period
    for i in range(samples):
        t = (i + 0.5) * period / samples
        try:
            h, a = coefficients_at(spec, t, validate=True, tol=tol)
        except InvalidGeneratorError as e:
            _record(e.check or str(e), str(e))
            continue
        h2, a2 = coefficients_at(spec, t + period, validate=False)
        drift = max(np.max(np.abs(h2 - h)), np.max(np.abs(a2 - a)))
        if drift > tol.roundtrip * max(1.0, norm2(h), norm2(a)):
            _record("periodic", f"coefficients not {period}-periodic at t={t} (drift {drift:.3e})")
    diagnostics = [
        msg if counts[check] == 1 else f"{msg}; fails at {counts[check]} of {samples} samples"
        for check, msg in first.items()
    ]
    if diagnostics:
        logger.debug("Spec %s: %d diagnostics", spec.name, len(diagnostics))
    return diagnostics


def commutativity_grid(spec: LindbladSpec, n: int = 20) -> list[tuple[float, float]]:
    times = [(i + 0.5) * spec.period / n for i in range(n)]
    return [(t, s) for t in times for s in times]


def commutativity_residual(
    spec: LindbladSpec,
    grid: Sequence[tuple[float, float]] | None = None,
    validate: bool = False,
) -> tuple[float, float]:
    """
    Largest commutator ‖L_t L_s − L_s L_t‖₂ over the grid pairs.

    Returns
    -------
    residual : float
        The largest commutator norm.
    scale : float
        max‖L‖₂² over the grid, the scale the relative commutativity
        tolerance multiplies (see :func:`is_commutative`).
    """
    pairs = list(grid) if grid is not None else commutativity_grid(spec)
    cache: dict[float, np.ndarray] = {}

    def _gen(t: float) -> np.ndarray:
        if t not in cache:
            cache[t] = generator_at(spec, t, validate=validate).matrix
        return cache[t]

    residual = 0.0
    scale = 0.0
    for t, s in pairs:
        lt, ls = _gen(t), _gen(s)
        residual = max(residual, norm2(lt @ ls - ls @ lt))
        scale = max(scale, norm2(lt) ** 2, norm2(ls) ** 2)
    return residual, scale


def is_commutative(spec: LindbladSpec, n: int = 20, tol: Tolerances = Tolerances()) -> bool:
    residual, scale = commutativity_residual(spec, commutativity_grid(spec, n))
    verdict = residual <= tol.comm * max(scale, 1e-300)
    logger.debug(
        "Commutativity of %s: residual=%.3e scale=%.3e -> %s", spec.name, residual, scale, verdict
    )
    return verdict


# ---------------------------------------------------------------------------
# Standard form extraction
# ---------------------------------------------------------------------------


def extract_standard_form(
    s: Superoperator, tol: Tolerances = Tolerances()
) -> StandardFormDecomposition:
    """
    Recover (H, a) with S = −i[H, ·] + Σ a_jk D_jk for a trace-annihilating *-map.

    H is made traceless. ``gksl_valid`` reports whether a is PSD, i.e.
    whether S generates a CPTP semigroup.

    Raises
    ------
    DecompositionError
        If S is not a *-map or the reconstruction residual exceeds tolerance.
    """
    scale = max(norm2(s.matrix), 1.0)
    star = star_residual(s)
    if star > tol.herm * scale * 10:
        raise DecompositionError(f"Input is not a *-map (imaginary residual {star:.3e})")

    dec = map_decomposition(s)
    d = s.dim
    a = hermitian_part(dec.corner)
    h = -hermitian_part(dec.g)
    h = h - np.trace(h) / d * np.eye(d)

    rebuilt = assemble_generator(h, a, s.basis)
    residual = float(np.max(np.abs(rebuilt.matrix - s.matrix)))
    if residual > tol.roundtrip * scale:
        raise DecompositionError(
            f"Standard-form reconstruction residual {residual:.3e} above tolerance "
            f"(trace-annihilation residual {trace_annihilation_residual(s):.3e})"
        )
    min_eig = hermitian_min_eig(a, tol=max(tol.herm, 1e-8))
    valid = min_eig >= -tol.psd * max(norm2(a), 1.0)
    return StandardFormDecomposition(
        hamiltonian_part=h,
        kossakowski_part=a,
        gksl_valid=bool(valid),
        residual=residual,
        min_kossakowski_eig=min_eig,
    )


def jump_operators(a: np.ndarray, basis: FrobeniusBasis, tol: float = 1e-12) -> list[np.ndarray]:
    """Canonical jump operators √λ_j Σ_k u_kj F_k from the eigenvectors of a PSD a."""
    w, u = np.linalg.eigh(hermitian_part(np.asarray(a)))
    ops = []
    for j in np.argsort(w)[::-1]:
        if w[j] <= tol * max(1.0, abs(w).max()):
            continue
        coeffs = np.append(np.sqrt(w[j]) * u[:, j], 0.0)
        ops.append(basis.from_coordinates(coeffs))
    return ops
