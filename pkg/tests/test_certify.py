import math

import numpy as np
import pytest

from floqlind.certify.cptp import cptp_report
from floqlind.certify.divisibility import (
    _coalesce,
    certification_grid,
    divisibility_scan,
    kossakowski_divisibility,
)
from floqlind.certify.semigroup import periodic_part_derivative, semigroup_cp_test
from floqlind.dynamics.lindblad import generator_at
from floqlind.dynamics.solver import solve_commutative
from floqlind.errors import NotCommutativeError, SingularFamilyError
from floqlind.floquet.normal_form import floquet_split
from floqlind.linalg.basis import frobenius_basis
from floqlind.linalg.matfuncs import conjugation_mismatch
from floqlind.linalg.superop import Superoperator, superop_identity, vectorize_map
from floqlind.models.families import Constant, Cosine
from floqlind.models.m3 import m3_counterexample
from floqlind.models.random_qubit import RandomQubitModel, random_qubit_model
from floqlind.utils.options import FloquetOptions, IntegratorOptions, Tolerances

STEP = 2 * math.pi / 2000


@pytest.fixture(scope="module")
def m3_form():
    return floquet_split(m3_counterexample(), FloquetOptions(integrator=IntegratorOptions(step=STEP)))


def _depolarizing_overshoot(eps: float) -> Superoperator:
    # (1+ε)·id − ε·tr(x)I/2: trace preserving, Choi min eig −ε/2
    return vectorize_map(
        lambda x: (1 + eps) * x - eps * np.trace(x) * np.eye(2) / 2, frobenius_basis(2)
    )


# ---------------------------------------------------------------------------
# cptp
# ---------------------------------------------------------------------------


def test_propagator_is_cptp(tls):
    report = cptp_report(solve_commutative(tls.spec, 1.7))
    assert report.cp
    assert report.is_cptp()
    assert report.witness is None
    assert report.star_residual < 1e-12


def test_transpose_fails_with_witness():
    basis = frobenius_basis(2)
    report = cptp_report(vectorize_map(lambda x: x.T, basis))
    assert not report.cp
    assert report.is_tp()
    assert math.isclose(report.min_choi_eig, -1.0, abs_tol=1e-12)
    assert report.witness is not None


def test_non_star_map_is_not_cp():
    basis = frobenius_basis(2)
    report = cptp_report(vectorize_map(lambda x: 1j * x, basis))
    assert not report.cp


def test_hermiticity_uses_its_own_tolerance():
    # fully depolarizing channel (Choi = I/2) with a small imaginary leak
    base = vectorize_map(lambda x: np.trace(x) * np.eye(2) / 2, frobenius_basis(2))
    w = base.matrix.astype(np.complex128)
    w[1, 2] += 1e-6j
    leaky = Superoperator(w, base.basis)

    strict_herm = cptp_report(leaky, Tolerances(herm=1e-12, psd=1e-3))
    assert not strict_herm.cp
    assert strict_herm.witness is not None

    loose_herm = cptp_report(leaky, Tolerances(herm=1e-3, psd=1e-12))
    assert loose_herm.cp
    assert loose_herm.min_choi_eig > 0.4



# ---------------------------------------------------------------------------
# divisibility
# ---------------------------------------------------------------------------


def test_certification_grid_adds_breakpoints():
    grid = certification_grid((0.0, 2.0), 3, breakpoints=(0.3,), period=1.0)
    assert np.allclose(grid, [0.0, 0.3, 1.0, 1.3, 2.0])


def test_coalesce_windows():
    times = np.arange(6, dtype=float)
    assert _coalesce([1, 2, 4], times, pad_next=True) == [(1.0, 3.0), (4.0, 5.0)]
    assert _coalesce([1, 2, 4], times, pad_next=False) == [(1.0, 2.0), (4.0, 4.0)]
    assert _coalesce([], times, pad_next=True) == []


def test_propagator_of_psd_generators_is_divisible(random_qubit):
    report = divisibility_scan(
        lambda t: solve_commutative(random_qubit.spec, t), (0.0, random_qubit.period), grid=12
    )
    assert report.markovian
    assert report.violations == []
    assert report.grid_density == 12


def test_random_qubit_periodic_part_is_not_divisible(random_qubit):
    form = floquet_split(random_qubit.spec)
    report = divisibility_scan(form.periodic_part, (0.0, random_qubit.period), grid=24)
    assert not report.markovian
    assert report.nonmarkovian_windows
    assert report.local_violations
    for t, s, min_eig in report.violations:
        assert s < t
        assert min_eig < 0


def test_scan_is_deterministic_across_workers(random_qubit):
    form = floquet_split(random_qubit.spec)
    serial = divisibility_scan(form.periodic_part, (0.0, random_qubit.period), grid=16)
    threaded = divisibility_scan(form.periodic_part, (0.0, random_qubit.period), grid=16, workers=3)
    assert serial.violations == threaded.violations
    assert serial.nonmarkovian_windows == threaded.nonmarkovian_windows


def test_small_failures_are_marginal():
    basis = frobenius_basis(2)
    overshoot = _depolarizing_overshoot(2e-8)

    def family(t):
        return overshoot if t > 0 else superop_identity(basis)

    report = divisibility_scan(family, (0.0, 1.0), grid=[0.0, 1.0])
    assert report.markovian
    assert report.marginal == [0.0]

    strict = divisibility_scan(family, (0.0, 1.0), grid=[0.0, 1.0], tol=Tolerances(boundary=1e-9))
    assert not strict.markovian


def test_singular_family():
    basis = frobenius_basis(2)
    zero = Superoperator(np.zeros((4, 4), dtype=complex), basis)
    with pytest.raises(SingularFamilyError) as exc:
        divisibility_scan(lambda t: zero if t > 0.5 else superop_identity(basis), (0.0, 1.0), grid=3)
    assert exc.value.t == 1.0


def test_kossakowski_criterion(random_qubit, tls):
    report = kossakowski_divisibility(random_qubit.spec, (0.0, random_qubit.period), grid=32)
    assert not report.markovian
    # three phase-shifted rates never all sit above their common mean
    assert len(report.kossakowski_violations) == 32
    for t, _ in report.kossakowski_violations:
        assert not random_qubit.divisible_at(t)

    constant = kossakowski_divisibility(tls.spec, (0.0, tls.period), grid=16)
    assert constant.markovian
    assert constant.nonmarkovian_windows == []
    assert constant.cp_sufficiency_violations == []


def test_kossakowski_criterion_needs_commuting_generators():
    with pytest.raises(NotCommutativeError):
        kossakowski_divisibility(m3_counterexample(), (0.0, 2 * math.pi), grid=8)


def _random_rates(seed: int) -> RandomQubitModel:
    rng = np.random.default_rng(seed)
    if seed % 5 == 0:
        return random_qubit_model([Constant(v) for v in rng.uniform(0.2, 2.0, 3)])
    amps = rng.uniform(0.2, 1.5, 3)
    offsets = amps + rng.uniform(0.0, 1.0, 3)
    phases = rng.uniform(0.0, 2 * math.pi, 3)
    return random_qubit_model([Cosine(o, a, phase=p) for o, a, p in zip(offsets, amps, phases)])


def _gap(model: RandomQubitModel, t: float) -> float:
    # min eigenvalue of a_t minus its period mean, a_t = diag(γ)
    return min(r(t) - r.integral(model.period) / model.period for r in model.rates)


@pytest.mark.parametrize("seed", range(50))
def test_random_qubit_divisibility_matches_rates(seed):
    model = _random_rates(seed)
    period = model.period
    constant = seed % 5 == 0
    form = floquet_split(model.spec)

    kossakowski = kossakowski_divisibility(model.spec, (0.0, period), 33)
    assert kossakowski.markovian is constant

    scan = divisibility_scan(form.periodic_part, (0.0, period), 65)
    assert scan.markovian is constant
    assert bool(scan.nonmarkovian_windows) is not constant

    # a failing step [t_j, t_j+1] needs a negative rate deviation at one end
    times = scan.grid
    for t in scan.local_violations:
        j = int(np.argmin(np.abs(times - t)))
        assert min(_gap(model, times[j]), _gap(model, times[j + 1])) <= 1e-9

    # a clearly negative deviation breaks one of the adjacent short steps
    h = period / 256
    failing = [t for t, m in kossakowski.kossakowski_violations if m < -0.05 and h < t < period - h]
    assert bool(failing) is not constant
    for t in failing:
        local = divisibility_scan(form.periodic_part, (t - h, t + h), [t - h, t, t + h])
        assert local.local_violations, t


def test_m3_floquet_factors_are_not_cp(m3_form):
    grid = np.linspace(0.0, 2 * m3_form.period, 128)
    assert min(cptp_report(m3_form.propagator(t)).min_choi_eig for t in grid) >= -1e-7

    periodic = m3_form.periodic_part(4.32)
    report = cptp_report(periodic)
    assert not report.cp
    assert report.min_choi_eig < -1e-3
    semigroup = m3_form.semigroup(0.5)
    assert cptp_report(semigroup).min_choi_eig < -1e-3

    # the factors of a real propagator need not be real
    assert conjugation_mismatch(np.linalg.eigvals(periodic.matrix)) > 1e-3
    assert conjugation_mismatch(np.linalg.eigvals(semigroup.matrix)) > 1e-3



# ---------------------------------------------------------------------------
# semigroup
# ---------------------------------------------------------------------------


def test_semigroup_test_for_commuting_models(random_qubit, tls):
    for model in (random_qubit, tls):
        form = floquet_split(model.spec)
        result = semigroup_cp_test(form, model.spec)
        assert result.markovian
        assert result.standard_form_valid
        assert result.agrees
        assert not result.one_sided


def test_periodic_part_derivative_is_generator_minus_mean(tls):
    form = floquet_split(tls.spec)
    dp, one_sided = periodic_part_derivative(form, tls.spec)
    expected = generator_at(tls.spec, 0.0).matrix - form.X.matrix
    assert np.allclose(dp.matrix, expected, atol=1e-6)
    assert not one_sided


def test_m3_semigroup_is_not_cp(m3_form):
    result = semigroup_cp_test(m3_form, m3_form.spec)
    assert not result.markovian
    assert result.min_eig < 0
    assert result.standard_form_valid is False
    assert result.agrees
