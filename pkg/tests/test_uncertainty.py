import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf, erfc

from cohentf import (
    Dirac,
    MeasurableSet,
    SeparableGaussianWigner,
    Signal,
    TFFunction,
    c_const,
    cohen_FG,
    cohen_op_matrix,
    cohen_up_bound,
    ds_bound_at,
    ds_bound_optimize,
    ds_classical_bound,
    epsilon_concentration,
    gaussian,
    interval_set,
    localization_matrix,
    lp_norm,
    make_grid,
    measured_epsilons,
    scaling_experiment,
    set_measure,
    wigner,
    wigner_bounded,
    dilate,
)
from cohentf.grid import dft, idft
from cohentf.operators import apply
from cohentf.transforms import kernel_array
from cohentf.uncertainty import cohen_report, gaussian_multipliers, golden_max, localization_report
from cohentf.verify import random_kernel, random_mixture


# ---------------------------------------------------------------------------
# epsilon-concentration
# ---------------------------------------------------------------------------

def test_eps_zero_when_supported_inside(grid):
    U = interval_set(grid, [[-1, 1]])
    f = Signal(grid, U.indicator * np.cos(grid.x))
    assert epsilon_concentration(f, U) == 0.0
    full = MeasurableSet(grid, np.ones(grid.n, bool))
    assert epsilon_concentration(gaussian("Phi", 1.0, grid), full) == 0.0


def test_eps_gaussian_tail_oracle():
    # 1 - int_{-1}^{1} |Phi_1|^2 = erfc(sqrt(2 pi)); the left-endpoint cell
    # rule needs a fine lattice to reach 1e-6
    g = make_grid(8192, 1 / 512)
    eps = epsilon_concentration(gaussian("Phi", 1.0, g), interval_set(g, [[-1, 1]]))
    assert abs(eps - math.sqrt(erfc(math.sqrt(2 * math.pi)))) < 1e-6


def test_eps_zero_signal(grid):
    with pytest.raises(ValueError):
        epsilon_concentration(Signal(grid, np.zeros(grid.n)), interval_set(grid, [[-1, 1]]))


def test_measured_eps_full_sets(grid, rng):
    f = random_mixture(rng, grid)
    T = MeasurableSet(grid, np.ones(grid.n, bool))
    O = MeasurableSet(grid.dual(), np.ones(grid.n, bool))
    et, eo = measured_epsilons(f, T, O)
    assert et < 1e-6 and eo < 1e-6


def test_measured_eps_empty_time_set(grid):
    f = gaussian("Phi", 1.0, grid)
    T = MeasurableSet(grid, np.zeros(grid.n, bool))
    O = interval_set(grid.dual(), [[-2, 2]])
    assert measured_epsilons(f, T, O)[0] == 1.0


def test_measured_eps_brute_force_oracle(grid):
    f = gaussian("Phi", 1.0, grid)
    T = interval_set(grid, [[-2, 2]])
    O = interval_set(grid.dual(), [[-2, 2]])
    et, eo = measured_epsilons(f, T, O)
    # direct O(n^2) quadrature of chi * phi_2 on both lattices
    def direct_conv(S):
        x = S.grid.x
        n = S.grid.n
        off = (x[:, None] - x[None, :] + n * S.grid.dx / 2) % (n * S.grid.dx) - n * S.grid.dx / 2
        return (math.sqrt(2) * np.exp(-2 * np.pi * off ** 2) * S.indicator[None, :]).sum(axis=1) * S.grid.dx

    F1, F2 = direct_conv(T), direct_conv(O)
    n2 = np.sum(np.abs(f.samples) ** 2)
    et_ref = math.sqrt(max(0.0, 1 - np.sum(np.abs(F1 * f.samples) ** 2) / n2))
    fhat = dft(f.samples, grid)
    eo_ref = math.sqrt(max(0.0, 1 - np.sum(np.abs(idft(F2 * fhat, grid)) ** 2) / n2))
    assert abs(et - et_ref) < 1e-6 and abs(eo - eo_ref) < 1e-6


def _continuum_eps_t():
    s = math.sqrt(2 * math.pi)
    F1 = lambda x: 0.5 * (erf(s * (x + 2)) - erf(s * (x - 2)))
    loss = quad(lambda x: (1 - F1(x) ** 2) * math.sqrt(2) * math.exp(-2 * math.pi * x * x), -8, 8, points=[-2, 2], limit=400,
                epsabs=1e-16, epsrel=1e-13)[0]
    return math.sqrt(loss)


def test_measured_eps_converges_to_continuum():
    """The sampled set indicator makes chi_T * phi first order in dx."""
    ref = _continuum_eps_t()
    errs = []
    for n, dx in [(256, 1 / 16), (512, 1 / 32), (1024, 1 / 64)]:
        g = make_grid(n, dx)
        et, _ = measured_epsilons(gaussian("Phi", 1.0, g), interval_set(g, [[-2, 2]]), interval_set(g.dual(), [[-2, 2]]))
        errs.append(abs(et - ref))
    assert errs[0] < 5e-5
    assert errs[1] < 0.6 * errs[0] and errs[2] < 0.6 * errs[1]


def test_multipliers_match_localization_operators(small_grid, rng):
    g = small_grid
    T = interval_set(g, [[-1, 1.5]])
    O = interval_set(g.dual(), [[-0.5, 1]])
    lam1, lam2 = 0.8, 1.25
    F1, F2 = gaussian_multipliers(T, O, lam1, lam2)
    chiT = TFFunction(g, np.repeat(T.indicator[:, None], g.n, axis=1))
    chiO = TFFunction(g, np.repeat(O.indicator[None, :], g.n, axis=0))
    f = random_mixture(rng, g)
    P1, P2 = gaussian("Phi", lam1, g), gaussian("Phi", lam2, g)
    L1 = apply(localization_matrix(chiT, P1, P1), f, dense=True).samples
    L2 = apply(localization_matrix(chiO, P2, P2), f, dense=True).samples
    assert np.abs(L1 - F1 * f.samples).max() < 1e-6
    assert np.abs(L2 - idft(F2 * dft(f.samples, g), g)).max() < 1e-6


# ---------------------------------------------------------------------------
# Donoho-Stark bounds
# ---------------------------------------------------------------------------

def test_classical_bound():
    assert ds_classical_bound(0, 0) == 1
    assert abs(ds_classical_bound(0.05, 0.05) - 0.81) < 1e-15
    assert ds_classical_bound(0.5, 0.5) == 0
    with pytest.raises(ValueError):
        ds_classical_bound(0.6, 0.5)


def test_bound_at_values():
    assert abs(ds_bound_at(1.34, 0.05, 0.05, 1) - 0.9138) < 5e-4
    assert abs(ds_bound_at(1.6, 0.02, 0.08, 2) - 1.1358) < 5e-4
    for d in (1, 2):
        assert ds_bound_at(1.0, 0.1, 0.2, d) == (1 - (0.1 + 0.2)) ** 2
    with pytest.raises(ValueError):
        ds_bound_at(0.9, 0.0, 0.0)


def test_optimize_sup_at_infinity():
    for d in (1, 2):
        opt = ds_bound_optimize(0.0, 0.0, d, 1e3)
        assert abs(opt.bound - (math.e / 2) ** d) < 1e-3
        assert opt.at_boundary and opt.r_star == 1e3


def test_optimize_interior():
    opt = ds_bound_optimize(0.05, 0.05, 1)
    assert opt.bound >= 0.9138 and opt.bound >= ds_bound_at(1.34, 0.05, 0.05, 1)
    assert opt.r_star > 1 and opt.bound > 0.81 and not opt.at_boundary
    r_star, bound = opt
    assert abs(bound - ds_bound_at(r_star, 0.05, 0.05, 1)) < 1e-15


def test_optimize_trivial():
    opt = ds_bound_optimize(0.4, 0.6, 1)
    assert opt.bound == 0 and opt.r_star == 1


def test_optimize_dominates_classical():
    rng = np.random.default_rng(11)
    for _ in range(100):
        et, eo = rng.uniform(0, 0.5, 2)
        d = int(rng.integers(1, 4))
        assert ds_bound_optimize(et, eo, d).bound >= ds_classical_bound(et, eo) - 1e-15


def test_golden_max():
    x, v = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-10)
    assert abs(x - 0.3) < 1e-9 and v <= 0


# ---------------------------------------------------------------------------
# Cohen-class bound
# ---------------------------------------------------------------------------

@pytest.fixture
def sets(grid):
    return interval_set(grid, [[-2, 2]]), interval_set(grid.dual(), [[-2, 2]])


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_gaussian_kernel_marginals(grid, sets, lam):
    T, O = sets
    mg = cohen_FG(SeparableGaussianWigner(lam), T, O)
    assert np.abs(mg.G1.samples - gaussian("phi", 2 * lam, grid).samples).max() < 1e-8
    assert np.abs(mg.G2.samples - gaussian("phi", 2 / lam, grid.dual()).samples).max() < 1e-8
    F1, F2 = gaussian_multipliers(T, O, lam, lam)
    assert np.abs(mg.F1.samples - F1).max() < 1e-8
    assert np.abs(mg.F2.samples - F2).max() < 1e-8
    assert np.abs(mg.F1.samples).max() <= lp_norm(mg.G1, 1) + 1e-12
    assert lp_norm(mg.G1, 1) <= 1 + 1e-9


def test_dirac_marginals(grid, sets):
    T, O = sets
    mg = cohen_FG(Dirac(), T, O)
    assert mg.singular
    np.testing.assert_array_equal(mg.F1.samples, T.indicator)
    np.testing.assert_array_equal(mg.F2.samples, O.indicator)
    assert mg.G1.samples[grid.origin_index] == 1 / grid.dx


def test_marginal_identity_direct_double_quadrature(small_grid, rng):
    g = small_grid
    T = interval_set(g, [[-1, 2]])
    O = interval_set(g.dual(), [[-1.5, 0.5]])
    kernel = random_kernel(rng, g)
    mg = cohen_FG(kernel, T, O)
    k0 = kernel_array(kernel, g)  # sigma at lattice offsets
    n = g.n
    F1 = np.array([sum(np.conj(k0[(x - t) % n, :]).sum() for x in np.flatnonzero(T.mask)) for t in range(n)]) * g.dx * g.dw
    F2 = np.array([sum(np.conj(k0[:, (e - w) % n]).sum() for e in np.flatnonzero(O.mask)) for w in range(n)]) * g.dx * g.dw
    assert np.abs(mg.F1.samples - F1).max() < 1e-8
    assert np.abs(mg.F2.samples - F2).max() < 1e-8


def test_cohen_specialisation_chi_t(small_grid, rng):
    g = small_grid
    T = interval_set(g, [[-1, 1.5]])
    O = interval_set(g.dual(), [[-1, 1]])
    chiT = TFFunction(g, np.repeat(T.indicator[:, None], g.n, axis=1))
    chiO = TFFunction(g, np.repeat(O.indicator[None, :], g.n, axis=0))
    for kernel in (SeparableGaussianWigner(1.0), random_kernel(rng, g)):
        mg = cohen_FG(kernel, T, O)
        f = random_mixture(rng, g)
        out1 = apply(cohen_op_matrix(chiT, kernel), f, dense=True).samples
        out2 = apply(cohen_op_matrix(chiO, kernel), f, dense=True).samples
        assert np.abs(out1 - mg.F1.samples * f.samples).max() < 1e-6
        assert np.abs(out2 - idft(mg.F2.samples * dft(f.samples, g), g)).max() < 1e-6


def test_cohen_FG_zero_padding(grid, sets):
    T, O = sets
    a = cohen_FG(SeparableGaussianWigner(1.0), T, O)
    b = cohen_FG(SeparableGaussianWigner(1.0), T, O, padding="zero")
    assert np.abs(a.F1.samples - b.F1.samples).max() < 1e-12
    with pytest.raises(ValueError):
        cohen_FG(SeparableGaussianWigner(1.0), T, O, padding="reflect")


def test_cohen_up_bound_gaussian(sets):
    T, O = sets
    rep = cohen_up_bound(SeparableGaussianWigner(1.0), T, O, 0.05, 0.05, 1)
    assert rep.bound_improved >= 0.81
    assert rep.bound_classical == pytest.approx(0.81)
    assert rep.applicable and rep.satisfied
    assert rep.general_violations == 0 and rep.general_checks > 0
    assert len(rep.lattice["r"]) == 60 and len(rep.lattice["p"]) == 40
    assert 1 <= rep.r_star <= 100


def test_cohen_up_bound_dirac_rejected(sets):
    T, O = sets
    rep = cohen_up_bound(Dirac(), T, O, 0.05, 0.05, 1)
    assert not rep.applicable
    assert not rep.hypothesis_flags["kernel_integrable"]


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_cohen_up_flags_gaussian(sets, lam):
    T, O = sets
    flags = cohen_up_bound(SeparableGaussianWigner(lam), T, O, 0.1, 0.1).hypothesis_flags
    assert flags["F_sup_le_1"] and flags["F_real_nonnegative"] and flags["min_op_norm_le_1"]


def test_cohen_up_flags_dense_norms(small_grid):
    T = interval_set(small_grid, [[-1, 1]])
    O = interval_set(small_grid.dual(), [[-1, 1]])
    rep = cohen_up_bound(SeparableGaussianWigner(1.0), T, O, 0.1, 0.1)
    assert rep.op_norms["method"] == "dense"
    assert rep.hypothesis_flags["min_op_norm_le_1"]


def test_report_verdict_invariant(grid, rng):
    for _ in range(4):
        f = random_mixture(rng, grid)
        T = interval_set(grid, [[-1.5, 1.5]])
        O = interval_set(grid.dual(), [[-1.5, 1.5]])
        for rep in (localization_report(f, T, O), cohen_report(f, SeparableGaussianWigner(1.0), T, O)):
            if all(rep.hypothesis_flags.values()):
                expected = rep.product_TOmega >= max(rep.bound_classical, rep.bound_improved) - 1e-12
                assert rep.satisfied == expected
            d = rep.to_dict()
            for key in ("eps_T", "eps_Omega", "measure_T", "measure_Omega", "bound_classical", "bound_improved",
                        "r_star", "hypothesis_flags", "product_TOmega", "satisfied", "lattice"):
                assert key in d


def test_end_to_end_gaussian(grid, sets):
    T, O = sets
    f = gaussian("Phi", 1.0, grid)
    et, eo = measured_epsilons(f, T, O, 1.0, 1.0)
    assert et + eo <= 1
    assert set_measure(T) * set_measure(O) == 16.0
    assert 16.0 >= ds_bound_optimize(et, eo, 1, 1e3).bound


def test_pipelines_agree_on_verdicts(grid, rng):
    for ti, oi in [([[-2, 2]], [[-2, 2]]), ([[-1, 1]], [[-1, 1]]), ([[-3, 0]], [[0, 3]])]:
        f = random_mixture(rng, grid)
        T, O = interval_set(grid, ti), interval_set(grid.dual(), oi)
        a = localization_report(f, T, O)
        b = cohen_report(f, SeparableGaussianWigner(1.0), T, O)
        assert abs(a.eps_T - b.eps_T) < 1e-10 and abs(a.eps_Omega - b.eps_Omega) < 1e-10
        assert a.applicable == b.applicable
        if a.applicable:
            assert a.satisfied == b.satisfied


# ---------------------------------------------------------------------------
# Scaling experiment
# ---------------------------------------------------------------------------

def test_scaling_slopes():
    assert abs(scaling_experiment(2.0).slope) < 0.02
    s4 = scaling_experiment(4.0)
    assert abs(s4.slope + 0.5) < 0.05 * 0.5 and s4.expected == -0.5
    s1 = scaling_experiment(1.0)
    assert abs(s1.slope - 1.0) < 0.05


def test_scaling_rejects_degenerate():
    with pytest.raises(ValueError):
        scaling_experiment(2.0, 2.0, [2.0, 2.0])
    with pytest.raises(ValueError):
        scaling_experiment(2.0, 2.0, [0.0, 1.0])


def test_boundedness_predicate_matches_experiment():
    g = make_grid(1024, 1 / 32)
    base = gaussian("Phi", 1.0, g)
    lams = (1.0, 2.0, 4.0, 8.0)
    # on the segment: ratio stays below the Wigner constant
    r, s, p = 3.0, 1.5, 4.0
    assert wigner_bounded(r, s, p)
    for lam in lams:
        u = dilate(base, lam)
        ratio = lp_norm(wigner(u, u), p) / (lp_norm(u, r) * lp_norm(u, s))
        assert ratio <= 1.01 * c_const(p, r)
    # off the segment: the ratio grows without bound under dilation
    assert not wigner_bounded(4.0, 4.0, 4.0)
    assert abs(scaling_experiment(4.0, 4.0, lams).slope) > 0.4
