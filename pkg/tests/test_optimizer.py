import numpy as np
import pytest

from hextop.element import element_stiffness
from hextop.fea import Material
from hextop.mesh import build_mesh
from hextop.optimizer import BisectionError, OptConfig, initial_design, oc_update, physical_density, run
from hextop.problems import get_problem, resolve

from oracles import dense_compliance

K0 = element_stiffness()


def small_mbb(dims=(6, 4)):
    mesh = build_mesh(dims)
    return mesh, resolve(get_problem("mbb"), mesh)


def hand_instance():
    n = build_mesh((6, 4)).nelem
    rng = np.random.default_rng(11)
    x = rng.uniform(0.2, 0.8, n)
    dc = -rng.uniform(0.1, 5.0, n) ** 2
    dv = np.full(n, 1.0 / (0.4 * n))
    return x, dc, dv


def test_config_validation():
    assert OptConfig(filter="heaviside", rfill=1.0).move == 0.1
    assert OptConfig(filter="none").move == 0.2
    for kw in [dict(volfrac=1.0), dict(filter="dens"), dict(filter="x", rfill=1), dict(move=0.0, filter="none")]:
        with pytest.raises(ValueError):
            OptConfig(**kw)


def test_uniform_fixed_point():
    n = 22
    cfg = OptConfig(volfrac=0.4, filter="none")
    xn, lam = oc_update(np.full(n, 0.4), np.full(n, -3.0), np.full(n, 1 / (0.4 * n)), cfg)
    np.testing.assert_allclose(xn, 0.4, rtol=1e-3)
    assert np.mean(xn) <= 0.4


def test_move_limit_and_bounds():
    x, dc, dv = hand_instance()
    for move in (0.05, 0.2, 0.6):
        # target within reach of every move limit
        cfg = OptConfig(volfrac=float(np.mean(x)) - 0.02, filter="none", move=move)
        xn, _ = oc_update(x, dc, dv, cfg)
        assert np.all(np.abs(xn - x) <= move + 1e-12)
        assert np.all((xn >= 0) & (xn <= 1))


def test_bisection_vs_grid_search():
    x, dc, dv = hand_instance()
    cfg = OptConfig(volfrac=0.4, filter="none", move=0.2, bisection_tol=1e-10)
    xn, lam = oc_update(x, dc, dv, cfg)
    assert abs(np.mean(xn) - 0.4) <= 1e-6

    # exhaustive log-grid oracle, 10^6 points
    grid = np.logspace(-4, 6, 1_000_000)
    lo, hi = np.maximum(0, x - 0.2), np.minimum(1, x + 0.2)
    vols = np.empty(grid.size)
    for s in range(0, grid.size, 50_000):
        g = grid[s:s + 50_000, None]
        vols[s:s + 50_000] = np.clip(x * np.sqrt(-dc / (g * dv)), lo, hi).mean(axis=1)
    k = int(np.argmax(vols <= 0.4))
    assert 0 < k < grid.size - 1 and vols[k - 1] > 0.4
    assert grid[k - 1] <= lam <= grid[k] * (1 + 1e-9)
    assert abs(vols[k] - 0.4) <= 1e-4


def test_default_tolerance_never_overshoots():
    x, dc, dv = hand_instance()
    xn, _ = oc_update(x, dc, dv, OptConfig(volfrac=0.4, filter="none"))
    assert 0.4 - 1e-3 <= np.mean(xn) <= 0.4


def test_positive_noise_clamped():
    x, dc, dv = hand_instance()
    dc = dc.copy()
    dc[0] = 1e-14
    xn, _ = oc_update(x, dc, dv, OptConfig(volfrac=0.4, filter="none"))
    assert np.isfinite(xn).all() and xn[0] == max(0.0, x[0] - 0.2)


def test_unreachable_target():
    n = 10
    cfg = OptConfig(volfrac=0.3, filter="none", lmax=1e-6)
    with pytest.raises(BisectionError, match="interval"):
        oc_update(np.full(n, 0.9), np.full(n, -1.0), np.full(n, 1.0), cfg)


def test_passive_pinning_in_update():
    x, dc, dv = hand_instance()
    mask = np.zeros(x.size, dtype=int)
    mask[:3], mask[3:5] = 1, -1
    xn, _ = oc_update(x, dc, dv, OptConfig(volfrac=0.4, filter="none"), mask)
    assert np.all(xn[:3] == 1) and np.all(xn[3:5] == 0)


def test_initial_design_totals():
    mask = np.zeros(50, dtype=int)
    mask[:5], mask[5:15] = 1, -1
    x = initial_design(50, 0.4, mask)
    assert abs(x.sum() - 20) < 1e-12
    assert np.all(x[:5] == 1) and np.all(x[5:15] == 0)
    np.testing.assert_allclose(initial_design(7, 0.3), 0.3)


def test_first_iteration_matches_direct_solve():
    mesh, prob = small_mbb()
    st = run(mesh, prob.loads, prob.fixed_dofs, OptConfig(filter="none", maxiter=1), k0=K0)
    c_ref, _ = dense_compliance(mesh, np.full(mesh.nelem, 0.5), K0.k0, prob.loads, prob.fixed_dofs)
    assert abs(st.history[0].compliance - c_ref) <= 1e-10 * c_ref


@pytest.mark.parametrize("mode", ["none", "sens", "dens", "heaviside"])
def test_volume_constraint_every_iteration(mode):
    mesh, prob = small_mbb((12, 6))
    cfg = OptConfig(volfrac=0.45, filter=mode, rfill=2.5, maxiter=25, change_tol=0)
    seen = []

    def cb(state, rec):
        field = state.xphys if mode == "heaviside" else state.x
        seen.append((rec.volume, float(np.mean(field))))

    st = run(mesh, prob.loads, prob.fixed_dofs, cfg, k0=K0, callback=cb)
    assert len(st.history) == 25
    for rec_vol, vol in seen:
        assert vol <= 0.45 + 1e-6
        assert abs(rec_vol - vol) < 1e-12
    assert all(0 <= v <= 1 for v in (st.x.min(), st.x.max(), st.xphys.min(), st.xphys.max()))


def test_passive_field_respected_every_iteration():
    mesh = build_mesh((20, 10))
    prob = resolve(get_problem("passive-cantilever"), mesh)
    assert np.any(prob.mask == 1) and np.any(prob.mask == -1)
    cfg = OptConfig(volfrac=0.4, filter="dens", rfill=2.0, maxiter=10, change_tol=0)

    def cb(state, rec):
        assert np.all(state.xphys[prob.mask == 1] == 1.0)
        assert np.all(state.xphys[prob.mask == -1] == 0.0)

    run(mesh, prob.loads, prob.fixed_dofs, cfg, mask=prob.mask, k0=K0, callback=cb)


def test_load_scale_invariance():
    mesh, prob = small_mbb((12, 6))
    cfg = OptConfig(filter="sens", rfill=2.5, maxiter=15, change_tol=0)
    xs1, xs2 = [], []
    run(mesh, prob.loads, prob.fixed_dofs, cfg, k0=K0, callback=lambda s, r: xs1.append(s.x.copy()))
    run(mesh, 2 * prob.loads, prob.fixed_dofs, cfg, k0=K0, callback=lambda s, r: xs2.append(s.x.copy()))
    for a, b in zip(xs1, xs2):
        assert np.max(np.abs(a - b)) <= 1e-10


def test_deterministic():
    mesh, prob = small_mbb((12, 6))
    cfg = OptConfig(filter="heaviside", rfill=2.5, maxiter=8, change_tol=0)
    a = run(mesh, prob.loads, prob.fixed_dofs, cfg, k0=K0)
    b = run(mesh, prob.loads, prob.fixed_dofs, cfg, k0=K0)
    assert [r.compliance for r in a.history] == [r.compliance for r in b.history]
    assert np.array_equal(a.xphys, b.xphys)


def test_stops_on_change_tolerance():
    mesh, prob = small_mbb((12, 6))
    st = run(mesh, prob.loads, prob.fixed_dofs, OptConfig(filter="sens", rfill=2.5, change_tol=0.05), k0=K0)
    assert st.history[-1].change < 0.05 and len(st.history) < 200


def test_heaviside_beta_schedule_in_run():
    mesh, prob = small_mbb((6, 4))
    cfg = OptConfig(filter="heaviside", rfill=2.0, maxiter=130, change_tol=0)
    st = run(mesh, prob.loads, prob.fixed_dofs, cfg, k0=K0)
    betas = [r.beta for r in st.history]
    assert betas[0] == 1 and betas[59] == 1 and betas[60] == 2 and betas[120] == 4
    # caller's spec is not mutated
    assert cfg.heaviside.beta == 1


def test_physical_density_modes():
    mesh = build_mesh((4, 3))
    from hextop.filters import HeavisideSpec, build_filter

    op = build_filter(mesh.centroids, 2.0)
    x = np.linspace(0, 1, mesh.nelem)
    for mode in ("none", "sens"):
        xt, xp = physical_density(x, mode, None, None)
        assert np.array_equal(xp, x)
    xt, xp = physical_density(x, "heaviside", op, HeavisideSpec(beta=4), form="standard")
    np.testing.assert_allclose(xt, op.rownorm @ x)
    assert np.all((xp >= 0) & (xp <= 1))


def test_material_penalty_changes_result():
    mesh, prob = small_mbb()
    c = [run(mesh, prob.loads, prob.fixed_dofs, OptConfig(filter="none", maxiter=1), material=Material(penal=p),
             k0=K0).compliance for p in (1.0, 3.0)]
    assert c[1] > c[0]
