import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vosperstab import (DensityFunction, GrowthFunction, PreconditionError, ResidueSet, TorusHom, baby_arl,
                        final_arl, find_relation, intermediate_arl)
from vosperstab.arl import grid_from_partition
from vosperstab.checks import all_ok, check_decomposition
from vosperstab.lattice import reference_relation_scan
from vosperstab.generators import ap_plus_noise, random_set

MILD = GrowthFunction.affine(1, 3)


def failed(checks):
    return [c for c in checks if not c.ok]


def test_intermediate_constant():
    f = DensityFunction.constant(401, 0.35)
    dec = intermediate_arl(f, 0.25, MILD)
    assert dec.d == 0 and dec.M == 1
    assert dec.f_str.allclose(f, atol=1e-13)
    assert all_ok(check_decomposition(f, dec, MILD))


def test_final_constant_needs_no_reduction():
    f = DensityFunction.constant(101, 0.6)
    dec = final_arl(f, 0.25, MILD)
    assert dec.level == "final" and dec.log["reductions"] == []
    assert all_ok(check_decomposition(f, dec, MILD))


def test_final_interval():
    f = ResidueSet(1009, range(300, 500)).indicator()
    dec = final_arl(f, 0.3, MILD)
    checks = check_decomposition(f, dec, MILD)
    assert all_ok(checks), failed(checks)
    assert find_relation(dec.phi, int(np.ceil(MILD(dec.M)))) is None
    assert len(dec.log["reductions"]) <= max(1, dec.log["d"])


def test_intermediate_lipschitz_and_smoothing_budget():
    f = ap_plus_noise(401, 40, 2, diff=37, seed=2).residue_set().indicator()
    dec = intermediate_arl(f, 0.25, GrowthFunction.affine(1, 15))
    assert all_ok(check_decomposition(f, dec))
    assert dec.F.lipschitz_bound() <= dec.M * (1 + 1e-12)
    # the chosen Fejer order is the smallest one meeting eps/2
    trail = dict(dec.log["K_trail"])
    K = dec.log["K"]
    assert trail[K] <= 0.125
    if K > 1:
        assert trail[K - 1] > 0.125


def test_reduction_log_respects_dKM():
    f = ap_plus_noise(1009, 50, 1, seed=1).residue_set().indicator()
    dec = final_arl(f, 0.25, GrowthFunction.affine(1, 25))
    for step in dec.log["reductions"]:
        assert step["lipschitz_after"] <= step["dKM"]
        assert step["d_before"] >= 2
    assert all_ok(check_decomposition(f, dec))


def test_grid_from_partition_reproduces_f_str():
    f = ap_plus_noise(1009, 50, 1, seed=1).residue_set().indicator()
    baby = baby_arl(f, 0.125, GrowthFunction.affine(1, 25))
    Fp = grid_from_partition(baby.f_str, baby.gamma, baby.n)
    phi = TorusHom(1009, baby.gamma)
    assert np.allclose(Fp(phi()), baby.f_str.values, atol=1e-15)
    assert 0 <= Fp.values.min() and Fp.values.max() <= 1


def test_rejects_bad_input():
    with pytest.raises(PreconditionError):
        intermediate_arl(DensityFunction.constant(11, 0.5), 0.0, MILD)
    with pytest.raises(PreconditionError):
        final_arl(DensityFunction(5, np.array([0, 1.5, 0, 0, 0])), 0.25, MILD)


def test_escalation_history_recorded():
    f = random_set(211, 0.3, seed=4).residue_set().indicator()
    dec = final_arl(f, 0.25, MILD)
    hist = dec.log["escalations"]
    assert hist and hist[-1]["unf_max"] <= hist[-1]["bound"] + 1e-12


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([101, 211, 401]), st.floats(0.05, 0.5), st.integers(0, 2**32 - 1))
def test_final_decomposition_properties_random(p, density, seed):
    f = random_set(p, density, seed=seed).residue_set().indicator()
    dec = final_arl(f, 0.3, MILD)
    checks = check_decomposition(f, dec, MILD)
    assert all_ok(checks), failed(checks)
    if dec.d:
        assert reference_relation_scan(dec.phi, int(np.ceil(MILD(dec.M)))) is None
