import numpy as np
import pytest
from hypothesis import given, strategies as st

from edfix.errors import DomainError, MutationSkipped
from edfix.gen import (
    KAPPA_KINDS,
    MUTATIONS,
    SPACE_KINDS,
    GenProfile,
    gen_instance,
    gen_kappa,
    gen_map,
    gen_space,
    mutate,
    positive_checks,
    targeted_check_fails,
)
from edfix.instance import canonical, instance_hash, parse_instance
from edfix.mt import PiecewiseLinearGauge
from edfix.solver import check_S1, check_S3, fixed_points, verify_theorem
from edfix.spaces import classify, validate_metric

profiles = st.builds(
    GenProfile,
    seed=st.integers(0, 2**64 - 1),
    n_points=st.integers(2, 9),
    space_kind=st.sampled_from(SPACE_KINDS),
    kappa_kind=st.sampled_from(KAPPA_KINDS),
    map_kind=st.sampled_from(("constant-target", "funnel", "random-rejection")),
    theorem_target=st.sampled_from(("T2.1", "T2.2", "T2.3", "T2.4", "T1.1", "MT", "Nadler", "Banach")),
)


def test_profile_validation():
    with pytest.raises(DomainError):
        GenProfile(n_points=1)
    with pytest.raises(DomainError):
        GenProfile(n_points=201)
    with pytest.raises(DomainError):
        GenProfile(seed=-1)
    with pytest.raises(DomainError):
        GenProfile(map_kind="spiral")


def test_line_profile():
    space = gen_space(GenProfile(n_points=3, space_kind="line"))
    assert space.d.tolist() == [[0, 1, 3], [1, 0, 2], [3, 2, 0]]


@given(st.integers(0, 2**64 - 1), st.integers(2, 30), st.sampled_from(SPACE_KINDS))
def test_spaces_are_metric(seed, n, kind):
    space = gen_space(GenProfile(seed=seed, n_points=n, space_kind=kind))
    assert validate_metric(space)["metric"]
    assert np.all(space.d * 64 == np.round(space.d * 64)) and space.d.max() < 2**10


@given(st.integers(0, 2**64 - 1), st.integers(2, 12), st.sampled_from(KAPPA_KINDS))
def test_kappas_are_e0(seed, n, kind):
    p = GenProfile(seed=seed, n_points=n, kappa_kind=kind)
    k = gen_kappa(p, gen_space(p))
    assert classify(k)["is_e0_distance"]
    if kind == "metric":
        assert classify(k).all_pass


@given(profiles)
def test_positive_generation(profile):
    inst = gen_instance(profile)
    assert all(positive_checks(inst, profile.theorem_target).values())


@given(profiles)
def test_generation_is_deterministic(profile):
    a, b = gen_instance(profile), gen_instance(profile)
    assert canonical(a) == canonical(b)
    assert instance_hash(parse_instance(canonical(a))) == instance_hash(a)


def test_constant_target_passes_S1_and_S3():
    for seed in range(10):
        p = GenProfile(seed=seed, n_points=6, map_kind="constant-target")
        space = gen_space(p)
        k = gen_kappa(p, space)
        mu = PiecewiseLinearGauge.constant(0.5)
        T = gen_map(p, space, k, mu).T
        assert check_S1(k, T, mu).passed and check_S3(k, T, mu).passed


def test_funnel_on_twelve_points():
    for seed in range(10):
        p = GenProfile(seed=seed, n_points=12, map_kind="funnel", theorem_target="T2.2", kappa_kind="asymmetric-closure")
        inst = gen_instance(p)
        assert check_S3(inst.kappa, inst.T, inst.mu).passed
        assert fixed_points(inst.T)


def test_cycle_on_two_points():
    p = GenProfile(seed=1, n_points=2, map_kind="cycle")
    space = gen_space(p)
    k = gen_kappa(p, space)
    mu = PiecewiseLinearGauge.constant(0.5)
    T = gen_map(p, space, k, mu).T
    assert fixed_points(T) == ()
    assert not check_S1(k, T, mu).passed


def test_no_mutation_is_identity():
    inst = gen_instance(GenProfile(seed=5, theorem_target="T2.4"))
    same, delta = mutate(inst, None, 5)
    assert delta is None and canonical(same) == canonical(inst)


@given(st.sampled_from(MUTATIONS), st.sampled_from(("T2.1", "T2.2", "T2.3", "T2.4")), st.integers(0, 10**6), st.integers(3, 9))
def test_mutants_fail_their_target(mutation, target, seed, n):
    inst = gen_instance(GenProfile(seed=seed, n_points=n, theorem_target=target,
                                   kappa_kind=KAPPA_KINDS[seed % 3], space_kind=SPACE_KINDS[seed % 3]))
    try:
        mutant, delta = mutate(inst, mutation, seed)
    except MutationSkipped:
        return
    assert targeted_check_fails(mutant, delta)
    assert verify_theorem(mutant, target).status == "hypothesis-fail"


def test_drop_z_fails_at_recorded_pair():
    for seed in range(40):
        inst = gen_instance(GenProfile(seed=seed, n_points=6, theorem_target="T2.1"))
        try:
            mutant, delta = mutate(inst, "drop-z", seed)
        except MutationSkipped:
            continue
        x, y = delta["pair"]
        assert all(z not in mutant.T[y] for z in delta["removed"])
        assert not check_S1(mutant.kappa, mutant.T, mutant.mu).passed
        return
    pytest.fail("no drop-z candidate in 40 seeds")


def test_zero_offdiagonal_breaks_tau3():
    inst = gen_instance(GenProfile(seed=2, theorem_target="T2.2", mutation="zero-offdiagonal"))
    assert not classify(inst.kappa)["tau3"]
    assert inst.provenance["mutation"]["target"] == "tau3"
