"""Structural-function side: recovery routes, partitions, validation, I/O."""

import numpy as np
import pytest

from bn2pscm.bn import Cpt, Variable, bn_to_dict, conditional_query, validate_bn
from bn2pscm.errors import (
    DomainError,
    NotDeterministicError,
    PartitionError,
    ShapeError,
)
from bn2pscm.pscm import (
    Partition,
    PscmModel,
    as_bn,
    det_cpt_from_function,
    equivalence_check,
    function_from_det_cpt,
    inverse_image,
    load_pscm,
    probability_assignment,
    pscm_from_dict,
    pscm_to_dict,
    recover_via_inverse,
    recover_via_marginalization,
    save_pscm,
    validate_pscm,
)

DOMAINS = {"T": ("y", "n"), "B": ("n", "y"), "R": ("one", "two", "three")}


def _b_det_cpt(ex1_pscm):
    return ex1_pscm.det_cpts["B"]


def test_structural_function_roundtrip(ex1_pscm):
    f = function_from_det_cpt(_b_det_cpt(ex1_pscm), DOMAINS)
    assert f.child == "B" and f.exo_name == "R"
    assert f.parent_names == ("T",)
    assert f(("y",), "one") == "n"
    assert f(("y",), "three") == "y"
    assert f(("n",), "one") == "y"
    back = det_cpt_from_function(f)
    assert back.parents == ("T", "R")
    assert np.array_equal(back.rows, _b_det_cpt(ex1_pscm).rows)


def test_function_rejects_soft_rows():
    soft = Cpt.build("B", ("T", "R"), (("y", "n"), ("one", "two", "three")),
                     np.full((6, 2), 0.5))
    with pytest.raises(NotDeterministicError):
        function_from_det_cpt(soft, DOMAINS)


def test_function_exo_not_last(ex1_pscm):
    # same table with the exogenous parent in front: exo_index preserved
    base = _b_det_cpt(ex1_pscm)
    f0 = function_from_det_cpt(base, DOMAINS)
    swapped_rows = []
    for r_val in DOMAINS["R"]:
        for t_val in DOMAINS["T"]:
            swapped_rows.append(base.row_for((t_val, r_val)))
    swapped = Cpt.build("B", ("R", "T"), (DOMAINS["R"], DOMAINS["T"]),
                        np.array(swapped_rows))
    f1 = function_from_det_cpt(swapped, DOMAINS, exo_parent="R")
    assert f1.exo_index == 0
    for cfg in f0.configs:
        for u in f0.exo_domain:
            assert f0(cfg, u) == f1(cfg, u)
    assert np.array_equal(det_cpt_from_function(f1).rows, swapped.rows)


def test_inverse_image(ex1_pscm):
    f = function_from_det_cpt(_b_det_cpt(ex1_pscm), DOMAINS)
    assert inverse_image(f, ("y",), "n") == ("one", "two")
    assert inverse_image(f, ("y",), "y") == ("three",)
    assert inverse_image(f, ("n",), "n") == ("two", "three")
    assert f.is_surjective()


def test_recovery_routes_agree(ex1_pscm, sec2_pscm, ex2_pscm):
    for pscm, expected_b in (
        (ex1_pscm, [[0.99, 0.01], [0.1, 0.9]]),
        (sec2_pscm, [[0.99, 0.01], [0.01, 0.99]]),
        (ex2_pscm, [[0.99, 0.01], [0.1, 0.9]]),
    ):
        via_inv = recover_via_inverse(pscm, "B")
        via_marg = recover_via_marginalization(pscm, "B")
        assert np.allclose(via_inv.rows, expected_b, atol=1e-12)
        # the two recovery identities must agree essentially exactly
        assert np.abs(via_inv.rows - via_marg.rows).max() <= 1e-12
        assert via_inv.parents == ("T",)


def test_recover_root_variable(ex1_pscm):
    t = recover_via_inverse(ex1_pscm, "T")
    assert t.parents == ()
    assert np.allclose(t.rows, [[0.5, 0.5]])


def test_equivalence_check_passes(ex1_bn, ex1_pscm, ex2_pscm):
    for pscm in (ex1_pscm, ex2_pscm):
        report = equivalence_check(ex1_bn, pscm)
        assert report.passed and report.max_deviation <= 1e-12
        assert report.diffs == []


def test_equivalence_check_reports_deviation(ex1_bn, ex1_pscm):
    # replace R's distribution with a uniform-ish one: B's row drifts
    broken = PscmModel(
        endogenous=ex1_pscm.endogenous,
        exogenous=ex1_pscm.exogenous,
        exo_dists={"U_T": ex1_pscm.exo_dists["U_T"],
                   "R": np.array([0.5, 0.0, 0.5])},
        det_cpts=ex1_pscm.det_cpts,
        exo_attach=ex1_pscm.exo_attach,
    )
    report = equivalence_check(ex1_bn, broken)
    assert not report.passed
    # P'(B=n|T=y) = 0.5 vs 0.99
    assert report.max_deviation == pytest.approx(0.49)
    assert any(d.variable == "B" for d in report.diffs)


def test_equivalence_check_alignment_errors(ex1_bn, ex1_pscm, sec2_bn):
    other = PscmModel(
        endogenous=(Variable("T", ("y", "n")),),
        exogenous=(Variable("U_T", ("y", "n")),),
        exo_dists={"U_T": np.array([0.5, 0.5])},
        det_cpts={"T": ex1_pscm.det_cpts["T"]},
        exo_attach={"T": "U_T"},
    )
    with pytest.raises(ShapeError):
        equivalence_check(ex1_bn, other)  # variable sets differ


def test_partition_basics():
    p = Partition(("one", "two", "three"), [("two",), ("one", "three")])
    p.validate()
    assert p.canonical_blocks == (("one", "three"), ("two",))
    q = Partition(("one", "two", "three"), [("three", "one"), ("two",)])
    assert p == q and hash(p) == hash(q)
    with pytest.raises(DomainError):
        Partition(("one", "two"), [("one", "nope")])


def test_partition_violations():
    overlapping = Partition(("a", "b", "c"), [("a", "b"), ("b", "c")])
    with pytest.raises(PartitionError) as exc:
        overlapping.validate()
    assert exc.value.overlapping and not exc.value.non_exhaustive

    gappy = Partition(("a", "b", "c"), [("a",)])
    with pytest.raises(PartitionError) as exc:
        gappy.validate()
    assert exc.value.non_exhaustive and not exc.value.overlapping


def test_probability_assignment():
    dist = np.array([0.9, 0.09, 0.01])
    p = Partition(("one", "two", "three"), [("one", "two"), ("three",)])
    out = probability_assignment(dist, p)
    assert np.allclose(out, [0.99, 0.01])
    assert out.sum() == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        probability_assignment(np.array([0.5, 0.5]), p)
    with pytest.raises(PartitionError):
        probability_assignment(dist, Partition(("one", "two", "three"),
                                               [("one", "two"), ("two", "three")]))


def test_validate_pscm_clean(ex1_pscm, sec2_pscm, ex2_pscm):
    for pscm in (ex1_pscm, sec2_pscm, ex2_pscm):
        report = validate_pscm(pscm)
        assert report.ok, report.summary()


def test_validate_pscm_violations(ex1_pscm):
    # soft row in a deterministic CPT
    soft = PscmModel(
        endogenous=ex1_pscm.endogenous,
        exogenous=ex1_pscm.exogenous,
        exo_dists=dict(ex1_pscm.exo_dists),
        det_cpts={
            "T": ex1_pscm.det_cpts["T"],
            "B": Cpt.build("B", ("T", "R"),
                           (("y", "n"), ("one", "two", "three")),
                           np.full((6, 2), 0.5)),
        },
        exo_attach=dict(ex1_pscm.exo_attach),
    )
    assert "row-not-one-hot" in {i.code for i in validate_pscm(soft).issues}

    unnormalized = PscmModel(
        endogenous=ex1_pscm.endogenous,
        exogenous=ex1_pscm.exogenous,
        exo_dists={"U_T": np.array([0.5, 0.5]), "R": np.array([0.9, 0.2, 0.1])},
        det_cpts=dict(ex1_pscm.det_cpts),
        exo_attach=dict(ex1_pscm.exo_attach),
    )
    assert "dist-not-normalized" in {
        i.code for i in validate_pscm(unnormalized).issues}

    shared = PscmModel(
        endogenous=ex1_pscm.endogenous,
        exogenous=(ex1_pscm.exogenous[1],),
        exo_dists={"R": ex1_pscm.exo_dists["R"]},
        det_cpts=dict(ex1_pscm.det_cpts),
        exo_attach={"T": "R", "B": "R"},
    )
    assert "exo-reused" in {i.code for i in validate_pscm(shared).issues}


def test_validate_pscm_surjectivity_warning(ex1_pscm):
    # a child value never produced: flagged, but only as a warning
    rows = np.tile([1.0, 0.0], (6, 1))  # B = n always
    constant = PscmModel(
        endogenous=ex1_pscm.endogenous,
        exogenous=ex1_pscm.exogenous,
        exo_dists=dict(ex1_pscm.exo_dists),
        det_cpts={"T": ex1_pscm.det_cpts["T"],
                  "B": Cpt.build("B", ("T", "R"),
                                 (("y", "n"), ("one", "two", "three")), rows)},
        exo_attach=dict(ex1_pscm.exo_attach),
    )
    report = validate_pscm(constant)
    assert report.ok  # warnings do not fail validation
    assert "not-surjective" in {i.code for i in report.issues}
    assert all(i.severity == "warning" for i in report.issues)


def test_as_bn_embedding(ex1_bn, ex1_pscm):
    embedded = as_bn(ex1_pscm)
    names = [v.name for v in embedded.variables]
    assert names == ["T", "B", "U_T", "R"]
    assert validate_bn(embedded).ok
    # exogenous marginals are their declared distributions
    assert np.allclose(conditional_query(embedded, "R", {}), [0.9, 0.09, 0.01])
    # endogenous conditionals match the source network
    assert np.allclose(conditional_query(embedded, "B", {"T": "y"}),
                       conditional_query(ex1_bn, "B", {"T": "y"}), atol=1e-12)
    assert np.allclose(conditional_query(embedded, "B", {"T": "n"}),
                       conditional_query(ex1_bn, "B", {"T": "n"}), atol=1e-12)


def test_dict_roundtrip(ex1_pscm):
    data = pscm_to_dict(ex1_pscm)
    back = pscm_from_dict(data)
    assert pscm_to_dict(back) == data
    assert back.exo_attach == ex1_pscm.exo_attach
    assert np.array_equal(back.exo_dists["R"], ex1_pscm.exo_dists["R"])
    assert np.array_equal(back.det_cpts["B"].rows, ex1_pscm.det_cpts["B"].rows)


def test_from_dict_rejects_double_attachment(ex1_pscm):
    data = pscm_to_dict(ex1_pscm)
    for exo in data["exogenous"]:
        exo["attached_to"] = "B"
    with pytest.raises(ShapeError):
        pscm_from_dict(data)


def test_file_roundtrip(tmp_path, ex1_pscm):
    path = tmp_path / "pscm.json"
    save_pscm(ex1_pscm, path)
    assert pscm_to_dict(load_pscm(path)) == pscm_to_dict(ex1_pscm)
