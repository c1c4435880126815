import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qswap.core import Circuit, ControlledByRegister, Gate, Measure
from qswap.gates import canonical, fourier_pair
from qswap.rewrite import (RULES, RuleError, Site, StructureError, apply_rule, certify,
                           check_channel_equiv, check_equiv_on_inputs, check_unitary_equiv,
                           emit_trailing)
from qswap.sim import kraus_map

import oracle

ONE_WIRE = ["X", "XD", "Z", "ZD", "F", "FD"]
TWO_WIRE = ["CX", "CXD", "CZ", "CZD"]


def C(d, n, *ins, **kw):
    return Circuit(d, n, [Gate(*i) if isinstance(i, tuple) else i for i in ins], **kw)


def fig3_right(d):
    return C(d, 3, ("CX", (0, 1)), ("CX", (1, 2)), (canonical("CXD", d), (0, 1)),
             (canonical("CXD", d), (1, 2)))


# -- checkers ------------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 5])
def test_unitary_equiv_four_coupling_expansion(d):
    rep = check_unitary_equiv(C(d, 3, ("CX", (0, 2))), fig3_right(d))
    assert rep.passed and rep.max_deviation < 1e-10
    # independent digit arithmetic: |x,y,z> -> |x,y,z+x>
    perm = oracle.permutation(lambda ds: (ds[0], ds[1], (ds[2] + ds[0]) % d), d, 3)
    np.testing.assert_allclose(oracle.unitary([(g.name, g.wires) for g in fig3_right(d).instructions],
                                              d, 3), perm, atol=1e-12)


def test_unitary_equiv_cx_vs_cz_fails():
    rep = check_unitary_equiv(C(2, 2, ("CX", (0, 1))), C(2, 2, ("CZ", (0, 1))))
    assert not rep.passed
    assert rep.max_deviation == pytest.approx(1.0)
    assert rep.frobenius == pytest.approx(2.0)


def test_unitary_equiv_global_phase_flag():
    # Z X Z^dag X^dag = w I on a qutrit: a pure phase
    c1 = C(3, 1, ("XD", (0,)), ("ZD", (0,)), ("X", (0,)), ("Z", (0,)))
    c2 = C(3, 1)
    assert not check_unitary_equiv(c1, c2).passed
    assert check_unitary_equiv(c1, c2, up_to_global_phase=True).passed


def test_unitary_equiv_structure_errors():
    with pytest.raises(StructureError):
        check_unitary_equiv(C(2, 2), C(2, 3))
    with pytest.raises(StructureError):
        check_unitary_equiv(C(2, 1, Measure(0, "a")), C(2, 1))


def fig5(d):
    """Expanded first coupling, Fourier sandwich on the second."""
    f, fd = fourier_pair(d)
    return C(d, 3, ("CX", (0, 1)), ("CX", (1, 2)), (canonical("CXD", d), (0, 1)),
             (canonical("CXD", d), (1, 2)), (fd, (0,)), (canonical("CZD", d), (0, 2)), (f, (0,)),
             inputs={1: "chi", 2: 0}, outputs={0: 0, 1: "chi"})


def fig6(d):
    c = fig5(d)
    return c.with_instructions(c.instructions[1:])


@pytest.mark.parametrize("d", [2, 3, 5])
def test_equiv_on_inputs_drop_leading_coupling(d):
    assert check_equiv_on_inputs(fig5(d), fig6(d)).passed


@pytest.mark.parametrize("d", [2, 3])
def test_equiv_on_inputs_fails_with_wrong_ancilla(d):
    rep = check_equiv_on_inputs(fig5(d).declare(outputs={1: "psi"}),
                                fig6(d).declare(outputs={1: "psi"}), constraint={1: 1})
    assert not rep.passed


def test_equiv_on_inputs_plain_comparison_without_declarations():
    # no declarations: every input is free, so this is unitary equivalence
    assert check_equiv_on_inputs(C(3, 3, ("CX", (0, 2))), fig3_right(3)).passed
    assert not check_equiv_on_inputs(C(3, 2, ("CX", (0, 1))), C(3, 2, ("CXD", (0, 1)))).passed


def test_equiv_on_inputs_detects_false_output_declaration():
    c = C(2, 1, ("X", (0,)), inputs={0: 0}, outputs={0: 0})
    rep = check_equiv_on_inputs(c, c)
    assert not rep.passed and "declared outputs" in rep.detail


def test_channel_equiv_deferral():
    early = Circuit(2, 2, [Measure(0, "r"), ControlledByRegister("r", "X", 1)])
    late = C(2, 2, ("CX", (0, 1)), Measure(0, "r"))
    assert check_channel_equiv(early, late).passed
    early3 = Circuit(3, 2, [Measure(0, "r"), ControlledByRegister("r", "Z", 1)])
    late3 = C(3, 2, ("CZ", (0, 1)), Measure(0, "r"))
    assert check_channel_equiv(early3, late3).passed


def test_channel_equiv_measure_and_unconditional_x_do_not_commute():
    a = C(2, 1, Measure(0, "r"), ("X", (0,)))
    b = C(2, 1, ("X", (0,)), Measure(0, "r"))
    assert not check_channel_equiv(a, b).passed


def test_channel_equiv_register_mismatch_is_structural():
    rep = check_channel_equiv(C(2, 1, Measure(0, "a")), C(2, 1, Measure(0, "b")))
    assert not rep.passed and "register" in rep.detail


def test_channel_equiv_register_order_independent():
    a = C(2, 2, Measure(0, "a"), Measure(1, "b"))
    b = C(2, 2, Measure(1, "b"), Measure(0, "a"))
    assert check_channel_equiv(a, b).passed


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.data())
def test_unitary_equiv_is_an_equivalence(d, data):
    def rand():
        k = data.draw(st.integers(0, 3))
        ins = []
        for _ in range(k):
            name = data.draw(st.sampled_from(TWO_WIRE + ONE_WIRE))
            wires = (0, 1) if name in TWO_WIRE else (data.draw(st.integers(0, 1)),)
            ins.append((name, wires))
        return C(d, 2, *ins)
    a, b, c = rand(), rand(), rand()
    assert check_unitary_equiv(a, a).passed
    assert check_unitary_equiv(a, b).passed == check_unitary_equiv(b, a).passed
    ab, bc = check_unitary_equiv(a, b), check_unitary_equiv(b, c)
    if ab.passed and bc.passed:
        assert check_unitary_equiv(a, c, tol=2e-10).passed


# -- rules ------------------------------------------------------------------------

def passes(rule_id, before, after):
    return all(r.passed and r.max_deviation < 1e-10 for r in certify(rule_id, before, after))


def test_expand_on_half_swap():
    c = C(2, 3, ("CX", (0, 2)), ("CX", (2, 0)))
    out = apply_rule(c, "R-EXPAND", Site(0, {"ancilla": 1}))
    assert out.instructions == (Gate("CX", (0, 1)), Gate("CX", (1, 2)), Gate("CX", (0, 1)),
                                Gate("CX", (1, 2)), Gate("CX", (2, 0)))
    assert passes("R-EXPAND", c, out)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("name", ["CX", "CXD"])
def test_expand_sound_for_every_wire_assignment(d, name):
    for ctl, tgt, anc in itertools.permutations(range(3)):
        c = C(d, 3, (name, (ctl, tgt)))
        assert passes("R-EXPAND", c, apply_rule(c, "R-EXPAND", Site(0, {"ancilla": anc})))


def test_expand_needs_distinct_ancilla():
    with pytest.raises(RuleError):
        apply_rule(C(2, 3, ("CX", (0, 2))), "R-EXPAND", Site(0, {"ancilla": 2}))
    with pytest.raises(RuleError):
        apply_rule(C(2, 3, ("CZ", (0, 2))), "R-EXPAND", Site(0, {"ancilla": 1}))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("name", ["CX", "CXD"])
def test_conj_sound_for_every_wire_assignment(d, name):
    for ctl, tgt in itertools.permutations(range(3), 2):
        c = C(d, 3, (name, (ctl, tgt)))
        out = apply_rule(c, "R-CONJ", 0)
        assert out.instructions[1].wires == (tgt, ctl)
        assert passes("R-CONJ", c, out)


def test_conj_qubit_uses_hadamard():
    out = apply_rule(C(2, 2, ("CX", (1, 0))), "R-CONJ", 0)
    assert [g.name for g in out.instructions] == ["H", "CZ", "H"]


@pytest.mark.parametrize("d", [2, 3, 5])
def test_drop(d):
    out = apply_rule(fig5(d), "R-DROP", 0)
    assert out.instructions == fig6(d).instructions
    assert passes("R-DROP", fig5(d), out)


def test_drop_side_conditions():
    with pytest.raises(RuleError, match="chi"):
        apply_rule(fig5(3).declare(inputs={1: 0}), "R-DROP", 0)
    c = C(3, 2, ("F", (1,)), ("CX", (0, 1)), inputs={1: "chi"})
    with pytest.raises(RuleError, match="used before"):
        apply_rule(c, "R-DROP", 1)


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("shift", ["X", "XD", "CX", "CXD"])
def test_drop_sound_for_shift_family(d, shift):
    wires = (1,) if shift in ("X", "XD") else (0, 1)
    c = C(d, 2, (shift, wires), ("CZ", (0, 1)), inputs={1: "chi"})
    assert passes("R-DROP", c, apply_rule(c, "R-DROP", 0))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_absorb_trailing_fourier(d):
    f, fd = fourier_pair(d)
    c = fig6(d)
    out = apply_rule(c, "R-ABSORB", len(c.instructions) - 1)
    assert out.outputs[0] == "chi"
    assert len(out.instructions) == len(c.instructions) - 1
    assert passes("R-ABSORB", c, out)


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("name,out", [("F", 0), ("FD", 0), ("F", "chi"), ("FD", "chi"),
                                      ("X", 1), ("XD", "chi"), ("Z", 0)])
def test_absorb_round_trip(d, name, out):
    c = C(d, 2, ("CX", (0, 1)), (name, (1,)), inputs={1: 0}, outputs={1: out})
    try:
        absorbed = apply_rule(c, "R-ABSORB", 1)
    except RuleError:
        pytest.skip("G^dag|out> leaves the declared-state vocabulary")
    assert emit_trailing(absorbed, 1, name) == c


def test_absorb_side_conditions():
    c = C(2, 2, ("H", (0,)), ("CX", (0, 1)), outputs={0: 0})
    with pytest.raises(RuleError, match="last instruction"):
        apply_rule(c, "R-ABSORB", 0)
    with pytest.raises(RuleError, match="declared output"):
        apply_rule(C(2, 1, ("H", (0,))), "R-ABSORB", 0)
    with pytest.raises(RuleError, match="vocabulary"):
        apply_rule(C(3, 1, ("Z", (0,)), outputs={0: 1}), "R-ABSORB", 0)


def test_commute_disjoint_single_wire_gates():
    c = C(3, 2, ("F", (0,)), ("X", (1,)))
    out = apply_rule(c, "R-COMMUTE", 0)
    assert out.instructions == (Gate("X", (1,)), Gate("F", (0,)))
    assert passes("R-COMMUTE", c, out)


def test_commute_refuses_overlap():
    with pytest.raises(RuleError):
        apply_rule(C(2, 2, ("H", (0,)), ("CX", (0, 1))), "R-COMMUTE", 0)
    # a correction reading a register cannot pass the measurement writing it
    c = Circuit(2, 2, [Measure(0, "a"), ControlledByRegister("a", "X", 1)])
    with pytest.raises(RuleError):
        apply_rule(c, "R-COMMUTE", 0)


def test_addmeas():
    c = C(2, 2, ("H", (0,)), inputs={0: 0}, outputs={0: "chi"})
    out = apply_rule(c, "R-ADDMEAS", Site(None, {"a": 0}))
    assert out.instructions[-1] == Measure(0, "a")
    assert 0 not in out.outputs
    assert passes("R-ADDMEAS", c, out)
    with pytest.raises(RuleError):
        apply_rule(c, "R-ADDMEAS", Site(None, {"a": 1}))


def test_addmeas_certificate_catches_false_declaration():
    c = C(2, 2, ("H", (0,)), inputs={0: 0}, outputs={0: 0})
    out = apply_rule(c, "R-ADDMEAS", Site(None, {"a": 0}))
    assert not passes("R-ADDMEAS", c, out)


def test_defer_on_measured_controlled_phase():
    c = C(3, 3, ("CXD", (1, 2)), ("CZD", (0, 2)), Measure(1, "a_m"), Measure(0, "a_t"))
    out = apply_rule(c, "R-DEFER", Site(0))
    assert out.instructions[:2] == (Measure(1, "a_m"), ControlledByRegister("a_m", "XD", 2))
    out2 = apply_rule(out, "R-DEFER", Site(2))
    assert out2.instructions[2:] == (Measure(0, "a_t"), ControlledByRegister("a_t", "ZD", 2))
    assert passes("R-DEFER", c, out) and passes("R-DEFER", out, out2)


def test_defer_cz_either_wire_controls():
    c = C(3, 2, ("CZ", (0, 1)), Measure(1, "r"))
    out = apply_rule(c, "R-DEFER", Site(0, {"control": 1}))
    assert out.instructions[1] == ControlledByRegister("r", "Z", 0)
    assert passes("R-DEFER", c, out)


def test_defer_side_conditions():
    with pytest.raises(RuleError, match="not measured"):
        apply_rule(C(2, 2, ("CX", (0, 1)), ("H", (0,)), Measure(0, "r")), "R-DEFER", 0)
    with pytest.raises(RuleError, match="not a control"):
        apply_rule(C(2, 2, ("CX", (0, 1)), Measure(1, "r")), "R-DEFER", Site(0, {"control": 1}))


def random_measured_circuit(data, d, n=3):
    """Gates, then a controlled gate whose control is measured later, with filler in between."""
    ins = []
    for _ in range(data.draw(st.integers(0, 3))):
        name = data.draw(st.sampled_from(TWO_WIRE + ONE_WIRE))
        k = 2 if name in TWO_WIRE else 1
        ins.append(Gate(name, tuple(data.draw(st.permutations(range(n)))[:k])))
    ctl, tgt = data.draw(st.permutations(range(n)))[:2]
    site = len(ins)
    ins.append(Gate(data.draw(st.sampled_from(TWO_WIRE)), (ctl, tgt)))
    others = [w for w in range(n) if w != ctl]
    for _ in range(data.draw(st.integers(0, 2))):
        name = data.draw(st.sampled_from(ONE_WIRE + ["CX", "CZD"]))
        if name in TWO_WIRE:
            if len(others) < 2:
                continue
            ins.append(Gate(name, tuple(data.draw(st.permutations(others))[:2])))
        else:
            ins.append(Gate(name, (data.draw(st.sampled_from(others)),)))
    ins.append(Measure(ctl, "r"))
    return Circuit(d, n, ins), site


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_defer_sound_on_random_circuits(d, data):
    c, site = random_measured_circuit(data, d, n=3 if d < 5 else 2)
    out = apply_rule(c, "R-DEFER", site)
    assert passes("R-DEFER", c, out)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_commute_sound_on_random_circuits(d, data):
    c, _ = random_measured_circuit(data, d, n=3 if d < 5 else 2)
    candidates = [i for i in range(len(c.instructions) - 1)
                  if not (c.instructions[i].support & c.instructions[i + 1].support)]
    if not candidates:
        return
    i = data.draw(st.sampled_from(candidates))
    assert passes("R-COMMUTE", c, apply_rule(c, "R-COMMUTE", i))


@pytest.mark.parametrize("d", [2, 3])
def test_defer_preserves_outcome_distribution(d):
    from qswap.protocols import build_bbc
    c = build_bbc(d)
    before = c.with_instructions(c.instructions + (Measure(1, "a_m"), Measure(0, "a_t")))
    after = apply_rule(before, "R-DEFER", 4)
    km_b, km_a = kraus_map(before), kraus_map(after)
    rng = np.random.default_rng(d)
    for _ in range(20):
        psi = oracle.random_state(rng, d**3)
        pb, pa = km_b.probabilities(psi), km_a.probabilities(psi)
        assert pb.keys() == pa.keys()
        for m in pb:
            assert abs(pb[m] - pa[m]) < 1e-10


def test_rule_catalog():
    assert set(RULES) == {"R-EXPAND", "R-CONJ", "R-DROP", "R-ABSORB", "R-COMMUTE",
                          "R-ADDMEAS", "R-DEFER"}
    with pytest.raises(RuleError):
        apply_rule(C(2, 1), "R-NOPE", 0)
    with pytest.raises(RuleError, match="out of range"):
        apply_rule(C(2, 1), "R-CONJ", 3)
