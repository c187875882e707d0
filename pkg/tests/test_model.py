"""Model records, assignment interning, the index, and whole-model validation."""

import pytest

from flowcheck.errors import ModelLoadError, UnknownElementError
from flowcheck.loader import model_from_data
from flowcheck.model import (
    RETURN_VARIABLE,
    index_of,
    ExternalCall,
    ReturnAction,
    SystemCall,
    UserVariableAction,
    VariableAction,
    assignment_from_text,
    node_labels_for_instance,
)


def defects_of(data):
    with pytest.raises(ModelLoadError) as info:
        model_from_data(data)
    return list(info.value.defects)


def test_return_variable_name():
    assert RETURN_VARIABLE == "RETURN"


def test_assignment_interning():
    # same source text yields the same cached object
    a = assignment_from_text("x.T.V := TRUE")
    b = assignment_from_text("x.T.V := TRUE")
    assert a is b
    assert a.target_var == "x"
    assert a.target_type == "T"
    assert a.target_value == "V"
    assert a.text == "x.T.V := TRUE"


def test_assignment_wildcard_arity():
    assert assignment_from_text("x.T.V := TRUE").wildcard_arity() == 0
    assert assignment_from_text("x.T.* := y.T.*").wildcard_arity() == 1
    assert assignment_from_text("x.*.* := y.*.*").wildcard_arity() == 2


def test_actions_are_tuples():
    a = VariableAction("a1", (assignment_from_text("x.T.V := TRUE"),))
    assert isinstance(a, tuple)
    assert a.id == "a1"
    u = UserVariableAction("a2", ())
    assert isinstance(u, VariableAction)
    r = ReturnAction("r1", ())
    assert r.assignments == ()
    c = ExternalCall("c1", "role", "sig", (("p", "v"),), None, ())
    assert c.bindings == (("p", "v"),)
    s = SystemCall("s1", "inst", "sig", (), "out", ())
    assert s.result_variable == "out"


def test_minimal_model_loads(model_data):
    model = model_from_data(model_data)
    assert [c.id for c in model.components] == ["comp.a"]
    assert model.scenarios[0].actions[1].result_variable == "got"


def test_index_lookups(model_data):
    model = model_from_data(model_data)
    index = index_of(model)
    inst = index.instance("inst.a")
    assert inst.component_id == "comp.a"
    assert index.component_of("inst.a").id == "comp.a"
    seff = index.seff_for("inst.a", "svc")
    assert seff.signature_id == "svc"
    with pytest.raises(UnknownElementError, match="unknown assembly instance 'ghost'"):
        index.instance("ghost")
    with pytest.raises(UnknownElementError,
                       match="component 'comp.a' provides no seff for signature 'other'"):
        index.seff_for("inst.a", "other")
    with pytest.raises(UnknownElementError,
                       match="no connector for role 'dep' of instance 'inst.a'"):
        index.resolve_call("inst.a", "dep")
    with pytest.raises(UnknownElementError, match="unknown usage scenario 'ghost'"):
        index.scenario("ghost")


def test_node_labels_union_component_and_container(model_data):
    model = model_from_data(model_data)
    # component carries Color.Red, its container carries Color.Blue
    labels = node_labels_for_instance(model, "inst.a")
    assert labels.names() == ["Color.Blue", "Color.Red"]


def test_node_mask_matches_node_labels(model_data):
    model = model_from_data(model_data)
    index = index_of(model)
    mask = index.node_mask("inst.a")
    assert model.dictionary.set_from_mask(mask).names() == ["Color.Blue", "Color.Red"]


# -- validation defect catalogue ------------------------------------------

def test_duplicate_component_id(model_data):
    model_data["components"].append(model_data["components"][0])
    assert any("duplicate component id 'comp.a'" in d for d in defects_of(model_data))


def test_missing_seff(model_data):
    del model_data["components"][0]["seffs"]["svc"]
    msgs = defects_of(model_data)
    assert "component 'comp.a': no seff for provided signature 'svc'" in msgs


def test_return_must_be_final(model_data):
    model_data["components"][0]["seffs"]["svc"].reverse()
    assert ("component 'comp.a', seff 'svc', action 's1': "
            "Return must be the final action") in defects_of(model_data)


def test_reserved_parameter_name(model_data):
    model_data["components"][0]["signatures"][0]["parameters"] = ["RETURN"]
    assert any("parameter name 'RETURN' is reserved" in d
               for d in defects_of(model_data))


def test_reserved_return_variable_in_scenario(model_data):
    model_data["usageScenarios"][0]["actions"][0]["assignments"] = [
        "RETURN.Color.Red := TRUE"]
    msgs = defects_of(model_data)
    assert any("variable name RETURN is reserved" in d for d in msgs)
    # losing the definition of v also breaks the later binding
    assert any("binding references variable 'v' not in scope" in d for d in msgs)


def test_return_assignments_must_target_return(model_data):
    model_data["components"][0]["seffs"]["svc"][1]["assignments"] = [
        "oops.Color.Blue := TRUE"]
    assert any("return assignments must target RETURN" in d
               for d in defects_of(model_data))


def test_wildcard_arity_mismatch(model_data):
    model_data["components"][0]["seffs"]["svc"][0]["assignments"] = [
        "out.Color.* := p.Color.Red"]
    assert any("reference 'p' has wildcard arity 0, target has 1" in d
               for d in defects_of(model_data))


def test_unknown_label_value(model_data):
    model_data["usageScenarios"][0]["actions"][0]["assignments"] = [
        "v.Color.Green := TRUE"]
    assert any("unknown value 'Green' for label type 'Color'" in d
               for d in defects_of(model_data))


def test_unknown_component_reference(model_data):
    model_data["assembly"]["instances"][0]["component"] = "comp.ghost"
    assert any("instance 'inst.a': unknown component 'comp.ghost'" in d
               for d in defects_of(model_data))


def test_unallocated_instance(model_data):
    model_data["deployment"]["allocations"] = {}
    assert ("instance 'inst.a' is not allocated to any container"
            in defects_of(model_data))


def test_allocation_to_unknown_container(model_data):
    model_data["deployment"]["allocations"]["inst.a"] = "nowhere"
    assert "allocation of 'inst.a': unknown container 'nowhere'" in defects_of(model_data)


def test_binding_unknown_parameter(model_data):
    model_data["usageScenarios"][0]["actions"][1]["bindings"]["q"] = "v"
    assert any("binding names unknown parameter 'q' of signature 'svc'" in d
               for d in defects_of(model_data))


def test_binding_out_of_scope_variable(model_data):
    model_data["usageScenarios"][0]["actions"][1]["bindings"]["p"] = "ghost"
    assert any("binding references variable 'ghost' not in scope" in d
               for d in defects_of(model_data))


def test_call_to_unknown_signature(model_data):
    model_data["usageScenarios"][0]["actions"][1]["signature"] = "other"
    assert any("unknown signature 'other'" in d for d in defects_of(model_data))


def test_call_to_unprovided_signature(model_data):
    # the signature exists, but on a component the called instance lacks
    model_data["components"].append({
        "id": "comp.b",
        "name": "Beta",
        "signatures": [{"id": "other", "name": "other", "parameters": []}],
        "seffs": {"other": [{"type": "return", "id": "b1", "assignments": []}]},
    })
    model_data["usageScenarios"][0]["actions"][1]["signature"] = "other"
    model_data["usageScenarios"][0]["actions"][1]["bindings"] = {}
    assert any("instance 'inst.a' does not provide signature 'other'" in d
               for d in defects_of(model_data))


def test_duplicate_action_id(model_data):
    actions = model_data["usageScenarios"][0]["actions"]
    actions[1]["id"] = actions[0]["id"]
    assert any("duplicate action id" in d for d in defects_of(model_data))


def test_connector_checks(model_data):
    # second component calls the first through a required role
    model_data["components"].append({
        "id": "comp.b",
        "name": "Beta",
        "signatures": [{"id": "entry", "name": "entry", "parameters": []}],
        "seffs": {"entry": [
            {"type": "call", "id": "b0", "role": "dep", "signature": "svc",
             "bindings": {"p": "local"}},
        ]},
    })
    model_data["assembly"]["instances"].append(
        {"id": "inst.b", "component": "comp.b"})
    model_data["deployment"]["allocations"]["inst.b"] = "host"

    # no connector for the role at all
    msgs = defects_of(model_data)
    assert any("call 'b0': no connector for role 'dep'" in d for d in msgs)
    # the binding references a variable the seff never defined
    assert any("binding references variable 'local' not in scope" in d for d in msgs)

    model_data["components"][1]["seffs"]["entry"][0]["bindings"] = {}
    model_data["assembly"]["connectors"] = [
        {"instance": "inst.b", "role": "dep", "target": "inst.ghost"}]
    assert any("unknown target instance 'inst.ghost'" in d
               for d in defects_of(model_data))

    # connector lands on an instance that does not provide the signature
    model_data["assembly"]["connectors"][0]["target"] = "inst.b"
    assert any("does not provide signature 'svc'" in d
               for d in defects_of(model_data))
