"""Constraint parsing, evaluation, reporting, and the reuse query path."""

import pytest

from flowcheck.constraints import (
    Constraint,
    Violation,
    format_report,
    load_constraints,
    parse_constraint,
    parse_constraints_text,
    query,
    query_many,
)
from flowcheck.errors import ConstraintError
from flowcheck.extraction import find_all_sequences
from flowcheck.loader import load_model
from flowcheck.propagation import evaluate_all

GEO = ("VIOLATION geo WHERE node.ServerLocation.nonEU "
       "AND DATA data.DataSensitivity.Personal & !data.Encryption.Encrypted")


@pytest.fixture(scope="module")
def shop(shop_path):
    model = load_model(shop_path)
    return model, evaluate_all(model, find_all_sequences(model))


@pytest.fixture(scope="module")
def shop_plain(shop_no_encrypt_path):
    model = load_model(shop_no_encrypt_path)
    return model, evaluate_all(model, find_all_sequences(model))


def test_parse_constraint_shape(shop):
    model, _ = shop
    c = parse_constraint(GEO, model.dictionary)
    assert isinstance(c, Constraint)
    assert c.name == "geo"
    assert c.text == GEO


def test_encrypted_shop_is_clean(shop):
    model, propagated = shop
    c = parse_constraint(GEO, model.dictionary)
    assert query_many(propagated, [c]) == {"geo": []}


def test_unencrypted_shop_violates_twice(shop_plain):
    model, propagated = shop_plain
    violations = query_many(propagated, [parse_constraint(GEO, model.dictionary)])["geo"]
    assert [(v.element_index, v.element_id) for v in violations] == [
        (4, "act.db.log"),
        (5, "act.db.ret"),
    ]
    v = violations[0]
    assert isinstance(v, Violation)
    assert isinstance(v, tuple)
    assert v.constraint_name == "geo"
    assert v.sequence_index == 0
    assert v.variable_names == ("payload", "stored")


def test_format_report_frozen(shop_plain):
    model, propagated = shop_plain
    buckets = query_many(propagated, [parse_constraint(GEO, model.dictionary)])
    assert format_report(buckets).splitlines() == [
        "CONSTRAINT geo SEQ 0 ELEM 4 NODE act.db.log VARS payload,stored",
        "CONSTRAINT geo SEQ 0 ELEM 5 NODE act.db.ret VARS payload,stored",
        "TOTAL 2 violations",
    ]


def test_format_report_empty(shop):
    model, propagated = shop
    buckets = query_many(propagated, [parse_constraint(GEO, model.dictionary)])
    assert format_report(buckets).splitlines() == ["TOTAL 0 violations"]


def test_format_report_order_parameter(shop_plain):
    model, propagated = shop_plain
    c1 = parse_constraint("VIOLATION all WHERE TRUE AND DATA TRUE", model.dictionary)
    c2 = parse_constraint(GEO, model.dictionary)
    buckets = query_many(propagated, [c1, c2])
    lines = format_report(buckets, order=["geo", "all"]).splitlines()
    assert lines[0].startswith("CONSTRAINT geo")
    assert lines[2].startswith("CONSTRAINT all")


def test_query_single_sequence(shop_plain):
    model, propagated = shop_plain
    violations = query(propagated[0], parse_constraint(GEO, model.dictionary))
    assert len(violations) == 2
    assert all(v.sequence_index == 0 for v in violations)
    tagged = query(propagated[0], parse_constraint(GEO, model.dictionary),
                   sequence_index=7)
    assert all(v.sequence_index == 7 for v in tagged)


def test_data_true_matches_every_element(shop):
    model, propagated = shop
    c = parse_constraint("VIOLATION all WHERE TRUE AND DATA TRUE", model.dictionary)
    violations = query_many(propagated, [c])["all"]
    assert len(violations) == sum(len(p) for p in propagated)
    # the start element has no variables in scope, yet still matches
    assert violations[0].variable_names == ()


def test_violations_ordered_by_sequence_then_element(shop_plain):
    model, propagated = shop_plain
    c = parse_constraint("VIOLATION all WHERE TRUE AND DATA TRUE", model.dictionary)
    out = query_many(propagated, [c])["all"]
    keys = [(v.sequence_index, v.element_index) for v in out]
    assert keys == sorted(keys)


@pytest.mark.parametrize("text,message", [
    ("VIOLATION c WHERE x.T.V AND DATA TRUE",
     "constraint 'c': the node term must reference 'node', found 'x'"),
    ("VIOLATION c WHERE TRUE AND DATA node.ServerLocation.EU",
     "constraint 'c': the data term must reference 'data', found 'node'"),
    ("VIOLATION c WHERE TRUE AND DATA data.*.*",
     "constraint 'c': wildcards are not allowed in constraints"),
    ("VIOLATION c WHERE node.Mood.Happy AND DATA TRUE",
     "constraint 'c': unknown label type 'Mood'"),
])
def test_parse_constraint_rejections(shop, text, message):
    model, _ = shop
    with pytest.raises(ConstraintError) as info:
        parse_constraint(text, model.dictionary)
    assert message in str(info.value)


def test_duplicate_constraint_names_rejected(shop):
    model, propagated = shop
    pair = [parse_constraint("VIOLATION a WHERE TRUE AND DATA TRUE", model.dictionary),
            parse_constraint("VIOLATION a WHERE FALSE AND DATA TRUE", model.dictionary)]
    with pytest.raises(ConstraintError, match="duplicate constraint names"):
        query_many(propagated, pair)


def test_parse_constraints_text(shop):
    model, _ = shop
    text = "\n".join([
        "# leading comment",
        "",
        "VIOLATION one WHERE TRUE AND DATA TRUE",
        "# interleaved comment",
        "VIOLATION two WHERE FALSE AND DATA TRUE",
    ])
    names = [c.name for c in parse_constraints_text(text, model.dictionary)]
    assert names == ["one", "two"]


def test_parse_constraints_text_line_numbers(shop):
    model, _ = shop
    with pytest.raises(ConstraintError, match="<text>, line 2:"):
        parse_constraints_text(
            "VIOLATION ok WHERE TRUE AND DATA TRUE\nVIOLATION broken",
            model.dictionary)


def test_parse_constraints_text_duplicate_names(shop):
    model, _ = shop
    text = ("VIOLATION a WHERE TRUE AND DATA TRUE\n"
            "VIOLATION a WHERE TRUE AND DATA TRUE\n")
    with pytest.raises(ConstraintError, match="duplicate constraint name 'a'"):
        parse_constraints_text(text, model.dictionary)


def test_load_constraints_file(shop, geo_constraints_path):
    model, propagated = shop
    constraints = load_constraints(geo_constraints_path, model.dictionary)
    assert [c.name for c in constraints] == ["geo"]
    assert query_many(propagated, constraints)["geo"] == []


def test_load_constraints_missing_file(shop):
    model, _ = shop
    with pytest.raises(ConstraintError, match="cannot read constraints file"):
        load_constraints("/no/such/file.constraints", model.dictionary)


def test_from_predicate(shop_plain):
    model, propagated = shop_plain
    # predicates receive (node_labels, variables)
    c = Constraint.from_predicate(
        "personal_off_eu",
        lambda node, variables: (
            node.has("ServerLocation", "nonEU")
            and any(v.has_data_characteristic("DataSensitivity", "Personal")
                    for v in variables)))
    violations = query_many(propagated, [c])["personal_off_eu"]
    assert [v.element_id for v in violations] == ["act.db.log", "act.db.ret"]
    # programmatic constraints do not name the satisfying variables
    assert violations[0].variable_names == ()


def test_matches_single_result(shop_plain):
    model, propagated = shop_plain
    c = parse_constraint(GEO, model.dictionary)
    outcomes = [c.matches(r) for r in propagated[0].results]
    assert [hit for hit, _ in outcomes] == [
        False, False, False, False, True, True, False, False]
    assert outcomes[4] == (True, ("payload", "stored"))
    assert outcomes[0] == (False, ())
