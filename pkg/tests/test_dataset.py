import dataclasses
import json

import pytest

from conceptscope.dataset import (
    ConceptDataset,
    LabeledExample,
    load_dataset,
    to_jsonl,
    with_ground_truth_predictions,
)
from conceptscope.errors import DomainError, ParseError, SchemaError, ValidationError


def _line(**kwargs):
    return json.dumps(kwargs).encode() + b"\n"


def test_uniform_default_weights():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}) + _line(
        id="b", prediction=-1, concepts={"s": -1.0}
    )
    ds = load_dataset(data)
    assert [ex.weight for ex in ds.examples] == [0.5, 0.5]


def test_weights_renormalized():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}, weight=2) + _line(
        id="b", prediction=-1, concepts={"s": -1.0}, weight=2
    )
    ds = load_dataset(data)
    assert [ex.weight for ex in ds.examples] == [0.5, 0.5]
    assert ds.original_weight_total == 4.0


def test_out_of_range_prediction_names_line():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}) + _line(
        id="b", prediction=0, concepts={"s": 1.0}
    )
    with pytest.raises(ValidationError, match="line 2"):
        load_dataset(data)


def test_out_of_range_concept_names_line():
    data = _line(id="a", prediction=1, concepts={"s": 1.5})
    with pytest.raises(ValidationError, match="line 1"):
        load_dataset(data)


def test_duplicate_id_rejected():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}) * 2
    with pytest.raises(ValidationError, match="duplicate id"):
        load_dataset(data)


def test_malformed_json_names_line():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}) + b"{oops\n"
    with pytest.raises(ParseError, match="line 2"):
        load_dataset(data)


def test_bom_rejected():
    data = b"\xef\xbb\xbf" + _line(id="a", prediction=1, concepts={"s": 1.0})
    with pytest.raises(ParseError, match="BOM"):
        load_dataset(data)


def test_schema_inferred_from_first_line():
    data = _line(id="a", prediction=1, concepts={"b": 1.0, "a": -1.0})
    ds = load_dataset(data)
    assert ds.concept_names == ("b", "a")


def test_schema_mismatch_between_lines():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}) + _line(
        id="b", prediction=1, concepts={"t": 1.0}
    )
    with pytest.raises(SchemaError, match="line 2"):
        load_dataset(data)


def test_strict_mode_requires_schema():
    data = _line(id="a", prediction=1, concepts={"s": 1.0})
    with pytest.raises(DomainError):
        load_dataset(data, "strict")
    ds = load_dataset(data, "strict", schema=["s"])
    assert ds.concept_names == ("s",)
    with pytest.raises(SchemaError):
        load_dataset(data, "strict", schema=["other"])


def test_negative_weight_rejected():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}, weight=-0.5)
    with pytest.raises(ValidationError, match="line 1"):
        load_dataset(data)


def test_all_zero_weights_rejected():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}, weight=0) + _line(
        id="b", prediction=1, concepts={"s": 1.0}, weight=0
    )
    with pytest.raises(ValidationError, match="positive"):
        load_dataset(data)


def test_ground_truth_parsed_and_optional():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}, ground_truth=-1) + _line(
        id="b", prediction=1, concepts={"s": 1.0}
    )
    ds = load_dataset(data)
    assert ds.examples[0].ground_truth == -1
    assert ds.examples[1].ground_truth is None


def test_constructor_checks_weight_sum():
    with pytest.raises(ValidationError, match="sum"):
        ConceptDataset(
            (LabeledExample("a", 1, {"s": 1.0}, 0.4),), ("s",)
        )


def test_examples_are_immutable():
    ds = load_dataset(_line(id="a", prediction=1, concepts={"s": 1.0}))
    with pytest.raises(dataclasses.FrozenInstanceError):
        ds.examples[0].weight = 0.2
    with pytest.raises(dataclasses.FrozenInstanceError):
        ds.concept_names = ()


def test_jsonl_round_trip():
    data = (
        _line(id="a", prediction=1, concepts={"s": 0.25, "t": -1.0}, weight=0.75, ground_truth=1)
        + _line(id="b", prediction=-1, concepts={"s": 1.0, "t": 0.0}, weight=0.25)
    )
    ds = load_dataset(data)
    again = load_dataset(to_jsonl(ds))
    assert again.concept_names == ds.concept_names
    for left, right in zip(ds.examples, again.examples):
        assert left.id == right.id
        assert left.prediction == right.prediction
        assert left.ground_truth == right.ground_truth
        assert left.concepts == right.concepts
        assert left.weight == pytest.approx(right.weight, abs=1e-15)


def test_load_from_binary_file_object(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_bytes(_line(id="a", prediction=1, concepts={"s": 1.0}))
    with open(path, "rb") as fh:
        ds = load_dataset(fh)
    assert ds.examples[0].id == "a"


def test_ground_truth_swap():
    data = _line(id="a", prediction=1, concepts={"s": 1.0}, ground_truth=-1)
    swapped = with_ground_truth_predictions(load_dataset(data))
    assert swapped.examples[0].prediction == -1


def test_ground_truth_swap_requires_labels():
    data = _line(id="a", prediction=1, concepts={"s": 1.0})
    with pytest.raises(ValidationError, match="ground_truth"):
        with_ground_truth_predictions(load_dataset(data))
