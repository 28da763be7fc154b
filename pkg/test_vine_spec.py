#!/usr/bin/env python3
"""
Tests for vine specifications: spec-file parsing and writing, parameter
ordering and the standard-error layout
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.bicop import FamilyCode
from src.errors import DomainError, ParseError
from src.report import format_layout, parse_layout, read_layout
from src.vine_spec import format_spec, parse_spec, read_spec

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def _fixture(name):
    return os.path.join(FIXTURES, name)


def test_example_spec_parameter_order():
    spec = read_spec(_fixture("gauss_3d.spec"))
    assert spec.d == 3 and spec.n_par == 3
    assert [p.position for p in spec.param_index()] == [(3, 2), (3, 1), (2, 1)]
    np.testing.assert_allclose(spec.get_vector(), [0.35, 0.79, 0.34])
    assert spec.edge_label(2, 1) == "V3,V1|V2"
    print("✓ parameters are ordered column by column from the lower right")


def test_student_spec_has_two_slots():
    spec = read_spec(_fixture("student_3d.spec"))
    assert spec.n_par == 6
    assert [(p.position, p.slot) for p in spec.param_index()][:2] == [((3, 2), 1), ((3, 2), 2)]
    np.testing.assert_allclose(spec.get_vector(), [0.35, 3, 0.79, 3, 0.34, 3])
    print("✓ Student-t positions carry correlation then degrees of freedom")


def test_exchange_rate_fixture():
    spec = read_spec(_fixture("exchange_rates.spec"))
    assert spec.d == 8
    assert spec.labels[0] == "AUD" and spec.labels[-1] == "GBP"
    assert spec.n_par == 27
    joe = spec.family(6, 2)
    assert joe.code == FamilyCode.JOE and joe.reflected
    assert spec.par(6, 2) == (1.10,)
    assert spec.par(8, 1) == (0.72, 8.96)
    first_slots = [v for p, v in zip(spec.param_index(), spec.get_vector()) if p.slot == 1]
    np.testing.assert_allclose(first_slots[:4], [0.3, 0.48, 0.63, 0.54])
    print("✓ 8-dim exchange-rate spec parses")


def test_se_fixture_matches_parameter_layout():
    spec = read_spec(_fixture("exchange_rates.spec"))
    se = read_layout(_fixture("exchange_rates_se.txt"))
    assert se.shape == (8, 8)
    pattern = spec.layout(np.ones(spec.n_par))
    np.testing.assert_array_equal(np.isnan(se), np.isnan(pattern))
    values = spec.unlayout(se)
    assert np.all(np.isfinite(values))
    assert se[6, 0] == 0.03 and se[0, 6] == 5.00
    np.testing.assert_array_equal(parse_layout(format_layout(se)), se)
    print("✓ SE layout fixture lines up with the parameter slots")


def test_spec_round_trip():
    spec = read_spec(_fixture("mixed_4d.spec"))
    again = parse_spec(format_spec(spec))
    assert again.structure == spec.structure
    assert again.labels == spec.labels
    assert {p: str(f) for p, f in again.families.items()} == {p: str(f) for p, f in spec.families.items()}
    np.testing.assert_array_equal(again.get_vector(), spec.get_vector())
    print("✓ written spec parses back to the same model")


def test_full_square_rows_accepted():
    text = """
    STRUCTURE
    3
    1 2
    2 1 1
    FAMILY
    0
    1 0
    1 1 0
    PAR
    0
    0.34 0
    0.79 0.35 0
    """
    spec = parse_spec(text)
    np.testing.assert_allclose(spec.get_vector(), [0.35, 0.79, 0.34])
    print("✓ FAMILY/PAR with diagonal rows accepted")


def test_parse_errors_name_the_section():
    bad_structure = "STRUCTURE\n3\n1 2\n2 1\nFAMILY\n1\n1 1\n"
    with pytest.raises(ParseError) as err:
        parse_spec(bad_structure)
    assert err.value.section == "STRUCTURE" and err.value.line == 4

    with pytest.raises(ParseError) as err:
        parse_spec("STRUCTURE\n2\n1 1\nFAMILY\n7\n")
    assert err.value.section == "FAMILY"

    with pytest.raises(ParseError) as err:
        parse_spec("STRUCTURE\n2\n1 1\nFAMILY\n1\nPAR\nabc\n")
    assert err.value.section == "PAR" and err.value.column == 1

    with pytest.raises(ParseError):
        parse_spec("FAMILY\n1\n")
    with pytest.raises(DomainError):
        parse_spec("STRUCTURE\n2\n1 1\nFAMILY\n1\nPAR\n1.5\n")
    print("✓ parse errors carry section, line and column")


if __name__ == "__main__":
    print("=" * 60)
    print("Testing vine specifications")
    print("=" * 60)
    test_example_spec_parameter_order()
    test_student_spec_has_two_slots()
    test_exchange_rate_fixture()
    test_se_fixture_matches_parameter_layout()
    test_spec_round_trip()
    test_full_square_rows_accepted()
    test_parse_errors_name_the_section()
