import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qidmrg.integrals import (FcidumpError, IntegralSet, OrbitalMeta, Permutation, apply_permutation,
                              build_hubbard, canonical_two_body, compose, energetic_ordering,
                              format_vector, from_json_dict, load_integrals, parse_fcidump,
                              parse_vectors, random_integrals, reference_determinant, save_json,
                              to_json_dict, write_fcidump)

H2_MINIMAL = """ &FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,5,
  ISYM=1,
 &END
  0.6757101548    1    1    1    1
  0.6645817302    2    2    1    1
  0.1809270275    2    1    2    1
  0.6985449565    2    2    2    2
 -1.2563390730    1    1    0    0
 -0.4718960244    2    2    0    0
  0.7137539936    0    0    0    0
"""


def perms(n):
    return st.permutations(list(range(n))).map(lambda x: Permutation(np.array(x)))


def test_parse_minimal_fcidump():
    h = parse_fcidump(H2_MINIMAL)
    assert h.n_orbitals == 2 and h.n_electrons == 2 and h.ms2 == 0
    assert list(h.meta.irrep_labels) == [1, 5]
    assert h.two_body[0, 1, 0, 1] == h.two_body[1, 0, 1, 0] == 0.1809270275
    assert h.two_body[0, 0, 1, 1] == h.two_body[1, 1, 0, 0] == 0.6645817302
    assert h.one_body[1, 1] == -0.4718960244
    assert h.core_energy == 0.7137539936
    assert h.symmetry_defect() == 0.0


def test_header_slash_terminator_and_lowercase():
    text = H2_MINIMAL.replace(" &END", " /").replace("NORB", "norb")
    assert parse_fcidump(text).n_orbitals == 2


def test_conflicting_duplicate_reports_line():
    bad = H2_MINIMAL + "  0.5 1 2 1 2\n"
    with pytest.raises(FcidumpError) as err:
        parse_fcidump(bad)
    assert err.value.lineno == 12


def test_consistent_duplicate_is_accepted():
    dup = H2_MINIMAL + "  0.1809270275 1 2 1 2\n"
    assert parse_fcidump(dup).two_body[0, 1, 0, 1] == 0.1809270275


@pytest.mark.parametrize("line, lineno", [("1.0 3 1 1 1", 12), ("abc 1 1 1 1", 12), ("1.0 1 1", 12)])
def test_malformed_lines_raise_with_line_number(line, lineno):
    with pytest.raises(FcidumpError) as err:
        parse_fcidump(H2_MINIMAL + line + "\n")
    assert err.value.lineno == lineno


def test_missing_header_field():
    with pytest.raises(FcidumpError):
        parse_fcidump(H2_MINIMAL.replace("NELEC=2,", ""))


def test_fcidump_roundtrip_is_textually_stable():
    h = random_integrals(5, seed=3)
    text = write_fcidump(h)
    again = write_fcidump(parse_fcidump(text))
    assert text.split() == again.split()
    assert parse_fcidump(text).equals(h)


def test_json_roundtrip(tmp_path):
    h = random_integrals(4, seed=9, n_electrons=4)
    assert from_json_dict(to_json_dict(h)).equals(h)
    save_json(h, tmp_path / "h.json")
    assert load_integrals(tmp_path / "h.json").equals(h)
    (tmp_path / "h.fcidump").write_text(write_fcidump(h))
    assert load_integrals(tmp_path / "h.fcidump").equals(h)


def test_random_integrals_have_eightfold_symmetry():
    h = random_integrals(5, seed=1)
    assert h.symmetry_defect() < 1e-14
    assert np.allclose(h.one_body, h.one_body.T)


def test_integrals_are_read_only():
    h = random_integrals(3, seed=1)
    with pytest.raises(ValueError):
        h.one_body[0, 0] = 1.0


def test_hubbard_structure():
    h = build_hubbard(4, 1.0, 4.0)
    assert h.one_body[0, 1] == -1.0 and h.one_body[0, 2] == 0.0
    assert h.two_body[2, 2, 2, 2] == 4.0
    assert np.count_nonzero(h.two_body) == 4
    assert h.n_electrons == 4 and list(h.meta.hf_occupations) == [1, 1, 1, 1]


def test_reference_determinant_alternates_open_shells():
    assert reference_determinant([2, 1, 1, 0]) == [3, 2, 1, 0]


def test_canonical_two_body_is_shared_by_all_images():
    c = canonical_two_body(0, 2, 1, 3)
    for img in [(2, 0, 1, 3), (0, 2, 3, 1), (1, 3, 0, 2), (3, 1, 2, 0)]:
        assert canonical_two_body(*img) == c


def test_energetic_ordering_follows_metadata():
    h = random_integrals(4, seed=2)
    meta = OrbitalMeta(4, h.meta.irrep_labels, h.meta.hf_occupations, np.array([2, 0, 3, 1]))
    h2 = IntegralSet(meta, h.one_body, h.two_body, h.core_energy)
    assert list(energetic_ordering(h2).image) == [1, 3, 0, 2]


@settings(max_examples=30, deadline=None)
@given(perms(5), perms(5))
def test_permutation_composition(p, q):
    h = random_integrals(5, seed=4)
    lhs = apply_permutation(h, compose(p, q))
    rhs = apply_permutation(apply_permutation(h, q), p)
    assert lhs.equals(rhs)


@settings(max_examples=30, deadline=None)
@given(perms(6))
def test_permutation_inverse_restores(p):
    h = random_integrals(6, seed=5)
    assert apply_permutation(apply_permutation(h, p), p.inverse()).equals(h)
    assert Permutation(p.image[p.inverse().image]) == Permutation.identity(6)


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 1]))


def test_vector_text_roundtrip():
    text = format_vector("ORD", list(range(1, 21))) + format_vector("CASV", [3, 1, 2])
    vecs = parse_vectors(text)
    assert vecs["ORD"] == list(range(1, 21))
    assert vecs["CASV"] == [3, 1, 2]
