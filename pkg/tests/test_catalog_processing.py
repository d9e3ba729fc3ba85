import json
from fractions import Fraction

import pytest

from catalog_processing import (
    CATALOG_PATH,
    SlaveRowMode,
    catalog_boundary,
    catalog_templates,
    denominator_is_forced,
    entries_by_degree,
    entry_to_dict,
    freeze_catalog,
    load_catalog,
    match_tree_surface,
    max_label,
    random_surface_specs,
    realize,
    template,
)
from complexity_processing import verify_certificate
from curve_processing import negative_curve_set
from data_processing_common import InputError, VerificationError
from decomposition_processing import SlaveMode, denominator, verify_slave_bound
from graph_processing import build_dual_graph, is_tree

SIGMA = {
    "Y_{7,1}": Fraction(5), "Y_{7,2}": Fraction(4),
    "Y_{6,1}": Fraction(4), "Y_{6,2}": Fraction(5), "Y_{6,3}": Fraction(3),
    "Y_{6,4}": Fraction(3), "Y_{6,5}": Fraction(4),
    "Y_{5,1}": Fraction(3), "Y_{5,2}": Fraction(4), "Y_{5,3}": Fraction(4), "Y_{5,4}": Fraction(2),
    "Y_{4,1}": Fraction(3), "Y_{4,2}": Fraction(5, 2), "Y_{4,3}": Fraction(3), "Y_{4,4}": Fraction(3),
    "Y_{4,5}": Fraction(3), "Y_{4,6}": Fraction(3, 2),
    "Y_{3,1}": Fraction(5, 2), "Y_{3,2}": Fraction(2), "Y_{3,3}": Fraction(2), "Y_{3,4}": Fraction(4, 3),
    "Y_{2,1}": Fraction(3, 2), "Y_{2,2}": Fraction(3, 2), "Y_{2,3}": Fraction(3, 2), "Y_{2,4}": Fraction(7, 6),
}

FORCED = {"Y_{7,1}", "Y_{7,2}", "Y_{6,1}", "Y_{6,3}", "Y_{6,4}", "Y_{6,5}", "Y_{5,1}", "Y_{5,4}",
          "Y_{4,2}", "Y_{4,6}", "Y_{3,4}", "Y_{2,4}"}


def test_catalog_has_every_row():
    assert [e.name for e in load_catalog()] == list(SIGMA)


@pytest.mark.parametrize("name,sigma", SIGMA.items())
def test_template_sigma(name, sigma):
    assert template(name).sigma == sigma


def test_unknown_template():
    with pytest.raises(InputError):
        template("Y_{9,9}")


def test_forced_rows():
    assert {e.name for e in catalog_templates() if denominator_is_forced(e)} == FORCED


def test_duplicate_templates_rejected(tmp_path):
    with open(CATALOG_PATH, encoding='utf-8') as f:
        data = json.load(f)
    copy = dict(data['entries'][0], name="Y_{7,1}bis")
    data['entries'].append(copy)
    path = tmp_path / 'catalog.json'
    path.write_text(json.dumps(data))
    with pytest.raises(VerificationError):
        load_catalog(str(path))


def test_malformed_catalog(tmp_path):
    path = tmp_path / 'catalog.json'
    path.write_text(json.dumps({"version": 1, "entries": [{"name": "broken"}]}))
    with pytest.raises(InputError):
        load_catalog(str(path))


def test_realized_graph_is_the_template(catalog):
    for name, realized in catalog.items():
        g = build_dual_graph(realized.spec)
        assert is_tree(g), name
        assert len(g.nodes) == len(realized.entry.nodes), name
        assert realized.spec.degree == realized.degree


def test_dk_adds_up_to_anticanonical(catalog):
    for name, realized in catalog.items():
        spec = realized.spec
        dy = negative_curve_set(spec)
        total = spec.lattice.zero()
        for curve_id, coeff in realized.dk_coefficients().items():
            assert coeff.denominator == 1, name
            total = total + dy.by_id(curve_id).cls * int(coeff)
        assert total == spec.anticanonical, name


def test_denominator_against_labels(catalog):
    for name, realized in catalog.items():
        value = denominator(realized.spec).value
        if denominator_is_forced(realized.entry):
            assert value == max_label(realized.entry), name
        else:
            assert value <= max_label(realized.entry), name


def test_matching_finds_the_same_row(catalog):
    for name, realized in catalog.items():
        match = match_tree_surface(realized.spec)
        assert match is not None and match.name == name


def test_smooth_degree_seven_is_the_first_row(smooth):
    assert match_tree_surface(smooth(7)).name == "Y_{7,1}"


def test_cycle_surfaces_do_not_match(smooth):
    assert match_tree_surface(smooth(6)) is None


def test_catalog_boundaries_certify_sigma(catalog):
    for name, realized in catalog.items():
        dy = negative_curve_set(realized.spec)
        verify_certificate(realized.spec, catalog_boundary(realized, dy), realized.sigma, dy)


def test_slave_bounds_dominate_sigma(catalog):
    modes = {
        SlaveRowMode.TOTAL: SlaveMode.TOTAL,
        SlaveRowMode.EXCEPTIONAL: SlaveMode.EXCEPTIONAL,
        SlaveRowMode.CONTRACTION: SlaveMode.AUTO,
    }
    for name, realized in catalog.items():
        bound = verify_slave_bound(realized.spec, realized.slave_divisor(), modes[realized.entry.slave_mode])
        assert bound.sigma_bound >= realized.sigma, name


def test_entries_by_degree(catalog):
    assert [r.name for r in entries_by_degree(2)] == ["Y_{2,1}", "Y_{2,2}", "Y_{2,3}", "Y_{2,4}"]


def test_entry_to_dict(catalog):
    data = entry_to_dict(catalog["Y_{4,2}"])
    assert data["sigma"] == "5/2"
    assert data["degree"] == 4
    assert data["rho_X"] == template("Y_{4,2}").rho_X
    assert {node["key"] for node in data["nodes"]} == {node.key for node in template("Y_{4,2}").nodes}
    assert all(isinstance(node["curve"], int) for node in data["nodes"])


def test_freeze_catalog(tmp_path, catalog):
    path = freeze_catalog(str(tmp_path / 'frozen.json'))
    frozen = {e.name: e for e in load_catalog(path)}
    assert all(e.frozen_roots for e in frozen.values() if e.minus_two_count)
    again = realize(frozen["Y_{5,4}"])
    assert set(again.spec.simple_roots) == set(catalog["Y_{5,4}"].spec.simple_roots)
    assert again.spec.singularity == catalog["Y_{5,4}"].spec.singularity


def test_random_corpus_is_seeded():
    first = random_surface_specs(5, 3, seed=4)
    second = random_surface_specs(5, 3, seed=4)
    assert [s.simple_roots for s in first] == [s.simple_roots for s in second]
    assert all(s.degree == 5 for s in first)
    assert len({tuple(sorted(s.simple_roots)) for s in first}) == len(first)


def test_random_corpus_degree_range():
    with pytest.raises(InputError):
        random_surface_specs(0, 1)
