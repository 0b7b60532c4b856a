import json

import pytest

from oddmf.scenarios import (
    ScenarioError,
    builtin_text,
    catalogue,
    load_builtin,
    loop_search,
    parse_scenario,
    run_scenario,
)
from oddmf.ring import Ring

MINIMAL = """
format = 1
name = "mini"

[ring]
variables = [{ name = "x", coh = 1 }]
curvature = "x^2"

[[object]]
name = "L"
kind = "loop"
entry = "x"

[[check]]
name = "end"
op = "ext_table"
params = { from = "L", to = "L" }
expected = { dims = { "0" = 1 } }
"""

FAST = ["clifford-split", "cover-line-fa", "cover-point-f1", "even-model", "kp-anticommuting", "odd-knoerrer-point", "orbifold-z2", "z2z2-quadric"]


def test_catalogue_lists_all_builtins():
    assert catalogue() == sorted(FAST + ["a2-kernel", "a3-kernel"])


def test_odd_knoerrer_point_shape():
    sf = load_builtin("odd-knoerrer-point")
    assert sf.ring.names == ("x",)
    assert len(sf.objects) == 2 and len(sf.checks) == 3


@pytest.mark.parametrize("name", catalogue())
def test_round_trip(name):
    sf = load_builtin(name)
    again = parse_scenario(sf.serialize())
    assert again.data == sf.data
    assert structure(again) == structure(sf)


def structure(sf):
    return {
        n: (repr(E.ring), E.gens, [[str(x) for x in r] for r in E.diff], str(E.curvature))
        for n, E in sf.objects.items()
    }


@pytest.mark.parametrize("name", catalogue())
def test_every_check_has_provenance(name):
    for ch in load_builtin(name).checks:
        assert ch.get("provenance", "").split(":")[0] in {"PAPER", "DERIVED", "TRIVIAL"}, ch["name"]


@pytest.mark.parametrize("name", FAST)
def test_builtin_passes(name):
    rep = run_scenario(load_builtin(name))
    assert rep.ok, [(c.name, c.status, c.message) for c in rep.checks]
    assert all(c.status == "pass" for c in rep.checks)


def test_report_is_deterministic_json():
    a = run_scenario(load_builtin("clifford-split")).to_json()
    b = run_scenario(load_builtin("clifford-split")).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["bounds"] == {"poly_bound": 10, "window": [-6, 6]}
    assert a["format"] == 1 and a["tool"] == "oddmf"


def test_bounds_override():
    rep = run_scenario(parse_scenario(MINIMAL), poly_bound=6, window=(-2, 2))
    assert (rep.poly_bound, rep.window) == (6, (-2, 2))
    assert rep.ok


def test_wrong_expectation_fails():
    text = MINIMAL.replace('"0" = 1', '"0" = 2')
    rep = run_scenario(parse_scenario(text))
    assert not rep.ok and rep.checks[0].status == "fail"


def test_untrusted_mismatch_is_not_a_failure():
    # dimension claimed in the top degree, which is never trusted
    text = MINIMAL.replace('"0" = 1', '"0" = 1, "6" = 1')
    rep = run_scenario(parse_scenario(text))
    assert rep.ok and rep.checks[0].status == "untrusted"


def test_syntax_error_has_position():
    with pytest.raises(ScenarioError) as err:
        parse_scenario(MINIMAL.replace('kind = "loop"', 'kind = loop'))
    assert err.value.line == 11 and err.value.column is not None


def test_duplicate_variable_named():
    text = MINIMAL.replace('[{ name = "x", coh = 1 }]', '[{ name = "x", coh = 1 }, { name = "x", coh = 1 }]')
    with pytest.raises(ScenarioError, match="'x'"):
        parse_scenario(text)


@pytest.mark.parametrize("old, new, msg", [
    ('op = "ext_table"', 'op = "frobnicate"', "unknown op"),
    ('entry = "x"', 'entry = "x^2"', "degree"),
    ('entry = "x"', 'entry = "z"', "unknown variable"),
    ("format = 1", "format = 2", "format"),
    ('from = "L"', 'from = "M"', "unknown object"),
    ('kind = "loop"', 'kind = "blob"', "unknown kind"),
])
def test_semantic_errors(old, new, msg):
    with pytest.raises(ScenarioError, match=msg):
        parse_scenario(MINIMAL.replace(old, new))


FRACTIONAL = """
format = 1
name = "half"

[ring]
variables = []
coh_denominator = 2

[cover]
f = "1"

[[object]]
name = "H"
kind = "explicit"
side = "B"
gens = [{ coh = "1/2" }]
diff = [["0"]]

[[check]]
name = "inv"
op = "cover_involution"
params = { samples = ["H"] }
expected = { ok = true }
"""


def test_fractional_degree_parses_then_sign_check_errors_cleanly():
    sf = parse_scenario(FRACTIONAL)
    assert sf.ring.coh_denominator == 2
    rep = run_scenario(sf)
    assert rep.checks[0].status == "fail"
    assert "non-integral" in rep.checks[0].message


def test_loop_search_anticommuting():
    kp = Ring([("p", 1), ("q", 1)], signs={("p", "q"): -1})
    found = loop_search(kp, [kp("p"), kp("q")], kp("p^2 + q^2"), 3)
    assert sorted(found, key=str) == sorted((kp(t) for t in ["p + q", "p - q", "-p + q", "-p - q"]), key=str)


def test_builtin_text_unknown():
    with pytest.raises(ScenarioError):
        builtin_text("nope")
