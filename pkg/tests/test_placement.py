import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costparity.placement import (
    LinkPrices,
    Operator,
    Plan,
    PlacementError,
    Site,
    Source,
    brute_force,
    cost_of_assignment,
    evaluate_assignment,
    node_output_bytes,
    operator_ids,
    optimize,
    plan_from_dict,
    plan_to_dict,
    ship_everything_assignment,
)

WAN = 1e-9


def filter_plan(selectivity=0.01, bytes_=100e9):
    return Plan(
        Operator((Source("dc", bytes_),), selectivity=selectivity, name="filter"),
        client_site="client",
    )


SITES = (Site("client", 0.0), Site("dc", 0.0))


def test_node_output_bytes():
    assert node_output_bytes(Source("a", 100e9)) == 100e9
    assert node_output_bytes(filter_plan().root) == pytest.approx(1e9)
    join = Operator((Source("a", 1e9), Source("b", 3e9)), selectivity=0.5)
    assert node_output_bytes(join) == 2e9


def test_pure_shipping():
    plan = Plan(Source("dc", 5e9), client_site="client")
    links = LinkPrices.uniform(WAN)
    assert cost_of_assignment(plan, SITES, links, {}) == pytest.approx(5.0)
    assert optimize(plan, SITES, links).total_cost == pytest.approx(5.0)
    assert optimize(plan, SITES, links).assignment == {}


def test_filter_at_source_vs_client():
    links = LinkPrices.uniform(WAN)
    plan = filter_plan()
    assert cost_of_assignment(plan, SITES, links, {"filter": "dc"}) == pytest.approx(1.0, rel=1e-12)
    assert cost_of_assignment(plan, SITES, links, {"filter": "client"}) == pytest.approx(100.0, rel=1e-12)
    result = optimize(plan, SITES, links)
    assert result.assignment == {"filter": "dc"}
    assert result.total_cost == pytest.approx(1.0, rel=1e-12)
    assert result.per_node["filter"].compute == 0
    assert brute_force(plan, SITES, links)[1] == {"filter": "dc"}


def test_selectivity_one_tie_breaks_to_smallest_id():
    links = LinkPrices.uniform(WAN)
    result = optimize(filter_plan(selectivity=1.0), SITES, links)
    assert result.assignment == {"filter": "client"}
    assert result.total_cost == pytest.approx(100.0)


def test_blast_search_stays_at_data():
    density = 7720 * 1.25e12 / 40e9
    plan = Plan(
        Operator((Source("server", 40e9),), instr_per_input_byte=density, selectivity=1e-5, name="search"),
        client_site="lab",
    )
    sites = (Site("lab", 1e-13), Site("server", 0.0))
    links = LinkPrices.uniform(WAN)
    result = optimize(plan, sites, links)
    assert result.assignment == {"search": "server"}
    shipped = evaluate_assignment(plan, sites, links, {"search": "lab"})
    assert shipped.per_node["search"].inbound_transfer == pytest.approx(40.0, rel=1e-12)
    assert shipped.per_node["search"].compute == pytest.approx(965.0, rel=1e-12)
    assert result.total_cost < shipped.total_cost


def test_pins_are_respected():
    plan = Plan(
        Operator((Source("dc", 100e9),), selectivity=0.01, pinned_site="client", name="filter"),
        client_site="client",
    )
    links = LinkPrices.uniform(WAN)
    result = optimize(plan, SITES, links)
    assert result.assignment == {"filter": "client"}
    with pytest.raises(PlacementError, match="pinned"):
        cost_of_assignment(plan, SITES, links, {"filter": "dc"})


def test_errors():
    links = LinkPrices.uniform(WAN)
    with pytest.raises(PlacementError):
        optimize(filter_plan(), (), links)
    bad_pin = Plan(Operator((Source("dc", 1),), pinned_site="mars"), client_site="client")
    with pytest.raises(PlacementError):
        optimize(bad_pin, SITES, links)
    with pytest.raises(PlacementError):
        cost_of_assignment(filter_plan(), SITES, links, {})
    with pytest.raises(PlacementError):
        optimize(Plan(Source("nowhere", 1), "client"), SITES, links)
    with pytest.raises(PlacementError):
        optimize(filter_plan(), (Site("a"), Site("a")), links)
    with pytest.raises(PlacementError):
        Operator(())
    with pytest.raises(PlacementError):
        LinkPrices({("a", "a"): 1.0})
    shared = Source("dc", 1)
    with pytest.raises(PlacementError, match="tree"):
        optimize(Plan(Operator((shared, shared)), "client"), SITES, links)


def test_default_node_ids():
    plan = Plan(Operator((Operator((Source("dc", 1),)), Source("dc", 2))), "client")
    assert operator_ids(plan) == ["op0", "op1"]


def test_asymmetric_links():
    # uploading from dc is expensive, downloading into dc is cheap
    links = LinkPrices({("dc", "client"): 10.0, ("client", "dc"): 1.0})
    plan = filter_plan(selectivity=0.5, bytes_=1.0)
    assert optimize(plan, SITES, links).total_cost == pytest.approx(5.0)


def test_plan_document_round_trip():
    doc = {
        "sites": [{"id": "client", "usd_per_instruction": "0.1µ$"}, {"id": "dc", "usd_per_instruction": 0}],
        "links": {"dc": {"client": 2e-9}},
        "client_site": "client",
        "root": {
            "operator": {
                "name": "filter",
                "selectivity": 0.01,
                "instr_per_input_byte": 100,
                "children": [{"source": {"site": "dc", "bytes": "100GB"}}],
            }
        },
    }
    parsed = plan_from_dict(doc, wan_price=WAN)
    assert parsed.links.price("dc", "client") == 2e-9
    assert parsed.links.price("client", "dc") == WAN
    assert parsed.sites[0].usd_per_instruction == pytest.approx(1e-7)
    again = plan_from_dict(plan_to_dict(parsed), wan_price=5.0)
    assert again.plan == parsed.plan
    assert again.links.price("client", "dc") == WAN


@pytest.mark.parametrize(
    "doc",
    [
        {"sites": [], "client_site": "x", "root": {"source": {"site": "x", "bytes": 1}}},
        {"sites": [{"id": "x"}], "client_site": "x", "root": {"table": {}}},
        {"sites": [{"id": "x"}], "client_site": "x", "root": {"source": {"site": "y", "bytes": 1}}},
        {"sites": [{"id": "x"}], "client_site": "x", "root": {"operator": {"children": []}}},
        {"sites": [{"nom": "x"}], "client_site": "x", "root": {"source": {"site": "x", "bytes": 1}}},
        {"sites": [{"id": "x"}], "client_site": "x", "links": {"x": {"z": 1}},
         "root": {"source": {"site": "x", "bytes": 1}}},
        {"sites": [{"id": "x"}], "root": {"source": {"site": "x", "bytes": 1}}},
        {"sites": [{"id": "x"}], "client_site": "x",
         "root": {"operator": {"children": [{"source": {"site": "x", "bytes": 1}}], "pinned_site": "q"}}},
    ],
)
def test_plan_document_errors(doc):
    with pytest.raises(PlacementError):
        plan_from_dict(doc, wan_price=WAN)


# -- randomized oracle checks ---------------------------------------------

SITE_IDS = ["a", "b", "c", "d"]
frac = st.fractions(min_value=0, max_value=8, max_denominator=64)


@st.composite
def placement_problems(draw, exact=True):
    n_sites = draw(st.integers(1, 4))
    ids = SITE_IDS[:n_sites]
    num = frac if exact else st.floats(0, 8, allow_nan=False)
    sites = tuple(Site(i, draw(num)) for i in ids)
    prices = {(x, y): draw(num) for x in ids for y in ids if x != y}
    links = LinkPrices(prices, default=0)
    budget = [draw(st.integers(1, 4))]

    def node(depth):
        if budget[0] > 0 and (depth == 0 or draw(st.booleans())):
            budget[0] -= 1
            n_children = draw(st.integers(1, 2))
            children = tuple(node(depth + 1) for _ in range(n_children))
            pin = draw(st.one_of(st.none(), st.sampled_from(ids))) if draw(st.integers(0, 4)) == 0 else None
            return Operator(children, instr_per_input_byte=draw(num), selectivity=draw(num), pinned_site=pin)
        return Source(draw(st.sampled_from(ids)), draw(st.integers(0, 1000)) if exact else draw(num))

    plan = Plan(node(0), client_site=draw(st.sampled_from(ids)))
    return plan, sites, links


@settings(max_examples=150, deadline=None)
@given(problem=placement_problems())
def test_dp_equals_brute_force_exactly(problem):
    plan, sites, links = problem
    assert len(operator_ids(plan)) <= 4
    best, _ = brute_force(plan, sites, links)
    result = optimize(plan, sites, links)
    assert result.total_cost == best
    assert isinstance(result.total_cost, (Fraction, int))
    assert cost_of_assignment(plan, sites, links, result.assignment) == result.total_cost


@settings(max_examples=60, deadline=None)
@given(problem=placement_problems(exact=False))
def test_dp_matches_brute_force_on_floats(problem):
    plan, sites, links = problem
    best, _ = brute_force(plan, sites, links)
    assert optimize(plan, sites, links).total_cost == pytest.approx(best, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(problem=placement_problems())
def test_never_worse_than_shipping_everything(problem):
    plan, sites, links = problem
    baseline = cost_of_assignment(plan, sites, links, ship_everything_assignment(plan))
    assert optimize(plan, sites, links).total_cost <= baseline


@settings(max_examples=60, deadline=None)
@given(problem=placement_problems(), bump=frac, pair=st.tuples(st.sampled_from(SITE_IDS), st.sampled_from(SITE_IDS)))
def test_raising_a_link_price_never_lowers_the_optimum(problem, bump, pair):
    plan, sites, links = problem
    src, dst = pair
    if src == dst or src not in {s.id for s in sites} or dst not in {s.id for s in sites}:
        return
    raised = links.with_price(src, dst, links.price(src, dst) + bump)
    assert optimize(plan, sites, raised).total_cost >= optimize(plan, sites, links).total_cost


@settings(max_examples=40, deadline=None)
@given(problem=placement_problems())
def test_deterministic(problem):
    plan, sites, links = problem
    first = optimize(plan, sites, links)
    assert optimize(plan, sites, links) == first
    assert optimize(plan, tuple(reversed(sites)), links).assignment == first.assignment


@settings(max_examples=100, deadline=None)
@given(
    selectivity=st.fractions(min_value=0, max_value=3, max_denominator=32),
    density=frac,
    compute_price=frac,
    link=st.fractions(min_value=Fraction(1, 64), max_value=8, max_denominator=64),
    size=st.integers(1, 10**6),
    source_site=st.sampled_from(["a", "b", "c"]),
    client_site=st.sampled_from(["a", "b", "c"]),
)
def test_pushdown_theorem(selectivity, density, compute_price, link, size, source_site, client_site):
    if source_site == client_site:
        return
    sites = tuple(Site(i, compute_price) for i in ("a", "b", "c"))
    links = LinkPrices.uniform(link)
    plan = Plan(
        Operator((Source(source_site, size),), instr_per_input_byte=density, selectivity=selectivity, name="f"),
        client_site=client_site,
    )
    placed = optimize(plan, sites, links).assignment["f"]
    if selectivity < 1:
        assert placed == source_site
    elif selectivity == 1:
        # source and client tie (a third site would add a hop); smallest id wins
        assert placed == min(source_site, client_site)
    else:
        assert placed == client_site


def test_hundreds_of_enumerated_cases_fit_the_bound():
    # 4 operators over 4 sites is the largest exhaustive enumeration used
    assert len(list(itertools.product(SITE_IDS, repeat=4))) == 256
