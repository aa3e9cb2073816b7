"""Cost-based operator placement over a federation of priced sites.

A plan is a tree: leaves are data sources pinned to their home site,
inner nodes are operators (filters, joins, aggregates...) that read the
output of their children. Each operator may run at any site. Its cost is
compute (instructions per input byte times the site's instruction price)
plus the price of shipping each child's output to it; the root's output is
then shipped to the client. ``optimize`` finds the cheapest assignment with
a dynamic program over the tree.

Arithmetic is generic: prices, byte counts and selectivities may be floats
or ``fractions.Fraction`` (the test oracle uses the latter for exact
comparisons).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from costparity.quantities import Kind, QuantityError, coerce_quantity


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class Site:
    id: str
    usd_per_instruction: Any = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise PlacementError("site id must be a non-empty string")
        if self.usd_per_instruction < 0:
            raise PlacementError(f"site {self.id}: negative instruction price")


class LinkPrices:
    """Directed per-byte transfer prices between sites.

    The diagonal is always 0. Pairs not listed explicitly cost ``default``.
    """

    def __init__(self, prices: Mapping[tuple[str, str], Any] | None = None, default: Any = 0.0):
        if default < 0:
            raise PlacementError("default link price must be >= 0")
        self.default = default
        self._prices: dict[tuple[str, str], Any] = {}
        for (src, dst), price in (prices or {}).items():
            if price < 0:
                raise PlacementError(f"negative link price {src}->{dst}")
            if src == dst:
                if price != 0:
                    raise PlacementError(f"link {src}->{dst} must be free")
                continue
            self._prices[(src, dst)] = price

    @classmethod
    def uniform(cls, price: Any) -> LinkPrices:
        return cls(default=price)

    def price(self, src: str, dst: str) -> Any:
        if src == dst:
            return 0
        return self._prices.get((src, dst), self.default)

    def with_price(self, src: str, dst: str, price: Any) -> LinkPrices:
        prices = dict(self._prices)
        prices[(src, dst)] = price
        return LinkPrices(prices, self.default)

    def to_dict(self, site_ids: Iterable[str]) -> dict[str, dict[str, Any]]:
        ids = sorted(site_ids)
        return {a: {b: self.price(a, b) for b in ids if b != a} for a in ids}


@dataclass(frozen=True)
class Source:
    site_id: str
    bytes: Any
    name: str | None = None


@dataclass(frozen=True)
class Operator:
    children: tuple[PlanNode, ...]
    instr_per_input_byte: Any = 0.0
    selectivity: Any = 1.0
    pinned_site: str | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise PlacementError("operator needs at least one child")
        if self.instr_per_input_byte < 0:
            raise PlacementError("instr_per_input_byte must be >= 0")
        if self.selectivity < 0 or self.selectivity == math.inf:
            raise PlacementError("selectivity must be finite and >= 0")


PlanNode = Union[Source, Operator]


@dataclass(frozen=True)
class Plan:
    root: PlanNode
    client_site: str


def node_output_bytes(node: PlanNode) -> Any:
    """Bytes a node emits: a source's size, or selectivity times total input."""
    if isinstance(node, Source):
        return node.bytes
    return node.selectivity * sum((node_output_bytes(c) for c in node.children), 0)


def _input_bytes(op: Operator) -> Any:
    return sum((node_output_bytes(c) for c in op.children), 0)


def iter_nodes(plan: Plan) -> Iterator[tuple[str, PlanNode]]:
    """Pre-order walk yielding ``(node_id, node)``.

    Unnamed nodes are numbered by pre-order position: ``op0``, ``src1``, ...
    """
    counter = itertools.count()

    def walk(node: PlanNode) -> Iterator[tuple[str, PlanNode]]:
        index = next(counter)
        if isinstance(node, Source):
            yield node.name or f"src{index}", node
        else:
            yield node.name or f"op{index}", node
            for child in node.children:
                yield from walk(child)

    yield from walk(plan.root)


def _index(plan: Plan) -> dict[int, str]:
    """id(node) -> node id, checking uniqueness and tree shape."""
    ids: dict[int, str] = {}
    seen: set[str] = set()
    for node_id, node in iter_nodes(plan):
        if node_id in seen:
            raise PlacementError(f"duplicate node id {node_id!r}")
        if id(node) in ids:
            raise PlacementError("plan nodes may not be shared (plans are trees)")
        seen.add(node_id)
        ids[id(node)] = node_id
    return ids


def operator_ids(plan: Plan) -> list[str]:
    return [nid for nid, node in iter_nodes(plan) if isinstance(node, Operator)]


def _validate(plan: Plan, sites: Sequence[Site]) -> dict[str, Site]:
    if not sites:
        raise PlacementError("no sites")
    by_id = {s.id: s for s in sites}
    if len(by_id) != len(sites):
        raise PlacementError("duplicate site ids")
    if plan.client_site not in by_id:
        raise PlacementError(f"unknown client site {plan.client_site!r}")
    for node_id, node in iter_nodes(plan):
        if isinstance(node, Source) and node.site_id not in by_id:
            raise PlacementError(f"source {node_id} references unknown site {node.site_id!r}")
        if isinstance(node, Operator) and node.pinned_site is not None and node.pinned_site not in by_id:
            raise PlacementError(f"operator {node_id} pinned to unknown site {node.pinned_site!r}")
    return by_id


@dataclass(frozen=True)
class NodeCost:
    site: str
    compute: Any
    inbound_transfer: Any
    output_bytes: Any

    def to_dict(self) -> dict[str, Any]:
        return {
            "site": self.site,
            "compute": self.compute,
            "inbound_transfer": self.inbound_transfer,
            "output_bytes": self.output_bytes,
        }


@dataclass(frozen=True)
class PlacementResult:
    assignment: dict[str, str]
    total_cost: Any
    per_node: dict[str, NodeCost]
    delivery: Any = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "assignment": dict(sorted(self.assignment.items())),
            "total_cost": self.total_cost,
            "delivery": self.delivery,
            "per_node": {k: v.to_dict() for k, v in sorted(self.per_node.items())},
        }


def evaluate_assignment(
    plan: Plan, sites: Sequence[Site], links: LinkPrices, assignment: Mapping[str, str]
) -> PlacementResult:
    """Itemised cost of a fixed assignment (operator id -> site id)."""
    by_id = _validate(plan, sites)
    ids = _index(plan)
    per_node: dict[str, NodeCost] = {}
    located: dict[int, str] = {}

    for node_id, node in iter_nodes(plan):
        if isinstance(node, Source):
            located[id(node)] = node.site_id
            continue
        if node_id not in assignment:
            raise PlacementError(f"no site assigned to operator {node_id!r}")
        site = assignment[node_id]
        if site not in by_id:
            raise PlacementError(f"operator {node_id!r} assigned to unknown site {site!r}")
        if node.pinned_site is not None and site != node.pinned_site:
            raise PlacementError(f"operator {node_id!r} is pinned to {node.pinned_site!r}, not {site!r}")
        located[id(node)] = site

    total: Any = 0
    for node_id, node in iter_nodes(plan):
        site = located[id(node)]
        out = node_output_bytes(node)
        if isinstance(node, Source):
            per_node[node_id] = NodeCost(site, 0, 0, out)
            continue
        compute = node.instr_per_input_byte * _input_bytes(node) * by_id[site].usd_per_instruction
        inbound: Any = 0
        for child in node.children:
            inbound += node_output_bytes(child) * links.price(located[id(child)], site)
        per_node[node_id] = NodeCost(site, compute, inbound, out)
        total += compute + inbound

    root_site = located[id(plan.root)]
    delivery = node_output_bytes(plan.root) * links.price(root_site, plan.client_site)
    total += delivery
    return PlacementResult(
        assignment={ids[id(n)]: located[id(n)] for _, n in iter_nodes(plan) if isinstance(n, Operator)},
        total_cost=total,
        per_node=per_node,
        delivery=delivery,
    )


def cost_of_assignment(
    plan: Plan, sites: Sequence[Site], links: LinkPrices, assignment: Mapping[str, str]
) -> Any:
    return evaluate_assignment(plan, sites, links, assignment).total_cost


def ship_everything_assignment(plan: Plan) -> dict[str, str]:
    """Every unpinned operator at the client: the no-pushdown baseline."""
    return {
        nid: (node.pinned_site or plan.client_site)
        for nid, node in iter_nodes(plan)
        if isinstance(node, Operator)
    }


def optimize(plan: Plan, sites: Sequence[Site], links: LinkPrices) -> PlacementResult:
    """Cheapest assignment of operators to sites.

    Bottom-up DP: ``best[node][site]`` is the cheapest cost of the subtree
    with ``node`` running at ``site``. Children are chosen independently
    given their parent's site, so the DP is exact on trees. Ties go to the
    lexicographically smallest site id.
    """
    by_id = _validate(plan, sites)
    ids = _index(plan)
    order = sorted(by_id)

    # id(node) -> {site: (cost, {child index: chosen child site})}
    table: dict[int, dict[str, tuple[Any, list[str]]]] = {}

    def solve(node: PlanNode) -> dict[str, tuple[Any, list[str]]]:
        if isinstance(node, Source):
            table[id(node)] = {node.site_id: (0, [])}
            return table[id(node)]
        child_tables = [solve(c) for c in node.children]
        child_out = [node_output_bytes(c) for c in node.children]
        work = node.instr_per_input_byte * sum(child_out, 0)
        candidates = [node.pinned_site] if node.pinned_site is not None else order
        best: dict[str, tuple[Any, list[str]]] = {}
        for site in candidates:
            cost: Any = work * by_id[site].usd_per_instruction
            picks: list[str] = []
            for child_table, out in zip(child_tables, child_out):
                choice, choice_cost = None, math.inf
                for child_site in sorted(child_table):
                    c = child_table[child_site][0] + out * links.price(child_site, site)
                    if c < choice_cost:
                        choice, choice_cost = child_site, c
                assert choice is not None
                cost += choice_cost
                picks.append(choice)
            best[site] = (cost, picks)
        table[id(node)] = best
        return best

    root_table = solve(plan.root)
    root_out = node_output_bytes(plan.root)
    root_site, root_cost = None, math.inf
    for site in sorted(root_table):
        c = root_table[site][0] + root_out * links.price(site, plan.client_site)
        if c < root_cost:
            root_site, root_cost = site, c
    assert root_site is not None

    assignment: dict[str, str] = {}

    def unwind(node: PlanNode, site: str) -> None:
        if isinstance(node, Source):
            return
        assignment[ids[id(node)]] = site
        for child, child_site in zip(node.children, table[id(node)][site][1]):
            unwind(child, child_site)

    unwind(plan.root, root_site)
    return evaluate_assignment(plan, sites, links, assignment)


def brute_force(plan: Plan, sites: Sequence[Site], links: LinkPrices) -> tuple[Any, dict[str, str]]:
    """Minimum over every assignment; exponential, for testing small plans."""
    _validate(plan, sites)
    ops = [(nid, node) for nid, node in iter_nodes(plan) if isinstance(node, Operator)]
    choices = [[node.pinned_site] if node.pinned_site else sorted(s.id for s in sites) for _, node in ops]
    best_cost, best_assignment = math.inf, {}
    for combo in itertools.product(*choices):
        assignment = {nid: site for (nid, _), site in zip(ops, combo)}
        cost = cost_of_assignment(plan, sites, links, assignment)
        if cost < best_cost:
            best_cost, best_assignment = cost, assignment
    return best_cost, best_assignment


# -- plan documents ---------------------------------------------------------


@dataclass(frozen=True)
class PlanDocument:
    plan: Plan
    sites: tuple[Site, ...]
    links: LinkPrices = field(compare=False)


def _node_from_dict(doc: Any) -> PlanNode:
    if not isinstance(doc, Mapping) or len(doc) != 1 or not ({"source", "operator"} & set(doc)):
        raise PlacementError('each node must be {"source": {...}} or {"operator": {...}}')
    ((kind, body),) = doc.items()
    if not isinstance(body, Mapping):
        raise PlacementError(f"{kind} body must be an object")
    try:
        if kind == "source":
            extra = set(body) - {"site", "bytes", "name"}
            if extra or "site" not in body or "bytes" not in body:
                raise PlacementError("source needs 'site' and 'bytes' (and optional 'name')")
            return Source(site_id=body["site"], bytes=coerce_quantity(body["bytes"], Kind.BYTES), name=body.get("name"))
        extra = set(body) - {"children", "instr_per_input_byte", "selectivity", "pinned_site", "name"}
        if extra:
            raise PlacementError(f"unknown operator fields: {', '.join(sorted(extra))}")
        children = body.get("children")
        if not isinstance(children, list) or not children:
            raise PlacementError("operator needs a non-empty 'children' list")
        return Operator(
            children=tuple(_node_from_dict(c) for c in children),
            instr_per_input_byte=coerce_quantity(body.get("instr_per_input_byte", 0), Kind.INSTRUCTIONS),
            selectivity=coerce_quantity(body.get("selectivity", 1), Kind.INSTRUCTIONS),
            pinned_site=body.get("pinned_site"),
            name=body.get("name"),
        )
    except QuantityError as exc:
        raise PlacementError(str(exc)) from None


def _node_to_dict(node: PlanNode) -> dict[str, Any]:
    if isinstance(node, Source):
        body: dict[str, Any] = {"site": node.site_id, "bytes": node.bytes}
        if node.name:
            body["name"] = node.name
        return {"source": body}
    body = {
        "children": [_node_to_dict(c) for c in node.children],
        "instr_per_input_byte": node.instr_per_input_byte,
        "selectivity": node.selectivity,
    }
    if node.pinned_site:
        body["pinned_site"] = node.pinned_site
    if node.name:
        body["name"] = node.name
    return {"operator": body}


def plan_from_dict(doc: Mapping[str, Any], wan_price: float) -> PlanDocument:
    """Parse a plan document.

    ``links`` is nested ``{src: {dst: price}}``; omitted off-diagonal pairs
    cost ``wan_price`` per byte.
    """
    if not isinstance(doc, Mapping):
        raise PlacementError("plan document must be a JSON object")
    extra = set(doc) - {"sites", "links", "root", "client_site"}
    if extra:
        raise PlacementError(f"unknown plan fields: {', '.join(sorted(extra))}")
    for key in ("sites", "root", "client_site"):
        if key not in doc:
            raise PlacementError(f"plan document missing {key!r}")
    if not isinstance(doc["sites"], list):
        raise PlacementError("'sites' must be a list")
    try:
        sites = tuple(
            Site(s["id"], coerce_quantity(s.get("usd_per_instruction", 0), Kind.MONEY)) for s in doc["sites"]
        )
        prices: dict[tuple[str, str], float] = {}
        links_doc = doc.get("links", {})
        if not isinstance(links_doc, Mapping):
            raise PlacementError("'links' must be an object")
        for src, row in links_doc.items():
            if not isinstance(row, Mapping):
                raise PlacementError(f"links[{src!r}] must be an object")
            for dst, price in row.items():
                prices[(src, dst)] = coerce_quantity(price, Kind.MONEY)
    except (KeyError, TypeError) as exc:
        raise PlacementError(f"malformed site entry: {exc}") from None
    except QuantityError as exc:
        raise PlacementError(str(exc)) from None
    known = {s.id for s in sites}
    for src, dst in prices:
        if src not in known or dst not in known:
            raise PlacementError(f"link {src}->{dst} references an unknown site")
    plan = Plan(root=_node_from_dict(doc["root"]), client_site=doc["client_site"])
    _validate(plan, sites)
    _index(plan)
    return PlanDocument(plan, sites, LinkPrices(prices, default=wan_price))


def plan_to_dict(document: PlanDocument) -> dict[str, Any]:
    ids = [s.id for s in document.sites]
    return {
        "sites": [{"id": s.id, "usd_per_instruction": s.usd_per_instruction} for s in document.sites],
        "links": document.links.to_dict(ids),
        "client_site": document.plan.client_site,
        "root": _node_to_dict(document.plan.root),
    }
