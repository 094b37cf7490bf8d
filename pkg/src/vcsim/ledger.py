"""Core value-chain data types and the append-only order ledger.

The ledger is the single source of truth for information flow: every order,
every status transition, and every support ticket lands here. Providers read
their demand view out of it; the metrics layer folds it after the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator


class LedgerError(Exception):
    """Base class for ledger failures."""


class OrderValidationError(LedgerError):
    """Order rejected before it entered the ledger."""


class CorruptionError(LedgerError):
    """The ledger's append-only guarantees would be violated."""


class TransitionError(LedgerError):
    """Illegal order status transition."""


class ReservationError(LedgerError):
    """Inventory adjustment would drive the level negative."""


# -- items -------------------------------------------------------------

PRODUCT = "product"
RAW = "raw"


@dataclass(frozen=True, slots=True, order=True)
class Item:
    """A catalog item: finished product (boxes) or raw material (kg)."""

    kind: str
    id: int

    @property
    def code(self) -> str:
        return ("P" if self.kind == PRODUCT else "R") + str(self.id)

    def __str__(self) -> str:
        return self.code

    @classmethod
    def parse(cls, code: str) -> "Item":
        code = code.strip()
        if len(code) < 2 or code[0] not in "PR" or not code[1:].isdigit():
            raise OrderValidationError(f"bad item code: {code!r}")
        return cls(PRODUCT if code[0] == "P" else RAW, int(code[1:]))


def product(n: int) -> Item:
    return Item(PRODUCT, n)


def raw(n: int) -> Item:
    return Item(RAW, n)


@dataclass(frozen=True, slots=True)
class BillOfMaterials:
    """Per-product recipe: kg of each raw consumed per box produced."""

    recipes: dict[int, tuple[tuple[int, float], ...]]  # product id -> ((raw id, kg), ...)

    def needs(self, product_id: int) -> tuple[tuple[int, float], ...]:
        try:
            return self.recipes[product_id]
        except KeyError:
            raise OrderValidationError(f"no recipe for product {product_id}") from None

    def validate(self, raw_ids: Iterable[int]) -> None:
        known = set(raw_ids)
        for pid, needs in self.recipes.items():
            for rid, kg in needs:
                if kg <= 0:
                    raise OrderValidationError(
                        f"recipe of product {pid} uses non-positive {kg} kg of raw {rid}"
                    )
                if rid not in known:
                    raise OrderValidationError(
                        f"recipe of product {pid} references unknown raw {rid}"
                    )


# -- orders ------------------------------------------------------------


class OrderStatus(str, Enum):
    OPEN = "Open"
    IN_PRODUCTION = "InProduction"
    FGI = "FGI"
    IN_TRANSIT = "InTransit"
    DELIVERED = "Delivered"
    RETURN_REQUESTED = "ReturnRequested"
    RESOLVED = "Resolved"


# forward moves along Open -> InProduction -> FGI -> InTransit -> Delivered
# may skip intermediate stations (a stocked order never enters production);
# the support tail Delivered -> ReturnRequested -> Resolved never skips
LEGAL_TRANSITIONS: dict[OrderStatus, frozenset[OrderStatus]] = {
    OrderStatus.OPEN: frozenset(
        {OrderStatus.IN_PRODUCTION, OrderStatus.FGI, OrderStatus.IN_TRANSIT}
    ),
    OrderStatus.IN_PRODUCTION: frozenset({OrderStatus.FGI, OrderStatus.IN_TRANSIT}),
    OrderStatus.FGI: frozenset({OrderStatus.IN_TRANSIT}),
    OrderStatus.IN_TRANSIT: frozenset({OrderStatus.DELIVERED}),
    OrderStatus.DELIVERED: frozenset({OrderStatus.RETURN_REQUESTED}),
    OrderStatus.RETURN_REQUESTED: frozenset({OrderStatus.RESOLVED}),
    OrderStatus.RESOLVED: frozenset(),
}

#: statuses in which the ordered goods have not yet reached the client
OUTSTANDING = frozenset(
    {
        OrderStatus.OPEN,
        OrderStatus.IN_PRODUCTION,
        OrderStatus.FGI,
        OrderStatus.IN_TRANSIT,
    }
)


@dataclass(slots=True)
class Order:
    """One order: the unit of information flow between a client and a provider.

    quantity is boxes for finished goods and kg for raws. ``reserved``,
    ``shippable_after`` and the defect fields are runtime bookkeeping used
    by the actor processes; they are persisted for auditability.
    """

    order_id: int
    client: str
    provider: str
    item: Item
    quantity: float
    created_at: float
    status: OrderStatus = OrderStatus.OPEN
    reserved: float = 0.0
    shippable_after: float = 0.0
    shipped_at: float | None = None
    delivered_at: float | None = None
    defective_qty: float = 0.0
    replacement_for: int | None = None  # ticket id, for support replacements
    history: list[tuple[str, float]] = field(default_factory=list)

    def last_transition_time(self) -> float:
        return self.history[-1][1] if self.history else self.created_at


@dataclass(slots=True)
class SupportTicket:
    """A defective-delivery incident registered in the support database."""

    ticket_id: int
    order_id: int
    customer: str
    item: Item
    defective_qty: float
    opened_at: float
    replacement_order_id: int | None = None
    resolved_at: float | None = None


class Ledger:
    """Append-only store of orders, status transitions, and support tickets.

    Single-writer within a run; the transition log replays to the current
    state, which the test suite uses as an oracle.
    """

    def __init__(
        self,
        known_actors: Iterable[str] | None = None,
        known_items: Iterable[Item] | None = None,
    ) -> None:
        self.orders: dict[int, Order] = {}
        self.tickets: dict[int, SupportTicket] = {}
        self.transitions: list[tuple[int, str, float]] = []  # (order_id, status, at)
        self._known_actors = set(known_actors) if known_actors is not None else None
        self._known_items = set(known_items) if known_items is not None else None
        self._next_order_id = 1
        self._next_ticket_id = 1

    # -- appends --------------------------------------------------------

    def place(
        self,
        client: str,
        provider: str,
        item: Item,
        quantity: float,
        at: float,
        replacement_for: int | None = None,
        shippable_after: float | None = None,
    ) -> Order:
        """Allocate the next order id and append a new Open order."""
        order = Order(
            order_id=self._next_order_id,
            client=client,
            provider=provider,
            item=item,
            quantity=quantity,
            created_at=at,
            replacement_for=replacement_for,
            shippable_after=at if shippable_after is None else shippable_after,
        )
        self.append_order(order)
        return order

    def append_order(self, order: Order) -> int:
        if order.order_id in self.orders:
            raise CorruptionError(f"duplicate order id {order.order_id}")
        if order.status is not OrderStatus.OPEN:
            raise OrderValidationError(
                f"new orders must be Open, got {order.status.value}"
            )
        if order.quantity <= 0:
            raise OrderValidationError(
                f"order quantity must be positive, got {order.quantity}"
            )
        if self._known_actors is not None:
            for party in (order.client, order.provider):
                if party not in self._known_actors:
                    raise OrderValidationError(f"unknown party: {party!r}")
        if self._known_items is not None and order.item not in self._known_items:
            raise OrderValidationError(f"unknown item: {order.item.code}")
        self.orders[order.order_id] = order
        self.transitions.append((order.order_id, order.status.value, order.created_at))
        order.history.append((order.status.value, order.created_at))
        self._next_order_id = max(self._next_order_id, order.order_id + 1)
        return order.order_id

    def transition(self, order_id: int, new_status: OrderStatus, at: float) -> None:
        order = self.orders.get(order_id)
        if order is None:
            raise TransitionError(f"unknown order id {order_id}")
        if new_status not in LEGAL_TRANSITIONS[order.status]:
            raise TransitionError(
                f"illegal transition {order.status.value} -> {new_status.value} "
                f"for order {order_id}"
            )
        if at < order.last_transition_time():
            raise TransitionError(
                f"transition at t={at} precedes last transition of order {order_id}"
            )
        order.status = new_status
        if new_status is OrderStatus.IN_TRANSIT:
            order.shipped_at = at
        elif new_status is OrderStatus.DELIVERED:
            order.delivered_at = at
        order.history.append((new_status.value, at))
        self.transitions.append((order_id, new_status.value, at))

    def open_ticket(
        self, order: Order, defective_qty: float, customer: str, at: float
    ) -> SupportTicket:
        if order.order_id not in self.orders:
            raise OrderValidationError(f"ticket for unknown order {order.order_id}")
        if defective_qty <= 0 or defective_qty > order.quantity:
            raise OrderValidationError(
                f"defective quantity {defective_qty} outside (0, {order.quantity}]"
            )
        ticket = SupportTicket(
            ticket_id=self._next_ticket_id,
            order_id=order.order_id,
            customer=customer,
            item=order.item,
            defective_qty=defective_qty,
            opened_at=at,
        )
        self._next_ticket_id += 1
        self.tickets[ticket.ticket_id] = ticket
        return ticket

    # -- demand views -----------------------------------------------------

    def open_orders(self, provider: str, item: Item | None = None) -> list[Order]:
        """Current Open orders of one provider, oldest first."""
        found = [
            o
            for o in self.orders.values()
            if o.provider == provider
            and o.status is OrderStatus.OPEN
            and (item is None or o.item == item)
        ]
        found.sort(key=lambda o: (o.created_at, o.order_id))
        return found

    def orders_of(self, provider: str) -> Iterator[Order]:
        return (o for o in self.orders.values() if o.provider == provider)

    def outstanding_replenishment(self, client: str, item: Item) -> bool:
        """True while the client has any not-yet-delivered order for the item."""
        return any(
            o.client == client and o.item == item and o.status in OUTSTANDING
            for o in self.orders.values()
        )

    def census(self) -> dict[str, int]:
        counts = {status.value: 0 for status in OrderStatus}
        for o in self.orders.values():
            counts[o.status.value] += 1
        return counts

    # -- persistence --------------------------------------------------------

    def export_lines(self) -> list[str]:
        """One JSON record per order plus one per transition, replayable."""
        lines = []
        for o in sorted(self.orders.values(), key=lambda o: o.order_id):
            lines.append(
                json.dumps(
                    {
                        "record": "order",
                        "order_id": o.order_id,
                        "client": o.client,
                        "provider": o.provider,
                        "item": o.item.code,
                        "quantity": o.quantity,
                        "created_at": o.created_at,
                        "replacement_for": o.replacement_for,
                        "shippable_after": o.shippable_after,
                        "defective_qty": o.defective_qty,
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        for order_id, status, at in self.transitions:
            lines.append(
                json.dumps(
                    {"record": "transition", "order_id": order_id, "status": status, "at": at},
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        for t in sorted(self.tickets.values(), key=lambda t: t.ticket_id):
            lines.append(
                json.dumps(
                    {
                        "record": "ticket",
                        "ticket_id": t.ticket_id,
                        "order_id": t.order_id,
                        "customer": t.customer,
                        "item": t.item.code,
                        "defective_qty": t.defective_qty,
                        "opened_at": t.opened_at,
                        "replacement_order_id": t.replacement_order_id,
                        "resolved_at": t.resolved_at,
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Ledger":
        """Rebuild a ledger by replaying exported records."""
        ledger = cls()
        transitions: list[tuple[int, str, float]] = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            kind = rec.get("record")
            if kind == "header":
                continue  # provenance line of exported artifact files
            if kind == "order":
                order = Order(
                    order_id=rec["order_id"],
                    client=rec["client"],
                    provider=rec["provider"],
                    item=Item.parse(rec["item"]),
                    quantity=rec["quantity"],
                    created_at=rec["created_at"],
                    replacement_for=rec.get("replacement_for"),
                    shippable_after=rec.get("shippable_after", rec["created_at"]),
                )
                order.defective_qty = rec.get("defective_qty", 0.0)
                ledger.orders[order.order_id] = order
                ledger._next_order_id = max(ledger._next_order_id, order.order_id + 1)
            elif kind == "transition":
                transitions.append((rec["order_id"], rec["status"], rec["at"]))
            elif kind == "ticket":
                ticket = SupportTicket(
                    ticket_id=rec["ticket_id"],
                    order_id=rec["order_id"],
                    customer=rec["customer"],
                    item=Item.parse(rec["item"]),
                    defective_qty=rec["defective_qty"],
                    opened_at=rec["opened_at"],
                    replacement_order_id=rec.get("replacement_order_id"),
                    resolved_at=rec.get("resolved_at"),
                )
                ledger.tickets[ticket.ticket_id] = ticket
                ledger._next_ticket_id = max(ledger._next_ticket_id, ticket.ticket_id + 1)
            else:
                raise CorruptionError(f"unknown ledger record: {line[:80]}")
        for order_id, status, at in transitions:
            order = ledger.orders.get(order_id)
            if order is None:
                raise CorruptionError(f"transition for unknown order {order_id}")
            ledger.transitions.append((order_id, status, at))
            order.history.append((status, at))
            order.status = OrderStatus(status)
            if order.status is OrderStatus.IN_TRANSIT:
                order.shipped_at = at
            elif order.status is OrderStatus.DELIVERED:
                order.delivered_at = at
        return ledger


def replay_final_statuses(transitions: Iterable[tuple[int, str, float]]) -> dict[int, str]:
    """Fold a transition log into each order's final status (test oracle)."""
    final: dict[int, str] = {}
    for order_id, status, _ in transitions:
        final[order_id] = status
    return final


# -- inventory -----------------------------------------------------------


@dataclass(slots=True)
class InventoryRecord:
    """One stock position with its reorder policy and level history.

    Levels never go negative: callers must backlog instead of overdrawing.
    Every change appends a (time, level) sample so holding cost and mean
    stock value integrate the exact step function.
    """

    owner: str
    item: Item
    on_hand: float
    reorder_point: float | None = None  # order when strictly below this
    order_up_to: float | None = None
    unit_holding_cost: float = 0.0  # currency per unit-hour
    unit_value: float = 0.0
    samples: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.on_hand < 0:
            raise ReservationError(f"initial stock negative: {self.on_hand}")
        if self.reorder_point is not None and self.order_up_to is not None:
            if not self.reorder_point < self.order_up_to:
                raise OrderValidationError(
                    f"reorder point {self.reorder_point} must be below "
                    f"order-up-to level {self.order_up_to} ({self.owner}/{self.item})"
                )
        if not self.samples:
            self.samples.append((0.0, self.on_hand))

    def adjust(self, delta: float, at: float) -> None:
        level = self.on_hand + delta
        if level < -1e-9:
            raise ReservationError(
                f"{self.owner}/{self.item}: adjustment {delta} would drive "
                f"stock {self.on_hand} negative"
            )
        self.on_hand = max(0.0, level)
        self.samples.append((at, self.on_hand))

    def level_integral(self, t_end: float) -> float:
        """Integral of the stock level step function over [0, t_end] (unit-hours)."""
        total = 0.0
        for (t0, level), (t1, _) in zip(self.samples, self.samples[1:]):
            if t0 >= t_end:
                break
            total += level * (min(t1, t_end) - t0)
        last_t, last_level = self.samples[-1]
        if last_t < t_end:
            total += last_level * (t_end - last_t)
        return total

    def time_weighted_mean(self, t_end: float) -> float:
        if t_end <= 0:
            return self.samples[0][1]
        return self.level_integral(t_end) / t_end
