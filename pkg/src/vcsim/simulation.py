"""Run orchestration: build a chain from a scenario, run it, collect artifacts.

A run is a pure function of (scenario, seed): the trace, ledger, cost ledger,
and KPI report from two runs with the same inputs are byte-identical when
serialized. Every output file starts with a provenance header carrying the
scenario digest and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .actors import Chain
from .engine import Engine, Event, trace_lines
from .ledger import InventoryRecord, Ledger, product, raw
from .metrics import CostLedger, KpiReport, build_report
from .scenario import Scenario


@dataclass(slots=True)
class RunArtifacts:
    scenario: Scenario
    trace: list[Event]
    ledger: Ledger
    costs: CostLedger
    inventories: dict[tuple[str, str], InventoryRecord]
    report: KpiReport
    launches: list[tuple[float, int]]
    consumed_raw_kg: dict[str, float]

    def stock(self, owner: str, item_code: str) -> float:
        record = self.inventories.get((owner, item_code))
        return record.on_hand if record is not None else 0.0

    def write(self, out_dir: str | Path) -> None:
        write_artifacts(self, Path(out_dir))


def run_scenario(scenario: Scenario, out_dir: str | Path | None = None) -> RunArtifacts:
    """Execute one deterministic run; optionally persist all artifact files."""
    scenario.validate()
    engine = Engine(seed=scenario.seed)
    chain = Chain(scenario, engine)
    chain.register()
    trace = engine.run_until(scenario.horizon_hours)
    chain.finalize()

    report = build_report(
        chain.ledger,
        chain.inventories.values(),
        chain.costs,
        chain.satisfaction_series,
        actor_names=scenario.actor_names(),
        customer_names=[c.name for c in scenario.customers],
        period_hours=scenario.horizon_hours,
        seed=scenario.seed,
        mode=scenario.mode,
        scenario_digest=scenario.digest(),
        topology_digest=scenario.topology_digest(),
        produced_boxes={
            product(pid).code: boxes for pid, boxes in sorted(chain.produced_boxes.items())
        },
    )
    artifacts = RunArtifacts(
        scenario=scenario,
        trace=trace,
        ledger=chain.ledger,
        costs=chain.costs,
        inventories=chain.inventories,
        report=report,
        launches=chain.launches,
        consumed_raw_kg={
            raw(rid).code: kg for rid, kg in sorted(chain.consumed_raw_kg.items())
        },
    )
    if out_dir is not None:
        write_artifacts(artifacts, Path(out_dir))
    return artifacts


def _header_line(scenario: Scenario) -> str:
    return json.dumps(
        {
            "record": "header",
            "scenario_digest": scenario.digest(),
            "topology_digest": scenario.topology_digest(),
            "seed": scenario.seed,
            "mode": scenario.mode,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def write_artifacts(artifacts: RunArtifacts, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = artifacts.scenario
    header = _header_line(scenario)

    def dump(name: str, lines: list[str]) -> None:
        (out_dir / name).write_text(
            "\n".join([header] + lines) + "\n", encoding="utf-8"
        )

    dump("trace.jsonl", trace_lines(artifacts.trace))
    dump("ledger.jsonl", artifacts.ledger.export_lines())
    dump("costs.jsonl", artifacts.costs.export_lines())
    dump(
        "satisfaction.jsonl",
        [
            json.dumps(entry, sort_keys=True, separators=(",", ":"))
            for entry in artifacts.report.satisfaction
        ],
    )
    (out_dir / "kpi.json").write_text(artifacts.report.to_json() + "\n", encoding="utf-8")

    csv_lines = [
        f"# scenario={scenario.digest()} seed={scenario.seed} mode={scenario.mode}",
        "actor,order_id,delivery_hours",
    ]
    for name, kpis in sorted(artifacts.report.actors.items()):
        for order_id, hours in kpis.delivery_series:
            csv_lines.append(f"{name},{order_id},{hours!r}")
    (out_dir / "delivery_times.csv").write_text(
        "\n".join(csv_lines) + "\n", encoding="utf-8"
    )


def inventory_snapshot(artifacts: RunArtifacts) -> dict[str, float]:
    """Final stock levels keyed 'owner/item', for quick inspection and tests."""
    return {
        f"{owner}/{code}": record.on_hand
        for (owner, code), record in sorted(artifacts.inventories.items())
    }
