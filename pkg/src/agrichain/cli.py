"""Operator commands: run a node, manage keys, submit, trace, simulate."""

from __future__ import annotations

import json
import sys
import time as _time
from pathlib import Path

import click
import httpx

from .chainstate import replay, state_digest
from .config import ChainConfig, NodeConfig
from .keys import Keypair
from .ledger import validate_chain
from .network import SimConfig, run_simulation
from .node import NodeRuntime
from .scenario import build_demo
from .storage import BlockLog
from .transactions import OpenAuction, Role

DEFAULT_NODE_URL = "http://127.0.0.1:8545"


@click.group()
def main():
    """Supply-chain blockchain node and tools."""


@main.group()
def node():
    """Node lifecycle."""


@node.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), required=True)
def node_run(config_path: Path):
    """Run a node: replay the log, serve the API, mine submissions."""
    import uvicorn

    from .api import create_app

    cfg = NodeConfig.load(config_path)
    runtime = NodeRuntime(cfg)
    runtime.start()
    click.echo(f"chain height {runtime.snapshot.height}, tip {runtime.snapshot.tip.hash.hex()[:16]}")
    try:
        uvicorn.run(create_app(runtime), host=cfg.api_host, port=cfg.api_port, log_level="warning")
    finally:
        runtime.stop()


@main.command()
@click.option("--role", type=click.Choice([r.wire_name for r in Role]), required=True)
@click.option("--name", default="", help="display name for registration")
@click.option("--out", type=click.Path(path_type=Path), default=None)
def keygen(role: str, name: str, out: Path):
    """Generate an Ed25519 identity and write it to a key file."""
    pair = Keypair.generate()
    path = out or Path(f"{role}-key.json")
    pair.save(path, role=role, display_name=name)
    click.echo(f"actor_id {pair.actor_id.hex()}")
    click.echo(f"key file {path}")


@main.group()
def tx():
    """Transaction handling."""


@tx.command("submit")
@click.argument("tx_file", type=click.Path(exists=True, path_type=Path))
@click.option("--node", "node_url", default=DEFAULT_NODE_URL)
def tx_submit(tx_file: Path, node_url: str):
    """Submit a signed transaction JSON file to a node."""
    payload = json.loads(tx_file.read_text())
    response = httpx.post(f"{node_url}/v1/transactions", json=payload, timeout=10.0)
    click.echo(json.dumps(response.json(), indent=2))
    if response.status_code != 202:
        sys.exit(1)


@main.command()
@click.argument("lot_id")
@click.option("--node", "node_url", default=DEFAULT_NODE_URL)
def trace(lot_id: str, node_url: str):
    """Fetch and print a lot's chain-of-custody report."""
    response = httpx.get(f"{node_url}/v1/lots/{lot_id}/trace", timeout=10.0)
    if response.status_code != 200:
        click.echo(json.dumps(response.json(), indent=2))
        sys.exit(1)
    report = response.json()
    click.echo(json.dumps(report, indent=2))


@main.group()
def sim():
    """Deterministic network simulation."""


@sim.command("run")
@click.argument("sim_config", type=click.Path(exists=True, path_type=Path))
@click.option("--csv", "csv_out", type=click.Path(path_type=Path), default=Path("sim-metrics.csv"))
def sim_run(sim_config: Path, csv_out: Path):
    """Run a simulation config and write per-round metrics as CSV."""
    config = SimConfig.load(sim_config)
    result = run_simulation(config)
    csv_out.write_text(result.metrics_csv())
    for node_obj in result.nodes:
        click.echo(
            f"node {node_obj.node_id}: height {node_obj.height} "
            f"tip {node_obj.tip.hash.hex()[:16]} state {node_obj.state_digest().hex()[:16]}"
        )
    click.echo(f"metrics written to {csv_out}")


@main.group()
def log():
    """Block log inspection."""


@log.command("verify")
@click.argument("log_path", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
def log_verify(log_path: Path, config_path: Path):
    """Validate a block log end to end and print the tip and state digest."""
    chain_cfg = NodeConfig.load(config_path).chain if config_path else ChainConfig()
    with BlockLog(log_path) as block_log:
        blocks = block_log.blocks
    if not blocks:
        click.echo("log is empty")
        sys.exit(1)
    bad = validate_chain(blocks, chain_cfg.genesis().hash)
    if bad is not None:
        click.echo(f"INVALID at block {bad}")
        sys.exit(1)
    state = replay(blocks, chain_cfg)
    click.echo(f"ok: {len(blocks)} blocks")
    click.echo(f"tip {blocks[-1].hash.hex()}")
    click.echo(f"state_digest {state_digest(state).hex()}")


@main.group()
def demo():
    """Demo data for trying the node and console."""


@demo.command("seed")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("./demo"))
@click.option("--cycles", default=2, show_default=True)
@click.option("--port", default=8545, show_default=True)
def demo_seed(out_dir: Path, cycles: int, port: int):
    """Build a demo chain with history plus one live auction, and key files."""
    now = int(_time.time())
    base_time = now - 400 * 600
    builder, cast, outcomes = build_demo(cycles=cycles, base_time=base_time)

    # one auction left open into wall-clock future so the console can bid
    lot_id = builder.create_lot(cast["farmer"])
    builder.record_sensor_batch(cast["farmer"], lot_id)
    open_tx = builder.submit(
        OpenAuction(
            lot_id=lot_id,
            reserve_price=10_000,
            open_time=builder.time,
            close_time=now + 6 * 3600,
        ),
        cast["farmer"],
    )
    builder.seal_block()

    data_dir = out_dir / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    from .storage import BlockLog as _Log

    log_path = data_dir / "blocks.agri"
    if log_path.exists():
        log_path.unlink()
    with _Log(log_path) as block_log:
        for block in builder.chain:
            block_log.append_block(block)

    keys_dir = out_dir / "keys"
    keys_dir.mkdir(parents=True, exist_ok=True)
    for role_name, pair in cast.items():
        pair.save(keys_dir / f"{role_name}.json", role=role_name, display_name=role_name)

    node_cfg = NodeConfig(data_dir=data_dir, api_port=port)
    node_cfg.save(out_dir / "config.json")

    click.echo(f"seeded {len(builder.chain)} blocks, {builder.tx_count()} transactions")
    click.echo(f"open auction {open_tx.tx_id.hex()}")
    click.echo(f"traceable lot {outcomes[-1]['child_lot_id'].hex()}")
    click.echo(f"run: agrichain node run --config {out_dir / 'config.json'}")


if __name__ == "__main__":
    main()
