from __future__ import annotations

import json
import socket
import threading
import time

import pytest
from click.testing import CliRunner

from agrichain.cli import main
from agrichain.config import NodeConfig
from agrichain.keys import Keypair
from agrichain.network import SimConfig


@pytest.fixture()
def runner():
    return CliRunner()


class TestKeygen:
    def test_writes_key_file(self, runner, tmp_path):
        out = tmp_path / "farmer.json"
        result = runner.invoke(main, ["keygen", "--role", "farmer", "--name", "Field A", "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["role"] == "farmer"
        pair, _ = Keypair.load(out)
        assert pair.actor_id.hex() in result.output

    def test_rejects_unknown_role(self, runner):
        result = runner.invoke(main, ["keygen", "--role", "wizard"])
        assert result.exit_code != 0


class TestDemoAndLog:
    def test_seed_then_verify(self, runner, tmp_path):
        out = tmp_path / "demo"
        result = runner.invoke(main, ["demo", "seed", "--out", str(out), "--cycles", "1"])
        assert result.exit_code == 0, result.output
        assert (out / "config.json").exists()
        assert (out / "keys" / "farmer.json").exists()

        verify = runner.invoke(
            main,
            ["log", "verify", str(out / "data" / "blocks.agri"), "--config", str(out / "config.json")],
        )
        assert verify.exit_code == 0, verify.output
        assert verify.output.startswith("ok:")
        assert "state_digest" in verify.output

    def test_verify_flags_tampering(self, runner, tmp_path):
        out = tmp_path / "demo"
        assert runner.invoke(main, ["demo", "seed", "--out", str(out), "--cycles", "1"]).exit_code == 0
        log_path = out / "data" / "blocks.agri"
        raw = bytearray(log_path.read_bytes())
        raw[150] ^= 0xFF  # inside an early block
        log_path.write_bytes(bytes(raw))
        verify = runner.invoke(
            main,
            ["log", "verify", str(log_path), "--config", str(out / "config.json")],
        )
        assert verify.exit_code == 1


class TestSim:
    def test_sim_run_writes_csv(self, runner, tmp_path):
        config = SimConfig(node_count=3, hash_power=(1, 1, 1), rounds=8, seed=4)
        config_path = tmp_path / "sim.json"
        config_path.write_text(json.dumps(config.to_json()))
        csv_path = tmp_path / "metrics.csv"
        result = runner.invoke(main, ["sim", "run", str(config_path), "--csv", str(csv_path)])
        assert result.exit_code == 0, result.output
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "round,node,height,mempool_size,tip_digest"
        assert result.output.count("node ") == 3


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def served_demo(tmp_path_factory):
    """Seed a demo dir and serve it over real HTTP for CLI round trips."""
    import uvicorn

    from agrichain.api import create_app
    from agrichain.node import NodeRuntime

    out = tmp_path_factory.mktemp("cli-demo")
    runner = CliRunner()
    seed = runner.invoke(main, ["demo", "seed", "--out", str(out), "--cycles", "1"])
    assert seed.exit_code == 0, seed.output
    traceable_lot = next(
        line.split()[-1] for line in seed.output.splitlines() if line.startswith("traceable lot")
    )
    auction_id = next(
        line.split()[-1] for line in seed.output.splitlines() if line.startswith("open auction")
    )

    runtime = NodeRuntime(NodeConfig.load(out / "config.json"))
    runtime.start()
    port = _free_port()
    server = uvicorn.Server(
        uvicorn.Config(create_app(runtime), host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.02)
    assert server.started
    yield {
        "url": f"http://127.0.0.1:{port}",
        "out": out,
        "lot": traceable_lot,
        "auction_id": auction_id,
        "runtime": runtime,
    }
    server.should_exit = True
    thread.join(timeout=5)
    runtime.stop()


class TestHttpCommands:
    def test_trace_command(self, runner, served_demo):
        result = runner.invoke(main, ["trace", served_demo["lot"], "--node", served_demo["url"]])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["lot_id"] == served_demo["lot"]
        assert report["origins"] and report["vehicles"]

    def test_trace_unknown_lot_fails(self, runner, served_demo):
        result = runner.invoke(main, ["trace", "2" * 64, "--node", served_demo["url"]])
        assert result.exit_code == 1

    def test_tx_submit_command(self, runner, served_demo, tmp_path):
        from agrichain.transactions import PlaceBid, sign_transaction

        processor, _ = Keypair.load(served_demo["out"] / "keys" / "processor.json")
        tx = sign_transaction(
            PlaceBid(auction_id=bytes.fromhex(served_demo["auction_id"]), amount=12_345),
            processor,
        )
        tx_file = tmp_path / "bid.json"
        tx_file.write_text(json.dumps(tx.to_json()))
        result = runner.invoke(
            main, ["tx", "submit", str(tx_file), "--node", served_demo["url"]]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["tx_id"] == tx.tx_id.hex()
        assert served_demo["runtime"].wait_for_tx(tx.tx_id)

    def test_tx_submit_rejection_exits_nonzero(self, runner, served_demo, tmp_path):
        from agrichain.transactions import PlaceBid, sign_transaction

        ghost = Keypair.from_seed(b"cli-ghost")
        tx = sign_transaction(
            PlaceBid(auction_id=bytes.fromhex(served_demo["auction_id"]), amount=99_999), ghost
        )
        tx_file = tmp_path / "bad.json"
        tx_file.write_text(json.dumps(tx.to_json()))
        result = runner.invoke(main, ["tx", "submit", str(tx_file), "--node", served_demo["url"]])
        assert result.exit_code == 1
        assert "UnknownSigner" in result.output
