"""pulseguard-server: run the REST server from a config file + env overrides."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import uvicorn
import yaml

from pulseguard.alerts.rules import AlertRule
from pulseguard.server.api import create_app
from pulseguard.server.core import ServerConfig, ServerCore

ENV_PREFIX = "PULSEGUARD_"


def load_config(path: str | None) -> ServerConfig:
    doc = {}
    if path:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    rule_doc = doc.get("alert_rule", {})

    def env(name, default, cast=str):
        raw = os.environ.get(ENV_PREFIX + name)
        return cast(raw) if raw is not None else default

    return ServerConfig(
        store_path=env("STORE", doc.get("store_path", ":memory:")),
        listen_host=env("HOST", doc.get("listen_host", "127.0.0.1")),
        listen_port=env("PORT", doc.get("listen_port", 8800), int),
        alert_rule=AlertRule(
            sbp_threshold_mmhg=float(rule_doc.get("sbp_threshold_mmhg", 140.0)),
            dbp_threshold_mmhg=float(rule_doc.get("dbp_threshold_mmhg", 90.0)),
            min_gap_hours=float(rule_doc.get("min_gap_hours", 6.0)),
            evidence_window_days=float(rule_doc.get("evidence_window_days", 7.0)),
        ),
        risk_model_path=env("RISK_MODEL", doc.get("risk_model_path")),
        bootstrap_token=env("BOOTSTRAP_TOKEN", doc.get("bootstrap_token")),
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pulseguard-server")
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--host", help="listen host override")
    parser.add_argument("--port", type=int, help="listen port override")
    parser.add_argument("--store", help="store path override")
    parser.add_argument(
        "--token-file", help="write the bootstrap admin token to this path"
    )
    parser.add_argument("--dashboard-dir", help="serve this directory at /dashboard")
    args = parser.parse_args(argv)

    config = load_config(args.config)
    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    if args.store:
        config.store_path = args.store

    core = ServerCore(config)
    token = getattr(core, "bootstrap_admin_token", None)
    if token:
        if args.token_file:
            Path(args.token_file).write_text(token + "\n", encoding="utf-8")
        else:
            print(f"bootstrap admin token: {token}", flush=True)

    app = create_app(core, dashboard_dir=args.dashboard_dir)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
